//! Hecke eigenforms and their normalized eigenvalues.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use rug::ops::Pow;
use rug::{Assign, Float, Integer};

use super::charpoly::charpoly_bounded;
use super::hecke::hecke_matrix;
use super::miller::miller_basis;
use super::qexp::{dim_cusp_forms, QExpansion};
use super::roots::isolate_scaled_roots;
use crate::arith::{factorize, gcd, num_divisors, primes_up_to};
use crate::error::{Error, Result};

pub const DEFAULT_PRECISION_BITS: u32 = 192;

/// Number of eigenvalues kept by default for weight `k`.
pub fn default_nterms(k: u32) -> usize {
    let kf = k as f64;
    let n = (kf / (2.0 * PI)).ceil() + (4.0 * (kf * kf.ln()).sqrt() / (2.0 * PI)).ceil() + 16.0;
    n as usize
}

/// A normalized Hecke eigenform `f = sum lambda(n) n^((k-1)/2) q^n`.
#[derive(Clone, Debug)]
pub struct Eigenform {
    weight: u32,
    dim_index: usize,
    precision_bits: u32,
    lambdas: Vec<Float>,
    lambdas_f64: Vec<f64>,
    a_int: Option<Vec<Integer>>,
}

impl Eigenform {
    /// Assembles an eigenform from stored eigenvalues `lambda(1..=N)`.
    pub fn from_lambdas(
        weight: u32,
        dim_index: usize,
        precision_bits: u32,
        lambdas: Vec<Float>,
        a_int: Option<Vec<Integer>>,
    ) -> Result<Self> {
        if weight < 12 || weight % 2 != 0 {
            return Err(Error::InvalidWeight { weight, reason: "must be even and >= 12" });
        }
        if lambdas.is_empty() {
            return Err(Error::InvalidArgument("empty eigenvalue table".into()));
        }
        if let Some(a) = &a_int {
            if a.len() != lambdas.len() {
                return Err(Error::InvalidArgument("exact coefficient table length mismatch".into()));
            }
        }
        let lambdas: Vec<Float> = lambdas.into_iter().map(|x| Float::with_val(precision_bits, x)).collect();
        let lambdas_f64 = lambdas.iter().map(Float::to_f64).collect();
        Ok(Eigenform { weight, dim_index, precision_bits, lambdas, lambdas_f64, a_int })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// `(k - 1) / 2`.
    pub fn k_prime(&self) -> f64 {
        (self.weight as f64 - 1.0) / 2.0
    }

    pub fn dim_index(&self) -> usize {
        self.dim_index
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn nterms(&self) -> usize {
        self.lambdas.len()
    }

    /// `lambda(1..=N)`.
    pub fn lambdas(&self) -> &[Float] {
        &self.lambdas
    }

    /// `lambda(n)` as `f64`; `n` must be stored.
    pub fn lambda_f64(&self, n: usize) -> f64 {
        self.lambdas_f64[n - 1]
    }

    /// Exact integer coefficients `a(1..=N)` for rational eigenforms.
    pub fn a_int(&self) -> Option<&[Integer]> {
        self.a_int.as_deref()
    }

    /// Bound on the absolute error of each stored eigenvalue.
    pub fn lambda_err(&self) -> f64 {
        (4.0 - self.precision_bits as f64).exp2()
    }
}

impl fmt::Display for Eigenform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} idx={}", self.weight, self.dim_index)
    }
}

/// `lambda(n)`, stored or assembled from multiplicativity and the prime-power recursion.
pub fn lambda(f: &Eigenform, n: u64) -> Result<Float> {
    if n == 0 {
        return Err(Error::InvalidArgument("lambda(0) is undefined".into()));
    }
    let stored = f.nterms() as u64;
    if n <= stored {
        return Ok(f.lambdas[n as usize - 1].clone());
    }
    let prec = f.precision_bits;
    let mut out = Float::with_val(prec, 1);
    for (p, e) in factorize(n) {
        let pe = p.pow(e);
        if pe <= stored {
            out *= &f.lambdas[pe as usize - 1];
            continue;
        }
        if p > stored {
            return Err(Error::LambdaUnavailable { n });
        }
        let lp = &f.lambdas[p as usize - 1];
        let mut prev = Float::with_val(prec, 1);
        let mut cur = lp.clone();
        for _ in 1..e {
            let next = Float::with_val(prec, lp * &cur) - &prev;
            prev = cur;
            cur = next;
        }
        out *= cur;
    }
    Ok(out)
}

/// Summary of the Hecke-relation check.
#[derive(Clone, Debug)]
pub struct HeckeReport {
    pub tol: f64,
    pub max_residual: f64,
    pub worst_relation: String,
    pub relations_checked: usize,
    pub deligne_violations: Vec<u64>,
    pub pass: bool,
}

/// Checks `lambda(1) = 1`, multiplicativity, the prime-power recursion and the Deligne bound
/// over every relation that fits within the stored range.
pub fn verify_hecke(f: &Eigenform, tol: f64) -> HeckeReport {
    let prec = f.precision_bits;
    let n = f.nterms() as u64;
    let lam = |m: u64| &f.lambdas[m as usize - 1];
    let mut max_residual = 0.0f64;
    let mut worst = String::from("none");
    let mut count = 0usize;
    let mut tmp = Float::new(prec);
    let mut record = |res: f64, what: &dyn Fn() -> String, count: &mut usize| {
        *count += 1;
        if res > max_residual || res.is_nan() {
            max_residual = if res.is_nan() { f64::INFINITY } else { res };
            worst = what();
        }
    };

    tmp.assign(lam(1) - 1u32);
    record(tmp.to_f64().abs(), &|| "lambda(1) = 1".into(), &mut count);

    for m in 2..=n {
        for k in m + 1..=n / m {
            if gcd(m, k) != 1 {
                continue;
            }
            tmp.assign(lam(m) * lam(k));
            tmp -= lam(m * k);
            record(tmp.to_f64().abs(), &|| format!("lambda({}) = lambda({m}) lambda({k})", m * k), &mut count);
        }
    }

    let primes = primes_up_to(n);
    for &p in &primes {
        let mut prev: u64 = 1;
        let mut cur = p;
        while cur.saturating_mul(p) <= n {
            let next = cur * p;
            tmp.assign(lam(p) * lam(cur));
            tmp -= lam(next);
            tmp -= lam(prev);
            record(tmp.to_f64().abs(), &|| format!("prime-power recursion at {next}"), &mut count);
            prev = cur;
            cur = next;
        }
    }

    let mut violations = Vec::new();
    for m in 1..=n {
        let bound = num_divisors(m) as f64 + tol;
        if f.lambda_f64(m as usize).abs() > bound {
            violations.push(m);
        }
    }
    let pass = max_residual <= tol && violations.is_empty();
    HeckeReport {
        tol,
        max_residual,
        worst_relation: worst,
        relations_checked: count,
        deligne_violations: violations,
        pass,
    }
}

/// `n^((k-1)/2)` for `n = 0..=nmax` at `prec` bits.
fn half_powers(k: u32, nmax: usize, prec: u32) -> Vec<Float> {
    (0..=nmax)
        .map(|n| Float::with_val(prec, Float::with_val(prec, n as u32).pow(k - 1)).sqrt())
        .collect()
}

/// Reduces `a` to upper Hessenberg form `h = z^-1 a z`, returning `(h, z)`.
fn hessenberg(mut h: Vec<Vec<Float>>, prec: u32) -> (Vec<Vec<Float>>, Vec<Vec<Float>>) {
    let n = h.len();
    let mut z: Vec<Vec<Float>> = (0..n)
        .map(|i| (0..n).map(|j| Float::with_val(prec, u32::from(i == j))).collect())
        .collect();
    let mut tmp = Float::new(prec);
    let mut u = Float::new(prec);
    for m in 1..n.saturating_sub(1) {
        let mut piv = m;
        for i in m + 1..n {
            if h[i][m - 1].clone().abs() > h[piv][m - 1].clone().abs() {
                piv = i;
            }
        }
        if h[piv][m - 1].is_zero() {
            continue;
        }
        if piv != m {
            h.swap(piv, m);
            for row in h.iter_mut() {
                row.swap(piv, m);
            }
            for row in z.iter_mut() {
                row.swap(piv, m);
            }
        }
        for i in m + 1..n {
            if h[i][m - 1].is_zero() {
                continue;
            }
            u.assign(&h[i][m - 1] / &h[m][m - 1]);
            let (top, bottom) = h.split_at_mut(i);
            let rm = &top[m];
            let ri = &mut bottom[0];
            for c in m - 1..n {
                tmp.assign(&u * &rm[c]);
                ri[c] -= &tmp;
            }
            ri[m - 1].assign(0);
            for row in h.iter_mut().chain(z.iter_mut()) {
                tmp.assign(&u * &row[i]);
                row[m] += &tmp;
            }
        }
    }
    (h, z)
}

/// Solves `(h - t I) y = b` for upper Hessenberg `h`, replacing exact-zero pivots by a tiny value.
fn hessenberg_solve(h: &[Vec<Float>], t: &Float, b: &[Float], prec: u32) -> Vec<Float> {
    let n = h.len();
    let mut a: Vec<Vec<Float>> = h.to_vec();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= t;
    }
    let mut rhs: Vec<Float> = b.to_vec();
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32)));
    let mut tmp = Float::new(prec);
    let mut mlt = Float::new(prec);
    for c in 0..n.saturating_sub(1) {
        if a[c + 1][c].clone().abs() > a[c][c].clone().abs() {
            a.swap(c, c + 1);
            rhs.swap(c, c + 1);
        }
        if a[c][c].is_zero() {
            a[c][c].assign(&eps);
        }
        if a[c + 1][c].is_zero() {
            continue;
        }
        mlt.assign(&a[c + 1][c] / &a[c][c]);
        let (top, bottom) = a.split_at_mut(c + 1);
        for j in c..n {
            tmp.assign(&mlt * &top[c][j]);
            bottom[0][j] -= &tmp;
        }
        tmp.assign(&mlt * &rhs[c]);
        rhs[c + 1] -= &tmp;
    }
    if a[n - 1][n - 1].is_zero() {
        a[n - 1][n - 1].assign(&eps);
    }
    let mut y = vec![Float::new(prec); n];
    for i in (0..n).rev() {
        let mut s = rhs[i].clone();
        for j in i + 1..n {
            tmp.assign(&a[i][j] * &y[j]);
            s -= &tmp;
        }
        y[i] = s / &a[i][i];
    }
    y
}

fn normalize_max(v: &mut [Float]) {
    let mut m = Float::with_val(v[0].prec(), 0);
    for x in v.iter() {
        let ax = x.clone().abs();
        if ax > m {
            m = ax;
        }
    }
    if !m.is_zero() {
        for x in v.iter_mut() {
            *x /= &m;
        }
    }
}

fn compute(k: u32, prec: u32, nterms: usize) -> Result<Vec<Eigenform>> {
    let d = dim_cusp_forms(k);
    if d == 0 {
        return Ok(Vec::new());
    }
    let n = nterms.max(2 * d + 2);
    let basis = miller_basis(k, n)?;
    if d == 1 {
        return Ok(vec![rational_form(k, &basis[0], prec)]);
    }
    let t2 = hecke_matrix(k, 2, &basis)?;
    let half_exp = k - 1;
    let cp = charpoly_bounded(t2.entries(), 1.0 + half_exp as f64 / 2.0)?;
    let mut work = prec + 4 * d as u32 + 128;
    let (roots, w) = isolate_scaled_roots(&cp, half_exp, k, work, prec + 16)?;
    work = w;
    loop {
        match eigenvectors(k, &basis, t2.entries(), &roots, work, prec, n)? {
            Some(mut forms) => {
                forms.sort_by(|a, b| {
                    a.lambdas[1]
                        .partial_cmp(&b.lambdas[1])
                        .unwrap_or(Ordering::Equal)
                        .then(a.lambdas[2].partial_cmp(&b.lambdas[2]).unwrap_or(Ordering::Equal))
                });
                for (i, f) in forms.iter_mut().enumerate() {
                    f.dim_index = i;
                }
                return Ok(forms);
            }
            None => {
                if work > 64 * prec + 64 * d as u32 {
                    return Err(Error::BudgetExhausted);
                }
                work = work * 3 / 2 + 64;
            }
        }
    }
}

fn rational_form(k: u32, g: &QExpansion, prec: u32) -> Eigenform {
    let n = g.nterms();
    let pw = half_powers(k, n, prec + 64);
    let lambdas: Vec<Float> = (1..=n)
        .map(|i| Float::with_val(prec, Float::with_val(prec + 64, g.coeff(i)) / &pw[i]))
        .collect();
    let lambdas_f64 = lambdas.iter().map(Float::to_f64).collect();
    Eigenform {
        weight: k,
        dim_index: 0,
        precision_bits: prec,
        lambdas,
        lambdas_f64,
        a_int: Some(g.coeffs().to_vec()),
    }
}

/// Eigenvectors of the normalized `T_2` matrix at `work` bits; `None` requests more precision.
fn eigenvectors(
    k: u32,
    basis: &[QExpansion],
    t2: &[Vec<Integer>],
    roots: &[Float],
    work: u32,
    prec: u32,
    n: usize,
) -> Result<Option<Vec<Eigenform>>> {
    let d = basis.len();
    let pw = half_powers(k, n, work);
    let a: Vec<Vec<Float>> = (0..d)
        .map(|i| {
            let denom = Float::with_val(work, &pw[i + 1] * &pw[2]);
            (0..d)
                .map(|j| {
                    let mut x = Float::with_val(work, &t2[i][j]);
                    x *= &pw[j + 1];
                    x / &denom
                })
                .collect()
        })
        .collect();
    let (h, z) = hessenberg(a, work);

    // tail coefficients g_j(m) j^k' for m > d
    let tail: Vec<Vec<Float>> = (d + 1..=n)
        .map(|m| (0..d).map(|j| Float::with_val(work, basis[j].coeff(m)) * &pw[j + 1]).collect())
        .collect();
    let mut amplification = 0.0f64;
    for (row, m) in tail.iter().zip(d + 1..=n) {
        let mut s = Float::with_val(work, 0);
        for (x, j) in row.iter().zip(1..) {
            s += Float::with_val(work, x.abs_ref()) / &pw[j];
        }
        s /= &pw[m];
        amplification = amplification.max(s.to_f64().log2());
    }
    if amplification + (prec as f64) + 48.0 > work as f64 {
        return Ok(None);
    }

    let ones = vec![Float::with_val(work, 1); d];
    let mut tmp = Float::new(work);
    let mut forms = Vec::with_capacity(d);
    for t in roots {
        let mut y = hessenberg_solve(&h, t, &ones, work);
        normalize_max(&mut y);
        let mut y = hessenberg_solve(&h, t, &y, work);
        normalize_max(&mut y);
        let mut v = vec![Float::with_val(work, 0); d];
        for (vi, zrow) in v.iter_mut().zip(z.iter()) {
            for (zij, yj) in zrow.iter().zip(y.iter()) {
                tmp.assign(zij * yj);
                *vi += &tmp;
            }
        }
        if v[0].is_zero() {
            return Ok(None);
        }
        let v0 = v[0].clone();
        for x in v.iter_mut() {
            *x /= &v0;
        }
        let mut lambdas: Vec<Float> = Vec::with_capacity(n);
        for x in &v {
            lambdas.push(Float::with_val(prec, x));
        }
        for (row, m) in tail.iter().zip(d + 1..=n) {
            let mut s = Float::with_val(work, 0);
            for (x, vj) in row.iter().zip(v.iter()) {
                tmp.assign(x * vj);
                s += &tmp;
            }
            s /= &pw[m];
            lambdas.push(Float::with_val(prec, s));
        }
        let lambdas_f64 = lambdas.iter().map(Float::to_f64).collect();
        forms.push(Eigenform {
            weight: k,
            dim_index: 0,
            precision_bits: prec,
            lambdas,
            lambdas_f64,
            a_int: None,
        });
    }
    Ok(Some(forms))
}

/// Tolerance for eigenforms at `precision_bits`.
pub fn hecke_tolerance(precision_bits: u32) -> f64 {
    (-(precision_bits as f64) / 2.0).exp2()
}

/// All normalized Hecke eigenforms of weight `k`, ordered by ascending `lambda(2)`.
pub fn eigenforms(k: u32, precision_bits: u32, nterms: Option<usize>) -> Result<Vec<Eigenform>> {
    if k < 12 || k % 2 != 0 {
        return Err(Error::InvalidWeight { weight: k, reason: "must be even and >= 12" });
    }
    if precision_bits < 64 {
        return Err(Error::InvalidArgument(format!("precision_bits {precision_bits} < 64")));
    }
    let n = nterms.unwrap_or_else(|| default_nterms(k));
    let mut prec = precision_bits;
    let mut worst = 0.0f64;
    for attempt in 0..2 {
        if attempt == 1 {
            prec = (2 * precision_bits).max(384);
            log::info!("weight {k}: escalating to {prec} bits");
        }
        let forms = compute(k, prec, n)?;
        let tol = hecke_tolerance(prec);
        let reports: Vec<HeckeReport> = forms.iter().map(|f| verify_hecke(f, tol)).collect();
        if reports.iter().all(|r| r.pass) {
            return Ok(forms);
        }
        worst = reports.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    }
    Err(Error::VerificationFailed { weight: k, residual: worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hessenberg_similarity() {
        let prec = 200;
        let vals = [[4.0, 1.0, -2.0, 2.0], [1.0, 2.0, 0.0, 1.0], [-2.0, 0.0, 3.0, -2.0], [2.0, 1.0, -2.0, -1.0]];
        let a: Vec<Vec<Float>> = vals.iter().map(|r| r.iter().map(|&x| Float::with_val(prec, x)).collect()).collect();
        let (h, z) = hessenberg(a.clone(), prec);
        for i in 0..4 {
            for j in 0..(i as usize).saturating_sub(1) {
                assert!(h[i][j].is_zero());
            }
            for j in 0..4 {
                let mut az = Float::with_val(prec, 0);
                let mut zh = Float::with_val(prec, 0);
                for m in 0..4 {
                    az += Float::with_val(prec, &a[i][m] * &z[m][j]);
                    zh += Float::with_val(prec, &z[i][m] * &h[m][j]);
                }
                assert!((az - zh).abs() < 1e-50);
            }
        }
    }

    #[test]
    fn nterms_default() {
        assert!(default_nterms(12) >= 4);
        assert!(default_nterms(2000) > 2000 / 6);
    }
}
