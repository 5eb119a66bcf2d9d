//! Truncated term tables for `sum lambda(n) e(n alpha) I_s(2 pi n y)` at fixed `(s, y)`.
//!
//! Terms are stored relative to a reference index near the kernel peak so that no
//! intermediate quantity overflows; the common factor lives in `log_scale`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rug::float::Constant;
use rug::{Assign, Float};

use super::ScaledComplex;
use crate::error::{Error, Result};
use crate::modforms::Eigenform;

const U: f64 = f64::EPSILON * 0.5;

/// `((s-1)/2) ln y - y`.
pub fn log_i(s: f64, y: f64) -> f64 {
    (s - 1.0) / 2.0 * y.ln() - y
}

/// Coefficient source: eigenvalues (`f64` plus high precision) with an absolute error bound.
pub(crate) trait Coefficients {
    fn len(&self) -> usize;
    fn value(&self, n: usize) -> f64;
    fn abs_bound(&self, n: usize) -> f64;
    fn high(&self, n: usize) -> Option<&Float> {
        let _ = n;
        None
    }
    fn high_err(&self) -> f64 {
        0.0
    }
}

impl Coefficients for Eigenform {
    fn len(&self) -> usize {
        self.nterms()
    }
    fn value(&self, n: usize) -> f64 {
        self.lambda_f64(n)
    }
    fn abs_bound(&self, n: usize) -> f64 {
        self.lambda_f64(n).abs() * (1.0 + 2.0 * U) + self.lambda_err()
    }
    fn high(&self, n: usize) -> Option<&Float> {
        Some(&self.lambdas()[n - 1])
    }
    fn high_err(&self) -> f64 {
        self.lambda_err()
    }
}

/// Plain `f64` coefficients `c(1..=N)`, taken as exact.
#[cfg(test)]
pub(crate) struct PlainCoefficients<'a>(pub &'a [f64]);

#[cfg(test)]
impl Coefficients for PlainCoefficients<'_> {
    fn len(&self) -> usize {
        self.0.len()
    }
    fn value(&self, n: usize) -> f64 {
        self.0[n - 1]
    }
    fn abs_bound(&self, n: usize) -> f64 {
        self.0[n - 1].abs()
    }
}

/// Index window, scale and omitted-term bound for a given `(s, y, rel_tol)`.
#[derive(Clone, Debug)]
pub(crate) struct Truncation {
    pub s: f64,
    pub y: f64,
    pub n_ref: usize,
    pub n_lo: usize,
    pub n_hi: usize,
    pub log_scale: f64,
    /// bound on the sum of omitted envelopes `n e_n`, in mantissa units
    pub tail: f64,
    /// bound on the sum of omitted `2 pi n * n e_n`, for derivative bounds in alpha
    pub tail_deriv: f64,
}

fn ell(s1: f64, two_pi_y: f64, n: usize, n_ref: usize) -> f64 {
    s1 * (n as f64 / n_ref as f64).ln() - two_pi_y * (n as f64 - n_ref as f64)
}

/// Chooses the summation window so that omitted terms total at most `rel_tol` (relative to the
/// peak envelope), using `|lambda(n)| <= d(n) <= n`.
pub(crate) fn truncation(s: f64, y: f64, rel_tol: f64, available: usize) -> Result<Truncation> {
    if !(s > 1.0) || !(y > 0.0) || !y.is_finite() {
        return Err(Error::InvalidArgument(format!("need s > 1 and y > 0 (s={s}, y={y})")));
    }
    let s1 = (s - 1.0) / 2.0;
    let tpy = 2.0 * PI * y;
    let peak = s1 / tpy;
    let n_ref = (peak.round() as usize).max(1);
    let log_scale = log_i(s, tpy * n_ref as f64) - log_i(s, s1);
    let width = s1.sqrt() / tpy;
    let n_est = peak + 10.0 * width + 10.0;
    let tol = rel_tol / n_est;

    if tpy < 1.0 {
        return Err(Error::InvalidArgument(format!("y = {y} too small for geometric tail bounds")));
    }
    let mut n = n_ref;
    let mut run = 0;
    let (mut tail, mut tail_deriv);
    loop {
        let env = n as f64 * ell(s1, tpy, n, n_ref).exp();
        let ratio = ((n as f64 + 1.0) / n as f64).powf(s1 + 1.0) * (-tpy).exp();
        if n as f64 > peak && ratio <= 0.5 {
            run = if env < tol { run + 1 } else { 0 };
            if run >= 8 {
                // successive envelope ratios decrease in n, so the tail is geometric
                let next = env * ratio;
                tail = next / (1.0 - ratio);
                let dratio = ratio * (n as f64 + 2.0) / (n as f64 + 1.0);
                tail_deriv = if dratio < 1.0 {
                    2.0 * PI * (n as f64 + 1.0) * next / (1.0 - dratio)
                } else {
                    f64::INFINITY
                };
                break;
            }
        }
        n += 1;
    }
    let n_hi = n;
    if n_hi > available {
        return Err(Error::InsufficientCoefficients { needed: n_hi, available });
    }

    // below the peak the envelope grows toward n_ref; omit n < n_lo
    let mut n_lo = n_ref;
    let mut low_tail = 0.0;
    while n_lo > 1 {
        let m = n_lo - 1;
        let e = ell(s1, tpy, m, n_ref).exp();
        if (m * m) as f64 * e < tol * 1e-3 {
            low_tail = (m * m) as f64 * e;
            break;
        }
        n_lo = m;
    }
    tail += low_tail;
    tail_deriv += 2.0 * PI * n_lo as f64 * low_tail;
    Ok(Truncation { s, y, n_ref, n_lo, n_hi, log_scale, tail, tail_deriv })
}

/// Double-precision table of `lambda(n) e_n` with per-term rounding bounds.
#[derive(Clone, Debug)]
pub(crate) struct TermTable {
    pub trunc: Truncation,
    weights: Vec<f64>,
    abs: Vec<f64>,
    rel_err: Vec<f64>,
    coeff_err: f64,
}

impl TermTable {
    pub(crate) fn new<C: Coefficients + ?Sized>(c: &C, s: f64, y: f64, rel_tol: f64) -> Result<Self> {
        let trunc = truncation(s, y, rel_tol, c.len())?;
        Ok(Self::with_truncation(c, trunc))
    }

    pub(crate) fn with_truncation<C: Coefficients + ?Sized>(c: &C, trunc: Truncation) -> Self {
        let s1 = (trunc.s - 1.0) / 2.0;
        let tpy = 2.0 * PI * trunc.y;
        let len = trunc.n_hi - trunc.n_lo + 1;
        let mut weights = Vec::with_capacity(len);
        let mut abs = Vec::with_capacity(len);
        let mut rel_err = Vec::with_capacity(len);
        let mut coeff_err = 0.0;
        for n in trunc.n_lo..=trunc.n_hi {
            let a = s1 * (n as f64 / trunc.n_ref as f64).ln();
            let b = tpy * (n as f64 - trunc.n_ref as f64);
            let e = (a - b).exp();
            weights.push(c.value(n) * e);
            abs.push(c.abs_bound(n) * e);
            rel_err.push(6.0 * U * (a.abs() + b.abs() + 2.0));
            coeff_err += (c.abs_bound(n) - c.value(n).abs()) * e;
        }
        TermTable { trunc, weights, abs, rel_err, coeff_err }
    }

    /// Sum of `|lambda(n)| e_n` over stored terms.
    pub(crate) fn abs_sum(&self) -> f64 {
        self.abs.iter().sum()
    }

    /// Bound on `|d/d alpha|` of the normalized sum, in mantissa units.
    pub(crate) fn alpha_lipschitz(&self) -> f64 {
        let mut d = 0.0;
        for (i, a) in self.abs.iter().enumerate() {
            let n = (self.trunc.n_lo + i) as f64;
            d += 2.0 * PI * n * a * (1.0 + 1e-12);
        }
        d + self.trunc.tail_deriv
    }

    /// Value at `alpha` with a bound covering truncation, coefficient and rounding errors.
    pub(crate) fn eval(&self, alpha: f64) -> ScaledComplex {
        let mut re = 0.0;
        let mut im = 0.0;
        let mut err = 0.0;
        let mut total = 0.0;
        for (i, ((w, a), r)) in self.weights.iter().zip(&self.abs).zip(&self.rel_err).enumerate() {
            let n = self.trunc.n_lo + i;
            let (c, s, trig_err) = unit_phase(n, alpha);
            re += w * c;
            im += w * s;
            err += a * (r + trig_err + 4.0 * U);
            total += a;
        }
        let nterms = self.weights.len() as f64;
        err += 2.0 * (nterms + 2.0) * U * total;
        err = (err + self.coeff_err) * 1.5 + self.trunc.tail;
        ScaledComplex::from_parts(self.trunc.log_scale, Complex64::new(re, im), err)
    }

    /// Real value at `alpha` in {0, 1/2} with its error bound (exact unit phases).
    pub(crate) fn eval_real_line(&self, half: bool) -> (f64, f64) {
        let mut v = 0.0;
        let mut err = 0.0;
        let mut total = 0.0;
        for (i, ((w, a), r)) in self.weights.iter().zip(&self.abs).zip(&self.rel_err).enumerate() {
            let n = self.trunc.n_lo + i;
            if half && n % 2 == 1 {
                v -= w;
            } else {
                v += w;
            }
            err += a * (r + 2.0 * U);
            total += a;
        }
        err += 2.0 * (self.weights.len() as f64 + 2.0) * U * total;
        ((v), (err + self.coeff_err) * 1.5 + self.trunc.tail)
    }
}

/// `(cos, sin)(2 pi n alpha)` and an absolute error bound for each component.
#[inline]
pub(crate) fn unit_phase(n: usize, alpha: f64) -> (f64, f64, f64) {
    let x = n as f64 * alpha;
    let fr = x - x.round();
    if fr == 0.0 {
        return (1.0, 0.0, 0.0);
    }
    if fr.abs() == 0.5 {
        return (-1.0, 0.0, 0.0);
    }
    let (s, c) = (2.0 * PI * fr).sin_cos();
    (c, s, 2.0 * PI * U * (x.abs() + 2.0) + 4.0 * U)
}

/// Multiprecision evaluation at `bits`, same truncation as the `f64` table.
pub(crate) fn eval_mp<C: Coefficients + ?Sized>(
    c: &C,
    trunc: &Truncation,
    alpha: f64,
    bits: u32,
) -> ScaledComplex {
    eval_mp_at(c, trunc, &Float::with_val(bits, alpha), &Float::with_val(bits, trunc.y), bits)
}

/// As [`eval_mp`] at a point given in multiprecision; `y` must agree with `trunc.y` to a few ulps.
pub(crate) fn eval_mp_at<C: Coefficients + ?Sized>(
    c: &C,
    trunc: &Truncation,
    alpha: &Float,
    y: &Float,
    bits: u32,
) -> ScaledComplex {
    let s1 = Float::with_val(bits, trunc.s - 1.0) / 2u32;
    let pi2 = Float::with_val(bits, Constant::Pi) * 2u32;
    let tpy = Float::with_val(bits, &pi2 * y);
    let n_ref = trunc.n_ref as u32;
    let mut re = Float::with_val(bits, 0);
    let mut im = Float::with_val(bits, 0);
    let mut tmp = Float::new(bits);
    let mut e = Float::new(bits);
    let mut total = 0.0;
    let mut coeff_err = 0.0;
    let alpha_abs = alpha.to_f64().abs();
    let mut maxmag: f64 = 0.0;
    for n in trunc.n_lo..=trunc.n_hi {
        // ell_n = s1 ln(n / n_ref) - 2 pi y (n - n_ref)
        e.assign(n as u32);
        e /= n_ref;
        e.ln_mut();
        e *= &s1;
        tmp.assign(&tpy * (n as i64 - n_ref as i64));
        e -= &tmp;
        maxmag = maxmag.max(e.to_f64().abs() + tmp.to_f64().abs());
        e.exp_mut();
        let lam_err;
        let lam = match c.high(n) {
            Some(v) => {
                lam_err = c.high_err();
                Float::with_val(bits, v)
            }
            None => {
                lam_err = c.abs_bound(n) - c.value(n).abs();
                Float::with_val(bits, c.value(n))
            }
        };
        let ef = e.to_f64();
        total += (lam.to_f64().abs() + lam_err) * ef;
        coeff_err += lam_err * ef;
        let w = lam * &e;
        tmp.assign(alpha * n as u32);
        let r = Float::with_val(bits, tmp.round_ref());
        tmp -= r;
        if tmp.is_zero() {
            re += &w;
        } else if tmp.clone().abs() == 0.5 {
            re -= &w;
        } else {
            tmp *= &pi2;
            let (sn, cs) = tmp.clone().sin_cos(Float::new(bits));
            re += Float::with_val(bits, &w * &cs);
            im += Float::with_val(bits, &w * &sn);
        }
    }
    let u = (-(bits as f64)).exp2();
    let nterms = (trunc.n_hi - trunc.n_lo + 1) as f64;
    let err = total * u * (8.0 * (maxmag + trunc.n_hi as f64 * alpha_abs + 8.0) + 4.0 * nterms) + coeff_err;
    ScaledComplex::from_big(trunc.log_scale, &re, &im, err * 1.5 + trunc.tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_i_examples() {
        assert!((log_i(3.0, 1.0) + 1.0).abs() < 1e-15);
        let s: f64 = 1e4;
        let sp = (s - 1.0) / 2.0;
        assert!(log_i(s, sp - 1.0) < log_i(s, sp));
        assert!(log_i(s, sp + 1.0) < log_i(s, sp));
        let h = 10.0;
        let d = log_i(s, sp + h) - log_i(s, sp);
        let want = -h * h / (2.0 * sp);
        assert!((d - want).abs() < 0.05 * want.abs());
    }

    #[test]
    fn unit_phase_exact_points() {
        assert_eq!(unit_phase(3, 0.0), (1.0, 0.0, 0.0));
        assert_eq!(unit_phase(3, 0.5), (-1.0, 0.0, 0.0));
        assert_eq!(unit_phase(4, 0.5), (1.0, 0.0, 0.0));
        let (c, s, e) = unit_phase(1, 0.125);
        assert!((c - (PI / 4.0).cos()).abs() <= e + 1e-17);
        assert!((s - (PI / 4.0).sin()).abs() <= e + 1e-17);
    }

    #[test]
    fn table_matches_multiprecision() {
        let coeffs: Vec<f64> = (1..=200).map(|n| ((n as f64) * 0.7).sin()).collect();
        let c = PlainCoefficients(&coeffs);
        for &(s, y, alpha) in &[(100.0, 1.0, 0.1), (100.0, 3.0, 0.5), (400.0, 2.0, -0.3), (30.0, 0.9, 0.0)] {
            let t = TermTable::new(&c, s, y, 1e-14).unwrap();
            let a = t.eval(alpha);
            let b = eval_mp(&c, &t.trunc, alpha, 256);
            let diff = (a.mantissa() * (a.log_scale() - b.log_scale()).exp() - b.mantissa()).norm();
            assert!(diff <= a.err() + b.err(), "s={s} y={y}: diff {diff} err {} {}", a.err(), b.err());
            assert!(b.err() <= 1e-30 + t.trunc.tail * 2.0 + b.mantissa().norm() * 1e-15);
        }
    }
}
