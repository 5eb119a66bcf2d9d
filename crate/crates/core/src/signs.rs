//! Constructive sign patterns of Hecke eigenvalues: prime classification, exponents with
//! positive eigenvalues along prime powers, coprime positive pairs, odd/even pairs and
//! parity-changing pairs that force zeros on the line `Re z = 1/2`.

use std::fmt;

use rug::Float;

use crate::arith::{factorize, gcd, is_prime, prime_power, primes_in};
use crate::census::WitnessRow;
use crate::error::{Error, Result};
use crate::evaluator::y_ladder;
use crate::modforms::{hecke_tolerance, lambda, Eigenform};

/// Golden-ratio threshold `(sqrt 5 - 1)/2`: `max(|x|, |x^2 - 1|) >= BETA` for all real `x`.
pub const BETA: f64 = 0.618_033_988_749_894_9;

/// Default threshold of [`first_negative`].
pub const DEFAULT_EPS0: f64 = 0.01;

/// Exponent in the bound `n < k^0.4963` for the first negative eigenvalue.
pub const FIRST_NEGATIVE_EXPONENT: f64 = 0.4963;

fn tol(f: &Eigenform) -> f64 {
    hecke_tolerance(f.precision_bits())
}

/// `lambda(n)` in double precision, `None` when a prime factor exceeds the stored range.
pub fn lambda_f64(f: &Eigenform, n: u64) -> Option<f64> {
    let stored = f.nterms() as u64;
    if n <= stored {
        return Some(f.lambda_f64(n as usize));
    }
    let mut out = 1.0;
    for (p, e) in factorize(n) {
        let pe = p.pow(e);
        if pe <= stored {
            out *= f.lambda_f64(pe as usize);
            continue;
        }
        if p > stored {
            return None;
        }
        let lp = f.lambda_f64(p as usize);
        let (mut prev, mut cur) = (1.0, lp);
        for _ in 1..e {
            let next = lp * cur - prev;
            prev = cur;
            cur = next;
        }
        out *= cur;
    }
    Some(out)
}

fn lambda_checked(f: &Eigenform, n: u64) -> Result<f64> {
    lambda_f64(f, n).ok_or(Error::LambdaUnavailable { n })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Class {
    /// `|lambda(p)| >= BETA`
    Good,
    /// `|lambda(p)| < BETA`, so `|lambda(p^2)| >= BETA`
    Bad,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimeClass {
    pub p: u64,
    pub class: Class,
    pub lambda_p: f64,
    pub lambda_p2: f64,
}

fn classify(f: &Eigenform, p: u64) -> Result<PrimeClass> {
    let t = tol(f);
    let lambda_p = lambda_checked(f, p)?;
    let lambda_p2 = lambda_checked(f, p * p)?;
    // values within tolerance of the threshold count as Bad
    let class = if lambda_p.abs() >= BETA + t { Class::Good } else { Class::Bad };
    if class == Class::Bad && lambda_p2.abs() < BETA - t {
        return Err(Error::Internal(format!(
            "p={p}: |lambda(p)|={:.6} and |lambda(p^2)|={:.6} both below the threshold",
            lambda_p.abs(),
            lambda_p2.abs()
        )));
    }
    Ok(PrimeClass { p, class, lambda_p, lambda_p2 })
}

/// Good/Bad classification of all primes `p <= x`.
pub fn classify_primes(f: &Eigenform, x: u64) -> Result<Vec<PrimeClass>> {
    primes_in(1, x).into_iter().map(|p| classify(f, p)).collect()
}

/// `2` if `|lambda(2)| >= BETA`, else `4`.
pub fn omega(f: &Eigenform) -> Result<u64> {
    let c = classify(f, 2)?;
    Ok(match c.class {
        Class::Good => 2,
        Class::Bad => 4,
    })
}

/// Smallest `b <= b_cap` with `lambda(p^(b j)) >= 1/10` for `1 <= j <= big_j`.
pub fn lemma_a_exponent(f: &Eigenform, p: u64, big_j: u32, b_cap: u32) -> Result<u32> {
    if !is_prime(p) || big_j == 0 {
        return Err(Error::InvalidArgument(format!("need a prime p and J >= 1 (p={p}, J={big_j})")));
    }
    if p > f.nterms() as u64 {
        return Err(Error::LambdaUnavailable { n: p });
    }
    let lp = f.lambda_f64(p as usize);
    let max_e = (b_cap * big_j) as usize;
    // lambda(p^e) by the three-term recursion
    let mut pows = vec![1.0, lp];
    while pows.len() <= max_e {
        let e = pows.len();
        pows.push(lp * pows[e - 1] - pows[e - 2]);
    }
    let t = tol(f) + f64::EPSILON * 4.0 * max_e as f64 * max_e as f64;
    (1..=b_cap)
        .find(|&b| (1..=big_j).all(|j| pows[(b * j) as usize] >= 0.1 + t))
        .ok_or_else(|| Error::NotFound(format!("no exponent b <= {b_cap} for p={p}, J={big_j}")))
}

/// Smallest prime power `n <= nterms` with `lambda(n) <= -eps0`.
pub fn first_negative(f: &Eigenform, eps0: f64) -> Result<(u64, f64)> {
    let t = tol(f);
    for n in 2..=f.nterms() as u64 {
        if prime_power(n).is_none() {
            continue;
        }
        let v = f.lambda_f64(n as usize);
        if v <= -eps0 - t {
            return Ok((n, v));
        }
    }
    Err(Error::NotFound(format!("no prime power n <= {} with lambda(n) <= -{eps0}", f.nterms())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairConstruction {
    /// products of two same-sign members of six pairwise coprime large values
    SixIntegers,
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoprimePair {
    pub m1: u64,
    pub m2: u64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub construction: PairConstruction,
}

/// Six pairwise coprime integers in `(xi, 50 xi)` with `|lambda| >= BETA^2`, built from primes in
/// `(sqrt xi, sqrt(50 xi))`.
fn six_integers(f: &Eigenform, xi: f64) -> Option<Vec<u64>> {
    let lo = xi.sqrt();
    let hi = (50.0 * xi).sqrt();
    let mut bad = Vec::new();
    let mut good = Vec::new();
    for p in primes_in(lo.floor() as u64, hi.ceil() as u64) {
        let pf = p as f64;
        if pf <= lo || pf >= hi {
            continue;
        }
        match classify(f, p).ok()?.class {
            Class::Bad => bad.push(p),
            Class::Good => good.push(p),
        }
    }
    if bad.len() >= 6 {
        return Some(bad[..6].iter().map(|p| p * p).collect());
    }
    if good.len() >= 12 {
        return Some(good[..12].chunks(2).map(|c| c[0] * c[1]).collect());
    }
    None
}

fn same_sign_product(f: &Eigenform, ns: &[u64]) -> Option<u64> {
    for i in 0..ns.len() {
        for j in i + 1..ns.len() {
            let (a, b) = (lambda_f64(f, ns[i])?, lambda_f64(f, ns[j])?);
            if a * b > 0.0 {
                return Some(ns[i] * ns[j]);
            }
        }
    }
    None
}

/// Coprime `m1, m2` in `(xi, 2500 xi)` with `lambda(m_j) >= 1/100`.
pub fn coprime_pair(f: &Eigenform, xi: f64) -> Result<CoprimePair> {
    if !(xi >= 1000.0) {
        return Err(Error::InvalidArgument(format!("xi = {xi} below 1000")));
    }
    let t = tol(f);
    let certify = |m1: u64, m2: u64, c: PairConstruction| -> Result<Option<CoprimePair>> {
        let l1 = lambda(f, m1)?.to_f64();
        let l2 = lambda(f, m2)?.to_f64();
        let ok = gcd(m1, m2) == 1 && l1 >= 0.01 - t && l2 >= 0.01 - t;
        Ok(ok.then_some(CoprimePair { m1, m2, lambda1: l1, lambda2: l2, construction: c }))
    };
    if let Some(ns) = six_integers(f, xi.sqrt()) {
        if let (Some(m1), Some(m2)) = (same_sign_product(f, &ns[..3]), same_sign_product(f, &ns[3..])) {
            if let Some(p) = certify(m1, m2, PairConstruction::SixIntegers)? {
                return Ok(p);
            }
        }
    }
    log::debug!("{f}: six-integer construction unavailable at xi={xi}, searching");
    let lo = xi.floor() as u64 + 1;
    let hi = (2500.0 * xi).ceil() as u64;
    let positive = |m: u64| lambda_f64(f, m).map_or(false, |v| v >= 0.01 + 1e-12);
    let Some(m1) = (lo..hi).find(|&m| positive(m)) else {
        return Err(Error::NotFound(format!("no m in ({xi}, {}) with lambda(m) >= 1/100", 2500.0 * xi)));
    };
    let Some(m2) = (m1 + 1..hi).find(|&m| gcd(m, m1) == 1 && positive(m)) else {
        return Err(Error::NotFound(format!("no second coprime value in ({xi}, {})", 2500.0 * xi)));
    };
    certify(m1, m2, PairConstruction::Exhaustive)?
        .ok_or_else(|| Error::Internal(format!("pair ({m1}, {m2}) failed certification")))
}

/// Which of the four prime configurations produced a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParityCase {
    /// a Bad `q`, Good `p, p'`: `u = p p'`, `v = omega q^2`
    BadQGoodP,
    /// a Bad `q`, a Bad `p`: `u = p^2`, `v = omega q^2`
    BadQBadP,
    /// Good `q, q'`, a Bad `p`: `u = p^2`, `v = omega q q'`
    GoodQBadP,
    /// all Good: `u = p p'`, `v = omega q q'`
    AllGood,
}

/// Odd `u` and even `v` in `((X + jH)^2, (X + (j+1)H)^2)` with both eigenvalues bounded below.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParityPair {
    pub u: u64,
    pub v: u64,
    pub interval: (f64, f64),
    pub lower_bound: f64,
    pub case: ParityCase,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParityReport {
    pub omega: u64,
    pub h: u64,
    pub pairs: Vec<ParityPair>,
    /// interval pairs without two odd primes on each side
    pub skipped: usize,
}

fn odd_primes_open(lo: f64, hi: f64) -> Vec<u64> {
    primes_in(lo.floor().max(0.0) as u64, hi.ceil() as u64)
        .into_iter()
        .filter(|&p| p > 2 && (p as f64) > lo && (p as f64) < hi)
        .collect()
}

fn interval_pairs(x: f64, omega: u64, h: u64) -> Vec<((f64, f64), (f64, f64))> {
    let s = (omega as f64).sqrt();
    let top = s * x;
    let mut out = Vec::new();
    let mut j = 0u64;
    loop {
        let a = x + (j * h) as f64;
        let b = a + h as f64;
        if b > top {
            break;
        }
        out.push(((a / s, b / s), (a, b)));
        j += 1;
    }
    out
}

fn primes_supply(pairs: &[((f64, f64), (f64, f64))]) -> usize {
    pairs
        .iter()
        .filter(|(q, p)| odd_primes_open(q.0, q.1).len() >= 2 && odd_primes_open(p.0, p.1).len() >= 2)
        .count()
}

/// Smallest `H` in `{2, 4, 8, ...}` for which at least half the interval pairs over `(X, sqrt(omega) X)`
/// have two odd primes on each side.
pub fn select_h(x: f64, omega: u64) -> Option<u64> {
    let width = ((omega as f64).sqrt() - 1.0) * x;
    let mut h = 2u64;
    while (h as f64) <= width {
        let pairs = interval_pairs(x, omega, h);
        if !pairs.is_empty() && 2 * primes_supply(&pairs) >= pairs.len() {
            return Some(h);
        }
        h *= 2;
    }
    None
}

/// One odd/even pair per interval pair `((X + jH)/sqrt(omega), (X + (j+1)H)/sqrt(omega))`,
/// `(X + jH, X + (j+1)H)` that contains two odd primes on each side.
pub fn build_parity_pairs(f: &Eigenform, x: f64, h: Option<u64>) -> Result<ParityReport> {
    let omega = omega(f)?;
    let h = match h {
        Some(h) if h > 0 => h,
        Some(_) => return Err(Error::InvalidArgument("H must be positive".into())),
        None => select_h(x, omega).ok_or_else(|| Error::NotFound(format!("no admissible H for X={x}")))?,
    };
    let t = tol(f);
    let beta3 = BETA.powi(3);
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for (qi, pi) in interval_pairs(x, omega, h) {
        let qs = odd_primes_open(qi.0, qi.1);
        let ps = odd_primes_open(pi.0, pi.1);
        if qs.len() < 2 || ps.len() < 2 {
            skipped += 1;
            continue;
        }
        let qc = [classify(f, qs[0])?, classify(f, qs[1])?];
        let pc = [classify(f, ps[0])?, classify(f, ps[1])?];
        let bad_q = qc.iter().find(|c| c.class == Class::Bad);
        let bad_p = pc.iter().find(|c| c.class == Class::Bad);
        let (u, v, case) = match (bad_q, bad_p) {
            (Some(q), None) => (pc[0].p * pc[1].p, omega * q.p * q.p, ParityCase::BadQGoodP),
            (Some(q), Some(p)) => (p.p * p.p, omega * q.p * q.p, ParityCase::BadQBadP),
            (None, Some(p)) => (p.p * p.p, omega * qc[0].p * qc[1].p, ParityCase::GoodQBadP),
            (None, None) => (pc[0].p * pc[1].p, omega * qc[0].p * qc[1].p, ParityCase::AllGood),
        };
        let lu = lambda(f, u)?.to_f64().abs();
        let lv = lambda(f, v)?.to_f64().abs();
        let lower_bound = lu.min(lv);
        if lower_bound < beta3 - t {
            return Err(Error::Internal(format!("pair ({u}, {v}) below beta^3: {lower_bound}")));
        }
        pairs.push(ParityPair { u, v, interval: (pi.0 * pi.0, pi.1 * pi.1), lower_bound, case });
    }
    Ok(ParityReport { omega, h, pairs, skipped })
}

/// Indices `n1 < n2` in a dyadic interval whose signed values `(-1)^n lambda(n)` have opposite signs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Delta2Witness {
    pub interval: (u64, u64),
    pub n1: u64,
    pub n2: u64,
    pub signed1: f64,
    pub signed2: f64,
    /// `q` was Bad, so the pair is `(q^2, a^2 q^2)`
    pub squared: bool,
}

impl Delta2Witness {
    /// Heights of the two dominant-term ladders, increasing.
    pub fn y_range(&self, k: u32) -> (f64, f64) {
        (y_ladder(k as f64, self.n2), y_ladder(k as f64, self.n1))
    }
}

fn signed(n: u64, v: f64) -> f64 {
    if n % 2 == 1 {
        -v
    } else {
        v
    }
}

/// One witness per dyadic interval `[(2a)^i, (2a)^(i+1)]` inside `[2, X]`, with `a = 2^b` from
/// [`lemma_a_exponent`] at `p = 2`, `J = 2`.
pub fn delta2_witnesses(f: &Eigenform, x: u64) -> Result<Vec<Delta2Witness>> {
    let b = lemma_a_exponent(f, 2, 2, 64)?;
    let a = 1u64 << b;
    let t = tol(f);
    let mut out = Vec::new();
    let mut m = 1u64;
    while m.saturating_mul(2 * a) <= x {
        let top = m * 2 * a;
        let Some(q) = (m.max(3)..=2 * m).find(|&n| is_prime(n)) else {
            log::debug!("{f}: no odd prime in [{m}, {}]", 2 * m);
            m = top;
            continue;
        };
        let c = classify(f, q)?;
        let (n1, n2, squared) = match c.class {
            Class::Good => (q, a * q, false),
            Class::Bad => (q * q, a * a * q * q, true),
        };
        let l1 = lambda(f, n1)?.to_f64();
        let l2 = lambda(f, n2)?.to_f64();
        let (s1, s2) = (signed(n1, l1), signed(n2, l2));
        if s1 * s2 < 0.0 && s1.abs() > t && s2.abs() > t {
            out.push(Delta2Witness { interval: (m, top), n1, n2, signed1: s1, signed2: s2, squared });
        } else {
            log::warn!("{f}: witness ({n1}, {n2}) lacks opposite signs");
        }
        m = top;
    }
    Ok(out)
}

impl fmt::Display for ParityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParityCase::BadQGoodP => "i",
            ParityCase::BadQBadP => "ii",
            ParityCase::GoodQBadP => "iii",
            ParityCase::AllGood => "iv",
        })
    }
}

/// Rows for the per-weight zero table.
pub fn witness_rows(k: u32, parity: &[ParityPair], delta2: &[Delta2Witness], first_neg: Option<(u64, f64)>) -> Vec<WitnessRow> {
    let mut rows = Vec::new();
    for p in parity {
        let (a, b) = (y_ladder(k as f64, p.u), y_ladder(k as f64, p.v));
        rows.push(WitnessRow {
            kind: "parity_pair".into(),
            param_lo: a.min(b),
            param_hi: a.max(b),
            flags: format!("u={};v={};case={};bound={:.4}", p.u, p.v, p.case, p.lower_bound),
        });
    }
    for w in delta2 {
        let (lo, hi) = w.y_range(k);
        rows.push(WitnessRow {
            kind: "delta2_witness".into(),
            param_lo: lo,
            param_hi: hi,
            flags: format!("n1={};n2={}{}", w.n1, w.n2, if w.squared { ";squared" } else { "" }),
        });
    }
    if let Some((n, v)) = first_neg {
        let y = y_ladder(k as f64, n);
        rows.push(WitnessRow { kind: "first_negative".into(), param_lo: y, param_hi: y, flags: format!("n={n};lambda={v:.6}") });
    }
    rows
}

/// `lambda(u)` reassembled from the prime factorization, for certificate checks.
pub fn reassemble(f: &Eigenform, n: u64) -> Result<Float> {
    let prec = f.precision_bits();
    let mut out = Float::with_val(prec, 1);
    for (p, e) in factorize(n) {
        out *= lambda(f, p.pow(e))?;
    }
    Ok(out)
}
