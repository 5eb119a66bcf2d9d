//! Overflow-safe evaluation of `Phi_f(s; alpha, y) = sum lambda(n) e(n alpha) I_s(2 pi n y)`,
//! of `f(alpha + iy)` and of its logarithmic derivative.
//!
//! Values are normalized by `I_s(s')` with `s' = (s - 1)/2` and carried as
//! `mantissa * exp(log_scale)` together with a bound on the total error of the mantissa.

mod terms;

use std::f64::consts::PI;

use num_complex::Complex64;
use rug::Float;

use crate::error::{Error, Result};
use crate::modforms::Eigenform;

pub use terms::log_i;
pub(crate) use terms::{eval_mp, eval_mp_at, truncation, TermTable};

/// A point `alpha + iy` with `alpha` reduced into `(-1/2, 1/2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalPoint {
    alpha: f64,
    y: f64,
}

impl EvalPoint {
    pub fn new(alpha: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !y.is_finite() || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid point alpha={alpha}, y={y}")));
        }
        Ok(EvalPoint { alpha: normalize_alpha(alpha), y })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn y(&self) -> f64 {
        self.y
    }
}

/// Reduces `alpha` modulo 1 into `(-1/2, 1/2]`.
pub fn normalize_alpha(alpha: f64) -> f64 {
    let mut a = alpha - alpha.round();
    if a <= -0.5 {
        a += 1.0;
    }
    a
}

/// `mantissa * exp(log_scale)` with a bound `err` on the absolute error of the mantissa.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledComplex {
    log_scale: f64,
    mantissa: Complex64,
    err: f64,
}

impl ScaledComplex {
    pub(crate) fn from_parts(log_scale: f64, mantissa: Complex64, err: f64) -> Self {
        let m = mantissa.norm().max(err);
        if m > 0.0 && m.is_finite() && !(1e-200..=1e200).contains(&m) {
            let shift = m.ln().round();
            let f = (-shift).exp();
            return ScaledComplex { log_scale: log_scale + shift, mantissa: mantissa * f, err: err * f };
        }
        ScaledComplex { log_scale, mantissa, err }
    }

    pub(crate) fn from_big(log_scale: f64, re: &Float, im: &Float, err: f64) -> Self {
        let er = re.get_exp().unwrap_or(i32::MIN);
        let ei = im.get_exp().unwrap_or(i32::MIN);
        let e = er.max(ei);
        if e == i32::MIN {
            return Self::from_parts(log_scale, Complex64::new(0.0, 0.0), err);
        }
        let r = Float::with_val(re.prec(), re >> e).to_f64();
        let i = Float::with_val(im.prec(), im >> e).to_f64();
        let shift = e as f64 * std::f64::consts::LN_2;
        // conversion to f64 adds a relative rounding error
        let conv = (r.abs() + i.abs()) * f64::EPSILON;
        let err_scaled = err * (-shift).exp() + conv;
        if err_scaled.is_finite() {
            Self::from_parts(log_scale + shift, Complex64::new(r, i), err_scaled)
        } else {
            Self::from_parts(log_scale, Complex64::new(0.0, 0.0), err)
        }
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mantissa
    }

    /// Bound on the absolute error of the mantissa (omitted terms plus rounding).
    pub fn err(&self) -> f64 {
        self.err
    }

    /// Natural log of the magnitude; `-inf` for an exact zero.
    pub fn log_mag(&self) -> f64 {
        self.log_scale + self.mantissa.norm().ln()
    }

    /// Argument in `(-pi, pi]`.
    pub fn phase(&self) -> f64 {
        let p = self.mantissa.arg();
        if p <= -PI {
            PI
        } else {
            p
        }
    }

    /// Error bound in the same scaling as the value.
    pub fn tail_bound(&self) -> f64 {
        self.err * self.log_scale.exp()
    }

    /// Natural log of the error bound.
    pub fn log_tail_bound(&self) -> f64 {
        self.err.ln() + self.log_scale
    }

    /// The value itself; may overflow or underflow for extreme scales.
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    /// `|value| > error bound`, so the true value is nonzero.
    pub fn is_certified_nonzero(&self) -> bool {
        self.mantissa.norm() > self.err
    }
}

/// Largest relative tolerance that arithmetic at `precision_bits` cannot certify.
pub fn tolerance_floor(precision_bits: u32) -> f64 {
    (16.0 - precision_bits as f64).exp2()
}

fn check_tol(f: &Eigenform, rel_tol: f64) -> Result<()> {
    let floor = tolerance_floor(f.precision_bits());
    if !(rel_tol >= floor) {
        return Err(Error::UnreachableTolerance { rel_tol, floor });
    }
    Ok(())
}

/// `sum_n lambda(n) e(n alpha) I_s(2 pi n y) / I_s(s')`, truncated with a rigorous tail bound.
pub fn phi_full(f: &Eigenform, s: f64, pt: EvalPoint, rel_tol: f64) -> Result<ScaledComplex> {
    check_tol(f, rel_tol)?;
    let t = TermTable::new(f, s, pt.y, rel_tol)?;
    Ok(t.eval(pt.alpha))
}

/// As [`phi_full`], evaluated with `bits`-bit arithmetic.
pub fn phi_full_mp(f: &Eigenform, s: f64, pt: EvalPoint, rel_tol: f64, bits: u32) -> Result<ScaledComplex> {
    check_tol(f, rel_tol)?;
    let tr = truncation(s, pt.y, rel_tol, f.nterms())?;
    Ok(eval_mp(f, &tr, pt.alpha, bits))
}

/// `f(alpha + iy)` up to the positive factor `exp(f_log_normalization(k, y))`.
pub fn f_value(f: &Eigenform, pt: EvalPoint, rel_tol: f64) -> Result<ScaledComplex> {
    phi_full(f, f.weight() as f64, pt, rel_tol)
}

/// `ln |f(z)| - f_value(z).log_mag()`, i.e. `log_I(k, k') - k' ln(2 pi y)`.
pub fn f_log_normalization(k: u32, y: f64) -> f64 {
    let kp = (k as f64 - 1.0) / 2.0;
    log_i(k as f64, kp) - kp * (2.0 * PI * y).ln()
}

/// `(1/(2 pi i)) f'/f = (1/(2 pi y)) Phi(k+2)/Phi(k)`.
pub fn log_derivative(f: &Eigenform, pt: EvalPoint, rel_tol: f64) -> Result<Complex64> {
    let k = f.weight() as f64;
    let mut den = f_value(f, pt, rel_tol)?;
    let mut num = phi_full(f, k + 2.0, pt, rel_tol)?;
    if !den.is_certified_nonzero() {
        den = phi_full_mp(f, k, pt, rel_tol, f.precision_bits())?;
        num = phi_full_mp(f, k + 2.0, pt, rel_tol, f.precision_bits())?;
        if !den.is_certified_nonzero() {
            return Err(Error::Indeterminate);
        }
    }
    let kp = (k - 1.0) / 2.0;
    let log_ratio = num.log_scale() + log_i(k + 2.0, kp + 1.0) - den.log_scale() - log_i(k, kp);
    Ok(num.mantissa() / den.mantissa() * log_ratio.exp() / (2.0 * PI * pt.y))
}

/// Parameters of the windowed approximation and of the ladder regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowConfig {
    /// window exponent: half-width `B = sqrt(delta s ln s)` in the kernel variable
    pub delta: f64,
    /// multiplier of `s^-delta` in the recorded tail bound
    pub tail_constant: f64,
    /// smallest admissible ladder index
    pub beta1: f64,
    /// ladder indices up to `beta2 sqrt(s / ln s)`
    pub beta2: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig { delta: 0.2, tail_constant: 10.0, beta1: 1.0, beta2: 0.5 }
    }
}

/// Height `(s - 1)/(4 pi l)` at which the `l`-th term dominates.
pub fn y_ladder(s: f64, l: u64) -> f64 {
    (s - 1.0) / (4.0 * PI * l as f64)
}

/// Heights `[lo, hi)` where the windowed approximation is used:
/// `2 pi y >= sqrt(s ln s)` below and the zero-free line `(ln 4 / 4 pi) s` above.
pub fn windowed_regime(s: f64) -> (f64, f64) {
    ((s * s.ln()).sqrt() / (2.0 * PI), s * 4f64.ln() / (4.0 * PI))
}

/// Largest ladder index covered by the approximation theorem under `cfg`.
pub fn ladder_max(s: f64, cfg: &WindowConfig) -> u64 {
    (cfg.beta2 * (s / s.ln()).sqrt()).floor() as u64
}

/// Sum over the window `|2 pi n y - s'| <= B`, normalized by `I_s(s')`;
/// `tail_bound` is `tail_constant * s^-delta`.
pub fn phi_windowed(f: &Eigenform, s: f64, pt: EvalPoint, cfg: &WindowConfig) -> Result<ScaledComplex> {
    if !(cfg.delta > 0.0 && cfg.delta < 2.0 / 3.0) {
        return Err(Error::InvalidArgument(format!("delta {} outside (0, 2/3)", cfg.delta)));
    }
    let (lo, hi) = windowed_regime(s);
    if pt.y < lo || pt.y >= hi {
        return Err(Error::OutsideRegime(format!("y = {} outside [{lo:.4}, {hi:.4})", pt.y)));
    }
    let s1 = (s - 1.0) / 2.0;
    let b = (cfg.delta * s * s.ln()).sqrt();
    let tpy = 2.0 * PI * pt.y;
    let n_lo = (((s1 - b) / tpy).ceil().max(1.0)) as usize;
    let n_hi = ((s1 + b) / tpy).floor() as usize;
    if n_hi > f.nterms() {
        return Err(Error::InsufficientCoefficients { needed: n_hi, available: f.nterms() });
    }
    let tail = cfg.tail_constant * s.powf(-cfg.delta);
    let base = log_i(s, s1);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in n_lo..=n_hi {
        let w = f.lambda_f64(n) * (log_i(s, tpy * n as f64) - base).exp();
        let (c, sn, _) = terms::unit_phase(n, pt.alpha);
        sum += Complex64::new(w * c, w * sn);
    }
    Ok(ScaledComplex::from_parts(0.0, sum, tail))
}

/// `|Phi_f(k; alpha, y_l) - lambda(l) e(alpha l)|` in the `I_k(k')` normalization.
///
/// The `l`-th term is excluded analytically so the difference carries no cancellation.
pub fn theorem2_residual(f: &Eigenform, l: u64, alpha: f64, cfg: &WindowConfig) -> Result<f64> {
    let k = f.weight() as f64;
    let lmax = ladder_max(k, cfg);
    if (l as f64) < cfg.beta1 || l > lmax {
        return Err(Error::OutsideRegime(format!("l = {l} outside [{}, {lmax}]", cfg.beta1)));
    }
    let y = y_ladder(k, l);
    let tr = truncation(k, y, 1e-15, f.nterms())?;
    let s1 = (k - 1.0) / 2.0;
    let alpha = normalize_alpha(alpha);
    let lf = l as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    for n in 1..=tr.n_hi {
        if n as u64 == l {
            continue;
        }
        let x = n as f64 / lf;
        let r = (s1 * (x.ln() - (x - 1.0))).exp();
        let w = f.lambda_f64(n) * r;
        let (c, sn, _) = terms::unit_phase(n, alpha);
        sum += Complex64::new(w * c, w * sn);
        abs += w.abs();
    }
    let rounding = abs * 1e-13;
    Ok(sum.norm() + tr.tail * tr.log_scale.exp() + rounding)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_normalization() {
        assert_eq!(normalize_alpha(0.5), 0.5);
        assert_eq!(normalize_alpha(-0.5), 0.5);
        assert_eq!(normalize_alpha(1.0), 0.0);
        assert!((normalize_alpha(0.7) + 0.3).abs() < 1e-15);
        assert!((normalize_alpha(-1.2) + 0.2).abs() < 1e-15);
    }

    #[test]
    fn scaled_complex_renormalizes() {
        let v = ScaledComplex::from_parts(0.0, Complex64::new(1e-250, 0.0), 1e-260);
        assert!(v.mantissa().norm() > 1e-200);
        assert!((v.log_mag() - (1e-250f64).ln()).abs() < 1e-9);
        assert!(v.is_certified_nonzero());
        assert_eq!(ScaledComplex::from_parts(0.0, Complex64::new(-1.0, 0.0), 0.1).phase(), PI);
    }

    #[test]
    fn regime_bounds() {
        let (lo, hi) = windowed_regime(500.0);
        assert!(lo < y_ladder(500.0, 3) && y_ladder(500.0, 1) < hi);
        assert_eq!(ladder_max(500.0, &WindowConfig::default()), 4);
    }
}
