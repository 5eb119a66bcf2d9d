//! Certified isolation of the real roots of a real-rooted integer polynomial.

use std::cmp::Ordering;

use rug::float::Round;
use rug::ops::AssignRound;
use rug::{Float, Integer};

use crate::error::{Error, Result};

/// Polynomial `sum q_j t^j` with `q_j = c_j * 2^((j - d) * half_exp / 2)`, evaluated at `W` bits.
///
/// If `c` has roots `x_i` then the scaled polynomial has roots `x_i / 2^(half_exp / 2)`.
pub(crate) struct ScaledPoly {
    coeffs: Vec<Float>,
    prec: u32,
    coeff_rel_err: f64,
}

pub(crate) enum Isolation {
    Roots(Vec<Float>),
    NeedPrecision,
    Collision,
}

impl ScaledPoly {
    pub(crate) fn new(c: &[Integer], half_exp: u32, prec: u32) -> Self {
        let d = c.len() - 1;
        let sqrt2 = Float::with_val(prec, 2).sqrt();
        let coeffs = c
            .iter()
            .enumerate()
            .map(|(j, cj)| {
                let e2 = -(((d - j) as i64) * half_exp as i64);
                let mut v = Float::with_val(prec, cj);
                if e2 % 2 == 0 {
                    v <<= (e2 / 2) as i32;
                } else {
                    v <<= ((e2 - 1) / 2) as i32;
                    v *= &sqrt2;
                }
                v
            })
            .collect();
        let u = (-(prec as f64)).exp2();
        ScaledPoly { coeffs, prec, coeff_rel_err: 4.0 * u }
    }

    pub(crate) fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Value and a rigorous bound on its absolute error.
    pub(crate) fn eval_bounded(&self, x: &Float) -> (Float, f64) {
        let prec = self.prec;
        let mut v = Float::with_val(prec, 0);
        let mut s = Float::with_val(prec, 0);
        let ax = Float::with_val(prec, x.abs_ref());
        for c in self.coeffs.iter().rev() {
            v *= x;
            v += c;
            s.mul_add_round_up(&ax, c);
        }
        let d = self.degree() as f64;
        let u = (-(prec as f64)).exp2();
        let n = 2.0 * d + 2.0;
        let gamma = n * u / (1.0 - n * u);
        let bound = s.to_f64_round(Round::Up) * (gamma + self.coeff_rel_err) * 1.01;
        (v, bound)
    }

    fn eval_with_derivative(&self, x: &Float) -> (Float, Float) {
        let mut v = Float::with_val(self.prec, 0);
        let mut dv = Float::with_val(self.prec, 0);
        for c in self.coeffs.iter().rev() {
            dv *= x;
            dv += &v;
            v *= x;
            v += c;
        }
        (v, dv)
    }

    /// Certified sign of the polynomial at `x`, or `None` when not separated from its error bound.
    pub(crate) fn certified_sign(&self, x: &Float) -> Option<Ordering> {
        let (v, bound) = self.eval_bounded(x);
        let av = v.to_f64_round(Round::Down).abs();
        if av > bound && !v.is_zero() {
            Some(if v.is_sign_negative() { Ordering::Less } else { Ordering::Greater })
        } else {
            None
        }
    }

    /// Newton iteration with implicit deflation, roots found from the top down.
    fn approximate_roots(&self, upper: f64) -> Option<Vec<Float>> {
        let prec = self.prec;
        let d = self.degree();
        let mut roots: Vec<Float> = Vec::with_capacity(d);
        let offset = Float::with_val(prec, Float::i_exp(1, -((prec / 4) as i32)));
        for i in 0..d {
            let mut x = if i == 0 {
                Float::with_val(prec, upper)
            } else {
                Float::with_val(prec, &roots[i - 1] - &offset)
            };
            let mut converged = false;
            let mut last_step: Option<Float> = None;
            let tiny = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 16));
            for _ in 0..4000 {
                let (q, dq) = self.eval_with_derivative(&x);
                if q.is_zero() {
                    converged = true;
                    break;
                }
                let mut s = Float::with_val(prec, 0);
                for r in &roots {
                    let diff = Float::with_val(prec, &x - r);
                    s += diff.recip();
                }
                let denom = dq - Float::with_val(prec, &q * &s);
                if denom.is_zero() {
                    break;
                }
                let step = Float::with_val(prec, &q / &denom);
                if step.is_sign_negative() && last_step.is_some() {
                    // descent is monotone in exact arithmetic, so a reversal is rounding noise
                    converged = true;
                    break;
                }
                let astep = Float::with_val(prec, step.abs_ref());
                if let Some(ls) = &last_step {
                    if astep >= *ls {
                        let (_, bound) = self.eval_bounded(&x);
                        if q.to_f64().abs() <= bound {
                            converged = true;
                            break;
                        }
                    }
                }
                x -= &step;
                if astep <= tiny {
                    converged = true;
                    break;
                }
                last_step = Some(astep);
            }
            if !converged {
                return None;
            }
            roots.push(x);
        }
        Some(roots)
    }

    /// Roots in descending order, each certified inside a sign-change bracket of half-width
    /// `2^-bracket_bits`; brackets are disjoint, so every root is isolated.
    pub(crate) fn isolate(&self, upper: f64, bracket_bits: u32) -> Isolation {
        let Some(roots) = self.approximate_roots(upper) else {
            return Isolation::NeedPrecision;
        };
        let w = Float::with_val(self.prec, Float::i_exp(1, -(bracket_bits as i32)));
        let mut prev_lo: Option<Float> = None;
        let mut prev_sign: Option<Ordering> = None;
        for r in &roots {
            let hi = Float::with_val(self.prec, r + &w);
            let lo = Float::with_val(self.prec, r - &w);
            if let Some(pl) = &prev_lo {
                if hi >= *pl {
                    return Isolation::Collision;
                }
            }
            let (Some(shi), Some(slo)) = (self.certified_sign(&hi), self.certified_sign(&lo)) else {
                return Isolation::NeedPrecision;
            };
            if shi == slo {
                return Isolation::NeedPrecision;
            }
            if let Some(ps) = prev_sign {
                if ps != shi {
                    return Isolation::NeedPrecision;
                }
            }
            prev_sign = Some(slo);
            prev_lo = Some(lo);
        }
        Isolation::Roots(roots)
    }
}

trait MulAddUp {
    fn mul_add_round_up(&mut self, x: &Float, c: &Float);
}

impl MulAddUp for Float {
    /// `self = self * x + |c|`, rounded upward.
    fn mul_add_round_up(&mut self, x: &Float, c: &Float) {
        let prod = Float::with_val_round(self.prec(), &*self * x, Round::Up).0;
        let ac = Float::with_val_round(self.prec(), c.abs_ref(), Round::Up).0;
        self.assign_round(prod + ac, Round::Up);
    }
}

/// Real roots of `det(xI - T)` for a matrix with real spectrum bounded by `2 * 2^(half_exp/2)`,
/// returned in descending order in the scaled variable `x / 2^(half_exp/2)`.
pub(crate) fn isolate_scaled_roots(
    c: &[Integer],
    half_exp: u32,
    weight: u32,
    mut prec: u32,
    bracket_bits: u32,
) -> Result<(Vec<Float>, u32)> {
    for _ in 0..4 {
        let poly = ScaledPoly::new(c, half_exp, prec);
        match poly.isolate(2.0 + 1.0 / 16.0, bracket_bits) {
            Isolation::Roots(r) => {
                if r.iter().any(|x| x.clone().abs() > 2.0 + 1e-6) {
                    return Err(Error::Internal("root outside the Deligne interval".into()));
                }
                return Ok((r, prec));
            }
            Isolation::NeedPrecision | Isolation::Collision => prec = prec * 3 / 2 + 64,
        }
    }
    Err(Error::EigenvalueCollision { weight, bits: bracket_bits })
}
