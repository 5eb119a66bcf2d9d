//! Zero counts above a horizontal line by certified phase unwrapping.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evaluator::{eval_mp, ScaledComplex, TermTable};
use crate::modforms::Eigenform;

#[derive(Clone, Debug, PartialEq)]
pub struct WindingPolicy {
    pub rel_tol: f64,
    /// cap on the number of certified steps over half a period
    pub max_steps: usize,
}

impl Default for WindingPolicy {
    fn default() -> Self {
        WindingPolicy { rel_tol: 1e-15, max_steps: 4_000_000 }
    }
}

/// Diagnostics of one winding computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindingTrace {
    pub count: u64,
    pub steps: usize,
    pub mp_points: usize,
    /// distance of the unwrapped phase from the nearest integer multiple of `2 pi`
    pub defect: f64,
}

fn rescale(v: &ScaledComplex, log_scale: f64) -> (Complex64, f64) {
    let r = (v.log_scale() - log_scale).exp();
    (v.mantissa() * r, v.err() * r)
}

/// Number of zeros of `f` in `{Im z > y, -1/2 < Re z <= 1/2}`, the cusp zero included.
pub fn winding_count(f: &Eigenform, y: f64, policy: &WindingPolicy) -> Result<u64> {
    Ok(winding_trace(f, y, policy)?.count)
}

/// As [`winding_count`], with step statistics.
///
/// Real coefficients make the phase change over `[-1/2, 0]` equal to that over `[0, 1/2]`,
/// so only the second half is traversed.
pub fn winding_trace(f: &Eigenform, y: f64, policy: &WindingPolicy) -> Result<WindingTrace> {
    let k = f.weight() as f64;
    let table = TermTable::new(f, k, y, policy.rel_tol)?;
    let ls = table.trunc.log_scale;
    let d = table.alpha_lipschitz();
    let mp_bits = f.precision_bits();

    let mut mp_points = 0usize;
    let mut sample = |alpha: f64| -> Result<(Complex64, f64)> {
        let (v, e) = rescale(&table.eval(alpha), ls);
        if v.norm() > 2.0 * e {
            return Ok((v, e));
        }
        mp_points += 1;
        let (v, e) = rescale(&eval_mp(f, &table.trunc, alpha, mp_bits), ls);
        if v.norm() > 2.0 * e {
            return Ok((v, e));
        }
        Err(Error::ZeroOnContour { y })
    };

    let mut alpha = 0.0;
    let (mut v, mut e) = sample(alpha)?;
    let mut phase = 0.0;
    let mut steps = 0usize;
    while alpha < 0.5 {
        let h = 0.9 * (v.norm() - e) / d;
        let next = (alpha + h).min(0.5);
        if next <= alpha {
            return Err(Error::ZeroOnContour { y });
        }
        let (w, ew) = sample(next)?;
        phase += (w / v).arg();
        v = w;
        e = ew;
        alpha = next;
        steps += 1;
        if steps > policy.max_steps {
            return Err(Error::BudgetExhausted);
        }
    }
    let turns = phase / PI;
    let count = turns.round();
    let defect = (turns - count).abs() * PI;
    if defect > 1e-6 || count < 0.0 {
        return Err(Error::Internal(format!("phase did not close at y={y}: {turns} half-turns")));
    }
    Ok(WindingTrace { count: count as u64, steps, mp_points, defect })
}
