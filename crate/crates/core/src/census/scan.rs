//! Certified sign evaluation on the segments, grid scans and bisection.

use std::f64::consts::PI;

use num_complex::Complex64;
use rug::Float;

use super::segment::Segment;
use crate::error::{Error, Result};
use crate::evaluator::{eval_mp, eval_mp_at, log_i, tolerance_floor, truncation, ScaledComplex, TermTable};
use crate::modforms::Eigenform;

/// A real number `mantissa * exp(log_scale)` with an absolute mantissa error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifiedReal {
    pub log_scale: f64,
    pub mantissa: f64,
    pub err: f64,
}

impl CertifiedReal {
    /// `Some(+1 | -1)` when the sign is certified.
    pub fn sign(&self) -> Option<i8> {
        if self.mantissa.abs() > self.err {
            Some(if self.mantissa > 0.0 { 1 } else { -1 })
        } else {
            None
        }
    }

    pub fn log_abs(&self) -> f64 {
        self.log_scale + self.mantissa.abs().ln()
    }

    pub fn value(&self) -> f64 {
        self.mantissa * self.log_scale.exp()
    }
}

/// Grid and refinement settings for scans.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanPolicy {
    /// grid step in `t = (k - 1)/(4 pi y)` on the vertical lines
    pub t_step: f64,
    /// number of arc grid points; `None` means `ceil(k/4)`
    pub arc_points: Option<usize>,
    /// rounds of subdivision around local minima of `|value|`
    pub refine_depth: u32,
    /// certify every bracket-free cell as zero-free by a derivative bound
    pub exhaustive: bool,
    /// truncation tolerance of the double-precision tier
    pub rel_tol: f64,
    /// maximum subdivision depth of the exhaustive check
    pub max_depth: u32,
}

impl Default for ScanPolicy {
    fn default() -> Self {
        ScanPolicy { t_step: 0.125, arc_points: None, refine_depth: 3, exhaustive: false, rel_tol: 1e-15, max_depth: 24 }
    }
}

/// A certified sign change of the real restriction on a segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignChangeBracket {
    pub segment: Segment,
    pub lo: f64,
    pub hi: f64,
    pub value_lo: CertifiedReal,
    pub value_hi: CertifiedReal,
}

/// Result of a scan with bookkeeping of points that needed special treatment.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanOutcome {
    pub brackets: Vec<SignChangeBracket>,
    /// grid points whose sign stayed undetermined (skipped)
    pub undetermined: Vec<f64>,
    /// grid points replaced by a jittered neighbour
    pub jittered: Vec<f64>,
    /// cells the exhaustive check could not certify
    pub uncertified_cells: Vec<(f64, f64)>,
}

/// `shift` bounds `|value(point(theta)) - value(e^(i theta))|` in absolute units: the rounded
/// point is off the arc by a few ulps.
fn rotate_arc(k: u32, theta: f64, v: &ScaledComplex, log_shift: f64) -> Result<CertifiedReal> {
    const U: f64 = f64::EPSILON;
    let half_k = k as f64 / 2.0;
    let rot = (half_k * theta).rem_euclid(2.0 * PI);
    let eps = 2.0 * U * half_k * theta + 4.0 * U;
    let r = v.mantissa() * Complex64::from_polar(1.0, rot);
    let m = v.mantissa().norm();
    let err = v.err() + m * (eps + 4.0 * U) + (log_shift - v.log_scale()).exp();
    if r.im.abs() > 4.0 * err + 1e-300 {
        return Err(Error::Internal(format!(
            "reality defect on the arc at theta={theta}: im {:e} vs bound {:e}",
            r.im, err
        )));
    }
    Ok(CertifiedReal { log_scale: v.log_scale(), mantissa: r.re, err })
}

/// Real restriction in double precision: `Re f_value` on the lines, `Re e^(ik theta/2) f_value` on the arc.
pub fn restrict_real(f: &Eigenform, segment: Segment, param: f64) -> Result<CertifiedReal> {
    let v = sample(f, segment, param, 0, 1e-15)?;
    if v.sign().is_none() {
        return Err(Error::Indeterminate);
    }
    Ok(v)
}

/// Evaluates at tier 0 (`f64`), 1 (`precision_bits`) or 2 (`2 * precision_bits`), without sign checks.
pub(crate) fn sample(f: &Eigenform, segment: Segment, param: f64, tier: u8, rel_tol: f64) -> Result<CertifiedReal> {
    let k = f.weight();
    let (alpha, y) = segment.point(param);
    if tier == 0 {
        let table = TermTable::new(f, k as f64, y, rel_tol)?;
        return match segment {
            Segment::Delta1 | Segment::Delta2 => {
                let (v, err) = table.eval_real_line(segment == Segment::Delta2);
                Ok(CertifiedReal { log_scale: table.trunc.log_scale, mantissa: v, err })
            }
            Segment::Delta3 => rotate_arc(k, param, &table.eval(alpha), arc_shift(&table, alpha, y)),
        };
    }
    let bits = f.precision_bits() * tier as u32;
    let tol = tolerance_floor(f.precision_bits()).max(1e-30);
    let tr = match truncation(k as f64, y, tol, f.nterms()) {
        Ok(t) => t,
        Err(Error::InsufficientCoefficients { .. }) => truncation(k as f64, y, rel_tol, f.nterms())?,
        Err(e) => return Err(e),
    };
    match segment {
        Segment::Delta1 | Segment::Delta2 => {
            let v = eval_mp(f, &tr, alpha, bits);
            Ok(CertifiedReal { log_scale: v.log_scale(), mantissa: v.mantissa().re, err: v.err() })
        }
        Segment::Delta3 => {
            // the point is taken on the arc itself, so no displacement allowance
            let (sn, cs) = Float::with_val(bits, param).sin_cos(Float::new(bits));
            let v = eval_mp_at(f, &tr, &cs, &sn, bits);
            rotate_arc(k, param, &v, f64::NEG_INFINITY)
        }
    }
}

/// Log of a bound on the change of the value under a relative perturbation `4u` of `(alpha, y)`.
fn arc_shift(table: &TermTable, alpha: f64, y: f64) -> f64 {
    let s1 = (table.trunc.s - 1.0) / 2.0;
    let d_alpha = table.alpha_lipschitz();
    let d_y = d_alpha + s1 / y * table.abs_sum();
    let shift = 4.0 * f64::EPSILON * (alpha.abs() * d_alpha + y * d_y);
    shift.ln() + table.trunc.log_scale
}

/// Sign-certified sample with precision escalation (two steps), or `None`.
pub(crate) fn certified(f: &Eigenform, segment: Segment, param: f64, rel_tol: f64) -> Result<Option<CertifiedReal>> {
    for tier in 0..3u8 {
        let v = sample(f, segment, param, tier, rel_tol)?;
        if v.sign().is_some() {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

/// Certified sample, jittering the point by `1e-9 * step` when escalation is not enough.
fn certified_or_jitter(
    f: &Eigenform,
    segment: Segment,
    param: f64,
    step: f64,
    rel_tol: f64,
    out: &mut ScanOutcome,
) -> Result<Option<(f64, CertifiedReal)>> {
    if let Some(v) = certified(f, segment, param, rel_tol)? {
        return Ok(Some((param, v)));
    }
    for j in [1.0, -1.0, 2.0, -2.0] {
        let p = param + j * 1e-9 * step;
        if let Some(v) = certified(f, segment, p, rel_tol)? {
            log::debug!("{segment}: jittered {param} -> {p}");
            out.jittered.push(param);
            return Ok(Some((p, v)));
        }
    }
    log::warn!("{segment}: undetermined sign at {param}");
    out.undetermined.push(param);
    Ok(None)
}

/// Initial grid for `[lo, hi]`.
fn grid(k: u32, segment: Segment, lo: f64, hi: f64, policy: &ScanPolicy) -> Vec<f64> {
    match segment {
        Segment::Delta1 | Segment::Delta2 => {
            let c = (k as f64 - 1.0) / (4.0 * PI);
            let (t_lo, t_hi) = (c / hi, c / lo);
            let step = policy.t_step;
            let mut ts = vec![t_lo];
            let mut m = (t_lo / step).floor() as i64 + 1;
            while (m as f64) * step < t_hi {
                ts.push(m as f64 * step);
                m += 1;
            }
            ts.push(t_hi);
            let mut ys: Vec<f64> = ts.into_iter().map(|t| c / t).collect();
            ys.reverse();
            ys[0] = lo;
            *ys.last_mut().unwrap() = hi;
            ys.dedup();
            ys
        }
        Segment::Delta3 => {
            let (a, b) = Segment::Delta3.range();
            let full = policy.arc_points.unwrap_or(((k as f64) / 4.0).ceil() as usize).max(8);
            let m = (((hi - lo) / (b - a)) * full as f64).ceil().max(2.0) as usize;
            (0..=m).map(|i| if i == m { hi } else { lo + (hi - lo) * i as f64 / m as f64 }).collect()
        }
    }
}

/// Bound on `|d/dy|` of the real restriction over `[a, b]` on a vertical line, as a natural log,
/// in the same normalization as the sampled values.
fn log_derivative_bound(f: &Eigenform, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let k = f.weight() as f64;
    let s1 = (k - 1.0) / 2.0;
    let tr = truncation(k, a, rel_tol, f.nterms())?;
    let base = log_i(k, s1);
    let mut logs = Vec::with_capacity(tr.n_hi);
    for n in 1..=tr.n_hi {
        let lam = f.lambda_f64(n).abs() + f.lambda_err();
        if lam == 0.0 {
            continue;
        }
        let tpn = 2.0 * PI * n as f64;
        let ym = (s1 / tpn).clamp(a, b);
        let kernel = s1 * (tpn * ym).ln() - tpn * ym - base;
        let slope = (s1 / a - tpn).abs().max((s1 / b - tpn).abs());
        if slope > 0.0 {
            logs.push(lam.ln() + slope.ln() + kernel);
        }
    }
    // omitted terms: |d/dy| <= 2 * 2 pi n per term beyond the peak
    let tail = 2.0 * tr.tail_deriv;
    if tail > 0.0 {
        logs.push(tail.ln() + tr.log_scale);
    }
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Ok(m);
    }
    let sum: f64 = logs.iter().map(|x| (x - m).exp()).sum();
    Ok(m + sum.ln() + 1e-9)
}

/// `true` when `[a, b]` provably contains no zero given same-sign certified endpoint values.
fn cell_zero_free(f: &Eigenform, a: f64, va: &CertifiedReal, b: f64, vb: &CertifiedReal, rel_tol: f64) -> Result<bool> {
    let ld = log_derivative_bound(f, a, b, rel_tol)?;
    let la = (va.mantissa.abs() - va.err).ln() + va.log_scale;
    let lb = (vb.mantissa.abs() - vb.err).ln() + vb.log_scale;
    let m = la.max(lb).max(ld + (b - a).ln());
    let lhs = (la - m).exp() + (lb - m).exp();
    let rhs = (ld + (b - a).ln() - m).exp();
    Ok(lhs > rhs * (1.0 + 1e-9))
}

/// Certified sign-change brackets of the real restriction over `[lo, hi]`.
pub fn scan_segment(f: &Eigenform, segment: Segment, range: (f64, f64), policy: &ScanPolicy) -> Result<Vec<SignChangeBracket>> {
    Ok(scan_segment_detailed(f, segment, range, policy)?.brackets)
}

/// As [`scan_segment`], also reporting undetermined and jittered points.
pub fn scan_segment_detailed(
    f: &Eigenform,
    segment: Segment,
    range: (f64, f64),
    policy: &ScanPolicy,
) -> Result<ScanOutcome> {
    let (lo, hi) = range;
    let mut out = ScanOutcome::default();
    if !(lo < hi) {
        return Ok(out);
    }
    let k = f.weight();
    let params = grid(k, segment, lo, hi, policy);
    let mut pts: Vec<(f64, CertifiedReal)> = Vec::with_capacity(params.len());
    for (i, &p) in params.iter().enumerate() {
        let step = if i + 1 < params.len() { params[i + 1] - p } else { p - params[i - 1] };
        if let Some(s) = certified_or_jitter(f, segment, p, step, policy.rel_tol, &mut out)? {
            pts.push(s);
        }
    }

    for _ in 0..policy.refine_depth {
        let mut extra = Vec::new();
        for i in 1..pts.len().saturating_sub(1) {
            let (a, b, c) = (&pts[i - 1].1, &pts[i].1, &pts[i + 1].1);
            if a.sign() == b.sign() && b.sign() == c.sign() && b.log_abs() < a.log_abs() && b.log_abs() < c.log_abs() {
                extra.push(0.5 * (pts[i - 1].0 + pts[i].0));
                extra.push(0.5 * (pts[i].0 + pts[i + 1].0));
            }
        }
        if extra.is_empty() {
            break;
        }
        extra.dedup();
        for p in extra {
            let step = 1e-3 * p.abs().max(1.0);
            if let Some(s) = certified_or_jitter(f, segment, p, step, policy.rel_tol, &mut out)? {
                pts.push(s);
            }
        }
        pts.sort_by(|x, y| x.0.total_cmp(&y.0));
        pts.dedup_by(|x, y| x.0 == y.0);
    }

    if policy.exhaustive && segment != Segment::Delta3 {
        let mut i = 0;
        while i + 1 < pts.len() {
            let (a, va) = pts[i];
            let (b, vb) = pts[i + 1];
            if va.sign() != vb.sign() || cell_zero_free(f, a, &va, b, &vb, policy.rel_tol)? {
                i += 1;
                continue;
            }
            if (b - a) < a * (-(policy.max_depth as f64)).exp2() * 1e-3 {
                out.uncertified_cells.push((a, b));
                i += 1;
                continue;
            }
            let m = 0.5 * (a + b);
            match certified_or_jitter(f, segment, m, b - a, policy.rel_tol, &mut out)? {
                Some(s) => pts.insert(i + 1, s),
                None => {
                    out.uncertified_cells.push((a, b));
                    i += 1;
                }
            }
        }
    }

    for w in pts.windows(2) {
        let (a, va) = w[0];
        let (b, vb) = w[1];
        if va.sign() != vb.sign() {
            out.brackets.push(SignChangeBracket { segment, lo: a, hi: b, value_lo: va, value_hi: vb });
        }
    }
    Ok(out)
}

/// A located real zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroRecord {
    pub segment: Segment,
    pub location: f64,
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
    /// set when an independent count confirms the zero is simple
    pub simple_certified: bool,
    /// within tolerance of the corner `i` or `rho`
    pub corner: bool,
    /// imposed at an elliptic point by the weight
    pub forced: bool,
}

impl ZeroRecord {
    pub fn multiplicity_note(&self) -> &'static str {
        if self.simple_certified {
            "simple (certified)"
        } else {
            "bracketed only"
        }
    }
}

/// Bisects a bracket down to width `tol`, re-certifying every midpoint sign.
pub fn refine_zero(f: &Eigenform, bracket: &SignChangeBracket, tol: f64) -> Result<ZeroRecord> {
    let seg = bracket.segment;
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (Some(sa), Some(sb)) = (bracket.value_lo.sign(), bracket.value_hi.sign()) else {
        return Err(Error::InvalidArgument("bracket endpoints not certified".into()));
    };
    if sa == sb || !(a < b) {
        return Err(Error::InvalidArgument("not a sign-change bracket".into()));
    }
    let rel_tol = 1e-15;
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let mut found = None;
        for p in [m, m + 1e-9 * (b - a), m - 1e-9 * (b - a)] {
            if let Some(v) = certified(f, seg, p, rel_tol)? {
                found = Some((p, v));
                break;
            }
        }
        let Some((p, v)) = found else {
            return Err(Error::BudgetExhausted);
        };
        if v.sign() == Some(sa) {
            a = p;
        } else {
            b = p;
        }
    }
    Ok(ZeroRecord {
        segment: seg,
        location: 0.5 * (a + b),
        lo: a,
        hi: b,
        width: b - a,
        simple_certified: false,
        corner: false,
        forced: false,
    })
}
