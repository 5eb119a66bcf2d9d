//! Gaussian random-coefficient model for real zeros on the vertical lines and the arc:
//! Edelman-Kostlan densities, their asymptotic and cusp-regime forms, expected counts
//! and Monte Carlo validation.

mod monte_carlo;

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use crate::census::Segment;
use crate::error::{Error, Result};

pub use monte_carlo::{count_sign_changes, monte_carlo, trial_counts, McResult};

/// Terms whose log is below the peak by more than this are dropped.
const LOG_CUTOFF: f64 = 60.0;

/// Default exponent offset of the cusp regime: `y >= k^(1/2 + delta)`.
pub const CUSP_DELTA: f64 = 0.05;

/// Heights at and above `k^STITCH_EXPONENT` use the cusp-regime density in [`expected_count`].
pub const STITCH_EXPONENT: f64 = 0.55;

/// Real number `mantissa * exp(log_scale)` with an absolute mantissa error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledReal {
    pub log_scale: f64,
    pub mantissa: f64,
    pub err: f64,
}

impl ScaledReal {
    pub fn value(&self) -> f64 {
        self.mantissa * self.log_scale.exp()
    }

    /// `self / other` computed without forming either value.
    pub fn ratio(&self, other: &ScaledReal) -> f64 {
        self.mantissa / other.mantissa * (self.log_scale - other.log_scale).exp()
    }
}

/// Index range `[lo, hi]` outside which `(k - 1) ln n - 4 pi n y` is `LOG_CUTOFF` below its maximum,
/// together with the maximum.
fn envelope(k: f64, y: f64) -> (usize, usize, f64) {
    let e = k - 1.0;
    let x = 4.0 * PI * y;
    let g = |n: f64| e * n.ln() - x * n;
    let peak = (e / x).max(1.0);
    let n0 = peak.floor().max(1.0);
    let top = g(n0).max(g(n0 + 1.0));
    let mut lo = n0;
    while lo > 1.0 && g(lo - 1.0) > top - LOG_CUTOFF {
        lo -= 1.0;
    }
    let mut hi = n0 + 1.0;
    while g(hi + 1.0) > top - LOG_CUTOFF {
        hi += 1.0;
    }
    (lo as usize, hi as usize, top)
}

/// `S(k, alpha, y) = sum n^(k-1) cos(4 pi n alpha) e^(-4 pi n y)`, normalized by its largest term.
pub fn s_sum(k: f64, alpha: f64, y: f64) -> Result<ScaledReal> {
    if !(y > 0.0) || !(k >= 4.0) {
        return Err(Error::InvalidArgument(format!("s_sum needs y > 0 and k >= 4 (k={k}, y={y})")));
    }
    let (lo, hi, top) = envelope(k, y);
    let e = k - 1.0;
    let x = 4.0 * PI * y;
    let mut sum = 0.0;
    let mut abs = 0.0;
    for n in lo..=hi {
        let nf = n as f64;
        let t = (e * nf.ln() - x * nf - top).exp();
        let c = (4.0 * PI * (nf * alpha).fract()).cos();
        sum += t * c;
        abs += t;
    }
    let count = (hi - lo + 1) as f64;
    let dropped = (hi as f64 + 2.0 + lo as f64) * (-LOG_CUTOFF).exp() * 4.0;
    let err = abs * f64::EPSILON * (count + 8.0 + 4.0 * PI * (hi as f64 * alpha).abs()) + dropped;
    Ok(ScaledReal { log_scale: top, mantissa: sum, err })
}

/// The two Edelman-Kostlan vectors: cosine (`v`) and sine (`w`) components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Form {
    V,
    W,
}

fn is_degenerate_alpha(alpha: f64) -> bool {
    let twice = 2.0 * alpha;
    (twice - twice.round()).abs() < 1e-15
}

/// Expected number of real zeros per unit `y` of the random series along `Re z = alpha`,
/// using the cosine vector.
pub fn ek_density(k: f64, alpha: f64, y: f64) -> Result<f64> {
    ek_density_form(k, alpha, y, Form::V)
}

/// Density for either vector. The sine vector vanishes identically at `alpha` in `{0, 1/2}`.
///
/// Evaluated as `2 sqrt(Var_w(n))` for the weights `w_n = n^(k-1) e^(-4 pi n y) cos^2(2 pi n alpha)`
/// (or `sin^2`), which equals the usual determinant form without its cancellation.
pub fn ek_density_form(k: f64, alpha: f64, y: f64, form: Form) -> Result<f64> {
    if !(y > 0.0) || !(k >= 4.0) {
        return Err(Error::InvalidArgument(format!("density needs y > 0 and k >= 4 (k={k}, y={y})")));
    }
    if form == Form::W && is_degenerate_alpha(alpha) {
        return Err(Error::DegenerateVector { alpha });
    }
    let (lo, hi, top) = envelope(k, y);
    let e = k - 1.0;
    let x = 4.0 * PI * y;
    let mut ws = Vec::with_capacity(hi - lo + 1);
    for n in lo..=hi {
        let nf = n as f64;
        let (s, c) = (2.0 * PI * (nf * alpha).fract()).sin_cos();
        let trig = if form == Form::V { c * c } else { s * s };
        ws.push((nf, (e * nf.ln() - x * nf - top).exp() * trig));
    }
    let m0: f64 = ws.iter().map(|w| w.1).sum();
    if !(m0 > 0.0) {
        return Err(Error::DegenerateVector { alpha });
    }
    let mean = ws.iter().map(|w| w.0 * w.1).sum::<f64>() / m0;
    let var = ws.iter().map(|w| (w.0 - mean).powi(2) * w.1).sum::<f64>() / m0;
    Ok(2.0 * var.max(0.0).sqrt())
}

/// Leading-order density `(1/2 pi) sqrt(k) / y` in the bulk regime.
pub fn asymptotic_density(k: f64, y: f64) -> f64 {
    k.sqrt() / (2.0 * PI * y)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Three-term localized density with the dominant index fixed to `l`.
pub fn cusp_regime_density_branch(k: f64, y: f64, l: u64) -> Result<f64> {
    if l == 0 {
        return Err(Error::OutsideRegime("dominant index must be at least 1".into()));
    }
    let e = k - 1.0;
    let x = 4.0 * PI * y;
    let lf = l as f64;
    let lower = if l == 1 { f64::NEG_INFINITY } else { e * (-1.0 / lf).ln_1p() + x };
    let upper = e * (1.0 / lf).ln_1p() - x;
    let middle = if l == 1 { f64::NEG_INFINITY } else { 4f64.ln() + e * (-1.0 / (lf * lf)).ln_1p() };
    let num = log_sum_exp(&[lower, middle, upper]);
    let den = log_sum_exp(&[lower, 0.0, upper]);
    Ok(2.0 * ((num - 2.0 * den) / 2.0).exp())
}

/// Localized density for `y >= k^(1/2 + delta)`, dominant index the integer nearest `(k - 1)/(4 pi y)`.
pub fn cusp_regime_density(k: f64, y: f64, delta: f64) -> Result<f64> {
    let min_y = k.powf(0.5 + delta);
    if !(y >= min_y) {
        return Err(Error::OutsideRegime(format!("y = {y} below k^(1/2+{delta}) = {min_y:.4}")));
    }
    let t = (k - 1.0) / (4.0 * PI * y);
    let l = t.round();
    if l < 1.0 {
        return Err(Error::OutsideRegime(format!("t = {t} rounds to 0")));
    }
    cusp_regime_density_branch(k, y, l as u64)
}

/// Density used by [`expected_count`] on the line `Re z = alpha`.
pub fn stitched_density(k: f64, alpha: f64, y: f64) -> Result<f64> {
    if y >= k.powf(STITCH_EXPONENT) && is_degenerate_alpha(alpha) {
        match cusp_regime_density(k, y, STITCH_EXPONENT - 0.5) {
            Ok(d) => return Ok(d),
            Err(Error::OutsideRegime(_)) => {}
            Err(e) => return Err(e),
        }
    }
    ek_density(k, alpha, y)
}

/// Line and height range modelling a parameter range of a segment.
///
/// The arc is carried to `Re z = 1/2` by `z -> z/(z + 1)`, which sends `e^(i theta)` to
/// `1/2 + (i/2) tan(theta/2)`.
pub fn model_line(segment: Segment, range: (f64, f64)) -> (f64, (f64, f64)) {
    match segment {
        Segment::Delta1 => (0.0, range),
        Segment::Delta2 => (0.5, range),
        Segment::Delta3 => {
            let m = |t: f64| 0.5 * (t / 2.0).tan();
            (0.5, (m(range.0), m(range.1)))
        }
    }
}

fn simpson<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return Ok(left + right + diff / 15.0);
    }
    Ok(simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}

/// Adaptive Simpson integral over `[a, b]` split at `breaks`, to relative tolerance `rel_tol`.
pub fn integrate<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, breaks: &[f64], rel_tol: f64) -> Result<f64> {
    if !(a < b) {
        return Ok(0.0);
    }
    let mut pts = vec![a];
    pts.extend(breaks.iter().cloned().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    let mut ends = Vec::with_capacity(pts.len());
    let mut coarse = 0.0;
    for w in pts.windows(2) {
        let (fa, fm, fb) = (f(w[0])?, f(0.5 * (w[0] + w[1]))?, f(w[1])?);
        let s = (w[1] - w[0]) / 6.0 * (fa + 4.0 * fm + fb);
        coarse += s.abs();
        ends.push((w[0], w[1], fa, fm, fb, s));
    }
    let tol = rel_tol * coarse.max(f64::MIN_POSITIVE) / ends.len() as f64;
    let mut total = 0.0;
    for (a, b, fa, fm, fb, s) in ends {
        total += simpson(&mut f, a, b, fa, fm, fb, s, tol, 40)?;
    }
    Ok(total)
}

const MAX_BREAKS: f64 = 4096.0;

/// Heights inside `[a, b]` where the dominant term changes, `(k - 1)/(4 pi (l + 1/2))`, and where
/// terms `l` and `l + 1` balance, `(k - 1) ln(1 + 1/l)/(4 pi)`. Density peaks sit at the latter.
fn transition_heights(k: f64, a: f64, b: f64) -> Vec<f64> {
    let c = (k - 1.0) / (4.0 * PI);
    let (t_lo, t_hi) = (c / b, c / a);
    let first = (t_lo - 0.5).floor().max(1.0);
    // peaks are isolated only for small l; deep in the bulk the density is smooth
    let last = (t_hi - 0.5).ceil().min(first + MAX_BREAKS);
    if last < first {
        return Vec::new();
    }
    let mut v: Vec<f64> = (first as u64..=last as u64)
        .flat_map(|l| [c / (l as f64 + 0.5), c * (1.0 / l as f64).ln_1p()])
        .filter(|&y| y > a && y < b)
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Expected number of real zeros of the random model on a segment parameter range.
pub fn expected_count(k: u32, segment: Segment, range: (f64, f64), quad_tol: f64) -> Result<f64> {
    let kf = k as f64;
    let (alpha, (a, b)) = model_line(segment, range);
    if !(a < b) {
        return Ok(0.0);
    }
    let mut breaks = transition_heights(kf, a, b);
    breaks.push(kf.powf(STITCH_EXPONENT));
    integrate(|y| stitched_density(kf, alpha, y), a, b, &breaks, quad_tol)
}

/// As [`expected_count`] on the line `Re z = alpha`, with the exact density throughout.
pub fn expected_count_exact(k: f64, alpha: f64, range: (f64, f64), quad_tol: f64) -> Result<f64> {
    let (a, b) = range;
    let breaks = transition_heights(k, a, b);
    integrate(|y| ek_density(k, alpha, y), a, b, &breaks, quad_tol)
}

/// Integral of the cusp-regime density over `[y_lo, (k - 1)/(2 pi)]`, the heights with a dominant index `>= 1`.
pub fn cusp_regime_count(k: f64, y_lo: f64, delta: f64, quad_tol: f64) -> Result<f64> {
    let top = (k - 1.0) / (2.0 * PI);
    let breaks = transition_heights(k, y_lo, top);
    integrate(|y| cusp_regime_density(k, y, delta), y_lo, top, &breaks, quad_tol)
}

/// Which density a profile samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DensityMethod {
    ExactEk,
    Asymptotic,
    CuspRegime,
}

impl fmt::Display for DensityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DensityMethod::ExactEk => "exact_EK",
            DensityMethod::Asymptotic => "asymptotic",
            DensityMethod::CuspRegime => "cusp_regime",
        })
    }
}

/// Sampled density along a vertical line with the trapezoidal integral of the samples.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityProfile {
    pub weight: u32,
    pub alpha: f64,
    pub samples: Vec<(f64, f64)>,
    pub integrated: f64,
    pub method: DensityMethod,
}

impl DensityProfile {
    /// `points` heights spaced evenly in `ln y` over `range`.
    pub fn sample(k: u32, alpha: f64, range: (f64, f64), points: usize, method: DensityMethod) -> Result<Self> {
        let (a, b) = range;
        if !(a > 0.0 && a < b) || points < 2 {
            return Err(Error::InvalidArgument("profile needs 0 < lo < hi and at least 2 points".into()));
        }
        let kf = k as f64;
        let (la, lb) = (a.ln(), b.ln());
        let mut samples = Vec::with_capacity(points);
        for i in 0..points {
            let y = if i + 1 == points { b } else { (la + (lb - la) * i as f64 / (points - 1) as f64).exp() };
            let d = match method {
                DensityMethod::ExactEk => ek_density(kf, alpha, y)?,
                DensityMethod::Asymptotic => asymptotic_density(kf, y),
                DensityMethod::CuspRegime => cusp_regime_density(kf, y, CUSP_DELTA)?,
            };
            samples.push((y, d));
        }
        let integrated = samples.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
        Ok(DensityProfile { weight: k, alpha, samples, integrated, method })
    }

    /// `y,density` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["y", "density"])?;
        for (y, d) in &self.samples {
            out.write_record([format!("{y:.12e}"), format!("{d:.12e}")])?;
        }
        out.flush()?;
        Ok(())
    }
}
