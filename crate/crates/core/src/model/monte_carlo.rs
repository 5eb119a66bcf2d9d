use std::f64::consts::PI;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{ek_density, model_line};
use crate::census::Segment;
use crate::error::{Error, Result};

/// Monte Carlo estimate of the number of real zeros of the random series.
#[derive(Clone, Debug, PartialEq)]
pub struct McResult {
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
    pub seed: u64,
    /// number of series terms
    pub truncation: usize,
    pub counts: Vec<u64>,
}

impl McResult {
    /// `trial,count` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["trial", "count"])?;
        for (i, c) in self.counts.iter().enumerate() {
            out.write_record([i.to_string(), c.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Generator for one trial: the ChaCha stream selected by the trial index.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Last index whose envelope `n^((k-1)/2) e^(-2 pi n y_min)` is at least `1e-8` of its peak.
fn series_length(k: f64, y_min: f64) -> usize {
    let e = (k - 1.0) / 2.0;
    let x = 2.0 * PI * y_min;
    let g = |n: f64| e * n.ln() - x * n;
    let peak = (e / x).max(1.0);
    let top = g(peak.floor().max(1.0)).max(g(peak.floor() + 1.0));
    let mut n = peak.floor() + 1.0;
    while g(n + 1.0) >= top + 1e-8f64.ln() {
        n += 1.0;
    }
    n as usize
}

/// Grid in `ln y` with at least ten points per unit expected density.
fn grid(k: f64, alpha: f64, a: f64, b: f64) -> Result<Vec<f64>> {
    let (la, lb) = (a.ln(), b.ln());
    let mut peak: f64 = 0.0;
    for i in 0..=16 {
        let y = (la + (lb - la) * i as f64 / 16.0).exp();
        peak = peak.max(y * ek_density(k, alpha, y)?);
    }
    let m = ((10.0 * peak * (lb - la)).ceil() as usize).max(16) * 2;
    Ok((0..=m).map(|i| if i == m { b } else { (la + (lb - la) * i as f64 / m as f64).exp() }).collect())
}

/// `sum c_n cos(2 pi n alpha) n^((k-1)/2) e^(-2 pi n y)`, divided by the positive factor `e^top(y)`.
fn series(k: f64, alpha: f64, coeffs: &[f64], y: f64) -> f64 {
    let e = (k - 1.0) / 2.0;
    let x = 2.0 * PI * y;
    let peak = (e / x).max(1.0);
    let top = e * peak.ln() - x * peak;
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let n = (i + 1) as f64;
            c * (2.0 * PI * (n * alpha).fract()).cos() * (e * n.ln() - x * n - top).exp()
        })
        .sum()
}

/// Sign changes of the series on `[a, b]` using a fixed grid with three rounds of refinement
/// around same-sign local minima of `|value|`.
pub fn count_sign_changes(k: f64, alpha: f64, range: (f64, f64), coeffs: &[f64]) -> Result<u64> {
    let (a, b) = range;
    if !(a > 0.0 && a < b) {
        return Ok(0);
    }
    let mut pts: Vec<(f64, f64)> = grid(k, alpha, a, b)?.into_iter().map(|y| (y, series(k, alpha, coeffs, y))).collect();
    for _ in 0..3 {
        let mut extra = Vec::new();
        for i in 1..pts.len() - 1 {
            let (u, v, w) = (pts[i - 1].1, pts[i].1, pts[i + 1].1);
            let same = u.signum() == v.signum() && v.signum() == w.signum();
            if same && v.abs() < u.abs() && v.abs() < w.abs() {
                extra.push(0.5 * (pts[i - 1].0 + pts[i].0));
                extra.push(0.5 * (pts[i].0 + pts[i + 1].0));
            }
        }
        if extra.is_empty() {
            break;
        }
        pts.extend(extra.into_iter().map(|y| (y, series(k, alpha, coeffs, y))));
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        pts.dedup_by(|p, q| p.0 == q.0);
    }
    Ok(pts.windows(2).filter(|w| w[0].1 * w[1].1 < 0.0).count() as u64)
}

/// Per-trial counts with every coefficient multiplied by `scale`.
pub fn trial_counts(k: u32, segment: Segment, range: (f64, f64), trials: usize, seed: u64, scale: f64) -> Result<Vec<u64>> {
    let kf = k as f64;
    let (alpha, (a, b)) = model_line(segment, range);
    if !(a < b) {
        return Ok(vec![0; trials]);
    }
    let len = series_length(kf, a);
    let mut out = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let coeffs: Vec<f64> = (0..len).map(|_| scale * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
        out.push(count_sign_changes(kf, alpha, (a, b), &coeffs)?);
    }
    Ok(out)
}

/// Mean and standard error of the real-zero count over `trials` independent draws.
pub fn monte_carlo(k: u32, segment: Segment, range: (f64, f64), trials: usize, seed: u64) -> Result<McResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let counts = trial_counts(k, segment, range, trials, seed, 1.0)?;
    let n = trials as f64;
    let mean = counts.iter().sum::<u64>() as f64 / n;
    let var = if trials > 1 {
        counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let (_, (a, _)) = model_line(segment, range);
    Ok(McResult {
        trials,
        mean,
        stderr: (var / n).sqrt(),
        seed,
        truncation: series_length(k as f64, a),
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_runs_repeat() {
        let a = monte_carlo(100, Segment::Delta1, (1.5, 3.0), 1, 7).unwrap();
        let b = monte_carlo(100, Segment::Delta1, (1.5, 3.0), 1, 7).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.stderr, 0.0);
    }

    #[test]
    fn trial_streams_are_independent_of_batch_size() {
        let a = trial_counts(120, Segment::Delta2, (1.0, 3.0), 5, 3, 1.0).unwrap();
        let b = trial_counts(120, Segment::Delta2, (1.0, 3.0), 9, 3, 1.0).unwrap();
        assert_eq!(a[..], b[..5]);
    }

    #[test]
    fn counts_ignore_coefficient_scale() {
        let a = trial_counts(150, Segment::Delta1, (1.0, 4.0), 50, 11, 1.0).unwrap();
        let b = trial_counts(150, Segment::Delta1, (1.0, 4.0), 50, 11, 7.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn known_series_sign_changes() {
        // two terms: c1 q + c2 q^2 changes sign exactly once where the terms balance
        let k = 12.0;
        let coeffs = [1.0, -1.0];
        let y0 = (2f64.powf((k - 1.0) / 2.0)).ln() / (2.0 * PI);
        assert_eq!(count_sign_changes(k, 0.0, (0.5 * y0, 2.0 * y0), &coeffs).unwrap(), 1);
        assert_eq!(count_sign_changes(k, 0.0, (1.5 * y0, 3.0 * y0), &coeffs).unwrap(), 0);
    }
}
