use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use cuspzero_core::census::Segment;
use cuspzero_core::modforms::DEFAULT_PRECISION_BITS;

#[derive(Parser, Debug)]
#[command(name = "cuspzero", version, about = "Eigenform zero censuses and random-model comparisons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute eigenforms and store them in the cache
    Eigenform(RunArgs),
    /// Real-zero census per eigenform, with a sweep summary
    Census(RunArgs),
    /// Random-model density profiles, expected counts and Monte Carlo runs
    Model(RunArgs),
    /// Join census and model summaries into a comparison table
    Compare(RunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// weights: `24`, `12,16,20`, `100..300` (inclusive) or a mix
    #[arg(long, default_value = "12")]
    pub weights: String,
    /// stride for ranges in --weights
    #[arg(long, default_value_t = 2)]
    pub step: u32,
    #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision_bits: u32,
    /// number of stored eigenvalues (default depends on the weight)
    #[arg(long)]
    pub terms: Option<usize>,
    /// window exponent of the ladder approximation
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    #[arg(long, default_value = "delta1,delta2,delta3")]
    pub segments: String,
    /// Siegel heights, each a number or `<c>sqrtk` for `c * sqrt(k)`
    #[arg(long = "Y", value_delimiter = ',')]
    pub y: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "cache")]
    pub cache_dir: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// rebuild caches and overwrite outputs
    #[arg(long)]
    pub force: bool,
    /// weights processed in parallel (default: all cores)
    #[arg(long)]
    pub jobs: Option<usize>,
    /// relative tolerance of series truncation
    #[arg(long, default_value_t = 1e-15)]
    pub rel_tol: f64,
    /// relative tolerance of the expected-count quadrature
    #[arg(long, default_value_t = 1e-6)]
    pub quad_tol: f64,
}

/// A Siegel height given literally or as a multiple of `sqrt(k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Height {
    Fixed(f64),
    SqrtK(f64),
}

impl Height {
    pub fn at(self, k: u32) -> f64 {
        match self {
            Height::Fixed(y) => y,
            Height::SqrtK(c) => c * (k as f64).sqrt(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub weights: Vec<u32>,
    pub precision_bits: u32,
    pub terms: Option<usize>,
    pub delta: f64,
    pub segments: Vec<Segment>,
    pub heights: Vec<Height>,
    pub trials: usize,
    pub seed: u64,
    pub cache_dir: PathBuf,
    pub out: PathBuf,
    pub force: bool,
    pub jobs: Option<usize>,
    pub rel_tol: f64,
    pub quad_tol: f64,
}

fn parse_weight(s: &str) -> Result<u32, String> {
    s.trim().parse().map_err(|_| format!("bad weight `{s}`"))
}

pub fn parse_weights(spec: &str, step: u32) -> Result<Vec<u32>, String> {
    if step == 0 {
        return Err("--step must be positive".into());
    }
    let mut out = Vec::new();
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (parse_weight(a)?, parse_weight(b)?);
            if a > b {
                return Err(format!("empty range `{part}`"));
            }
            out.extend((a..=b).step_by(step as usize));
        } else {
            out.push(parse_weight(part)?);
        }
    }
    if out.is_empty() {
        return Err("no weights given".into());
    }
    if let Some(k) = out.iter().find(|&&k| k < 12 || k % 2 != 0) {
        return Err(format!("weight {k} must be even and at least 12"));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn parse_height(s: &str) -> Result<Height, String> {
    let s = s.trim();
    let h = match s.strip_suffix("sqrtk") {
        Some(c) => {
            let c = c.trim_end_matches('*');
            Height::SqrtK(if c.is_empty() { 1.0 } else { c.parse().map_err(|_| format!("bad height `{s}`"))? })
        }
        None => Height::Fixed(s.parse().map_err(|_| format!("bad height `{s}`"))?),
    };
    let v = match h {
        Height::Fixed(v) | Height::SqrtK(v) => v,
    };
    if !(v.is_finite() && v > 0.0) {
        return Err(format!("height `{s}` must be positive"));
    }
    Ok(h)
}

impl RunConfig {
    pub fn from_args(a: &RunArgs) -> Result<Self, String> {
        let weights = parse_weights(&a.weights, a.step)?;
        if a.precision_bits < 64 {
            return Err(format!("--precision-bits {} is below 64", a.precision_bits));
        }
        if a.terms == Some(0) {
            return Err("--terms must be positive".into());
        }
        if !(a.delta > 0.0 && a.delta < 2.0 / 3.0) {
            return Err(format!("--delta {} outside (0, 2/3)", a.delta));
        }
        let mut segments = Vec::new();
        for s in a.segments.split(',').filter(|s| !s.trim().is_empty()) {
            let seg: Segment = s.trim().parse().map_err(|e| format!("{e}"))?;
            if !segments.contains(&seg) {
                segments.push(seg);
            }
        }
        if segments.is_empty() {
            return Err("no segments given".into());
        }
        segments.sort();
        let heights = a.y.iter().map(|s| parse_height(s)).collect::<Result<Vec<_>, _>>()?;
        if a.jobs == Some(0) {
            return Err("--jobs must be positive".into());
        }
        for (name, v) in [("--rel-tol", a.rel_tol), ("--quad-tol", a.quad_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(format!("{name} {v} outside (0, 1)"));
            }
        }
        Ok(RunConfig {
            weights,
            precision_bits: a.precision_bits,
            terms: a.terms,
            delta: a.delta,
            segments,
            heights,
            trials: a.trials,
            seed: a.seed,
            cache_dir: a.cache_dir.clone(),
            out: a.out.clone(),
            force: a.force,
            jobs: a.jobs,
            rel_tol: a.rel_tol,
            quad_tol: a.quad_tol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_lists_and_ranges() {
        assert_eq!(parse_weights("12", 2).unwrap(), vec![12]);
        assert_eq!(parse_weights("16,12..18", 2).unwrap(), vec![12, 14, 16, 18]);
        assert_eq!(parse_weights("100..110", 4).unwrap(), vec![100, 104, 108]);
        assert!(parse_weights("13", 2).is_err());
        assert!(parse_weights("10..14", 2).is_err());
        assert!(parse_weights("20..12", 2).is_err());
        assert!(parse_weights("", 2).is_err());
    }

    #[test]
    fn heights() {
        assert_eq!(parse_height("2.5").unwrap(), Height::Fixed(2.5));
        assert_eq!(parse_height("3sqrtk").unwrap().at(400), 60.0);
        assert_eq!(parse_height("sqrtk").unwrap(), Height::SqrtK(1.0));
        assert!(parse_height("-1").is_err());
        assert!(parse_height("xsqrtk").is_err());
    }
}
