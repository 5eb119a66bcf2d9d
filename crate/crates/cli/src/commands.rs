use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use cuspzero_core::census::{
    census_report, write_summary_csv, write_zeros_csv, zero_free_height, CensusConfig, CensusReport, Segment,
};
use cuspzero_core::evaluator::{ladder_max, theorem2_residual, y_ladder, WindowConfig};
use cuspzero_core::model::{expected_count, model_line, monte_carlo, DensityMethod, DensityProfile};
use cuspzero_core::modforms::{dim_cusp_forms, load_or_build, CacheStatus};
use cuspzero_core::signs::{build_parity_pairs, delta2_witnesses, first_negative, witness_rows, DEFAULT_EPS0};
use cuspzero_core::{Eigenform, Error, Result};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::Outcome;

const PROFILE_POINTS: usize = 200;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn outcome(partial: bool) -> Outcome {
    if partial {
        Outcome::Partial
    } else {
        Outcome::Ok
    }
}

fn forms(cfg: &RunConfig, k: u32) -> Result<Vec<Eigenform>> {
    let (forms, status) = load_or_build(&cfg.cache_dir, k, cfg.precision_bits, cfg.terms, cfg.force)?;
    log::info!("weight {k}: {} forms ({status:?})", forms.len());
    Ok(forms)
}

pub fn eigenform(cfg: &RunConfig) -> Result<Outcome> {
    let weights: Vec<u32> = cfg.weights.iter().copied().filter(|&k| dim_cusp_forms(k) > 0).collect();
    let results: Vec<(u32, Result<(usize, CacheStatus)>)> = weights
        .par_iter()
        .map(|&k| {
            let r = load_or_build(&cfg.cache_dir, k, cfg.precision_bits, cfg.terms, cfg.force).map(|(f, s)| (f.len(), s));
            (k, r)
        })
        .collect();
    let mut partial = false;
    for (k, r) in results {
        match r {
            Ok((n, s)) => println!("k={k} forms={n} {}", format!("{s:?}").to_lowercase()),
            Err(e) => {
                eprintln!("k={k}: {e}");
                partial = true;
            }
        }
    }
    Ok(outcome(partial))
}

fn ladder_csv(path: &Path, f: &Eigenform, delta: f64) -> Result<()> {
    let k = f.weight() as f64;
    let wc = WindowConfig { delta, ..WindowConfig::default() };
    let mut out = csv::Writer::from_writer(create(path)?);
    out.write_record(["l", "alpha", "y", "lambda", "residual"])?;
    for l in 1..=ladder_max(k, &wc) {
        for alpha in [0.0, 0.5] {
            let res = match theorem2_residual(f, l, alpha, &wc) {
                Ok(r) => format!("{r:.6e}"),
                Err(e) => {
                    log::warn!("{f}: residual at l={l}: {e}");
                    "n/a".into()
                }
            };
            out.write_record([
                l.to_string(),
                alpha.to_string(),
                format!("{:.12e}", y_ladder(k, l)),
                format!("{:.12e}", f.lambda_f64(l as usize)),
                res,
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

fn witnesses(f: &Eigenform) -> Vec<cuspzero_core::census::WitnessRow> {
    let n = f.nterms() as u64;
    let first = first_negative(f, DEFAULT_EPS0).map_err(|e| log::info!("{f}: {e}")).ok();
    let parity = build_parity_pairs(f, (n / 2) as f64, None)
        .map(|r| r.pairs)
        .map_err(|e| log::info!("{f}: parity pairs: {e}"))
        .unwrap_or_default();
    let delta2 = delta2_witnesses(f, n).map_err(|e| log::info!("{f}: delta2 witnesses: {e}")).unwrap_or_default();
    witness_rows(f.weight(), &parity, &delta2, first)
}

fn census_weight(cfg: &RunConfig, k: u32) -> Result<Vec<CensusReport>> {
    let mut ccfg = CensusConfig {
        segments: cfg.segments.clone(),
        y_list: cfg.heights.iter().map(|h| h.at(k)).collect(),
        quad_tol: cfg.quad_tol,
        ..CensusConfig::default()
    };
    ccfg.scan.rel_tol = cfg.rel_tol;
    ccfg.winding.rel_tol = cfg.rel_tol;
    let dir = cfg.out.join("census");
    let mut reports = Vec::new();
    for f in forms(cfg, k)? {
        let report = census_report(&f, &ccfg);
        for n in &report.notes {
            log::warn!("{f}: {n}");
        }
        let stem = format!("k{k:05}_i{:03}", f.dim_index());
        let mut w = create(&dir.join(format!("{stem}_zeros.csv")))?;
        write_zeros_csv(&mut w, &report, &witnesses(&f))?;
        ladder_csv(&dir.join(format!("{stem}_ladder.csv")), &f, cfg.delta)?;
        reports.push(report);
    }
    Ok(reports)
}

/// Row for a weight without cusp forms: no zeros anywhere.
fn empty_report(k: u32, segments: &[Segment]) -> CensusReport {
    let mut counts = [None; 3];
    for s in segments {
        counts[s.index()] = Some(0);
    }
    CensusReport { weight: k, dim_index: 0, zeros: Vec::new(), counts, siegel: Vec::new(), predictions: None, notes: Vec::new() }
}

pub fn census(cfg: &RunConfig) -> Result<Outcome> {
    let results: Vec<(u32, Result<Vec<CensusReport>>)> = cfg
        .weights
        .par_iter()
        .map(|&k| {
            if dim_cusp_forms(k) == 0 {
                return (k, Ok(Vec::new()));
            }
            (k, census_weight(cfg, k))
        })
        .collect();
    let mut partial = false;
    let mut all = Vec::new();
    for (k, r) in results {
        match r {
            Ok(v) if v.is_empty() && k == 12 => all.push(empty_report(k, &cfg.segments)),
            Ok(v) => {
                partial |= v.iter().any(|r| r.is_partial());
                all.extend(v);
            }
            Err(e) => {
                eprintln!("k={k}: {e}");
                partial = true;
            }
        }
    }
    write_summary_csv(create(&cfg.out.join("census_summary.csv"))?, &all, true)?;
    println!("{} reports written to {}", all.len(), cfg.out.display());
    Ok(outcome(partial))
}

/// Full parameter range of a segment as scanned by the census.
fn segment_range(s: Segment, k: u32) -> (f64, f64) {
    match s {
        Segment::Delta3 => s.range(),
        _ => (s.range().0, zero_free_height(k)),
    }
}

const MODEL_HEADER: [&str; 8] = ["k", "segment", "y_lo", "y_hi", "expected", "mc_mean", "mc_stderr", "trials"];

fn model_weight(cfg: &RunConfig, k: u32) -> Result<Vec<[String; 8]>> {
    let dir = cfg.out.join("model");
    let mut rows = Vec::new();
    for &s in &cfg.segments {
        let range = segment_range(s, k);
        let (alpha, line) = model_line(s, range);
        let profile = DensityProfile::sample(k, alpha, line, PROFILE_POINTS, DensityMethod::ExactEk)?;
        profile.write_csv(create(&dir.join(format!("k{k:05}_{s}_density.csv")))?)?;
        let mut ranges = vec![range];
        if s != Segment::Delta3 {
            ranges.extend(cfg.heights.iter().map(|h| (h.at(k), range.1)).filter(|r| r.0 > range.0 && r.0 < r.1));
        }
        for (i, r) in ranges.into_iter().enumerate() {
            let expected = expected_count(k, s, r, cfg.quad_tol)?;
            let (mean, stderr) = if cfg.trials > 0 {
                let mc = monte_carlo(k, s, r, cfg.trials, cfg.seed)?;
                let name = if i == 0 { format!("k{k:05}_{s}_mc.csv") } else { format!("k{k:05}_{s}_Y{i}_mc.csv") };
                mc.write_csv(create(&dir.join(name))?)?;
                (format!("{:.6}", mc.mean), format!("{:.6}", mc.stderr))
            } else {
                (String::new(), String::new())
            };
            rows.push([
                k.to_string(),
                s.to_string(),
                format!("{:.6}", r.0),
                format!("{:.6}", r.1),
                format!("{expected:.6}"),
                mean,
                stderr,
                cfg.trials.to_string(),
            ]);
        }
    }
    Ok(rows)
}

pub fn model(cfg: &RunConfig) -> Result<Outcome> {
    let results: Vec<(u32, Result<Vec<[String; 8]>>)> =
        cfg.weights.par_iter().map(|&k| (k, model_weight(cfg, k))).collect();
    let mut out = csv::Writer::from_writer(create(&cfg.out.join("model_summary.csv"))?);
    out.write_record(MODEL_HEADER)?;
    let mut partial = false;
    for (k, r) in results {
        match r {
            Ok(rows) => {
                for row in rows {
                    out.write_record(&row)?;
                }
            }
            Err(e) => {
                eprintln!("k={k}: {e}");
                partial = true;
            }
        }
    }
    out.flush()?;
    Ok(outcome(partial))
}

/// Conjectured total number of real zeros.
pub fn real_count_prediction(k: u32) -> f64 {
    let k = k as f64;
    k.sqrt() / (2.0 * std::f64::consts::PI) * k.ln()
}

fn ratio(num: Option<f64>, den: Option<f64>) -> String {
    match (num, den) {
        (Some(n), Some(d)) if d > 0.0 => format!("{:.6}", n / d),
        _ => "n/a".into(),
    }
}

const COMPARE_HEADER: [&str; 15] = [
    "k",
    "idx",
    "Y",
    "n_delta1",
    "n_delta2",
    "n_delta3",
    "n_real",
    "ratio_delta1",
    "ratio_delta2",
    "ratio_delta3",
    "pred_real",
    "ratio_real",
    "ratio_real_FY",
    "prediction_source",
    "status",
];

pub fn compare(cfg: &RunConfig) -> Result<Outcome> {
    let census_path = cfg.out.join("census_summary.csv");
    let mut census = csv::Reader::from_path(&census_path)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", census_path.display())))?;
    let model_path = cfg.out.join("model_summary.csv");
    // expected counts over full segments, keyed by (k, segment)
    let mut model: BTreeMap<(u32, String), f64> = BTreeMap::new();
    match csv::Reader::from_path(&model_path) {
        Ok(mut rdr) => {
            let mut full: BTreeMap<(u32, String), (f64, f64)> = BTreeMap::new();
            for rec in rdr.records() {
                let rec = rec?;
                let (Ok(k), Ok(lo), Ok(e)) = (rec[0].parse::<u32>(), rec[2].parse::<f64>(), rec[4].parse::<f64>()) else {
                    continue;
                };
                let key = (k, rec[1].to_string());
                if full.get(&key).map_or(true, |&(l, _)| lo < l) {
                    full.insert(key, (lo, e));
                }
            }
            model = full.into_iter().map(|(key, (_, e))| (key, e)).collect();
        }
        Err(e) => log::warn!("{}: {e}; using census predictions", model_path.display()),
    }

    let headers = census.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = ["k", "idx", "n_delta1", "n_delta2", "n_delta3", "Y", "ratio_real", "pred_delta1", "pred_delta2", "pred_delta3", "status"];
    let mut idx = BTreeMap::new();
    for n in need {
        idx.insert(n, col(n).ok_or_else(|| Error::InvalidArgument(format!("census summary lacks column {n}")))?);
    }
    let mut out = csv::Writer::from_writer(create(&cfg.out.join("compare.csv"))?);
    out.write_record(COMPARE_HEADER)?;
    let mut missing = 0usize;
    for rec in census.records() {
        let rec = rec?;
        let get = |n: &str| rec[idx[n]].to_string();
        let num = |n: &str| rec[idx[n]].parse::<f64>().ok();
        let Ok(k) = get("k").parse::<u32>() else { continue };
        let mut source = "model";
        let mut ratios = Vec::new();
        for (j, s) in Segment::ALL.iter().enumerate() {
            let measured = num(&format!("n_delta{}", j + 1));
            let pred = match model.get(&(k, s.to_string())) {
                Some(&p) => Some(p),
                None => {
                    source = "census";
                    num(&format!("pred_delta{}", j + 1))
                }
            };
            if pred.is_none() {
                source = "missing";
            }
            ratios.push(ratio(measured, pred));
        }
        if source == "missing" {
            missing += 1;
        }
        let counts: Vec<Option<f64>> = (1..=3).map(|j| num(&format!("n_delta{j}"))).collect();
        let n_real = if counts.iter().all(Option::is_some) { Some(counts.iter().flatten().sum::<f64>()) } else { None };
        let pred_real = real_count_prediction(k);
        out.write_record([
            get("k"),
            get("idx"),
            get("Y"),
            get("n_delta1"),
            get("n_delta2"),
            get("n_delta3"),
            n_real.map(|n| format!("{n}")).unwrap_or_default(),
            ratios[0].clone(),
            ratios[1].clone(),
            ratios[2].clone(),
            format!("{pred_real:.6}"),
            ratio(n_real, Some(pred_real)),
            get("ratio_real"),
            source.to_string(),
            get("status"),
        ])?;
    }
    out.flush()?;
    if missing > 0 {
        eprintln!("{missing} rows without a prediction to join");
    }
    Ok(Outcome::Ok)
}
