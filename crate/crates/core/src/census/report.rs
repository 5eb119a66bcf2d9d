use std::io::Write;

use super::scan::{refine_zero, scan_segment_detailed, ScanPolicy, ZeroRecord};
use super::segment::Segment;
use super::winding::{winding_count, WindingPolicy};
use super::zero_free_height;
use crate::error::Result;
use crate::model::expected_count;
use crate::modforms::Eigenform;

/// Zero count above `y`, its real part on the two lines and their ratio (cusp excluded).
#[derive(Clone, Debug, PartialEq)]
pub struct SiegelEntry {
    pub y: f64,
    pub total: u64,
    pub real_delta1: u64,
    pub real_delta2: u64,
    /// `None` when only the cusp zero lies above `y`
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CensusConfig {
    pub segments: Vec<Segment>,
    /// upper end of the line scans; `None` means the zero-free height
    pub y_max: Option<f64>,
    pub y_list: Vec<f64>,
    pub scan: ScanPolicy,
    pub winding: WindingPolicy,
    pub zero_tol: f64,
    pub corner_tol: f64,
    pub predictions: bool,
    pub quad_tol: f64,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig {
            segments: Segment::ALL.to_vec(),
            y_max: None,
            y_list: Vec::new(),
            scan: ScanPolicy::default(),
            winding: WindingPolicy::default(),
            zero_tol: 1e-12,
            corner_tol: 1e-9,
            predictions: true,
            quad_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CensusReport {
    pub weight: u32,
    pub dim_index: usize,
    pub zeros: Vec<ZeroRecord>,
    /// real zeros per segment, `None` for segments not scanned
    pub counts: [Option<u64>; 3],
    pub siegel: Vec<SiegelEntry>,
    /// random-model expected counts over the scanned ranges
    pub predictions: Option<[f64; 3]>,
    /// per-item annotations: skipped points, jitter, failures
    pub notes: Vec<String>,
}

impl CensusReport {
    pub fn count(&self, s: Segment) -> Option<u64> {
        self.counts[s.index()]
    }

    /// `measured / predicted` per segment.
    pub fn prediction_ratios(&self) -> [Option<f64>; 3] {
        let mut out = [None; 3];
        if let Some(p) = self.predictions {
            for s in Segment::ALL {
                if let Some(c) = self.count(s) {
                    if p[s.index()] > 0.0 {
                        out[s.index()] = Some(c as f64 / p[s.index()]);
                    }
                }
            }
        }
        out
    }

    pub fn is_partial(&self) -> bool {
        !self.notes.is_empty()
    }
}

/// Parameter range scanned on a segment.
fn scan_range(segment: Segment, y_max: f64) -> (f64, f64) {
    match segment {
        Segment::Delta1 | Segment::Delta2 => (segment.range().0, y_max),
        Segment::Delta3 => segment.range(),
    }
}

fn real_count(f: &Eigenform, s: Segment, y: f64, top: f64, policy: &ScanPolicy, notes: &mut Vec<String>) -> Result<u64> {
    let out = scan_segment_detailed(f, s, (y, top), policy)?;
    for p in &out.undetermined {
        notes.push(format!("{s}: undetermined sign at {p}"));
    }
    Ok(out.brackets.len() as u64)
}

/// Zero counts above each height, split into the total (cusp included) and the real zeros on the lines.
pub fn siegel_census(f: &Eigenform, y_list: &[f64], config: &CensusConfig) -> Result<Vec<SiegelEntry>> {
    let mut notes = Vec::new();
    let out = siegel_inner(f, y_list, config, &mut notes)?;
    for n in notes {
        log::warn!("k={} idx={}: {n}", f.weight(), f.dim_index());
    }
    Ok(out)
}

fn siegel_inner(f: &Eigenform, y_list: &[f64], config: &CensusConfig, notes: &mut Vec<String>) -> Result<Vec<SiegelEntry>> {
    let top = zero_free_height(f.weight());
    let mut out = Vec::with_capacity(y_list.len());
    for &y in y_list {
        let total = winding_count(f, y, &config.winding)?;
        let (d1, d2) = if y < top {
            (
                real_count(f, Segment::Delta1, y, top, &config.scan, notes)?,
                real_count(f, Segment::Delta2, y, top, &config.scan, notes)?,
            )
        } else {
            (0, 0)
        };
        let ratio = (total > 1).then(|| (d1 + d2) as f64 / (total - 1) as f64);
        log::info!("k={} idx={} Y={y:.3}: total {total}, real {d1}+{d2}", f.weight(), f.dim_index());
        out.push(SiegelEntry { y, total, real_delta1: d1, real_delta2: d2, ratio });
    }
    Ok(out)
}

const CORNER_I: (Segment, f64) = (Segment::Delta1, 1.0);

fn corner_of(z: &ZeroRecord, tol: f64) -> Option<(Segment, f64)> {
    let (t_lo, t_hi) = Segment::Delta3.range();
    let rho_y = Segment::Delta2.range().0;
    match z.segment {
        Segment::Delta1 if (z.location - 1.0).abs() <= tol => Some(CORNER_I),
        Segment::Delta2 if (z.location - rho_y).abs() <= tol => Some((Segment::Delta2, rho_y)),
        Segment::Delta3 if (z.location - t_lo).abs() <= tol => Some(CORNER_I),
        Segment::Delta3 if (z.location - t_hi).abs() <= tol => Some((Segment::Delta2, rho_y)),
        _ => None,
    }
}

/// Attributes zeros at `i` and `rho` to the first segment containing them, dropping duplicates.
fn attribute_corners(zeros: Vec<ZeroRecord>, tol: f64) -> Vec<ZeroRecord> {
    let mut out: Vec<ZeroRecord> = Vec::with_capacity(zeros.len());
    for mut z in zeros {
        if let Some((seg, loc)) = corner_of(&z, tol) {
            if out.iter().any(|w| w.corner && w.segment == seg) {
                continue;
            }
            z.segment = seg;
            z.location = loc;
            z.corner = true;
        }
        out.push(z);
    }
    out.sort_by(|a, b| a.segment.cmp(&b.segment).then(a.location.total_cmp(&b.location)));
    out
}

/// Orders of vanishing at `i` and `rho` that every form of weight `k` has.
pub fn forced_orders(k: u32) -> (u32, u32) {
    let at_i = if k % 4 == 2 { 1 } else { 0 };
    let at_rho = match k % 6 {
        4 => 1,
        2 => 2,
        _ => 0,
    };
    (at_i, at_rho)
}

/// Adds the zeros forced at `i` and `rho` when a segment through the corner was scanned,
/// marking an already detected corner zero instead of duplicating it.
fn add_forced(mut zeros: Vec<ZeroRecord>, k: u32, segments: &[Segment]) -> Vec<ZeroRecord> {
    let (at_i, at_rho) = forced_orders(k);
    let rho_y = Segment::Delta2.range().0;
    for (order, seg, loc) in [(at_i, Segment::Delta1, 1.0), (at_rho, Segment::Delta2, rho_y)] {
        if order == 0 || !(segments.contains(&seg) || segments.contains(&Segment::Delta3)) {
            continue;
        }
        if let Some(z) = zeros.iter_mut().find(|z| z.corner && z.segment == seg) {
            z.forced = true;
            continue;
        }
        zeros.push(ZeroRecord {
            segment: seg,
            location: loc,
            lo: loc,
            hi: loc,
            width: 0.0,
            simple_certified: order == 1,
            corner: true,
            forced: true,
        });
    }
    zeros.sort_by(|a, b| a.segment.cmp(&b.segment).then(a.location.total_cmp(&b.location)));
    zeros
}

/// Real zeros on the configured segments, Siegel-set counts and random-model predictions.
///
/// Failures of individual items are recorded in `notes` and leave the corresponding field empty.
pub fn census_report(f: &Eigenform, config: &CensusConfig) -> CensusReport {
    let k = f.weight();
    let y_max = config.y_max.unwrap_or_else(|| zero_free_height(k));
    let mut notes = Vec::new();
    let mut zeros = Vec::new();
    let mut scanned = [false; 3];
    for &s in &config.segments {
        let range = scan_range(s, y_max);
        match scan_segment_detailed(f, s, range, &config.scan) {
            Ok(out) => {
                scanned[s.index()] = true;
                for p in &out.undetermined {
                    notes.push(format!("{s}: undetermined sign at {p}"));
                }
                for p in &out.jittered {
                    log::info!("{s}: grid point {p} jittered");
                }
                for (a, b) in &out.uncertified_cells {
                    notes.push(format!("{s}: cell [{a}, {b}] not certified zero-free"));
                }
                for br in &out.brackets {
                    match refine_zero(f, br, config.zero_tol) {
                        Ok(z) => zeros.push(z),
                        Err(e) => {
                            notes.push(format!("{s}: refinement of [{}, {}] failed: {e}", br.lo, br.hi));
                            zeros.push(ZeroRecord {
                                segment: s,
                                location: 0.5 * (br.lo + br.hi),
                                lo: br.lo,
                                hi: br.hi,
                                width: br.hi - br.lo,
                                simple_certified: false,
                                corner: false,
                                forced: false,
                            });
                        }
                    }
                }
            }
            Err(e) => notes.push(format!("{s}: scan failed: {e}")),
        }
    }
    let zeros = add_forced(attribute_corners(zeros, config.corner_tol), k, &config.segments);
    let mut counts = [None; 3];
    for s in Segment::ALL {
        if scanned[s.index()] {
            counts[s.index()] = Some(zeros.iter().filter(|z| z.segment == s).count() as u64);
        }
    }

    let siegel = match siegel_inner(f, &config.y_list, config, &mut notes) {
        Ok(v) => v,
        Err(e) => {
            notes.push(format!("siegel census failed: {e}"));
            Vec::new()
        }
    };

    let predictions = if config.predictions {
        let mut p = [0.0; 3];
        let mut ok = true;
        for s in Segment::ALL {
            match expected_count(k, s, scan_range(s, y_max), config.quad_tol) {
                Ok(v) => p[s.index()] = v,
                Err(e) => {
                    notes.push(format!("{s}: prediction failed: {e}"));
                    ok = false;
                }
            }
        }
        ok.then_some(p)
    } else {
        None
    };

    CensusReport { weight: k, dim_index: f.dim_index(), zeros, counts, siegel, predictions, notes }
}

/// Extra row of the per-weight zero table, e.g. a sign-change witness.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessRow {
    pub kind: String,
    pub param_lo: f64,
    pub param_hi: f64,
    pub flags: String,
}

fn fmt_f(x: f64) -> String {
    format!("{x:.15e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "n/a".into())
}

/// Columns `segment,param_lo,param_hi,location,width,flags`.
pub fn write_zeros_csv<W: Write>(w: W, report: &CensusReport, witnesses: &[WitnessRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["segment", "param_lo", "param_hi", "location", "width", "flags"])?;
    for z in &report.zeros {
        let mut flags = vec![if z.simple_certified { "simple" } else { "bracketed" }];
        if z.corner {
            flags.push("corner");
        }
        if z.forced {
            flags.push("forced");
        }
        out.write_record([
            z.segment.name().to_string(),
            fmt_f(z.lo),
            fmt_f(z.hi),
            fmt_f(z.location),
            format!("{:.3e}", z.width),
            flags.join(";"),
        ])?;
    }
    for r in witnesses {
        out.write_record([r.kind.clone(), fmt_f(r.param_lo), fmt_f(r.param_hi), String::new(), String::new(), r.flags.clone()])?;
    }
    out.flush()?;
    Ok(())
}

pub const SUMMARY_HEADER: [&str; 12] = [
    "k",
    "idx",
    "n_delta1",
    "n_delta2",
    "n_delta3",
    "n_total_FY",
    "Y",
    "ratio_real",
    "pred_delta1",
    "pred_delta2",
    "pred_delta3",
    "status",
];

/// One summary row per Siegel height (or a single row without one); header included when `header`.
pub fn write_summary_csv<W: Write>(w: W, reports: &[CensusReport], header: bool) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    if header {
        out.write_record(SUMMARY_HEADER)?;
    }
    for r in reports {
        let count = |s: Segment| r.count(s).map(|c| c.to_string()).unwrap_or_default();
        let pred = |s: Segment| r.predictions.map(|p| format!("{:.6}", p[s.index()])).unwrap_or_default();
        let status = if r.is_partial() { "partial" } else { "ok" };
        let base = [r.weight.to_string(), r.dim_index.to_string(), count(Segment::Delta1), count(Segment::Delta2), count(Segment::Delta3)];
        let tail = [pred(Segment::Delta1), pred(Segment::Delta2), pred(Segment::Delta3), status.to_string()];
        if r.siegel.is_empty() {
            let row: Vec<String> = base.iter().cloned().chain([String::new(), String::new(), String::new()]).chain(tail.iter().cloned()).collect();
            out.write_record(&row)?;
        }
        for e in &r.siegel {
            let mid = [e.total.to_string(), format!("{:.6}", e.y), fmt_opt(e.ratio)];
            let row: Vec<String> = base.iter().cloned().chain(mid).chain(tail.iter().cloned()).collect();
            out.write_record(&row)?;
        }
    }
    out.flush()?;
    Ok(())
}
