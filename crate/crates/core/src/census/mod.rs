//! Real zeros on the three boundary segments and zero counts above horizontal lines.

mod report;
mod scan;
mod segment;
mod winding;

use std::f64::consts::PI;

pub use report::{
    census_report, forced_orders, siegel_census, write_summary_csv, write_zeros_csv, CensusConfig, CensusReport, SiegelEntry,
    WitnessRow, SUMMARY_HEADER,
};
pub use scan::{
    refine_zero, restrict_real, scan_segment, scan_segment_detailed, CertifiedReal, ScanOutcome, ScanPolicy,
    SignChangeBracket, ZeroRecord,
};
pub use segment::Segment;
pub use winding::{winding_count, winding_trace, WindingPolicy, WindingTrace};

/// Height `(ln 4 / 4 pi) k` above which a weight-`k` eigenform has no zeros besides the cusp.
pub fn zero_free_height(k: u32) -> f64 {
    k as f64 * 4f64.ln() / (4.0 * PI)
}
