//! Desk-scale experiment drivers.
//!
//! - [`synthetic`]: Gaussian low-rank generator and a time-series surrogate
//!   with one planted high-importance block.
//! - [`storage`]: partitioned-storage access simulator and the sampling
//!   operation count formulas.
//! - [`pipeline`]: coverage curve, leverage timeline, error-vs-g and
//!   held-out-row imputation sweeps.

pub mod pipeline;
pub mod storage;
pub mod synthetic;

use std::io::Write;

pub use pipeline::{
    coverage_curve, error_vs_g_sweep, imputation_sweep, leverage_timeline, score_table, ImputationCell, ImputationConfig, ImputationRow,
    ImputationTable, ScoreRow, ScoreTable, SweepCell, SweepConfig, SweepRow, SweepTable, Timeline, TimelineEntry,
};
pub use storage::{
    compare_access, ops_count_formulas, simulate_block_access, simulate_column_access, AccessMode, AccessReport,
    DominanceCheck, OpsCount, Placement, StorageLayout,
};
pub use synthetic::{planted_block_surrogate, synthetic_low_rank, Surrogate, SurrogateSpec};

use crate::{Error, Result};

/// Writes a header line and rows through the `csv` crate.
pub(crate) fn write_table<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for row in rows {
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub(crate) fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}
