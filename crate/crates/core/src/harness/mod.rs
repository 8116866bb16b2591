//! Experiments: OPT, baseline policies, replications, regret traces and growth fits.

mod growth;
mod opt;
mod run;
mod trace;

use std::io::{self, Write};

use thiserror::Error;

pub use growth::{
    polylog_consistent, regret_growth_diagnostic, GrowthPoint, GrowthReport, LINEAR_EXPONENT,
    MIN_HORIZONS, MIN_SEEDS, POLYLOG_EXPONENT,
};
pub use opt::{compute_opt, OptResult, DEFAULT_OPT_BUDGET};
pub use run::{run_replications_sequential, Experiment, Policy, ReplicationSummary, StartRule};
pub use trace::{
    format_float, CsvTrace, OwnedTraceRow, RegretAccumulator, TraceRow, TraceSink,
    ACCOUNTING_TOLERANCE, TRACE_HEADER,
};

use crate::env::EnvError;
use crate::offline::OfflineError;
use crate::params::ParamError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Offline(#[from] OfflineError),
    #[error("insufficient data for a growth fit: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub const SUMMARY_HEADER: &str = "seed,policy,T,final_regret_expected,phases_L,terminated_by";

/// Writes summary rows in the given order, header first.
pub fn write_summary<W: Write, S>(mut out: W, rows: &[ReplicationSummary<S>]) -> io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.seed,
            r.policy,
            r.horizon,
            format_float(r.final_regret_expected),
            r.phases,
            r.terminated_by.as_str()
        )?;
    }
    out.flush()
}
