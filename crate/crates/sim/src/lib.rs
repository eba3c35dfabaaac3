//! Trace files, result files, simulation runs and parameter sweeps on top of
//! `ogb-core`.

pub mod analyze;
pub mod format;
pub mod seed;
pub mod simulate;
pub mod sweep;
pub mod traceio;

pub use simulate::{simulate, Capacity, RunSummary, SimOutput, SimSpec};
pub use sweep::{run_sweep, CellOutcome, Grid};
pub use traceio::{parse_trace, read_trace_file, write_trace};
