//! Experiment harness: sweeps over run configurations, mechanism
//! comparisons, summary statistics, CSV output, config files, presets and
//! verification suites.

pub mod config;
pub mod presets;
pub mod stats;
pub mod sweep;
pub mod verify;

pub use presets::{preset, Preset, PRESETS};
pub use stats::{rank_sum_less, summarize, RankSumTest, Summary};
pub use sweep::{
    derive_mu, read_raw_csv, run_grid, run_mechanism_comparison, run_sweep, summarize_rows, worker_count,
    write_raw_csv, write_summary_csv, ComparisonSpec, MuRule, RawRow, SummaryRow, SweepAxis, SweepOutput,
    SweepSpec, DEFAULT_REPLICATIONS, DEFAULT_SWEEP_BUDGET, WORKERS_ENV,
};
pub use verify::{verify, VerifyOptions, VerifyReport, SUITES};
