//! Run configuration, the single-run driver, sweeps and reproducible checks.

pub mod checks;
pub mod config;
pub mod run;
pub mod sweep;

pub use config::RunConfig;
pub use run::{run_dir, run_single, simulate, RunOutcome, SweepRow};
pub use sweep::{default_workers, run_corrector, run_sweep, CorrectorRow, CorrectorTable, SweepTable};
