//! Error analysis, sweeps and file output around the solvers.

pub mod balance;
pub mod config;
pub mod emit;
pub mod metrics;
pub mod sweep;
pub mod table1;

pub use balance::global_balance_residual;
pub use config::{run_benchmark, run_selfsimilar, RunConfig, RunReport, SelfSimilarConfig, SelfSimilarReport};
pub use metrics::{error_metrics, fd_error, fd_from_states, fd_postprocess_wt, ErrorReport, FdScheme, FdSeries};
pub use sweep::{sweep, SweepAxis, SweepConfig, SweepKind, SweepRow};
pub use table1::{table1, table1_config, Table1Row, TABLE1};
