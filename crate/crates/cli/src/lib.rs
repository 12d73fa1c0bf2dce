//! Experiment runner for the hpgate verification suites.
//!
//! ```text
//! hpgate verify-gates       [--config F] [--gates S,T] [--tolerance 1e-9] [--out report.json]
//! hpgate verify-protection  ...
//! hpgate simulate-qrm       [--trials 30] [--seed 7] ...
//! hpgate noise-sweep        ...                (also writes report.csv beside --out)
//! hpgate defaults                              (prints the default config as TOML)
//! ```
//!
//! Exit status: 0 all checks pass, 1 a check exceeds its tolerance, 2 bad
//! configuration, 3 numerical failure. `HPGATE_THREADS` sets the worker
//! count; results do not depend on it.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::run;
pub use config::{ConfigError, ExperimentConfig};
pub use report::{Experiment, Outcome, VerificationReport};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "HPGATE_THREADS";
