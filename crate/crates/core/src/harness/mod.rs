//! Experiment orchestration behind the CLI: JSON configs, contraction-rate
//! studies, theory-verification reports, and reproducible output artifacts.
//!
//! Every artifact written by the harness is a pure function of
//! `(config, seed)`: no timestamps, no environment lookups, fixed float
//! formatting, and the effective config (seed included) embedded in each
//! JSON output so a run can be reproduced from its own artifacts.

pub mod cli;
pub mod config;
pub mod io;
pub mod rate;
pub mod theory;

pub use cli::run_cli;
