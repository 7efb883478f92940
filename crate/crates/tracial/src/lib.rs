//! File formats, experiment configuration and the command-line runner around
//! [`tracial_core`].
//!
//! Exit codes: 0 pass, 1 refuted at the horizon, 2 input error, 3 numeric failure.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod scenario;

pub use error::{ExitStatus, RunError, RunResult};
