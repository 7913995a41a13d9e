//! Batch front end for the mass and inequality checks of `massgeom-core`.

pub mod config;
pub mod describe;
pub mod error;
pub mod profile;
pub mod registry;
pub mod report;
pub mod suites;

pub use config::{Format, SuiteConfig, SuiteId};
pub use error::{CliError, CliResult};
pub use registry::Registry;
pub use report::{CheckResult, Comparison, VerificationReport};
pub use suites::{run, run_suite};
