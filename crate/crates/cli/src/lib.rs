//! Runner for the verification suites of `segre-core`.

pub mod config;
pub mod report;
pub mod suites;

pub use config::{RunConfig, Tolerances};
pub use report::{Assertion, SuiteReport};
pub use suites::{run_suite, SUITES};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown suite {0}; expected one of {list} or all", list = SUITES.join(", "))]
    UnknownSuite(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] segre_core::Error),
    #[error("{0}")]
    Io(String),
}
