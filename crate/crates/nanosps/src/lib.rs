//! Config-driven scenarios for the emitter–nanoantenna model: time-resolved
//! runs, steady-state sweeps, spectrum fits and full-versus-effective
//! validation, each writing plain tables plus JSON metadata.

pub mod config;
pub mod error;
pub mod io;
pub mod run;

pub use config::{Command, FitConfig, ModelKind, Observable, ParamFile, Scenario, ScenarioConfig};
pub use error::{CliError, Result};
pub use io::Table;
pub use run::{fit, simulate, sweep, trace, validate, RunOutput, Trace, Validation};
