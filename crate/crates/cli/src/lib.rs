//! Scenario runner for the trichotomy and Lyapunov-norm checks: parse a TOML
//! scenario, run the requested checks in dependency order, write reports.

pub mod emit;
pub mod run;
pub mod scenario;

pub use emit::{emit, Format};
pub use run::{run, CheckEntry, Outcome, RunReport, Status};
pub use scenario::{CheckKind, Overrides, Scenario, ScenarioError};
