//! Scenario engine, file formats and command-line plumbing on top of
//! `preq-core`.

// `!(a < b)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cli;
pub mod collide;
pub mod config;
pub mod error;
pub mod io;
pub mod scenario;

pub use classify::{Classification, ForceSense, InteractionSummary};
pub use collide::{collision_scenario, CollisionKind, CollisionSetup};
pub use config::ScenarioConfig;
pub use error::{AppError, AppResult};
pub use scenario::{run_scenario, simulate, ScenarioOutcome};
