//! Local search driven by bandit feedback over uncertain combinatorial problems.

pub mod config;
pub mod engine;
pub mod harness;
pub mod instance;
pub mod env;
pub mod offline;
pub mod params;
pub mod problem;
pub mod problems;
pub mod rng;

pub use engine::{run_bandit_local_search, PhaseDecision, PhaseLedger, RunOutcome, Termination};
pub use env::{Environment, Marginal, ProductEnvironment, ScenarioEnvironment};
pub use params::{derive_params, ParamError, SearchParams};
pub use problem::Problem;
pub use rng::RoundStream;
