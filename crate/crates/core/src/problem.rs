//! The contract every combinatorial problem implements.

use std::fmt::Debug;
use std::hash::Hash;

use rand::RngCore;
use thiserror::Error;

use crate::env::{Coordinate, Environment, ProductEnvironment};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("enumeration needs more than {budget} solutions")]
pub struct EnumerationBudgetExceeded {
    pub budget: usize,
}

/// Feasible solutions, a canonical neighborhood, and per-outcome costs.
///
/// Implementations are immutable after construction and shared read-only
/// across concurrent replications.
pub trait Problem: Sync {
    type Coord: Coordinate;
    type Solution: Clone + Eq + Hash + Debug + Send + Sync;

    /// Number of coordinates in a latent outcome.
    fn outcome_dimension(&self) -> usize;

    /// Rejects coordinate values the problem cannot cost.
    fn validate_coordinate(&self, index: usize, value: Self::Coord) -> Result<(), String>;

    /// Deterministic, cost-oblivious starting solution.
    fn start(&self) -> Self::Solution;

    /// Neighbors in the problem's canonical order.
    fn neighbors(&self, x: &Self::Solution) -> Vec<Self::Solution>;

    /// Declared bound on `|N(x)|` over all feasible `x`.
    fn max_neighborhood(&self) -> usize;

    /// Realized cost of `x` under outcome `z`.
    fn cost(&self, x: &Self::Solution, z: &[Self::Coord]) -> f64;

    /// An upper bound on `max_x cost(x, z)`.
    fn max_cost(&self, z: &[Self::Coord]) -> f64;

    /// Exact expectation under independent coordinates, when the cost's
    /// structure (linearity or separability) allows it.
    fn product_expected_cost(
        &self,
        _x: &Self::Solution,
        _env: &ProductEnvironment<Self::Coord>,
    ) -> Option<f64> {
        None
    }

    /// Realized cost bound under independent coordinates.
    fn product_cost_bound(&self, _env: &ProductEnvironment<Self::Coord>) -> Option<f64> {
        None
    }

    /// Exact optimum from a structural oracle, without enumeration.
    fn exact_optimum(&self, _env: &Environment<Self::Coord>) -> Option<Self::Solution> {
        None
    }

    /// All feasible solutions, or an error once more than `budget` would be produced.
    fn enumerate(&self, budget: usize) -> Result<Vec<Self::Solution>, EnumerationBudgetExceeded>;

    /// A uniformly random feasible solution.
    fn sample_uniform(&self, rng: &mut dyn RngCore) -> Self::Solution;

    /// Compact printable identifier, free of commas and whitespace.
    fn solution_id(&self, x: &Self::Solution) -> String;

    /// Inverse of `solution_id`, used to accept solutions on the command line.
    fn parse_solution(&self, text: &str) -> Result<Self::Solution, String>;
}
