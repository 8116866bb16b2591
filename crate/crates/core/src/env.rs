//! Latent-scenario environments.
//!
//! An environment is a distribution over latent outcomes. Each outcome is a
//! vector of coordinates: job sizes, element costs, or point locations.

use std::fmt::Debug;

use rand::Rng;
use thiserror::Error;

use crate::problem::Problem;

/// Probabilities must sum to one within this tolerance.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("product environment needs a problem whose cost is linear or separable in the coordinates")]
    NonLinearCost,
    #[error("outcome violates the problem's bounds: {0}")]
    OutcomeOutOfBounds(String),
}

/// Coordinate type of latent outcomes.
pub trait Coordinate: Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// Numeric value, for coordinates that have one.
    fn real(self) -> Option<f64>;
}

impl Coordinate for f64 {
    fn real(self) -> Option<f64> {
        Some(self)
    }
}

/// Site identifiers (k-median point locations) carry no numeric value.
impl Coordinate for usize {
    fn real(self) -> Option<f64> {
        None
    }
}

fn validate_probabilities(probs: &[f64]) -> Result<Vec<f64>, EnvError> {
    if probs.is_empty() {
        return Err(EnvError::InvalidDistribution("empty support".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(EnvError::InvalidDistribution(format!(
            "probability {p} is not a nonnegative finite number"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(EnvError::InvalidDistribution(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    let mut acc = 0.0;
    let mut cumulative: Vec<f64> = probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    // Pin the last bucket so a uniform draw in [0, 1) always lands somewhere.
    *cumulative.last_mut().unwrap() = f64::INFINITY;
    Ok(cumulative)
}

fn pick(cumulative: &[f64], u: f64) -> usize {
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

/// A finite list of joint outcomes with probabilities.
#[derive(Debug, Clone)]
pub struct ScenarioEnvironment<T> {
    scenarios: Vec<Vec<T>>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl<T: Coordinate> ScenarioEnvironment<T> {
    pub fn new(scenarios: Vec<Vec<T>>, probs: Vec<f64>) -> Result<Self, EnvError> {
        if scenarios.len() != probs.len() {
            return Err(EnvError::InvalidDistribution(format!(
                "{} scenarios but {} probabilities",
                scenarios.len(),
                probs.len()
            )));
        }
        let cumulative = validate_probabilities(&probs)?;
        let dim = scenarios[0].len();
        if scenarios.iter().any(|s| s.len() != dim) {
            return Err(EnvError::InvalidDistribution(
                "scenarios have different lengths".into(),
            ));
        }
        Ok(Self {
            scenarios,
            probs,
            cumulative,
        })
    }

    /// Point mass on one outcome.
    pub fn deterministic(outcome: Vec<T>) -> Self {
        Self::new(vec![outcome], vec![1.0]).expect("single scenario is valid")
    }

    pub fn scenarios(&self) -> &[Vec<T>] {
        &self.scenarios
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        pick(&self.cumulative, rng.random::<f64>())
    }
}

/// Finite marginal distribution of one coordinate.
#[derive(Debug, Clone)]
pub struct Marginal<T> {
    values: Vec<T>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl<T: Coordinate> Marginal<T> {
    pub fn new(values: Vec<T>, probs: Vec<f64>) -> Result<Self, EnvError> {
        if values.len() != probs.len() {
            return Err(EnvError::InvalidDistribution(format!(
                "{} values but {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        let cumulative = validate_probabilities(&probs)?;
        Ok(Self {
            values,
            probs,
            cumulative,
        })
    }

    pub fn point(value: T) -> Self {
        Self::new(vec![value], vec![1.0]).expect("point mass is valid")
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn support(&self) -> impl Iterator<Item = (T, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.values[pick(&self.cumulative, rng.random::<f64>())]
    }

    pub fn max_value(&self) -> T {
        let mut best = self.values[0];
        for &v in &self.values[1..] {
            if v > best {
                best = v;
            }
        }
        best
    }
}

impl Marginal<f64> {
    /// `high` with probability `p_high`, else `low`.
    pub fn two_point(low: f64, high: f64, p_high: f64) -> Result<Self, EnvError> {
        if !(0.0..=1.0).contains(&p_high) {
            return Err(EnvError::InvalidDistribution(format!(
                "two-point probability {p_high} outside [0, 1]"
            )));
        }
        Self::new(vec![low, high], vec![1.0 - p_high, p_high])
    }

    /// Uniform over `points` equally spaced values from `low` to `high` inclusive.
    pub fn uniform_grid(low: f64, high: f64, points: usize) -> Result<Self, EnvError> {
        if points == 0 {
            return Err(EnvError::InvalidDistribution("grid needs at least one point".into()));
        }
        if points == 1 {
            return Ok(Self::point(low));
        }
        let step = (high - low) / (points - 1) as f64;
        let values = (0..points).map(|i| low + step * i as f64).collect();
        let p = 1.0 / points as f64;
        let mut probs = vec![p; points];
        // Absorb rounding so the sum check passes for any grid size.
        let rest: f64 = probs[1..].iter().sum();
        probs[0] = 1.0 - rest;
        Self::new(values, probs)
    }

    pub fn mean(&self) -> f64 {
        self.support().map(|(v, p)| v * p).sum()
    }
}

/// Independent coordinates.
#[derive(Debug, Clone)]
pub struct ProductEnvironment<T> {
    marginals: Vec<Marginal<T>>,
}

impl<T: Coordinate> ProductEnvironment<T> {
    pub fn new(marginals: Vec<Marginal<T>>) -> Result<Self, EnvError> {
        if marginals.is_empty() {
            return Err(EnvError::InvalidDistribution(
                "product environment needs at least one coordinate".into(),
            ));
        }
        Ok(Self { marginals })
    }

    pub fn marginals(&self) -> &[Marginal<T>] {
        &self.marginals
    }

    /// Coordinate-wise maximum of the supports.
    pub fn max_outcome(&self) -> Vec<T> {
        self.marginals.iter().map(Marginal::max_value).collect()
    }
}

impl ProductEnvironment<f64> {
    pub fn means(&self) -> Vec<f64> {
        self.marginals.iter().map(Marginal::mean).collect()
    }
}

/// The distribution of latent outcomes.
#[derive(Debug, Clone)]
pub enum Environment<T> {
    Scenarios(ScenarioEnvironment<T>),
    Product(ProductEnvironment<T>),
}

impl<T: Coordinate> Environment<T> {
    pub fn deterministic(outcome: Vec<T>) -> Self {
        Environment::Scenarios(ScenarioEnvironment::deterministic(outcome))
    }

    pub fn dimension(&self) -> usize {
        match self {
            Environment::Scenarios(s) => s.scenarios[0].len(),
            Environment::Product(p) => p.marginals.len(),
        }
    }

    /// Draws one outcome into `out`, reusing its allocation.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<T>) {
        out.clear();
        match self {
            Environment::Scenarios(s) => out.extend_from_slice(&s.scenarios[s.sample_index(rng)]),
            Environment::Product(p) => out.extend(p.marginals.iter().map(|m| m.sample(rng))),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let mut out = Vec::with_capacity(self.dimension());
        self.sample_into(rng, &mut out);
        out
    }

    /// Exact `E[cost(x, Z)]`.
    pub fn expected_cost<P>(&self, problem: &P, x: &P::Solution) -> Result<f64, EnvError>
    where
        P: Problem<Coord = T> + ?Sized,
    {
        match self {
            Environment::Scenarios(s) => Ok(s
                .scenarios
                .iter()
                .zip(&s.probs)
                .map(|(z, p)| p * problem.cost(x, z))
                .sum()),
            Environment::Product(p) => problem
                .product_expected_cost(x, p)
                .ok_or(EnvError::NonLinearCost),
        }
    }

    /// Upper bound on any realized cost, `max_{x, z} cost(x, z)`.
    pub fn cost_bound<P>(&self, problem: &P) -> Result<f64, EnvError>
    where
        P: Problem<Coord = T> + ?Sized,
    {
        match self {
            Environment::Scenarios(s) => Ok(s
                .scenarios
                .iter()
                .map(|z| problem.max_cost(z))
                .fold(0.0, f64::max)),
            Environment::Product(p) => problem.product_cost_bound(p).ok_or(EnvError::NonLinearCost),
        }
    }

    /// Every outcome in the support, passed through the problem's bounds check.
    pub fn validate_for<P>(&self, problem: &P) -> Result<(), EnvError>
    where
        P: Problem<Coord = T> + ?Sized,
    {
        if self.dimension() != problem.outcome_dimension() {
            return Err(EnvError::OutcomeOutOfBounds(format!(
                "outcomes have {} coordinates, problem expects {}",
                self.dimension(),
                problem.outcome_dimension()
            )));
        }
        let check = |i: usize, v: T| {
            problem
                .validate_coordinate(i, v)
                .map_err(EnvError::OutcomeOutOfBounds)
        };
        match self {
            Environment::Scenarios(s) => {
                for z in &s.scenarios {
                    for (i, &v) in z.iter().enumerate() {
                        check(i, v)?;
                    }
                }
            }
            Environment::Product(p) => {
                for (i, m) in p.marginals.iter().enumerate() {
                    for &v in m.values() {
                        check(i, v)?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Environment<f64> {
    /// Mean outcome vector.
    pub fn means(&self) -> Vec<f64> {
        match self {
            Environment::Scenarios(s) => {
                let mut m = vec![0.0; s.scenarios[0].len()];
                for (z, p) in s.scenarios.iter().zip(&s.probs) {
                    for (acc, v) in m.iter_mut().zip(z) {
                        *acc += p * v;
                    }
                }
                m
            }
            Environment::Product(p) => p.means(),
        }
    }
}
