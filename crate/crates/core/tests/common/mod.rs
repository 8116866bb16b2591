#![allow(dead_code)]

use lsbandit::env::{Environment, Marginal, ProductEnvironment, ScenarioEnvironment};
use lsbandit::problem::{EnumerationBudgetExceeded, Problem};
use rand::{Rng, RngCore};

pub mod instances;

/// Arm `i` costs `z[i]`; `links[i]` lists its neighbors in order.
#[derive(Debug, Clone)]
pub struct Arms {
    pub links: Vec<Vec<usize>>,
}

impl Arms {
    /// Every arm neighbors every other arm.
    pub fn complete(k: usize) -> Self {
        Self {
            links: (0..k).map(|i| (0..k).filter(|&j| j != i).collect()).collect(),
        }
    }

    /// Arm `i` only neighbors arm `i + 1`.
    pub fn chain(k: usize) -> Self {
        Self {
            links: (0..k).map(|i| if i + 1 < k { vec![i + 1] } else { vec![] }).collect(),
        }
    }

    /// Arm 0 neighbors every other arm; the others have no neighbors.
    pub fn star(k: usize) -> Self {
        let mut links = vec![Vec::new(); k];
        links[0] = (1..k).collect();
        Self { links }
    }
}

impl Problem for Arms {
    type Coord = f64;
    type Solution = usize;

    fn outcome_dimension(&self) -> usize {
        self.links.len()
    }

    fn validate_coordinate(&self, _index: usize, value: f64) -> Result<(), String> {
        if (0.0..=1.0).contains(&value) {
            Ok(())
        } else {
            Err(format!("{value} outside [0, 1]"))
        }
    }

    fn start(&self) -> usize {
        0
    }

    fn neighbors(&self, x: &usize) -> Vec<usize> {
        self.links[*x].clone()
    }

    fn max_neighborhood(&self) -> usize {
        self.links.iter().map(Vec::len).max().unwrap_or(0).max(1)
    }

    fn cost(&self, x: &usize, z: &[f64]) -> f64 {
        z[*x]
    }

    fn max_cost(&self, z: &[f64]) -> f64 {
        z.iter().copied().fold(0.0, f64::max)
    }

    fn product_expected_cost(&self, x: &usize, env: &ProductEnvironment<f64>) -> Option<f64> {
        Some(env.marginals()[*x].mean())
    }

    fn product_cost_bound(&self, env: &ProductEnvironment<f64>) -> Option<f64> {
        Some(env.max_outcome().into_iter().fold(0.0, f64::max))
    }

    fn enumerate(&self, budget: usize) -> Result<Vec<usize>, EnumerationBudgetExceeded> {
        if self.links.len() > budget {
            return Err(EnumerationBudgetExceeded { budget });
        }
        Ok((0..self.links.len()).collect())
    }

    fn sample_uniform(&self, rng: &mut dyn RngCore) -> usize {
        rng.random_range(0..self.links.len())
    }

    fn solution_id(&self, x: &usize) -> String {
        (x + 1).to_string()
    }

    fn parse_solution(&self, text: &str) -> Result<usize, String> {
        match text.parse::<usize>() {
            Ok(v) if (1..=self.links.len()).contains(&v) => Ok(v - 1),
            _ => Err(format!("bad arm `{text}`")),
        }
    }
}

pub fn deterministic(costs: &[f64]) -> Environment<f64> {
    Environment::deterministic(costs.to_vec())
}

/// Independent Bernoulli costs with the given means.
pub fn bernoulli(means: &[f64]) -> Environment<f64> {
    let marginals = means
        .iter()
        .map(|&p| Marginal::two_point(0.0, 1.0, p).unwrap())
        .collect();
    Environment::Product(ProductEnvironment::new(marginals).unwrap())
}

pub fn scenarios<T: lsbandit::env::Coordinate>(rows: Vec<Vec<T>>, probs: Vec<f64>) -> Environment<T> {
    Environment::Scenarios(ScenarioEnvironment::new(rows, probs).unwrap())
}
