//! Single-machine scheduling to minimize total completion time.
//!
//! A schedule assigns job `j` to position `pi(j)`. Positions are 0-based
//! internally; identifiers print the job order 1-based, e.g. `3-1-2` runs job 3
//! first.

use rand::seq::SliceRandom;
use rand::RngCore;

use super::Recipe;
use crate::env::{Environment, ProductEnvironment};
use crate::params::ParamError;
use crate::problem::{EnumerationBudgetExceeded, Problem};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScheduleSolution {
    positions: Vec<usize>,
}

impl ScheduleSolution {
    pub fn identity(n: usize) -> Self {
        Self {
            positions: (0..n).collect(),
        }
    }

    /// `positions[j]` is the 0-based slot of job `j`; must be a bijection.
    pub fn from_positions(positions: Vec<usize>) -> Result<Self, String> {
        let n = positions.len();
        let mut seen = vec![false; n];
        for &p in &positions {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(format!("{positions:?} is not a permutation of 0..{n}"));
            }
        }
        Ok(Self { positions })
    }

    /// `order[k]` is the job run in slot `k`.
    pub fn from_order(order: &[usize]) -> Result<Self, String> {
        let n = order.len();
        let mut positions = vec![usize::MAX; n];
        for (slot, &job) in order.iter().enumerate() {
            if job >= n || positions[job] != usize::MAX {
                return Err(format!("{order:?} is not a permutation of 0..{n}"));
            }
            positions[job] = slot;
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0; self.positions.len()];
        for (job, &slot) in self.positions.iter().enumerate() {
            order[slot] = job;
        }
        order
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Swaps the slots of jobs `a` and `b`.
    pub fn swapped(&self, a: usize, b: usize) -> Self {
        let mut positions = self.positions.clone();
        positions.swap(a, b);
        Self { positions }
    }
}

/// `sum_j (n - pi(j) + 1) P_j` with 1-based positions.
pub fn schedule_cost(pi: &ScheduleSolution, sizes: &[f64]) -> f64 {
    let n = pi.len();
    pi.positions
        .iter()
        .zip(sizes)
        .map(|(&slot, &p)| (n - slot) as f64 * p)
        .sum()
}

/// Sum of completion times, accumulated slot by slot.
pub fn completion_time_cost(pi: &ScheduleSolution, sizes: &[f64]) -> f64 {
    let mut clock = 0.0;
    let mut total = 0.0;
    for job in pi.order() {
        clock += sizes[job];
        total += clock;
    }
    total
}

/// Shortest expected processing time first; ties keep job index order.
pub fn spt_order(means: &[f64]) -> ScheduleSolution {
    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b)));
    ScheduleSolution::from_order(&order).expect("sorted indices form a permutation")
}

/// Pairs scheduled against their mean order, and the total gap they cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrDecomposition {
    /// `(j, j', mu_j - mu_j')` with `mu_j > mu_j'` and `j` ahead of `j'`.
    pub inversions: Vec<(usize, usize, f64)>,
    pub total: f64,
}

pub fn schedule_err(pi: &ScheduleSolution, means: &[f64]) -> ErrDecomposition {
    let n = pi.len();
    let mut inversions = Vec::new();
    for j in 0..n {
        for k in 0..n {
            if means[j] > means[k] && pi.positions[j] < pi.positions[k] {
                inversions.push((j, k, means[j] - means[k]));
            }
        }
    }
    let total = inversions.iter().map(|&(_, _, gap)| gap).sum();
    ErrDecomposition { inversions, total }
}

/// All single-pair job swaps, ordered by `(i, j)` with `i < j`.
pub fn schedule_neighborhood(pi: &ScheduleSolution) -> Vec<ScheduleSolution> {
    let n = pi.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(pi.swapped(i, j));
        }
    }
    out
}

/// `(1 - eps/n^2, 1 + eps, n^2, n(n-1)/2)`.
pub fn scheduling_params(n: usize, epsilon: f64) -> Result<Recipe, ParamError> {
    if n < 2 {
        return Err(ParamError::ParamOutOfRange {
            field: "n",
            value: n as f64,
            reason: "scheduling recipe needs at least 2 jobs",
        });
    }
    super::check_epsilon(epsilon)?;
    let nf = n as f64;
    Ok(Recipe {
        beta: 1.0 - epsilon / (nf * nf),
        gamma: 1.0 + epsilon,
        c_max: nf * nf,
        max_neighborhood: n * (n - 1) / 2,
    })
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `n` jobs with sizes normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulingProblem {
    n: usize,
}

impl SchedulingProblem {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "need at least one job");
        Self { n }
    }

    pub fn jobs(&self) -> usize {
        self.n
    }
}

impl Problem for SchedulingProblem {
    type Coord = f64;
    type Solution = ScheduleSolution;

    fn outcome_dimension(&self) -> usize {
        self.n
    }

    fn validate_coordinate(&self, index: usize, value: f64) -> Result<(), String> {
        if (0.0..=1.0).contains(&value) {
            Ok(())
        } else {
            Err(format!("size {value} of job {} outside [0, 1]", index + 1))
        }
    }

    fn start(&self) -> ScheduleSolution {
        ScheduleSolution::identity(self.n)
    }

    fn neighbors(&self, x: &ScheduleSolution) -> Vec<ScheduleSolution> {
        schedule_neighborhood(x)
    }

    fn max_neighborhood(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    fn cost(&self, x: &ScheduleSolution, z: &[f64]) -> f64 {
        schedule_cost(x, z)
    }

    fn max_cost(&self, z: &[f64]) -> f64 {
        // Longest job first weighs the largest sizes most.
        let mut sorted = z.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let n = self.n;
        sorted.iter().enumerate().map(|(k, p)| (n - k) as f64 * p).sum()
    }

    fn product_expected_cost(
        &self,
        x: &ScheduleSolution,
        env: &ProductEnvironment<f64>,
    ) -> Option<f64> {
        Some(schedule_cost(x, &env.means()))
    }

    fn product_cost_bound(&self, env: &ProductEnvironment<f64>) -> Option<f64> {
        Some(self.max_cost(&env.max_outcome()))
    }

    fn exact_optimum(&self, env: &Environment<f64>) -> Option<ScheduleSolution> {
        Some(spt_order(&env.means()))
    }

    fn enumerate(&self, budget: usize) -> Result<Vec<ScheduleSolution>, EnumerationBudgetExceeded> {
        let count = (1..=self.n).try_fold(1usize, |acc, k| acc.checked_mul(k));
        if count.is_none_or(|c| c > budget) {
            return Err(EnumerationBudgetExceeded { budget });
        }
        let mut order: Vec<usize> = (0..self.n).collect();
        let mut out = Vec::with_capacity(count.unwrap());
        loop {
            out.push(ScheduleSolution::from_order(&order).expect("permutation"));
            if !next_permutation(&mut order) {
                break;
            }
        }
        Ok(out)
    }

    fn sample_uniform(&self, rng: &mut dyn RngCore) -> ScheduleSolution {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.shuffle(rng);
        ScheduleSolution::from_order(&order).expect("shuffled permutation")
    }

    fn solution_id(&self, x: &ScheduleSolution) -> String {
        x.order()
            .iter()
            .map(|j| (j + 1).to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    fn parse_solution(&self, text: &str) -> Result<ScheduleSolution, String> {
        let order = super::parse_ids(text)?;
        if order.len() != self.n {
            return Err(format!("expected {} jobs, got {}", self.n, order.len()));
        }
        ScheduleSolution::from_order(&order)
    }
}
