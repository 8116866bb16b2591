//! Offline local search on exact expected costs, and the improving-moves verifier.

use thiserror::Error;

use crate::problem::{EnumerationBudgetExceeded, Problem};

/// Default cap on the number of solutions the verifier enumerates.
pub const DEFAULT_ENUMERATION_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OfflineError {
    #[error("cost of solution {solution} is not finite ({value})")]
    NonFiniteCost { solution: String, value: f64 },
    #[error("beta = {0} must lie in (0, 1)")]
    InvalidBeta(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineResult<S> {
    pub final_solution: S,
    /// Number of accepted moves.
    pub iterations: usize,
    /// Every visited solution with its cost, starting at `x0`.
    pub trajectory: Vec<(S, f64)>,
}

impl<S> OfflineResult<S> {
    pub fn final_cost(&self) -> f64 {
        self.trajectory.last().map(|(_, c)| *c).unwrap_or(f64::NAN)
    }
}

fn checked<P: Problem>(
    problem: &P,
    cost: &impl Fn(&P::Solution) -> f64,
    x: &P::Solution,
) -> Result<f64, OfflineError> {
    let value = cost(x);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(OfflineError::NonFiniteCost {
            solution: problem.solution_id(x),
            value,
        })
    }
}

/// Moves to the cheapest neighbor while it costs at most `beta` times the current cost.
pub fn offline_local_search<P, F>(
    problem: &P,
    cost: F,
    beta: f64,
    x0: P::Solution,
) -> Result<OfflineResult<P::Solution>, OfflineError>
where
    P: Problem,
    F: Fn(&P::Solution) -> f64,
{
    if !(beta > 0.0 && beta < 1.0) {
        return Err(OfflineError::InvalidBeta(beta));
    }
    let mut current_cost = checked(problem, &cost, &x0)?;
    let mut x = x0;
    let mut trajectory = vec![(x.clone(), current_cost)];
    let mut iterations = 0;
    while current_cost > 0.0 {
        let mut best: Option<(P::Solution, f64)> = None;
        for y in problem.neighbors(&x) {
            let c = checked(problem, &cost, &y)?;
            if best.as_ref().is_none_or(|(_, b)| c < *b) {
                best = Some((y, c));
            }
        }
        match best {
            Some((y, c)) if c <= beta * current_cost => {
                x = y;
                current_cost = c;
                iterations += 1;
                trajectory.push((x.clone(), c));
            }
            _ => break,
        }
    }
    Ok(OfflineResult {
        final_solution: x,
        iterations,
        trajectory,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<S> {
    pub holds: bool,
    pub opt: f64,
    /// A solution above `gamma * opt` with no neighbor at or below `beta` times its cost.
    pub witness: Option<(S, f64)>,
    pub solutions_checked: usize,
}

/// Exhaustively checks that every solution above `gamma * OPT` has a `beta`-improving neighbor.
pub fn verify_improving_moves<P, F>(
    problem: &P,
    cost: F,
    beta: f64,
    gamma: f64,
    budget: usize,
) -> Result<Verdict<P::Solution>, EnumerationBudgetExceeded>
where
    P: Problem,
    F: Fn(&P::Solution) -> f64,
{
    let all = problem.enumerate(budget)?;
    let costs: Vec<f64> = all.iter().map(&cost).collect();
    let opt = costs.iter().copied().fold(f64::INFINITY, f64::min);
    for (x, &cx) in all.iter().zip(&costs) {
        if cx > gamma * opt && !problem.neighbors(x).iter().any(|y| cost(y) <= beta * cx) {
            return Ok(Verdict {
                holds: false,
                opt,
                witness: Some((x.clone(), cx)),
                solutions_checked: all.len(),
            });
        }
    }
    Ok(Verdict {
        holds: true,
        opt,
        witness: None,
        solutions_checked: all.len(),
    })
}

/// Returns a solution whose neighborhood exceeds the declared bound, if any.
pub fn neighborhood_bound_violation<P: Problem>(
    problem: &P,
    budget: usize,
) -> Result<Option<(P::Solution, usize)>, EnumerationBudgetExceeded> {
    let bound = problem.max_neighborhood();
    Ok(problem
        .enumerate(budget)?
        .into_iter()
        .map(|x| {
            let size = problem.neighbors(&x).len();
            (x, size)
        })
        .find(|(_, size)| *size > bound))
}
