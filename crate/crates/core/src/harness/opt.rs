use super::HarnessError;
use crate::env::Environment;
use crate::offline::offline_local_search;
use crate::problem::Problem;

/// Default enumeration budget for computing OPT.
pub const DEFAULT_OPT_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult<S> {
    pub opt: f64,
    pub solution: S,
    /// False when `opt` is only the best value offline local search found.
    pub exact: bool,
}

/// Minimum expected cost, from the problem's oracle, by enumeration, or by offline search.
pub fn compute_opt<P: Problem>(
    problem: &P,
    env: &Environment<P::Coord>,
    budget: usize,
    fallback_beta: f64,
) -> Result<OptResult<P::Solution>, HarnessError> {
    if let Some(x) = problem.exact_optimum(env) {
        return Ok(OptResult {
            opt: env.expected_cost(problem, &x)?,
            solution: x,
            exact: true,
        });
    }
    if let Ok(all) = problem.enumerate(budget) {
        let mut best: Option<(P::Solution, f64)> = None;
        for x in all {
            let c = env.expected_cost(problem, &x)?;
            if best.as_ref().is_none_or(|(_, b)| c < *b) {
                best = Some((x, c));
            }
        }
        if let Some((solution, opt)) = best {
            return Ok(OptResult {
                opt,
                solution,
                exact: true,
            });
        }
    }
    env.expected_cost(problem, &problem.start())?;
    let found = offline_local_search(
        problem,
        |x| env.expected_cost(problem, x).unwrap_or(f64::NAN),
        fallback_beta,
        problem.start(),
    )?;
    Ok(OptResult {
        opt: found.final_cost(),
        solution: found.final_solution,
        exact: false,
    })
}
