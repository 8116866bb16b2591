//! Uncertain k-median over a finite metric.
//!
//! The metric lives on `sites`; some sites are candidate centers and each
//! point's random location is a site. A solution is a set of `k` candidate
//! indices (`0..m`, printed 1-based).

use rand::seq::index::sample;
use rand::RngCore;
use thiserror::Error;

use super::matroid::{for_each_subset, subset_count};
use super::Recipe;
use crate::env::ProductEnvironment;
use crate::params::ParamError;
use crate::problem::{EnumerationBudgetExceeded, Problem};

/// Slack allowed in the triangle inequality and symmetry checks.
pub const METRIC_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KMedianError {
    #[error("distance matrix is not a unit-diameter metric: {0}")]
    NotAMetric(String),
    #[error("invalid k-median instance: {0}")]
    Invalid(String),
}

/// Checks `d(x,x) = 0`, nonnegativity, symmetry, the triangle inequality and `max <= 1`.
pub fn validate_metric(d: &[Vec<f64>]) -> Result<(), KMedianError> {
    let n = d.len();
    let bad = |msg: String| Err(KMedianError::NotAMetric(msg));
    if d.iter().any(|row| row.len() != n) {
        return bad(format!("matrix is not square ({n} rows)"));
    }
    for i in 0..n {
        if d[i][i] != 0.0 {
            return bad(format!("d({i},{i}) = {} is not 0", d[i][i]));
        }
        for j in 0..n {
            let v = d[i][j];
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("d({i},{j}) = {v} outside [0, 1]"));
            }
            if (v - d[j][i]).abs() > METRIC_TOLERANCE {
                return bad(format!("d({i},{j}) = {v} but d({j},{i}) = {}", d[j][i]));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if d[i][k] > d[i][j] + d[j][k] + METRIC_TOLERANCE {
                    return bad(format!("triangle inequality fails for ({i},{j},{k})"));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KMedianSolution(Vec<usize>);

impl KMedianSolution {
    pub fn new(mut centers: Vec<usize>, k: usize, m: usize) -> Result<Self, String> {
        centers.sort_unstable();
        centers.dedup();
        if centers.len() != k || centers.iter().any(|&c| c >= m) {
            return Err(format!("{centers:?} is not a set of {k} candidates from 0..{m}"));
        }
        Ok(Self(centers))
    }

    pub fn centers(&self) -> &[usize] {
        &self.0
    }
}

/// Single swaps `C - a + b`, by `a` ascending then `b` ascending.
pub fn kmedian_neighborhood(c: &KMedianSolution, m: usize) -> Vec<KMedianSolution> {
    let outside: Vec<usize> = (0..m).filter(|b| c.0.binary_search(b).is_err()).collect();
    let mut out = Vec::with_capacity(c.0.len() * outside.len());
    for &a in &c.0 {
        for &b in &outside {
            let mut next: Vec<usize> = c.0.iter().copied().filter(|&x| x != a).collect();
            next.push(b);
            next.sort_unstable();
            out.push(KMedianSolution(next));
        }
    }
    out
}

/// `(1 - 1/n^2, 5/(1 - 1/n), n, M)` with `M = k(m - k)`, or `m^2` when `k` is unknown.
pub fn kmedian_params(n: usize, m: usize, k: Option<usize>) -> Result<Recipe, ParamError> {
    if n < 2 {
        return Err(ParamError::ParamOutOfRange {
            field: "n",
            value: n as f64,
            reason: "k-median recipe needs at least 2 points",
        });
    }
    let nf = n as f64;
    let max_neighborhood = match k {
        Some(k) => (k * m.saturating_sub(k)).max(1),
        None => m * m,
    };
    Ok(Recipe {
        beta: 1.0 - 1.0 / (nf * nf),
        gamma: 5.0 / (1.0 - 1.0 / nf),
        c_max: nf,
        max_neighborhood,
    })
}

#[derive(Debug, Clone)]
pub struct KMedianProblem {
    distances: Vec<Vec<f64>>,
    candidates: Vec<usize>,
    points: usize,
    k: usize,
    /// `to_candidate[site][c]`.
    to_candidate: Vec<Vec<f64>>,
}

impl KMedianProblem {
    /// `distances` is the full metric over sites; `candidates[c]` is the site of candidate `c`.
    pub fn new(
        distances: Vec<Vec<f64>>,
        candidates: Vec<usize>,
        points: usize,
        k: usize,
    ) -> Result<Self, KMedianError> {
        validate_metric(&distances)?;
        let sites = distances.len();
        if let Some(&c) = candidates.iter().find(|&&c| c >= sites) {
            return Err(KMedianError::Invalid(format!("candidate site {c} outside 0..{sites}")));
        }
        if k == 0 || k > candidates.len() {
            return Err(KMedianError::Invalid(format!(
                "k = {k} must lie in 1..={}",
                candidates.len()
            )));
        }
        if points == 0 {
            return Err(KMedianError::Invalid("need at least one point".into()));
        }
        let to_candidate = distances
            .iter()
            .map(|row| candidates.iter().map(|&c| row[c]).collect())
            .collect();
        Ok(Self {
            distances,
            candidates,
            points,
            k,
            to_candidate,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn sites(&self) -> usize {
        self.distances.len()
    }

    pub fn distances(&self) -> &[Vec<f64>] {
        &self.distances
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    /// `d(site, C)`.
    pub fn distance_to(&self, site: usize, c: &KMedianSolution) -> f64 {
        let row = &self.to_candidate[site];
        c.0.iter().map(|&j| row[j]).fold(f64::INFINITY, f64::min)
    }

    pub fn solution(&self, centers: Vec<usize>) -> Result<KMedianSolution, String> {
        KMedianSolution::new(centers, self.k, self.candidates.len())
    }
}

impl Problem for KMedianProblem {
    type Coord = usize;
    type Solution = KMedianSolution;

    fn outcome_dimension(&self) -> usize {
        self.points
    }

    fn validate_coordinate(&self, index: usize, value: usize) -> Result<(), String> {
        if value < self.sites() {
            Ok(())
        } else {
            Err(format!("point {} located at unknown site {value}", index + 1))
        }
    }

    fn start(&self) -> KMedianSolution {
        KMedianSolution((0..self.k).collect())
    }

    fn neighbors(&self, x: &KMedianSolution) -> Vec<KMedianSolution> {
        kmedian_neighborhood(x, self.candidates.len())
    }

    fn max_neighborhood(&self) -> usize {
        self.k * (self.candidates.len() - self.k)
    }

    fn cost(&self, x: &KMedianSolution, z: &[usize]) -> f64 {
        z.iter().map(|&site| self.distance_to(site, x)).sum()
    }

    fn max_cost(&self, z: &[usize]) -> f64 {
        z.iter()
            .map(|&site| self.to_candidate[site].iter().copied().fold(0.0, f64::max))
            .sum()
    }

    fn product_expected_cost(&self, x: &KMedianSolution, env: &ProductEnvironment<usize>) -> Option<f64> {
        Some(
            env.marginals()
                .iter()
                .map(|m| m.support().map(|(site, p)| p * self.distance_to(site, x)).sum::<f64>())
                .sum(),
        )
    }

    fn product_cost_bound(&self, env: &ProductEnvironment<usize>) -> Option<f64> {
        Some(
            env.marginals()
                .iter()
                .map(|m| {
                    m.values()
                        .iter()
                        .map(|&site| self.to_candidate[site].iter().copied().fold(0.0, f64::max))
                        .fold(0.0, f64::max)
                })
                .sum(),
        )
    }

    fn enumerate(&self, budget: usize) -> Result<Vec<KMedianSolution>, EnumerationBudgetExceeded> {
        let m = self.candidates.len();
        match subset_count(m, self.k) {
            Some(c) if c <= budget => {}
            _ => return Err(EnumerationBudgetExceeded { budget }),
        }
        let mut out = Vec::new();
        for_each_subset(m, self.k, |s| out.push(KMedianSolution(s.to_vec())));
        Ok(out)
    }

    fn sample_uniform(&self, rng: &mut dyn RngCore) -> KMedianSolution {
        let mut s = sample(rng, self.candidates.len(), self.k).into_vec();
        s.sort_unstable();
        KMedianSolution(s)
    }

    fn solution_id(&self, x: &KMedianSolution) -> String {
        super::format_ids(&x.0)
    }

    fn parse_solution(&self, text: &str) -> Result<KMedianSolution, String> {
        self.solution(super::parse_ids(text)?)
    }
}
