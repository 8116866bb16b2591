//! TOML instance files.
//!
//! Every file names its `problem` and gives the latent distribution either as
//! independent per-coordinate distributions or as a scenario table. Jobs,
//! elements, nodes, sites and candidates are numbered from 1.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::env::{EnvError, Environment, Marginal, ProductEnvironment, ScenarioEnvironment};
use crate::params::ParamError;
use crate::problem::Problem;
use crate::problems::kmedian::{kmedian_params, KMedianError, KMedianProblem};
use crate::problems::matroid::{
    matroid_params, GraphicMatroid, MatroidError, MatroidKind, MatroidProblem, PartitionMatroid,
    UniformMatroid,
};
use crate::problems::scheduling::{scheduling_params, SchedulingProblem};
use crate::problems::Recipe;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read instance: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed instance: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error(transparent)]
    KMedian(#[from] KMedianError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, InstanceError> {
    Err(InstanceError::Invalid(msg.into()))
}

/// A bounded distribution of one real coordinate.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "dist", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistSpec {
    Point { value: f64 },
    TwoPoint { low: f64, high: f64, p_high: f64 },
    UniformGrid { low: f64, high: f64, points: usize },
    Discrete { values: Vec<f64>, probabilities: Vec<f64> },
}

impl DistSpec {
    pub fn to_marginal(&self) -> Result<Marginal<f64>, EnvError> {
        match self {
            DistSpec::Point { value } => Marginal::new(vec![*value], vec![1.0]),
            DistSpec::TwoPoint { low, high, p_high } => Marginal::two_point(*low, *high, *p_high),
            DistSpec::UniformGrid { low, high, points } => Marginal::uniform_grid(*low, *high, *points),
            DistSpec::Discrete { values, probabilities } => {
                Marginal::new(values.clone(), probabilities.clone())
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RealScenario {
    probability: f64,
    values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchedulingFile {
    n: usize,
    jobs: Option<Vec<DistSpec>>,
    scenarios: Option<Vec<RealScenario>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
enum MatroidSpec {
    Graphic { nodes: usize, edges: Vec<[usize; 2]> },
    Uniform { size: usize, rank: usize },
    Partition { blocks: Vec<Vec<usize>>, capacities: Vec<usize> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatroidFile {
    matroid: MatroidSpec,
    elements: Option<Vec<DistSpec>>,
    scenarios: Option<Vec<RealScenario>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointSpec {
    sites: Vec<usize>,
    probabilities: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteScenario {
    probability: f64,
    locations: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KMedianFile {
    k: usize,
    distances: Vec<Vec<f64>>,
    candidates: Vec<usize>,
    points: Option<Vec<PointSpec>>,
    scenarios: Option<Vec<SiteScenario>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
enum InstanceFile {
    Scheduling(SchedulingFile),
    Matroid(MatroidFile),
    Kmedian(KMedianFile),
}

/// A loaded problem together with its latent distribution.
#[derive(Debug, Clone)]
pub enum Instance {
    Scheduling(SchedulingProblem, Environment<f64>),
    Matroid(MatroidProblem, Environment<f64>),
    KMedian(KMedianProblem, Environment<usize>),
}

impl Instance {
    pub fn load(path: &Path) -> Result<Self, InstanceError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        match toml::from_str::<InstanceFile>(text)? {
            InstanceFile::Scheduling(f) => scheduling(f),
            InstanceFile::Matroid(f) => matroid(f),
            InstanceFile::Kmedian(f) => kmedian(f),
        }
    }

    /// `scheduling`, `matroid` or `kmedian`.
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Scheduling(..) => "scheduling",
            Instance::Matroid(..) => "matroid",
            Instance::KMedian(..) => "kmedian",
        }
    }

    /// The problem's own `(beta, gamma)` recipe at `epsilon`.
    ///
    /// k-median has no free parameter and ignores `epsilon`.
    pub fn recipe(&self, epsilon: f64) -> Result<Recipe, ParamError> {
        match self {
            Instance::Scheduling(p, _) => scheduling_params(p.jobs(), epsilon),
            Instance::Matroid(p, _) => matroid_params(p.ground_size(), p.rank(), epsilon),
            Instance::KMedian(p, _) => kmedian_params(p.points(), p.candidate_count(), Some(p.k())),
        }
    }
}

fn real_environment(
    dimension: usize,
    marginals: Option<Vec<DistSpec>>,
    scenarios: Option<Vec<RealScenario>>,
    what: &str,
) -> Result<Environment<f64>, InstanceError> {
    match (marginals, scenarios) {
        (Some(specs), None) => {
            if specs.len() != dimension {
                return invalid(format!("{} {what} distributions given, expected {dimension}", specs.len()));
            }
            let marginals = specs.iter().map(DistSpec::to_marginal).collect::<Result<_, _>>()?;
            Ok(Environment::Product(ProductEnvironment::new(marginals)?))
        }
        (None, Some(rows)) => {
            if let Some(r) = rows.iter().find(|r| r.values.len() != dimension) {
                return invalid(format!("scenario has {} values, expected {dimension}", r.values.len()));
            }
            let probs = rows.iter().map(|r| r.probability).collect();
            let outcomes = rows.into_iter().map(|r| r.values).collect();
            Ok(Environment::Scenarios(ScenarioEnvironment::new(outcomes, probs)?))
        }
        _ => invalid(format!("give exactly one of `{what}s` or `scenarios`")),
    }
}

fn finish<P: Problem>(problem: &P, env: &Environment<P::Coord>) -> Result<(), InstanceError> {
    env.validate_for(problem)?;
    Ok(())
}

fn scheduling(f: SchedulingFile) -> Result<Instance, InstanceError> {
    if f.n == 0 {
        return invalid("`n` must be at least 1");
    }
    let problem = SchedulingProblem::new(f.n);
    let env = real_environment(f.n, f.jobs, f.scenarios, "job")?;
    finish(&problem, &env)?;
    Ok(Instance::Scheduling(problem, env))
}

fn one_based(ids: &[usize], limit: usize, what: &str) -> Result<Vec<usize>, InstanceError> {
    ids.iter()
        .map(|&i| {
            if (1..=limit).contains(&i) {
                Ok(i - 1)
            } else {
                invalid(format!("{what} id {i} outside 1..={limit}"))
            }
        })
        .collect()
}

fn matroid(f: MatroidFile) -> Result<Instance, InstanceError> {
    let kind = match f.matroid {
        MatroidSpec::Graphic { nodes, edges } => {
            let flat: Vec<usize> = edges.iter().flatten().copied().collect();
            let ends = one_based(&flat, nodes, "node")?;
            let edges = ends.chunks(2).map(|e| (e[0], e[1])).collect();
            let g = GraphicMatroid::new(nodes, edges)?;
            if !g.is_connected() {
                return invalid("graph is not connected");
            }
            MatroidKind::Graphic(g)
        }
        MatroidSpec::Uniform { size, rank } => MatroidKind::Uniform(UniformMatroid::new(size, rank)?),
        MatroidSpec::Partition { blocks, capacities } => {
            let size = blocks.iter().map(Vec::len).sum();
            let blocks = blocks
                .iter()
                .map(|b| one_based(b, size, "element"))
                .collect::<Result<Vec<_>, _>>()?;
            MatroidKind::Partition(PartitionMatroid::new(&blocks, capacities)?)
        }
    };
    let problem = MatroidProblem::new(kind)?;
    let env = real_environment(problem.ground_size(), f.elements, f.scenarios, "element")?;
    finish(&problem, &env)?;
    Ok(Instance::Matroid(problem, env))
}

fn kmedian(f: KMedianFile) -> Result<Instance, InstanceError> {
    let sites = f.distances.len();
    let candidates = one_based(&f.candidates, sites, "candidate site")?;
    let env = match (f.points, f.scenarios) {
        (Some(points), None) => {
            let marginals = points
                .iter()
                .map(|p| Ok(Marginal::new(one_based(&p.sites, sites, "site")?, p.probabilities.clone())?))
                .collect::<Result<Vec<_>, InstanceError>>()?;
            Environment::Product(ProductEnvironment::new(marginals)?)
        }
        (None, Some(rows)) => {
            let probs = rows.iter().map(|r| r.probability).collect();
            let outcomes = rows
                .iter()
                .map(|r| one_based(&r.locations, sites, "site"))
                .collect::<Result<Vec<_>, _>>()?;
            Environment::Scenarios(ScenarioEnvironment::new(outcomes, probs)?)
        }
        _ => return invalid("give exactly one of `points` or `scenarios`"),
    };
    let problem = KMedianProblem::new(f.distances, candidates, env.dimension(), f.k)?;
    finish(&problem, &env)?;
    Ok(Instance::KMedian(problem, env))
}
