use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::opt::OptResult;
use super::trace::{RegretAccumulator, TraceSink};
use super::HarnessError;
use crate::engine::{run_bandit_local_search, RunOutcome, Termination};
use crate::env::Environment;
use crate::params::SearchParams;
use crate::problem::Problem;
use crate::rng::{RoundStream, StreamPurpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    BanditLocalSearch,
    UniformRandom,
    ConstantOpt,
    ConstantStart,
}

impl Policy {
    pub const ALL: [Policy; 4] = [
        Policy::BanditLocalSearch,
        Policy::UniformRandom,
        Policy::ConstantOpt,
        Policy::ConstantStart,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::BanditLocalSearch => "bandit-local-search",
            Policy::UniformRandom => "uniform-random",
            Policy::ConstantOpt => "constant-opt",
            Policy::ConstantStart => "constant-start",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Policy::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown policy `{s}`"))
    }
}

/// How the bandit picks its first solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartRule {
    #[default]
    Canonical,
    /// Uniformly random, drawn from the replication's policy stream.
    Random,
}

/// Everything shared by the replications of one experiment.
pub struct Experiment<'a, P: Problem> {
    pub problem: &'a P,
    pub env: &'a Environment<P::Coord>,
    pub params: SearchParams,
    pub opt: OptResult<P::Solution>,
    pub start: StartRule,
    pub master_seed: u64,
}

#[derive(Debug, Clone)]
pub struct ReplicationSummary<S> {
    pub seed: u64,
    pub policy: Policy,
    pub horizon: u64,
    pub final_regret_expected: f64,
    pub final_regret_realized: f64,
    /// Completed phases; zero for the baselines.
    pub phases: usize,
    pub terminated_by: Termination,
    pub final_solution: S,
    pub final_solution_id: String,
    pub final_expected_cost: f64,
    /// Engine outcome with its ledger, for the bandit policy.
    pub outcome: Option<RunOutcome<S>>,
    pub wall_time: Duration,
}

impl<S> ReplicationSummary<S> {
    /// `cost(x_last) <= gamma * OPT`.
    pub fn ends_within(&self, gamma: f64, opt: f64) -> bool {
        self.final_expected_cost <= gamma * opt
    }
}

impl<'a, P: Problem> Experiment<'a, P> {
    pub fn stream(&self, seed: u64) -> RoundStream {
        RoundStream::new(self.master_seed, seed)
    }

    fn start_solution(&self, stream: &RoundStream) -> P::Solution {
        match self.start {
            StartRule::Canonical => self.problem.start(),
            StartRule::Random => {
                let mut rng = stream.at(StreamPurpose::Policy, 0);
                self.problem.sample_uniform(&mut rng)
            }
        }
    }

    /// Runs one `(policy, seed)` pair for `horizon` rounds, sending every round to `sink`.
    pub fn run_replication<K: TraceSink>(
        &self,
        policy: Policy,
        seed: u64,
        horizon: u64,
        sink: K,
    ) -> Result<(ReplicationSummary<P::Solution>, K), HarnessError> {
        let clock = Instant::now();
        let params = self.params.with_horizon(horizon)?;
        let stream = self.stream(seed);
        let gamma = params.gamma();
        let phased = policy == Policy::BanditLocalSearch;
        let mut acc = RegretAccumulator::new(self.problem, self.env, gamma, self.opt.opt, phased, sink);

        let (final_solution, outcome) = match policy {
            Policy::BanditLocalSearch => {
                let start = self.start_solution(&stream);
                let out = run_bandit_local_search(self.problem, self.env, &params, &stream, start, &mut acc);
                (out.final_solution.clone(), Some(out))
            }
            Policy::ConstantOpt => {
                let x = self.opt.solution.clone();
                self.play_constant(&x, &stream, horizon, &mut acc);
                (x, None)
            }
            Policy::ConstantStart => {
                let x = self.start_solution(&stream);
                self.play_constant(&x, &stream, horizon, &mut acc);
                (x, None)
            }
            Policy::UniformRandom => {
                let mut outcome = Vec::with_capacity(self.env.dimension());
                let mut last = None;
                for round in 1..=horizon {
                    let mut rng = stream.at(StreamPurpose::Policy, round);
                    let x = self.problem.sample_uniform(&mut rng as &mut dyn RngCore);
                    self.env.sample_into(&mut stream.latent(round), &mut outcome);
                    let c = self.problem.cost(&x, &outcome);
                    acc.record(&x, c, 0, None);
                    last = Some(x);
                }
                (last.unwrap_or_else(|| self.problem.start()), None)
            }
        };

        let final_expected_cost = acc.expected_cost_of(&final_solution);
        let summary = ReplicationSummary {
            seed,
            policy,
            horizon,
            final_regret_expected: acc.regret_expected(),
            final_regret_realized: acc.regret_realized(),
            phases: outcome.as_ref().map_or(0, RunOutcome::completed_phases),
            terminated_by: outcome.as_ref().map_or(Termination::Horizon, |o| o.terminated_by),
            final_solution_id: self.problem.solution_id(&final_solution),
            final_solution,
            final_expected_cost,
            outcome,
            wall_time: clock.elapsed(),
        };
        debug_assert_eq!(acc.rounds(), horizon);
        Ok((summary, acc.into_sink()))
    }

    fn play_constant<K: TraceSink>(
        &self,
        x: &P::Solution,
        stream: &RoundStream,
        horizon: u64,
        acc: &mut RegretAccumulator<'_, P, K>,
    ) {
        let mut outcome = Vec::with_capacity(self.env.dimension());
        for round in 1..=horizon {
            self.env.sample_into(&mut stream.latent(round), &mut outcome);
            let c = self.problem.cost(x, &outcome);
            acc.record(x, c, 0, None);
        }
    }

    /// Runs every seed, in parallel when the `parallel` feature is on.
    ///
    /// `make_sink` builds the trace sink for each seed. Results are ordered by seed.
    pub fn run_replications_with<K, F>(
        &self,
        policy: Policy,
        seeds: &[u64],
        horizon: u64,
        make_sink: F,
    ) -> Result<Vec<(ReplicationSummary<P::Solution>, K)>, HarnessError>
    where
        K: TraceSink + Send,
        F: Fn(u64) -> Result<K, HarnessError> + Sync,
        P::Coord: Send + Sync,
    {
        let run = |&seed: &u64| self.run_replication(policy, seed, horizon, make_sink(seed)?);
        #[cfg(feature = "parallel")]
        let results: Result<Vec<_>, _> = {
            use rayon::prelude::*;
            seeds.par_iter().map(run).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let results: Result<Vec<_>, _> = seeds.iter().map(run).collect();
        let mut results = results?;
        results.sort_by_key(|(s, _)| s.seed);
        Ok(results)
    }

    /// As [`Experiment::run_replications_with`], without traces.
    pub fn run_replications(
        &self,
        policy: Policy,
        seeds: &[u64],
        horizon: u64,
    ) -> Result<Vec<ReplicationSummary<P::Solution>>, HarnessError>
    where
        P::Coord: Send + Sync,
    {
        Ok(self
            .run_replications_with(policy, seeds, horizon, |_| Ok(()))?
            .into_iter()
            .map(|(s, ())| s)
            .collect())
    }
}

/// Runs all seeds on the calling thread, whatever the feature set.
pub fn run_replications_sequential<P: Problem>(
    exp: &Experiment<'_, P>,
    policy: Policy,
    seeds: &[u64],
    horizon: u64,
) -> Result<Vec<ReplicationSummary<P::Solution>>, HarnessError> {
    seeds
        .iter()
        .map(|&seed| exp.run_replication(policy, seed, horizon, ()).map(|(s, ())| s))
        .collect()
}
