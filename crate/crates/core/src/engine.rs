//! Phased bandit local search and its neighborhood tester.
//!
//! The engine only ever sees realized costs of the solutions it plays. Exact
//! expected costs are the observers' business.

use serde::Serialize;

use crate::env::Environment;
use crate::params::SearchParams;
use crate::problem::Problem;
use crate::rng::RoundStream;

/// Thresholds below `THETA_FLOOR * c_max` end the search.
pub const THETA_FLOOR: f64 = 1e-300;

/// One played round as reported to observers.
#[derive(Debug)]
pub struct RoundEvent<'a, S> {
    /// 1-based round index.
    pub round: u64,
    pub solution: &'a S,
    pub realized_cost: f64,
    pub phase: u32,
    /// Sub-phase inside a neighborhood test, if any.
    pub subphase: Option<u32>,
}

pub trait RoundObserver<S> {
    fn observe(&mut self, event: &RoundEvent<'_, S>);
}

impl<S> RoundObserver<S> for () {
    #[inline]
    fn observe(&mut self, _event: &RoundEvent<'_, S>) {}
}

impl<S, F: FnMut(&RoundEvent<'_, S>)> RoundObserver<S> for F {
    fn observe(&mut self, event: &RoundEvent<'_, S>) {
        self(event)
    }
}

/// The horizon ran out before an estimate finished.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonExhausted {
    /// Mean of the rounds that did get played, `None` if there were none.
    pub partial_mean: Option<f64>,
    pub rounds: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundClock {
    played: u64,
    horizon: u64,
}

impl RoundClock {
    pub fn new(horizon: u64) -> Self {
        Self { played: 0, horizon }
    }
    pub fn played(&self) -> u64 {
        self.played
    }
    pub fn remaining(&self) -> u64 {
        self.horizon - self.played
    }
    pub fn horizon(&self) -> u64 {
        self.horizon
    }
}

/// Plays solutions against the environment, one latent draw per round.
pub struct Player<'a, P: Problem, O> {
    problem: &'a P,
    env: &'a Environment<P::Coord>,
    stream: &'a RoundStream,
    clock: RoundClock,
    observer: &'a mut O,
    outcome: Vec<P::Coord>,
}

impl<'a, P, O> Player<'a, P, O>
where
    P: Problem,
    O: RoundObserver<P::Solution>,
{
    pub fn new(
        problem: &'a P,
        env: &'a Environment<P::Coord>,
        stream: &'a RoundStream,
        horizon: u64,
        observer: &'a mut O,
    ) -> Self {
        Self {
            problem,
            env,
            stream,
            clock: RoundClock::new(horizon),
            observer,
            outcome: Vec::with_capacity(env.dimension()),
        }
    }

    pub fn clock(&self) -> RoundClock {
        self.clock
    }

    fn play_once(&mut self, x: &P::Solution, phase: u32, subphase: Option<u32>) -> f64 {
        self.clock.played += 1;
        let round = self.clock.played;
        let mut rng = self.stream.latent(round);
        self.env.sample_into(&mut rng, &mut self.outcome);
        let realized_cost = self.problem.cost(x, &self.outcome);
        self.observer.observe(&RoundEvent {
            round,
            solution: x,
            realized_cost,
            phase,
            subphase,
        });
        realized_cost
    }

    /// Plays `x` for `n` rounds and returns the mean realized cost.
    ///
    /// If fewer than `n` rounds remain, plays what is left and reports exhaustion.
    pub fn estimate_cost(
        &mut self,
        x: &P::Solution,
        n: u64,
        phase: u32,
        subphase: Option<u32>,
    ) -> Result<f64, HorizonExhausted> {
        assert!(n >= 1, "estimate needs at least one sample");
        let rounds = n.min(self.clock.remaining());
        let mut total = 0.0;
        for _ in 0..rounds {
            total += self.play_once(x, phase, subphase);
        }
        if rounds < n {
            return Err(HorizonExhausted {
                partial_mean: (rounds > 0).then(|| total / rounds as f64),
                rounds,
            });
        }
        Ok(total / rounds as f64)
    }

    /// Plays `x` until the horizon; returns the number of rounds played.
    pub fn play_remaining(&mut self, x: &P::Solution, phase: u32) -> u64 {
        let rounds = self.clock.remaining();
        for _ in 0..rounds {
            self.play_once(x, phase, None);
        }
        rounds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseDecision {
    KeepCurrent,
    AdoptNeighbor,
    LocalOptimumFound,
    HorizonExhausted,
}

impl PhaseDecision {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseDecision::KeepCurrent => "keep-current",
            PhaseDecision::AdoptNeighbor => "adopt-neighbor",
            PhaseDecision::LocalOptimumFound => "local-optimum-found",
            PhaseDecision::HorizonExhausted => "horizon-exhausted",
        }
    }
}

/// One neighbor's test at one sub-phase.
#[derive(Debug, Clone, PartialEq)]
pub struct SubPhaseRecord<S> {
    pub neighbor: S,
    pub subphase: u32,
    pub sample_count: u64,
    /// Rounds actually played; below `sample_count` only when the horizon ran out.
    pub rounds_played: u64,
    pub estimated_cost: f64,
    pub survived: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLedger<S> {
    pub phase: u32,
    pub theta: f64,
    pub sample_count: u64,
    pub estimated_cost: f64,
    pub decision: PhaseDecision,
    pub adopted: Option<S>,
    pub rounds_consumed: u64,
    pub subphases: Vec<SubPhaseRecord<S>>,
    /// Set when the threshold fell below the floor and the search stopped.
    pub theta_underflow: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    LocalOptimum,
    Horizon,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::LocalOptimum => "local-optimum",
            Termination::Horizon => "horizon",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome<S> {
    /// `x_last`, or the solution in play when the horizon ran out.
    pub final_solution: S,
    pub terminated_by: Termination,
    pub ledger: Vec<PhaseLedger<S>>,
    /// Rounds spent playing `x_last` after the phase loop ended.
    pub trailing_rounds: u64,
    pub total_rounds: u64,
}

impl<S> RunOutcome<S> {
    /// Phases that ran to a decision; an interrupted final phase does not count.
    pub fn completed_phases(&self) -> usize {
        self.ledger
            .iter()
            .filter(|l| l.decision != PhaseDecision::HorizonExhausted)
            .count()
    }
}

/// Successive-elimination test of the neighbors of `current` during `phase`.
///
/// `thetas[i]` is the threshold of phase `i + 1`; at least `phase` entries are needed.
/// Returns the first neighbor that survives every sub-phase, or `None`.
pub fn test_neighborhood<P, O>(
    player: &mut Player<'_, P, O>,
    current: &P::Solution,
    phase: u32,
    params: &SearchParams,
    thetas: &[f64],
    records: &mut Vec<SubPhaseRecord<P::Solution>>,
) -> Result<Option<P::Solution>, HorizonExhausted>
where
    P: Problem,
    O: RoundObserver<P::Solution>,
{
    assert!(phase >= 1 && thetas.len() >= phase as usize);
    for neighbor in player.problem.neighbors(current) {
        let mut survived_all = true;
        for sub in 1..=phase {
            let theta = thetas[sub as usize - 1];
            let n = params.sample_count(theta);
            match player.estimate_cost(&neighbor, n, phase, Some(sub)) {
                Ok(est) => {
                    let survived = est <= params.acceptance_threshold(theta);
                    records.push(SubPhaseRecord {
                        neighbor: neighbor.clone(),
                        subphase: sub,
                        sample_count: n,
                        rounds_played: n,
                        estimated_cost: est,
                        survived,
                    });
                    if !survived {
                        survived_all = false;
                        break;
                    }
                }
                Err(e) => {
                    records.push(SubPhaseRecord {
                        neighbor: neighbor.clone(),
                        subphase: sub,
                        sample_count: n,
                        rounds_played: e.rounds,
                        estimated_cost: e.partial_mean.unwrap_or(f64::NAN),
                        survived: false,
                    });
                    return Err(e);
                }
            }
        }
        if survived_all {
            return Ok(Some(neighbor));
        }
    }
    Ok(None)
}

/// Runs the phased search from `start` for exactly `params.horizon()` rounds.
pub fn run_bandit_local_search<P, O>(
    problem: &P,
    env: &Environment<P::Coord>,
    params: &SearchParams,
    stream: &RoundStream,
    start: P::Solution,
    observer: &mut O,
) -> RunOutcome<P::Solution>
where
    P: Problem,
    O: RoundObserver<P::Solution>,
{
    let mut player = Player::new(problem, env, stream, params.horizon(), observer);
    let mut ledger = Vec::new();
    let mut thetas = Vec::new();
    let mut x = start;
    let mut theta = params.c_max();
    let mut trailing_rounds = 0;
    let mut terminated_by = Termination::Horizon;

    for phase in 1u32.. {
        thetas.push(theta);
        let phase_start = player.clock().played();

        if theta < THETA_FLOOR * params.c_max() {
            ledger.push(PhaseLedger {
                phase,
                theta,
                sample_count: 0,
                estimated_cost: f64::NAN,
                decision: PhaseDecision::LocalOptimumFound,
                adopted: None,
                rounds_consumed: 0,
                subphases: Vec::new(),
                theta_underflow: true,
            });
            trailing_rounds = player.play_remaining(&x, phase);
            terminated_by = Termination::LocalOptimum;
            break;
        }

        let n = params.sample_count(theta);
        let mut entry = PhaseLedger {
            phase,
            theta,
            sample_count: n,
            estimated_cost: f64::NAN,
            decision: PhaseDecision::HorizonExhausted,
            adopted: None,
            rounds_consumed: 0,
            subphases: Vec::new(),
            theta_underflow: false,
        };

        let est = match player.estimate_cost(&x, n, phase, None) {
            Ok(est) => est,
            Err(e) => {
                entry.estimated_cost = e.partial_mean.unwrap_or(f64::NAN);
                entry.rounds_consumed = player.clock().played() - phase_start;
                ledger.push(entry);
                break;
            }
        };
        entry.estimated_cost = est;

        let mut found_local_optimum = false;
        if est > params.acceptance_threshold(theta) {
            match test_neighborhood(&mut player, &x, phase, params, &thetas, &mut entry.subphases) {
                Err(_) => {
                    entry.rounds_consumed = player.clock().played() - phase_start;
                    ledger.push(entry);
                    break;
                }
                Ok(None) => {
                    entry.decision = PhaseDecision::LocalOptimumFound;
                    found_local_optimum = true;
                }
                Ok(Some(neighbor)) => {
                    entry.decision = PhaseDecision::AdoptNeighbor;
                    entry.adopted = Some(neighbor.clone());
                    x = neighbor;
                }
            }
        } else {
            entry.decision = PhaseDecision::KeepCurrent;
        }
        entry.rounds_consumed = player.clock().played() - phase_start;
        ledger.push(entry);

        if found_local_optimum {
            trailing_rounds = player.play_remaining(&x, phase);
            terminated_by = Termination::LocalOptimum;
            break;
        }
        if player.clock().remaining() == 0 {
            break;
        }
        theta *= params.alpha();
    }

    let total_rounds = player.clock().played();
    debug_assert_eq!(total_rounds, params.horizon());
    RunOutcome {
        final_solution: x,
        terminated_by,
        ledger,
        trailing_rounds,
        total_rounds,
    }
}
