//! Per-round regret accounting and trace sinks.

use std::collections::HashMap;
use std::io::{self, Write};

use crate::engine::{RoundEvent, RoundObserver};
use crate::env::Environment;
use crate::problem::Problem;

pub const TRACE_HEADER: &str = "t,solution_id,realized_cost,expected_cost,phase,subphase,cum_cost,cum_gamma_regret_realized,cum_gamma_regret_expected";

/// Largest tolerated gap in the accounting identity of an emitted row.
pub const ACCOUNTING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow<'a> {
    pub t: u64,
    pub solution_id: &'a str,
    pub realized_cost: f64,
    pub expected_cost: f64,
    pub phase: Option<u32>,
    pub subphase: Option<u32>,
    pub cum_cost: f64,
    pub cum_gamma_regret_realized: f64,
    pub cum_gamma_regret_expected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OwnedTraceRow {
    pub t: u64,
    pub solution_id: String,
    pub realized_cost: f64,
    pub expected_cost: f64,
    pub phase: Option<u32>,
    pub subphase: Option<u32>,
    pub cum_cost: f64,
    pub cum_gamma_regret_realized: f64,
    pub cum_gamma_regret_expected: f64,
}

impl From<&TraceRow<'_>> for OwnedTraceRow {
    fn from(r: &TraceRow<'_>) -> Self {
        Self {
            t: r.t,
            solution_id: r.solution_id.to_owned(),
            realized_cost: r.realized_cost,
            expected_cost: r.expected_cost,
            phase: r.phase,
            subphase: r.subphase,
            cum_cost: r.cum_cost,
            cum_gamma_regret_realized: r.cum_gamma_regret_realized,
            cum_gamma_regret_expected: r.cum_gamma_regret_expected,
        }
    }
}

/// Receives every round of a replication, in order.
pub trait TraceSink {
    fn row(&mut self, row: &TraceRow<'_>);
}

impl TraceSink for () {
    #[inline]
    fn row(&mut self, _row: &TraceRow<'_>) {}
}

impl TraceSink for Vec<OwnedTraceRow> {
    fn row(&mut self, row: &TraceRow<'_>) {
        self.push(row.into());
    }
}

/// Writes `{:.16e}`, i.e. 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_field(v: Option<u32>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV trace writer. The first I/O error is kept and reported by [`CsvTrace::finish`].
pub struct CsvTrace<W: Write> {
    out: W,
    gamma_opt: f64,
    error: Option<io::Error>,
}

impl<W: Write> CsvTrace<W> {
    pub fn new(mut out: W, gamma: f64, opt: f64) -> Self {
        let error = writeln!(out, "{TRACE_HEADER}").err();
        Self {
            out,
            gamma_opt: gamma * opt,
            error,
        }
    }

    pub fn finish(mut self) -> io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> TraceSink for CsvTrace<W> {
    fn row(&mut self, r: &TraceRow<'_>) {
        if self.error.is_some() {
            return;
        }
        let identity = r.cum_cost - self.gamma_opt * r.t as f64;
        assert!(
            (r.cum_gamma_regret_realized - identity).abs() <= ACCOUNTING_TOLERANCE,
            "accounting identity broken at round {}",
            r.t
        );
        let res = writeln!(
            self.out,
            "{},{},{},{},{},{},{},{},{}",
            r.t,
            r.solution_id,
            format_float(r.realized_cost),
            format_float(r.expected_cost),
            opt_field(r.phase),
            opt_field(r.subphase),
            format_float(r.cum_cost),
            format_float(r.cum_gamma_regret_realized),
            format_float(r.cum_gamma_regret_expected),
        );
        self.error = res.err();
    }
}

/// Turns played rounds into regret rows, caching exact expected costs per solution.
pub struct RegretAccumulator<'a, P: Problem, K> {
    problem: &'a P,
    env: &'a Environment<P::Coord>,
    gamma: f64,
    opt: f64,
    phased: bool,
    cache: HashMap<P::Solution, (String, f64)>,
    last: Option<(P::Solution, String, f64)>,
    rounds: u64,
    cum_cost: f64,
    cum_expected: f64,
    sink: K,
}

impl<'a, P: Problem, K: TraceSink> RegretAccumulator<'a, P, K> {
    /// `phased` controls whether phase numbers are reported in the rows.
    pub fn new(
        problem: &'a P,
        env: &'a Environment<P::Coord>,
        gamma: f64,
        opt: f64,
        phased: bool,
        sink: K,
    ) -> Self {
        Self {
            problem,
            env,
            gamma,
            opt,
            phased,
            cache: HashMap::new(),
            last: None,
            rounds: 0,
            cum_cost: 0.0,
            cum_expected: 0.0,
            sink,
        }
    }

    /// Makes `x` the cached last solution and returns its expected cost.
    fn lookup(&mut self, x: &P::Solution) -> f64 {
        if let Some((s, _, c)) = &self.last {
            if s == x {
                return *c;
            }
        }
        let (id, c) = self
            .cache
            .entry(x.clone())
            .or_insert_with(|| {
                let c = self
                    .env
                    .expected_cost(self.problem, x)
                    .expect("environment validated for this problem");
                (self.problem.solution_id(x), c)
            })
            .clone();
        self.last = Some((x.clone(), id, c));
        c
    }

    pub fn record(&mut self, x: &P::Solution, realized_cost: f64, phase: u32, subphase: Option<u32>) {
        let expected = self.lookup(x);
        self.rounds += 1;
        let t = self.rounds;
        self.cum_cost += realized_cost;
        self.cum_expected += expected;
        let baseline = self.gamma * t as f64 * self.opt;
        let solution_id = self.last.as_ref().map_or("", |(_, id, _)| id.as_str());
        self.sink.row(&TraceRow {
            t,
            solution_id,
            realized_cost,
            expected_cost: expected,
            phase: self.phased.then_some(phase),
            subphase: subphase.filter(|_| self.phased),
            cum_cost: self.cum_cost,
            cum_gamma_regret_realized: self.cum_cost - baseline,
            cum_gamma_regret_expected: self.cum_expected - baseline,
        });
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn cum_cost(&self) -> f64 {
        self.cum_cost
    }

    pub fn regret_realized(&self) -> f64 {
        self.cum_cost - self.gamma * self.rounds as f64 * self.opt
    }

    pub fn regret_expected(&self) -> f64 {
        self.cum_expected - self.gamma * self.rounds as f64 * self.opt
    }

    /// Exact expected cost of `x`, through the same cache.
    pub fn expected_cost_of(&mut self, x: &P::Solution) -> f64 {
        self.lookup(x)
    }

    pub fn into_sink(self) -> K {
        self.sink
    }
}

impl<P: Problem, K: TraceSink> RoundObserver<P::Solution> for RegretAccumulator<'_, P, K> {
    fn observe(&mut self, e: &RoundEvent<'_, P::Solution>) {
        self.record(e.solution, e.realized_cost, e.phase, e.subphase);
    }
}

impl<K: TraceSink> TraceSink for Option<K> {
    fn row(&mut self, row: &TraceRow<'_>) {
        if let Some(k) = self {
            k.row(row);
        }
    }
}
