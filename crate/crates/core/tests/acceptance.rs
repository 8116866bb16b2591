//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! process exits nonzero if any check fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{bernoulli, instances, scenarios, Arms};
use lsbandit::engine::Player;
use lsbandit::env::Environment;
use lsbandit::harness::{
    compute_opt, regret_growth_diagnostic, CsvTrace, Experiment, Policy, ReplicationSummary,
    StartRule, POLYLOG_EXPONENT, LINEAR_EXPONENT,
};
use lsbandit::offline::{offline_local_search, verify_improving_moves};
use lsbandit::problem::Problem;
use lsbandit::problems::kmedian::{kmedian_params, KMedianProblem};
use lsbandit::problems::matroid::{matroid_params, GraphicMatroid, MatroidKind, MatroidProblem};
use lsbandit::problems::scheduling::{scheduling_params, SchedulingProblem};
use lsbandit::problems::Recipe;
use lsbandit::{derive_params, RoundStream, SearchParams};

const CERTIFICATE_BUDGET: Duration = Duration::from_secs(300);
const QUALITY_HORIZON: u64 = 1_000_000;
const QUALITY_SEEDS: u64 = 100;
const QUALITY_REQUIRED: usize = 99;
const GROWTH_HORIZONS: [u64; 3] = [10_000, 100_000, 1_000_000];
const GROWTH_SEEDS: u64 = 30;
const GROWTH_RATIO: f64 = 50.0;
const CONCENTRATION_TRIALS: u64 = 20_000;
const IDENTITY_TOLERANCE: f64 = 1e-9;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }
}

/// Problem, environment and recipe for every certificate instance.
struct Certified {
    scheduling: Vec<(SchedulingProblem, Environment<f64>, Recipe)>,
    matroids: Vec<(MatroidProblem, Environment<f64>, Recipe)>,
    kmedians: Vec<(KMedianProblem, Environment<usize>, Recipe)>,
}

fn certified_instances() -> Certified {
    let mut rng = instances::rng(2024);
    let epsilons = [0.25, 0.5];
    let scheduling = (0..200)
        .map(|i| {
            let n = 3 + i % 4;
            let (p, env) = instances::scheduling(&mut rng, n);
            (p, env, scheduling_params(n, epsilons[(i / 4) % 2]).unwrap())
        })
        .collect();
    let matroids = (0..100)
        .map(|i| {
            let (p, env) = instances::graphic(&mut rng, 2 + i % 5);
            let r = matroid_params(p.ground_size(), p.rank(), epsilons[(i / 5) % 2]).unwrap();
            (p, env, r)
        })
        .collect();
    let kmedians = (0..50)
        .map(|i| {
            let n = 2 + i % 3;
            let k = 1 + (i / 3) % 2;
            let m = k + 1 + (i / 6) % (6 - k);
            let (p, env) = instances::kmedian(&mut rng, n, m, k);
            (p, env, kmedian_params(n, m, Some(k)).unwrap())
        })
        .collect();
    Certified { scheduling, matroids, kmedians }
}

/// Witness ids of instances that fail the certificate.
fn certificate_violations<P: Problem>(set: &[(P, Environment<P::Coord>, Recipe)]) -> Vec<String> {
    let mut bad = Vec::new();
    for (i, (p, env, r)) in set.iter().enumerate() {
        let cost = |x: &P::Solution| env.expected_cost(p, x).unwrap();
        match verify_improving_moves(p, cost, r.beta, r.gamma, 1_000_000) {
            Ok(v) if v.holds => {}
            Ok(v) => bad.push(format!("#{i} at {}", p.solution_id(&v.witness.unwrap().0))),
            Err(e) => bad.push(format!("#{i}: {e}")),
        }
    }
    bad
}

/// `(starts checked, violations)` of offline search from every feasible start.
fn round_trip<P: Problem>(set: &[(P, Environment<P::Coord>, Recipe)]) -> (usize, Vec<String>) {
    let mut starts = 0;
    let mut bad = Vec::new();
    for (i, (p, env, r)) in set.iter().enumerate() {
        let cost = |x: &P::Solution| env.expected_cost(p, x).unwrap();
        let all = p.enumerate(1_000_000).unwrap();
        let opt = all.iter().map(cost).fold(f64::INFINITY, f64::min);
        for x0 in all {
            starts += 1;
            let out = offline_local_search(p, cost, r.beta, x0.clone()).unwrap();
            if out.final_cost() > r.gamma * opt {
                bad.push(format!("#{i} from {}", p.solution_id(&x0)));
            }
        }
    }
    (starts, bad)
}

fn jobs() -> (SchedulingProblem, Environment<f64>) {
    let env = scenarios(vec![vec![1.0, 0.05, 0.1], vec![1.0, 0.05, 0.0]], vec![0.5, 0.5]);
    (SchedulingProblem::new(3), env)
}

fn triangle() -> (MatroidProblem, Environment<f64>) {
    let g = GraphicMatroid::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
    let env = scenarios(vec![vec![1.0, 0.2, 0.0], vec![0.6, 0.4, 0.2]], vec![0.5, 0.5]);
    (MatroidProblem::new(MatroidKind::Graphic(g)).unwrap(), env)
}

/// Four sites on a line, every site a candidate, three points.
fn line_median() -> (KMedianProblem, Environment<usize>) {
    let xs = [0.0, 0.3, 0.6, 1.0];
    let d = xs.iter().map(|a: &f64| xs.iter().map(|b| (a - b).abs()).collect()).collect();
    let env = scenarios(vec![vec![3, 3, 2], vec![3, 2, 3]], vec![0.5, 0.5]);
    (KMedianProblem::new(d, vec![0, 1, 2, 3], 3, 1).unwrap(), env)
}

const JOBS_BETA: f64 = 0.58;
const TRIANGLE_BETA: f64 = 0.46;
const MEDIAN_BETA: f64 = 0.51;
const GAMMA: f64 = 1.0;

fn experiment<'a, P: Problem>(
    p: &'a P,
    env: &'a Environment<P::Coord>,
    beta: f64,
    horizon: u64,
) -> Experiment<'a, P> {
    let params = derive_params(beta, GAMMA, horizon, env.cost_bound(p).unwrap(), p.max_neighborhood()).unwrap();
    let opt = compute_opt(p, env, 100_000, beta).unwrap();
    assert!(opt.exact);
    Experiment { problem: p, env, params, opt, start: StartRule::Canonical, master_seed: 0 }
}

/// Confirms the instance admits improving moves at the parameters it runs with.
fn admits_moves<P: Problem>(p: &P, env: &Environment<P::Coord>, beta: f64) -> bool {
    let cost = |x: &P::Solution| env.expected_cost(p, x).unwrap();
    verify_improving_moves(p, cost, beta, GAMMA, 1_000_000).unwrap().holds
}

/// Phase count and sample-count checks over the ledger of every bandit run.
#[derive(Default)]
struct LedgerAudit {
    runs: usize,
    phases: usize,
    phase_violations: Vec<String>,
    sample_mismatches: Vec<String>,
}

impl LedgerAudit {
    fn add<S>(&mut self, label: &str, params: &SearchParams, s: &ReplicationSummary<S>) {
        let out = s.outcome.as_ref().expect("bandit runs keep their ledger");
        let params = params.with_horizon(s.horizon).unwrap();
        self.runs += 1;
        let bound = (s.horizon as f64).ln() / (1.0 / params.alpha()).ln() + 1.0;
        if out.completed_phases() as f64 > bound {
            self.phase_violations
                .push(format!("{label} T={} seed {}: {} > {bound:.2}", s.horizon, s.seed, out.completed_phases()));
        }
        let recompute = |theta: f64| {
            let t = s.horizon as f64;
            let m = params.max_neighborhood() as f64;
            let (a, d) = (params.beta().sqrt(), (1.0 - params.beta().sqrt()) / (1.0 + params.beta().sqrt()));
            let n = (3.0 * params.c_max() * (4.0 * t.ln() + m.ln()) / (d * d * a * a * theta)).ceil();
            n.max(1.0) as u64
        };
        for l in &out.ledger {
            self.phases += 1;
            if l.sample_count != recompute(l.theta) {
                self.sample_mismatches.push(format!(
                    "{label} seed {} phase {}: {} vs {}",
                    s.seed, l.phase, l.sample_count, recompute(l.theta)
                ));
            }
            for r in &l.subphases {
                let theta = params.c_max() * params.alpha().powi(r.subphase as i32 - 1);
                if r.sample_count != recompute(theta) {
                    self.sample_mismatches
                        .push(format!("{label} seed {} subphase {}: {}", s.seed, r.subphase, r.sample_count));
                }
            }
        }
    }
}

fn quality<P: Problem>(
    report: &mut Report,
    audit: &mut LedgerAudit,
    label: &str,
    p: &P,
    env: &Environment<P::Coord>,
    beta: f64,
) where
    P::Coord: Send + Sync,
{
    let clock = Instant::now();
    let exp = experiment(p, env, beta, QUALITY_HORIZON);
    let seeds: Vec<u64> = (0..QUALITY_SEEDS).collect();
    let runs = exp.run_replications(Policy::BanditLocalSearch, &seeds, QUALITY_HORIZON).unwrap();
    let good = runs.iter().filter(|s| s.ends_within(GAMMA, exp.opt.opt)).count();
    for s in &runs {
        audit.add(label, &exp.params, s);
    }
    let moves = admits_moves(p, env, beta);
    report.line(
        &format!("terminal quality, {label}"),
        moves && good >= QUALITY_REQUIRED,
        format!(
            "{good}/{QUALITY_SEEDS} runs end within gamma*OPT (OPT {:.4}, beta {beta}, gamma {GAMMA}, improving moves {}) in {:.1?}",
            exp.opt.opt,
            if moves { "hold" } else { "fail" },
            clock.elapsed()
        ),
    );
}

fn growth(report: &mut Report, audit: &mut LedgerAudit) {
    let clock = Instant::now();
    let (p, env) = jobs();
    let exp = experiment(&p, &env, JOBS_BETA, GROWTH_HORIZONS[0]);
    let seeds: Vec<u64> = (0..GROWTH_SEEDS).collect();
    let sample = |policy, audit: &mut LedgerAudit| {
        GROWTH_HORIZONS
            .iter()
            .map(|&t| {
                let runs = exp.run_replications(policy, &seeds, t).unwrap();
                if policy == Policy::BanditLocalSearch {
                    for s in &runs {
                        audit.add("3 jobs", &exp.params, s);
                    }
                }
                (t, runs.iter().map(|s| s.final_regret_expected).collect::<Vec<_>>())
            })
            .collect::<Vec<_>>()
    };
    let bandit = regret_growth_diagnostic(&sample(Policy::BanditLocalSearch, audit));
    let uniform = regret_growth_diagnostic(&sample(Policy::UniformRandom, audit));
    match (bandit, uniform) {
        (Ok(b), Ok(u)) => {
            let ratio = u.final_mean() / b.final_mean();
            let means: Vec<String> = b.points.iter().map(|pt| format!("{:.0}", pt.mean_regret)).collect();
            report.line(
                "regret growth, 3 jobs",
                b.exponent <= POLYLOG_EXPONENT && u.exponent >= LINEAR_EXPONENT && ratio >= GROWTH_RATIO,
                format!(
                    "bandit rho {:.3} (need <= {POLYLOG_EXPONENT}), uniform rho {:.3} (need >= {LINEAR_EXPONENT}), \
                     uniform/bandit at T=1e6 {ratio:.1} (need >= {GROWTH_RATIO}); bandit means [{}] in {:.1?}",
                    b.exponent,
                    u.exponent,
                    means.join(", "),
                    clock.elapsed()
                ),
            );
        }
        (b, u) => report.line("regret growth, 3 jobs", false, format!("no fit: {:?} / {:?}", b.err(), u.err())),
    }
}

fn concentration(report: &mut Report) {
    let clock = Instant::now();
    let params = derive_params(0.25, 1.0, 50, 1.0, 4).unwrap();
    let theta = params.c_max();
    let n = params.sample_count(theta);
    let thr = params.acceptance_threshold(theta);
    let alpha = params.alpha();
    let bound = 1.0 / (4.0 * 50f64.powi(4));
    let slack = 3.0 * (bound * (1.0 - bound) / CONCENTRATION_TRIALS as f64).sqrt();
    let arms = Arms::complete(2);
    let env = bernoulli(&[alpha * alpha * theta, alpha * theta]);
    let mut freq = [0.0; 2];
    for (arm, f) in freq.iter_mut().enumerate() {
        let mut hits = 0u64;
        for trial in 0..CONCENTRATION_TRIALS {
            let stream = RoundStream::new(arm as u64, trial);
            let mut obs = ();
            let mut player = Player::new(&arms, &env, &stream, n, &mut obs);
            let est = player.estimate_cost(&arm, n, 1, None).unwrap();
            // low-cost arm: estimate above the threshold; high-cost arm: at or below it
            if (arm == 0 && est > thr) || (arm == 1 && est <= thr) {
                hits += 1;
            }
        }
        *f = hits as f64 / CONCENTRATION_TRIALS as f64;
    }
    let limit = bound + slack;
    report.line(
        "concentration at T=50, M=4",
        freq[0] <= limit && freq[1] <= limit,
        format!(
            "N={n}, threshold {thr:.4}: cost alpha^2 theta exceeds in {:.2e}, cost alpha theta stays below in {:.2e} \
             of {CONCENTRATION_TRIALS} trials (limit {limit:.2e}) in {:.1?}",
            freq[0],
            freq[1],
            clock.elapsed()
        ),
    );
}

/// Largest identity residual over every row of a CSV trace.
fn identity_residual(csv: &str, gamma: f64, opt: f64) -> (usize, f64) {
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let t: f64 = f[0].parse().unwrap();
        let cum: f64 = f[6].parse().unwrap();
        let realized: f64 = f[7].parse().unwrap();
        worst = worst.max((realized - (cum - gamma * t * opt)).abs());
        rows += 1;
    }
    (rows, worst)
}

fn accounting<P: Problem>(exp: &Experiment<'_, P>, horizon: u64) -> (usize, f64, bool) {
    let mut rows = 0;
    let mut worst: f64 = 0.0;
    let mut identical = true;
    for policy in Policy::ALL {
        for seed in 0..3 {
            let trace = || {
                let sink = CsvTrace::new(Vec::new(), exp.params.gamma(), exp.opt.opt);
                let (_, sink) = exp.run_replication(policy, seed, horizon, sink).unwrap();
                sink.finish().unwrap()
            };
            let a = trace();
            identical &= a == trace();
            let (n, w) = identity_residual(std::str::from_utf8(&a).unwrap(), exp.params.gamma(), exp.opt.opt);
            rows += n;
            worst = worst.max(w);
        }
    }
    (rows, worst, identical)
}

fn main() -> ExitCode {
    let mut report = Report { failures: 0 };

    let clock = Instant::now();
    let set = certified_instances();
    let mut bad = certificate_violations(&set.scheduling);
    bad.extend(certificate_violations(&set.matroids));
    bad.extend(certificate_violations(&set.kmedians));
    let elapsed = clock.elapsed();
    report.line(
        "improving-moves certificates",
        bad.is_empty() && elapsed < CERTIFICATE_BUDGET,
        format!(
            "{} scheduling, {} graphic matroid, {} k-median instances; {} violations {:?} in {elapsed:.1?}",
            set.scheduling.len(),
            set.matroids.len(),
            set.kmedians.len(),
            bad.len(),
            bad
        ),
    );

    let (mut starts, mut bad) = round_trip(&set.scheduling);
    for (s, b) in [round_trip(&set.matroids), round_trip(&set.kmedians)] {
        starts += s;
        bad.extend(b);
    }
    report.line(
        "offline round trip",
        bad.is_empty(),
        format!("{starts} starts, {} end above gamma*OPT {:?}", bad.len(), bad),
    );

    let mut audit = LedgerAudit::default();
    let (p, env) = jobs();
    quality(&mut report, &mut audit, "3 jobs", &p, &env, JOBS_BETA);
    let (p, env) = triangle();
    quality(&mut report, &mut audit, "triangle matroid", &p, &env, TRIANGLE_BETA);
    let (p, env) = line_median();
    quality(&mut report, &mut audit, "k-median n=3 m=4 k=1", &p, &env, MEDIAN_BETA);

    growth(&mut report, &mut audit);

    report.line(
        "phase bound",
        audit.runs > 0 && audit.phase_violations.is_empty(),
        format!("{} bandit runs, {} violations {:?}", audit.runs, audit.phase_violations.len(), audit.phase_violations),
    );
    report.line(
        "sample counts",
        audit.phases > 0 && audit.sample_mismatches.is_empty(),
        format!(
            "{} phases recomputed, {} mismatches {:?}",
            audit.phases,
            audit.sample_mismatches.len(),
            audit.sample_mismatches
        ),
    );

    concentration(&mut report);

    let (p, env) = jobs();
    let (mut rows, mut worst, mut identical) = accounting(&experiment(&p, &env, JOBS_BETA, 100_000), 100_000);
    let (p, env) = triangle();
    let (r, w, i) = accounting(&experiment(&p, &env, TRIANGLE_BETA, 100_000), 100_000);
    rows += r;
    worst = worst.max(w);
    identical &= i;
    let (p, env) = line_median();
    let (r, w, i) = accounting(&experiment(&p, &env, MEDIAN_BETA, 100_000), 100_000);
    rows += r;
    worst = worst.max(w);
    identical &= i;
    report.line(
        "accounting identity and replay",
        worst <= IDENTITY_TOLERANCE && identical,
        format!(
            "{rows} rows, largest residual {worst:.2e} (limit {IDENTITY_TOLERANCE:e}), reruns {}",
            if identical { "byte-identical" } else { "differ" }
        ),
    );

    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{} check(s) failed", report.failures);
        ExitCode::FAILURE
    }
}
