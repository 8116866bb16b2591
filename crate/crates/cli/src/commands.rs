use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use lsbandit::config::{ConfigError, ResolvedParams, RunConfig};
use lsbandit::engine::RunOutcome;
use lsbandit::env::Environment;
use lsbandit::harness::{
    compute_opt, format_float, write_summary, CsvTrace, Experiment, HarnessError,
    ReplicationSummary,
};
use lsbandit::instance::Instance;
use lsbandit::offline::{offline_local_search, verify_improving_moves};
use lsbandit::problem::Problem;

use crate::output::OutputDir;
use crate::CliError;

fn invalid(e: impl ToString) -> CliError {
    CliError::Invalid(e.to_string())
}

fn internal(e: impl ToString) -> CliError {
    CliError::Internal(e.to_string())
}

fn config_error(e: ConfigError) -> CliError {
    match e {
        ConfigError::Io(e) => CliError::Invalid(format!("cannot read config: {e}")),
        other => invalid(other),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    Instance::load(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

macro_rules! with_instance {
    ($inst:expr, |$p:ident, $env:ident| $body:expr) => {
        match $inst {
            Instance::Scheduling($p, $env) => $body,
            Instance::Matroid($p, $env) => $body,
            Instance::KMedian($p, $env) => $body,
        }
    };
}

pub fn run(
    config_path: &Path,
    out: Option<PathBuf>,
    workers: Option<usize>,
    budget: Option<usize>,
) -> Result<(), CliError> {
    let config_bytes = read(config_path)?;
    let cfg = RunConfig::load(config_path).map_err(config_error)?;
    let instance_bytes = read(&cfg.instance)?;
    let instance = load_instance(&cfg.instance)?;
    let resolved = cfg.resolve(&instance).map_err(config_error)?;
    let root = out
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| invalid("no output directory: pass --out or set `output`"))?;
    let budget = budget.unwrap_or(cfg.budgets.opt);

    let mut annotations = Vec::new();
    if let Instance::KMedian(p, _) = &instance {
        let m2 = (p.candidate_count() as u64).pow(2);
        for &t in cfg.horizons.iter().filter(|&&t| m2 > t) {
            annotations.push(format!("horizon {t} is below m^2 = {m2}"));
        }
    }

    let mut dir = OutputDir::create(&root).map_err(internal)?;
    let mut job = || -> Result<Value, CliError> {
        with_instance!(&instance, |p, env| run_problem(p, env, &cfg, &resolved, budget, &mut dir))
    };
    let runs = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(internal)?
            .install(job)?,
        None => job()?,
    };

    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": { "path": config_path.display().to_string(), "sha256": sha256_hex(&config_bytes) },
        "instance": {
            "path": cfg.instance.display().to_string(),
            "problem": instance.kind(),
            "sha256": sha256_hex(&instance_bytes),
        },
        "master_seed": cfg.master_seed,
        "seed_derivation": cfg.seeds.describe(),
        "stream_derivation": "ChaCha8 keyed by master_seed; stream id 2*seed + purpose (0 latent, 1 policy); word offset round << 32",
        "seeds": cfg.seed_list(),
        "annotations": annotations,
        "runs": runs,
    });
    let mut f = dir.file("manifest.json").map_err(internal)?;
    serde_json::to_writer_pretty(&mut f, &manifest).map_err(internal)?;
    writeln!(f).and_then(|_| f.flush()).map_err(internal)?;
    dir.commit();
    println!("wrote {}", root.display());
    Ok(())
}

fn harness_error(e: HarnessError) -> CliError {
    match e {
        HarnessError::Io(e) => internal(e),
        HarnessError::Param(e) => invalid(lsbandit::config::param_field_error(&e)),
        other => invalid(other),
    }
}

fn run_problem<P: Problem>(
    problem: &P,
    env: &Environment<P::Coord>,
    cfg: &RunConfig,
    resolved: &ResolvedParams,
    budget: usize,
    dir: &mut OutputDir,
) -> Result<Value, CliError> {
    let opt = compute_opt(problem, env, budget, resolved.beta).map_err(harness_error)?;
    let cost = |x: &P::Solution| env.expected_cost(problem, x).expect("validated environment");
    let moves = match verify_improving_moves(problem, cost, resolved.beta, resolved.gamma, cfg.budgets.verify) {
        Ok(v) if v.holds => "holds".to_owned(),
        Ok(v) => format!("violated at {}", problem.solution_id(&v.witness.expect("violation has a witness").0)),
        Err(e) => format!("undecided: {e}"),
    };
    let seeds = cfg.seed_list();
    let mut summaries: Vec<ReplicationSummary<P::Solution>> = Vec::new();
    let mut files = vec!["summary.csv".to_owned()];
    let mut horizons = Vec::new();

    for &horizon in &cfg.horizons {
        let params = resolved.search_params(problem, env, horizon).map_err(config_error)?;
        let exp = Experiment {
            problem,
            env,
            params: params.clone(),
            opt: opt.clone(),
            start: cfg.start,
            master_seed: cfg.master_seed,
        };
        for &policy in &cfg.policies {
            let mut paths = Vec::new();
            if cfg.write_traces {
                for &seed in &seeds {
                    let rel = format!("traces/{policy}-T{horizon}-seed{seed}.csv");
                    paths.push((seed, dir.register(&rel).map_err(internal)?));
                    files.push(rel);
                }
            }
            let gamma = params.gamma();
            let results = exp
                .run_replications_with(policy, &seeds, horizon, |seed| {
                    match paths.iter().find(|(s, _)| *s == seed) {
                        Some((_, path)) => {
                            let f = File::create(path)?;
                            Ok(Some(CsvTrace::new(BufWriter::new(f), gamma, opt.opt)))
                        }
                        None => Ok(None),
                    }
                })
                .map_err(harness_error)?;
            for (summary, sink) in results {
                if let Some(sink) = sink {
                    sink.finish().map_err(internal)?;
                }
                if let Some(outcome) = &summary.outcome {
                    let rel = format!("ledgers/T{horizon}-seed{}.csv", summary.seed);
                    let mut f = dir.file(&rel).map_err(internal)?;
                    write_ledger(&mut f, problem, outcome).map_err(internal)?;
                    files.push(rel);
                }
                summaries.push(summary);
            }
        }
        horizons.push(json!({
            "T": horizon,
            "beta": params.beta(),
            "gamma": params.gamma(),
            "alpha": params.alpha(),
            "delta": params.delta(),
            "c_max": params.c_max(),
            "max_neighborhood": params.max_neighborhood(),
        }));
    }

    let mut f = dir.file("summary.csv").map_err(internal)?;
    write_summary(&mut f, &summaries).map_err(internal)?;
    files.push("manifest.json".to_owned());
    Ok(json!({
        "opt": format_float(opt.opt),
        "opt_exact": opt.exact,
        "opt_solution": problem.solution_id(&opt.solution),
        "improving_moves": moves,
        "policies": cfg.policies.iter().map(|p| p.as_str()).collect::<Vec<_>>(),
        "horizons": horizons,
        "files": files,
    }))
}

fn write_ledger<P: Problem, W: Write>(
    out: &mut W,
    problem: &P,
    outcome: &RunOutcome<P::Solution>,
) -> std::io::Result<()> {
    writeln!(
        out,
        "phase,theta,sample_count,estimated_cost,decision,adopted,rounds_consumed,neighbors_tested,theta_underflow"
    )?;
    for l in &outcome.ledger {
        let tested = {
            let mut seen: Vec<&P::Solution> = Vec::new();
            for r in &l.subphases {
                if !seen.contains(&&r.neighbor) {
                    seen.push(&r.neighbor);
                }
            }
            seen.len()
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            l.phase,
            format_float(l.theta),
            l.sample_count,
            format_float(l.estimated_cost),
            l.decision.as_str(),
            l.adopted.as_ref().map(|x| problem.solution_id(x)).unwrap_or_default(),
            l.rounds_consumed,
            tested,
            l.theta_underflow,
        )?;
    }
    out.flush()
}

pub fn verify(
    instance_path: &Path,
    beta: Option<f64>,
    gamma: Option<f64>,
    epsilon: Option<f64>,
    budget: usize,
) -> Result<(), CliError> {
    let instance = load_instance(instance_path)?;
    let (beta, gamma) = match (beta, gamma, epsilon) {
        (Some(b), Some(g), None) => (b, g),
        (None, None, Some(e)) => {
            let r = instance.recipe(e).map_err(invalid)?;
            (r.beta, r.gamma)
        }
        _ => return Err(invalid("give --beta and --gamma, or --epsilon")),
    };
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!("beta = {beta} is outside (0, 1)")));
    }
    if !(gamma >= 1.0) {
        return Err(invalid(format!("gamma = {gamma} is below 1")));
    }
    with_instance!(&instance, |p, env| verify_problem(p, env, beta, gamma, budget))
}

fn verify_problem<P: Problem>(
    problem: &P,
    env: &Environment<P::Coord>,
    beta: f64,
    gamma: f64,
    budget: usize,
) -> Result<(), CliError> {
    let cost = |x: &P::Solution| env.expected_cost(problem, x).expect("validated environment");
    let v = verify_improving_moves(problem, cost, beta, gamma, budget)
        .map_err(|e| CliError::Undecided(e.to_string()))?;
    println!("beta = {beta}, gamma = {gamma}, OPT = {}, solutions = {}", v.opt, v.solutions_checked);
    match v.witness {
        None => println!("holds"),
        Some((x, c)) => println!(
            "violated: {} costs {c} > gamma * OPT = {} and has no neighbor at or below {}",
            problem.solution_id(&x),
            gamma * v.opt,
            beta * c
        ),
    }
    Ok(())
}

pub fn offline(
    instance_path: &Path,
    beta: f64,
    start: Option<&str>,
    gamma: Option<f64>,
    budget: usize,
) -> Result<(), CliError> {
    let instance = load_instance(instance_path)?;
    with_instance!(&instance, |p, env| offline_problem(p, env, beta, start, gamma, budget))
}

fn offline_problem<P: Problem>(
    problem: &P,
    env: &Environment<P::Coord>,
    beta: f64,
    start: Option<&str>,
    gamma: Option<f64>,
    budget: usize,
) -> Result<(), CliError> {
    let x0 = match start {
        Some(id) => problem.parse_solution(id).map_err(|e| invalid(format!("start: {e}")))?,
        None => problem.start(),
    };
    let cost = |x: &P::Solution| env.expected_cost(problem, x).unwrap_or(f64::NAN);
    let result = offline_local_search(problem, cost, beta, x0).map_err(invalid)?;
    for (step, (x, c)) in result.trajectory.iter().enumerate() {
        println!("{step}\t{}\t{c}", problem.solution_id(x));
    }
    if let Some(gamma) = gamma {
        let opt = compute_opt(problem, env, budget, beta).map_err(harness_error)?;
        let c = result.final_cost();
        let verdict = if c <= gamma * opt.opt { "within" } else { "above" };
        let kind = if opt.exact { "exact" } else { "approximate" };
        println!("# final cost {c} is {verdict} gamma * OPT = {} ({kind} OPT)", gamma * opt.opt);
    }
    Ok(())
}
