use std::fs;

use lsbandit::config::{ConfigError, RunConfig};
use lsbandit::instance::Instance;
use lsbandit::problem::Problem;
use tempfile::TempDir;

const JOBS: &str = r#"
problem = "scheduling"
n = 3

[[jobs]]
dist = "two-point"
low = 0.0
high = 0.6
p_high = 0.5

[[jobs]]
dist = "uniform-grid"
low = 0.0
high = 0.4
points = 5

[[jobs]]
dist = "point"
value = 0.1
"#;

#[test]
fn instance_path_is_relative_to_the_config() {
    let dir = TempDir::new().unwrap();
    fs::create_dir(dir.path().join("data")).unwrap();
    fs::write(dir.path().join("data/jobs.toml"), JOBS).unwrap();
    let cfg_path = dir.path().join("run.toml");
    fs::write(
        &cfg_path,
        r#"
instance = "data/jobs.toml"
policies = ["bandit-local-search"]
horizons = [1000, 10000]
seeds = [3, 1, 2]

[params]
recipe = "scheduling"
epsilon = 0.5
"#,
    )
    .unwrap();
    let cfg = RunConfig::load(&cfg_path).unwrap();
    assert_eq!(cfg.instance, dir.path().join("data/jobs.toml"));
    assert_eq!(cfg.seed_list(), vec![3, 1, 2]);

    let inst = Instance::load(&cfg.instance).unwrap();
    assert_eq!(inst.kind(), "scheduling");
    let resolved = cfg.resolve(&inst).unwrap();
    assert!((resolved.beta - (1.0 - 0.5 / 9.0)).abs() < 1e-15);
    assert_eq!(resolved.gamma, 1.5);
    let Instance::Scheduling(p, env) = &inst else { unreachable!() };
    let means = env.means();
    assert!((means[0] - 0.3).abs() < 1e-12 && (means[1] - 0.2).abs() < 1e-12 && means[2] == 0.1);
    let sp = resolved.search_params(p, env, 10_000).unwrap();
    // worst order puts the largest possible sizes first: 3(0.6) + 2(0.4) + 0.1
    assert!((sp.c_max() - 2.7).abs() < 1e-12);
    assert_eq!(sp.max_neighborhood(), p.max_neighborhood());
}

#[test]
fn missing_files_are_io_errors() {
    let dir = TempDir::new().unwrap();
    assert!(matches!(RunConfig::load(&dir.path().join("none.toml")), Err(ConfigError::Io(_))));
    assert!(Instance::load(&dir.path().join("none.toml")).is_err());
}

#[test]
fn recipe_must_match_the_instance() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("jobs.toml"), JOBS).unwrap();
    let cfg_path = dir.path().join("run.toml");
    fs::write(
        &cfg_path,
        "instance = \"jobs.toml\"\npolicies = [\"uniform-random\"]\nhorizons = [10]\nseeds = [0]\n\n[params]\nrecipe = \"matroid\"\nepsilon = 0.5\n",
    )
    .unwrap();
    let cfg = RunConfig::load(&cfg_path).unwrap();
    let inst = Instance::load(&cfg.instance).unwrap();
    match cfg.resolve(&inst) {
        Err(ConfigError::ConfigInvalid { field, .. }) => assert_eq!(field, "params.recipe"),
        other => panic!("{other:?}"),
    }
}
