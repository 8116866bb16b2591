//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::Environment;
use crate::harness::{Policy, StartRule, DEFAULT_OPT_BUDGET};
use crate::instance::Instance;
use crate::offline::DEFAULT_ENUMERATION_BUDGET;
use crate::params::{derive_params, ParamError, SearchParams};
use crate::problem::Problem;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Malformed(#[from] toml::de::Error),
    #[error("invalid config field `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
}

fn field_error<T>(field: &str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::ConfigInvalid {
        field: field.to_owned(),
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Range { base: u64, count: u64 },
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::List(v) => v.clone(),
            SeedSpec::Range { base, count } => (0..*count).map(|i| base + i).collect(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SeedSpec::List(v) => format!("explicit list of {} seeds", v.len()),
            SeedSpec::Range { base, count } => format!("seed_i = {base} + i for i in 0..{count}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecipeName {
    Scheduling,
    Matroid,
    Kmedian,
}

impl RecipeName {
    fn as_str(self) -> &'static str {
        match self {
            RecipeName::Scheduling => "scheduling",
            RecipeName::Matroid => "matroid",
            RecipeName::Kmedian => "kmedian",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub recipe: Option<RecipeName>,
    pub epsilon: Option<f64>,
    /// Overrides the cost bound computed from the environment.
    pub c_max: Option<f64>,
    /// Overrides the problem's declared neighborhood bound.
    pub max_neighborhood: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default = "default_opt_budget")]
    pub opt: usize,
    #[serde(default = "default_verify_budget")]
    pub verify: usize,
}

fn default_opt_budget() -> usize {
    DEFAULT_OPT_BUDGET
}

fn default_verify_budget() -> usize {
    DEFAULT_ENUMERATION_BUDGET
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            opt: DEFAULT_OPT_BUDGET,
            verify: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Instance file, relative to the config file.
    pub instance: PathBuf,
    pub policies: Vec<Policy>,
    pub horizons: Vec<u64>,
    pub seeds: SeedSpec,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub start: StartRule,
    #[serde(default = "default_true")]
    pub write_traces: bool,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub budgets: Budgets,
}

fn default_true() -> bool {
    true
}

/// `beta` and `gamma` after applying a recipe, before horizon-dependent derivation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedParams {
    pub beta: f64,
    pub gamma: f64,
    pub c_max: Option<f64>,
    pub max_neighborhood: Option<usize>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`; a relative `instance` is resolved against the config's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        if cfg.instance.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.instance = dir.join(&cfg.instance);
            }
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.policies.is_empty() {
            return field_error("policies", "at least one policy is required");
        }
        if self.horizons.is_empty() {
            return field_error("horizons", "at least one horizon is required");
        }
        if let Some(t) = self.horizons.iter().find(|&&t| t < 2) {
            return field_error("horizons", format!("horizon {t} is below 2"));
        }
        let seeds = self.seeds.seeds();
        if seeds.is_empty() {
            return field_error("seeds", "no seeds");
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return field_error("seeds", "seeds repeat");
        }
        let p = &self.params;
        match (p.recipe, p.beta, p.gamma) {
            (Some(_), None, None) => match p.epsilon {
                Some(e) if !(e > 0.0 && e < 1.0) => field_error("params.epsilon", format!("{e} is outside (0, 1)")),
                _ => Ok(()),
            },
            (Some(_), _, _) => field_error("params.recipe", "a recipe cannot be combined with explicit beta or gamma"),
            (None, Some(beta), Some(gamma)) => {
                if !(beta > 0.0 && beta < 1.0) {
                    return field_error("params.beta", format!("{beta} is outside (0, 1)"));
                }
                if !(gamma >= 1.0) {
                    return field_error("params.gamma", format!("{gamma} is below 1"));
                }
                if p.epsilon.is_some() {
                    return field_error("params.epsilon", "only used together with a recipe");
                }
                Ok(())
            }
            (None, None, _) => field_error("params.beta", "missing; give beta and gamma, or a recipe"),
            (None, _, None) => field_error("params.gamma", "missing; give beta and gamma, or a recipe"),
        }?;
        if let Some(c) = p.c_max {
            if !(c > 0.0 && c.is_finite()) {
                return field_error("params.c_max", format!("{c} is not positive"));
            }
        }
        if p.max_neighborhood == Some(0) {
            return field_error("params.max_neighborhood", "must be at least 1");
        }
        Ok(())
    }

    pub fn seed_list(&self) -> Vec<u64> {
        self.seeds.seeds()
    }

    /// Applies the named recipe, checking it belongs to the instance's problem.
    pub fn resolve(&self, instance: &Instance) -> Result<ResolvedParams, ConfigError> {
        let p = &self.params;
        let (beta, gamma) = match p.recipe {
            Some(name) => {
                if name.as_str() != instance.kind() {
                    return field_error(
                        "params.recipe",
                        format!("recipe `{}` does not match a {} instance", name.as_str(), instance.kind()),
                    );
                }
                if p.epsilon.is_none() && name != RecipeName::Kmedian {
                    return field_error("params.epsilon", "required by this recipe");
                }
                let r = instance
                    .recipe(p.epsilon.unwrap_or(0.5))
                    .map_err(|e| param_field_error(&e))?;
                (r.beta, r.gamma)
            }
            None => (p.beta.unwrap_or_default(), p.gamma.unwrap_or_default()),
        };
        Ok(ResolvedParams {
            beta,
            gamma,
            c_max: p.c_max,
            max_neighborhood: p.max_neighborhood,
        })
    }
}

/// Maps a parameter error onto the config field it came from.
pub fn param_field_error(e: &ParamError) -> ConfigError {
    let field = match e {
        ParamError::ParamOutOfRange { field, .. } => format!("params.{field}"),
        ParamError::DegenerateBeta { .. } => "params.beta".to_owned(),
    };
    ConfigError::ConfigInvalid {
        field,
        message: e.to_string(),
    }
}

impl ResolvedParams {
    /// Search parameters for `problem` under `env` at `horizon`.
    ///
    /// Without overrides, `c_max` is the largest realized cost the environment
    /// can produce and `M` is the problem's declared neighborhood bound.
    pub fn search_params<P: Problem>(
        &self,
        problem: &P,
        env: &Environment<P::Coord>,
        horizon: u64,
    ) -> Result<SearchParams, ConfigError> {
        let c_max = match self.c_max {
            Some(c) => c,
            None => env.cost_bound(problem).map_err(|e| ConfigError::ConfigInvalid {
                field: "instance".into(),
                message: e.to_string(),
            })?,
        };
        let m = self.max_neighborhood.unwrap_or(problem.max_neighborhood().max(1));
        derive_params(self.beta, self.gamma, horizon, c_max, m).map_err(|e| param_field_error(&e))
    }
}
