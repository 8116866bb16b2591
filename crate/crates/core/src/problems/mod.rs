//! Problem instances: completion-time scheduling, matroid bases, uncertain k-median.

pub mod kmedian;
pub mod matroid;
pub mod scheduling;

use crate::params::ParamError;

/// Parameters suggested by a problem's improving-moves guarantee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recipe {
    pub beta: f64,
    pub gamma: f64,
    pub c_max: f64,
    pub max_neighborhood: usize,
}

fn check_epsilon(epsilon: f64) -> Result<(), ParamError> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(ParamError::ParamOutOfRange {
            field: "epsilon",
            value: epsilon,
            reason: "must lie in (0, 1)",
        })
    }
}

/// Parses 1-based ids separated by `-` or `,` into 0-based indices.
fn parse_ids(text: &str) -> Result<Vec<usize>, String> {
    text.split(['-', ','])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(format!("`{s}` is not a positive integer id")),
        })
        .collect()
}

fn format_ids(ids: &[usize]) -> String {
    ids.iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join("-")
}
