//! Search parameters and the quantities derived from them.

use serde::Serialize;
use thiserror::Error;

/// Largest admissible `alpha`; closer to 1 and sample counts overflow any horizon.
pub const ALPHA_CEILING: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter `{field}` out of range: {value} ({reason})")]
    ParamOutOfRange {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("beta = {beta} gives alpha = {alpha}, too close to 1 for any feasible horizon")]
    DegenerateBeta { beta: f64, alpha: f64 },
}

fn out_of_range(field: &'static str, value: f64, reason: &'static str) -> ParamError {
    ParamError::ParamOutOfRange {
        field,
        value,
        reason,
    }
}

/// Parameters of one bandit local search run.
///
/// `alpha` and `delta` are derived from `beta` and never set directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchParams {
    beta: f64,
    gamma: f64,
    alpha: f64,
    delta: f64,
    horizon: u64,
    c_max: f64,
    max_neighborhood: usize,
}

impl SearchParams {
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn horizon(&self) -> u64 {
        self.horizon
    }
    pub fn c_max(&self) -> f64 {
        self.c_max
    }
    pub fn max_neighborhood(&self) -> usize {
        self.max_neighborhood
    }

    /// Same parameters with a different horizon.
    pub fn with_horizon(&self, horizon: u64) -> Result<Self, ParamError> {
        derive_params(self.beta, self.gamma, horizon, self.c_max, self.max_neighborhood)
    }

    /// Number of rounds used to estimate a solution against threshold `theta`.
    pub fn sample_count(&self, theta: f64) -> u64 {
        sample_count(self, theta)
    }

    pub fn acceptance_threshold(&self, theta: f64) -> f64 {
        acceptance_threshold(self, theta)
    }

    /// Upper bound on completed phases, `ln T / ln(1/alpha) + 1`.
    pub fn phase_bound(&self) -> f64 {
        (self.horizon as f64).ln() / (1.0 / self.alpha).ln() + 1.0
    }
}

/// Validates inputs and derives `alpha = sqrt(beta)` and `delta = (1 - alpha)/(1 + alpha)`.
pub fn derive_params(
    beta: f64,
    gamma: f64,
    horizon: u64,
    c_max: f64,
    max_neighborhood: usize,
) -> Result<SearchParams, ParamError> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(out_of_range("beta", beta, "must lie in (0, 1)"));
    }
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(out_of_range("gamma", gamma, "must be at least 1"));
    }
    if horizon < 2 {
        return Err(out_of_range("horizon", horizon as f64, "must be at least 2"));
    }
    if !(c_max > 0.0) || !c_max.is_finite() {
        return Err(out_of_range("c_max", c_max, "must be positive and finite"));
    }
    if max_neighborhood < 1 {
        return Err(out_of_range(
            "max_neighborhood",
            max_neighborhood as f64,
            "must be at least 1",
        ));
    }
    let alpha = beta.sqrt();
    if alpha >= ALPHA_CEILING {
        return Err(ParamError::DegenerateBeta { beta, alpha });
    }
    let delta = (1.0 - alpha) / (1.0 + alpha);
    Ok(SearchParams {
        beta,
        gamma,
        alpha,
        delta,
        horizon,
        c_max,
        max_neighborhood,
    })
}

/// `ceil(3 c_max (4 ln T + ln M) / (delta^2 alpha^2 theta))`, at least 1.
///
/// Saturates at `u64::MAX` for vanishing `theta`.
pub fn sample_count(params: &SearchParams, theta: f64) -> u64 {
    assert!(theta > 0.0, "theta must be positive, got {theta}");
    let log_term = 4.0 * (params.horizon as f64).ln() + (params.max_neighborhood as f64).ln();
    let denom = params.delta * params.delta * params.alpha * params.alpha * theta;
    let raw = 3.0 * params.c_max * log_term / denom;
    (raw.ceil() as u64).max(1)
}

/// `(2 alpha^2 / (1 + alpha)) theta`.
pub fn acceptance_threshold(params: &SearchParams, theta: f64) -> f64 {
    let alpha = params.alpha;
    2.0 * alpha * alpha / (1.0 + alpha) * theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn derives_alpha_and_delta() {
        let p = derive_params(0.81, 1.5, 10_000, 1.0, 4).unwrap();
        assert!((p.alpha() - 0.9).abs() < 1e-15);
        assert!((p.delta() - 0.1 / 1.9).abs() < 1e-15);
        assert!((p.delta() - 0.052632).abs() < 1e-6);

        let p = derive_params(0.25, 1.0, 100, 1.0, 1).unwrap();
        assert_eq!(p.alpha(), 0.5);
        assert!((p.delta() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            derive_params(1.0, 1.5, 100, 1.0, 4),
            Err(ParamError::DegenerateBeta { .. })
        ));
        assert!(matches!(
            derive_params(1.0 - 1e-13, 1.5, 100, 1.0, 4),
            Err(ParamError::DegenerateBeta { .. })
        ));
        for (b, g, t, c, m, field) in [
            (1.2, 1.5, 100, 1.0, 4, "beta"),
            (0.0, 1.5, 100, 1.0, 4, "beta"),
            (f64::NAN, 1.5, 100, 1.0, 4, "beta"),
            (0.5, 0.9, 100, 1.0, 4, "gamma"),
            (0.5, 1.5, 1, 1.0, 4, "horizon"),
            (0.5, 1.5, 100, 0.0, 4, "c_max"),
            (0.5, 1.5, 100, 1.0, 0, "max_neighborhood"),
        ] {
            match derive_params(b, g, t, c, m) {
                Err(ParamError::ParamOutOfRange { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected {field} error, got {other:?}"),
            }
        }
    }

    #[test]
    fn sample_count_reference_value() {
        // 3 * (4 ln 1e4 + ln 4) / (delta^2 alpha^2) with alpha = 0.9, delta = 0.1/1.9
        // is 51111.79..., so the ceiling is 51112.
        let p = derive_params(0.81, 1.5, 10_000, 1.0, 4).unwrap();
        let log_term: f64 = 4.0 * 10_000f64.ln() + 4f64.ln();
        let d: f64 = 0.1 / 1.9;
        let expected = (3.0 * log_term / (d * d * 0.81)).ceil() as u64;
        assert_eq!(expected, 51112);
        assert_eq!(sample_count(&p, 1.0), 51112);
    }

    #[test]
    fn sample_count_reduces_without_log_terms() {
        // M = 1 kills ln M; T = 2 is the smallest horizon, so use it and check the formula shape.
        let p = derive_params(0.25, 1.0, 2, 1.0, 1).unwrap();
        let d2a2 = p.delta().powi(2) * p.alpha().powi(2);
        assert_eq!(sample_count(&p, 1.0), (12.0 * 2f64.ln() / d2a2).ceil() as u64);
    }

    #[test]
    fn threshold_examples() {
        let p = derive_params(0.81, 1.5, 100, 1.0, 4).unwrap();
        assert!((acceptance_threshold(&p, 1.0) - 1.62 / 1.9).abs() < 1e-15);
        assert!((acceptance_threshold(&p, 1.0) - 0.852632).abs() < 1e-6);
        let p = derive_params(0.25, 1.5, 100, 8.0, 4).unwrap();
        assert!((acceptance_threshold(&p, 8.0) - 8.0 / 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn threshold_identities(beta in 0.01f64..0.999, theta in 1e-6f64..1e3) {
            let p = derive_params(beta, 1.0, 1000, 1.0, 3).unwrap();
            let a = p.alpha();
            let d = p.delta();
            let ratio = acceptance_threshold(&p, theta) / theta;
            prop_assert!((ratio - (1.0 + d) * a * a).abs() < 1e-12);
            prop_assert!((ratio - (1.0 - d) * a).abs() < 1e-12);
        }

        #[test]
        fn halving_theta_doubles_count(beta in 0.05f64..0.99, theta in 1e-3f64..10.0, t in 2u64..10_000_000) {
            let p = derive_params(beta, 1.0, t, 10.0, 7).unwrap();
            let n = sample_count(&p, theta);
            let n_half = sample_count(&p, theta / 2.0);
            prop_assert!(n_half + 1 >= 2 * n && n_half <= 2 * n + 1);
        }
    }
}
