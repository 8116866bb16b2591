//! Log-log growth fit of mean final regret across horizons.

use super::HarnessError;

pub const MIN_HORIZONS: usize = 3;
pub const MIN_SEEDS: usize = 30;

/// Exponent at or below which growth counts as poly-logarithmic at these scales.
pub const POLYLOG_EXPONENT: f64 = 0.3;
/// Exponent the linear-regret baseline must reach.
pub const LINEAR_EXPONENT: f64 = 0.9;

/// Means below this in absolute value count as zero regret.
pub const ZERO_REGRET: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthPoint {
    pub horizon: u64,
    pub mean_regret: f64,
    pub std_error: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub points: Vec<GrowthPoint>,
    /// Fitted `rho` in `regret ~ T^rho`.
    pub exponent: f64,
}

impl GrowthReport {
    pub fn final_mean(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.mean_regret)
    }
}

/// Fits `ln(mean regret) = a + rho ln T` by least squares.
///
/// `samples` holds the final regrets of every seed at each horizon.
/// All-zero means give `rho = 0`; a mix of zero or negative means cannot be fitted.
pub fn regret_growth_diagnostic(samples: &[(u64, Vec<f64>)]) -> Result<GrowthReport, HarnessError> {
    let mut samples = samples.to_vec();
    samples.sort_by_key(|(t, _)| *t);
    samples.dedup_by_key(|(t, _)| *t);
    if samples.len() < MIN_HORIZONS {
        return Err(HarnessError::InsufficientData(format!(
            "{} horizons, need at least {MIN_HORIZONS}",
            samples.len()
        )));
    }
    if let Some((t, v)) = samples.iter().find(|(_, v)| v.len() < MIN_SEEDS) {
        return Err(HarnessError::InsufficientData(format!(
            "{} seeds at T = {t}, need at least {MIN_SEEDS}",
            v.len()
        )));
    }
    let points: Vec<GrowthPoint> = samples
        .iter()
        .map(|(t, v)| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            GrowthPoint {
                horizon: *t,
                mean_regret: mean,
                std_error: (var / n).sqrt(),
                seeds: v.len(),
            }
        })
        .collect();

    if points.iter().all(|p| p.mean_regret.abs() < ZERO_REGRET) {
        return Ok(GrowthReport { points, exponent: 0.0 });
    }
    if let Some(p) = points.iter().find(|p| p.mean_regret <= 0.0) {
        return Err(HarnessError::InsufficientData(format!(
            "mean regret {} at T = {} is not positive, no power law to fit",
            p.mean_regret, p.horizon
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.horizon as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_regret.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(GrowthReport {
        points,
        exponent: sxy / sxx,
    })
}

/// True when the bandit grows at most like `T^0.3` while the baseline grows like `T^0.9` or faster.
pub fn polylog_consistent(bandit: &GrowthReport, baseline: &GrowthReport) -> bool {
    bandit.exponent <= POLYLOG_EXPONENT && baseline.exponent >= LINEAR_EXPONENT
}
