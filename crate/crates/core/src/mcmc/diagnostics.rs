//! Effective sample size, batch-means standard errors and bound checks.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::bfcore::{self, PriorMoments};

/// Below this many draws the diagnostics are marked unreliable.
pub const MIN_TRACE_LENGTH: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesDiagnostics {
    pub mean: f64,
    pub ess: f64,
    pub batch_means_se: f64,
    /// Set for short traces and for traces with no variation.
    pub unreliable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsKind {
    /// Strictly outside the admissible interval: the estimate cannot be right.
    Outside,
    /// On a bound: the chain never left (or never entered) the model.
    AtBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsFlag {
    pub model: usize,
    pub estimator: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: f64,
    pub kind: BoundsKind,
}

pub fn diagnose(series: &[f64]) -> SeriesDiagnostics {
    let n = series.len();
    if n == 0 {
        return SeriesDiagnostics {
            mean: f64::NAN,
            ess: 0.0,
            batch_means_se: f64::NAN,
            unreliable: true,
        };
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if var <= f64::EPSILON * mean.abs().max(1.0) * 1e-6 {
        return SeriesDiagnostics {
            mean,
            ess: 1.0,
            batch_means_se: 0.0,
            unreliable: true,
        };
    }
    SeriesDiagnostics {
        mean,
        ess: effective_sample_size(series),
        batch_means_se: batch_means_se(series),
        unreliable: n < MIN_TRACE_LENGTH,
    }
}

/// Standard error of the mean from `⌊√n⌋` non-overlapping batches.
pub fn batch_means_se(series: &[f64]) -> f64 {
    let n = series.len();
    let batches = (n as f64).sqrt().floor() as usize;
    if batches < 2 {
        return f64::NAN;
    }
    let size = n / batches;
    let means: Vec<f64> = series
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

/// Autocorrelations `ρ₀..ρ_{n-1}` computed by zero-padded FFT.
pub fn autocorrelation(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .map(|x| Complex::new(x - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in &mut buf {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let c0 = buf[0].re;
    buf.iter().take(n).map(|c| c.re / c0).collect()
}

/// Geyer's initial monotone positive sequence estimator.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return n as f64;
    }
    let rho = autocorrelation(series);
    let mut sum_pairs = 0.0;
    let mut prev_pair = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = rho[2 * k] + rho[2 * k + 1];
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        sum_pairs += pair;
        prev_pair = pair;
        k += 1;
    }
    let tau = (2.0 * sum_pairs - 1.0).max(1.0 / (n as f64).log10().max(1.0));
    n as f64 / tau
}

/// Flags estimates outside, or exactly on, the admissible range for `E[αᵢ|x]`.
pub fn bounds_flags(moments: &PriorMoments, estimates: &[f64], estimator: &str) -> Vec<BoundsFlag> {
    estimates
        .iter()
        .enumerate()
        .filter_map(|(i, &value)| {
            let b = bfcore::posterior_mean_bounds(moments, i).ok()?;
            let kind = if !b.contains(value) {
                BoundsKind::Outside
            } else if !b.contains_strictly(value) {
                BoundsKind::AtBoundary
            } else {
                return None;
            };
            Some(BoundsFlag {
                model: i,
                estimator: estimator.to_string(),
                value,
                lower: b.lower,
                upper: b.upper,
                kind,
            })
        })
        .collect()
}
