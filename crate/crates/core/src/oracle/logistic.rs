//! Marginal likelihoods of the nested logistic models (intercept plus the
//! first `dim` covariates): Laplace and
//! importance sampling from the Laplace Gaussian.

use nalgebra::DVector;
use rand::Rng;

use super::{laplace_log_marginal, LaplaceFit, OracleError, OracleMethod, OracleResult};
use crate::models::logistic::{logistic_loglik, LogisticData};
use crate::sampling;

/// Proposal standard deviations are the Laplace ones times this factor.
pub const IS_SCALE_INFLATION: f64 = 1.5;
pub const MIN_IS_SAMPLES: usize = 10_000;

fn log_posterior_kernel(data: &LogisticData, dim: usize, prior_sd: f64) -> impl Fn(&[f64]) -> f64 + '_ {
    let norm = -0.5 * (2.0 * std::f64::consts::PI * prior_sd * prior_sd).ln();
    move |coef: &[f64]| {
        logistic_loglik(data, dim, coef)
            + coef
                .iter()
                .map(|c| norm - 0.5 * (c / prior_sd).powi(2))
                .sum::<f64>()
    }
}

fn check(data: &LogisticData, dim: usize, prior_sd: f64) -> Result<(), OracleError> {
    if dim > data.n_covariates() {
        return Err(OracleError::InvalidArgument(format!(
            "dimension {dim} outside 0..={}",
            data.n_covariates()
        )));
    }
    if !(prior_sd > 0.0) {
        return Err(OracleError::InvalidArgument("prior sd must be positive".into()));
    }
    Ok(())
}

fn fit(data: &LogisticData, dim: usize, prior_sd: f64) -> Result<LaplaceFit, OracleError> {
    check(data, dim, prior_sd)?;
    laplace_log_marginal(log_posterior_kernel(data, dim, prior_sd), &vec![0.0; dim + 1])
}

pub fn logistic_laplace_marginal(data: &LogisticData, dim: usize, prior_sd: f64) -> Result<OracleResult, OracleError> {
    let f = fit(data, dim, prior_sd)?;
    Ok(OracleResult::exact(f.log_marginal, OracleMethod::Laplace))
}

/// Importance-sampling estimate of `m(y)` with a Gaussian proposal centred at
/// the posterior mode. The log-scale standard error is the relative error
/// of the mean weight.
pub fn logistic_marginal_is<R: Rng + ?Sized>(
    data: &LogisticData,
    dim: usize,
    prior_sd: f64,
    samples: usize,
    rng: &mut R,
) -> Result<OracleResult, OracleError> {
    if samples < MIN_IS_SAMPLES {
        return Err(OracleError::InvalidArgument(format!(
            "need at least {MIN_IS_SAMPLES} importance samples, got {samples}"
        )));
    }
    let laplace = fit(data, dim, prior_sd)?;
    let cov = laplace
        .precision
        .clone()
        .try_inverse()
        .ok_or_else(|| OracleError::Degenerate("precision is singular".into()))?
        * IS_SCALE_INFLATION.powi(2);
    let chol = cov
        .cholesky()
        .ok_or_else(|| OracleError::Degenerate("proposal covariance is not positive definite".into()))?;
    let l = chol.l();
    let prec = chol.inverse();
    let log_det: f64 = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let k = dim + 1;
    let norm = -0.5 * (k as f64 * (2.0 * std::f64::consts::PI).ln() + log_det);
    let mode = DVector::from_column_slice(&laplace.mode);
    let target = log_posterior_kernel(data, dim, prior_sd);

    let mut log_w = Vec::with_capacity(samples);
    for _ in 0..samples {
        let e = DVector::from_iterator(k, (0..k).map(|_| sampling::normal(rng, 0.0, 1.0)));
        let x = &mode + &l * &e;
        let d = &x - &mode;
        let log_q = norm - 0.5 * d.dot(&(&prec * &d));
        log_w.push(target(x.as_slice()) - log_q);
    }
    let peak = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(OracleError::Degenerate("all importance weights vanish".into()));
    }
    let w: Vec<f64> = log_w.iter().map(|v| (v - peak).exp()).collect();
    let n = samples as f64;
    let mean = w.iter().sum::<f64>() / n;
    let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let log_value = peak + mean.ln();
    Ok(OracleResult {
        value: log_value.exp(),
        log_value,
        standard_error: (var / n).sqrt() / mean,
        method: OracleMethod::ImportanceSampling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::chain_rng;

    fn data() -> LogisticData {
        let mut rng = chain_rng(4);
        let mut y = vec![];
        let mut rows = vec![];
        for _ in 0..80 {
            let x1 = sampling::normal(&mut rng, 0.0, 1.0);
            let x2 = sampling::normal(&mut rng, 0.0, 1.0);
            let eta = 0.3 + 1.2 * x1;
            let p = 1.0 / (1.0 + (-eta).exp());
            y.push(u8::from(rng.random::<f64>() < p));
            rows.push(vec![x1, x2]);
        }
        LogisticData::new(y, rows).unwrap()
    }

    #[test]
    fn laplace_and_importance_sampling_agree() {
        let d = data();
        let mut rng = chain_rng(9);
        for dim in 0..=2 {
            let lap = logistic_laplace_marginal(&d, dim, 10.0).unwrap();
            let is = logistic_marginal_is(&d, dim, 10.0, 20_000, &mut rng).unwrap();
            assert!((lap.log_value - is.log_value).abs() < 0.05, "dim {dim}: {lap:?} vs {is:?}");
            assert!(is.standard_error < 0.02);
        }
    }

    #[test]
    fn intercept_only_matches_quadrature() {
        let d = data();
        let ones = d.responses().iter().filter(|v| **v == 1).count() as f64;
        let n = d.len() as f64;
        let g = |b: f64| {
            ones * b - n * crate::models::logistic::log1p_exp(b) - 0.5 * (b / 10.0).powi(2)
                - 0.5 * (2.0 * std::f64::consts::PI * 100.0).ln()
        };
        let truth = super::super::integrate_log_peak(g, 0.0, 1e-12).unwrap();
        let is = logistic_marginal_is(&d, 0, 10.0, 50_000, &mut chain_rng(1)).unwrap();
        assert!((is.log_value - truth).abs() < 3.0 * is.standard_error + 1e-3);
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(logistic_marginal_is(&data(), 0, 10.0, 100, &mut chain_rng(1)).is_err());
    }
}
