//! Nested logistic regressions sharing their common coefficients.
//!
//! Model `k` uses the intercept and the first `dₖ` covariate columns, so its
//! coefficients are the slots `0..=dₖ` of one pool. Shared coefficients carry a
//! single `N(0, sd²)` prior.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DataError;
use crate::mcmc::{MixtureSpec, ModelComponent, MoveStats, ParamSlot};
use crate::sampling::{self, ChainRng, ParamPrior};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticData {
    responses: Vec<u8>,
    /// Row-major `n × n_cov`, without the intercept column.
    covariates: Vec<f64>,
    n_cov: usize,
}

impl LogisticData {
    pub fn new(responses: Vec<u8>, rows: Vec<Vec<f64>>) -> Result<Self, DataError> {
        if responses.len() != rows.len() {
            return Err(DataError(format!(
                "{} responses but {} covariate rows",
                responses.len(),
                rows.len()
            )));
        }
        if responses.iter().any(|r| *r > 1) {
            return Err(DataError("responses must be 0 or 1".into()));
        }
        let n_cov = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cov) {
            return Err(DataError("covariate rows have different lengths".into()));
        }
        let covariates = rows.concat();
        if covariates.iter().any(|v| !v.is_finite()) {
            return Err(DataError("covariates must be finite".into()));
        }
        Ok(Self {
            responses,
            covariates,
            n_cov,
        })
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn n_covariates(&self) -> usize {
        self.n_cov
    }

    pub fn responses(&self) -> &[u8] {
        &self.responses
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.covariates[j * self.n_cov..(j + 1) * self.n_cov]
    }

    /// Linear predictors `θ₀ + Σ_{c<d} θ_{c+1} x_{jc}` for every row.
    pub fn linear_predictors(&self, dim: usize, coef: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|j| {
                coef[0]
                    + self.row(j)[..dim]
                        .iter()
                        .zip(&coef[1..=dim])
                        .map(|(x, t)| x * t)
                        .sum::<f64>()
            })
            .collect()
    }

    /// Column `c` (zero = intercept) of the design.
    fn design_value(&self, j: usize, c: usize) -> f64 {
        if c == 0 {
            1.0
        } else {
            self.row(j)[c - 1]
        }
    }
}

/// `ln(1 + eˣ)` without overflow.
pub fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn loglik_from_predictors(responses: &[u8], eta: &[f64]) -> f64 {
    responses
        .iter()
        .zip(eta)
        .map(|(&y, &e)| f64::from(y) * e - log1p_exp(e))
        .sum()
}

/// Log-likelihood of a model using the first `dim` covariates.
pub fn logistic_loglik(data: &LogisticData, dim: usize, coef: &[f64]) -> f64 {
    loglik_from_predictors(&data.responses, &data.linear_predictors(dim, coef))
}

/// Per-model covariate counts must be strictly increasing and fit the data.
pub fn validate_dims(data: &LogisticData, dims: &[usize]) -> Result<(), DataError> {
    if dims.len() < 2 || dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DataError(
            "model dimensions must be strictly increasing (nested covariate sets)".into(),
        ));
    }
    if *dims.last().unwrap() > data.n_covariates() {
        return Err(DataError(format!(
            "largest model uses {} covariates, data has {}",
            dims.last().unwrap(),
            data.n_covariates()
        )));
    }
    Ok(())
}

pub struct LogisticComponent {
    name: String,
    data: Arc<LogisticData>,
    dim: usize,
    prior_sd: f64,
    proposal_scales: Vec<f64>,
    slots: Vec<usize>,
}

impl LogisticComponent {
    pub fn new(
        name: impl Into<String>,
        data: Arc<LogisticData>,
        dim: usize,
        prior_sd: f64,
        proposal_scales: Vec<f64>,
    ) -> Self {
        Self {
            name: name.into(),
            data,
            dim,
            prior_sd,
            proposal_scales,
            slots: (0..=dim).collect(),
        }
    }
}

impl ModelComponent<()> for LogisticComponent {
    fn name(&self) -> &str {
        &self.name
    }

    fn slots(&self) -> &[usize] {
        &self.slots
    }

    fn log_augmented_density(&self, theta: &[f64], _: &()) -> f64 {
        logistic_loglik(&self.data, self.dim, theta)
    }

    /// One random-walk Metropolis–Hastings step per coefficient.
    fn update_params_current(&self, theta: &mut [f64], _: &(), rng: &mut ChainRng) -> MoveStats {
        let data = &*self.data;
        let mut eta = data.linear_predictors(self.dim, theta);
        let mut current = loglik_from_predictors(&data.responses, &eta);
        let var = self.prior_sd * self.prior_sd;
        let mut stats = MoveStats::default();
        let mut proposal = vec![0.0; eta.len()];
        for c in 0..=self.dim {
            let step = sampling::normal(rng, 0.0, self.proposal_scales[c]);
            for (j, (p, e)) in proposal.iter_mut().zip(&eta).enumerate() {
                *p = e + step * data.design_value(j, c);
            }
            let candidate = loglik_from_predictors(&data.responses, &proposal);
            let new = theta[c] + step;
            let log_ratio =
                candidate - current - (new * new - theta[c] * theta[c]) / (2.0 * var);
            let accept = log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio;
            if accept {
                theta[c] = new;
                current = candidate;
                std::mem::swap(&mut eta, &mut proposal);
            }
            stats.record(accept);
        }
        stats
    }
}

/// Nested logistic models over one coefficient pool of size `max(dims) + 1`.
pub fn logistic_spec(
    data: Arc<LogisticData>,
    dims: &[usize],
    prior_sd: f64,
    proposal_scale: f64,
    dirichlet_p: Vec<f64>,
) -> Result<MixtureSpec<()>, DataError> {
    validate_dims(&data, dims)?;
    if !(prior_sd > 0.0 && proposal_scale > 0.0) {
        return Err(DataError("prior sd and proposal scale must be positive".into()));
    }
    let n_slots = dims.last().unwrap() + 1;
    let prior = ParamPrior::Normal {
        mean: 0.0,
        sd: prior_sd,
    };
    let components = dims
        .iter()
        .map(|&d| {
            Box::new(LogisticComponent::new(
                format!("logistic_d{d}"),
                data.clone(),
                d,
                prior_sd,
                vec![proposal_scale; d + 1],
            )) as Box<dyn ModelComponent<()>>
        })
        .collect();
    Ok(MixtureSpec {
        components,
        dirichlet_p,
        params: (0..n_slots)
            .map(|s| ParamSlot::new(format!("theta_{s}"), prior))
            .collect(),
        initial_theta: Some(vec![0.0; n_slots]),
        initial_missing: (),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_coefficients_give_half() {
        let data = LogisticData::new(vec![1, 0, 1], vec![vec![0.3], vec![-1.0], vec![2.0]]).unwrap();
        assert_relative_eq!(
            logistic_loglik(&data, 1, &[0.0, 0.0]),
            3.0 * 0.5f64.ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn success_failure_symmetry() {
        let success = LogisticData::new(vec![1], vec![vec![]]).unwrap();
        let failure = LogisticData::new(vec![0], vec![vec![]]).unwrap();
        for t in [-2.0, -0.1, 0.7, 3.0] {
            assert_relative_eq!(
                logistic_loglik(&success, 0, &[t]),
                logistic_loglik(&failure, 0, &[-t]),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn validation() {
        assert!(LogisticData::new(vec![2], vec![vec![1.0]]).is_err());
        assert!(LogisticData::new(vec![1, 0], vec![vec![1.0], vec![]]).is_err());
        let data = Arc::new(LogisticData::new(vec![1, 0], vec![vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap());
        assert!(logistic_spec(data.clone(), &[1, 1], 10.0, 0.1, vec![1.0, 1.0]).is_err());
        assert!(logistic_spec(data.clone(), &[1, 3], 10.0, 0.1, vec![1.0, 1.0]).is_err());
        let spec = logistic_spec(data, &[0, 1, 2], 10.0, 0.1, vec![1.0; 3]).unwrap();
        assert_eq!(spec.params.len(), 3);
        assert_eq!(spec.components[0].slots(), &[0]);
        assert_eq!(spec.components[2].slots(), &[0, 1, 2]);
    }

    #[test]
    fn log1p_exp_is_stable() {
        assert_relative_eq!(log1p_exp(800.0), 800.0);
        assert!(log1p_exp(-800.0) >= 0.0 && log1p_exp(-800.0) < 1e-300);
        assert_relative_eq!(log1p_exp(0.0), 2f64.ln());
    }
}
