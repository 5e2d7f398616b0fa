//! Homogeneous Poisson process versus linear birth process.
//!
//! Both likelihoods are densities with respect to a unit-rate Poisson process
//! on `[0, T]`, so they can sit side by side in one hypermodel without any
//! missing data. Rates carry independent `Exp(θ)` priors.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::DataError;
use crate::mcmc::{MixtureSpec, ModelComponent, MoveStats, ParamSlot};
use crate::sampling::{self, ChainRng, ParamPrior};

/// Sorted event times observed on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventData {
    times: Vec<f64>,
    horizon: f64,
}

impl EventData {
    pub fn new(mut times: Vec<f64>, horizon: f64) -> Result<Self, DataError> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(DataError(format!("horizon must be positive, got {horizon}")));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0 || *t > horizon) {
            return Err(DataError(format!(
                "event times must lie in [0, {horizon}]"
            )));
        }
        times.sort_by(f64::total_cmp);
        Ok(Self { times, horizon })
    }

    /// `n` coincident events at `S/n`; enough for models that see the data
    /// only through `(n, T, S)`.
    pub fn from_summary(n: usize, horizon: f64, sum: f64) -> Result<Self, DataError> {
        if n == 0 {
            if sum != 0.0 {
                return Err(DataError("an empty record must have S = 0".into()));
            }
            return Self::new(vec![], horizon);
        }
        if sum < 0.0 || sum > n as f64 * horizon {
            return Err(DataError(format!(
                "S = {sum} is impossible for {n} events on [0, {horizon}]"
            )));
        }
        Self::new(vec![sum / n as f64; n], horizon)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.times.iter().sum()
    }

    /// `(n + 1)T − S(x)`, the exposure of a linear birth process started from one.
    pub fn birth_exposure(&self) -> f64 {
        (self.len() as f64 + 1.0) * self.horizon - self.sum()
    }
}

/// `log[λⁿ e^{−(λ−1)T}]`.
pub fn pp_loglik(data: &EventData, lambda: f64) -> f64 {
    data.len() as f64 * lambda.ln() - (lambda - 1.0) * data.horizon()
}

/// `log[n! μⁿ e^{−μ((n+1)T − S) + T}]`.
pub fn birth_loglik(data: &EventData, mu: f64) -> f64 {
    let n = data.len();
    sampling::ln_factorial(n as u64) + n as f64 * mu.ln() - mu * data.birth_exposure()
        + data.horizon()
}

pub fn pp_gibbs_lambda(data: &EventData, prior_rate: f64, current: bool, rng: &mut ChainRng) -> f64 {
    if current {
        sampling::gamma(rng, data.len() as f64 + 1.0, data.horizon() + prior_rate)
    } else {
        sampling::gamma(rng, 1.0, prior_rate)
    }
}

pub fn birth_gibbs_mu(data: &EventData, prior_rate: f64, current: bool, rng: &mut ChainRng) -> f64 {
    if current {
        sampling::gamma(rng, data.len() as f64 + 1.0, data.birth_exposure() + prior_rate)
    } else {
        sampling::gamma(rng, 1.0, prior_rate)
    }
}

pub struct PoissonProcessComponent {
    data: Arc<EventData>,
    prior_rate: f64,
    slots: [usize; 1],
}

impl PoissonProcessComponent {
    pub fn new(data: Arc<EventData>, prior_rate: f64, slot: usize) -> Self {
        Self {
            data,
            prior_rate,
            slots: [slot],
        }
    }
}

impl ModelComponent<()> for PoissonProcessComponent {
    fn name(&self) -> &str {
        "poisson"
    }

    fn slots(&self) -> &[usize] {
        &self.slots
    }

    fn log_augmented_density(&self, theta: &[f64], _: &()) -> f64 {
        pp_loglik(&self.data, theta[self.slots[0]])
    }

    fn update_params_current(&self, theta: &mut [f64], _: &(), rng: &mut ChainRng) -> MoveStats {
        theta[self.slots[0]] = pp_gibbs_lambda(&self.data, self.prior_rate, true, rng);
        MoveStats::accepted(1)
    }
}

pub struct BirthProcessComponent {
    data: Arc<EventData>,
    prior_rate: f64,
    slots: [usize; 1],
}

impl BirthProcessComponent {
    pub fn new(data: Arc<EventData>, prior_rate: f64, slot: usize) -> Self {
        Self {
            data,
            prior_rate,
            slots: [slot],
        }
    }
}

impl ModelComponent<()> for BirthProcessComponent {
    fn name(&self) -> &str {
        "birth"
    }

    fn slots(&self) -> &[usize] {
        &self.slots
    }

    fn log_augmented_density(&self, theta: &[f64], _: &()) -> f64 {
        birth_loglik(&self.data, theta[self.slots[0]])
    }

    fn update_params_current(&self, theta: &mut [f64], _: &(), rng: &mut ChainRng) -> MoveStats {
        theta[self.slots[0]] = birth_gibbs_mu(&self.data, self.prior_rate, true, rng);
        MoveStats::accepted(1)
    }
}

/// Poisson process (model 1) against linear birth process (model 2), both
/// rates with `Exp(prior_rate)` priors.
pub fn poisson_vs_birth_spec(
    data: Arc<EventData>,
    prior_rate: f64,
    dirichlet_p: [f64; 2],
) -> MixtureSpec<()> {
    let prior = ParamPrior::Gamma {
        shape: 1.0,
        rate: prior_rate,
    };
    MixtureSpec {
        components: vec![
            Box::new(PoissonProcessComponent::new(data.clone(), prior_rate, 0)),
            Box::new(BirthProcessComponent::new(data, prior_rate, 1)),
        ],
        dirichlet_p: dirichlet_p.to_vec(),
        params: vec![ParamSlot::new("lambda", prior), ParamSlot::new("mu", prior)],
        initial_theta: None,
        initial_missing: (),
    }
}
