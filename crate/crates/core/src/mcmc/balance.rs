//! Pilot runs that tune a chain before the main run.
//!
//! Occupancy of model `i` is proportional to `pᵢ mᵢ(x)`, so rescaling
//! `pᵢ ← pᵢ / occᵢ` evens out the visits. The estimators are unaffected: they
//! use whatever `p` the final chain ran with. Within-model pilots also supply
//! pseudo-priors for slots outside the active model.

use serde::{Deserialize, Serialize};

use super::{run_chain_with, ChainConfig, ChainError, InactiveDraws, MixtureSpec};
use crate::sampling::{self, ParamPrior};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BalanceConfig {
    pub rounds: usize,
    pub pilot_iterations: usize,
    /// Largest allowed ratio between Dirichlet parameters.
    pub max_ratio: f64,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        Self {
            rounds: 3,
            pilot_iterations: 2_000,
            max_ratio: 1e12,
        }
    }
}

/// Rescales `p` so the largest entry's neighbours are at most `max_ratio`
/// apart and the smallest entry is 1.
pub fn rebalance(p: &[f64], occupancy: &[u64], max_ratio: f64) -> Vec<f64> {
    let total: u64 = occupancy.iter().sum();
    // an unvisited model counts as half a visit
    let raw: Vec<f64> = p
        .iter()
        .zip(occupancy)
        .map(|(pi, &c)| pi * total as f64 / (c as f64).max(0.5))
        .collect();
    let max = raw.iter().cloned().fold(0.0, f64::max);
    let floor = max / max_ratio;
    let clipped: Vec<f64> = raw.iter().map(|v| v.max(floor)).collect();
    let min = clipped.iter().cloned().fold(f64::INFINITY, f64::min);
    clipped.iter().map(|v| v / min).collect()
}

/// Runs the pilots, leaves the balanced parameters in `spec.dirichlet_p` and
/// returns the sequence of parameters tried.
pub fn balance_dirichlet<M: Clone>(
    spec: &mut MixtureSpec<M>,
    config: &BalanceConfig,
    chain: &ChainConfig,
    inactive: &InactiveDraws,
) -> Result<Vec<Vec<f64>>, ChainError> {
    let mut history = vec![spec.dirichlet_p.clone()];
    for round in 0..config.rounds {
        let pilot = ChainConfig {
            seed: chain.seed.wrapping_add(7919 * (round as u64 + 1)),
            ..ChainConfig::new(config.pilot_iterations, 0)
        };
        let pilot = ChainConfig {
            allocation_updates: chain.allocation_updates,
            ..pilot
        };
        let out = run_chain_with(spec, &pilot, inactive)?;
        spec.dirichlet_p = rebalance(&spec.dirichlet_p, &out.occupancy, config.max_ratio);
        history.push(spec.dirichlet_p.clone());
    }
    Ok(history)
}

/// Slot draws from a run that keeps model `k` active throughout, after
/// discarding the first fifth. Row `r` holds the slots of model `k` in order.
pub fn within_model_draws<M: Clone>(
    spec: &MixtureSpec<M>,
    k: usize,
    iterations: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, ChainError> {
    spec.validate()?;
    let component = &spec.components[k];
    let mut rng = sampling::chain_rng(seed);
    let mut theta = match &spec.initial_theta {
        Some(t) => t.clone(),
        None => spec.params.iter().map(|s| s.prior.sample(&mut rng)).collect(),
    };
    let mut missing = spec.initial_missing.clone();
    if !component.log_augmented_density(&theta, &missing).is_finite() {
        return Err(ChainError::InfeasibleStart);
    }
    let mut draws = Vec::new();
    for it in 0..iterations {
        component.update_params_current(&mut theta, &missing, &mut rng);
        component.update_missing(&theta, &mut missing, &mut rng);
        if it >= iterations / 5 {
            draws.push(component.slots().iter().map(|&s| theta[s]).collect());
        }
    }
    Ok(draws)
}

/// Moment-matched law of the same family as `prior`, with the variance
/// multiplied by `inflation`. Falls back to `prior` for degenerate draws.
pub fn fit_law(prior: &ParamPrior, draws: &[f64], inflation: f64) -> ParamPrior {
    let n = draws.len() as f64;
    if draws.len() < 2 {
        return *prior;
    }
    let mean = draws.iter().sum::<f64>() / n;
    let var = inflation * draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0 && var.is_finite()) {
        return *prior;
    }
    match prior {
        ParamPrior::Normal { .. } => ParamPrior::Normal {
            mean,
            sd: var.sqrt(),
        },
        ParamPrior::Gamma { .. } if mean > 0.0 => ParamPrior::Gamma {
            shape: mean * mean / var,
            rate: mean / var,
        },
        ParamPrior::InverseGamma { .. } if mean > 0.0 => {
            let shape = 2.0 + mean * mean / var;
            ParamPrior::InverseGamma {
                shape,
                scale: 1.0 / (mean * (shape - 1.0)),
            }
        }
        _ => *prior,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PseudoPriorConfig {
    pub pilot_iterations: usize,
    /// Variance multiplier relative to the within-model posterior.
    pub inflation: f64,
}

impl Default for PseudoPriorConfig {
    fn default() -> Self {
        Self {
            pilot_iterations: 2_000,
            inflation: 2.0,
        }
    }
}

/// Pseudo-priors fitted to within-model pilot draws. A slot takes its law
/// from the first model that owns it; unowned slots keep their prior.
pub fn fit_pseudo_priors<M: Clone>(
    spec: &MixtureSpec<M>,
    config: &PseudoPriorConfig,
    seed: u64,
) -> Result<InactiveDraws, ChainError> {
    let mut laws: Vec<Option<ParamPrior>> = vec![None; spec.params.len()];
    for (k, component) in spec.components.iter().enumerate() {
        if component.slots().iter().all(|&s| laws[s].is_some()) {
            continue;
        }
        let draws = within_model_draws(spec, k, config.pilot_iterations, seed.wrapping_add(k as u64))?;
        for (col, &s) in component.slots().iter().enumerate() {
            if laws[s].is_none() {
                let column: Vec<f64> = draws.iter().map(|row| row[col]).collect();
                laws[s] = Some(fit_law(&spec.params[s].prior, &column, config.inflation));
            }
        }
    }
    Ok(InactiveDraws::Pseudo {
        laws: laws
            .into_iter()
            .zip(&spec.params)
            .map(|(law, slot)| law.unwrap_or(slot.prior))
            .collect(),
    })
}
