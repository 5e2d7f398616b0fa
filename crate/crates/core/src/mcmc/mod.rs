//! Allocation-variable Gibbs sampler for mixture hypermodels.
//!
//! The chain state is `(α, z, θ, y)`: mixture weights, the index of the
//! currently active model, a pool of parameter slots shared between
//! components, and component-specific missing data. One sweep is
//!
//! 1. `z ~ Multinomial(q)`, `qᵢ ∝ αᵢ πᵢ(x, y_I(i) | θᵢ) πᵢ(y₋I(i) | ·)`
//! 2. `α ~ Dirichlet(p + z)`
//! 3. the active component updates its own slots; every other slot is drawn
//!    from its prior
//! 4. the active component updates the missing data
//!
//! Posterior means of `α` are estimated by Rao-Blackwellisation,
//! `E[αᵢ|x] ≈ mean((pᵢ + zᵢ) / (p₀ + 1))`, with the plain average of the
//! sampled weights kept as a cross-check.

pub mod balance;
pub mod diagnostics;
pub mod trace;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bfcore::{self, PosteriorMeans, PriorMoments};
use crate::sampling::{self, ChainRng, ParamPrior};

pub use diagnostics::{BoundsFlag, BoundsKind, SeriesDiagnostics};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("invalid mixture specification: {0}")]
    InvalidSpec(String),
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),
    #[error("infeasible start: every component has zero density at the initial state")]
    InfeasibleStart,
    #[error("all components have zero density at iteration {iteration}")]
    Infeasible { iteration: usize },
    #[error("log-density of component {component} ({name}) is {value} at iteration {iteration}")]
    NumericalOverflow {
        iteration: usize,
        component: usize,
        name: String,
        value: f64,
    },
}

/// Acceptance bookkeeping for Metropolis–Hastings style updates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveStats {
    pub proposed: u64,
    pub accepted: u64,
}

impl MoveStats {
    pub fn accepted(n: u64) -> Self {
        Self {
            proposed: n,
            accepted: n,
        }
    }

    pub fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += u64::from(accepted);
    }

    pub fn rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }
}

impl std::ops::AddAssign for MoveStats {
    fn add_assign(&mut self, rhs: Self) {
        self.proposed += rhs.proposed;
        self.accepted += rhs.accepted;
    }
}

/// One competing model inside a hypermodel.
///
/// `theta` is always the full slot pool; a component reads and writes only the
/// slots it lists in [`ModelComponent::slots`]. Missing data of type `M` is
/// shared by all components.
pub trait ModelComponent<M>: Send + Sync {
    fn name(&self) -> &str;

    fn slots(&self) -> &[usize];

    /// `log πᵢ(x, y_I(i) | θᵢ)`.
    fn log_augmented_density(&self, theta: &[f64], missing: &M) -> f64;

    /// `log πᵢ(y₋I(i) | x, y_I(i), θ)`; zero when the component owns all the
    /// missing data.
    fn log_missing_prior(&self, _theta: &[f64], _missing: &M) -> f64 {
        0.0
    }

    /// Update of this component's slots, valid while it is the active model.
    fn update_params_current(&self, theta: &mut [f64], missing: &M, rng: &mut ChainRng)
        -> MoveStats;

    /// Update of the missing data while this component is the active model.
    fn update_missing(&self, _theta: &[f64], _missing: &mut M, _rng: &mut ChainRng) -> MoveStats {
        MoveStats::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSlot {
    pub name: String,
    pub prior: ParamPrior,
}

impl ParamSlot {
    pub fn new(name: impl Into<String>, prior: ParamPrior) -> Self {
        Self {
            name: name.into(),
            prior,
        }
    }
}

pub struct MixtureSpec<M> {
    pub components: Vec<Box<dyn ModelComponent<M>>>,
    pub dirichlet_p: Vec<f64>,
    pub params: Vec<ParamSlot>,
    /// Starting slot values; drawn from the slot priors when absent.
    pub initial_theta: Option<Vec<f64>>,
    pub initial_missing: M,
}

impl<M> MixtureSpec<M> {
    pub fn n_models(&self) -> usize {
        self.components.len()
    }

    pub fn prior_moments(&self) -> PriorMoments {
        bfcore::dirichlet_moments(&self.dirichlet_p).expect("validated Dirichlet parameters")
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        let n = self.components.len();
        if n < 2 {
            return Err(ChainError::InvalidSpec(
                "a hypermodel needs at least two components".into(),
            ));
        }
        if self.dirichlet_p.len() != n {
            return Err(ChainError::InvalidSpec(format!(
                "{} Dirichlet parameters for {n} components",
                self.dirichlet_p.len()
            )));
        }
        if self.dirichlet_p.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(ChainError::InvalidSpec(
                "Dirichlet parameters must be positive".into(),
            ));
        }
        let mut used = vec![false; self.params.len()];
        for c in &self.components {
            for &s in c.slots() {
                if s >= self.params.len() {
                    return Err(ChainError::InvalidSpec(format!(
                        "component {} refers to unknown slot {s}",
                        c.name()
                    )));
                }
                used[s] = true;
            }
        }
        if let Some(s) = used.iter().position(|u| !u) {
            return Err(ChainError::InvalidSpec(format!(
                "slot {} ({}) belongs to no component",
                s, self.params[s].name
            )));
        }
        if let Some(t) = &self.initial_theta {
            if t.len() != self.params.len() {
                return Err(ChainError::InvalidSpec(format!(
                    "{} initial values for {} slots",
                    t.len(),
                    self.params.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    /// Total sweeps, burn-in included.
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
    /// Repetitions per sweep of the pair (inactive slots from their prior,
    /// allocation). Each pair is a Gibbs step, so any count is valid.
    pub allocation_updates: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self::new(100_000, 1)
    }
}

impl ChainConfig {
    /// Burn-in of 10% and no thinning.
    pub fn new(iterations: usize, seed: u64) -> Self {
        Self {
            iterations,
            burnin: iterations / 10,
            thin: 1,
            seed,
            allocation_updates: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        if self.iterations <= self.burnin {
            return Err(ChainError::InvalidConfig(format!(
                "iterations ({}) must exceed burnin ({})",
                self.iterations, self.burnin
            )));
        }
        if self.thin == 0 {
            return Err(ChainError::InvalidConfig("thin must be at least 1".into()));
        }
        if self.allocation_updates == 0 {
            return Err(ChainError::InvalidConfig("allocation_updates must be at least 1".into()));
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        (self.iterations - self.burnin).div_ceil(self.thin)
    }
}

#[derive(Debug, Clone)]
pub struct ChainState<M> {
    pub alpha: Vec<f64>,
    /// Index of the model with `zᵢ = 1`.
    pub current: usize,
    pub theta: Vec<f64>,
    pub missing: M,
    pub iteration: usize,
}

impl<M> ChainState<M> {
    pub fn z_one_hot(&self) -> Vec<u8> {
        (0..self.alpha.len())
            .map(|i| u8::from(i == self.current))
            .collect()
    }
}

/// Draw from `Dirichlet(p + z)` where `z` is the one-hot vector of `current`.
pub fn update_alpha<R: Rng + ?Sized>(current: usize, p: &[f64], rng: &mut R) -> Vec<f64> {
    let mut draws: Vec<f64> = p
        .iter()
        .enumerate()
        .map(|(i, &pi)| {
            let shape = pi + if i == current { 1.0 } else { 0.0 };
            sampling::gamma(rng, shape, 1.0).max(f64::MIN_POSITIVE)
        })
        .collect();
    let total: f64 = draws.iter().sum();
    for d in &mut draws {
        *d /= total;
    }
    draws
}

/// Categorical draw of the active model from `log αᵢ + log-densities`.
pub fn update_z<R: Rng + ?Sized>(
    alpha: &[f64],
    component_logdens: &[f64],
    rng: &mut R,
) -> Option<usize> {
    let logw: Vec<f64> = alpha
        .iter()
        .zip(component_logdens)
        .map(|(a, d)| a.ln() + d)
        .collect();
    sampling::categorical_from_log(rng, &logw)
}

/// `zᵢ`-conditional probabilities used by [`update_z`].
pub fn allocation_probabilities(alpha: &[f64], component_logdens: &[f64]) -> Option<Vec<f64>> {
    let logw: Vec<f64> = alpha
        .iter()
        .zip(component_logdens)
        .map(|(a, d)| a.ln() + d)
        .collect();
    sampling::normalise_log_weights(&logw)
}

/// Rao-Blackwellised `E[αᵢ | x]` from a trace of active-model indices.
pub fn rao_blackwell_alpha(z_trace: &[u32], p: &[f64]) -> Result<PosteriorMeans, bfcore::BfError> {
    if z_trace.is_empty() {
        return Err(bfcore::BfError::InvalidArgument("empty allocation trace".into()));
    }
    let n = p.len();
    let mut counts = vec![0u64; n];
    for &z in z_trace {
        counts[z as usize] += 1;
    }
    PosteriorMeans::new(rb_from_counts(&counts, p))
}

fn rb_from_counts(counts: &[u64], p: &[f64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    let p0: f64 = p.iter().sum();
    counts
        .iter()
        .zip(p)
        .map(|(&c, &pi)| (pi + c as f64 / total as f64) / (p0 + 1.0))
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainOutput {
    pub model_names: Vec<String>,
    pub param_names: Vec<String>,
    pub dirichlet_p: Vec<f64>,
    pub config: ChainConfig,
    /// Recorded (post burn-in, thinned) iterations.
    pub retained: usize,
    pub occupancy: Vec<u64>,
    /// Row-major `retained × n_models`.
    pub alpha_trace: Vec<f64>,
    pub z_trace: Vec<u32>,
    /// Row-major `retained × n_params`.
    pub theta_trace: Vec<f64>,
    pub param_moves: Vec<MoveStats>,
    pub missing_moves: Vec<MoveStats>,
}

/// Estimates of `E[α | x]` with Monte Carlo diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaEstimates {
    pub rao_blackwell: Vec<f64>,
    pub plain: Vec<f64>,
    pub rao_blackwell_diag: Vec<SeriesDiagnostics>,
    pub plain_diag: Vec<SeriesDiagnostics>,
    pub occupancy_fraction: Vec<f64>,
    pub bounds_flags: Vec<BoundsFlag>,
}

impl ChainOutput {
    pub fn n_models(&self) -> usize {
        self.model_names.len()
    }

    pub fn alpha_row(&self, r: usize) -> &[f64] {
        let n = self.n_models();
        &self.alpha_trace[r * n..(r + 1) * n]
    }

    pub fn theta_row(&self, r: usize) -> &[f64] {
        let d = self.param_names.len();
        &self.theta_trace[r * d..(r + 1) * d]
    }

    pub fn prior_moments(&self) -> PriorMoments {
        bfcore::dirichlet_moments(&self.dirichlet_p).expect("validated Dirichlet parameters")
    }

    pub fn occupancy_fraction(&self) -> Vec<f64> {
        self.occupancy
            .iter()
            .map(|&c| c as f64 / self.retained as f64)
            .collect()
    }

    pub fn rao_blackwell(&self) -> PosteriorMeans {
        PosteriorMeans::new(rb_from_counts(&self.occupancy, &self.dirichlet_p))
            .expect("Rao-Blackwell means lie inside the simplex")
    }

    pub fn plain_average(&self) -> Vec<f64> {
        let n = self.n_models();
        let mut sums = vec![0.0; n];
        for row in self.alpha_trace.chunks(n) {
            for (s, a) in sums.iter_mut().zip(row) {
                *s += a;
            }
        }
        sums.into_iter().map(|s| s / self.retained as f64).collect()
    }

    /// Per-iteration Rao-Blackwell terms `(pᵢ + zᵢ) / (p₀ + 1)` for model `i`.
    pub fn rao_blackwell_series(&self, i: usize) -> Vec<f64> {
        let p0: f64 = self.dirichlet_p.iter().sum();
        let pi = self.dirichlet_p[i];
        self.z_trace
            .iter()
            .map(|&z| (pi + if z as usize == i { 1.0 } else { 0.0 }) / (p0 + 1.0))
            .collect()
    }

    pub fn alpha_series(&self, i: usize) -> Vec<f64> {
        let n = self.n_models();
        self.alpha_trace.iter().skip(i).step_by(n).copied().collect()
    }

    pub fn estimates(&self) -> AlphaEstimates {
        let n = self.n_models();
        let moments = self.prior_moments();
        let rao_blackwell = self.rao_blackwell().values().to_vec();
        let plain = self.plain_average();
        let rao_blackwell_diag: Vec<_> = (0..n)
            .map(|i| diagnostics::diagnose(&self.rao_blackwell_series(i)))
            .collect();
        let plain_diag: Vec<_> = (0..n)
            .map(|i| diagnostics::diagnose(&self.alpha_series(i)))
            .collect();
        let mut bounds_flags = diagnostics::bounds_flags(&moments, &rao_blackwell, "rao_blackwell");
        bounds_flags.extend(diagnostics::bounds_flags(&moments, &plain, "plain"));
        AlphaEstimates {
            rao_blackwell,
            plain,
            rao_blackwell_diag,
            plain_diag,
            occupancy_fraction: self.occupancy_fraction(),
            bounds_flags,
        }
    }

    pub fn acceptance_rates(&self) -> Vec<Option<f64>> {
        self.param_moves.iter().map(MoveStats::rate).collect()
    }
}

/// Law of the slots that no active likelihood term touches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InactiveDraws {
    /// The slot priors.
    #[default]
    Prior,
    /// One law per slot. Each component's density then carries the factor
    /// `∏ prior(θₛ) / law(θₛ)` over its own slots, which keeps the posterior
    /// model probabilities unchanged.
    Pseudo { laws: Vec<ParamPrior> },
}

impl InactiveDraws {
    fn law<'a>(&'a self, spec_params: &'a [ParamSlot], s: usize) -> &'a ParamPrior {
        match self {
            InactiveDraws::Prior => &spec_params[s].prior,
            InactiveDraws::Pseudo { laws } => &laws[s],
        }
    }
}

fn evaluate_components<M>(
    spec: &MixtureSpec<M>,
    state: &ChainState<M>,
    inactive: &InactiveDraws,
    out: &mut [f64],
) -> Result<(), ChainError> {
    for (i, (c, slot)) in spec.components.iter().zip(out.iter_mut()).enumerate() {
        let mut v = c.log_augmented_density(&state.theta, &state.missing)
            + c.log_missing_prior(&state.theta, &state.missing);
        if let InactiveDraws::Pseudo { laws } = inactive {
            for &s in c.slots() {
                let x = state.theta[s];
                v += spec.params[s].prior.ln_pdf(x) - laws[s].ln_pdf(x);
            }
        }
        if v.is_nan() || v == f64::INFINITY {
            return Err(ChainError::NumericalOverflow {
                iteration: state.iteration,
                component: i,
                name: c.name().to_string(),
                value: v,
            });
        }
        *slot = v;
    }
    Ok(())
}

fn redraw_inactive<M>(
    spec: &MixtureSpec<M>,
    inactive: &InactiveDraws,
    owned: &[bool],
    theta: &mut [f64],
    rng: &mut ChainRng,
) {
    for (s, value) in theta.iter_mut().enumerate() {
        if !owned[s] {
            *value = inactive.law(&spec.params, s).sample(rng);
        }
    }
}

/// Runs one chain with inactive slots drawn from their priors.
/// Deterministic given `config.seed`.
pub fn run_chain<M: Clone>(
    spec: &MixtureSpec<M>,
    config: &ChainConfig,
) -> Result<ChainOutput, ChainError> {
    run_chain_with(spec, config, &InactiveDraws::Prior)
}

pub fn run_chain_with<M: Clone>(
    spec: &MixtureSpec<M>,
    config: &ChainConfig,
    inactive: &InactiveDraws,
) -> Result<ChainOutput, ChainError> {
    spec.validate()?;
    config.validate()?;
    if let InactiveDraws::Pseudo { laws } = inactive {
        if laws.len() != spec.params.len() {
            return Err(ChainError::InvalidSpec(format!(
                "{} pseudo-prior laws for {} slots",
                laws.len(),
                spec.params.len()
            )));
        }
    }
    let n = spec.n_models();
    let d = spec.params.len();
    let mut rng = sampling::chain_rng(config.seed);

    // slot ownership lookup for the parameter step
    let owned: Vec<Vec<bool>> = spec
        .components
        .iter()
        .map(|c| {
            let mut mask = vec![false; d];
            for &s in c.slots() {
                mask[s] = true;
            }
            mask
        })
        .collect();

    let theta = match &spec.initial_theta {
        Some(t) => t.clone(),
        None => spec.params.iter().map(|s| s.prior.sample(&mut rng)).collect(),
    };
    let p0: f64 = spec.dirichlet_p.iter().sum();
    let mut state = ChainState {
        alpha: spec.dirichlet_p.iter().map(|p| p / p0).collect(),
        current: 0,
        theta,
        missing: spec.initial_missing.clone(),
        iteration: 0,
    };
    let mut logdens = vec![0.0; n];
    evaluate_components(spec, &state, inactive, &mut logdens)?;
    state.current = update_z(&state.alpha, &logdens, &mut rng).ok_or(ChainError::InfeasibleStart)?;

    let retained = config.retained();
    let mut out = ChainOutput {
        model_names: spec.components.iter().map(|c| c.name().to_string()).collect(),
        param_names: spec.params.iter().map(|s| s.name.clone()).collect(),
        dirichlet_p: spec.dirichlet_p.clone(),
        config: *config,
        retained: 0,
        occupancy: vec![0; n],
        alpha_trace: Vec::with_capacity(retained * n),
        z_trace: Vec::with_capacity(retained),
        theta_trace: Vec::with_capacity(retained * d),
        param_moves: vec![MoveStats::default(); n],
        missing_moves: vec![MoveStats::default(); n],
    };

    for it in 0..config.iterations {
        state.iteration = it;
        for k in 0..config.allocation_updates {
            if k > 0 {
                redraw_inactive(spec, inactive, &owned[state.current], &mut state.theta, &mut rng);
            }
            evaluate_components(spec, &state, inactive, &mut logdens)?;
            state.current = update_z(&state.alpha, &logdens, &mut rng)
                .ok_or(ChainError::Infeasible { iteration: it })?;
        }
        state.alpha = update_alpha(state.current, &spec.dirichlet_p, &mut rng);

        let active = &spec.components[state.current];
        out.param_moves[state.current] +=
            active.update_params_current(&mut state.theta, &state.missing, &mut rng);
        redraw_inactive(spec, inactive, &owned[state.current], &mut state.theta, &mut rng);
        out.missing_moves[state.current] +=
            active.update_missing(&state.theta, &mut state.missing, &mut rng);

        debug_assert!(state.current < n);
        debug_assert!(state.alpha.iter().all(|a| *a > 0.0));
        debug_assert!(
            active
                .log_augmented_density(&state.theta, &state.missing)
                .is_finite(),
            "active model {} left its support at iteration {it}",
            active.name()
        );

        if it >= config.burnin && (it - config.burnin) % config.thin == 0 {
            out.retained += 1;
            out.occupancy[state.current] += 1;
            out.alpha_trace.extend_from_slice(&state.alpha);
            out.z_trace.push(state.current as u32);
            out.theta_trace.extend_from_slice(&state.theta);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::toy::ConstantComponent;

    fn constant_spec(logs: &[f64], p: &[f64]) -> MixtureSpec<()> {
        MixtureSpec {
            components: logs
                .iter()
                .enumerate()
                .map(|(i, &l)| {
                    Box::new(ConstantComponent::new(format!("M{}", i + 1), l))
                        as Box<dyn ModelComponent<()>>
                })
                .collect(),
            dirichlet_p: p.to_vec(),
            params: vec![],
            initial_theta: None,
            initial_missing: (),
        }
    }

    #[test]
    fn allocation_probabilities_examples() {
        let q = allocation_probabilities(&[0.5, 0.5], &[-3.0, -3.0]).unwrap();
        assert!((q[0] - 0.5).abs() < 1e-15);

        let a1 = 1.0 / 51.0;
        let q = allocation_probabilities(&[a1, 1.0 - a1], &[50f64.ln(), 0.0]).unwrap();
        assert!((q[0] - 0.5).abs() < 1e-14);

        let q = allocation_probabilities(&[0.2, 0.8], &[f64::NEG_INFINITY, 1.0]).unwrap();
        assert_eq!(q[0], 0.0);
        assert_eq!(q[1], 1.0);

        assert!(allocation_probabilities(&[0.5, 0.5], &[f64::NEG_INFINITY; 2]).is_none());
    }

    #[test]
    fn infeasible_component_is_never_chosen() {
        let mut rng = sampling::chain_rng(1);
        for _ in 0..1000 {
            assert_eq!(update_z(&[0.9, 0.1], &[f64::NEG_INFINITY, -1e3], &mut rng), Some(1));
        }
    }

    #[test]
    fn rao_blackwell_examples() {
        let rb = rao_blackwell_alpha(&[0; 10], &[1.0, 1.0]).unwrap();
        assert!((rb.values()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((rb.values()[1] - 1.0 / 3.0).abs() < 1e-15);

        let alternating: Vec<u32> = (0..100).map(|i| i % 2).collect();
        let rb = rao_blackwell_alpha(&alternating, &[1.0, 1.0]).unwrap();
        assert!((rb.values()[0] - 0.5).abs() < 1e-15);

        let rb = rao_blackwell_alpha(&alternating, &[1.0, 50.0]).unwrap();
        assert!((rb.values()[0] - 1.5 / 52.0).abs() < 1e-15);

        assert!(rao_blackwell_alpha(&[], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ChainConfig { iterations: 10, burnin: 10, ..ChainConfig::new(10, 0) }.validate().is_err());
        assert!(ChainConfig { burnin: 0, thin: 0, ..ChainConfig::new(10, 0) }.validate().is_err());
        let c = ChainConfig::new(1000, 3);
        assert_eq!(c.burnin, 100);
        assert_eq!(c.retained(), 900);
        assert_eq!(ChainConfig { thin: 7, ..c }.retained(), 129);
    }

    #[test]
    fn spec_validation() {
        let spec = constant_spec(&[0.0], &[1.0]);
        assert!(matches!(run_chain(&spec, &ChainConfig::new(100, 1)), Err(ChainError::InvalidSpec(_))));
        let spec = constant_spec(&[0.0, 0.0], &[1.0, 0.0]);
        assert!(spec.validate().is_err());
        let spec = constant_spec(&[f64::NEG_INFINITY, f64::NEG_INFINITY], &[1.0, 1.0]);
        assert_eq!(
            run_chain(&spec, &ChainConfig::new(100, 1)).unwrap_err(),
            ChainError::InfeasibleStart
        );
        let spec = constant_spec(&[f64::NAN, 0.0], &[1.0, 1.0]);
        assert!(matches!(
            run_chain(&spec, &ChainConfig::new(100, 1)),
            Err(ChainError::NumericalOverflow { component: 0, .. })
        ));
    }

    #[test]
    fn occupancy_counts_sum_to_retained() {
        let spec = constant_spec(&[0.0, 1.0, -1.0], &[1.0, 2.0, 3.0]);
        let config = ChainConfig {
            iterations: 5000,
            burnin: 500,
            thin: 3,
            seed: 9,
            allocation_updates: 1,
        };
        let out = run_chain(&spec, &config).unwrap();
        assert_eq!(out.retained, config.retained());
        assert_eq!(out.occupancy.iter().sum::<u64>() as usize, out.retained);
        assert_eq!(out.z_trace.len(), out.retained);
        assert_eq!(out.alpha_trace.len(), out.retained * 3);
    }

    #[test]
    fn chains_are_deterministic() {
        let spec = constant_spec(&[0.0, 2.0], &[1.0, 3.0]);
        let config = ChainConfig::new(20_000, 42);
        let a = run_chain(&spec, &config).unwrap();
        let b = run_chain(&spec, &config).unwrap();
        assert_eq!(a.z_trace, b.z_trace);
        assert_eq!(
            a.alpha_trace.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.alpha_trace.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        let c = run_chain(&spec, &ChainConfig::new(20_000, 43)).unwrap();
        assert_ne!(a.z_trace, c.z_trace);
    }
}
