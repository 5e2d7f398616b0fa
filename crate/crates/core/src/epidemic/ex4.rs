//! Removal-time data with one imputed infection time per removal.
//!
//! The two competing models differ only in the infectious-period law:
//! `Gamma(1, γ)` against `Gamma(m, λ)` with `m` known. Both share the imputed
//! infection times, so no missing-data prior is needed.

use std::sync::Arc;

use rand::Rng;

use super::{check_removals, Population};
use crate::mcmc::{MixtureSpec, ModelComponent, MoveStats, ParamSlot};
use crate::models::DataError;
use crate::sampling::{self, ChainRng, ParamPrior};

/// Infection time `i_j` for the individual removed at `r_j`. The initial
/// infective is whoever was infected first.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationEx4 {
    removals: Arc<Vec<f64>>,
    infections: Vec<f64>,
    sorted: Vec<f64>,
}

impl AugmentationEx4 {
    pub fn new(removals: Arc<Vec<f64>>, infections: Vec<f64>) -> Result<Self, DataError> {
        check_removals(&removals)?;
        if removals.is_empty() {
            return Err(DataError("at least one removal is required".into()));
        }
        if infections.len() != removals.len() {
            return Err(DataError("one infection time per removal is required".into()));
        }
        if infections.iter().any(|t| !t.is_finite()) {
            return Err(DataError("infection times must be finite".into()));
        }
        let mut sorted = infections.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            removals,
            infections,
            sorted,
        })
    }

    /// `i_j = r_j − d` with `d` larger than every gap between removals, so
    /// the infectives never run out before the last removal.
    pub fn initial(removals: Arc<Vec<f64>>) -> Result<Self, DataError> {
        let max_gap = removals
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max);
        let d = if max_gap > 0.0 { 2.0 * max_gap } else { 1.0 };
        let infections = removals.iter().map(|r| r - d).collect();
        Self::new(removals, infections)
    }

    pub fn removals(&self) -> &[f64] {
        &self.removals
    }

    pub fn infections(&self) -> &[f64] {
        &self.infections
    }

    pub fn len(&self) -> usize {
        self.removals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.removals.is_empty()
    }

    /// Index of the initial infective.
    pub fn initial_index(&self) -> usize {
        self.infections
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .unwrap()
    }

    pub fn total_infectious_time(&self) -> f64 {
        self.removals
            .iter()
            .zip(&self.infections)
            .map(|(r, i)| r - i)
            .sum()
    }

    pub fn set_infection(&mut self, j: usize, time: f64) {
        let old = self.infections[j];
        self.infections[j] = time;
        let at = self
            .sorted
            .binary_search_by(|x| x.total_cmp(&old))
            .expect("sorted copy holds every infection time");
        self.sorted.remove(at);
        let to = self.sorted.partition_point(|x| *x < time);
        self.sorted.insert(to, time);
    }
}

/// What the likelihood and the Gibbs conditionals need from one replay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ex4Summary {
    /// `Σ_{j≠p} ln I(i_j−)`.
    pub log_pressure: f64,
    /// `∫_{i_p}^{r_n} S(t) I(t) dt`.
    pub si_integral: f64,
}

/// Replays the path from the initial infection; `None` when some non-initial
/// infection finds no infective or some `i_j ≥ r_j`.
pub fn ex4_summary(aug: &AugmentationEx4, pop: Population) -> Option<Ex4Summary> {
    if aug
        .infections
        .iter()
        .zip(aug.removals.iter())
        .any(|(i, r)| !(i < r))
    {
        return None;
    }
    let inf = &aug.sorted;
    let rem = &aug.removals;
    if inf.len() > pop.total() as usize {
        return None;
    }
    let mut s = f64::from(pop.susceptibles);
    let mut infectives = 1.0;
    let mut t = inf[0];
    let (mut a, mut b) = (1, 0);
    let mut log_pressure = 0.0;
    let mut si = 0.0;
    while b < rem.len() {
        let infection_next = a < inf.len() && inf[a] <= rem[b];
        let te = if infection_next { inf[a] } else { rem[b] };
        si += s * infectives * (te - t);
        t = te;
        if infection_next {
            if infectives < 1.0 {
                return None;
            }
            log_pressure += f64::ln(infectives);
            s -= 1.0;
            infectives += 1.0;
            a += 1;
        } else {
            infectives -= 1.0;
            b += 1;
        }
    }
    Some(Ex4Summary {
        log_pressure,
        si_integral: si,
    })
}

/// Augmented log-likelihood with `Gamma(shape, eta)` infectious periods.
pub fn ex4_loglik(aug: &AugmentationEx4, pop: Population, beta: f64, eta: f64, shape: f64) -> f64 {
    match ex4_summary(aug, pop) {
        Some(summary) => loglik_from_summary(aug, pop, &summary, beta, eta, shape),
        None => f64::NEG_INFINITY,
    }
}

fn loglik_from_summary(
    aug: &AugmentationEx4,
    pop: Population,
    summary: &Ex4Summary,
    beta: f64,
    eta: f64,
    shape: f64,
) -> f64 {
    let n = aug.len() as f64;
    let rate = beta / f64::from(pop.susceptibles);
    let periods: f64 = aug
        .removals
        .iter()
        .zip(&aug.infections)
        .map(|(r, i)| sampling::gamma_ln_pdf(shape, eta, r - i))
        .sum();
    (n - 1.0) * rate.ln() + summary.log_pressure - rate * summary.si_integral + periods
}

/// Gibbs draws of `(β, η)` under `Gamma(a, b)` priors.
pub fn ex4_gibbs<R: Rng + ?Sized>(
    aug: &AugmentationEx4,
    pop: Population,
    shape: f64,
    beta_prior: (f64, f64),
    eta_prior: (f64, f64),
    rng: &mut R,
) -> Option<(f64, f64)> {
    let summary = ex4_summary(aug, pop)?;
    let n = aug.len() as f64;
    let beta = sampling::gamma(
        rng,
        n - 1.0 + beta_prior.0,
        summary.si_integral / f64::from(pop.susceptibles) + beta_prior.1,
    );
    let eta = sampling::gamma(
        rng,
        n * shape + eta_prior.0,
        aug.total_infectious_time() + eta_prior.1,
    );
    Some((beta, eta))
}

/// One independence-type proposal `i_j* = r_j − Exp(δ)` for a uniformly chosen `j`.
#[allow(clippy::too_many_arguments)]
pub fn ex4_mh_infection<R: Rng + ?Sized>(
    aug: &mut AugmentationEx4,
    pop: Population,
    beta: f64,
    eta: f64,
    shape: f64,
    delta: f64,
    current_loglik: f64,
    rng: &mut R,
) -> (bool, f64) {
    let j = rng.random_range(0..aug.len());
    let old = aug.infections[j];
    let proposal = aug.removals[j] - sampling::exponential(rng, delta);
    aug.set_infection(j, proposal);
    let candidate = ex4_loglik(aug, pop, beta, eta, shape);
    let log_ratio = candidate - current_loglik + delta * (old - proposal);
    if candidate.is_finite() && (log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio) {
        (true, candidate)
    } else {
        aug.set_infection(j, old);
        (false, current_loglik)
    }
}

/// One of the two competing models.
pub struct Ex4Component {
    name: String,
    pop: Population,
    shape: f64,
    beta_prior: (f64, f64),
    eta_prior: (f64, f64),
    slots: [usize; 2],
    /// Proposals per sweep, as a multiple of the number of removals.
    mh_sweeps: f64,
}

impl Ex4Component {
    pub fn new(
        name: impl Into<String>,
        pop: Population,
        shape: f64,
        prior: (f64, f64),
        slots: [usize; 2],
    ) -> Self {
        Self {
            name: name.into(),
            pop,
            shape,
            beta_prior: prior,
            eta_prior: prior,
            slots,
            mh_sweeps: 1.0,
        }
    }

    pub fn with_mh_sweeps(mut self, sweeps: f64) -> Self {
        self.mh_sweeps = sweeps;
        self
    }
}

impl ModelComponent<AugmentationEx4> for Ex4Component {
    fn name(&self) -> &str {
        &self.name
    }

    fn slots(&self) -> &[usize] {
        &self.slots
    }

    fn log_augmented_density(&self, theta: &[f64], aug: &AugmentationEx4) -> f64 {
        ex4_loglik(aug, self.pop, theta[self.slots[0]], theta[self.slots[1]], self.shape)
    }

    fn update_params_current(
        &self,
        theta: &mut [f64],
        aug: &AugmentationEx4,
        rng: &mut ChainRng,
    ) -> MoveStats {
        let (beta, eta) = ex4_gibbs(aug, self.pop, self.shape, self.beta_prior, self.eta_prior, rng)
            .expect("active model keeps a feasible augmentation");
        theta[self.slots[0]] = beta;
        theta[self.slots[1]] = eta;
        MoveStats::accepted(2)
    }

    fn update_missing(
        &self,
        theta: &[f64],
        aug: &mut AugmentationEx4,
        rng: &mut ChainRng,
    ) -> MoveStats {
        let (beta, eta) = (theta[self.slots[0]], theta[self.slots[1]]);
        // proposal mean matches the current mean infectious period
        let delta = eta / self.shape;
        let mut current = ex4_loglik(aug, self.pop, beta, eta, self.shape);
        let proposals = ((aug.len() as f64) * self.mh_sweeps).ceil().max(1.0) as usize;
        let mut stats = MoveStats::default();
        for _ in 0..proposals {
            let (accepted, value) =
                ex4_mh_infection(aug, self.pop, beta, eta, self.shape, delta, current, rng);
            current = value;
            stats.record(accepted);
        }
        stats
    }
}

/// `Gamma(1, γ)` (first) against `Gamma(shape, λ)` periods, all parameters with
/// a `Gamma(prior.0, prior.1)` prior. Slots: `beta_1, gamma, beta_2, lambda`.
pub fn ex4_spec(
    removals: Arc<Vec<f64>>,
    pop: Population,
    shape: f64,
    prior: (f64, f64),
    dirichlet_p: [f64; 2],
    mh_sweeps: f64,
) -> Result<MixtureSpec<AugmentationEx4>, DataError> {
    if !(shape > 0.0 && prior.0 > 0.0 && prior.1 > 0.0) {
        return Err(DataError("shape and prior parameters must be positive".into()));
    }
    if removals.len() > pop.total() as usize {
        return Err(DataError(format!(
            "{} removals exceed the population of {}",
            removals.len(),
            pop.total()
        )));
    }
    let aug = AugmentationEx4::initial(removals)?;
    let gamma_prior = ParamPrior::Gamma {
        shape: prior.0,
        rate: prior.1,
    };
    let mean = prior.0 / prior.1;
    Ok(MixtureSpec {
        components: vec![
            Box::new(Ex4Component::new("exponential", pop, 1.0, prior, [0, 1]).with_mh_sweeps(mh_sweeps)),
            Box::new(
                Ex4Component::new(format!("gamma_shape_{shape}"), pop, shape, prior, [2, 3])
                    .with_mh_sweeps(mh_sweeps),
            ),
        ],
        dirichlet_p: dirichlet_p.to_vec(),
        params: ["beta_1", "gamma", "beta_2", "lambda"]
            .iter()
            .map(|n| ParamSlot::new(*n, gamma_prior))
            .collect(),
        initial_theta: Some(vec![mean; 4]),
        initial_missing: aug,
    })
}
