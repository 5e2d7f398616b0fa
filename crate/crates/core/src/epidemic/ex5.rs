//! Case times explained either by a Poisson process or by an SIR epidemic
//! started by one infective at time zero and observed on `[0, T]`.
//!
//! The epidemic imputes a variable number of ordered infection times
//! `0 = i₁ < i₂ < … < i_m`. Under the Poisson model the same vector is padded
//! with a missing-data prior: a truncated geometric count followed by a chain
//! of truncated exponentials.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_removals, Population};
use crate::mcmc::{MixtureSpec, ModelComponent, MoveStats, ParamSlot};
use crate::models::DataError;
use crate::sampling::{self, ChainRng, ParamPrior};

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationEx5 {
    removals: Arc<Vec<f64>>,
    horizon: f64,
    /// Sorted, with `infections[0] == 0`.
    infections: Vec<f64>,
}

impl AugmentationEx5 {
    pub fn new(removals: Arc<Vec<f64>>, horizon: f64, infections: Vec<f64>) -> Result<Self, DataError> {
        check_removals(&removals)?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(DataError("observation horizon must be positive".into()));
        }
        if removals.iter().any(|r| *r <= 0.0 || *r > horizon) {
            return Err(DataError(format!("removal times must lie in (0, {horizon}]")));
        }
        if infections.first() != Some(&0.0) {
            return Err(DataError("the first infection must be at time 0".into()));
        }
        if infections.windows(2).any(|w| !(w[0] < w[1])) || infections.iter().any(|t| !(*t < horizon)) {
            return Err(DataError("infection times must increase and precede the horizon".into()));
        }
        Ok(Self {
            removals,
            horizon,
            infections,
        })
    }

    pub fn removals(&self) -> &[f64] {
        &self.removals
    }

    pub fn infections(&self) -> &[f64] {
        &self.infections
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of infections `m`, including the initial one.
    pub fn m(&self) -> usize {
        self.infections.len()
    }

    pub fn n(&self) -> usize {
        self.removals.len()
    }

    /// Membership of `F(r)` by replaying the path: every event must find an infective.
    pub fn is_feasible(&self, pop: Population) -> bool {
        ex5_summary(&self.removals, &self.infections, self.horizon, pop).is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ex5Summary {
    /// `Σ ln(S(i_j−) I(i_j−))` over `j ≥ 2` plus `Σ ln I(r_j−)`.
    pub log_terms: f64,
    pub si_integral: f64,
    pub i_integral: f64,
}

/// Replay of `[0, T]`; `None` outside the feasible set.
pub fn ex5_summary(removals: &[f64], infections: &[f64], horizon: f64, pop: Population) -> Option<Ex5Summary> {
    if infections.len() > pop.total() as usize || infections.len() < removals.len() {
        return None;
    }
    let mut s = f64::from(pop.susceptibles);
    let mut inf = 1.0;
    let mut t = 0.0;
    let (mut a, mut b) = (1, 0);
    let mut out = Ex5Summary {
        log_terms: 0.0,
        si_integral: 0.0,
        i_integral: 0.0,
    };
    while a < infections.len() || b < removals.len() {
        let infection_next = a < infections.len() && (b == removals.len() || infections[a] <= removals[b]);
        let te = if infection_next { infections[a] } else { removals[b] };
        if inf < 1.0 {
            return None;
        }
        out.si_integral += s * inf * (te - t);
        out.i_integral += inf * (te - t);
        t = te;
        if infection_next {
            out.log_terms += (s * inf).ln();
            s -= 1.0;
            inf += 1.0;
            a += 1;
        } else {
            out.log_terms += f64::ln(inf);
            inf -= 1.0;
            b += 1;
        }
    }
    out.si_integral += s * inf * (horizon - t);
    out.i_integral += inf * (horizon - t);
    Some(out)
}

/// Epidemic augmented log-likelihood.
pub fn ex5_loglik(aug: &AugmentationEx5, pop: Population, beta: f64, gamma: f64) -> f64 {
    ex5_loglik_parts(&aug.removals, &aug.infections, aug.horizon, pop, beta, gamma)
}

fn ex5_loglik_parts(
    removals: &[f64],
    infections: &[f64],
    horizon: f64,
    pop: Population,
    beta: f64,
    gamma: f64,
) -> f64 {
    match ex5_summary(removals, infections, horizon, pop) {
        Some(s) => {
            (infections.len() - 1) as f64 * beta.ln() + removals.len() as f64 * gamma.ln() + s.log_terms
                - beta * s.si_integral
                - gamma * s.i_integral
        }
        None => f64::NEG_INFINITY,
    }
}

/// Log-likelihood of the case times under a Poisson process.
pub fn ex5_poisson_loglik(n: usize, horizon: f64, lambda: f64) -> f64 {
    n as f64 * lambda.ln() - lambda * horizon
}

/// The missing-data prior padding the Poisson model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissingPrior {
    /// Rate of the truncated exponentials.
    pub mu: f64,
    /// Parameter of the truncated geometric law of `m`.
    pub theta_geom: f64,
}

impl MissingPrior {
    pub fn validate(&self) -> Result<(), DataError> {
        if !(self.mu > 0.0 && self.theta_geom > 0.0 && self.theta_geom < 1.0) {
            return Err(DataError("need mu > 0 and 0 < theta_geom < 1".into()));
        }
        Ok(())
    }

    fn m_range(n: usize, pop: Population) -> (usize, usize) {
        (n.max(1), pop.total() as usize)
    }

    /// `ln f(m)` for the truncated geometric on `{max(n,1), …, N}`.
    pub fn ln_count_pmf(&self, m: usize, n: usize, pop: Population) -> f64 {
        let (lo, hi) = Self::m_range(n, pop);
        if m < lo || m > hi {
            return f64::NEG_INFINITY;
        }
        let q = (1.0 - self.theta_geom).ln();
        let norm = -((hi - lo + 1) as f64 * q).exp_m1();
        (m - lo) as f64 * q + self.theta_geom.ln() - norm.ln()
    }

    /// Upper bound for the `j`-th step of the chain (1-based): `r_j`, then `T`.
    fn bound(j: usize, removals: &[f64], horizon: f64) -> f64 {
        if j <= removals.len() {
            removals[j - 1]
        } else {
            horizon
        }
    }

    /// Draws from the construction below, restarting when an interval has no
    /// representable interior point (deep pile-ups against a bound).
    pub fn sample<R: Rng + ?Sized>(&self, removals: &[f64], horizon: f64, pop: Population, rng: &mut R) -> Vec<f64> {
        let n = removals.len();
        let (lo, hi) = Self::m_range(n, pop);
        let logs: Vec<f64> = (lo..=hi).map(|m| self.ln_count_pmf(m, n, pop)).collect();
        'draw: loop {
            let m = lo + sampling::categorical_from_log(rng, &logs).expect("finite count weights");
            let mut out = Vec::with_capacity(m);
            out.push(0.0);
            for j in 1..m {
                let (a, b) = (out[j - 1], Self::bound(j, removals, horizon));
                let mut x = sampling::truncated_exponential(rng, self.mu, a, b);
                let mut tries = 0;
                while !(x > a && x < b) {
                    tries += 1;
                    if tries > 16 {
                        continue 'draw;
                    }
                    x = sampling::truncated_exponential(rng, self.mu, a, b);
                }
                out.push(x);
            }
            return out;
        }
    }

    /// Density of the construction in [`MissingPrior::sample`].
    pub fn ln_density(&self, removals: &[f64], horizon: f64, pop: Population, infections: &[f64]) -> f64 {
        let m = infections.len();
        if infections.first() != Some(&0.0) {
            return f64::NEG_INFINITY;
        }
        let mut total = self.ln_count_pmf(m, removals.len(), pop);
        for j in 1..m {
            total += sampling::truncated_exponential_ln_pdf(
                self.mu,
                infections[j - 1],
                Self::bound(j, removals, horizon),
                infections[j],
            );
        }
        total
    }
}

/// Probabilities of (move, add, delete), renormalised over the moves that
/// are possible for `m` infections.
pub fn move_probabilities(m: usize, n: usize, pop: Population) -> [f64; 3] {
    let possible = [m >= 2, m < pop.total() as usize, m > n.max(1)];
    let k = possible.iter().filter(|p| **p).count() as f64;
    possible.map(|p| if p && k > 0.0 { 1.0 / k } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionMove {
    Move,
    Add,
    Delete,
}

/// One move/add/delete proposal on the infection times with `(β, γ)` fixed.
pub fn ex5_mh_dimension_move<R: Rng + ?Sized>(
    aug: &mut AugmentationEx5,
    pop: Population,
    log_target: &dyn Fn(&[f64]) -> f64,
    current: f64,
    rng: &mut R,
) -> Option<(DimensionMove, bool, f64)> {
    let (m, n, horizon) = (aug.m(), aug.n(), aug.horizon);
    let probs = move_probabilities(m, n, pop);
    let u: f64 = rng.random();
    let kind = if u < probs[0] {
        DimensionMove::Move
    } else if u < probs[0] + probs[1] {
        DimensionMove::Add
    } else if probs[2] > 0.0 {
        DimensionMove::Delete
    } else {
        return None;
    };
    let mut proposal = aug.infections.clone();
    let log_q = match kind {
        DimensionMove::Move => {
            let k = rng.random_range(1..m);
            proposal.remove(k);
            insert_sorted(&mut proposal, rng.random::<f64>() * horizon);
            0.0
        }
        DimensionMove::Add => {
            insert_sorted(&mut proposal, rng.random::<f64>() * horizon);
            let back = move_probabilities(m + 1, n, pop)[2];
            (horizon * back / (probs[1] * m as f64)).ln()
        }
        DimensionMove::Delete => {
            let k = rng.random_range(1..m);
            proposal.remove(k);
            let back = move_probabilities(m - 1, n, pop)[1];
            (back * (m - 1) as f64 / (horizon * probs[2])).ln()
        }
    };
    // ties with existing times have probability zero but would break ordering
    if proposal.windows(2).any(|w| !(w[0] < w[1])) || proposal[0] != 0.0 {
        return Some((kind, false, current));
    }
    let candidate = log_target(&proposal);
    let log_ratio = candidate - current + log_q;
    if candidate.is_finite() && (log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio) {
        aug.infections = proposal;
        Some((kind, true, candidate))
    } else {
        Some((kind, false, current))
    }
}

fn insert_sorted(v: &mut Vec<f64>, x: f64) {
    let at = v.partition_point(|y| *y < x);
    v.insert(at, x);
}

pub struct PoissonEx5Component {
    n: usize,
    pop: Population,
    missing_prior: MissingPrior,
    rate_prior: (f64, f64),
    slots: [usize; 1],
}

impl PoissonEx5Component {
    pub fn new(n: usize, pop: Population, missing_prior: MissingPrior, rate_prior: (f64, f64), slot: usize) -> Self {
        Self {
            n,
            pop,
            missing_prior,
            rate_prior,
            slots: [slot],
        }
    }
}

impl ModelComponent<AugmentationEx5> for PoissonEx5Component {
    fn name(&self) -> &str {
        "poisson"
    }

    fn slots(&self) -> &[usize] {
        &self.slots
    }

    fn log_augmented_density(&self, theta: &[f64], aug: &AugmentationEx5) -> f64 {
        ex5_poisson_loglik(self.n, aug.horizon, theta[self.slots[0]])
    }

    fn log_missing_prior(&self, _theta: &[f64], aug: &AugmentationEx5) -> f64 {
        self.missing_prior
            .ln_density(&aug.removals, aug.horizon, self.pop, &aug.infections)
    }

    fn update_params_current(&self, theta: &mut [f64], aug: &AugmentationEx5, rng: &mut ChainRng) -> MoveStats {
        theta[self.slots[0]] = sampling::gamma(
            rng,
            self.n as f64 + self.rate_prior.0,
            aug.horizon + self.rate_prior.1,
        );
        MoveStats::accepted(1)
    }

    /// The padding density is the full conditional, so draw from it directly.
    fn update_missing(&self, _theta: &[f64], aug: &mut AugmentationEx5, rng: &mut ChainRng) -> MoveStats {
        aug.infections = self
            .missing_prior
            .sample(&aug.removals, aug.horizon, self.pop, rng);
        MoveStats::accepted(1)
    }
}

pub struct EpidemicEx5Component {
    pop: Population,
    beta_prior: (f64, f64),
    gamma_prior: (f64, f64),
    moves_per_sweep: usize,
    slots: [usize; 2],
}

impl EpidemicEx5Component {
    pub fn new(pop: Population, prior: (f64, f64), moves_per_sweep: usize, slots: [usize; 2]) -> Self {
        Self {
            pop,
            beta_prior: prior,
            gamma_prior: prior,
            moves_per_sweep,
            slots,
        }
    }
}

impl ModelComponent<AugmentationEx5> for EpidemicEx5Component {
    fn name(&self) -> &str {
        "epidemic"
    }

    fn slots(&self) -> &[usize] {
        &self.slots
    }

    fn log_augmented_density(&self, theta: &[f64], aug: &AugmentationEx5) -> f64 {
        ex5_loglik(aug, self.pop, theta[self.slots[0]], theta[self.slots[1]])
    }

    fn update_params_current(&self, theta: &mut [f64], aug: &AugmentationEx5, rng: &mut ChainRng) -> MoveStats {
        let s = ex5_summary(&aug.removals, &aug.infections, aug.horizon, self.pop)
            .expect("active epidemic keeps a feasible augmentation");
        theta[self.slots[0]] = sampling::gamma(
            rng,
            (aug.m() - 1) as f64 + self.beta_prior.0,
            s.si_integral + self.beta_prior.1,
        );
        theta[self.slots[1]] = sampling::gamma(
            rng,
            aug.n() as f64 + self.gamma_prior.0,
            s.i_integral + self.gamma_prior.1,
        );
        MoveStats::accepted(2)
    }

    fn update_missing(&self, theta: &[f64], aug: &mut AugmentationEx5, rng: &mut ChainRng) -> MoveStats {
        let (beta, gamma) = (theta[self.slots[0]], theta[self.slots[1]]);
        let (removals, horizon, pop) = (aug.removals.clone(), aug.horizon, self.pop);
        let target = move |inf: &[f64]| ex5_loglik_parts(&removals, inf, horizon, pop, beta, gamma);
        let mut current = target(&aug.infections);
        let mut stats = MoveStats::default();
        for _ in 0..self.moves_per_sweep {
            if let Some((_, accepted, value)) = ex5_mh_dimension_move(aug, pop, &target, current, rng) {
                current = value;
                stats.record(accepted);
            }
        }
        stats
    }
}

/// Poisson process (first) against the epidemic. Slots: `lambda, beta, gamma`.
pub fn ex5_spec(
    removals: Arc<Vec<f64>>,
    horizon: f64,
    pop: Population,
    missing_prior: MissingPrior,
    prior: (f64, f64),
    dirichlet_p: [f64; 2],
    moves_per_sweep: usize,
    seed: u64,
) -> Result<MixtureSpec<AugmentationEx5>, DataError> {
    missing_prior.validate()?;
    if !(prior.0 > 0.0 && prior.1 > 0.0) {
        return Err(DataError("prior parameters must be positive".into()));
    }
    if removals.is_empty() {
        return Err(DataError("at least one case time is required".into()));
    }
    if removals.len() > pop.total() as usize {
        return Err(DataError("more cases than individuals".into()));
    }
    // any draw from the padding density is feasible for the epidemic
    let mut rng = sampling::chain_rng(seed);
    let start = missing_prior.sample(&removals, horizon, pop, &mut rng);
    let aug = AugmentationEx5::new(removals.clone(), horizon, start)?;
    let gamma_prior = ParamPrior::Gamma {
        shape: prior.0,
        rate: prior.1,
    };
    Ok(MixtureSpec {
        components: vec![
            Box::new(PoissonEx5Component::new(removals.len(), pop, missing_prior, prior, 0)),
            Box::new(EpidemicEx5Component::new(pop, prior, moves_per_sweep, [1, 2])),
        ],
        dirichlet_p: dirichlet_p.to_vec(),
        params: ["lambda", "beta", "gamma"]
            .iter()
            .map(|n| ParamSlot::new(*n, gamma_prior))
            .collect(),
        initial_theta: None,
        initial_missing: aug,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pop(n: u32) -> Population {
        Population::new(n).unwrap()
    }

    #[test]
    fn lone_infective_never_removed() {
        let aug = AugmentationEx5::new(Arc::new(vec![]), 4.0, vec![0.0]).unwrap();
        let (beta, gamma) = (0.3, 0.8);
        assert_relative_eq!(
            ex5_loglik(&aug, pop(10), beta, gamma),
            -beta * 10.0 * 4.0 - gamma * 4.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn three_event_product_form() {
        // infections 0, 0.5; removals 1, 2; T = 3; 4 susceptibles
        let aug = AugmentationEx5::new(Arc::new(vec![1.0, 2.0]), 3.0, vec![0.0, 0.5]).unwrap();
        let (beta, gamma): (f64, f64) = (0.4, 1.3);
        // infection at 0.5: S=4, I=1; removals find I=2 then I=1
        let si = 4.0 * 0.5 + 3.0 * 2.0 * 0.5 + 3.0 * 1.0 * 1.0;
        let ii = 0.5 + 2.0 * 0.5 + 1.0;
        let lik = (beta * 4.0) * (gamma * 2.0) * (gamma * 1.0) * (-(beta * si + gamma * ii)).exp();
        assert_relative_eq!(ex5_loglik(&aug, pop(4), beta, gamma), lik.ln(), epsilon = 1e-12);
    }

    #[test]
    fn infeasible_paths() {
        // the only infective is removed at 1 and infection 2 happens later
        let aug = AugmentationEx5::new(Arc::new(vec![1.0, 2.0]), 3.0, vec![0.0, 1.5]).unwrap();
        assert_eq!(ex5_loglik(&aug, pop(4), 1.0, 1.0), f64::NEG_INFINITY);
        assert!(!aug.is_feasible(pop(4)));
        // two removals but one infection
        let aug = AugmentationEx5::new(Arc::new(vec![1.0, 2.0]), 3.0, vec![0.0]).unwrap();
        assert_eq!(ex5_loglik(&aug, pop(4), 1.0, 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn count_pmf_sums_to_one() {
        let prior = MissingPrior {
            mu: 4.0,
            theta_geom: 0.1,
        };
        let total: f64 = (0..=20).map(|m| prior.ln_count_pmf(m, 5, pop(11)).exp()).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn minimal_chain_density() {
        let prior = MissingPrior {
            mu: 4.0,
            theta_geom: 0.3,
        };
        let d = prior.ln_density(&[0.7], 2.0, pop(3), &[0.0]);
        assert_relative_eq!(d, prior.ln_count_pmf(1, 1, pop(3)));
        // m = n = 2: one truncated exponential on (0, r₁)
        let d = prior.ln_density(&[0.7, 1.2], 2.0, pop(3), &[0.0, 0.4]);
        let expected = prior.ln_count_pmf(2, 2, pop(3)) + sampling::truncated_exponential_ln_pdf(4.0, 0.0, 0.7, 0.4);
        assert_relative_eq!(d, expected, epsilon = 1e-14);
    }

    #[test]
    fn missing_prior_draws_are_feasible() {
        let prior = MissingPrior {
            mu: 4.0,
            theta_geom: 0.1,
        };
        let removals = [0.5, 0.6, 1.5, 1.5, 2.5, 3.0];
        let mut rng = sampling::chain_rng(9);
        for _ in 0..20_000 {
            let inf = prior.sample(&removals, 3.5, pop(12), &mut rng);
            let aug = AugmentationEx5::new(Arc::new(removals.to_vec()), 3.5, inf).unwrap();
            assert!(aug.is_feasible(pop(12)));
            assert!(prior.ln_density(&removals, 3.5, pop(12), aug.infections()).is_finite());
        }
    }

    #[test]
    fn move_probabilities_at_boundaries() {
        assert_eq!(move_probabilities(3, 3, pop(5)), [0.5, 0.5, 0.0]);
        assert_eq!(move_probabilities(6, 3, pop(5)), [0.5, 0.0, 0.5]);
        let p = move_probabilities(4, 3, pop(5));
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }
}
