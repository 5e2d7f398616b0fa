//! Bayes factor between infectious-period shapes of the SIR model with
//! `β` and `η` integrated out, by thermodynamic integration along the shape.

use std::sync::Arc;

use rand::Rng;
use statrs::function::gamma::{digamma, ln_gamma};

use super::{OracleError, OracleMethod, OracleResult};
use crate::epidemic::ex4::ex4_summary;
use crate::epidemic::{AugmentationEx4, Population};
use crate::mcmc::diagnostics::batch_means_se;
use crate::sampling::{self, chain_rng};

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Log step size of the random walk on `ln(r_j − i_j)`.
const LOG_PERIOD_STEP: f64 = 0.7;

fn period_stats(aug: &AugmentationEx4) -> (f64, f64) {
    aug.removals()
        .iter()
        .zip(aug.infections())
        .fold((0.0, 0.0), |(s, l), (r, i)| (s + (r - i), l + (r - i).ln()))
}

/// `ln ∫∫ L(i, r | β, η) π(β) π(η) dβ dη` with `Gamma(a, b)` priors on both.
pub fn ex4_collapsed_log_target(aug: &AugmentationEx4, pop: Population, shape: f64, prior: (f64, f64)) -> f64 {
    let Some(summary) = ex4_summary(aug, pop) else {
        return f64::NEG_INFINITY;
    };
    let (a, b) = prior;
    let n = aug.len() as f64;
    let big_n = f64::from(pop.susceptibles);
    let (sum, sum_log) = period_stats(aug);
    let beta_part = a * b.ln() - ln_gamma(a) + ln_gamma(n - 1.0 + a)
        - (n - 1.0 + a) * (summary.si_integral / big_n + b).ln()
        - (n - 1.0) * big_n.ln();
    let eta_part = a * b.ln() - ln_gamma(a) + ln_gamma(n * shape + a) - (n * shape + a) * (sum + b).ln();
    beta_part + summary.log_pressure + eta_part + (shape - 1.0) * sum_log - n * ln_gamma(shape)
}

/// `∂/∂shape` of the collapsed log target.
fn shape_score(aug: &AugmentationEx4, shape: f64, prior: (f64, f64)) -> f64 {
    let n = aug.len() as f64;
    let (sum, sum_log) = period_stats(aug);
    n * digamma(n * shape + prior.0) - n * (sum + prior.1).ln() + sum_log - n * digamma(shape)
}

/// Draws of the shape score under the collapsed posterior at `shape`, from a
/// single-site random walk on the log infectious periods.
pub fn shape_score_draws<R: Rng + ?Sized>(
    removals: &Arc<Vec<f64>>,
    pop: Population,
    shape: f64,
    prior: (f64, f64),
    sweeps: usize,
    rng: &mut R,
) -> Result<Vec<f64>, OracleError> {
    let mut aug = AugmentationEx4::initial(removals.clone()).map_err(|e| OracleError::InvalidArgument(e.to_string()))?;
    let n = aug.len();
    let mut current = ex4_collapsed_log_target(&aug, pop, shape, prior);
    if !current.is_finite() {
        return Err(OracleError::InvalidArgument("initial infection times are infeasible".into()));
    }
    let burn = sweeps / 5;
    let mut out = Vec::with_capacity(sweeps - burn);
    for sweep in 0..sweeps {
        for _ in 0..n {
            let j = rng.random_range(0..n);
            let old = aug.infections()[j];
            let r = removals[j];
            let log_old = (r - old).ln();
            let log_new = log_old + sampling::normal(rng, 0.0, LOG_PERIOD_STEP);
            aug.set_infection(j, r - log_new.exp());
            let cand = ex4_collapsed_log_target(&aug, pop, shape, prior);
            let log_ratio = cand - current + log_new - log_old;
            if cand.is_finite() && (log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio) {
                current = cand;
            } else {
                aug.set_infection(j, old);
            }
        }
        if sweep >= burn {
            out.push(shape_score(&aug, shape, prior));
        }
    }
    Ok(out)
}

/// `ln B₁₂ = ln m(shape₁) − ln m(shape₂)` for two infectious-period shapes.
/// The standard error combines the batch-means errors of the node means.
pub fn ex4_log_bf_shape_path(
    removals: &[f64],
    pop: Population,
    shapes: (f64, f64),
    prior: (f64, f64),
    sweeps: usize,
    seed: u64,
) -> Result<OracleResult, OracleError> {
    let (s1, s2) = shapes;
    if !(s1 > 0.0 && s2 > 0.0) || !(prior.0 > 0.0 && prior.1 > 0.0) {
        return Err(OracleError::InvalidArgument("shapes and prior parameters must be positive".into()));
    }
    if sweeps < 100 {
        return Err(OracleError::InvalidArgument("need at least 100 sweeps per node".into()));
    }
    if s1 == s2 {
        return Ok(OracleResult::exact(0.0, OracleMethod::Quadrature));
    }
    let removals = Arc::new(removals.to_vec());
    let mut rng = chain_rng(seed);
    let half = 0.5 * (s2 - s1);
    let (mut total, mut var) = (0.0, 0.0);
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        let shape = 0.5 * (s1 + s2) + half * x;
        let draws = shape_score_draws(&removals, pop, shape, prior, sweeps, &mut rng)?;
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let se = batch_means_se(&draws);
        total += half * w * mean;
        var += (half * w * se).powi(2);
    }
    // total = ln m(s₂) − ln m(s₁)
    let log_value = -total;
    Ok(OracleResult {
        value: log_value.exp(),
        log_value,
        standard_error: var.sqrt(),
        method: OracleMethod::Quadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn collapsed_target_matches_numeric_integral_over_rates() {
        let removals = Arc::new(vec![1.0, 1.6, 2.5]);
        let aug = AugmentationEx4::new(removals, vec![0.0, 0.4, 1.2]).unwrap();
        let pop = Population::new(9).unwrap();
        let (shape, prior) = (2.0, (1.5, 0.7));
        let gamma_ln = |x: f64| sampling::gamma_ln_pdf(prior.0, prior.1, x);
        let inner = |beta: f64| {
            let g = |v: f64| {
                let eta = v.exp();
                crate::epidemic::ex4::ex4_loglik(&aug, pop, beta, eta, shape) + gamma_ln(eta) + v
            };
            crate::oracle::integrate_log_peak(g, 0.0, 1e-11).unwrap()
        };
        let outer = |u: f64| {
            let beta = u.exp();
            inner(beta) + gamma_ln(beta) + u
        };
        let numeric = crate::oracle::integrate_log_peak(outer, 0.0, 1e-9).unwrap();
        assert_relative_eq!(ex4_collapsed_log_target(&aug, pop, shape, prior), numeric, epsilon = 1e-6);
    }

    #[test]
    fn equal_shapes_give_unit_factor() {
        let r = ex4_log_bf_shape_path(&[1.0, 2.0], Population::new(5).unwrap(), (2.0, 2.0), (1.0, 1.0), 1000, 1).unwrap();
        assert_eq!(r.log_value, 0.0);
    }
}
