//! Random-number plumbing shared by the samplers.
//!
//! Gamma variates use the shape–rate convention, `density ∝ x^{shape−1} e^{−rate·x}`.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

/// One seedable stream per chain.
pub type ChainRng = rand_chacha::ChaCha8Rng;

pub fn chain_rng(seed: u64) -> ChainRng {
    ChainRng::seed_from_u64(seed)
}

/// Seed for replicate `r` of a run started from `master`.
pub fn replicate_seed(master: u64, replicate: usize) -> u64 {
    master.wrapping_add(1_000_003u64.wrapping_mul(replicate as u64))
}

pub fn gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> f64 {
    debug_assert!(shape > 0.0 && rate > 0.0, "gamma({shape}, {rate})");
    Gamma::new(shape, 1.0 / rate)
        .expect("positive gamma parameters")
        .sample(rng)
}

pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e / rate
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    mean + sd * z
}

/// Exponential with rate `rate` truncated to `(lo, hi)`, by inversion.
pub fn truncated_exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(hi > lo);
    let width = hi - lo;
    let u: f64 = rng.random();
    // F(t) = (1 − e^{−rate t}) / (1 − e^{−rate·width}) for t in (0, width)
    let mass = -(-rate * width).exp_m1();
    let t = -(-u * mass).ln_1p() / rate;
    (lo + t).clamp(lo, hi)
}

/// Log density of the truncated exponential at `x`.
pub fn truncated_exponential_ln_pdf(rate: f64, lo: f64, hi: f64, x: f64) -> f64 {
    if !(x > lo && x < hi) {
        return f64::NEG_INFINITY;
    }
    let mass = -(-rate * (hi - lo)).exp_m1();
    rate.ln() - rate * (x - lo) - mass.ln()
}

pub fn gamma_ln_pdf(shape: f64, rate: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - statrs::function::gamma::ln_gamma(shape)
}

pub fn ln_factorial(n: u64) -> f64 {
    statrs::function::gamma::ln_gamma(n as f64 + 1.0)
}

/// Categorical draw from unnormalised log weights. Entries of `-inf` get zero
/// probability; returns `None` when no entry is finite.
pub fn categorical_from_log<R: Rng + ?Sized>(rng: &mut R, log_weights: &[f64]) -> Option<usize> {
    let probs = normalise_log_weights(log_weights)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return Some(i);
            }
        }
    }
    Some(last)
}

/// Log-sum-exp normalisation of log weights into probabilities.
pub fn normalise_log_weights(log_weights: &[f64]) -> Option<Vec<f64>> {
    let max = log_weights
        .iter()
        .cloned()
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let unnorm: Vec<f64> = log_weights
        .iter()
        .map(|v| if v.is_nan() { 0.0 } else { (v - max).exp() })
        .collect();
    let total: f64 = unnorm.iter().sum();
    Some(unnorm.into_iter().map(|v| v / total).collect())
}

/// Prior attached to one parameter slot of a hypermodel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ParamPrior {
    /// Shape–rate gamma.
    Gamma { shape: f64, rate: f64 },
    Normal { mean: f64, sd: f64 },
    /// `1/x ~ Gamma(shape, scale)`, i.e. density `1 / (e^{1/(scale·x)} Γ(shape) scale^shape x^{shape+1})`.
    InverseGamma { shape: f64, scale: f64 },
}

impl ParamPrior {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ParamPrior::Gamma { shape, rate } => gamma(rng, shape, rate),
            ParamPrior::Normal { mean, sd } => normal(rng, mean, sd),
            ParamPrior::InverseGamma { shape, scale } => 1.0 / gamma(rng, shape, 1.0 / scale),
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            ParamPrior::Gamma { shape, rate } => gamma_ln_pdf(shape, rate, x),
            ParamPrior::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
            ParamPrior::InverseGamma { shape, scale } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                -1.0 / (scale * x)
                    - statrs::function::gamma::ln_gamma(shape)
                    - shape * scale.ln()
                    - (shape + 1.0) * x.ln()
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ParamPrior::Gamma { shape, rate } => shape / rate,
            ParamPrior::Normal { mean, .. } => mean,
            ParamPrior::InverseGamma { shape, scale } => 1.0 / (scale * (shape - 1.0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_uses_rate() {
        let mut rng = chain_rng(7);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| gamma(&mut rng, 6.0, 11.0)).sum::<f64>() / n as f64;
        // sd of the mean is sqrt(6)/11/sqrt(n) ≈ 5e-4
        assert!((mean - 6.0 / 11.0).abs() < 3e-3, "{mean}");
    }

    #[test]
    fn truncated_exponential_stays_inside() {
        let mut rng = chain_rng(3);
        for _ in 0..10_000 {
            let x = truncated_exponential(&mut rng, 4.0, 1.0, 1.2);
            assert!(x > 1.0 && x <= 1.2);
            assert!(truncated_exponential_ln_pdf(4.0, 1.0, 1.2, x).is_finite() || x == 1.2);
        }
    }

    #[test]
    fn truncated_exponential_density_integrates_to_one() {
        let (rate, lo, hi) = (4.0, 0.3, 1.7);
        let steps = 100_000;
        let h = (hi - lo) / steps as f64;
        let total: f64 = (0..steps)
            .map(|k| truncated_exponential_ln_pdf(rate, lo, hi, lo + (k as f64 + 0.5) * h).exp() * h)
            .sum();
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn log_weights_normalise() {
        let p = normalise_log_weights(&[0.0, f64::NEG_INFINITY, 50f64.ln()]).unwrap();
        assert_eq!(p[1], 0.0);
        assert!((p[2] - 50.0 / 51.0).abs() < 1e-15);
        assert!(normalise_log_weights(&[f64::NEG_INFINITY; 2]).is_none());
    }

    #[test]
    fn inverse_gamma_density_matches_scale_form() {
        let prior = ParamPrior::InverseGamma {
            shape: 3.0,
            scale: 1.0 / (2.0 * 300.0f64.powi(2)),
        };
        let x = 90_000.0;
        let (a, b): (f64, f64) = (3.0, 1.0 / (2.0 * 300.0f64.powi(2)));
        let direct = 1.0 / ((1.0 / (b * x)).exp() * 2.0 * b.powf(a) * x.powf(a + 1.0));
        assert!((prior.ln_pdf(x) - direct.ln()).abs() < 1e-10);
    }
}
