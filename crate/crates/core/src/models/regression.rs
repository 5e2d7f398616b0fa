//! Two non-nested normal linear regressions with conjugate updates.
//!
//! Model 1 regresses `y` on the centred covariate `x`, model 2 on the centred
//! covariate `z`. Each has coefficients `(intercept, slope) ~ N(μ₀, diag(v₀))`
//! and an error variance with the inverse-gamma prior `IG(a₀, b₀)`, where `b₀`
//! is a scale: `1/σ² ~ Gamma(a₀, scale = b₀)`.

use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::DataError;
use crate::mcmc::{MixtureSpec, ModelComponent, MoveStats, ParamSlot};
use crate::sampling::{self, ChainRng, ParamPrior};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionData {
    y: Vec<f64>,
    /// Centred covariates, one vector per model.
    covariates: [Vec<f64>; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    X,
    Z,
}

impl Design {
    fn index(self) -> usize {
        match self {
            Design::X => 0,
            Design::Z => 1,
        }
    }
}

impl RegressionData {
    /// Centres both covariates.
    pub fn new(y: Vec<f64>, x: Vec<f64>, z: Vec<f64>) -> Result<Self, DataError> {
        if x.len() != y.len() || z.len() != y.len() {
            return Err(DataError(format!(
                "row counts differ: y {}, x {}, z {}",
                y.len(),
                x.len(),
                z.len()
            )));
        }
        if y.iter().chain(&x).chain(&z).any(|v| !v.is_finite()) {
            return Err(DataError("regression data must be finite".into()));
        }
        let centre = |v: Vec<f64>| {
            let mean = if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            };
            v.into_iter().map(|c| c - mean).collect::<Vec<_>>()
        };
        Ok(Self {
            y,
            covariates: [centre(x), centre(z)],
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn covariate(&self, design: Design) -> &[f64] {
        &self.covariates[design.index()]
    }

    /// Rows `(1, cᵢ)` of the design matrix.
    pub fn design_rows(&self, design: Design) -> impl Iterator<Item = Vector2<f64>> + '_ {
        self.covariate(design).iter().map(|&c| Vector2::new(1.0, c))
    }

    fn gram(&self, design: Design) -> (Matrix2<f64>, Vector2<f64>) {
        let mut xtx = Matrix2::zeros();
        let mut xty = Vector2::zeros();
        for (row, &y) in self.design_rows(design).zip(&self.y) {
            xtx += row * row.transpose();
            xty += row * y;
        }
        (xtx, xty)
    }

    pub fn residual_sum_of_squares(&self, design: Design, coef: &[f64; 2]) -> f64 {
        self.y
            .iter()
            .zip(self.covariate(design))
            .map(|(y, c)| (y - coef[0] - coef[1] * c).powi(2))
            .sum()
    }

    /// Scales responses by `factor`, keeping covariates.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            y: self.y.iter().map(|v| v * factor).collect(),
            covariates: self.covariates.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionHyper {
    pub mu0: [f64; 2],
    /// Prior variances of intercept and slope.
    pub v0: [f64; 2],
    pub a0: f64,
    /// Inverse-gamma scale.
    pub b0: f64,
}

impl Default for RegressionHyper {
    fn default() -> Self {
        Self {
            mu0: [3000.0, 185.0],
            v0: [1e6, 1e4],
            a0: 3.0,
            b0: 1.0 / (2.0 * 300.0 * 300.0),
        }
    }
}

impl RegressionHyper {
    pub fn validate(&self) -> Result<(), DataError> {
        if !(self.v0.iter().all(|v| *v > 0.0) && self.a0 > 0.0 && self.b0 > 0.0) {
            return Err(DataError(
                "regression hyperparameters need v₀ > 0, a₀ > 0, b₀ > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn variance_prior(&self) -> ParamPrior {
        ParamPrior::InverseGamma {
            shape: self.a0,
            scale: self.b0,
        }
    }

    fn v0_inv(&self) -> Matrix2<f64> {
        Matrix2::new(1.0 / self.v0[0], 0.0, 0.0, 1.0 / self.v0[1])
    }
}

/// `N(μ₁, v₁)` conditional of the coefficients given the error variance.
pub fn coef_conditional(
    data: &RegressionData,
    design: Design,
    hyper: &RegressionHyper,
    sigma2: f64,
) -> Result<(Vector2<f64>, Matrix2<f64>), DataError> {
    let (xtx, xty) = data.gram(design);
    let v0_inv = hyper.v0_inv();
    let precision = v0_inv + xtx / sigma2;
    let v1 = precision
        .try_inverse()
        .ok_or_else(|| DataError("singular coefficient precision".into()))?;
    let mu1 = v1 * (v0_inv * Vector2::from(hyper.mu0) + xty / sigma2);
    Ok((mu1, v1))
}

/// `(a₁, b₁)` of the inverse-gamma conditional of the error variance, with
/// `b₁ = (b₀⁻¹ + RSS/2)⁻¹`.
pub fn variance_conditional(
    data: &RegressionData,
    design: Design,
    hyper: &RegressionHyper,
    coef: &[f64; 2],
) -> (f64, f64) {
    let a1 = data.len() as f64 / 2.0 + hyper.a0;
    let b1 = 1.0 / (1.0 / hyper.b0 + 0.5 * data.residual_sum_of_squares(design, coef));
    (a1, b1)
}

pub fn regression_loglik(data: &RegressionData, design: Design, coef: &[f64; 2], sigma2: f64) -> f64 {
    let n = data.len() as f64;
    -0.5 * n * (LN_2PI + sigma2.ln()) - 0.5 * data.residual_sum_of_squares(design, coef) / sigma2
}

pub struct RegressionComponent {
    name: String,
    data: Arc<RegressionData>,
    design: Design,
    hyper: RegressionHyper,
    /// intercept, slope, variance
    slots: [usize; 3],
}

impl RegressionComponent {
    pub fn new(
        data: Arc<RegressionData>,
        design: Design,
        hyper: RegressionHyper,
        slots: [usize; 3],
    ) -> Self {
        let name = match design {
            Design::X => "regression_x",
            Design::Z => "regression_z",
        };
        Self {
            name: name.to_string(),
            data,
            design,
            hyper,
            slots,
        }
    }
}

impl ModelComponent<()> for RegressionComponent {
    fn name(&self) -> &str {
        &self.name
    }

    fn slots(&self) -> &[usize] {
        &self.slots
    }

    fn log_augmented_density(&self, theta: &[f64], _: &()) -> f64 {
        let [a, b, s] = self.slots;
        regression_loglik(&self.data, self.design, &[theta[a], theta[b]], theta[s])
    }

    fn update_params_current(&self, theta: &mut [f64], _: &(), rng: &mut ChainRng) -> MoveStats {
        let [a, b, s] = self.slots;
        let coef = draw_coef(&self.data, self.design, &self.hyper, theta[s], rng);
        theta[a] = coef[0];
        theta[b] = coef[1];
        theta[s] = draw_variance(&self.data, self.design, &self.hyper, &coef, rng);
        MoveStats::accepted(2)
    }
}

pub fn draw_coef(
    data: &RegressionData,
    design: Design,
    hyper: &RegressionHyper,
    sigma2: f64,
    rng: &mut ChainRng,
) -> [f64; 2] {
    let (mu1, v1) = coef_conditional(data, design, hyper, sigma2)
        .expect("prior precision keeps the conditional well defined");
    let chol = v1
        .cholesky()
        .expect("conditional covariance is positive definite");
    let z = Vector2::new(sampling::normal(rng, 0.0, 1.0), sampling::normal(rng, 0.0, 1.0));
    let coef = mu1 + chol.l() * z;
    [coef[0], coef[1]]
}

pub fn draw_variance(
    data: &RegressionData,
    design: Design,
    hyper: &RegressionHyper,
    coef: &[f64; 2],
    rng: &mut ChainRng,
) -> f64 {
    let (a1, b1) = variance_conditional(data, design, hyper, coef);
    1.0 / sampling::gamma(rng, a1, 1.0 / b1)
}

/// Regression on `x` (model 1) against regression on `z` (model 2).
pub fn regression_spec(
    data: Arc<RegressionData>,
    hyper: RegressionHyper,
    dirichlet_p: [f64; 2],
) -> MixtureSpec<()> {
    let normal = |k: usize| ParamPrior::Normal {
        mean: hyper.mu0[k],
        sd: hyper.v0[k].sqrt(),
    };
    let params = vec![
        ParamSlot::new("alpha", normal(0)),
        ParamSlot::new("beta", normal(1)),
        ParamSlot::new("sigma2", hyper.variance_prior()),
        ParamSlot::new("gamma", normal(0)),
        ParamSlot::new("delta", normal(1)),
        ParamSlot::new("tau2", hyper.variance_prior()),
    ];
    MixtureSpec {
        components: vec![
            Box::new(RegressionComponent::new(data.clone(), Design::X, hyper, [0, 1, 2])),
            Box::new(RegressionComponent::new(data, Design::Z, hyper, [3, 4, 5])),
        ],
        dirichlet_p: dirichlet_p.to_vec(),
        params,
        initial_theta: None,
        initial_missing: (),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn toy_data() -> RegressionData {
        let x: Vec<f64> = (0..12).map(|i| i as f64 * 0.5).collect();
        let z: Vec<f64> = (0..12).map(|i| ((i * 7) % 12) as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 3.0 * v + (v * 1.7).sin()).collect();
        RegressionData::new(y, x, z).unwrap()
    }

    #[test]
    fn covariates_are_centred() {
        let d = toy_data();
        for design in [Design::X, Design::Z] {
            assert!(d.covariate(design).iter().sum::<f64>().abs() < 1e-9);
        }
        assert!(RegressionData::new(vec![1.0], vec![], vec![1.0]).is_err());
    }

    #[test]
    fn vague_prior_gives_least_squares() {
        let d = toy_data();
        let hyper = RegressionHyper {
            mu0: [0.0, 0.0],
            v0: [1e14, 1e14],
            a0: 1.0,
            b0: 1.0,
        };
        let (mu1, _) = coef_conditional(&d, Design::X, &hyper, 1.0).unwrap();
        // centred design: OLS intercept is ȳ and slope Σcy/Σc²
        let c = d.covariate(Design::X);
        let ybar = d.y().iter().sum::<f64>() / d.len() as f64;
        let slope = c.iter().zip(d.y()).map(|(c, y)| c * y).sum::<f64>()
            / c.iter().map(|c| c * c).sum::<f64>();
        assert_relative_eq!(mu1[0], ybar, max_relative = 1e-9);
        assert_relative_eq!(mu1[1], slope, max_relative = 1e-9);
    }

    #[test]
    fn empty_data_keeps_prior() {
        let d = RegressionData::new(vec![], vec![], vec![]).unwrap();
        let hyper = RegressionHyper::default();
        let (mu1, v1) = coef_conditional(&d, Design::Z, &hyper, 5.0).unwrap();
        assert_relative_eq!(mu1[0], hyper.mu0[0]);
        assert_relative_eq!(mu1[1], hyper.mu0[1]);
        assert_relative_eq!(v1[(0, 0)], hyper.v0[0]);
        let (a1, b1) = variance_conditional(&d, Design::Z, &hyper, &[0.0, 0.0]);
        assert_eq!(a1, hyper.a0);
        assert_relative_eq!(b1, hyper.b0, max_relative = 1e-12);
    }

    #[test]
    fn conditional_draws_match_moments() {
        let d = toy_data();
        let hyper = RegressionHyper {
            mu0: [0.0, 0.0],
            v0: [100.0, 100.0],
            a0: 3.0,
            b0: 0.5,
        };
        let mut rng = sampling::chain_rng(4);
        let n = 50_000;
        let sigma2 = 0.7;
        let (mu1, v1) = coef_conditional(&d, Design::X, &hyper, sigma2).unwrap();
        let draws: Vec<[f64; 2]> = (0..n)
            .map(|_| draw_coef(&d, Design::X, &hyper, sigma2, &mut rng))
            .collect();
        for k in 0..2 {
            let mean = draws.iter().map(|c| c[k]).sum::<f64>() / n as f64;
            let se = (v1[(k, k)] / n as f64).sqrt();
            assert!((mean - mu1[k]).abs() < 4.0 * se, "coef {k}");
        }

        let coef = [mu1[0], mu1[1]];
        let (a1, b1) = variance_conditional(&d, Design::X, &hyper, &coef);
        let v: Vec<f64> = (0..n)
            .map(|_| draw_variance(&d, Design::X, &hyper, &coef, &mut rng))
            .collect();
        // IG(a, scale b) has mean 1/(b(a−1)) and variance mean²/(a−2)
        let want = 1.0 / (b1 * (a1 - 1.0));
        let sd = want / (a1 - 2.0).sqrt();
        let mean = v.iter().sum::<f64>() / n as f64;
        assert!((mean - want).abs() < 4.0 * sd / (n as f64).sqrt());
    }
}
