//! Independent ground truth for the samplers: closed forms, quadrature,
//! Laplace approximations and importance sampling.

pub mod analytic;
pub mod epidemic;
pub mod laplace;
pub mod logistic;
pub mod quadrature;
pub mod regression;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analytic::{analytic_bf_ex3, analytic_log_bf_ex3};
pub use epidemic::{ex4_collapsed_log_target, ex4_log_bf_shape_path};
pub use laplace::{laplace_log_marginal, LaplaceFit};
pub use logistic::{logistic_laplace_marginal, logistic_marginal_is};
pub use quadrature::{integrate, integrate_log_peak};
pub use regression::{gaussian_log_evidence, regression_marginal_quadrature};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature did not converge: estimated relative error {achieved:.3e}")]
    Quadrature { achieved: f64 },
    #[error("optimizer failed: {0}")]
    Optimizer(String),
    #[error("degenerate curvature at the mode: {0}")]
    Degenerate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    ClosedForm,
    Quadrature,
    Laplace,
    ImportanceSampling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: f64,
    /// `ln value`, kept separately because marginal likelihoods underflow.
    pub log_value: f64,
    /// Standard error of `log_value`; zero for deterministic methods.
    pub standard_error: f64,
    pub method: OracleMethod,
}

impl OracleResult {
    pub fn exact(log_value: f64, method: OracleMethod) -> Self {
        Self {
            value: log_value.exp(),
            log_value,
            standard_error: 0.0,
            method,
        }
    }
}
