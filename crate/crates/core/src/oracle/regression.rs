//! Marginal likelihood of the conjugate normal regression by one-dimensional
//! quadrature over `ln σ²`.

use nalgebra::{DMatrix, DVector};

use super::{integrate_log_peak, OracleError, OracleMethod, OracleResult};
use crate::models::regression::{Design, RegressionData, RegressionHyper};

/// `ln N(y; Wμ₀, σ²I + W V₀ Wᵀ)` with the coefficients integrated out.
pub fn gaussian_log_evidence(
    data: &RegressionData,
    design: Design,
    hyper: &RegressionHyper,
    sigma2: f64,
) -> Result<f64, OracleError> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(OracleError::InvalidArgument(format!("σ² = {sigma2}")));
    }
    let n = data.len();
    if n == 0 {
        return Ok(0.0);
    }
    let rows: Vec<_> = data.design_rows(design).collect();
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = hyper.v0[0] * rows[i][0] * rows[j][0] + hyper.v0[1] * rows[i][1] * rows[j][1];
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
        cov[(i, i)] += sigma2;
    }
    let resid = DVector::from_iterator(
        n,
        data.y()
            .iter()
            .zip(&rows)
            .map(|(y, r)| y - hyper.mu0[0] * r[0] - hyper.mu0[1] * r[1]),
    );
    let chol = cov
        .cholesky()
        .ok_or_else(|| OracleError::Degenerate("marginal covariance is not positive definite".into()))?;
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let solved = chol.solve(&resid);
    let quad = resid.dot(&solved);
    Ok(-0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad))
}

/// `m(y)` for one design, integrating `σ²` against its inverse-gamma prior.
pub fn regression_marginal_quadrature(
    data: &RegressionData,
    design: Design,
    hyper: &RegressionHyper,
) -> Result<OracleResult, OracleError> {
    hyper
        .validate()
        .map_err(|e| OracleError::InvalidArgument(e.to_string()))?;
    if data.is_empty() {
        return Ok(OracleResult::exact(0.0, OracleMethod::Quadrature));
    }
    let prior = hyper.variance_prior();
    let g = |u: f64| {
        let s2 = u.exp();
        match gaussian_log_evidence(data, design, hyper, s2) {
            Ok(v) => v + prior.ln_pdf(s2) + u,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let coef = [hyper.mu0[0], hyper.mu0[1]];
    let rss = data.residual_sum_of_squares(design, &coef) / data.len() as f64;
    let guess = rss.max(1e-12).ln();
    let log_value = integrate_log_peak(g, guess, 1e-11)?;
    Ok(OracleResult::exact(log_value, OracleMethod::Quadrature))
}
