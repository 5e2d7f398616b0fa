//! Laplace approximation to `ln ∫ exp(f)` with finite-difference derivatives.

use nalgebra::{DMatrix, DVector};

use super::OracleError;

#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceFit {
    pub mode: Vec<f64>,
    /// Negative Hessian of `f` at the mode.
    pub precision: DMatrix<f64>,
    pub log_peak: f64,
    pub log_marginal: f64,
}

fn steps(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| 1e-4 * (1.0 + v.abs())).collect()
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(i, d) in moves {
        y[i] += d;
    }
    y
}

fn gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> DVector<f64> {
    let h = steps(x);
    DVector::from_iterator(
        x.len(),
        (0..x.len()).map(|i| (f(&shifted(x, &[(i, h[i])])) - f(&shifted(x, &[(i, -h[i])]))) / (2.0 * h[i])),
    )
}

/// Central-difference Hessian of `f`.
pub fn hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    let h = steps(x);
    let f0 = f(x);
    let mut out = DMatrix::zeros(d, d);
    for i in 0..d {
        out[(i, i)] = (f(&shifted(x, &[(i, h[i])])) - 2.0 * f0 + f(&shifted(x, &[(i, -h[i])]))) / (h[i] * h[i]);
        for j in 0..i {
            let v = (f(&shifted(x, &[(i, h[i]), (j, h[j])])) - f(&shifted(x, &[(i, h[i]), (j, -h[j])]))
                - f(&shifted(x, &[(i, -h[i]), (j, h[j])]))
                + f(&shifted(x, &[(i, -h[i]), (j, -h[j])])))
                / (4.0 * h[i] * h[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Damped Newton ascent to the mode of `f`, then
/// `f(x̂) + d/2 ln 2π − ½ ln det(−∇²f(x̂))`.
pub fn laplace_log_marginal<F: Fn(&[f64]) -> f64>(f: F, start: &[f64]) -> Result<LaplaceFit, OracleError> {
    let d = start.len();
    if d == 0 {
        return Err(OracleError::InvalidArgument("empty parameter vector".into()));
    }
    let mut x = start.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return Err(OracleError::InvalidArgument("objective is not finite at the start".into()));
    }
    let mut converged = false;
    for _ in 0..500 {
        let g = gradient(&f, &x);
        let neg_h = -hessian(&f, &x);
        let direction = match neg_h.clone().cholesky() {
            Some(c) => c.solve(&g),
            None => g.clone() / (1.0 + neg_h.diagonal().abs().max()),
        };
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = x.iter().zip(direction.iter()).map(|(a, b)| a + scale * b).collect();
            let fc = f(&cand);
            if fc.is_finite() && fc >= fx {
                accepted = Some((cand, fc));
                break;
            }
            scale *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            converged = true;
            break;
        };
        let moved = cand
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max);
        x = cand;
        fx = fc;
        if moved < 1e-10 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(OracleError::Optimizer("Newton iterations did not converge".into()));
    }
    let precision = -hessian(&f, &x);
    let chol = precision
        .clone()
        .cholesky()
        .ok_or_else(|| OracleError::Degenerate("negative Hessian is not positive definite".into()))?;
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let log_marginal = fx + 0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * log_det;
    Ok(LaplaceFit {
        mode: x,
        precision,
        log_peak: fx,
        log_marginal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_integral_is_exact() {
        // f = c − ½ (x − m)ᵀ P (x − m)
        let p = [[2.0, 0.3], [0.3, 0.5]];
        let m = [1.5, -2.0];
        let f = |x: &[f64]| {
            let d = [x[0] - m[0], x[1] - m[1]];
            4.0 - 0.5 * (p[0][0] * d[0] * d[0] + 2.0 * p[0][1] * d[0] * d[1] + p[1][1] * d[1] * d[1])
        };
        let fit = laplace_log_marginal(f, &[0.0, 0.0]).unwrap();
        let det: f64 = p[0][0] * p[1][1] - p[0][1] * p[0][1];
        let expected = 4.0 + (2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln();
        assert_relative_eq!(fit.log_marginal, expected, epsilon = 1e-7);
        assert_relative_eq!(fit.mode[0], m[0], epsilon = 1e-6);
        assert_relative_eq!(fit.mode[1], m[1], epsilon = 1e-6);
    }

    #[test]
    fn flat_direction_is_degenerate() {
        let f = |x: &[f64]| -x[0] * x[0];
        assert!(matches!(laplace_log_marginal(f, &[1.0, 0.0]), Err(OracleError::Degenerate(_))));
    }
}
