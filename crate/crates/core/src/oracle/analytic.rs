//! Closed-form Bayes factor for Poisson against linear birth process data,
//! both rates with an `Exp(θ)` prior.

use super::OracleError;
use crate::sampling::ln_factorial;

pub fn analytic_log_bf_ex3(n: u64, horizon: f64, sum: f64, theta: f64) -> Result<f64, OracleError> {
    if !(horizon > 0.0 && theta > 0.0) {
        return Err(OracleError::InvalidArgument("need T > 0 and theta > 0".into()));
    }
    if !(sum >= 0.0 && sum <= n as f64 * horizon) {
        return Err(OracleError::InvalidArgument(format!("S = {sum} outside [0, nT]")));
    }
    let k = n as f64 + 1.0;
    Ok(k * ((k * horizon - sum + theta).ln() - (horizon + theta).ln()) - ln_factorial(n))
}

/// `B₁₂ = [(n+1)T − S + θ]^{n+1} / ((T+θ)^{n+1} n!)`.
pub fn analytic_bf_ex3(n: u64, horizon: f64, sum: f64, theta: f64) -> Result<f64, OracleError> {
    analytic_log_bf_ex3(n, horizon, sum, theta).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_data_is_neutral() {
        assert!((analytic_bf_ex3(0, 1.0, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn decreasing_in_sum() {
        for theta in [0.01, 1.0, 5.0] {
            let values: Vec<f64> = (0..=50)
                .map(|k| analytic_bf_ex3(5, 10.0, k as f64, theta).unwrap())
                .collect();
            assert!(values.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn rejects_impossible_sum() {
        assert!(analytic_bf_ex3(2, 1.0, 3.0, 1.0).is_err());
    }
}
