use mixbf::experiment::LogisticSource;
use mixbf::models::logistic::LogisticData;
use mixbf::oracle::{analytic_bf_ex3, integrate_log_peak, logistic_laplace_marginal, logistic_marginal_is};
use mixbf::sampling::chain_rng;

#[test]
fn closed_form_event_table() {
    for ((n, t, s, theta), want) in [
        ((5, 10.0, 36.0, 1.0), 1.148),
        ((5, 10.0, 36.0, 0.01), 1.587),
        ((5, 10.0, 25.0, 1.0), 10.239),
        ((10, 20.0, 150.0, 1.0), 0.181),
    ] {
        let b = analytic_bf_ex3(n, t, s, theta).unwrap();
        // printed to three decimals, the last one truncated in one row
        assert!((b - want).abs() < 1e-3, "{b} vs {want}");
    }
}

#[test]
fn intercept_only_laplace_is_close_to_quadrature() {
    let responses: Vec<u8> = (0..20).map(|j| u8::from(j < 10)).collect();
    let data = LogisticData::new(responses, vec![vec![]; 20]).unwrap();
    let sd = 10.0;
    let log_integrand = |b: f64| {
        let lp = -(1.0 + (-b).exp()).ln();
        let lq = -(1.0 + b.exp()).ln();
        10.0 * lp + 10.0 * lq - 0.5 * (b / sd).powi(2) - (sd * (2.0 * std::f64::consts::PI).sqrt()).ln()
    };
    let exact = integrate_log_peak(log_integrand, 0.0, 1e-12).unwrap();
    let lap = logistic_laplace_marginal(&data, 0, sd).unwrap();
    assert!((lap.log_value - exact).abs() < 0.02f64.ln_1p(), "{} vs {exact}", lap.log_value);
}

#[test]
fn laplace_agrees_with_importance_sampling() {
    // the Laplace error falls like 1/n; at n = 100 it is about 0.06 for four
    // coefficients, well above the sampling error
    let data = LogisticSource::Synthetic {
        n: 1000,
        coefficients: vec![-0.5, 1.0, -0.8, 0.6],
        data_seed: 11,
    }
    .load()
    .unwrap();
    let mut rng = chain_rng(2);
    for dim in 0..=3 {
        let lap = logistic_laplace_marginal(&data, dim, 10.0).unwrap();
        let is = logistic_marginal_is(&data, dim, 10.0, 20_000, &mut rng).unwrap();
        let se = is.standard_error;
        assert!((lap.log_value - is.log_value).abs() < 3.0 * se, "dim {dim}: {} vs {} ± {se}", lap.log_value, is.log_value);
    }
}
