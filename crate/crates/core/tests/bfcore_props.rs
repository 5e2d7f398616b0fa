use mixbf::bfcore::{
    bf_matrix_dirichlet, build_a, dirichlet_moments, forward_posterior_means, mixture_moments, posterior_mean_bounds,
    solve_dirichlet_fast, solve_general, PriorMoments,
};
use proptest::prelude::*;

fn prior_strategy() -> impl Strategy<Value = (PriorMoments, bool)> {
    (2usize..=5).prop_flat_map(|n| {
        let p = prop::collection::vec(0.2f64..5.0, n);
        let mixed = prop::collection::vec((0.05f64..1.0, prop::collection::vec(0.2f64..5.0, n)), 2..=3);
        prop_oneof![
            p.prop_map(|p| (dirichlet_moments(&p).unwrap(), true)),
            mixed.prop_map(|comps| {
                let weights: Vec<f64> = comps.iter().map(|c| c.0).collect();
                let total: f64 = weights.iter().sum();
                let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
                let moments: Vec<PriorMoments> = comps.iter().map(|c| dirichlet_moments(&c.1).unwrap()).collect();
                (mixture_moments(&weights, &moments).unwrap(), false)
            }),
        ]
    })
}

fn case_strategy() -> impl Strategy<Value = (PriorMoments, bool, Vec<f64>)> {
    prior_strategy().prop_flat_map(|(m, dir)| {
        let n = m.n();
        (Just(m), Just(dir), prop::collection::vec(-3.0f64..3.0, n))
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn general_solver_recovers_marginal_ratios((moments, is_dirichlet, logm) in case_strategy()) {
        let m: Vec<f64> = logm.iter().map(|x| x.exp()).collect();
        let post = forward_posterior_means(&moments, &m).unwrap();
        let a = build_a(&moments, &post).unwrap();
        for k in 0..m.len() {
            let b = solve_general(&a, k).unwrap();
            for j in 0..m.len() {
                prop_assert!(rel(b.values[j], m[j] / m[k]) < 1e-10, "B{j}{k} = {} vs {}", b.values[j], m[j] / m[k]);
            }
            if is_dirichlet {
                let fast = solve_dirichlet_fast(&moments, &post, k).unwrap();
                for j in 0..m.len() {
                    prop_assert!(rel(fast.values[j], b.values[j]) < 1e-10);
                }
            }
        }
        if !is_dirichlet {
            prop_assert!(bf_matrix_dirichlet(&moments, &post).is_err());
        }
    }

    #[test]
    fn solutions_are_transitive_and_reciprocal((moments, _d, logm) in case_strategy()) {
        let m: Vec<f64> = logm.iter().map(|x| x.exp()).collect();
        let post = forward_posterior_means(&moments, &m).unwrap();
        let a = build_a(&moments, &post).unwrap();
        let cols: Vec<_> = (0..m.len()).map(|k| solve_general(&a, k).unwrap()).collect();
        for i in 0..m.len() {
            for j in 0..m.len() {
                prop_assert!((cols[j].values[i] * cols[i].values[j] - 1.0).abs() < 1e-10);
                for k in 0..m.len() {
                    let chained = cols[j].values[i] * cols[k].values[j];
                    prop_assert!(rel(chained, cols[k].values[i]) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn posterior_means_respect_bounds((moments, _d, logm) in case_strategy()) {
        let m: Vec<f64> = logm.iter().map(|x| x.exp()).collect();
        let post = forward_posterior_means(&moments, &m).unwrap();
        prop_assert!((post.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..m.len() {
            let b = posterior_mean_bounds(&moments, i).unwrap();
            prop_assert!(b.contains(post.values()[i]), "{:?} {}", b, post.values()[i]);
        }
    }
}
