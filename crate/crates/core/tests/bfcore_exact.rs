//! The three-model mixed-Dirichlet vector, once in exact rationals computed
//! here from first principles and once through the library.

use mixbf::bfcore::{build_a, dirichlet_moments, forward_posterior_means, mixture_moments, solve_general};
use num_rational::Ratio;

type Q = Ratio<i64>;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// `E[αᵢ]` and `E[αᵢαⱼ]` for `Dirichlet(p)` with integer parameters.
fn dirichlet_exact(p: &[i64]) -> (Vec<Q>, Vec<Vec<Q>>) {
    let s: i64 = p.iter().sum();
    let first = p.iter().map(|&pi| q(pi, s)).collect();
    let second = p
        .iter()
        .enumerate()
        .map(|(i, &pi)| {
            p.iter()
                .enumerate()
                .map(|(j, &pj)| {
                    let num = if i == j { pi * (pi + 1) } else { pi * pj };
                    q(num, s * (s + 1))
                })
                .collect()
        })
        .collect();
    (first, second)
}

fn a2_exact() -> (Vec<Q>, Vec<Vec<Q>>) {
    let (f1, s1) = dirichlet_exact(&[1, 1, 1]);
    let (f2, s2) = dirichlet_exact(&[1, 2, 1]);
    let half = q(1, 2);
    let first = (0..3).map(|i| half * f1[i] + half * f2[i]).collect();
    let second = (0..3)
        .map(|i| (0..3).map(|j| half * s1[i][j] + half * s2[i][j]).collect())
        .collect();
    (first, second)
}

#[test]
fn exact_rational_vector() {
    let (first, second) = a2_exact();
    assert_eq!(first, vec![q(7, 24), q(10, 24), q(7, 24)]);
    assert_eq!(second[0][0], q(2, 15));
    assert_eq!(second[0][1], q(11, 120));
    assert_eq!(second[0][2], q(1, 15));

    let m = [q(1, 1), q(2, 1), q(3, 1)];
    // E[αᵢ | x] = Σⱼ mⱼ E[αᵢαⱼ] / Σⱼ mⱼ E[αⱼ]
    let denom: Q = (0..3).map(|j| m[j] * first[j]).sum();
    let post: Vec<Q> = (0..3)
        .map(|i| (0..3).map(|j| m[j] * second[i][j]).sum::<Q>() / denom)
        .collect();
    assert_eq!(post, vec![q(31, 120), q(50, 120), q(39, 120)]);

    let a = |i: usize, j: usize| post[i] * first[j] - second[i][j];
    assert_eq!(a(1, 0), q(86, 2880));
    assert_eq!(a(0, 1), q(46, 2880));
    assert_eq!(a(1, 0) / a(0, 1), q(86, 46));

    // Reference k = 1: Σ_{j≠1} Aᵢⱼ Bⱼ₁ = −Aᵢ₁ for i = 2, 3.
    let (a22, a23, a32, a33) = (a(1, 1), a(1, 2), a(2, 1), a(2, 2));
    let (r2, r3) = (-a(1, 0), -a(2, 0));
    let det = a22 * a33 - a23 * a32;
    let b21 = (r2 * a33 - a23 * r3) / det;
    let b31 = (a22 * r3 - r2 * a32) / det;
    assert_eq!(b21, q(2, 1));
    assert_eq!(b31, q(3, 1));
}

#[test]
fn library_matches_exact_vector() {
    let moments = mixture_moments(
        &[0.5, 0.5],
        &[dirichlet_moments(&[1.0, 1.0, 1.0]).unwrap(), dirichlet_moments(&[1.0, 2.0, 1.0]).unwrap()],
    )
    .unwrap();
    let post = forward_posterior_means(&moments, &[1.0, 2.0, 3.0]).unwrap();
    for (v, e) in post.values().iter().zip([31.0, 50.0, 39.0]) {
        assert!((v - e / 120.0).abs() < 1e-12);
    }
    let a = build_a(&moments, &post).unwrap();
    assert!((a.get(1, 0) / a.get(0, 1) - 86.0 / 46.0).abs() < 1e-12);
    let b = solve_general(&a, 0).unwrap();
    assert!((b.values[1] - 2.0).abs() < 1e-12);
    assert!((b.values[2] - 3.0).abs() < 1e-12);
}
