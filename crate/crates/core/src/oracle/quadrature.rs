//! Adaptive Gauss–Kronrod (7/15) quadrature.

use super::OracleError;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate and `|Kronrod − Gauss|` on `[a, b]`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = h * XGK[k];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// `∫_a^b f` to the given relative tolerance by recursive bisection of the
/// interval with the largest error.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<(f64, f64), OracleError> {
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(OracleError::InvalidArgument(format!("bad interval [{a}, {b}]")));
    }
    let mut pieces = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..5_000 {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let error: f64 = pieces.iter().map(|p| p.3).sum();
        if error <= rel_tol * total.abs() || error < 1e-300 {
            return Ok((total, error));
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        for (l, h) in [(lo, mid), (mid, hi)] {
            let (v, e) = gk15(&f, l, h);
            pieces.push((l, h, v, e));
        }
    }
    let total: f64 = pieces.iter().map(|p| p.2).sum();
    let error: f64 = pieces.iter().map(|p| p.3).sum();
    Err(OracleError::Quadrature {
        achieved: error / total.abs(),
    })
}

/// `ln ∫ exp(g(u)) du` over the real line for a unimodal `g` with tails that
/// eventually decay. Locates the peak, widens the window until the integrand
/// is negligible at both ends, then integrates with `exp(g − g_max)`.
pub fn integrate_log_peak<G: Fn(f64) -> f64>(g: G, guess: f64, rel_tol: f64) -> Result<f64, OracleError> {
    // coarse search for the peak, then golden section
    let mut best = guess;
    let mut best_val = g(guess);
    let mut step = 1.0;
    for _ in 0..200 {
        let mut moved = false;
        for cand in [best - step, best + step] {
            let v = g(cand);
            if v > best_val {
                best = cand;
                best_val = v;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
            if step < 1e-9 {
                break;
            }
        } else {
            step *= 1.5;
        }
    }
    if !best_val.is_finite() {
        return Err(OracleError::InvalidArgument("integrand is not finite at its peak".into()));
    }
    let h = 1e-4 * (1.0 + best.abs());
    let curvature = -(g(best + h) - 2.0 * best_val + g(best - h)) / (h * h);
    let width = if curvature > 0.0 { 1.0 / curvature.sqrt() } else { 1.0 };
    let cutoff = best_val - 60.0;
    let (mut lo, mut hi) = (best - width, best + width);
    let mut grow = width;
    while g(lo) > cutoff {
        lo -= grow;
        grow *= 1.5;
    }
    grow = width;
    while g(hi) > cutoff {
        hi += grow;
        grow *= 1.5;
    }
    let (value, _) = integrate(|u| (g(u) - best_val).exp(), lo, hi, rel_tol)?;
    Ok(best_val + value.ln())
}
