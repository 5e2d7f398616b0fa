//! Bayes factors from the moments of a mixture-weight prior and the posterior
//! means of the weights.
//!
//! For a hypermodel `π(x | α) = Σ αᵢ mᵢ(x)` the posterior mean of each weight is
//!
//! ```text
//! E[αᵢ | x] = Σⱼ E[αᵢαⱼ] mⱼ(x) / Σⱼ E[αⱼ] mⱼ(x)
//! ```
//!
//! which is linear in the ratios `Bⱼₖ = mⱼ(x) / mₖ(x)` once the posterior
//! means are known. Writing `Aᵢⱼ = E[αᵢ|x] E[αⱼ] − E[αᵢαⱼ]` the ratios solve
//! `A b = 0` with `bₖ = 1`. Everything in this module is a pure function of
//! its arguments.
//!
//! Model indices are zero-based throughout.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for the simplex identities on prior moments.
pub const MOMENT_TOLERANCE: f64 = 1e-12;

/// Relative pivot threshold below which the reduced system is declared singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BfError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(
        "singular system: pivot {pivot:.3e} at reduced row {row} is below {threshold:.3e} \
         (degenerate prior, or posterior means inconsistent with the prior)"
    )]
    Singular {
        row: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("posterior mean {value} of model {index} lies outside ({lower}, {upper})")]
    BoundsViolation {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("posterior mean {value} sits on a bound: Bayes factor is {}", if *.infinite { "infinite" } else { "zero" })]
    Unbounded { value: f64, infinite: bool },
    #[error("model {index} was never visited; occupancy estimate unavailable")]
    DegenerateOccupancy { index: usize },
    #[error("solved Bayes factor for model {index} is {value}, expected a positive finite number")]
    InconsistentSolution { index: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, BfError>;

/// First and second moments of the mixture weights `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorMoments {
    first: Vec<f64>,
    /// Row-major `n × n` matrix of `E[αᵢαⱼ]`.
    second: Vec<f64>,
    dirichlet_params: Option<Vec<f64>>,
}

impl PriorMoments {
    /// Validates and wraps explicit moments. `second` is row-major `n × n`.
    pub fn new(first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        let m = Self {
            first,
            second,
            dirichlet_params: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_rows(first: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = first.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(BfError::InvalidArgument(format!(
                "second-moment matrix must be {n}x{n}"
            )));
        }
        Self::new(first, rows.concat())
    }

    fn validate(&self) -> Result<()> {
        let n = self.first.len();
        if n < 2 {
            return Err(BfError::InvalidArgument(
                "at least two models are required".into(),
            ));
        }
        if self.second.len() != n * n {
            return Err(BfError::InvalidArgument(format!(
                "second-moment matrix has {} entries, expected {}",
                self.second.len(),
                n * n
            )));
        }
        if self
            .first
            .iter()
            .chain(&self.second)
            .any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0)
        {
            return Err(BfError::InvalidArgument(
                "moments must be finite and lie in [0, 1]".into(),
            ));
        }
        let total: f64 = self.first.iter().sum();
        if (total - 1.0).abs() > MOMENT_TOLERANCE {
            return Err(BfError::InvalidArgument(format!(
                "first moments sum to {total}, not 1"
            )));
        }
        for i in 0..n {
            let row: f64 = (0..n).map(|j| self.second(i, j)).sum();
            if (row - self.first[i]).abs() > MOMENT_TOLERANCE {
                return Err(BfError::InvalidArgument(format!(
                    "row {i} of the second moments sums to {row}, expected E[α{}] = {}",
                    i + 1,
                    self.first[i]
                )));
            }
            if self.second(i, i) > self.first[i] + MOMENT_TOLERANCE {
                return Err(BfError::InvalidArgument(format!(
                    "E[α{0}²] exceeds E[α{0}]",
                    i + 1
                )));
            }
            for j in 0..i {
                if (self.second(i, j) - self.second(j, i)).abs() > MOMENT_TOLERANCE {
                    return Err(BfError::InvalidArgument(
                        "second-moment matrix is not symmetric".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.first.len()
    }

    pub fn first(&self) -> &[f64] {
        &self.first
    }

    pub fn second(&self, i: usize, j: usize) -> f64 {
        self.second[i * self.n() + j]
    }

    pub fn second_matrix(&self) -> Vec<Vec<f64>> {
        self.second.chunks(self.n()).map(<[f64]>::to_vec).collect()
    }

    pub fn dirichlet_params(&self) -> Option<&[f64]> {
        self.dirichlet_params.as_deref()
    }
}

/// Posterior means `E[αᵢ | x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorMeans(Vec<f64>);

impl PosteriorMeans {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(BfError::InvalidArgument(
                "at least two posterior means are required".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0 || *v >= 1.0) {
            return Err(BfError::InvalidArgument(
                "posterior means must lie strictly inside (0, 1)".into(),
            ));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(BfError::InvalidArgument(format!(
                "posterior means sum to {total}, not 1"
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }
}

/// `Aᵢⱼ = E[αᵢ|x] E[αⱼ] − E[αᵢαⱼ]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl AMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn column_sum(&self, j: usize) -> f64 {
        (0..self.n).map(|i| self.get(i, j)).sum()
    }

    fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Bayes factors `Bⱼₖ` for every `j` against a fixed reference model `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesFactors {
    pub reference: usize,
    pub values: Vec<f64>,
}

impl BayesFactors {
    fn checked(reference: usize, values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(BfError::InconsistentSolution { index, value });
        }
        Ok(Self { reference, values })
    }

    /// `Bⱼₖ` for the stored reference `k`.
    pub fn against_reference(&self, j: usize) -> f64 {
        self.values[j]
    }
}

impl fmt::Display for BayesFactors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, v) in self.values.iter().enumerate() {
            if j > 0 {
                write!(f, " ")?;
            }
            write!(f, "B{}{}={:.6}", j + 1, self.reference + 1, v)?;
        }
        Ok(())
    }
}

/// Interval that a posterior mean must fall in. The lower bound is only known
/// for Dirichlet priors and for two models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanBounds {
    pub lower: Option<f64>,
    pub upper: f64,
}

impl MeanBounds {
    pub fn contains_strictly(&self, value: f64) -> bool {
        value < self.upper && self.lower.is_none_or(|lo| value > lo)
    }

    pub fn contains(&self, value: f64) -> bool {
        value <= self.upper && self.lower.is_none_or(|lo| value >= lo)
    }
}

pub fn dirichlet_moments(p: &[f64]) -> Result<PriorMoments> {
    if p.len() < 2 {
        return Err(BfError::InvalidArgument(
            "a Dirichlet prior needs at least two parameters".into(),
        ));
    }
    if p.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(BfError::InvalidArgument(
            "Dirichlet parameters must be positive and finite".into(),
        ));
    }
    let n = p.len();
    let p0: f64 = p.iter().sum();
    let denom = p0 * (p0 + 1.0);
    let first = p.iter().map(|pi| pi / p0).collect();
    let mut second = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            second[i * n + j] = if i == j {
                p[i] * (p[i] + 1.0) / denom
            } else {
                p[i] * p[j] / denom
            };
        }
    }
    let mut m = PriorMoments::new(first, second)?;
    m.dirichlet_params = Some(p.to_vec());
    Ok(m)
}

/// Moments of a finite mixture of priors on the simplex.
pub fn mixture_moments(weights: &[f64], components: &[PriorMoments]) -> Result<PriorMoments> {
    if weights.is_empty() || weights.len() != components.len() {
        return Err(BfError::InvalidArgument(
            "need one weight per mixture component".into(),
        ));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(BfError::InvalidArgument(
            "mixture weights must be non-negative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > MOMENT_TOLERANCE {
        return Err(BfError::InvalidArgument(format!(
            "mixture weights sum to {total}, not 1"
        )));
    }
    let n = components[0].n();
    if components.iter().any(|c| c.n() != n) {
        return Err(BfError::InvalidArgument(
            "mixture components have different dimensions".into(),
        ));
    }
    if components.len() == 1 {
        return Ok(components[0].clone());
    }
    let mut first = vec![0.0; n];
    let mut second = vec![0.0; n * n];
    for (w, c) in weights.iter().zip(components) {
        for (acc, v) in first.iter_mut().zip(&c.first) {
            *acc += w * v;
        }
        for (acc, v) in second.iter_mut().zip(&c.second) {
            *acc += w * v;
        }
    }
    PriorMoments::new(first, second)
}

/// Posterior means implied by known marginal likelihoods `m`.
pub fn forward_posterior_means(moments: &PriorMoments, m: &[f64]) -> Result<PosteriorMeans> {
    let n = moments.n();
    if m.len() != n {
        return Err(BfError::InvalidArgument(format!(
            "expected {n} marginal likelihoods, got {}",
            m.len()
        )));
    }
    if m.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(BfError::InvalidArgument(
            "marginal likelihoods must be positive and finite".into(),
        ));
    }
    // Scale by the largest value so huge or tiny evidences do not overflow.
    let scale = m.iter().cloned().fold(0.0, f64::max);
    let m: Vec<f64> = m.iter().map(|v| v / scale).collect();
    let denom: f64 = moments.first.iter().zip(&m).map(|(e, mj)| e * mj).sum();
    let values = (0..n)
        .map(|i| (0..n).map(|j| moments.second(i, j) * m[j]).sum::<f64>() / denom)
        .collect();
    Ok(PosteriorMeans(values))
}

pub fn build_a(moments: &PriorMoments, post: &PosteriorMeans) -> Result<AMatrix> {
    let n = moments.n();
    if post.n() != n {
        return Err(BfError::InvalidArgument(format!(
            "posterior means have dimension {}, prior moments {n}",
            post.n()
        )));
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = post.0[i] * moments.first[j] - moments.second(i, j);
        }
    }
    Ok(AMatrix { n, entries })
}

/// Solves the reduced system `Ã₋ₖ b̃ = −A₋ₖ,ₖ` by Gaussian elimination with
/// partial pivoting and reinserts `Bₖₖ = 1`.
pub fn solve_general(a: &AMatrix, k: usize) -> Result<BayesFactors> {
    let n = a.n;
    if k >= n {
        return Err(BfError::InvalidArgument(format!(
            "reference model {k} out of range for {n} models"
        )));
    }
    let keep: Vec<usize> = (0..n).filter(|&i| i != k).collect();
    let m = keep.len();
    // augmented [Ã | c]
    let mut rows: Vec<Vec<f64>> = keep
        .iter()
        .map(|&i| {
            let mut row: Vec<f64> = keep.iter().map(|&j| a.get(i, j)).collect();
            row.push(-a.get(i, k));
            row
        })
        .collect();
    let threshold = SINGULAR_PIVOT_RATIO * a.max_abs();

    for col in 0..m {
        let pivot_row = (col..m)
            .max_by(|&r, &s| rows[r][col].abs().total_cmp(&rows[s][col].abs()))
            .expect("non-empty pivot range");
        let pivot = rows[pivot_row][col];
        if pivot.abs() <= threshold {
            return Err(BfError::Singular {
                row: col,
                pivot,
                threshold,
            });
        }
        rows.swap(col, pivot_row);
        for r in col + 1..m {
            let factor = rows[r][col] / pivot;
            if factor != 0.0 {
                for c in col..=m {
                    rows[r][c] -= factor * rows[col][c];
                }
            }
        }
    }
    let mut solution = vec![0.0; m];
    for r in (0..m).rev() {
        let tail: f64 = (r + 1..m).map(|c| rows[r][c] * solution[c]).sum();
        solution[r] = (rows[r][m] - tail) / rows[r][r];
    }

    let mut values = vec![1.0; n];
    for (&j, b) in keep.iter().zip(solution) {
        values[j] = b;
    }
    BayesFactors::checked(k, values)
}

/// `Bⱼₖ = Aⱼₖ / Aₖⱼ`, valid only for Dirichlet priors on `α`.
pub fn solve_dirichlet_fast(
    moments: &PriorMoments,
    post: &PosteriorMeans,
    k: usize,
) -> Result<BayesFactors> {
    if moments.dirichlet_params.is_none() {
        return Err(BfError::InvalidArgument(
            "the ratio shortcut requires a Dirichlet prior on the weights".into(),
        ));
    }
    let n = moments.n();
    if k >= n {
        return Err(BfError::InvalidArgument(format!(
            "reference model {k} out of range for {n} models"
        )));
    }
    for (i, &value) in post.values().iter().enumerate() {
        let b = posterior_mean_bounds(moments, i)?;
        if !b.contains_strictly(value) {
            return Err(BfError::BoundsViolation {
                index: i,
                value,
                lower: b.lower.unwrap_or(0.0),
                upper: b.upper,
            });
        }
    }
    let a = build_a(moments, post)?;
    let values = (0..n)
        .map(|j| if j == k { 1.0 } else { a.get(j, k) / a.get(k, j) })
        .collect();
    BayesFactors::checked(k, values)
}

/// Closed form `B₁₂` for two models.
pub fn two_model_bf(moments: &PriorMoments, e1: f64) -> Result<f64> {
    if moments.n() != 2 {
        return Err(BfError::InvalidArgument(format!(
            "two-model formula applied to {} models",
            moments.n()
        )));
    }
    let mean = moments.first[0];
    let sq = moments.second(0, 0);
    let bounds = posterior_mean_bounds(moments, 0)?;
    let lower = bounds.lower.expect("two-model bounds are complete");
    let scale = bounds.upper - lower;
    if (e1 - lower).abs() <= 1e-14 * scale {
        return Err(BfError::Unbounded {
            value: e1,
            infinite: false,
        });
    }
    if (e1 - bounds.upper).abs() <= 1e-14 * scale {
        return Err(BfError::Unbounded {
            value: e1,
            infinite: true,
        });
    }
    if !bounds.contains_strictly(e1) {
        return Err(BfError::BoundsViolation {
            index: 0,
            value: e1,
            lower,
            upper: bounds.upper,
        });
    }
    Ok((mean - sq - e1 * (1.0 - mean)) / (mean * e1 - sq))
}

/// Range that `E[αᵢ | x]` must lie in whatever the marginal likelihoods are.
pub fn posterior_mean_bounds(moments: &PriorMoments, i: usize) -> Result<MeanBounds> {
    let n = moments.n();
    if i >= n {
        return Err(BfError::InvalidArgument(format!(
            "model {i} out of range for {n} models"
        )));
    }
    if let Some(p) = moments.dirichlet_params() {
        let p0: f64 = p.iter().sum();
        return Ok(MeanBounds {
            lower: Some(p[i] / (p0 + 1.0)),
            upper: (p[i] + 1.0) / (p0 + 1.0),
        });
    }
    let upper = moments.second(i, i) / moments.first[i];
    if n == 2 {
        let other = 1 - i;
        // value reached as mᵢ → 0
        let lower = moments.second(i, other) / moments.first[other];
        return Ok(MeanBounds {
            lower: Some(lower.min(upper)),
            upper: upper.max(lower),
        });
    }
    Ok(MeanBounds { lower: None, upper })
}

/// Cross-check from model occupancy: `Bᵢⱼ = (occᵢ / occⱼ)(E[αⱼ] / E[αᵢ])`.
/// Returns the full matrix, row `i` column `j` holding `Bᵢⱼ`.
pub fn occupancy_bf(occupancy: &[f64], moments: &PriorMoments) -> Result<Vec<Vec<f64>>> {
    let n = moments.n();
    if occupancy.len() != n {
        return Err(BfError::InvalidArgument(format!(
            "expected {n} occupancy fractions, got {}",
            occupancy.len()
        )));
    }
    if let Some(index) = occupancy.iter().position(|v| *v <= 0.0) {
        return Err(BfError::DegenerateOccupancy { index });
    }
    let total: f64 = occupancy.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(BfError::InvalidArgument(format!(
            "occupancy fractions sum to {total}, not 1"
        )));
    }
    let e = &moments.first;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| (occupancy[i] / occupancy[j]) * (e[j] / e[i]))
                .collect()
        })
        .collect())
}

/// All pairwise Bayes factors through [`solve_general`], row `j` column `k`
/// holding `Bⱼₖ`.
pub fn bf_matrix_general(moments: &PriorMoments, post: &PosteriorMeans) -> Result<Vec<Vec<f64>>> {
    let a = build_a(moments, post)?;
    let columns = (0..moments.n())
        .map(|k| solve_general(&a, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(transpose(&columns))
}

pub fn bf_matrix_dirichlet(
    moments: &PriorMoments,
    post: &PosteriorMeans,
) -> Result<Vec<Vec<f64>>> {
    let columns = (0..moments.n())
        .map(|k| solve_dirichlet_fast(moments, post, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(transpose(&columns))
}

fn transpose(columns: &[BayesFactors]) -> Vec<Vec<f64>> {
    let n = columns.len();
    (0..n)
        .map(|j| (0..n).map(|k| columns[k].values[j]).collect())
        .collect()
}
