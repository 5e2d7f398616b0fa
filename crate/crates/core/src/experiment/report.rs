//! Per-replicate summaries, aggregation across replicates and rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentError};
use crate::bfcore::{self, PosteriorMeans};
use crate::mcmc::diagnostics::{self, BoundsKind};
use crate::mcmc::{AlphaEstimates, ChainOutput};
use crate::oracle::OracleMethod;

/// A Bayes factor matrix, row `i` column `j` holding `Bᵢⱼ`, or the reason it
/// could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfEstimate {
    pub matrix: Option<Vec<Vec<f64>>>,
    pub error: Option<String>,
}

impl BfEstimate {
    fn from(r: bfcore::Result<Vec<Vec<f64>>>) -> Self {
        match r {
            Ok(m) => Self {
                matrix: Some(m),
                error: None,
            },
            Err(e) => Self {
                matrix: None,
                error: Some(e.to_string()),
            },
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.matrix.as_ref().map(|m| m[i][j])
    }
}

/// Independent value of `ln B₁₂` for the same data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub log_b12: f64,
    pub standard_error: f64,
    pub method: OracleMethod,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub replicate: usize,
    pub seed: u64,
    pub model_names: Vec<String>,
    /// Dirichlet parameters of the main chain, after any balancing.
    pub dirichlet_p: Vec<f64>,
    pub retained: usize,
    pub occupancy: Vec<u64>,
    /// Number of retained iterations at which the model changed.
    pub switches: usize,
    pub alpha: AlphaEstimates,
    pub bf_general: BfEstimate,
    pub bf_dirichlet: BfEstimate,
    pub bf_occupancy: BfEstimate,
    /// `B₁₂` from the general solver with its delta-method standard error.
    pub b12: Option<f64>,
    pub b12_se: Option<f64>,
    pub param_acceptance: Vec<Option<f64>>,
    pub missing_acceptance: Vec<Option<f64>>,
    pub oracle: Option<OracleCheck>,
    /// Experiment-specific scalars such as data size.
    pub notes: BTreeMap<String, f64>,
    pub wall_seconds: f64,
}

/// Standard error of `B₁₂` from the general solver, linearising it in the
/// Rao-Blackwell terms and applying batch means to the linearised series.
fn b12_standard_error(out: &ChainOutput, means: &[f64]) -> Option<f64> {
    let moments = out.prior_moments();
    let n = means.len();
    let b12 = |e: &[f64]| -> Option<f64> {
        let post = PosteriorMeans::new(e.to_vec()).ok()?;
        let m = bfcore::bf_matrix_general(&moments, &post).ok()?;
        Some(m[0][1])
    };
    let mut grad = vec![0.0; n];
    for (i, g) in grad.iter_mut().enumerate().take(n - 1) {
        let h = 1e-6 * means[i].min(means[n - 1]);
        let mut up = means.to_vec();
        let mut down = means.to_vec();
        up[i] += h;
        up[n - 1] -= h;
        down[i] -= h;
        down[n - 1] += h;
        *g = (b12(&up)? - b12(&down)?) / (2.0 * h);
    }
    let series: Vec<Vec<f64>> = (0..n - 1).map(|i| out.rao_blackwell_series(i)).collect();
    let linear: Vec<f64> = (0..out.z_trace.len())
        .map(|t| series.iter().zip(&grad).map(|(s, g)| g * s[t]).sum())
        .collect();
    Some(diagnostics::batch_means_se(&linear))
}

impl ReplicateSummary {
    pub fn from_chain(replicate: usize, out: &ChainOutput, wall_seconds: f64) -> Self {
        let moments = out.prior_moments();
        let alpha = out.estimates();
        let post = PosteriorMeans::new(alpha.rao_blackwell.clone());
        let bf_general = BfEstimate::from(
            post.clone()
                .and_then(|p| bfcore::bf_matrix_general(&moments, &p)),
        );
        let bf_dirichlet = BfEstimate::from(post.and_then(|p| bfcore::bf_matrix_dirichlet(&moments, &p)));
        let bf_occupancy = BfEstimate::from(bfcore::occupancy_bf(&alpha.occupancy_fraction, &moments));
        let b12 = bf_general.get(0, 1);
        let b12_se = b12.and_then(|_| b12_standard_error(out, &alpha.rao_blackwell));
        Self {
            replicate,
            seed: out.config.seed,
            model_names: out.model_names.clone(),
            dirichlet_p: out.dirichlet_p.clone(),
            retained: out.retained,
            occupancy: out.occupancy.clone(),
            switches: out.z_trace.windows(2).filter(|w| w[0] != w[1]).count(),
            alpha,
            bf_general,
            bf_dirichlet,
            bf_occupancy,
            b12,
            b12_se,
            param_acceptance: out.acceptance_rates(),
            missing_acceptance: out.missing_moves.iter().map(|m| m.rate()).collect(),
            oracle: None,
            notes: BTreeMap::new(),
            wall_seconds,
        }
    }

    /// Recomputes the bounds flags from the current estimates.
    pub fn recheck_bounds(&mut self) {
        let moments = bfcore::dirichlet_moments(&self.dirichlet_p).expect("validated Dirichlet parameters");
        let mut flags = diagnostics::bounds_flags(&moments, &self.alpha.rao_blackwell, "rao_blackwell");
        flags.extend(diagnostics::bounds_flags(&moments, &self.alpha.plain, "plain"));
        self.alpha.bounds_flags = flags;
    }

    /// The chain moved between models and every estimate is strictly inside
    /// its admissible range.
    pub fn is_reliable(&self) -> bool {
        self.b12.is_some_and(f64::is_finite) && self.switches > 0 && self.alpha.bounds_flags.is_empty()
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .alpha
            .bounds_flags
            .iter()
            .map(|f| {
                let place = match f.kind {
                    BoundsKind::Outside => "outside",
                    BoundsKind::AtBoundary => "on the boundary of",
                };
                format!(
                    "replicate {}: {} estimate {:.6} of E[alpha_{}|x] is {place} [{:.6}, {:.6}]",
                    self.replicate,
                    f.estimator,
                    f.value,
                    f.model + 1,
                    f.lower.unwrap_or(0.0),
                    f.upper
                )
            })
            .collect();
        if let Some(e) = &self.bf_general.error {
            out.push(format!("replicate {}: general solver failed: {e}", self.replicate));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub replicates: usize,
    /// Replicates with a finite `B̂₁₂`.
    pub estimated: usize,
    pub reliable: usize,
    pub mean_b12: Option<f64>,
    pub sd_b12: Option<f64>,
    /// `sd / √R` over the estimated replicates.
    pub se_b12: Option<f64>,
    pub median_b12: Option<f64>,
    pub mean_b12_reliable: Option<f64>,
    pub mean_oracle_b12: Option<f64>,
}

fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.len() > 1).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (Some(mean), sd)
}

impl Aggregate {
    pub fn from_replicates(reps: &[ReplicateSummary]) -> Self {
        let values: Vec<f64> = reps.iter().filter_map(|r| r.b12).filter(|v| v.is_finite()).collect();
        let reliable: Vec<f64> = reps.iter().filter(|r| r.is_reliable()).filter_map(|r| r.b12).collect();
        let oracle: Vec<f64> = reps.iter().filter_map(|r| r.oracle.map(|o| o.log_b12.exp())).collect();
        let (mean_b12, sd_b12) = mean_sd(&values);
        let median_b12 = (!values.is_empty()).then(|| {
            let mut v = values.clone();
            v.sort_by(f64::total_cmp);
            let m = v.len() / 2;
            if v.len() % 2 == 1 {
                v[m]
            } else {
                0.5 * (v[m - 1] + v[m])
            }
        });
        Self {
            replicates: reps.len(),
            estimated: values.len(),
            reliable: reliable.len(),
            mean_b12,
            sd_b12,
            se_b12: sd_b12.map(|s| s / (values.len() as f64).sqrt()),
            median_b12,
            mean_b12_reliable: mean_sd(&reliable).0,
            mean_oracle_b12: mean_sd(&oracle).0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryReport {
    pub kind: String,
    pub config: ExperimentConfig,
    pub replicates: Vec<ReplicateSummary>,
    pub aggregate: Aggregate,
    pub wall_seconds: f64,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6e}"))
}

fn fmt_matrix(m: &BfEstimate) -> String {
    match (&m.matrix, &m.error) {
        (Some(rows), _) => rows
            .iter()
            .map(|r| r.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join(" | "),
        (None, Some(e)) => format!("unavailable ({e})"),
        (None, None) => "unavailable".into(),
    }
}

impl SummaryReport {
    pub fn new(config: ExperimentConfig, replicates: Vec<ReplicateSummary>, wall_seconds: f64) -> Self {
        let aggregate = Aggregate::from_replicates(&replicates);
        let kind = serde_json::to_value(config.experiment.kind())
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        Self {
            kind,
            config,
            replicates,
            aggregate,
            wall_seconds,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        self.replicates.iter().flat_map(ReplicateSummary::violations).collect()
    }

    /// `Err(Strict)` listing every bounds or solver problem.
    pub fn strict_check(&self) -> Result<(), ExperimentError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError::Strict(v))
        }
    }

    /// Flat `key=value` records, one per line.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("kind".to_string(), self.kind.clone()),
            ("seed".to_string(), self.config.chain.seed.to_string()),
            ("replicates".to_string(), self.aggregate.replicates.to_string()),
            ("estimated".to_string(), self.aggregate.estimated.to_string()),
            ("reliable".to_string(), self.aggregate.reliable.to_string()),
            ("mean_b12".to_string(), fmt_opt(self.aggregate.mean_b12)),
            ("sd_b12".to_string(), fmt_opt(self.aggregate.sd_b12)),
            ("se_b12".to_string(), fmt_opt(self.aggregate.se_b12)),
            ("median_b12".to_string(), fmt_opt(self.aggregate.median_b12)),
            ("mean_b12_reliable".to_string(), fmt_opt(self.aggregate.mean_b12_reliable)),
            ("mean_oracle_b12".to_string(), fmt_opt(self.aggregate.mean_oracle_b12)),
            ("wall_seconds".to_string(), format!("{:.3}", self.wall_seconds)),
        ];
        for r in &self.replicates {
            let p = format!("rep{}.", r.replicate);
            let n = r.model_names.len();
            kv.push((p.clone() + "seed", r.seed.to_string()));
            kv.push((p.clone() + "switches", r.switches.to_string()));
            kv.push((p.clone() + "b12", fmt_opt(r.b12)));
            kv.push((p.clone() + "b12_se", fmt_opt(r.b12_se)));
            for i in 0..n {
                let q = format!("{p}model{}.", i + 1);
                kv.push((q.clone() + "name", r.model_names[i].clone()));
                kv.push((q.clone() + "p", r.dirichlet_p[i].to_string()));
                kv.push((q.clone() + "occupancy", r.occupancy[i].to_string()));
                kv.push((q.clone() + "alpha_rb", format!("{:.8}", r.alpha.rao_blackwell[i])));
                kv.push((q.clone() + "alpha_rb_se", format!("{:.3e}", r.alpha.rao_blackwell_diag[i].batch_means_se)));
                kv.push((q.clone() + "alpha_plain", format!("{:.8}", r.alpha.plain[i])));
                kv.push((q.clone() + "alpha_plain_se", format!("{:.3e}", r.alpha.plain_diag[i].batch_means_se)));
                kv.push((q.clone() + "ess_rb", format!("{:.1}", r.alpha.rao_blackwell_diag[i].ess)));
                kv.push((q.clone() + "ess_plain", format!("{:.1}", r.alpha.plain_diag[i].ess)));
                for j in 0..n {
                    if i != j {
                        let b = format!("b{}{}", i + 1, j + 1);
                        kv.push((format!("{q}{b}_general"), fmt_opt(r.bf_general.get(i, j))));
                        kv.push((format!("{q}{b}_dirichlet"), fmt_opt(r.bf_dirichlet.get(i, j))));
                        kv.push((format!("{q}{b}_occupancy"), fmt_opt(r.bf_occupancy.get(i, j))));
                    }
                }
            }
            if let Some(o) = r.oracle {
                kv.push((p.clone() + "oracle_b12", format!("{:.6e}", o.log_b12.exp())));
                kv.push((p.clone() + "oracle_log_b12_se", format!("{:.3e}", o.standard_error)));
            }
            for (k, v) in &r.notes {
                kv.push((format!("{p}{k}"), v.to_string()));
            }
            kv.push((p.clone() + "bounds_flags", r.alpha.bounds_flags.len().to_string()));
            kv.push((p + "wall_seconds", format!("{:.3}", r.wall_seconds)));
        }
        kv
    }

    pub fn render_key_values(&self) -> String {
        self.key_values().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let a = &self.aggregate;
        let _ = writeln!(s, "experiment {} (seed {}), {} replicate(s), {:.2}s", self.kind, self.config.chain.seed, a.replicates, self.wall_seconds);
        for r in &self.replicates {
            let _ = writeln!(s, "replicate {} seed {} ({:.2}s)", r.replicate, r.seed, r.wall_seconds);
            for (k, v) in &r.notes {
                let _ = writeln!(s, "  {k}: {v}");
            }
            let _ = writeln!(s, "  models: {}", r.model_names.join(", "));
            let _ = writeln!(s, "  dirichlet p: {:?}", r.dirichlet_p);
            let _ = writeln!(s, "  occupancy: {:?} of {} retained, {} switches", r.occupancy, r.retained, r.switches);
            for i in 0..r.model_names.len() {
                let _ = writeln!(
                    s,
                    "  E[alpha_{}|x]: rao-blackwell {:.6} (se {:.2e}, ess {:.0}), plain {:.6} (se {:.2e}, ess {:.0})",
                    i + 1,
                    r.alpha.rao_blackwell[i],
                    r.alpha.rao_blackwell_diag[i].batch_means_se,
                    r.alpha.rao_blackwell_diag[i].ess,
                    r.alpha.plain[i],
                    r.alpha.plain_diag[i].batch_means_se,
                    r.alpha.plain_diag[i].ess,
                );
            }
            let _ = writeln!(s, "  B (general):   {}", fmt_matrix(&r.bf_general));
            let _ = writeln!(s, "  B (dirichlet): {}", fmt_matrix(&r.bf_dirichlet));
            let _ = writeln!(s, "  B (occupancy): {}", fmt_matrix(&r.bf_occupancy));
            let _ = writeln!(s, "  B12 = {} (se {})", fmt_opt(r.b12), fmt_opt(r.b12_se));
            if let Some(o) = r.oracle {
                let _ = writeln!(s, "  oracle B12 = {:.6e} (log se {:.2e}, {:?})", o.log_b12.exp(), o.standard_error, o.method);
            }
            for v in r.violations() {
                let _ = writeln!(s, "  WARNING {v}");
            }
        }
        let _ = writeln!(
            s,
            "B12 across replicates: mean {} sd {} se {} median {}; {} estimated, {} reliable (mean {})",
            fmt_opt(a.mean_b12),
            fmt_opt(a.sd_b12),
            fmt_opt(a.se_b12),
            fmt_opt(a.median_b12),
            a.estimated,
            a.reliable,
            fmt_opt(a.mean_b12_reliable)
        );
        if a.mean_oracle_b12.is_some() {
            let _ = writeln!(s, "oracle B12 mean {}", fmt_opt(a.mean_oracle_b12));
        }
        s
    }
}
