//! Configuration-driven runs: load or simulate data, build the hypermodel,
//! run chains over replicates and summarise the Bayes factor estimates.

pub mod data;
pub mod report;
pub mod run;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epidemic::ex5::MissingPrior;
use crate::mcmc::balance::{BalanceConfig, PseudoPriorConfig};
use crate::mcmc::{ChainConfig, ChainError};
use crate::models::regression::RegressionHyper;

pub use data::{EventSource, LogisticSource, RegressionSource, RemovalSource};
pub use report::{Aggregate, BfEstimate, ReplicateSummary, SummaryReport};
pub use run::run_experiment;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("strict mode: {}", .0.join("; "))]
    Strict(Vec<String>),
    #[error("i/o error: {0}")]
    Io(String),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Strict(_) => 4,
            Self::Io(_) => 1,
        }
    }
}

impl From<ChainError> for ExperimentError {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::InvalidSpec(_) | ChainError::InvalidConfig(_) => Self::Config(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Ex1,
    Ex2,
    Ex3,
    Ex4,
    Ex5,
    ToyRatio,
}

impl std::str::FromStr for ExperimentKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "ex1" => Self::Ex1,
            "ex2" => Self::Ex2,
            "ex3" => Self::Ex3,
            "ex4" => Self::Ex4,
            "ex5" => Self::Ex5,
            "toy-ratio" => Self::ToyRatio,
            _ => {
                return Err(ExperimentError::Config(format!(
                    "unknown experiment {s:?} (expected ex1..ex5 or toy-ratio)"
                )))
            }
        })
    }
}

/// Where the Example-4 removal data come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum Ex4Data {
    /// A fresh outbreak per replicate from preset `A`, `B` or `C`.
    Preset { scenario: char, major_only: bool },
    File {
        path: PathBuf,
        column: String,
        susceptibles: u32,
    },
}

/// Model part of the configuration, tagged by experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentSpec {
    /// Two regressions on different covariates.
    Ex1 {
        hyper: RegressionHyper,
        data: RegressionSource,
    },
    /// Nested logistic regressions; `dims` counts covariates per model.
    Ex2 {
        dims: Vec<usize>,
        prior_sd: f64,
        proposal_scale: f64,
        importance_samples: usize,
        data: LogisticSource,
    },
    /// Poisson process against linear birth process.
    Ex3 { prior_rate: f64, data: EventSource },
    /// Exponential against Gamma infectious periods.
    Ex4 {
        data: Ex4Data,
        /// `None` takes the preset's shape.
        model_shape: Option<f64>,
        prior: (f64, f64),
        mh_sweeps: f64,
        /// Sweeps per node of the shape-path oracle; zero skips it.
        oracle_sweeps: usize,
    },
    /// Poisson process against SIR epidemic on partially observed data.
    Ex5 {
        data: RemovalSource,
        horizon: f64,
        susceptibles: u32,
        missing_prior: MissingPrior,
        prior: (f64, f64),
        moves_per_sweep: usize,
    },
    /// Two constant densities with known log ratio.
    ToyRatio { log_ratio: f64 },
}

impl ExperimentSpec {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Self::Ex1 { .. } => ExperimentKind::Ex1,
            Self::Ex2 { .. } => ExperimentKind::Ex2,
            Self::Ex3 { .. } => ExperimentKind::Ex3,
            Self::Ex4 { .. } => ExperimentKind::Ex4,
            Self::Ex5 { .. } => ExperimentKind::Ex5,
            Self::ToyRatio { .. } => ExperimentKind::ToyRatio,
        }
    }

    fn n_models(&self) -> usize {
        match self {
            Self::Ex2 { dims, .. } => dims.len(),
            _ => 2,
        }
    }
}

/// Pilot-run tuning applied before the main chain.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tuning {
    /// Inactive slots drawn from laws fitted to within-model pilots.
    pub pseudo_priors: Option<PseudoPriorConfig>,
    /// Dirichlet parameters adjusted towards equal occupancy.
    pub balance: Option<BalanceConfig>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSpec,
    pub dirichlet_p: Vec<f64>,
    pub chain: ChainConfig,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub tuning: Tuning,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The configuration used when nothing is overridden.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let chain = |iterations: usize, allocation_updates: usize| ChainConfig {
            allocation_updates,
            ..ChainConfig::new(iterations, 1)
        };
        let (experiment, dirichlet_p, chain, replicates, tuning) = match kind {
            ExperimentKind::Ex1 => (
                ExperimentSpec::Ex1 {
                    hyper: RegressionHyper::default(),
                    data: RegressionSource::Synthetic {
                        n: 42,
                        intercept: 3000.0,
                        slope: 185.0,
                        noise_sd: 300.0,
                        x_mean: 30.0,
                        x_sd: 5.0,
                        z_noise_sd: 1.5,
                        data_seed: 7,
                    },
                },
                vec![1.0, 1.0],
                chain(100_000, 1),
                1,
                Tuning {
                    pseudo_priors: Some(PseudoPriorConfig::default()),
                    balance: Some(BalanceConfig {
                        pilot_iterations: 5_000,
                        ..BalanceConfig::default()
                    }),
                },
            ),
            ExperimentKind::Ex2 => (
                ExperimentSpec::Ex2 {
                    dims: vec![3, 4, 5],
                    prior_sd: 10.0,
                    proposal_scale: 0.1,
                    importance_samples: 50_000,
                    data: LogisticSource::Synthetic {
                        n: 100,
                        coefficients: vec![-0.5, 1.0, -0.8, 0.6, 0.25, 0.0],
                        data_seed: 11,
                    },
                },
                vec![1.0, 1.0, 1.0],
                chain(100_000, 1),
                1,
                Tuning {
                    pseudo_priors: Some(PseudoPriorConfig::default()),
                    balance: Some(BalanceConfig {
                        pilot_iterations: 5_000,
                        ..BalanceConfig::default()
                    }),
                },
            ),
            ExperimentKind::Ex3 => (
                ExperimentSpec::Ex3 {
                    prior_rate: 1.0,
                    data: EventSource::Summary {
                        n: 5,
                        horizon: 10.0,
                        sum: 36.0,
                    },
                },
                vec![1.0, 1.0],
                chain(100_000, 1),
                1,
                Tuning {
                    pseudo_priors: Some(PseudoPriorConfig::default()),
                    balance: None,
                },
            ),
            ExperimentKind::Ex4 => (
                ExperimentSpec::Ex4 {
                    data: Ex4Data::Preset {
                        scenario: 'A',
                        major_only: true,
                    },
                    model_shape: None,
                    prior: (1.0, 1.0),
                    mh_sweeps: 1.0,
                    oracle_sweeps: 0,
                },
                vec![1.0, 1.0],
                chain(20_000, 10),
                20,
                Tuning {
                    pseudo_priors: Some(PseudoPriorConfig::default()),
                    balance: Some(BalanceConfig::default()),
                },
            ),
            ExperimentKind::Ex5 => (
                ExperimentSpec::Ex5 {
                    data: RemovalSource::Daily {
                        first_day: 1,
                        counts: vec![0, 4, 2, 3, 3, 10, 5],
                        offset: 0.5,
                    },
                    horizon: 10.0,
                    susceptibles: 88,
                    missing_prior: MissingPrior {
                        mu: 4.0,
                        theta_geom: 0.1,
                    },
                    prior: (1.0, 1.0),
                    moves_per_sweep: 20,
                },
                vec![1.0, 1.0],
                chain(50_000, 5),
                1,
                Tuning {
                    pseudo_priors: Some(PseudoPriorConfig::default()),
                    balance: Some(BalanceConfig {
                        rounds: 4,
                        pilot_iterations: 5_000,
                        max_ratio: 1e12,
                    }),
                },
            ),
            ExperimentKind::ToyRatio => (
                ExperimentSpec::ToyRatio {
                    log_ratio: 50f64.ln(),
                },
                vec![1.0, 50.0],
                chain(1_000_000, 1),
                1,
                Tuning::default(),
            ),
        };
        Self {
            experiment,
            dirichlet_p,
            chain,
            replicates,
            tuning,
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let config: Self = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serialises")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        self.chain.validate()?;
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        let k = self.experiment.n_models();
        if self.dirichlet_p.len() != k {
            return bad(format!("{} Dirichlet parameters for {k} models", self.dirichlet_p.len()));
        }
        if self.dirichlet_p.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return bad("Dirichlet parameters must be positive".into());
        }
        if let Some(b) = &self.tuning.balance {
            if b.rounds == 0 || b.pilot_iterations < 10 || !(b.max_ratio >= 1.0) {
                return bad("balance needs rounds ≥ 1, pilot_iterations ≥ 10, max_ratio ≥ 1".into());
            }
        }
        if let Some(p) = &self.tuning.pseudo_priors {
            if p.pilot_iterations < 10 || !(p.inflation > 0.0) {
                return bad("pseudo priors need pilot_iterations ≥ 10 and inflation > 0".into());
            }
        }
        match &self.experiment {
            ExperimentSpec::Ex1 { hyper, .. } => hyper.validate().map_err(|e| ExperimentError::Config(e.to_string())),
            ExperimentSpec::Ex2 {
                dims,
                prior_sd,
                proposal_scale,
                importance_samples,
                ..
            } => {
                if dims.len() < 2 || dims.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("dims must be increasing with at least two models".into());
                }
                if !(*prior_sd > 0.0 && *proposal_scale > 0.0) {
                    return bad("prior_sd and proposal_scale must be positive".into());
                }
                if *importance_samples != 0 && *importance_samples < crate::oracle::logistic::MIN_IS_SAMPLES {
                    return bad(format!(
                        "importance_samples must be 0 or at least {}",
                        crate::oracle::logistic::MIN_IS_SAMPLES
                    ));
                }
                Ok(())
            }
            ExperimentSpec::Ex3 { prior_rate, .. } => {
                if !(*prior_rate > 0.0) {
                    return bad("prior_rate must be positive".into());
                }
                Ok(())
            }
            ExperimentSpec::Ex4 {
                data,
                model_shape,
                prior,
                mh_sweeps,
                ..
            } => {
                if let Ex4Data::Preset { scenario, .. } = data {
                    if crate::epidemic::simulate::Scenario::preset(*scenario).is_none() {
                        return bad(format!("unknown scenario {scenario:?}"));
                    }
                } else if model_shape.is_none() {
                    return bad("model_shape is required for file data".into());
                }
                if model_shape.is_some_and(|s| !(s > 0.0)) || !(prior.0 > 0.0 && prior.1 > 0.0) || !(*mh_sweeps > 0.0) {
                    return bad("shape, prior parameters and mh_sweeps must be positive".into());
                }
                Ok(())
            }
            ExperimentSpec::Ex5 {
                horizon,
                susceptibles,
                missing_prior,
                prior,
                moves_per_sweep,
                ..
            } => {
                missing_prior
                    .validate()
                    .map_err(|e| ExperimentError::Config(e.to_string()))?;
                if !(*horizon > 0.0) || *susceptibles == 0 || *moves_per_sweep == 0 {
                    return bad("need horizon > 0, susceptibles ≥ 1, moves_per_sweep ≥ 1".into());
                }
                if !(prior.0 > 0.0 && prior.1 > 0.0) {
                    return bad("prior parameters must be positive".into());
                }
                Ok(())
            }
            ExperimentSpec::ToyRatio { log_ratio } => {
                if !log_ratio.is_finite() {
                    return bad("log_ratio must be finite".into());
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KINDS: [ExperimentKind; 6] = [
        ExperimentKind::Ex1,
        ExperimentKind::Ex2,
        ExperimentKind::Ex3,
        ExperimentKind::Ex4,
        ExperimentKind::Ex5,
        ExperimentKind::ToyRatio,
    ];

    #[test]
    fn defaults_validate_and_round_trip() {
        for kind in KINDS {
            let c = ExperimentConfig::default_for(kind);
            c.validate().unwrap();
            let text = c.to_json();
            let back = ExperimentConfig::from_json(&text).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.to_json(), text);
            assert_eq!(back.experiment.kind(), kind);
        }
    }

    #[test]
    fn invalid_configs_are_config_errors() {
        let mut c = ExperimentConfig::default_for(ExperimentKind::Ex3);
        c.chain.burnin = c.chain.iterations;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        let mut c = ExperimentConfig::default_for(ExperimentKind::Ex2);
        c.dirichlet_p = vec![1.0, 1.0];
        assert!(c.validate().is_err());
        let text = ExperimentConfig::default_for(ExperimentKind::Ex3)
            .to_json()
            .replace("\"replicates\"", "\"replicate_count\"");
        assert!(matches!(ExperimentConfig::from_json(&text), Err(ExperimentError::Config(_))));
    }

    #[test]
    fn kind_names_parse() {
        assert_eq!("toy-ratio".parse::<ExperimentKind>().unwrap(), ExperimentKind::ToyRatio);
        assert!("ex9".parse::<ExperimentKind>().is_err());
    }
}
