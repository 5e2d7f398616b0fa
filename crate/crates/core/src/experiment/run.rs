//! Replicate runners.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use super::data::write_atomic;
use super::report::{OracleCheck, ReplicateSummary, SummaryReport};
use super::{Ex4Data, ExperimentConfig, ExperimentError, ExperimentSpec};
use crate::epidemic::ex4::ex4_spec;
use crate::epidemic::ex5::ex5_spec;
use crate::epidemic::simulate::{is_major, Scenario};
use crate::epidemic::Population;
use crate::experiment::data::RemovalSource;
use crate::mcmc::balance::{balance_dirichlet, fit_pseudo_priors};
use crate::mcmc::trace::write_trace_csv;
use crate::mcmc::{run_chain_with, ChainConfig, InactiveDraws, MixtureSpec};
use crate::models::logistic::logistic_spec;
use crate::models::point_process::poisson_vs_birth_spec;
use crate::models::regression::{regression_spec, Design};
use crate::models::toy::fixed_ratio_spec;
use crate::oracle::{self, OracleError, OracleMethod};
use crate::sampling::{chain_rng, replicate_seed};

/// Attempts at simulating a major outbreak before giving up.
const MAX_OUTBREAK_ATTEMPTS: usize = 100_000;

fn numerical(e: OracleError) -> ExperimentError {
    ExperimentError::Numerical(format!("oracle: {e}"))
}

fn config_error(e: crate::models::DataError) -> ExperimentError {
    ExperimentError::Config(e.to_string())
}

/// Pilot tuning, main chain, summary and optional trace file.
fn fit<M: Clone>(
    mut spec: MixtureSpec<M>,
    config: &ExperimentConfig,
    chain: &ChainConfig,
    replicate: usize,
) -> Result<ReplicateSummary, ExperimentError> {
    let start = Instant::now();
    let inactive = match &config.tuning.pseudo_priors {
        Some(c) => fit_pseudo_priors(&spec, c, chain.seed.wrapping_add(31))?,
        None => InactiveDraws::Prior,
    };
    if let Some(b) = &config.tuning.balance {
        balance_dirichlet(&mut spec, b, chain, &inactive)?;
    }
    let out = run_chain_with(&spec, chain, &inactive)?;
    if let Some(dir) = &config.output_dir {
        let mut buf = Vec::new();
        write_trace_csv(&out, &mut buf).map_err(|e| ExperimentError::Io(e.to_string()))?;
        write_atomic(&dir.join(format!("trace_{replicate:03}.csv")), &buf)?;
    }
    Ok(ReplicateSummary::from_chain(replicate, &out, start.elapsed().as_secs_f64()))
}

fn two(p: &[f64]) -> [f64; 2] {
    [p[0], p[1]]
}

/// Runs replicate `r` of the experiment.
pub fn run_replicate(config: &ExperimentConfig, r: usize) -> Result<ReplicateSummary, ExperimentError> {
    let seed = replicate_seed(config.chain.seed, r);
    let chain = ChainConfig { seed, ..config.chain };
    let p = &config.dirichlet_p;
    let mut summary = match &config.experiment {
        ExperimentSpec::Ex1 { hyper, data } => {
            let data = Arc::new(data.load()?);
            let mut s = fit(regression_spec(data.clone(), *hyper, two(p)), config, &chain, r)?;
            let mx = oracle::regression_marginal_quadrature(&data, Design::X, hyper).map_err(numerical)?;
            let mz = oracle::regression_marginal_quadrature(&data, Design::Z, hyper).map_err(numerical)?;
            s.oracle = Some(OracleCheck {
                log_b12: mx.log_value - mz.log_value,
                standard_error: 0.0,
                method: OracleMethod::Quadrature,
            });
            s.notes.insert("n".into(), data.len() as f64);
            s
        }
        ExperimentSpec::Ex2 {
            dims,
            prior_sd,
            proposal_scale,
            importance_samples,
            data,
        } => {
            let data = Arc::new(data.load()?);
            let spec = logistic_spec(data.clone(), dims, *prior_sd, *proposal_scale, p.clone()).map_err(config_error)?;
            let mut s = fit(spec, config, &chain, r)?;
            if *importance_samples > 0 {
                let mut rng = chain_rng(seed.wrapping_add(101));
                let mut logs = Vec::with_capacity(dims.len());
                for (k, &d) in dims.iter().enumerate() {
                    let m = oracle::logistic_marginal_is(&data, d, *prior_sd, *importance_samples, &mut rng).map_err(numerical)?;
                    s.notes.insert(format!("oracle_log_m{}", k + 1), m.log_value);
                    s.notes.insert(format!("oracle_log_m{}_se", k + 1), m.standard_error);
                    logs.push(m);
                }
                s.oracle = Some(OracleCheck {
                    log_b12: logs[0].log_value - logs[1].log_value,
                    standard_error: logs[0].standard_error.hypot(logs[1].standard_error),
                    method: OracleMethod::ImportanceSampling,
                });
            }
            s.notes.insert("n".into(), data.len() as f64);
            s
        }
        ExperimentSpec::Ex3 { prior_rate, data } => {
            let mut rng = chain_rng(seed.wrapping_add(0xDA7A));
            let data = Arc::new(data.load(&mut rng)?);
            let mut s = fit(poisson_vs_birth_spec(data.clone(), *prior_rate, two(p)), config, &chain, r)?;
            let log_b12 = oracle::analytic_log_bf_ex3(data.len() as u64, data.horizon(), data.sum(), *prior_rate)
                .map_err(numerical)?;
            s.oracle = Some(OracleCheck {
                log_b12,
                standard_error: 0.0,
                method: OracleMethod::ClosedForm,
            });
            s.notes.insert("n".into(), data.len() as f64);
            s.notes.insert("sum".into(), data.sum());
            s
        }
        ExperimentSpec::Ex4 {
            data,
            model_shape,
            prior,
            mh_sweeps,
            oracle_sweeps,
        } => {
            let (removals, pop, shape, attempts) = match data {
                Ex4Data::Preset { scenario, major_only } => {
                    let sc = Scenario::preset(*scenario)
                        .ok_or_else(|| ExperimentError::Config(format!("unknown scenario {scenario:?}")))?;
                    let mut rng = chain_rng(seed.wrapping_add(0xE4));
                    let mut attempts = 0;
                    let outcome = loop {
                        attempts += 1;
                        if attempts > MAX_OUTBREAK_ATTEMPTS {
                            return Err(ExperimentError::Numerical("no major outbreak simulated".into()));
                        }
                        let o = sc.simulate(&mut rng);
                        if !major_only || is_major(&o, sc.population()) {
                            break o;
                        }
                    };
                    (outcome.removals, sc.population(), model_shape.unwrap_or(sc.model_shape), attempts)
                }
                Ex4Data::File {
                    path,
                    column,
                    susceptibles,
                } => {
                    let src = RemovalSource::File {
                        path: path.clone(),
                        column: column.clone(),
                    };
                    let pop = Population::new(*susceptibles).map_err(config_error)?;
                    let shape = model_shape.ok_or_else(|| ExperimentError::Config("model_shape is required".into()))?;
                    (src.load(f64::INFINITY)?, pop, shape, 1)
                }
            };
            let removals = Arc::new(removals);
            let spec = ex4_spec(removals.clone(), pop, shape, *prior, two(p), *mh_sweeps).map_err(config_error)?;
            let mut s = fit(spec, config, &chain, r)?;
            if *oracle_sweeps > 0 {
                let o = oracle::ex4_log_bf_shape_path(&removals, pop, (1.0, shape), *prior, *oracle_sweeps, seed.wrapping_add(17))
                    .map_err(numerical)?;
                s.oracle = Some(OracleCheck {
                    log_b12: o.log_value,
                    standard_error: o.standard_error,
                    method: o.method,
                });
            }
            s.notes.insert("final_size".into(), removals.len() as f64);
            s.notes.insert("simulation_attempts".into(), attempts as f64);
            s
        }
        ExperimentSpec::Ex5 {
            data,
            horizon,
            susceptibles,
            missing_prior,
            prior,
            moves_per_sweep,
        } => {
            let removals = Arc::new(data.load(*horizon)?);
            let pop = Population::new(*susceptibles).map_err(config_error)?;
            let spec = ex5_spec(removals.clone(), *horizon, pop, *missing_prior, *prior, two(p), *moves_per_sweep, seed)
                .map_err(config_error)?;
            let mut s = fit(spec, config, &chain, r)?;
            s.notes.insert("cases".into(), removals.len() as f64);
            s.notes.insert("horizon".into(), *horizon);
            s
        }
        ExperimentSpec::ToyRatio { log_ratio } => {
            let mut s = fit(fixed_ratio_spec(*log_ratio, two(p)), config, &chain, r)?;
            s.oracle = Some(OracleCheck {
                log_b12: *log_ratio,
                standard_error: 0.0,
                method: OracleMethod::ClosedForm,
            });
            s
        }
    };
    summary.replicate = r;
    Ok(summary)
}

/// Runs every replicate on up to `threads` workers and writes the summary
/// files when an output directory is configured.
pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> Result<SummaryReport, ExperimentError> {
    config.validate()?;
    let start = Instant::now();
    let n = config.replicates;
    let workers = threads.clamp(1, n);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<ReplicateSummary, ExperimentError>>>> = Mutex::new(vec![None; n]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let r = next.fetch_add(1, Ordering::Relaxed);
                if r >= n {
                    break;
                }
                let res = run_replicate(config, r);
                results.lock().expect("no worker panicked")[r] = Some(res);
            });
        }
    });
    let replicates = results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every replicate ran"))
        .collect::<Result<Vec<_>, _>>()?;
    let report = SummaryReport::new(config.clone(), replicates, start.elapsed().as_secs_f64());
    if let Some(dir) = &config.output_dir {
        let json = serde_json::to_string_pretty(&report).map_err(|e| ExperimentError::Io(e.to_string()))?;
        write_atomic(&dir.join("summary.json"), json.as_bytes())?;
        write_atomic(&dir.join("summary.txt"), report.render_text().as_bytes())?;
        write_atomic(&dir.join("summary.kv"), report.render_key_values().as_bytes())?;
    }
    Ok(report)
}
