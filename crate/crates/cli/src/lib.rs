//! Argument handling for the `mixbf` binary.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mixbf::epidemic::simulate::{is_major, Scenario};
use mixbf::epidemic::Population;
use mixbf::experiment::data::{events_csv, sir_csv, write_atomic};
use mixbf::experiment::{
    run_experiment, ExperimentConfig, ExperimentError, ExperimentKind, LogisticSource, RegressionSource,
    RemovalSource,
};
use mixbf::models::regression::{Design, RegressionHyper};
use mixbf::oracle;
use mixbf::sampling::{chain_rng, replicate_seed};

#[derive(Debug, Parser)]
#[command(name = "mixbf", version, about = "Bayes factors from mixture hypermodels")]
pub struct Cli {
    /// Master random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Exit with status 4 on any bounds violation or singular solve.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Worker threads for replicates.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate datasets.
    Simulate(SimulateArgs),
    /// Run the mixture chain described by a configuration.
    Fit(FitArgs),
    /// Independent marginal likelihood or Bayes factor computations.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// SIR scenario A, B or C (N = 50).
    #[arg(long, conflicts_with = "model")]
    pub preset: Option<char>,
    /// `poisson` for homogeneous Poisson events.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long = "T", default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    /// Keep only outbreaks reaching the major-epidemic threshold.
    #[arg(long)]
    pub major_only: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// JSON configuration file.
    pub config: Option<PathBuf>,
    /// Start from the defaults of this experiment instead of a file.
    #[arg(long)]
    pub kind: Option<String>,
    /// Override the replicate count.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Override the number of sweeps.
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Closed-form Bayes factor, Poisson process against birth process.
    #[command(allow_negative_numbers = true)]
    Ex3 {
        #[arg(long)]
        n: u64,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long = "S")]
        sum: f64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
    },
    /// Quadrature marginal likelihoods of the two regressions.
    Regression {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "y")]
        y: String,
        #[arg(long, default_value = "x")]
        x: String,
        #[arg(long, default_value = "z")]
        z: String,
    },
    /// Laplace and importance-sampling marginal likelihoods of nested
    /// logistic models.
    Logistic {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "y")]
        response: String,
        /// Comma-separated covariate columns, in nesting order.
        #[arg(long, value_delimiter = ',')]
        covariates: Vec<String>,
        /// Comma-separated covariate counts per model.
        #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 10.0)]
        prior_sd: f64,
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
    },
    /// Exponential against Gamma infectious periods by integration over
    /// the shape.
    Sir {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "removal")]
        column: String,
        #[arg(long)]
        susceptibles: u32,
        #[arg(long)]
        shape: f64,
        #[arg(long, default_value_t = 5_000)]
        sweeps: usize,
    },
}

const MAX_ATTEMPTS: usize = 100_000;

fn io_err(e: std::io::Error) -> ExperimentError {
    ExperimentError::Io(e.to_string())
}

fn simulate(cli: &Cli, args: &SimulateArgs, out: &mut dyn Write) -> Result<(), ExperimentError> {
    let seed = cli.seed.unwrap_or(1);
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    if args.replicates == 0 {
        return Err(ExperimentError::Config("replicates must be at least 1".into()));
    }
    let mut files = Vec::new();
    match (args.preset, args.model.as_deref()) {
        (Some(p), None) => {
            let sc = Scenario::preset(p).ok_or_else(|| ExperimentError::Config(format!("unknown preset {p:?}")))?;
            for r in 0..args.replicates {
                let mut rng = chain_rng(replicate_seed(seed, r));
                let mut outcome = sc.simulate(&mut rng);
                let mut attempts = 1;
                while args.major_only && !is_major(&outcome, sc.population()) {
                    if attempts == MAX_ATTEMPTS {
                        return Err(ExperimentError::Numerical(format!(
                            "no major outbreak in {MAX_ATTEMPTS} simulations"
                        )));
                    }
                    outcome = sc.simulate(&mut rng);
                    attempts += 1;
                }
                let name = format!("sir_{}_{r:03}.csv", sc.name);
                write_atomic(&dir.join(&name), sir_csv(&outcome).as_bytes())?;
                files.push(serde_json::json!({
                    "file": name,
                    "seed": replicate_seed(seed, r),
                    "final_size": outcome.final_size(),
                }));
            }
        }
        (None, Some("poisson")) => {
            if !(args.lambda >= 0.0 && args.horizon > 0.0) {
                return Err(ExperimentError::Config("need lambda ≥ 0 and T > 0".into()));
            }
            for r in 0..args.replicates {
                let mut rng = chain_rng(replicate_seed(seed, r));
                let data = mixbf::epidemic::simulate::simulate_poisson(args.lambda, args.horizon, &mut rng);
                let name = format!("poisson_{r:03}.csv");
                write_atomic(&dir.join(&name), events_csv(&data).as_bytes())?;
                files.push(serde_json::json!({ "file": name, "seed": replicate_seed(seed, r), "events": data.len() }));
            }
        }
        (None, Some(m)) => return Err(ExperimentError::Config(format!("unknown model {m:?}"))),
        _ => return Err(ExperimentError::Config("give --preset or --model".into())),
    }
    if args.replicates > 1 {
        let manifest = serde_json::json!({ "seed": seed, "files": files });
        write_atomic(&dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).unwrap().as_bytes())?;
    }
    writeln!(out, "seed={seed}").map_err(io_err)?;
    for f in &files {
        writeln!(out, "wrote {}", dir.join(f["file"].as_str().unwrap()).display()).map_err(io_err)?;
    }
    Ok(())
}

fn load_config(cli: &Cli, args: &FitArgs) -> Result<ExperimentConfig, ExperimentError> {
    let mut config = match (&args.config, &args.kind) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(kind)) => ExperimentConfig::default_for(kind.parse::<ExperimentKind>()?),
        _ => return Err(ExperimentError::Config("give a configuration file or --kind".into())),
    };
    if let Some(s) = cli.seed {
        config.chain.seed = s;
    }
    if let Some(d) = &cli.out {
        config.output_dir = Some(d.clone());
    }
    if let Some(r) = args.replicates {
        config.replicates = r;
    }
    if let Some(i) = args.iterations {
        config.chain.iterations = i;
        config.chain.burnin = i / 10;
    }
    config.validate()?;
    Ok(config)
}

fn fit(cli: &Cli, args: &FitArgs, out: &mut dyn Write) -> Result<(), ExperimentError> {
    let config = load_config(cli, args)?;
    if cli.print_config {
        writeln!(out, "{}", config.to_json()).map_err(io_err)?;
        return Ok(());
    }
    let report = run_experiment(&config, cli.threads)?;
    write!(out, "{}", report.render_text()).map_err(io_err)?;
    writeln!(out, "---").map_err(io_err)?;
    write!(out, "{}", report.render_key_values()).map_err(io_err)?;
    if cli.strict {
        report.strict_check()?;
    }
    Ok(())
}

fn print_result(out: &mut dyn Write, label: &str, r: &oracle::OracleResult) -> Result<(), ExperimentError> {
    writeln!(
        out,
        "{label}: value={:.6e} log_value={:.8} log_se={:.3e} method={:?}",
        r.value, r.log_value, r.standard_error, r.method
    )
    .map_err(io_err)
}

fn numerical(e: oracle::OracleError) -> ExperimentError {
    match e {
        oracle::OracleError::InvalidArgument(m) => ExperimentError::Config(m),
        other => ExperimentError::Numerical(other.to_string()),
    }
}

fn run_oracle(cli: &Cli, cmd: &OracleCommand, out: &mut dyn Write) -> Result<(), ExperimentError> {
    let seed = cli.seed.unwrap_or(1);
    match cmd {
        &OracleCommand::Ex3 { n, horizon, sum, theta } => {
            let log = oracle::analytic_log_bf_ex3(n, horizon, sum, theta).map_err(numerical)?;
            print_result(out, "B12", &oracle::OracleResult::exact(log, oracle::OracleMethod::ClosedForm))
        }
        OracleCommand::Regression { csv, y, x, z } => {
            let data = RegressionSource::File {
                path: csv.clone(),
                y: y.clone(),
                x: x.clone(),
                z: z.clone(),
            }
            .load()?;
            let hyper = RegressionHyper::default();
            let mx = oracle::regression_marginal_quadrature(&data, Design::X, &hyper).map_err(numerical)?;
            let mz = oracle::regression_marginal_quadrature(&data, Design::Z, &hyper).map_err(numerical)?;
            print_result(out, "m1", &mx)?;
            print_result(out, "m2", &mz)?;
            let b = mx.log_value - mz.log_value;
            print_result(out, "B12", &oracle::OracleResult::exact(b, oracle::OracleMethod::Quadrature))
        }
        OracleCommand::Logistic {
            csv,
            response,
            covariates,
            dims,
            prior_sd,
            samples,
        } => {
            let data = LogisticSource::File {
                path: csv.clone(),
                response: response.clone(),
                covariates: covariates.clone(),
            }
            .load()?;
            let mut rng = chain_rng(seed);
            for (k, &d) in dims.iter().enumerate() {
                let lap = oracle::logistic_laplace_marginal(&data, d, *prior_sd).map_err(numerical)?;
                let is = oracle::logistic_marginal_is(&data, d, *prior_sd, *samples, &mut rng).map_err(numerical)?;
                print_result(out, &format!("m{} laplace", k + 1), &lap)?;
                print_result(out, &format!("m{} importance", k + 1), &is)?;
            }
            Ok(())
        }
        OracleCommand::Sir {
            csv,
            column,
            susceptibles,
            shape,
            sweeps,
        } => {
            let removals = RemovalSource::File {
                path: csv.clone(),
                column: column.clone(),
            }
            .load(f64::INFINITY)?;
            let pop = Population::new(*susceptibles).map_err(|e| ExperimentError::Config(e.to_string()))?;
            let r = oracle::ex4_log_bf_shape_path(&removals, pop, (1.0, *shape), (1.0, 1.0), *sweeps, seed)
                .map_err(numerical)?;
            print_result(out, "B12", &r)
        }
    }
}

/// Runs the parsed command, returning the process exit status.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Simulate(a) => simulate(cli, a, out),
        Command::Fit(a) => fit(cli, a, out),
        Command::Oracle(c) => run_oracle(cli, c, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
