//! Data sources for the experiments: CSV files, inline summaries and
//! seeded synthetic generators.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::epidemic::simulate::{simulate_poisson, SirOutcome};
use crate::models::logistic::LogisticData;
use crate::models::regression::RegressionData;
use crate::models::EventData;
use crate::sampling::{self, chain_rng};

fn read_columns(path: &Path, wanted: &[&str]) -> Result<Vec<Vec<f64>>, ExperimentError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| ExperimentError::Config(format!("cannot open {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?
        .clone();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h.trim(), i)).collect();
    let cols = wanted
        .iter()
        .map(|w| {
            index
                .get(w)
                .copied()
                .ok_or_else(|| ExperimentError::Config(format!("{}: no column named {w:?}", path.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = vec![Vec::new(); wanted.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        for (k, &c) in cols.iter().enumerate() {
            let field = record.get(c).unwrap_or("").trim();
            let v: f64 = field.parse().map_err(|_| {
                ExperimentError::Config(format!(
                    "{}: row {} column {:?}: {field:?} is not a number",
                    path.display(),
                    line + 2,
                    wanted[k]
                ))
            })?;
            out[k].push(v);
        }
    }
    Ok(out)
}

fn data_error(e: crate::models::DataError) -> ExperimentError {
    ExperimentError::Config(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegressionSource {
    File {
        path: PathBuf,
        y: String,
        x: String,
        z: String,
    },
    /// `y = intercept + slope·x + N(0, noise_sd²)`, `x ~ N(x_mean, x_sd²)`,
    /// `z = x + N(0, z_noise_sd²)`.
    Synthetic {
        n: usize,
        intercept: f64,
        slope: f64,
        noise_sd: f64,
        x_mean: f64,
        x_sd: f64,
        z_noise_sd: f64,
        data_seed: u64,
    },
}

impl RegressionSource {
    pub fn load(&self) -> Result<RegressionData, ExperimentError> {
        match self {
            Self::File { path, y, x, z } => {
                let mut cols = read_columns(path, &[y, x, z])?;
                let z = cols.pop().unwrap();
                let x = cols.pop().unwrap();
                let y = cols.pop().unwrap();
                RegressionData::new(y, x, z).map_err(data_error)
            }
            &Self::Synthetic {
                n,
                intercept,
                slope,
                noise_sd,
                x_mean,
                x_sd,
                z_noise_sd,
                data_seed,
            } => {
                let mut rng = chain_rng(data_seed);
                let (mut y, mut x, mut z) = (vec![], vec![], vec![]);
                for _ in 0..n {
                    let xi = sampling::normal(&mut rng, x_mean, x_sd);
                    let zi = xi + sampling::normal(&mut rng, 0.0, z_noise_sd);
                    y.push(intercept + slope * (xi - x_mean) + sampling::normal(&mut rng, 0.0, noise_sd));
                    x.push(xi);
                    z.push(zi);
                }
                RegressionData::new(y, x, z).map_err(data_error)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum LogisticSource {
    File {
        path: PathBuf,
        response: String,
        covariates: Vec<String>,
    },
    /// Standard normal covariates; `coefficients[0]` is the intercept.
    Synthetic {
        n: usize,
        coefficients: Vec<f64>,
        data_seed: u64,
    },
}

impl LogisticSource {
    pub fn load(&self) -> Result<LogisticData, ExperimentError> {
        match self {
            Self::File {
                path,
                response,
                covariates,
            } => {
                let mut names: Vec<&str> = vec![response];
                names.extend(covariates.iter().map(String::as_str));
                let cols = read_columns(path, &names)?;
                let mut responses = Vec::with_capacity(cols[0].len());
                for &v in &cols[0] {
                    if v != 0.0 && v != 1.0 {
                        return Err(ExperimentError::Config(format!("response {v} is not 0 or 1")));
                    }
                    responses.push(v as u8);
                }
                let rows = (0..responses.len())
                    .map(|j| cols[1..].iter().map(|c| c[j]).collect())
                    .collect();
                LogisticData::new(responses, rows).map_err(data_error)
            }
            Self::Synthetic {
                n,
                coefficients,
                data_seed,
            } => {
                if coefficients.is_empty() {
                    return Err(ExperimentError::Config("need at least an intercept".into()));
                }
                let mut rng = chain_rng(*data_seed);
                let k = coefficients.len() - 1;
                let mut responses = Vec::with_capacity(*n);
                let mut rows = Vec::with_capacity(*n);
                for _ in 0..*n {
                    let row: Vec<f64> = (0..k).map(|_| sampling::normal(&mut rng, 0.0, 1.0)).collect();
                    let eta = coefficients[0] + row.iter().zip(&coefficients[1..]).map(|(a, b)| a * b).sum::<f64>();
                    let p = 1.0 / (1.0 + (-eta).exp());
                    responses.push(u8::from(rng.random::<f64>() < p));
                    rows.push(row);
                }
                LogisticData::new(responses, rows).map_err(data_error)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventSource {
    /// Only `n` and `Σ tⱼ` enter the likelihoods.
    Summary { n: usize, horizon: f64, sum: f64 },
    File { path: PathBuf, column: String, horizon: f64 },
    /// Homogeneous Poisson events, redrawn for every replicate.
    Poisson { lambda: f64, horizon: f64 },
}

impl EventSource {
    pub fn load<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<EventData, ExperimentError> {
        match self {
            &Self::Summary { n, horizon, sum } => EventData::from_summary(n, horizon, sum).map_err(data_error),
            Self::File { path, column, horizon } => {
                let cols = read_columns(path, &[column])?;
                EventData::new(cols.into_iter().next().unwrap(), *horizon).map_err(data_error)
            }
            &Self::Poisson { lambda, horizon } => {
                if !(lambda >= 0.0 && horizon > 0.0) {
                    return Err(ExperimentError::Config("need lambda ≥ 0 and horizon > 0".into()));
                }
                Ok(simulate_poisson(lambda, horizon, rng))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum RemovalSource {
    /// Case counts per day; the cases of day `first_day + k` are placed at
    /// `first_day + k + offset`.
    Daily {
        first_day: u32,
        counts: Vec<u32>,
        offset: f64,
    },
    File { path: PathBuf, column: String },
}

impl RemovalSource {
    /// Removal times, sorted, keeping those at or before `horizon`.
    pub fn load(&self, horizon: f64) -> Result<Vec<f64>, ExperimentError> {
        let mut times = match self {
            Self::Daily {
                first_day,
                counts,
                offset,
            } => {
                if !(0.0..1.0).contains(offset) {
                    return Err(ExperimentError::Config(format!("offset {offset} outside [0, 1)")));
                }
                counts
                    .iter()
                    .enumerate()
                    .flat_map(|(k, &c)| {
                        let t = f64::from(*first_day) + k as f64 + offset;
                        std::iter::repeat_n(t, c as usize)
                    })
                    .collect::<Vec<_>>()
            }
            Self::File { path, column } => read_columns(path, &[column])?.into_iter().next().unwrap(),
        };
        if times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(ExperimentError::Config("removal times must be positive".into()));
        }
        times.retain(|t| *t <= horizon);
        times.sort_by(f64::total_cmp);
        Ok(times)
    }
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), ExperimentError> {
    let io = |e: std::io::Error| ExperimentError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(io)?;
        }
    }
    let tmp = path.with_extension("partial");
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(contents).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

/// One row per infected individual in order of infection.
pub fn sir_csv(outcome: &SirOutcome) -> String {
    let mut out = String::from("individual,infection,removal\n");
    for (k, (i, r)) in outcome.infections.iter().zip(&outcome.removal_of).enumerate() {
        out.push_str(&format!("{k},{i},{r}\n"));
    }
    out
}

pub fn events_csv(data: &EventData) -> String {
    let mut out = String::from("time\n");
    for t in data.times() {
        out.push_str(&format!("{t}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn daily_counts_are_placed_and_truncated() {
        let src = RemovalSource::Daily {
            first_day: 1,
            counts: vec![0, 4, 2, 3],
            offset: 0.5,
        };
        let all = src.load(10.0).unwrap();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], 2.5);
        let early = src.load(3.5).unwrap();
        assert_eq!(early, vec![2.5, 2.5, 2.5, 2.5, 3.5, 3.5]);
    }

    #[test]
    fn synthetic_sources_are_seeded() {
        let s = LogisticSource::Synthetic {
            n: 30,
            coefficients: vec![0.1, 1.0, -1.0],
            data_seed: 4,
        };
        assert_eq!(s.load().unwrap(), s.load().unwrap());
        assert_eq!(s.load().unwrap().n_covariates(), 2);
    }

    #[test]
    fn csv_columns_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reg.csv");
        fs::write(&path, "z,y,x\n1,2,3\n2,4,5\n").unwrap();
        let src = RegressionSource::File {
            path: path.clone(),
            y: "y".into(),
            x: "x".into(),
            z: "z".into(),
        };
        let d = src.load().unwrap();
        assert_eq!(d.y(), &[2.0, 4.0]);
        assert_eq!(d.covariate(crate::models::regression::Design::X), &[-1.0, 1.0]);
        let bad = RegressionSource::File {
            path,
            y: "w".into(),
            x: "x".into(),
            z: "z".into(),
        };
        assert!(matches!(bad.load(), Err(ExperimentError::Config(_))));
    }

    #[test]
    fn atomic_write_leaves_no_partial_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("out.csv");
        write_atomic(&path, b"a\n1\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a\n1\n");
        assert!(!path.with_extension("partial").exists());
    }
}
