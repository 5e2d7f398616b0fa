//! Trace CSV: `iter,z_index,alpha_1..alpha_n,<parameter names>`.
//!
//! `iter` is the zero-based sweep number and `z_index` the one-based label of
//! the active model.

use std::io::Write;

use super::ChainOutput;

pub fn write_trace_csv<W: Write>(out: &ChainOutput, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let n = out.n_models();
    let mut header = vec!["iter".to_string(), "z_index".to_string()];
    header.extend((1..=n).map(|i| format!("alpha_{i}")));
    header.extend(out.param_names.iter().cloned());
    w.write_record(&header)?;

    let mut record = Vec::with_capacity(header.len());
    for r in 0..out.retained {
        record.clear();
        let iter = out.config.burnin + r * out.config.thin;
        record.push(iter.to_string());
        record.push((out.z_trace[r] + 1).to_string());
        record.extend(out.alpha_row(r).iter().map(f64::to_string));
        record.extend(out.theta_row(r).iter().map(f64::to_string));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcmc::{run_chain, ChainConfig, MixtureSpec, ModelComponent};
    use crate::models::toy::ConstantComponent;

    #[test]
    fn header_and_rows() {
        let spec: MixtureSpec<()> = MixtureSpec {
            components: vec![
                Box::new(ConstantComponent::new("a", 0.0)) as Box<dyn ModelComponent<()>>,
                Box::new(ConstantComponent::new("b", 0.0)),
            ],
            dirichlet_p: vec![1.0, 1.0],
            params: vec![],
            initial_theta: None,
            initial_missing: (),
        };
        let config = ChainConfig {
            iterations: 30,
            burnin: 10,
            thin: 5,
            seed: 1,
            allocation_updates: 1,
        };
        let out = run_chain(&spec, &config).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&out, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iter,z_index,alpha_1,alpha_2");
        assert_eq!(lines.len(), 1 + 4);
        assert!(lines[1].starts_with("10,"));
        assert!(lines[4].starts_with("25,"));
    }
}
