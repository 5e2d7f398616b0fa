//! Bayes factors for competing models from MCMC over a Dirichlet mixture of
//! the candidate models.

pub mod bfcore;
pub mod epidemic;
pub mod experiment;
pub mod mcmc;
pub mod models;
pub mod oracle;
pub mod sampling;
