//! Model components without epidemic structure.

pub mod logistic;
pub mod point_process;
pub mod regression;
pub mod toy;

pub use point_process::EventData;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid data: {0}")]
pub struct DataError(pub String);
