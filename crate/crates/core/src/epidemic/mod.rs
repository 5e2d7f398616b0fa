//! SIR epidemics observed through removal times, with imputed infection times.

pub mod ex4;
pub mod ex5;
pub mod simulate;
pub mod trajectory;

use serde::{Deserialize, Serialize};

use crate::models::DataError;

pub use ex4::AugmentationEx4;
pub use ex5::AugmentationEx5;
pub use trajectory::{Event, EventKind, Trajectory};

/// A closed population with `susceptibles` initially susceptible individuals
/// and a single initial infective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Population {
    pub susceptibles: u32,
}

impl Population {
    pub fn new(susceptibles: u32) -> Result<Self, DataError> {
        if susceptibles == 0 {
            return Err(DataError("population needs at least one susceptible".into()));
        }
        Ok(Self { susceptibles })
    }

    /// Everyone, including the initial infective.
    pub fn total(&self) -> u32 {
        self.susceptibles + 1
    }
}

/// Removal times must be finite and non-decreasing.
pub(crate) fn check_removals(removals: &[f64]) -> Result<(), DataError> {
    if removals.iter().any(|r| !r.is_finite()) {
        return Err(DataError("removal times must be finite".into()));
    }
    if removals.windows(2).any(|w| w[1] < w[0]) {
        return Err(DataError("removal times must be sorted".into()));
    }
    Ok(())
}
