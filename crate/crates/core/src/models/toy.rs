//! Components whose density does not depend on any parameter.

use crate::mcmc::{MixtureSpec, ModelComponent, MoveStats};
use crate::sampling::ChainRng;

/// A component with a fixed log-density, e.g. for the fixed-ratio mixing check.
#[derive(Debug, Clone)]
pub struct ConstantComponent {
    name: String,
    log_density: f64,
}

impl ConstantComponent {
    pub fn new(name: impl Into<String>, log_density: f64) -> Self {
        Self {
            name: name.into(),
            log_density,
        }
    }
}

impl<M> ModelComponent<M> for ConstantComponent {
    fn name(&self) -> &str {
        &self.name
    }

    fn slots(&self) -> &[usize] {
        &[]
    }

    fn log_augmented_density(&self, _theta: &[f64], _missing: &M) -> f64 {
        self.log_density
    }

    fn update_params_current(&self, _: &mut [f64], _: &M, _: &mut ChainRng) -> MoveStats {
        MoveStats::default()
    }
}

/// Two models with `m₁/m₂ = exp(log_ratio)`.
pub fn fixed_ratio_spec(log_ratio: f64, dirichlet_p: [f64; 2]) -> MixtureSpec<()> {
    MixtureSpec {
        components: vec![
            Box::new(ConstantComponent::new("M1", log_ratio)),
            Box::new(ConstantComponent::new("M2", 0.0)),
        ],
        dirichlet_p: dirichlet_p.to_vec(),
        params: vec![],
        initial_theta: None,
        initial_missing: (),
    }
}
