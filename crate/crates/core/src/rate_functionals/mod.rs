//! Rate functionals of the joint current and density large deviations.
//!
//! [`rate_j_t`] and [`rate_i_t`] use the control representations, with the
//! variational forms ([`j_hat_v`], [`i_hat_variational`],
//! [`energy_q_variational`]) as cross-checks.

mod common;
mod contraction;
mod current;
mod density;
mod energy;
mod family;
mod report;

pub use common::{continuity_gate, Certificate, GateConfig, GateOutcome, RateValue, EXCLUDED_MASS_FACTOR, SIGMA_FLOOR};
pub use contraction::{contraction_check, divergence_free_field, ContractionConfig, ContractionReport, PerturbationSample};
pub use current::{j_hat_v, rate_j_t, rate_j_t_with_rate, ControlField, CurrentRate, JHatTerms};
pub use density::{i_hat_variational, rate_i_t, DensityRate, PotentialField, VariationalDensity};
pub use energy::{energy_q_closed, energy_q_variational, VariationalEnergy};
pub use family::{ConfinedBasis, ConstantVector, FnVector, GateFamily, TestFamily, VectorField};
pub use report::{path_digest, RateReport};
