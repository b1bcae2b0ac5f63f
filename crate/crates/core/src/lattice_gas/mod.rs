//! Geometry of the cylinder `Λ_N`, the reflected Kac kernel, occupancy
//! configurations with a cached interaction field, and the Hamiltonian.

mod configuration;
mod geometry;
mod kernel;
mod snapshot;

pub use configuration::{sample_profile, sample_profile_with, Configuration, Lattice};
pub use geometry::{BoundarySite, Edge, LatticeGeometry, Side, Site};
pub use kernel::{neumann_kernel, CosineProfile, KacKernel, KacProfile, QuarticProfile};
pub use snapshot::{read_snapshot, write_snapshot, write_timed_snapshot};

/// `H_N(η)`; see [`Configuration::hamiltonian`].
pub fn hamiltonian(cfg: &Configuration) -> f64 {
    cfg.hamiltonian()
}
