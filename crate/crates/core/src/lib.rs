//! Boundary-driven Kawasaki lattice gas with a reflected (Neumann) Kac interaction.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice_gas`]: cylinder geometry, kernel, configurations and the Hamiltonian.
//! * [`dynamics`]: exact continuous-time simulation, tilted rates, current ledger,
//!   Girsanov weights and a dense generator oracle for tiny lattices.
//! * [`observables`]: empirical density and current measures, mollification and
//!   the continuity residual.
//! * [`hydrodynamics`]: finite-volume solver for the nonlocal hydrodynamic equation.
//! * [`rate_functionals`]: energy, current and density rate functionals.

pub mod dynamics;
pub mod error;
pub mod hydrodynamics;
pub mod lattice_gas;
pub mod numerics;
pub mod observables;
pub mod rate_functionals;

pub use error::{Error, Result};

/// Mobility of the exclusion process, `2ρ(1−ρ)`.
#[inline]
pub fn mobility(rho: f64) -> f64 {
    2.0 * rho * (1.0 - rho)
}

/// Half the mobility, `ρ(1−ρ)`.
#[inline]
pub fn chi(rho: f64) -> f64 {
    rho * (1.0 - rho)
}
