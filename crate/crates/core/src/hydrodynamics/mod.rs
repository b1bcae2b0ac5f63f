//! Finite-volume solver for the nonlocal hydrodynamic equation
//! `∂_t ρ = Δρ − β div(σ(ρ) ∇(J ⋆ ρ)) − div(σ(ρ) V)` on `[−1,1] × 𝕋^{d−1}`
//! with Dirichlet data `b` at `u1 = ±1`.

mod convolution;
mod grid;
mod heat;
mod io;
mod path;
mod solver;
mod weak_form;

pub use convolution::{convolve, Convolver};
pub use grid::{FaceField, Grid, GridFunction};
pub use heat::heat_reference;
pub use io::{
    metadata_path, read_grid_function, read_metadata, read_path_pair, write_grid_function, write_metadata,
    write_path_pair,
};
pub use path::{trapezoid_weights, PathPair};
pub use solver::{evolve, instantaneous_current, stationary_profile, Evolution, HydroSolver, PdeConfig, Stationary};
pub use weak_form::{weak_form_residual, FnTest, TestFunction};

pub use crate::chi;
