//! Empirical density and current measures, the box mollifier, block averages
//! and the continuity-equation diagnostic.

mod continuity;
mod csv;
mod measures;
mod mollify;

pub use continuity::{continuity_residual, FnSpatial, InitialProfile, MeasurePath, SpatialTest};
pub use csv::{write_current_pairings, write_density_profile, CurrentPairingRow};
pub use measures::{
    block_average, empirical_current, empirical_density, pair_current, pair_density, CurrentMeasure, DensityMeasure,
};
pub use mollify::{default_kappa, mollify};
