use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::lattice_gas::Side;

/// Reservoir density `b : Γ → (0,1)`, a function of the side and the
/// transverse torus coordinates.
pub trait BoundaryProfile: Send + Sync + Debug {
    fn value(&self, side: Side, transverse: &[f64]) -> f64;
}

/// `b ≡ c`.
#[derive(Clone, Copy, Debug)]
pub struct ConstantBoundary(f64);

impl ConstantBoundary {
    pub fn new(c: f64) -> Result<Self> {
        check_open_unit(c)?;
        Ok(ConstantBoundary(c))
    }
}

impl BoundaryProfile for ConstantBoundary {
    fn value(&self, _: Side, _: &[f64]) -> f64 {
        self.0
    }
}

/// Different constant densities on the two ends of the cylinder.
#[derive(Clone, Copy, Debug)]
pub struct AffineBoundary {
    pub left: f64,
    pub right: f64,
}

impl AffineBoundary {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        check_open_unit(left)?;
        check_open_unit(right)?;
        Ok(AffineBoundary { left, right })
    }

    /// Value of the affine interpolation `left + (right − left)(u1 + 1)/2`.
    pub fn interpolate(&self, u1: f64) -> f64 {
        self.left + (self.right - self.left) * (u1 + 1.0) / 2.0
    }
}

impl BoundaryProfile for AffineBoundary {
    fn value(&self, side: Side, _: &[f64]) -> f64 {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }
}

type BoundaryFn = dyn Fn(Side, &[f64]) -> f64 + Send + Sync;

/// Arbitrary boundary profile given by a closure; validated where evaluated.
#[derive(Clone)]
pub struct FnBoundary(Arc<BoundaryFn>);

impl FnBoundary {
    pub fn new(f: impl Fn(Side, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FnBoundary(Arc::new(f))
    }
}

impl Debug for FnBoundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("FnBoundary")
    }
}

impl BoundaryProfile for FnBoundary {
    fn value(&self, side: Side, transverse: &[f64]) -> f64 {
        (self.0)(side, transverse)
    }
}

pub(crate) fn check_open_unit(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        domain(format!("boundary density {c} must lie strictly inside (0, 1)"))
    }
}
