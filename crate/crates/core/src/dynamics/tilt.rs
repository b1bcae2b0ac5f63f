use std::fmt::Debug;
use std::sync::Arc;

use crate::lattice_gas::Side;

/// Perturbation pair `(V, H)`: a vector field on `[0,T] × Λ̄` and a scalar on
/// `[0,T] × Γ`.
pub trait TiltFields: Send + Sync + Debug {
    /// Component `dir` (zero-based) of `V(t, u)`.
    fn v(&self, t: f64, u: &[f64], dir: usize) -> f64;

    /// `H(t, u)` on the boundary side `side`.
    fn h(&self, t: f64, side: Side, transverse: &[f64]) -> f64;

    /// Upper bound on `|V_i|` over all times, points and components.
    fn v_sup(&self) -> f64;

    /// Upper bound on `|H|`.
    fn h_sup(&self) -> f64;

    fn time_dependent(&self) -> bool {
        true
    }

    fn is_zero(&self) -> bool {
        false
    }
}

/// `V ≡ 0, H ≡ 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoTilt;

impl TiltFields for NoTilt {
    fn v(&self, _: f64, _: &[f64], _: usize) -> f64 {
        0.0
    }
    fn h(&self, _: f64, _: Side, _: &[f64]) -> f64 {
        0.0
    }
    fn v_sup(&self) -> f64 {
        0.0
    }
    fn h_sup(&self) -> f64 {
        0.0
    }
    fn time_dependent(&self) -> bool {
        false
    }
    fn is_zero(&self) -> bool {
        true
    }
}

/// Spatially and temporally constant tilt.
#[derive(Clone, Debug)]
pub struct ConstantTilt {
    pub v: Vec<f64>,
    pub h_left: f64,
    pub h_right: f64,
}

impl ConstantTilt {
    pub fn new(v: Vec<f64>, h: f64) -> Self {
        ConstantTilt {
            v,
            h_left: h,
            h_right: h,
        }
    }
}

impl TiltFields for ConstantTilt {
    fn v(&self, _: f64, _: &[f64], dir: usize) -> f64 {
        self.v.get(dir).copied().unwrap_or(0.0)
    }
    fn h(&self, _: f64, side: Side, _: &[f64]) -> f64 {
        match side {
            Side::Left => self.h_left,
            Side::Right => self.h_right,
        }
    }
    fn v_sup(&self) -> f64 {
        self.v.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    fn h_sup(&self) -> f64 {
        self.h_left.abs().max(self.h_right.abs())
    }
    fn time_dependent(&self) -> bool {
        false
    }
    fn is_zero(&self) -> bool {
        self.v.iter().all(|&v| v == 0.0) && self.h_left == 0.0 && self.h_right == 0.0
    }
}

type VFn = dyn Fn(f64, &[f64], usize) -> f64 + Send + Sync;
type HFn = dyn Fn(f64, Side, &[f64]) -> f64 + Send + Sync;

/// Tilt given by closures together with declared sup-norm bounds.
///
/// The bounds feed the rejection sampler; an underestimate is detected at
/// run time and reported as an error.
#[derive(Clone)]
pub struct FnTilt {
    v: Arc<VFn>,
    h: Arc<HFn>,
    v_sup: f64,
    h_sup: f64,
    time_dependent: bool,
}

impl FnTilt {
    pub fn new(
        v: impl Fn(f64, &[f64], usize) -> f64 + Send + Sync + 'static,
        v_sup: f64,
        h: impl Fn(f64, Side, &[f64]) -> f64 + Send + Sync + 'static,
        h_sup: f64,
        time_dependent: bool,
    ) -> Self {
        FnTilt {
            v: Arc::new(v),
            h: Arc::new(h),
            v_sup,
            h_sup,
            time_dependent,
        }
    }
}

impl Debug for FnTilt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnTilt")
            .field("v_sup", &self.v_sup)
            .field("h_sup", &self.h_sup)
            .field("time_dependent", &self.time_dependent)
            .finish()
    }
}

impl TiltFields for FnTilt {
    fn v(&self, t: f64, u: &[f64], dir: usize) -> f64 {
        (self.v)(t, u, dir)
    }
    fn h(&self, t: f64, side: Side, transverse: &[f64]) -> f64 {
        (self.h)(t, side, transverse)
    }
    fn v_sup(&self) -> f64 {
        self.v_sup
    }
    fn h_sup(&self) -> f64 {
        self.h_sup
    }
    fn time_dependent(&self) -> bool {
        self.time_dependent
    }
}
