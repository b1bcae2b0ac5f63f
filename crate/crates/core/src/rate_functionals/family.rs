use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::numerics::legendre_all;

/// Profile in the confined direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfinedBasis {
    /// `P_i(u1)`.
    Legendre,
    /// `(1 − u1²) P_i(u1)`, vanishing on `Γ`.
    BoundaryVanishing,
}

/// Tensor-product space-time family: Legendre polynomials up to `degree` in
/// `u1`, trigonometric modes up to `modes` in each transverse direction and
/// Legendre polynomials up to `time_degree` in `t ∈ [0, T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFamily {
    pub dim: usize,
    pub degree: usize,
    pub modes: usize,
    pub time_degree: usize,
    pub t_end: f64,
    pub kind: ConfinedBasis,
}

impl TestFamily {
    pub fn new(dim: usize, degree: usize, modes: usize, time_degree: usize, t_end: f64, kind: ConfinedBasis) -> Result<Self> {
        if dim == 0 {
            return domain("dimension must be at least 1");
        }
        if !(t_end > 0.0) {
            return domain("family needs a positive horizon");
        }
        Ok(TestFamily {
            dim,
            degree,
            modes,
            time_degree,
            t_end,
            kind,
        })
    }

    fn transverse_per_dir(&self) -> usize {
        2 * self.modes + 1
    }

    pub fn len(&self) -> usize {
        (self.degree + 1) * self.transverse_per_dir().pow(self.dim as u32 - 1) * (self.time_degree + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All basis values at `(t, u)`, in a fixed order.
    pub fn values(&self, t: f64, u: &[f64]) -> Vec<f64> {
        let mut p1 = legendre_all(self.degree, u[0]);
        if self.kind == ConfinedBasis::BoundaryVanishing {
            let w = 1.0 - u[0] * u[0];
            p1.iter_mut().for_each(|v| *v *= w);
        }
        let pt = legendre_all(self.time_degree, 2.0 * t / self.t_end - 1.0);
        let mut trans = vec![1.0];
        for &x in &u[1..] {
            let modes: Vec<f64> = std::iter::once(1.0)
                .chain((1..=self.modes).flat_map(|m| {
                    let a = 2.0 * PI * m as f64 * x;
                    [a.cos(), a.sin()]
                }))
                .collect();
            trans = trans.iter().flat_map(|&a| modes.iter().map(move |&b| a * b)).collect();
        }
        let mut out = Vec::with_capacity(self.len());
        for a in &p1 {
            for b in &trans {
                for c in &pt {
                    out.push(a * b * c);
                }
            }
        }
        out
    }
}

/// Fixed family of time-independent functions vanishing on `Γ` used by the
/// continuity gate: `sin(mπ(u1+1)/2)` times transverse modes.
#[derive(Clone, Debug, PartialEq)]
pub struct GateFamily {
    pub dim: usize,
    pub size: usize,
}

impl GateFamily {
    pub fn new(dim: usize, size: usize) -> Self {
        GateFamily { dim, size }
    }

    /// Value of member `i` at `u`; every member has sup norm at most one.
    pub fn value(&self, i: usize, u: &[f64]) -> f64 {
        if self.dim == 1 {
            return ((i + 1) as f64 * PI * (u[0] + 1.0) / 2.0).sin();
        }
        // Five transverse shapes in the second coordinate, cycled.
        let m = i / 5 + 1;
        let s = (m as f64 * PI * (u[0] + 1.0) / 2.0).sin();
        let x = u[1];
        let t = match i % 5 {
            0 => 1.0,
            1 => (2.0 * PI * x).cos(),
            2 => (2.0 * PI * x).sin(),
            3 => (4.0 * PI * x).cos(),
            _ => (4.0 * PI * x).sin(),
        };
        s * t
    }
}

/// Smooth space-time vector field.
pub trait VectorField: Send + Sync {
    /// Component `k` (zero-based) at `(t, u)`.
    fn value(&self, t: f64, u: &[f64], k: usize) -> f64;

    fn time_derivative(&self, t: f64, u: &[f64], k: usize) -> f64 {
        let h = 1e-5;
        (self.value(t + h, u, k) - self.value(t - h, u, k)) / (2.0 * h)
    }
}

/// Closure-backed [`VectorField`].
#[derive(Clone)]
pub struct FnVector(pub Arc<dyn Fn(f64, &[f64], usize) -> f64 + Send + Sync>);

impl FnVector {
    pub fn new(f: impl Fn(f64, &[f64], usize) -> f64 + Send + Sync + 'static) -> Self {
        FnVector(Arc::new(f))
    }
}

impl VectorField for FnVector {
    fn value(&self, t: f64, u: &[f64], k: usize) -> f64 {
        (self.0)(t, u, k)
    }
}

/// Constant vector field.
#[derive(Clone, Debug)]
pub struct ConstantVector(pub Vec<f64>);

impl VectorField for ConstantVector {
    fn value(&self, _: f64, _: &[f64], k: usize) -> f64 {
        self.0[k]
    }

    fn time_derivative(&self, _: f64, _: &[f64], _: usize) -> f64 {
        0.0
    }
}
