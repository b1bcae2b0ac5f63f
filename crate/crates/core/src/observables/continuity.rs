use std::sync::Arc;

use super::measures::{CurrentMeasure, DensityMeasure};
use crate::dynamics::Trajectory;
use crate::error::{domain, Error, Result};
use crate::hydrodynamics::{trapezoid_weights, PathPair};
use crate::numerics::gauss_legendre;

/// Time-independent scalar test function with its gradient.
pub trait SpatialTest: Send + Sync {
    fn value(&self, u: &[f64]) -> f64;

    fn gradient(&self, u: &[f64], k: usize) -> f64 {
        let h = 1e-6;
        let mut p = u.to_vec();
        p[k] = u[k] + h;
        let up = self.value(&p);
        p[k] = u[k] - h;
        (up - self.value(&p)) / (2.0 * h)
    }
}

/// Closure-backed [`SpatialTest`] with an optional analytic gradient.
#[derive(Clone)]
pub struct FnSpatial {
    value: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    gradient: Option<Arc<dyn Fn(&[f64], usize) -> f64 + Send + Sync>>,
}

impl FnSpatial {
    pub fn new(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FnSpatial {
            value: Arc::new(f),
            gradient: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64], usize) -> f64 + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }
}

impl SpatialTest for FnSpatial {
    fn value(&self, u: &[f64]) -> f64 {
        (self.value)(u)
    }

    fn gradient(&self, u: &[f64], k: usize) -> f64 {
        match &self.gradient {
            Some(g) => g(u, k),
            None => {
                let h = 1e-6;
                let mut p = u.to_vec();
                p[k] = u[k] + h;
                let up = (self.value)(&p);
                p[k] = u[k] - h;
                (up - (self.value)(&p)) / (2.0 * h)
            }
        }
    }
}

/// Density and current measures on a common time grid.
#[derive(Clone, Debug)]
pub struct MeasurePath {
    pub times: Vec<f64>,
    pub density: Vec<DensityMeasure>,
    pub current: Vec<CurrentMeasure>,
}

impl MeasurePath {
    pub fn from_trajectory(traj: &Trajectory) -> Result<Self> {
        let geom = traj.initial.geometry();
        let mut out = MeasurePath {
            times: Vec::with_capacity(traj.snapshots.len()),
            density: Vec::with_capacity(traj.snapshots.len()),
            current: Vec::with_capacity(traj.snapshots.len()),
        };
        for s in &traj.snapshots {
            out.times.push(s.time);
            out.density.push(DensityMeasure::from_occupancy(geom, &s.occupancy)?);
            out.current.push(super::measures::empirical_current(&s.ledger, geom)?);
        }
        Ok(out)
    }

    /// Projects every snapshot onto `grid`, giving a discrete pair with
    /// `γ = π_0` and the lattice scale recorded.
    pub fn to_path_pair(&self, grid: &crate::hydrodynamics::Grid) -> Result<PathPair> {
        let rho = self.density.iter().map(|p| p.project(grid)).collect::<Result<Vec<_>>>()?;
        let current = self.current.iter().map(|w| w.project(grid)).collect::<Result<Vec<_>>>()?;
        let gamma = rho.first().cloned().ok_or_else(|| Error::Domain("empty measure path".into()))?;
        let mut pair = PathPair::new(self.times.clone(), rho, current, gamma)?;
        pair.lattice_n = self.density.first().map(|p| p.geometry().n());
        Ok(pair)
    }
}

/// Initial datum for the continuity functional.
pub enum InitialProfile<'a> {
    Measure(&'a DensityMeasure),
    Density(&'a dyn Fn(&[f64]) -> f64),
}

impl InitialProfile<'_> {
    /// `⟨γ, G⟩`; a density is integrated by tensor Gauss–Legendre quadrature.
    pub fn pair(&self, d: usize, g: &dyn SpatialTest) -> f64 {
        match self {
            InitialProfile::Measure(m) => m.pair(|u| g.value(u)),
            InitialProfile::Density(f) => {
                let (x, w) = gauss_legendre(24);
                let total = x.len().pow(d as u32);
                let mut s = 0.0;
                let mut u = vec![0.0; d];
                for mut r in 0..total {
                    let mut weight = 1.0;
                    for (k, uk) in u.iter_mut().enumerate() {
                        let i = r % x.len();
                        r /= x.len();
                        if k == 0 {
                            *uk = x[i];
                            weight *= w[i];
                        } else {
                            *uk = 0.5 * (x[i] + 1.0);
                            weight *= 0.5 * w[i];
                        }
                    }
                    s += weight * f(&u) * g.value(&u);
                }
                s
            }
        }
    }
}

/// `𝕍_{(G,φ)}^{t,γ}(W, π)` at the last time of `path`, by trapezoid in time.
pub fn continuity_residual(
    path: &MeasurePath,
    gamma: &InitialProfile<'_>,
    g: &dyn SpatialTest,
    phi: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    let n = path.times.len();
    if n == 0 || path.density.len() != n || path.current.len() != n {
        return Err(Error::GridMismatch("density and current paths must share the time grid".into()));
    }
    if path.times.windows(2).any(|w| w[1] <= w[0]) {
        return domain("times must be strictly increasing");
    }
    let d = path.density[0].geometry().dim();
    let dphi = |t: f64| {
        let h = 1e-6;
        (phi(t + h) - phi(t - h)) / (2.0 * h)
    };
    let dens: Vec<f64> = path.density.iter().map(|p| p.pair(|u| g.value(u))).collect();
    let curr: Vec<f64> = path.current.iter().map(|w| w.pair(|k, u| g.gradient(u, k))).collect();
    let weights = trapezoid_weights(&path.times);
    let (t0, t) = (path.times[0], path.times[n - 1]);
    let mut v = dens[n - 1] * phi(t) - gamma.pair(d, g) * phi(t0) - curr[n - 1] * phi(t);
    for k in 0..n {
        v += weights[k] * dphi(path.times[k]) * (curr[k] - dens[k]);
    }
    Ok(v)
}
