use std::sync::Arc;

use super::path::PathPair;
use super::solver::HydroSolver;
use crate::error::{domain, Result};
use crate::mobility;

const FD_FIRST: f64 = 1e-5;
const FD_SECOND: f64 = 1e-4;

/// Smooth space-time test function. Derivatives default to centred
/// finite differences.
pub trait TestFunction: Send + Sync {
    fn value(&self, t: f64, u: &[f64]) -> f64;

    fn time_derivative(&self, t: f64, u: &[f64]) -> f64 {
        (self.value(t + FD_FIRST, u) - self.value(t - FD_FIRST, u)) / (2.0 * FD_FIRST)
    }

    fn gradient(&self, t: f64, u: &[f64], k: usize) -> f64 {
        let mut p = u.to_vec();
        p[k] = u[k] + FD_FIRST;
        let up = self.value(t, &p);
        p[k] = u[k] - FD_FIRST;
        (up - self.value(t, &p)) / (2.0 * FD_FIRST)
    }

    fn laplacian(&self, t: f64, u: &[f64]) -> f64 {
        let mid = self.value(t, u);
        let mut p = u.to_vec();
        let mut s = 0.0;
        for k in 0..u.len() {
            p[k] = u[k] + FD_SECOND;
            let up = self.value(t, &p);
            p[k] = u[k] - FD_SECOND;
            let down = self.value(t, &p);
            p[k] = u[k];
            s += (up - 2.0 * mid + down) / (FD_SECOND * FD_SECOND);
        }
        s
    }
}

/// Closure-backed [`TestFunction`].
#[derive(Clone)]
pub struct FnTest(pub Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>);

impl FnTest {
    pub fn new(f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FnTest(Arc::new(f))
    }
}

impl TestFunction for FnTest {
    fn value(&self, t: f64, u: &[f64]) -> f64 {
        (self.0)(t, u)
    }
}

/// `ℓ_F(ρ | γ)`: terminal and initial pairings, time-derivative, Laplacian,
/// boundary and drift terms, by trapezoid in time and midpoint in space.
///
/// When the solver carries a tilt, the drift term includes `σ V · ∇F`.
pub fn weak_form_residual(path: &PathPair, solver: &HydroSolver, f: &dyn TestFunction) -> Result<f64> {
    let g = &path.grid;
    g.check_same(solver.grid())?;
    let (mt, dim) = (g.transverse_count(), g.dim());
    let beta = solver.config().beta;
    let tilt = solver.config().tilt.clone();
    let area = g.transverse_area();
    for &t in &path.times {
        for j in 0..mt {
            let tp = g.transverse_center(j);
            for u1 in [-1.0, 1.0] {
                let mut u = vec![u1];
                u.extend(&tp);
                let v = f.value(t, &u);
                if v.abs() > 1e-12 {
                    return domain(format!("test function does not vanish on the boundary: F({t}, {u:?}) = {v}"));
                }
            }
        }
    }
    let centres: Vec<Vec<f64>> = (0..g.cell_count()).map(|c| g.cell_center(c)).collect();
    let vol = g.cell_volume();
    let pairing = |values: &[f64], t: f64| -> f64 {
        values.iter().zip(&centres).map(|(r, u)| r * f.value(t, u)).sum::<f64>() * vol
    };
    let n = path.len();
    let t_end = path.t_end();
    let mut total = pairing(&path.rho[n - 1].values, t_end) - pairing(&path.gamma.values, path.times[0]);
    let weights = path.trapezoid_weights();
    for (k, &t) in path.times.iter().enumerate() {
        let rho = &path.rho[k].values;
        let mut bulk = 0.0;
        let drift = (beta != 0.0).then(|| solver.potential_gradient(rho));
        for (c, u) in centres.iter().enumerate() {
            bulk += rho[c] * (f.time_derivative(t, u) + f.laplacian(t, u));
            let mut push = 0.0;
            if let Some(dphi) = &drift {
                let (i1, j) = g.split(c);
                let g1 = 0.5 * (dphi.comps[0][i1 * mt + j] + dphi.comps[0][(i1 + 1) * mt + j]);
                push += beta * g1 * f.gradient(t, u, 0);
            }
            if let Some(v) = &tilt {
                for i in 0..dim {
                    push += v.v(t, u, i) * f.gradient(t, u, i);
                }
            }
            bulk += mobility(rho[c]) * push;
        }
        let mut surface = 0.0;
        for j in 0..mt {
            let tp = g.transverse_center(j);
            let mut ul = vec![-1.0];
            ul.extend(&tp);
            let mut ur = vec![1.0];
            ur.extend(&tp);
            surface += solver.right_values()[j] * f.gradient(t, &ur, 0) - solver.left_values()[j] * f.gradient(t, &ul, 0);
        }
        total += weights[k] * (-bulk * vol + surface * area);
    }
    Ok(total)
}
