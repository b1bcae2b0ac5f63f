use super::grid::{FaceField, Grid, GridFunction};
use crate::error::{domain, Error, Result};

/// Time-discretised pair `(W_t, ρ_t)` on a common grid, with `W_0 = 0`.
#[derive(Clone, Debug)]
pub struct PathPair {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub rho: Vec<GridFunction>,
    pub current: Vec<FaceField>,
    /// Initial profile `γ`.
    pub gamma: GridFunction,
    /// Time step of the scheme that produced the path (observation spacing otherwise).
    pub scheme_dt: f64,
    /// Scaling parameter when the path comes from the particle system.
    pub lattice_n: Option<usize>,
}

impl PathPair {
    pub fn new(times: Vec<f64>, rho: Vec<GridFunction>, current: Vec<FaceField>, gamma: GridFunction) -> Result<Self> {
        if times.is_empty() || times.len() != rho.len() || times.len() != current.len() {
            return Err(Error::GridMismatch("times, densities and currents must have equal positive length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return domain("path times must be strictly increasing");
        }
        let grid = gamma.grid.clone();
        for r in &rho {
            grid.check_same(&r.grid)?;
        }
        for w in &current {
            grid.check_same(&w.grid)?;
        }
        let scheme_dt = if times.len() > 1 {
            (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64
        } else {
            0.0
        };
        Ok(PathPair {
            grid,
            times,
            rho,
            current,
            gamma,
            scheme_dt,
            lattice_n: None,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("non-empty path")
    }

    /// Trapezoidal weights on the observation grid.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.times)
    }

    /// Mesh-dependent tolerance scale `h² + Δτ (+ 1/N)`.
    pub fn discretisation_scale(&self) -> f64 {
        let h = self.grid.spacings().iter().fold(0.0f64, |m, &h| m.max(h));
        h * h + self.scheme_dt + self.lattice_n.map_or(0.0, |n| 1.0 / n as f64)
    }

    /// Time derivative of cell values by centred differences, one-sided at the ends.
    pub fn rho_rate(&self) -> Vec<Vec<f64>> {
        time_derivative(&self.times, |k| &self.rho[k].values)
    }

    /// Time derivative of the current, per component.
    pub fn current_rate(&self) -> Vec<FaceField> {
        let dim = self.grid.dim();
        let per_comp: Vec<Vec<Vec<f64>>> = (0..dim)
            .map(|c| time_derivative(&self.times, |k| &self.current[k].comps[c]))
            .collect();
        (0..self.len())
            .map(|k| FaceField {
                grid: self.grid.clone(),
                comps: (0..dim).map(|c| per_comp[c][k].clone()).collect(),
            })
            .collect()
    }
}

pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for k in 1..n {
        let dt = times[k] - times[k - 1];
        w[k - 1] += 0.5 * dt;
        w[k] += 0.5 * dt;
    }
    w
}

pub(crate) fn time_derivative<'a, F>(times: &[f64], series: F) -> Vec<Vec<f64>>
where
    F: Fn(usize) -> &'a [f64],
{
    let n = times.len();
    if n < 2 {
        return (0..n).map(|k| vec![0.0; series(k).len()]).collect();
    }
    (0..n)
        .map(|k| {
            let (a, b) = if k == 0 {
                (0, 1)
            } else if k == n - 1 {
                (n - 2, n - 1)
            } else {
                (k - 1, k + 1)
            };
            let dt = times[b] - times[a];
            series(b).iter().zip(series(a)).map(|(p, q)| (p - q) / dt).collect()
        })
        .collect()
}
