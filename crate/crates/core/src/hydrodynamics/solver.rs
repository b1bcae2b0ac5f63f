use std::sync::Arc;

use super::convolution::Convolver;
use super::grid::{FaceField, Grid, GridFunction};
use super::path::PathPair;
use crate::dynamics::{BoundaryProfile, TiltFields};
use crate::error::{domain, Error, Result};
use crate::lattice_gas::{KacKernel, Side};
use crate::mobility;

const RANGE_SLACK: f64 = 1e-12;

/// Parameters of the finite-volume solver.
#[derive(Clone, Debug)]
pub struct PdeConfig {
    pub beta: f64,
    pub boundary: Arc<dyn BoundaryProfile>,
    pub grid: Grid,
    pub kernel: KacKernel,
    pub tilt: Option<Arc<dyn TiltFields>>,
    pub t_end: f64,
    /// Number of equal observation intervals on `[0, T]`.
    pub observations: usize,
    /// Explicit time step; chosen from the stability bound when absent.
    pub dt: Option<f64>,
    /// Fraction of the stability bound used when `dt` is absent.
    pub cfl_safety: f64,
    pub stationary_tol: f64,
    pub max_steps: usize,
}

impl PdeConfig {
    pub fn new(beta: f64, boundary: Arc<dyn BoundaryProfile>, grid: Grid) -> Self {
        PdeConfig {
            beta,
            boundary,
            grid,
            kernel: KacKernel::default(),
            tilt: None,
            t_end: 1.0,
            observations: 200,
            dt: None,
            cfl_safety: 0.9,
            stationary_tol: 1e-8,
            max_steps: 50_000_000,
        }
    }

    pub fn with_tilt(mut self, tilt: Arc<dyn TiltFields>) -> Self {
        self.tilt = Some(tilt);
        self
    }

    pub fn with_horizon(mut self, t_end: f64, observations: usize) -> Self {
        self.t_end = t_end;
        self.observations = observations;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }
}

/// Output of [`evolve`].
#[derive(Clone, Debug)]
pub struct Evolution {
    pub path: PathPair,
    pub dt: f64,
    pub steps: usize,
    pub stability_bound: f64,
}

/// Output of [`stationary_profile`].
#[derive(Clone, Debug)]
pub struct Stationary {
    pub profile: GridFunction,
    pub residual: f64,
    pub steps: usize,
    pub history: Vec<f64>,
}

/// Precomputed state for repeated current evaluations on one grid.
#[derive(Clone, Debug)]
pub struct HydroSolver {
    cfg: PdeConfig,
    conv: Convolver,
    left: Vec<f64>,
    right: Vec<f64>,
    static_tilt: Option<FaceField>,
}

impl HydroSolver {
    pub fn new(cfg: PdeConfig) -> Result<Self> {
        if !(cfg.beta >= 0.0 && cfg.beta.is_finite()) {
            return domain("β must be a non-negative finite number");
        }
        if !(cfg.t_end >= 0.0 && cfg.t_end.is_finite()) {
            return domain("terminal time must be non-negative");
        }
        if cfg.observations == 0 {
            return domain("at least one observation interval is required");
        }
        if !(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0) {
            return domain("CFL safety factor must lie in (0, 1]");
        }
        let g = &cfg.grid;
        let mt = g.transverse_count();
        let mut left = Vec::with_capacity(mt);
        let mut right = Vec::with_capacity(mt);
        for j in 0..mt {
            let tp = g.transverse_center(j);
            for (side, out) in [(Side::Left, &mut left), (Side::Right, &mut right)] {
                let b = cfg.boundary.value(side, &tp);
                if !(0.0..=1.0).contains(&b) {
                    return domain(format!("boundary value {b} outside [0, 1]"));
                }
                out.push(b);
            }
        }
        let static_tilt = match &cfg.tilt {
            Some(t) if !t.time_dependent() => Some(tilt_faces(g, t.as_ref(), 0.0)),
            _ => None,
        };
        let conv = Convolver::new(g, &cfg.kernel);
        Ok(HydroSolver {
            cfg,
            conv,
            left,
            right,
            static_tilt,
        })
    }

    pub fn config(&self) -> &PdeConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Grid {
        &self.cfg.grid
    }

    pub fn convolver(&self) -> &Convolver {
        &self.conv
    }

    /// Dirichlet data at `u1 = −1`, per transverse cell.
    pub fn left_values(&self) -> &[f64] {
        &self.left
    }

    pub fn right_values(&self) -> &[f64] {
        &self.right
    }

    /// `C_J`, the discrete Lipschitz constant of `J ⋆ ρ` over `0 ≤ ρ ≤ 1`.
    pub fn kernel_lipschitz(&self) -> f64 {
        self.conv.lipschitz_constant()
    }

    /// Largest stable explicit step,
    /// `1 / [(3/h1² + 2 Σ_{k≥2} 1/h_k²)(1 + β C_J + ‖V‖∞)]`.
    pub fn stability_bound(&self) -> f64 {
        let g = &self.cfg.grid;
        let h1 = g.h(0);
        let mut lap = 3.0 / (h1 * h1);
        for k in 1..g.dim() {
            lap += 2.0 / (g.h(k) * g.h(k));
        }
        let vsup = self.cfg.tilt.as_ref().map_or(0.0, |t| t.v_sup());
        1.0 / (lap * (1.0 + self.cfg.beta * self.kernel_lipschitz() + vsup))
    }

    fn tilt_at(&self, t: f64) -> Option<FaceField> {
        match (&self.static_tilt, &self.cfg.tilt) {
            (Some(v), _) => Some(v.clone()),
            (None, Some(tilt)) if !tilt.is_zero() => Some(tilt_faces(&self.cfg.grid, tilt.as_ref(), t)),
            _ => None,
        }
    }

    /// Face gradient `∇_h ρ` with the Dirichlet data at the two ends.
    pub fn density_gradient(&self, rho: &[f64]) -> FaceField {
        self.cfg.grid.face_gradient(rho, &self.left, &self.right)
    }

    /// Face mobility: arithmetic mean of `σ` on interior faces, `σ(b)` at the ends.
    pub fn face_mobility(&self, rho: &[f64]) -> FaceField {
        let g = &self.cfg.grid;
        let (m1, mt) = (g.m1(), g.transverse_count());
        let mut out = FaceField::zeros(g.clone());
        let c0 = &mut out.comps[0];
        for j in 0..mt {
            c0[j] = mobility(self.left[j]);
            for f1 in 1..m1 {
                c0[f1 * mt + j] = 0.5 * (mobility(rho[g.cell(f1 - 1, j)]) + mobility(rho[g.cell(f1, j)]));
            }
            c0[m1 * mt + j] = mobility(self.right[j]);
        }
        for k in 1..g.dim() {
            for c in 0..g.cell_count() {
                let (i1, j) = g.split(c);
                let up = g.cell(i1, g.transverse_shift(j, k, 1));
                out.comps[k][c] = 0.5 * (mobility(rho[c]) + mobility(rho[up]));
            }
        }
        out
    }

    /// Face gradient of `J ⋆ ρ`; transverse components vanish.
    pub fn potential_gradient(&self, rho: &[f64]) -> FaceField {
        let g = &self.cfg.grid;
        let mt = g.transverse_count();
        let col = column_means(g, rho);
        let g1 = self.conv.face_gradient(&col);
        let mut out = FaceField::zeros(g.clone());
        for (f1, v) in g1.iter().enumerate() {
            out.comps[0][f1 * mt..(f1 + 1) * mt].iter_mut().for_each(|x| *x = *v);
        }
        out
    }

    /// Staggered drift `β ∇(J ⋆ ρ) + V(t)` without the mobility factor.
    pub fn drift(&self, rho: &[f64], t: f64) -> FaceField {
        let mut drift = if self.cfg.beta != 0.0 {
            self.potential_gradient(rho).scaled(self.cfg.beta)
        } else {
            FaceField::zeros(self.cfg.grid.clone())
        };
        if let Some(v) = self.tilt_at(t) {
            drift.axpy(1.0, &v);
        }
        drift
    }

    /// `−∇ρ + σ(ρ)[β∇(J⋆ρ) + V(t)]` at faces.
    pub fn current(&self, rho: &[f64], t: f64) -> FaceField {
        let mut j = self.density_gradient(rho).scaled(-1.0);
        let drift_free = self.cfg.beta == 0.0 && self.tilt_at(t).is_none();
        if drift_free {
            return j;
        }
        let sigma = self.face_mobility(rho);
        let drift = self.drift(rho, t);
        for k in 0..j.comps.len() {
            for f in 0..j.comps[k].len() {
                j.comps[k][f] += sigma.comps[k][f] * drift.comps[k][f];
            }
        }
        j
    }

    fn check_density(&self, rho: &GridFunction) -> Result<()> {
        self.cfg.grid.check_same(&rho.grid)?;
        if let Some(v) = rho.values.iter().find(|v| !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(*v)) {
            return domain(format!("density value {v} outside [0, 1]"));
        }
        Ok(())
    }

    fn step_size(&self, interval: f64) -> Result<(f64, usize)> {
        let bound = self.stability_bound();
        if interval == 0.0 {
            return Ok((self.cfg.dt.unwrap_or(self.cfg.cfl_safety * bound), 0));
        }
        match self.cfg.dt {
            Some(dt) => {
                if !(dt > 0.0) {
                    return domain("time step must be positive");
                }
                if dt > bound {
                    return Err(Error::Stability { dt, bound });
                }
                let k = (interval / dt).round().max(1.0);
                if ((k * dt - interval) / interval).abs() > 1e-9 {
                    return domain(format!("time step {dt} does not divide the observation spacing {interval}"));
                }
                Ok((interval / k, k as usize))
            }
            None => {
                let k = (interval / (self.cfg.cfl_safety * bound)).ceil().max(1.0);
                Ok((interval / k, k as usize))
            }
        }
    }

    fn range(&self, rho0: &GridFunction) -> (f64, f64) {
        let drift_free = self.cfg.beta == 0.0 && self.cfg.tilt.as_ref().is_none_or(|t| t.is_zero());
        if drift_free {
            let lo = rho0.min().min(self.left.iter().chain(&self.right).copied().fold(f64::INFINITY, f64::min));
            let hi = rho0.max().max(self.left.iter().chain(&self.right).copied().fold(f64::NEG_INFINITY, f64::max));
            (lo - RANGE_SLACK, hi + RANGE_SLACK)
        } else {
            (-RANGE_SLACK, 1.0 + RANGE_SLACK)
        }
    }

    /// Explicit conservative stepping from `ρ0` over `[0, T]`.
    pub fn evolve(&self, rho0: &GridFunction) -> Result<Evolution> {
        self.check_density(rho0)?;
        let cfg = &self.cfg;
        let g = &cfg.grid;
        let interval = cfg.t_end / cfg.observations as f64;
        let (dt, per_obs) = self.step_size(interval)?;
        let (lo, hi) = self.range(rho0);
        let mut rho = rho0.values.clone();
        let mut w = FaceField::zeros(g.clone());
        let mut times = vec![0.0];
        let mut rhos = vec![rho0.clone()];
        let mut currents = vec![w.clone()];
        let mut steps = 0usize;
        let n_obs = if cfg.t_end == 0.0 { 0 } else { cfg.observations };
        for obs in 0..n_obs {
            let t0 = obs as f64 * interval;
            for s in 0..per_obs {
                let t = t0 + s as f64 * dt;
                let j = self.current(&rho, t);
                w.axpy(dt, &j);
                let div = g.divergence(&j);
                for (r, dv) in rho.iter_mut().zip(&div) {
                    *r -= dt * dv;
                }
                steps += 1;
                if let Some(&v) = rho.iter().find(|v| !(lo..=hi).contains(*v)) {
                    return Err(Error::MaxPrinciple { step: steps, value: v, lo, hi });
                }
            }
            times.push((obs + 1) as f64 * interval);
            rhos.push(GridFunction::new(g.clone(), rho.clone())?);
            currents.push(w.clone());
        }
        let mut path = PathPair::new(times, rhos, currents, rho0.clone())?;
        path.scheme_dt = dt;
        Ok(Evolution {
            path,
            dt,
            steps,
            stability_bound: self.stability_bound(),
        })
    }

    /// `sup |div_h J_h(ρ)|`, the residual of the stationary equation.
    pub fn stationary_residual(&self, rho: &[f64]) -> f64 {
        let j = self.current(rho, 0.0);
        self.cfg.grid.divergence(&j).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Affine interpolation of the Dirichlet data in `u1`.
    pub fn affine_guess(&self) -> GridFunction {
        let g = &self.cfg.grid;
        let values = (0..g.cell_count())
            .map(|c| {
                let (i1, j) = g.split(c);
                let s = (g.u1_center(i1) + 1.0) / 2.0;
                self.left[j] + (self.right[j] - self.left[j]) * s
            })
            .collect();
        GridFunction { grid: g.clone(), values }
    }

    /// Marches the time-independent equation until the residual drops below
    /// the configured tolerance.
    pub fn stationary(&self, initial: Option<&GridFunction>) -> Result<Stationary> {
        let g = &self.cfg.grid;
        let start = match initial {
            Some(r) => {
                self.check_density(r)?;
                r.clone()
            }
            None => self.affine_guess(),
        };
        let dt = self.cfg.cfl_safety * self.stability_bound();
        let mut rho = start.values;
        let check_every = 50;
        let mut history = Vec::new();
        let mut steps = 0usize;
        loop {
            let j = self.current(&rho, 0.0);
            let div = g.divergence(&j);
            if steps % check_every == 0 {
                let res = div.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                history.push(res);
                if res < self.cfg.stationary_tol {
                    return Ok(Stationary {
                        profile: GridFunction::new(g.clone(), rho)?,
                        residual: res,
                        steps,
                        history,
                    });
                }
                if !res.is_finite() || steps >= self.cfg.max_steps {
                    return Err(Error::NonConvergence { steps, last: res, history });
                }
            }
            for (r, dv) in rho.iter_mut().zip(&div) {
                *r -= dt * dv;
            }
            steps += 1;
            if let Some(&v) = rho.iter().find(|v| !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(*v)) {
                return Err(Error::MaxPrinciple { step: steps, value: v, lo: 0.0, hi: 1.0 });
            }
        }
    }
}

fn column_means(g: &Grid, values: &[f64]) -> Vec<f64> {
    let mt = g.transverse_count();
    values.chunks(mt).map(|c| c.iter().sum::<f64>() / mt as f64).collect()
}

fn tilt_faces(g: &Grid, tilt: &dyn TiltFields, t: f64) -> FaceField {
    FaceField::from_fn(g.clone(), |k, u| tilt.v(t, u, k))
}

/// Instantaneous current of `ρ` at time `t` for the given configuration.
pub fn instantaneous_current(rho: &GridFunction, cfg: &PdeConfig, t: f64) -> Result<FaceField> {
    let solver = HydroSolver::new(PdeConfig {
        grid: rho.grid.clone(),
        ..cfg.clone()
    })?;
    solver.check_density(rho)?;
    Ok(solver.current(&rho.values, t))
}

pub fn evolve(rho0: &GridFunction, cfg: &PdeConfig) -> Result<Evolution> {
    HydroSolver::new(cfg.clone())?.evolve(rho0)
}

pub fn stationary_profile(cfg: &PdeConfig) -> Result<Stationary> {
    HydroSolver::new(cfg.clone())?.stationary(None)
}
