use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use anyhow::{anyhow, Result};
use kac_kawasaki::dynamics::{Dynamics, SimulationOptions, TiltFields, Trajectory};
use kac_kawasaki::hydrodynamics::{evolve, stationary_profile, Grid, GridFunction, PdeConfig};
use kac_kawasaki::lattice_gas::{sample_profile_with, Configuration, KacKernel, Lattice};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, InitialKind};

static SNAPSHOTS_CHECKED: AtomicU64 = AtomicU64::new(0);
static CONSERVATION_DEFECTS: AtomicU64 = AtomicU64::new(0);

/// Snapshots whose conservation identity has been verified in this process.
pub fn snapshots_checked() -> u64 {
    SNAPSHOTS_CHECKED.load(Ordering::Relaxed)
}

/// Trajectories that failed the conservation check in this process.
pub fn conservation_defects() -> u64 {
    CONSERVATION_DEFECTS.load(Ordering::Relaxed)
}

/// Verifies `η_t − η_0 = −div W_t` exactly on every snapshot.
pub fn check_conservation(traj: &Trajectory) -> Result<usize> {
    let geom = traj.initial.geometry();
    let init = traj.initial.occupancy();
    for s in &traj.snapshots {
        if let Some((site, change, div)) = s.ledger.conservation_defect(geom, init, &s.occupancy) {
            CONSERVATION_DEFECTS.fetch_add(1, Ordering::Relaxed);
            return Err(anyhow!(
                "conservation violated at t={} site {}: change {change}, ledger {div}",
                s.time,
                site.0
            ));
        }
    }
    SNAPSHOTS_CHECKED.fetch_add(traj.snapshots.len() as u64, Ordering::Relaxed);
    Ok(traj.snapshots.len())
}

/// Runs `f(k)` for `k = 0..count` on the rayon pool, results in replica order.
pub fn replicas<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

pub fn grid(cfg: &ExperimentConfig) -> Result<Grid> {
    Ok(Grid::new(cfg.mesh.clone())?)
}

pub fn pde_config(cfg: &ExperimentConfig, grid: &Grid, tilt: Option<Arc<dyn TiltFields>>) -> Result<PdeConfig> {
    let mut pde = PdeConfig::new(cfg.beta, cfg.boundary_profile()?, grid.clone());
    pde.kernel = KacKernel::by_name(&cfg.kernel)?;
    pde.stationary_tol = cfg.pde_tol;
    if let Some(dt) = cfg.dt {
        pde = pde.with_dt(dt);
    }
    if let Some(t) = tilt {
        if !t.is_zero() {
            pde = pde.with_tilt(t);
        }
    }
    Ok(pde)
}

/// Macroscopic profile used for initial data, on the PDE grid.
pub fn initial_grid_function(cfg: &ExperimentConfig, grid: &Grid) -> Result<GridFunction> {
    if cfg.initial == InitialKind::Stationary {
        return Ok(stationary_profile(&pde_config(cfg, grid, None)?)?.profile);
    }
    Ok(GridFunction::from_fn(grid.clone(), cfg.initial_profile()))
}

/// Piecewise-constant evaluation of a grid function at a macroscopic point.
pub fn sample_grid_function(gf: &GridFunction, u: &[f64]) -> f64 {
    let g = &gf.grid;
    let i1 = (((u[0] + 1.0) / g.h(0)).floor().max(0.0) as usize).min(g.m1() - 1);
    let mut j = 0;
    for k in 1..g.dim() {
        let m = g.dims()[k];
        let c = ((u[k] / g.h(k)).floor().max(0.0) as usize).min(m - 1);
        j = j * m + c;
    }
    gf.values[g.cell(i1, j)]
}

/// Product Bernoulli configuration with the configured initial profile.
pub fn initial_configuration(
    cfg: &ExperimentConfig,
    lattice: Arc<Lattice>,
    profile: Option<&GridFunction>,
    rng: &mut ChaCha8Rng,
) -> Result<Configuration> {
    Ok(match (cfg.initial, profile) {
        (InitialKind::Stationary, Some(p)) => sample_profile_with(lattice, |u| sample_grid_function(p, u), rng)?,
        _ => sample_profile_with(lattice, cfg.initial_profile(), rng)?,
    })
}

/// PDE solution at time `t` started from `rho0`.
pub fn reference_at(pde: &PdeConfig, rho0: &GridFunction, t: f64) -> Result<GridFunction> {
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let ev = evolve(rho0, &pde.clone().with_horizon(t, 1))?;
    Ok(ev.path.rho.last().expect("non-empty path").clone())
}

/// Simulates and verifies conservation on every snapshot.
pub fn simulate_checked(
    dynamics: &Dynamics,
    initial: Configuration,
    t_end: f64,
    times: &[f64],
    rng: ChaCha8Rng,
    options: SimulationOptions,
) -> Result<Trajectory> {
    let traj = dynamics.simulate(initial, t_end, times, rng, options).inspect_err(|e| {
        if matches!(e, kac_kawasaki::Error::Conservation { .. }) {
            CONSERVATION_DEFECTS.fetch_add(1, Ordering::Relaxed);
        }
    })?;
    check_conservation(&traj)?;
    Ok(traj)
}

/// Observation grid `k T / m`, merged with extra times.
pub fn observation_times(t_end: f64, m: usize, extra: &[f64]) -> Vec<f64> {
    let mut t: Vec<f64> = (1..=m).map(|k| t_end * k as f64 / m as f64).collect();
    t.extend(extra.iter().copied().filter(|x| *x > 0.0 && *x <= t_end));
    t.sort_by(f64::total_cmp);
    t.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    t
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
