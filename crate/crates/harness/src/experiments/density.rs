use std::sync::Arc;

use anyhow::{anyhow, Result};
use kac_kawasaki::dynamics::{Dynamics, SimulationOptions, TiltFields};
use kac_kawasaki::hydrodynamics::GridFunction;
use kac_kawasaki::observables::{default_kappa, mollify, DensityMeasure};

use super::oracle::{girsanov_mean_one, mean_one_table};
use crate::config::{ExperimentConfig, TiltKind};
use crate::output::{num, replica_stream, stream_id, Check, ExperimentOutput, Table};
use crate::sim::{
    grid, initial_configuration, initial_grid_function, mean_and_se, observation_times, pde_config, reference_at,
    replicas, simulate_checked,
};

/// Distances at one `(N, t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityRow {
    pub n: usize,
    pub t: f64,
    /// L¹ distance of each replica's mollified profile to the reference.
    pub per_replica: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
    /// L¹ distance of the replica-averaged mollified profile.
    pub of_mean: f64,
    pub empirical: GridFunction,
    pub reference: GridFunction,
}

/// Mollified empirical densities against the (possibly tilted) PDE.
pub fn density_sweep(cfg: &ExperimentConfig, tilt: Arc<dyn TiltFields>, out: &mut ExperimentOutput) -> Result<Vec<DensityRow>> {
    let g = grid(cfg)?;
    let pde = pde_config(cfg, &g, Some(tilt.clone()))?;
    let rho0 = initial_grid_function(cfg, &g)?;
    let times = cfg.sample_times();
    let refs: Vec<GridFunction> = times.iter().map(|&t| reference_at(&pde, &rho0, t)).collect::<Result<_>>()?;
    let snap_times = observation_times(cfg.t_end, cfg.observations, &times);
    let kappa = default_kappa(cfg.mollifier_eps);
    let mut rows = Vec::new();
    for &n in cfg.sweep()? {
        let lattice = cfg.lattice(n)?;
        let dynamics = Dynamics::tilted(lattice.clone(), cfg.beta, cfg.boundary_profile()?, tilt.clone())?;
        let profiles: Vec<Vec<GridFunction>> = replicas(cfg.replicas, |k| {
            let mut rng = replica_stream(cfg.seed, n, k);
            let init = initial_configuration(cfg, lattice.clone(), Some(&rho0), &mut rng)?;
            let traj = simulate_checked(&dynamics, init, cfg.t_end, &snap_times, rng, SimulationOptions::default())?;
            times
                .iter()
                .map(|&t| {
                    let snap = traj
                        .snapshots
                        .iter()
                        .find(|s| (s.time - t).abs() < 1e-12)
                        .ok_or_else(|| anyhow!("no snapshot at t = {t}"))?;
                    let pi = DensityMeasure::from_occupancy(lattice.geometry(), &snap.occupancy)?;
                    Ok(mollify(&pi, &g, cfg.mollifier_eps, kappa)?)
                })
                .collect()
        })?;
        out.seeds.extend((0..cfg.replicas).map(|k| (n, k, stream_id(n, k))));
        for (i, &t) in times.iter().enumerate() {
            let per_replica: Vec<f64> = profiles
                .iter()
                .map(|p| p[i].l1_distance(&refs[i]))
                .collect::<std::result::Result<_, _>>()?;
            let mut avg = vec![0.0; g.cell_count()];
            for p in &profiles {
                avg.iter_mut().zip(&p[i].values).for_each(|(a, v)| *a += v / cfg.replicas as f64);
            }
            let empirical = GridFunction::new(g.clone(), avg)?;
            let (mean, std_error) = mean_and_se(&per_replica);
            rows.push(DensityRow {
                n,
                t,
                of_mean: empirical.l1_distance(&refs[i])?,
                per_replica,
                mean,
                std_error,
                empirical,
                reference: refs[i].clone(),
            });
        }
    }
    Ok(rows)
}

fn density_tables(rows: &[DensityRow], prefix: &str) -> Vec<Table> {
    let mut per = Table::new(format!("{prefix}_replicas"), &["n", "replica", "t[macro time]", "l1_distance"]);
    let mut sum = Table::new(
        format!("{prefix}_summary"),
        &["n", "t[macro time]", "replicas", "mean_l1", "std_error", "l1_of_replica_mean"],
    );
    let mut prof = Table::new(format!("{prefix}_profiles"), &["n", "t[macro time]", "u1", "empirical_density", "reference_density"]);
    for r in rows {
        for (k, d) in r.per_replica.iter().enumerate() {
            per.push(vec![r.n.to_string(), k.to_string(), num(r.t), num(*d)]);
        }
        sum.push(vec![
            r.n.to_string(),
            num(r.t),
            r.per_replica.len().to_string(),
            num(r.mean),
            num(r.std_error),
            num(r.of_mean),
        ]);
        let g = &r.reference.grid;
        let (e, f) = (r.empirical.column_means(), r.reference.column_means());
        for i1 in 0..g.m1() {
            prof.push(vec![r.n.to_string(), num(r.t), num(g.u1_center(i1)), num(e[i1]), num(f[i1])]);
        }
    }
    vec![per, sum, prof]
}

/// `mean_l1` non-increasing in N within one pooled standard error, per time.
pub fn monotone_in_n(rows: &[DensityRow]) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    let mut times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    times.dedup();
    for t in times.into_iter().filter(|t| *t > 0.0) {
        let at: Vec<&DensityRow> = rows.iter().filter(|r| r.t == t).collect();
        for w in at.windows(2) {
            let pooled = (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
            let step_ok = w[1].mean <= w[0].mean + pooled;
            ok &= step_ok;
            detail.push(format!("N {}→{}: {:.4}→{:.4} (±{:.4})", w[0].n, w[1].n, w[0].mean, w[1].mean, pooled));
        }
    }
    (ok, detail.join("; "))
}

pub fn run_hydro_convergence(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::default();
    let rows = density_sweep(cfg, cfg.tilt_fields(), &mut out)?;
    out.tables.extend(density_tables(&rows, "hydro"));
    if cfg.n.len() > 1 {
        let (ok, detail) = monotone_in_n(&rows);
        out.checks.push(Check::new("hydro_monotone_in_n", ok, detail));
    }
    let last = rows.last().expect("at least one row");
    out.checks.push(Check::new(
        "hydro_final_l1",
        last.of_mean <= cfg.max_l1,
        format!("N={} t={}: L¹ {:.4} (limit {})", last.n, last.t, last.of_mean, cfg.max_l1),
    ));
    Ok(out)
}

pub fn run_tilted_check(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::default();
    if cfg.tilt == TiltKind::None {
        out.checks.push(Check::new("tilt_configured", false, "the tilt experiment needs a tilt"));
        return Ok(out);
    }
    let tilt = cfg.tilt_fields();
    let rows = density_sweep(cfg, tilt.clone(), &mut out)?;
    out.tables.extend(density_tables(&rows, "tilt"));
    for r in rows.iter().filter(|r| r.t == cfg.t_end) {
        out.checks.push(Check::new(
            format!("tilt_l1_n_{}", r.n),
            r.of_mean <= cfg.max_l1,
            format!("L¹ {:.4} at t={} (limit {})", r.of_mean, r.t, cfg.max_l1),
        ));
    }
    let m = girsanov_mean_one(cfg, tilt, &mut out)?;
    out.tables.push(mean_one_table(&m, cfg.girsanov_t));
    out.checks.push(Check::new(
        "girsanov_mean_one",
        m.z().abs() <= 3.0,
        format!("mean {:.5} ± {:.5} (z = {:.2})", m.mean, m.std_error, m.z()),
    ));
    Ok(out)
}
