use anyhow::{anyhow, Result};
use kac_kawasaki::dynamics::{CurrentLedger, Dynamics, SimulationOptions};
use kac_kawasaki::hydrodynamics::{instantaneous_current, stationary_profile, FaceField, GridFunction};
use kac_kawasaki::lattice_gas::{sample_profile_with, Configuration, LatticeGeometry, Site};
use kac_kawasaki::observables::{empirical_current, pair_current};

use crate::config::{BoundaryKind, ExperimentConfig};
use crate::output::{num, replica_stream, stream_id, Check, ExperimentOutput, Table};
use crate::sim::{
    grid, initial_configuration, mean_and_se, pde_config, replicas, sample_grid_function, simulate_checked,
};

/// Test field `G(k, u)` of the current pairing.
pub struct CurrentTest {
    pub name: &'static str,
    pub g: fn(usize, &[f64]) -> f64,
}

/// `G ≡ e₁` and `G = cos(πu₁/2) e₁`.
pub const CURRENT_TESTS: [CurrentTest; 2] = [
    CurrentTest {
        name: "unit",
        g: |k, _| if k == 0 { 1.0 } else { 0.0 },
    },
    CurrentTest {
        name: "cosine",
        g: |k, u| if k == 0 { (std::f64::consts::PI * u[0] / 2.0).cos() } else { 0.0 },
    },
];

/// Bulk part of `W_b − W_a`: bond counters only.
pub fn bulk_increment(geom: &LatticeGeometry, a: &CurrentLedger, b: &CurrentLedger) -> CurrentLedger {
    let edge = b.edge_counts().iter().zip(a.edge_counts()).map(|(x, y)| x - y).collect();
    CurrentLedger::from_parts(edge, vec![0; geom.boundary_sites().len()])
}

/// Per-replica pairings `⟨(W_{burn+T} − W_burn)/T, G⟩`, one vector per test.
pub fn current_pairings(cfg: &ExperimentConfig, n: usize, out: &mut ExperimentOutput) -> Result<(GridFunction, FaceField, Vec<Vec<f64>>)> {
    let g = grid(cfg)?;
    let pde = pde_config(cfg, &g, None)?;
    let rho_bar = stationary_profile(&pde)?.profile;
    let j_bar = instantaneous_current(&rho_bar, &pde, 0.0)?;
    let lattice = cfg.lattice(n)?;
    let dynamics = Dynamics::new(lattice.clone(), cfg.beta, cfg.boundary_profile()?)?;
    let horizon = cfg.burn_in + cfg.t_end;
    let per_replica: Vec<Vec<f64>> = replicas(cfg.replicas, |k| {
        let mut rng = replica_stream(cfg.seed, n, k);
        let init = sample_profile_with(lattice.clone(), |u| sample_grid_function(&rho_bar, u), &mut rng)?;
        let marks: Vec<f64> = if cfg.burn_in > 0.0 { vec![cfg.burn_in] } else { vec![] };
        let traj = simulate_checked(&dynamics, init, horizon, &marks, rng, SimulationOptions::default())?;
        let start = &traj.snapshots[if cfg.burn_in > 0.0 { 1 } else { 0 }];
        let end = traj.snapshots.last().ok_or_else(|| anyhow!("empty trajectory"))?;
        let geom = lattice.geometry();
        let w = empirical_current(&bulk_increment(geom, &start.ledger, &end.ledger), geom)?;
        Ok(CURRENT_TESTS
            .iter()
            .map(|t| pair_current(&w, t.g) / cfg.t_end)
            .collect())
    })?;
    out.seeds.extend((0..cfg.replicas).map(|k| (n, k, stream_id(n, k))));
    Ok((rho_bar, j_bar, per_replica))
}

pub fn run_current_lln(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::default();
    let mut per = Table::new("current_replicas", &["n", "replica", "test", "pairing[per macro time]"]);
    let mut sum = Table::new(
        "current_summary",
        &["n", "test", "replicas", "mean_pairing", "std_error", "reference_pairing", "relative_error"],
    );
    for &n in cfg.sweep()? {
        let (_, j_bar, values) = current_pairings(cfg, n, &mut out)?;
        for (i, t) in CURRENT_TESTS.iter().enumerate() {
            let xs: Vec<f64> = values.iter().map(|v| v[i]).collect();
            for (k, x) in xs.iter().enumerate() {
                per.push(vec![n.to_string(), k.to_string(), t.name.into(), num(*x)]);
            }
            let (mean, se) = mean_and_se(&xs);
            let reference = j_bar.pair(t.g);
            let symmetric = cfg.boundary == BoundaryKind::Constant && cfg.beta == 0.0;
            let rel = if reference.abs() > 1e-12 { (mean - reference).abs() / reference.abs() } else { f64::NAN };
            sum.push(vec![n.to_string(), t.name.into(), xs.len().to_string(), num(mean), num(se), num(reference), num(rel)]);
            let (passed, detail) = if symmetric {
                (mean.abs() <= 3.0 * se, format!("mean {mean:.4} ± {se:.4}, expected 0"))
            } else {
                (
                    rel <= cfg.current_tol,
                    format!("mean {mean:.4} ± {se:.4} vs {reference:.4} ({:.2}%)", 100.0 * rel),
                )
            };
            out.checks.push(Check::new(format!("current_{}_n_{n}", t.name), passed, detail));
        }
    }
    out.tables.push(per);
    out.tables.push(sum);
    Ok(out)
}

/// `u₁`-binned time averages `T⁻¹∫η_s(x)ds` over `cells` equal columns.
pub fn binned_profile(geom: &LatticeGeometry, occupation: &[f64], t: f64, cells: usize) -> Vec<f64> {
    let mut sum = vec![0.0; cells];
    let mut count = vec![0usize; cells];
    for (s, v) in occupation.iter().enumerate() {
        let u1 = geom.macro_point(Site(s))[0];
        let c = (((u1 + 1.0) / 2.0 * cells as f64).floor() as usize).min(cells - 1);
        sum[c] += v / t;
        count[c] += 1;
    }
    sum.iter().zip(&count).map(|(s, &c)| s / c.max(1) as f64).collect()
}

/// Bin averages of a grid function over the same columns.
pub fn binned_reference(rho: &GridFunction, cells: usize) -> Vec<f64> {
    let g = &rho.grid;
    let cols = rho.column_means();
    let mut sum = vec![0.0; cells];
    let mut count = vec![0usize; cells];
    for (i1, v) in cols.iter().enumerate() {
        let c = (((g.u1_center(i1) + 1.0) / 2.0 * cells as f64).floor() as usize).min(cells - 1);
        sum[c] += v;
        count[c] += 1;
    }
    sum.iter().zip(&count).map(|(s, &c)| s / c.max(1) as f64).collect()
}

pub fn run_stationary(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::default();
    let g = grid(cfg)?;
    let pde = pde_config(cfg, &g, None)?;
    let st = stationary_profile(&pde)?;
    let rho_bar = st.profile;
    if cfg.beta == 0.0 {
        let affine = GridFunction::from_fn(g.clone(), {
            let (l, r) = (cfg.boundary_left, if cfg.boundary == BoundaryKind::Constant { cfg.boundary_left } else { cfg.boundary_right });
            move |u| l + (r - l) * (u[0] + 1.0) / 2.0
        });
        let err = rho_bar.sup_distance(&affine)?;
        out.checks.push(Check::new(
            "stationary_profile_affine",
            err <= 1e-10,
            format!("sup distance {err:.3e} after {} steps", st.steps),
        ));
    }
    let cells = cfg.profile_cells;
    let reference = binned_reference(&rho_bar, cells);
    let mut per = Table::new("stationary_replicas", &["n", "replica", "u1_bin_centre", "time_averaged_density"]);
    let mut sum = Table::new(
        "stationary_profile",
        &["n", "u1_bin_centre", "mean_density", "std_error", "reference_density", "abs_error"],
    );
    let centre = |c: usize| -1.0 + (2 * c + 1) as f64 / cells as f64;
    for &n in cfg.sweep()? {
        let lattice = cfg.lattice(n)?;
        let dynamics = Dynamics::new(lattice.clone(), cfg.beta, cfg.boundary_profile()?)?;
        let profiles: Vec<Vec<f64>> = replicas(cfg.replicas, |k| {
            let mut rng = replica_stream(cfg.seed, n, k);
            let mut init = initial_configuration(cfg, lattice.clone(), Some(&rho_bar), &mut rng)?;
            if cfg.burn_in > 0.0 {
                let warm = simulate_checked(&dynamics, init, cfg.burn_in, &[], rng.clone(), SimulationOptions::default())?;
                init = Configuration::from_occupancy(lattice.clone(), warm.final_state.cfg().occupancy().to_vec())?;
                rng = warm.final_state.rng().clone();
            }
            let opts = SimulationOptions {
                track_occupation: true,
                ..Default::default()
            };
            let traj = simulate_checked(&dynamics, init, cfg.t_end, &[], rng, opts)?;
            let occ = traj.occupation.ok_or_else(|| anyhow!("occupation not tracked"))?;
            Ok(binned_profile(lattice.geometry(), &occ, cfg.t_end, cells))
        })?;
        out.seeds.extend((0..cfg.replicas).map(|k| (n, k, stream_id(n, k))));
        let mut worst: f64 = 0.0;
        for c in 0..cells {
            let xs: Vec<f64> = profiles.iter().map(|p| p[c]).collect();
            for (k, x) in xs.iter().enumerate() {
                per.push(vec![n.to_string(), k.to_string(), num(centre(c)), num(*x)]);
            }
            let (mean, se) = mean_and_se(&xs);
            let err = (mean - reference[c]).abs();
            if c > 0 && c + 1 < cells {
                worst = worst.max(err);
            }
            sum.push(vec![n.to_string(), num(centre(c)), num(mean), num(se), num(reference[c]), num(err)]);
        }
        out.checks.push(Check::new(
            format!("stationary_profile_n_{n}"),
            worst <= cfg.profile_tol,
            format!("interior sup error {worst:.4} (limit {})", cfg.profile_tol),
        ));
    }
    out.tables.push(per);
    out.tables.push(sum);
    Ok(out)
}
