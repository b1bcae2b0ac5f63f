use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use kac_kawasaki::dynamics::{AffineBoundary, ConstantBoundary, ConstantTilt};
use kac_kawasaki::hydrodynamics::*;
use kac_kawasaki::Error;

fn affine(a: f64, c: f64) -> Arc<AffineBoundary> {
    Arc::new(AffineBoundary::new(a, c).unwrap())
}

fn smooth_gamma(u: &[f64]) -> f64 {
    0.5 - 0.3 * u[0] + 0.2 * (PI * u[0] / 2.0).cos()
}

/// Averages pairs of fine cells onto the coarse grid (direction 1 only, d = 1).
fn restrict(fine: &[f64]) -> Vec<f64> {
    fine.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn constant_profile_is_preserved() {
    for beta in [0.0, 0.5] {
        let g = Grid::uniform(2, 12, 6).unwrap();
        let cfg = PdeConfig::new(beta, Arc::new(ConstantBoundary::new(0.3).unwrap()), g.clone()).with_horizon(0.05, 5);
        let ev = evolve(&GridFunction::constant(g, 0.3), &cfg).unwrap();
        for r in &ev.path.rho {
            assert!(r.values.iter().all(|v| (v - 0.3).abs() < 1e-13));
        }
    }
}

#[test]
fn linear_profile_is_stationary_without_interaction() {
    let g = Grid::uniform(1, 40, 1).unwrap();
    let cfg = PdeConfig::new(0.0, affine(0.8, 0.2), g.clone()).with_horizon(0.2, 4);
    let rho0 = GridFunction::from_fn(g, |u| 0.5 - 0.3 * u[0]);
    let ev = evolve(&rho0, &cfg).unwrap();
    let last = ev.path.rho.last().unwrap();
    assert!(last.sup_distance(&rho0).unwrap() < 1e-10);
    // The current is the Fick value 0.3 everywhere.
    let w = ev.path.current.last().unwrap();
    assert!(w.comps[0].iter().all(|v| (v - 0.3 * 0.2).abs() < 1e-10));
}

#[test]
fn instantaneous_current_special_cases() {
    let g = Grid::uniform(2, 10, 4).unwrap();
    let cfg = PdeConfig::new(0.0, affine(0.7, 0.3), g.clone());
    let rho = GridFunction::from_fn(g.clone(), |u| 0.5 - 0.2 * u[0]);
    let j = instantaneous_current(&rho, &cfg, 0.0).unwrap();
    assert!(j.comps[0].iter().all(|v| (v - 0.2).abs() < 1e-12));
    assert!(j.comps[1].iter().all(|v| v.abs() < 1e-12));

    let cfg = PdeConfig::new(0.0, Arc::new(ConstantBoundary::new(0.4).unwrap()), g.clone());
    let j = instantaneous_current(&GridFunction::constant(g, 0.4), &cfg, 0.0).unwrap();
    assert!(j.sup_norm() < 1e-14);
}

#[test]
fn instantaneous_current_converges_at_second_order() {
    // Interior faces only: the two end faces use a half-cell difference.
    let eval = |m: usize| {
        let g = Grid::uniform(1, m, 1).unwrap();
        let cfg = PdeConfig::new(0.5, affine(0.8, 0.2), g.clone());
        let rho = GridFunction::from_fn(g, |u| 0.5 - 0.3 * u[0] + 0.1 * (2.0 * u[0]).sin());
        instantaneous_current(&rho, &cfg, 0.0).unwrap().comps[0].clone()
    };
    let (c, f, r) = (eval(20), eval(40), eval(160));
    let err = |x: &[f64], stride: usize| {
        (1..x.len() - 1)
            .map(|i| (x[i] - r[i * stride]).abs())
            .fold(0.0, f64::max)
    };
    let (ec, ef) = (err(&c, 8), err(&f, 4));
    let order = (ec / ef).log2();
    assert!(order > 1.7, "order {order} ({ec:e}, {ef:e})");
}

#[test]
fn mass_balance_is_exact_per_step() {
    let g = Grid::uniform(2, 16, 4).unwrap();
    let cfg0 = PdeConfig::new(0.5, affine(0.9, 0.1), g.clone());
    let bound = HydroSolver::new(cfg0.clone()).unwrap().stability_bound();
    let dt = 0.5 * bound;
    let cfg = cfg0.with_horizon(20.0 * dt, 20).with_dt(dt);
    let rho0 = GridFunction::from_fn(g.clone(), |u| 0.5 + 0.2 * (PI * u[0]).sin() * (2.0 * PI * u[1]).cos());
    let ev = evolve(&rho0, &cfg).unwrap();
    assert_eq!(ev.steps, 20);
    let (m1, mt) = (g.m1(), g.transverse_count());
    let area = g.transverse_area();
    for k in 1..ev.path.len() {
        let mass = ev.path.rho[k].integral() - ev.path.rho[k - 1].integral();
        let (wk, wp) = (&ev.path.current[k], &ev.path.current[k - 1]);
        let flux: f64 = (0..mt)
            .map(|j| (wk.comps[0][m1 * mt + j] - wp.comps[0][m1 * mt + j]) - (wk.comps[0][j] - wp.comps[0][j]))
            .sum::<f64>()
            * area;
        assert!((mass + flux).abs() < 1e-12, "step {k}: {mass} vs {flux}");
    }
}

#[test]
fn heat_limit_matches_independent_stepper() {
    for (d, m1, mt) in [(1, 30, 1), (2, 12, 5)] {
        let g = Grid::uniform(d, m1, mt).unwrap();
        let cfg = PdeConfig::new(0.0, affine(0.75, 0.25), g.clone()).with_horizon(0.05, 1);
        let rho0 = GridFunction::from_fn(g.clone(), |u| 0.5 + 0.3 * (3.0 * u[0]).cos() * u.get(1).map_or(1.0, |x| (2.0 * PI * x).sin()));
        let ev = evolve(&rho0, &cfg).unwrap();
        let solver = HydroSolver::new(cfg).unwrap();
        let reference = heat_reference(&rho0, solver.left_values(), solver.right_values(), ev.dt, ev.steps);
        let diff = ev.path.rho.last().unwrap().sup_distance(&reference).unwrap();
        assert!(diff < 1e-12, "d={d}: {diff:e}");
    }
}

#[test]
fn unstable_step_is_refused_with_bound() {
    let g = Grid::uniform(1, 50, 1).unwrap();
    let cfg = PdeConfig::new(0.5, affine(0.8, 0.2), g.clone()).with_dt(1e-2).with_horizon(0.1, 10);
    match evolve(&GridFunction::constant(g, 0.5), &cfg) {
        Err(Error::Stability { dt, bound }) => {
            assert_eq!(dt, 1e-2);
            assert!(bound < 1e-3);
        }
        other => panic!("expected a stability error, got {other:?}"),
    }
}

#[test]
fn maximum_principle_holds_along_the_flow() {
    let g = Grid::uniform(1, 40, 1).unwrap();
    let cfg = PdeConfig::new(0.0, affine(0.6, 0.4), g.clone()).with_horizon(0.3, 30);
    let rho0 = GridFunction::from_fn(g, |u| if u[0] < 0.0 { 0.1 } else { 0.9 });
    let ev = evolve(&rho0, &cfg).unwrap();
    for r in &ev.path.rho {
        assert!(r.min() >= 0.1 - 1e-12 && r.max() <= 0.9 + 1e-12);
    }
}

#[test]
fn stationary_affine_profile() {
    let g = Grid::uniform(1, 60, 1).unwrap();
    let cfg = PdeConfig::new(0.0, affine(0.8, 0.2), g.clone());
    let st = stationary_profile(&cfg).unwrap();
    let exact = GridFunction::from_fn(g, |u| 0.8 + (0.2 - 0.8) * (u[0] + 1.0) / 2.0);
    assert!(st.profile.sup_distance(&exact).unwrap() < 1e-10);
}

#[test]
fn stationary_constant_profile_for_any_beta() {
    for beta in [0.0, 0.3, 1.0] {
        let g = Grid::uniform(2, 20, 4).unwrap();
        let cfg = PdeConfig::new(beta, Arc::new(ConstantBoundary::new(0.35).unwrap()), g.clone());
        let st = stationary_profile(&cfg).unwrap();
        assert!(st.profile.values.iter().all(|v| (v - 0.35).abs() < 1e-8));
    }
}

#[test]
fn stationary_interacting_profile_converges_under_refinement() {
    let solve = |m: usize| {
        let g = Grid::uniform(1, m, 1).unwrap();
        let cfg = PdeConfig::new(0.3, affine(0.8, 0.2), g);
        let st = stationary_profile(&cfg).unwrap();
        assert!(st.residual < 1e-8);
        st.profile.values
    };
    let (a, b, c) = (solve(20), solve(40), solve(80));
    let e1 = sup_diff(&a, &restrict(&b));
    let e2 = sup_diff(&b, &restrict(&c));
    assert!(e1 / e2 > 3.0, "ratio {}", e1 / e2);
}

#[test]
fn stationary_reports_history_on_failure() {
    let g = Grid::uniform(1, 30, 1).unwrap();
    let mut cfg = PdeConfig::new(0.3, affine(0.8, 0.2), g);
    cfg.max_steps = 100;
    match stationary_profile(&cfg) {
        Err(Error::NonConvergence { history, steps, .. }) => {
            assert!(steps >= 100);
            assert!(!history.is_empty());
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn evolution_self_converges_in_space_and_time() {
    let t_end = 0.1;
    let run = |m: usize, dt: f64| {
        let g = Grid::uniform(1, m, 1).unwrap();
        let cfg = PdeConfig::new(0.5, affine(0.8, 0.2), g.clone()).with_horizon(t_end, 1).with_dt(dt);
        let ev = evolve(&GridFunction::from_fn(g, smooth_gamma), &cfg).unwrap();
        ev.path.rho.last().unwrap().values.clone()
    };
    // Space: a common small step isolates the spatial error.
    let dt = t_end / 20000.0;
    let (a, b, c) = (run(16, dt), run(32, dt), run(64, dt));
    let space = sup_diff(&a, &restrict(&b)) / sup_diff(&b, &restrict(&c));
    assert!(space > 3.0, "space ratio {space}");
    // Time: fixed grid, halving the step.
    let m = 16;
    let (a, b, c) = (run(m, t_end / 500.0), run(m, t_end / 1000.0), run(m, t_end / 2000.0));
    let time = sup_diff(&a, &b) / sup_diff(&b, &c);
    assert!((time - 2.0).abs() < 0.3, "time ratio {time}");
}

#[test]
fn weak_form_residual_vanishes_for_constant_solution() {
    let g = Grid::uniform(1, 40, 1).unwrap();
    let cfg = PdeConfig::new(0.4, Arc::new(ConstantBoundary::new(0.6).unwrap()), g.clone()).with_horizon(0.1, 10);
    let solver = HydroSolver::new(cfg).unwrap();
    let ev = solver.evolve(&GridFunction::constant(g, 0.6)).unwrap();
    let f = FnTest::new(|t, u| (1.0 + t) * (1.0 - u[0] * u[0]) * (1.0 + 0.5 * u[0]));
    let r = weak_form_residual(&ev.path, &solver, &f).unwrap();
    assert!(r.abs() < 1e-4, "{r}");
}

#[test]
fn weak_form_residual_decays_under_refinement() {
    let residual = |m: usize, obs: usize| {
        let g = Grid::uniform(1, m, 1).unwrap();
        let cfg = PdeConfig::new(0.5, affine(0.8, 0.2), g.clone()).with_horizon(0.2, obs);
        let solver = HydroSolver::new(cfg).unwrap();
        let ev = solver.evolve(&GridFunction::from_fn(g, smooth_gamma)).unwrap();
        let tests = [
            FnTest::new(|t, u| (1.0 - u[0] * u[0]) * (1.0 + t)),
            FnTest::new(|t, u| (PI * u[0]).sin() * (2.0 - t)),
            FnTest::new(|_, u| (1.0 - u[0] * u[0]) * u[0].exp()),
        ];
        tests
            .iter()
            .map(|f| weak_form_residual(&ev.path, &solver, f).unwrap().abs())
            .fold(0.0, f64::max)
    };
    let coarse = residual(20, 20);
    let fine = residual(40, 40);
    assert!(coarse < 1e-2, "{coarse}");
    assert!(fine < coarse / 2.0, "{coarse} -> {fine}");
}

#[test]
fn weak_form_rejects_non_vanishing_test_function() {
    let g = Grid::uniform(1, 10, 1).unwrap();
    let cfg = PdeConfig::new(0.0, affine(0.8, 0.2), g.clone()).with_horizon(0.01, 1);
    let solver = HydroSolver::new(cfg).unwrap();
    let ev = solver.evolve(&GridFunction::constant(g, 0.5)).unwrap();
    assert!(weak_form_residual(&ev.path, &solver, &FnTest::new(|_, _| 1.0)).is_err());
}

#[test]
fn tilted_flow_transports_mass() {
    // A positive tilt pushes particles towards u1 = 1.
    let g = Grid::uniform(1, 40, 1).unwrap();
    let b: Arc<ConstantBoundary> = Arc::new(ConstantBoundary::new(0.5).unwrap());
    let cfg = PdeConfig::new(0.0, b, g.clone())
        .with_tilt(Arc::new(ConstantTilt::new(vec![1.0], 0.0)))
        .with_horizon(0.2, 2);
    let ev = evolve(&GridFunction::constant(g, 0.5), &cfg).unwrap();
    let w = ev.path.current.last().unwrap();
    // σ(1/2) = 1/2 so the mid-domain flux is 0.5·T.
    assert!((w.comps[0][20] - 0.1).abs() < 1e-9);
}

#[test]
fn convolution_is_linear_and_bounded() {
    let g = Grid::uniform(1, 64, 1).unwrap();
    let a = GridFunction::from_fn(g.clone(), |u| 0.5 + 0.4 * (3.0 * u[0]).sin());
    let b = GridFunction::from_fn(g.clone(), |u| 0.2 + 0.1 * u[0] * u[0]);
    let sum = GridFunction::new(g.clone(), a.values.iter().zip(&b.values).map(|(x, y)| 0.3 * x + 0.7 * y).collect()).unwrap();
    let (ca, cb, cs) = (convolve(&a), convolve(&b), convolve(&sum));
    for i in 0..g.cell_count() {
        assert!((cs.values[i] - 0.3 * ca.values[i] - 0.7 * cb.values[i]).abs() < 1e-12);
    }
    assert!(ca.min() >= a.min() - 1e-12 && ca.max() <= a.max() + 1e-12);
}

#[test]
fn convolution_gradient_bound() {
    // |∂(J⋆ρ)| ≤ J⋆|∂ρ| for random smooth ρ, compared at interior faces.
    let g = Grid::uniform(1, 80, 1).unwrap();
    let conv = Convolver::new(&g, &Default::default());
    let h = g.h(0);
    for k in 0..20 {
        let (a, w, p) = (0.1 + 0.01 * k as f64, 1.0 + 0.3 * k as f64, 0.7 * k as f64);
        let rho = GridFunction::from_fn(g.clone(), |u| 0.5 + a * (w * u[0] + p).sin());
        let grad_phi = conv.face_gradient(&rho.values);
        let abs_grad = GridFunction::from_fn(g.clone(), |u| (a * w * (w * u[0] + p).cos()).abs());
        let bound = convolve(&abs_grad);
        for f in 1..g.m1() {
            let envelope = bound.values[f - 1].max(bound.values[f]);
            assert!(grad_phi[f].abs() <= envelope + 10.0 * h * a * w, "k={k} face {f}");
        }
    }
}

#[test]
fn grid_function_roundtrip() {
    let dir = std::env::temp_dir().join(format!("kac-hydro-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let g = Grid::uniform(2, 5, 3).unwrap();
    let gf = GridFunction::from_fn(g.clone(), |u| u[0] * u[1] + 0.1);
    let mut meta = BTreeMap::new();
    meta.insert("beta".to_string(), "0.5".to_string());
    let csv = dir.join("rho.csv");
    write_grid_function(&gf, &csv, &meta).unwrap();
    let (back, m) = read_grid_function(&csv).unwrap();
    assert_eq!(back, gf);
    assert_eq!(m["beta"], "0.5");

    let cfg = PdeConfig::new(0.2, affine(0.7, 0.3), g.clone()).with_horizon(0.01, 2);
    let ev = evolve(&GridFunction::constant(g, 0.5), &cfg).unwrap();
    write_path_pair(&ev.path, &dir.join("pair")).unwrap();
    let pair = read_path_pair(&dir.join("pair")).unwrap();
    assert_eq!(pair.times, ev.path.times);
    assert_eq!(pair.rho, ev.path.rho);
    assert_eq!(pair.current, ev.path.current);
    assert_eq!(pair.scheme_dt, ev.path.scheme_dt);
    std::fs::remove_dir_all(&dir).unwrap();
}
