use std::f64::consts::PI;
use std::sync::Arc;

use kac_kawasaki::dynamics::*;
use kac_kawasaki::hydrodynamics::Grid;
use kac_kawasaki::lattice_gas::{sample_profile, Configuration, Lattice, LatticeGeometry, Site};
use kac_kawasaki::observables::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lattice(d: usize, n: usize) -> Arc<Lattice> {
    Lattice::with_default_kernel(d, n).unwrap()
}

#[test]
fn empty_configuration_gives_zero_measure() {
    let cfg = Configuration::empty(lattice(2, 5));
    let pi = empirical_density(&cfg);
    assert_eq!(pi.mass(), 0.0);
    assert_eq!(pair_density(&pi, |u| 1.0 + u[0]), 0.0);
}

#[test]
fn full_configuration_mass_is_exact() {
    for (d, n) in [(1, 7), (2, 6), (3, 3)] {
        let cfg = Configuration::full(lattice(d, n));
        let pi = empirical_density(&cfg);
        let expected = (2 * n + 1) as f64 * (n as f64).powi(d as i32 - 1) / (n as f64).powi(d as i32);
        assert!((pair_density(&pi, |_| 1.0) - expected).abs() < 1e-12);
        assert!(pi.mass() <= 3.0);
    }
}

#[test]
fn riemann_sums_converge_at_first_order() {
    let f = |u: &[f64]| (u[0] + 0.3).exp();
    let exact = (1.3f64).exp() - (-0.7f64).exp();
    let errs: Vec<f64> = [25, 50, 100]
        .iter()
        .map(|&n| (pair_density(&empirical_density(&Configuration::full(lattice(1, n))), f) - exact).abs())
        .collect();
    let slope = (errs[2] / errs[0]).ln() / (4.0f64).ln();
    assert!((slope + 1.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn projection_preserves_pairings_with_constants() {
    let lat = lattice(2, 8);
    let cfg = sample_profile(lat, |u| 0.3 + 0.2 * u[0], 4).unwrap();
    let pi = empirical_density(&cfg);
    let g = Grid::uniform(2, 8, 4).unwrap();
    let rho = pi.project(&g).unwrap();
    assert!((rho.integral() - pi.mass()).abs() < 1e-12);
}

#[test]
fn zero_ledger_gives_zero_current() {
    let lat = lattice(2, 4);
    let w = empirical_current(&CurrentLedger::new(lat.geometry()), lat.geometry()).unwrap();
    assert_eq!(pair_current(&w, |_, _| 1.0), 0.0);
}

#[test]
fn single_jump_is_one_atom() {
    let lat = lattice(2, 4);
    let g = lat.geometry();
    let x = g.site(&[1, 2]).unwrap();
    let e = g.edge_index(x, 0).unwrap();
    let mut ledger = CurrentLedger::new(g);
    ledger.record_jump(e, true);
    let w = empirical_current(&ledger, g).unwrap();
    let gf = |k: usize, u: &[f64]| if k == 0 { 2.0 + u[0] + u[1] } else { 7.0 };
    let expected = (4.0f64).powi(-3) * (2.0 + 0.25 + 0.5);
    assert!((pair_current(&w, gf) - expected).abs() < 1e-15);
}

fn random_ledger(g: &LatticeGeometry, rng: &mut ChaCha8Rng) -> CurrentLedger {
    let edges = (0..g.edges().len()).map(|_| rng.random_range(-20..=20)).collect();
    let boundary = (0..g.boundary_sites().len()).map(|_| rng.random_range(-20..=20)).collect();
    CurrentLedger::from_parts(edges, boundary)
}

#[test]
fn current_pairing_matches_direct_resummation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (d, n) in [(1, 9), (2, 5)] {
        let lat = lattice(d, n);
        let g = lat.geometry();
        let field = |k: usize, u: &[f64]| (k as f64 + 1.0) * (u[0] * 1.3).sin() + u.iter().sum::<f64>();
        for _ in 0..10 {
            let ledger = random_ledger(g, &mut rng);
            let w = empirical_current(&ledger, g).unwrap();
            // Direct sums over coordinates.
            let nf = n as f64;
            let mut direct = 0.0;
            let transverse: Vec<Vec<i64>> = if d == 1 { vec![vec![]] } else { (0..n as i64).map(|y| vec![y]).collect() };
            for x1 in -(n as i64)..=(n as i64) {
                for t in &transverse {
                    let mut c = vec![x1];
                    c.extend(t);
                    let x = g.site(&c).unwrap();
                    let u: Vec<f64> = c.iter().map(|&v| v as f64 / nf).collect();
                    for k in 0..d {
                        if let Some(e) = g.edge_index(x, k) {
                            direct += field(k, &u) * ledger.edge_counts()[e] as f64;
                        }
                    }
                    if let Some(b) = g.boundary_index(x) {
                        direct += field(0, &u) * ledger.boundary_counts()[b] as f64;
                    }
                }
            }
            direct *= nf.powi(-(d as i32 + 1));
            assert!((pair_current(&w, field) - direct).abs() < 1e-12);
        }
    }
}

#[test]
fn mollifier_of_full_and_empty_configurations() {
    let g = Grid::uniform(1, 40, 1).unwrap();
    let eps = 0.1;
    let kappa = default_kappa(eps);
    let full = mollify(&empirical_density(&Configuration::full(lattice(1, 200))), &g, eps, kappa).unwrap();
    for v in &full.values {
        assert!((v - 1.0 / kappa).abs() < 0.06, "{v}");
    }
    let empty = mollify(&empirical_density(&Configuration::empty(lattice(1, 200))), &g, eps, kappa).unwrap();
    assert!(empty.values.iter().all(|&v| v == 0.0));
    assert!(mollify(&empirical_density(&Configuration::empty(lattice(1, 20))), &g, 0.0, 1.0).is_err());
}

#[test]
fn mollified_half_filling_within_binomial_band() {
    let n = 100;
    let eps = 0.1;
    let kappa = default_kappa(eps);
    let cfg = sample_profile(lattice(1, n), |_| 0.5, 17).unwrap();
    let g = Grid::uniform(1, 50, 1).unwrap();
    let m = mollify(&empirical_density(&cfg), &g, eps, kappa).unwrap();
    let mut inside = 0;
    let mut interior = 0;
    for i in 0..g.m1() {
        let u = g.u1_center(i);
        if u - eps < -1.0 || u + eps > 1.0 {
            continue;
        }
        interior += 1;
        let sites = (((u + eps) * n as f64).floor() - ((u - eps) * n as f64).ceil() + 1.0).max(0.0);
        let scale = 1.0 / (n as f64 * kappa * 2.0 * eps);
        let mean = 0.5 * sites * scale;
        let sd = (0.25 * sites).sqrt() * scale;
        if (m.values[i] - mean).abs() <= 3.0 * sd {
            inside += 1;
        }
    }
    assert!(inside as f64 >= 0.95 * interior as f64, "{inside}/{interior}");
}

#[test]
fn block_average_matches_enumeration() {
    let lat = lattice(2, 6);
    let g = lat.geometry();
    assert_eq!(block_average(&Configuration::empty(lat.clone()), Site(7), 2).unwrap(), 0.0);
    assert_eq!(block_average(&Configuration::full(lat.clone()), Site(7), 2).unwrap(), 1.0);
    let cfg = sample_profile(lat.clone(), |u| 0.5 + 0.3 * u[0], 9).unwrap();
    for s in [0, 13, 40, 77] {
        let x = Site(s);
        let c = g.coords(x);
        for l in 0..4i64 {
            let (mut sum, mut count) = (0.0, 0.0);
            for y in 0..g.site_count() {
                let cy = g.coords(Site(y));
                let d1 = (cy[0] - c[0]).abs();
                let dt = (cy[1] - c[1]).rem_euclid(6).min((c[1] - cy[1]).rem_euclid(6));
                if d1 <= l && dt <= l {
                    sum += cfg.eta(Site(y)) as f64;
                    count += 1.0;
                }
            }
            assert!((block_average(&cfg, x, l as usize).unwrap() - sum / count).abs() < 1e-14);
        }
    }
}

#[test]
fn continuity_residual_trivial_cases() {
    let lat = lattice(1, 20);
    let g = lat.geometry();
    let cfg = sample_profile(lat.clone(), |u| 0.4 + 0.1 * u[0], 1).unwrap();
    let pi = empirical_density(&cfg);
    let w0 = empirical_current(&CurrentLedger::new(g), g).unwrap();
    let path = MeasurePath {
        times: vec![0.0, 0.5, 1.0],
        density: vec![pi.clone(); 3],
        current: vec![w0.clone(); 3],
    };
    let test = FnSpatial::new(|u| (1.0 - u[0] * u[0]) * (2.0 + u[0]));
    let v = continuity_residual(&path, &InitialProfile::Measure(&pi), &test, &|t| 1.0 + t * t).unwrap();
    assert!(v.abs() < 1e-9);

    // φ ≡ 1 reduces to ⟨π_t,G⟩ − ⟨γ,G⟩ − ⟨W_t,∇G⟩.
    let mut ledger = CurrentLedger::new(g);
    ledger.record_jump(5, true);
    ledger.record_jump(9, false);
    let w = empirical_current(&ledger, g).unwrap();
    let path = MeasurePath {
        times: vec![0.0, 1.0],
        density: vec![pi.clone(), pi.clone()],
        current: vec![w0, w.clone()],
    };
    let v = continuity_residual(&path, &InitialProfile::Measure(&pi), &test, &|_| 1.0).unwrap();
    let direct = -w.pair(|_, u| test.gradient(u, 0));
    assert!((v - direct).abs() < 1e-12);
}

#[test]
fn continuity_residual_decays_like_inverse_n() {
    let test = FnSpatial::new(|u| (1.0 - u[0] * u[0]) * (1.0 + u[0]))
        .with_gradient(|u, _| 1.0 - 2.0 * u[0] - 3.0 * u[0] * u[0]);
    let mut res = Vec::new();
    for n in [50, 100, 200] {
        let lat = lattice(1, n);
        let dynm = Dynamics::new(lat.clone(), 0.5, Arc::new(AffineBoundary::new(0.8, 0.2).unwrap())).unwrap();
        let mut worst = 0.0f64;
        for seed in 0..3 {
            let cfg = sample_profile(lat.clone(), |u| 0.5 - 0.3 * u[0] + 0.2 * (PI * u[0] / 2.0).cos(), seed).unwrap();
            let obs: Vec<f64> = (1..40).map(|k| k as f64 * 0.0025).collect();
            let traj = dynm.simulate(cfg, 0.1, &obs, replica_rng(seed, 0), SimulationOptions::default()).unwrap();
            let path = MeasurePath::from_trajectory(&traj).unwrap();
            let v = continuity_residual(&path, &InitialProfile::Measure(&path.density[0]), &test, &|_| 1.0).unwrap();
            worst = worst.max(v.abs());
        }
        res.push(worst);
    }
    let slope = (res[2] / res[0]).ln() / (4.0f64).ln();
    assert!(slope < -0.7, "residuals {res:?}, slope {slope}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn current_pairing_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let lat = lattice(2, 4);
        let g = lat.geometry();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l1 = random_ledger(g, &mut rng);
        let l2 = random_ledger(g, &mut rng);
        let w1 = empirical_current(&l1, g).unwrap();
        let w2 = empirical_current(&l2, g).unwrap();
        let sum = CurrentLedger::from_parts(
            l1.edge_counts().iter().zip(l2.edge_counts()).map(|(x, y)| x + y).collect(),
            l1.boundary_counts().iter().zip(l2.boundary_counts()).map(|(x, y)| x + y).collect(),
        );
        let ws = empirical_current(&sum, g).unwrap();
        let f = |k: usize, u: &[f64]| (k as f64 + 1.0) * u[0] - u[1] * u[1];
        let h = |k: usize, u: &[f64]| if k == 0 { u[1].cos() } else { u[0] };
        prop_assert!((ws.pair(f) - w1.pair(f) - w2.pair(f)).abs() < 1e-12);
        let combo = w1.pair(|k, u| a * f(k, u) + b * h(k, u));
        prop_assert!((combo - a * w1.pair(f) - b * w1.pair(h)).abs() < 1e-12);
    }

    #[test]
    fn mollifier_respects_particle_hole_symmetry(seed in any::<u64>(), eps in 0.05f64..0.3) {
        let lat = lattice(1, 40);
        let cfg = sample_profile(lat.clone(), |_| 0.5, seed).unwrap();
        let holes: Vec<u8> = cfg.occupancy().iter().map(|&e| 1 - e).collect();
        let hcfg = Configuration::from_occupancy(lat.clone(), holes).unwrap();
        let g = Grid::uniform(1, 20, 1).unwrap();
        let k = default_kappa(eps);
        let m = mollify(&empirical_density(&cfg), &g, eps, k).unwrap();
        let mh = mollify(&empirical_density(&hcfg), &g, eps, k).unwrap();
        let mf = mollify(&empirical_density(&Configuration::full(lat)), &g, eps, k).unwrap();
        for i in 0..g.cell_count() {
            prop_assert!((mh.values[i] - (mf.values[i] - m.values[i])).abs() < 1e-12);
        }
    }
}
