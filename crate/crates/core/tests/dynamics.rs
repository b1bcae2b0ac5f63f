use std::sync::Arc;

use kac_kawasaki::dynamics::*;
use kac_kawasaki::lattice_gas::{sample_profile, Configuration, Lattice, Site};
use nalgebra::DVector;

fn affine(l: f64, r: f64) -> Arc<dyn BoundaryProfile> {
    Arc::new(AffineBoundary::new(l, r).unwrap())
}

#[test]
fn generator_rows_sum_to_zero() {
    let lat = Lattice::with_default_kernel(1, 2).unwrap();
    for beta in [0.0, 1.0, 3.0] {
        let dynm = Dynamics::tilted(lat.clone(), beta, affine(0.8, 0.2), Arc::new(ConstantTilt::new(vec![0.4], 0.3))).unwrap();
        let q = exact_generator(&dynm, 0.0).unwrap();
        assert!(q.max_abs_row_sum() < 1e-12);
        let m = q.matrix();
        for i in 0..q.states() {
            for j in 0..q.states() {
                if i != j {
                    assert!(m[(i, j)] >= 0.0);
                }
            }
        }
    }
}

#[test]
fn oracle_refuses_large_lattices() {
    let lat = Lattice::with_default_kernel(1, 6).unwrap();
    let dynm = Dynamics::new(lat, 0.0, affine(0.5, 0.5)).unwrap();
    assert!(matches!(exact_generator(&dynm, 0.0), Err(kac_kawasaki::Error::StateSpaceTooLarge { .. })));
}

#[test]
fn product_bernoulli_is_stationary_without_interaction() {
    for (d, n) in [(1, 2), (2, 2)] {
        let lat = Lattice::with_default_kernel(d, n).unwrap();
        let sites = lat.geometry().site_count();
        let dynm = Dynamics::new(lat, 0.0, Arc::new(ConstantBoundary::new(0.3).unwrap())).unwrap();
        let pi = exact_generator(&dynm, 0.0).unwrap().stationary().unwrap();
        let want = product_bernoulli(sites, 0.3);
        assert!((pi - want).amax() < 1e-10);
    }
}

#[test]
fn detailed_balance_exhaustive() {
    for (d, n) in [(1, 2), (1, 3), (2, 2)] {
        let lat = Lattice::with_default_kernel(d, n).unwrap();
        for beta in [0.0, 0.7, 2.0] {
            let r = detailed_balance_residual(lat.clone(), beta).unwrap();
            assert!(r < 1e-12, "d={d} N={n} β={beta}: {r}");
        }
    }
}

#[test]
fn kmc_occupation_matches_null_space_vector() {
    let lat = Lattice::with_default_kernel(1, 2).unwrap();
    for beta in [0.0, 1.0] {
        let dynm = Dynamics::new(lat.clone(), beta, affine(0.8, 0.2)).unwrap();
        let pi = exact_generator(&dynm, 0.0).unwrap().stationary().unwrap();
        let emp = empirical_occupation(&dynm, Configuration::empty(lat.clone()), 200_000, replica_rng(3, 0)).unwrap();
        let tv = total_variation(emp.as_slice(), pi.as_slice());
        assert!(tv < 0.02, "β={beta}: TV {tv}");
    }
}

#[test]
fn single_particle_never_violates_exclusion() {
    let lat = Lattice::with_default_kernel(1, 5).unwrap();
    let g = lat.geometry().clone();
    let mut occ = vec![0u8; g.site_count()];
    let x = g.site(&[0]).unwrap();
    occ[x.0] = 1;
    let cfg = Configuration::from_occupancy(lat.clone(), occ).unwrap();
    let dynm = Dynamics::new(lat, 0.0, affine(0.5, 0.5)).unwrap();
    let mut st = SimState::new(cfg, replica_rng(1, 0));
    let ev = dynm.step(&mut st, f64::INFINITY).unwrap().unwrap();
    match ev.kind {
        EventKind::Exchange => {
            let moved_to = if ev.delta == -1 { Site(ev.site.0 + 1) } else { ev.site };
            assert!(ev.site == x || Site(ev.site.0 + 1) == x);
            assert_eq!(st.cfg().particle_count(), 1);
            assert!(st.cfg().occupied(moved_to) || st.cfg().occupied(Site(ev.site.0 + 1)));
        }
        EventKind::Flip => assert!(g.is_boundary(ev.site)),
    }
}

#[test]
fn event_rate_scales_diffusively() {
    // At β = 0 with b ≡ 1/2 the stationary law is Bernoulli(1/2): the mean
    // jump intensity is N²(#bonds/2 + #boundary/2).
    for (d, n) in [(1, 10), (1, 20), (2, 6)] {
        let lat = Lattice::with_default_kernel(d, n).unwrap();
        let g = lat.geometry().clone();
        let dynm = Dynamics::new(lat.clone(), 0.0, Arc::new(ConstantBoundary::new(0.5).unwrap())).unwrap();
        let cfg = sample_profile(lat, |_| 0.5, 2).unwrap();
        let t = 2.0;
        let traj = dynm.simulate(cfg, t, &[], replica_rng(9, 0), SimulationOptions::default()).unwrap();
        let expected = (n * n) as f64 * (g.edges().len() as f64 / 2.0 + g.boundary_sites().len() as f64 / 2.0) * t;
        let got = traj.final_state.total_events() as f64;
        assert!((got / expected - 1.0).abs() < 0.05, "d={d} N={n}: {got} vs {expected}");
    }
}

#[test]
fn zero_horizon_keeps_initial_state() {
    let lat = Lattice::with_default_kernel(1, 4).unwrap();
    let dynm = Dynamics::new(lat.clone(), 0.5, affine(0.8, 0.2)).unwrap();
    let cfg = sample_profile(lat, |_| 0.5, 1).unwrap();
    let traj = dynm.simulate(cfg.clone(), 0.0, &[], replica_rng(1, 1), SimulationOptions::default()).unwrap();
    assert_eq!(traj.snapshots.len(), 1);
    assert!(traj.snapshots[0].ledger.is_zero());
    assert_eq!(traj.snapshots[0].occupancy, cfg.occupancy());
}

#[test]
fn seeds_reproduce_bitwise() {
    let lat = Lattice::with_default_kernel(2, 4).unwrap();
    let dynm = Dynamics::tilted(lat.clone(), 0.8, affine(0.7, 0.1), Arc::new(ConstantTilt::new(vec![0.5, -0.2], 0.3))).unwrap();
    let cfg = sample_profile(lat, |_| 0.4, 5).unwrap();
    let opts = SimulationOptions {
        log_events: true,
        track_occupation: true,
    };
    let a = dynm.simulate(cfg.clone(), 0.3, &[0.1, 0.2], replica_rng(7, 2), opts).unwrap();
    let b = dynm.simulate(cfg, 0.3, &[0.1, 0.2], replica_rng(7, 2), opts).unwrap();
    assert_eq!(a.events, b.events);
    assert_eq!(a.occupation, b.occupation);
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        assert_eq!(x.occupancy, y.occupancy);
        assert_eq!(x.ledger, y.ledger);
    }
}

#[test]
fn bulk_events_conserve_and_flips_move_one_counter() {
    let lat = Lattice::with_default_kernel(2, 3).unwrap();
    let g = lat.geometry().clone();
    let dynm = Dynamics::new(lat.clone(), 1.0, affine(0.9, 0.1)).unwrap();
    let mut st = SimState::new(sample_profile(lat, |_| 0.5, 3).unwrap(), replica_rng(4, 0));
    for _ in 0..5000 {
        let before_n = st.cfg().particle_count() as i64;
        let before_b: i64 = st.ledger().boundary_counts().iter().sum();
        let ev = dynm.step(&mut st, f64::INFINITY).unwrap().unwrap();
        let dn = st.cfg().particle_count() as i64 - before_n;
        let db: i64 = st.ledger().boundary_counts().iter().sum::<i64>() - before_b;
        match ev.kind {
            EventKind::Exchange => assert_eq!((dn, db), (0, 0)),
            EventKind::Flip => {
                assert_eq!(dn.abs(), 1);
                assert_eq!(db, -dn);
                assert!(g.is_boundary(ev.site));
            }
        }
    }
    assert!(st.cfg().field_drift() < 1e-12);
}

#[test]
fn conservation_holds_on_every_snapshot() {
    let lat = Lattice::with_default_kernel(1, 30).unwrap();
    let dynm = Dynamics::tilted(lat.clone(), 0.5, affine(0.8, 0.2), Arc::new(ConstantTilt::new(vec![1.0], -0.5))).unwrap();
    let cfg = sample_profile(lat.clone(), |u| 0.5 - 0.3 * u[0], 8).unwrap();
    let obs: Vec<f64> = (1..20).map(|k| k as f64 * 0.01).collect();
    let traj = dynm.simulate(cfg.clone(), 0.2, &obs, replica_rng(8, 0), SimulationOptions::default()).unwrap();
    for s in &traj.snapshots {
        assert_eq!(s.ledger.conservation_defect(lat.geometry(), cfg.occupancy(), &s.occupancy), None);
    }
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn rejection_and_direct_samplers_agree() {
    let lat = Lattice::with_default_kernel(1, 4).unwrap();
    let tilt: Arc<dyn TiltFields> = Arc::new(ConstantTilt::new(vec![0.8], 0.4));
    let rej = Dynamics::tilted(lat.clone(), 1.5, affine(0.8, 0.2), tilt.clone()).unwrap();
    let dir = rej.clone().with_sampler(Sampler::Direct).unwrap();
    let cfg = sample_profile(lat, |_| 0.5, 1).unwrap();
    let collect = |dynm: &Dynamics, seed: u64| {
        let mut st = SimState::new(cfg.clone(), replica_rng(seed, 0));
        let mut waits = Vec::new();
        let mut flips = 0usize;
        let mut right = 0usize;
        for _ in 0..40_000 {
            let t0 = st.macro_time();
            let ev = dynm.step(&mut st, f64::INFINITY).unwrap().unwrap();
            waits.push(st.macro_time() - t0);
            if ev.kind == EventKind::Flip {
                flips += 1;
            } else if ev.delta == -1 {
                right += 1;
            }
        }
        (waits, flips, right)
    };
    let (wa, fa, ra) = collect(&rej, 1);
    let (wb, fb, rb) = collect(&dir, 2);
    let n = wa.len() as f64;
    // KS critical value at level 0.001 for two equal samples.
    assert!(ks(wa, wb) < 1.95 * (2.0 / n).sqrt());
    for (a, b) in [(fa, fb), (ra, rb)] {
        let (pa, pb) = (a as f64 / n, b as f64 / n);
        let p = 0.5 * (pa + pb);
        let se = (2.0 * p * (1.0 - p) / n).sqrt();
        assert!((pa - pb).abs() < 4.0 * se, "{pa} vs {pb}");
    }
}

#[test]
fn direct_sampler_refuses_time_dependent_tilt() {
    let lat = Lattice::with_default_kernel(1, 3).unwrap();
    let tilt = FnTilt::new(|t, _, _| t, 1.0, |_, _, _| 0.0, 0.0, true);
    let dynm = Dynamics::tilted(lat, 0.0, affine(0.5, 0.5), Arc::new(tilt)).unwrap();
    assert!(dynm.with_sampler(Sampler::Direct).is_err());
}

#[test]
fn girsanov_zero_without_tilt_and_requires_log() {
    let lat = Lattice::with_default_kernel(1, 3).unwrap();
    let dynm = Dynamics::new(lat.clone(), 0.3, affine(0.8, 0.2)).unwrap();
    let cfg = sample_profile(lat, |_| 0.5, 1).unwrap();
    let opts = SimulationOptions {
        log_events: true,
        ..Default::default()
    };
    let traj = dynm.simulate(cfg.clone(), 0.5, &[], replica_rng(1, 0), opts).unwrap();
    assert_eq!(girsanov_log_weight(&dynm, &cfg, traj.events.as_ref(), 0.5).unwrap(), 0.0);
    assert!(matches!(
        girsanov_log_weight(&dynm, &cfg, None, 0.5),
        Err(kac_kawasaki::Error::MissingEventLog)
    ));
}

#[test]
fn girsanov_reweighting_matches_exact_transient() {
    // E_tilted[f(η_T) e^{−log w}] must equal E_untilted[f(η_T)].
    let lat = Lattice::with_default_kernel(1, 2).unwrap();
    let tilt = FnTilt::new(
        |t, u, _| 1.0 + 0.5 * (3.0 * t).sin() * u[0],
        1.5,
        |t, side, _| if matches!(side, kac_kawasaki::lattice_gas::Side::Left) { 0.6 * t } else { -0.4 },
        0.6,
        true,
    );
    let tilted = Dynamics::tilted(lat.clone(), 1.0, affine(0.8, 0.2), Arc::new(tilt)).unwrap();
    let plain = tilted.untilted().unwrap();
    let t_end = 0.5;
    let init = Configuration::from_state_index(lat.clone(), 0b00110).unwrap();
    let mut p0 = DVector::zeros(32);
    p0[init.state_index()] = 1.0;
    let pt = exact_generator(&plain, 0.0).unwrap().transient(&p0, t_end).unwrap();
    let f = |s: usize| (s as u32).count_ones() as f64;
    let exact: f64 = (0..32).map(|s| pt[s] * f(s)).sum();
    let opts = SimulationOptions {
        log_events: true,
        ..Default::default()
    };
    let reps = 4000;
    let mut vals = Vec::with_capacity(reps);
    for r in 0..reps {
        let traj = tilted.simulate(init.clone(), t_end, &[], replica_rng(21, r as u64), opts).unwrap();
        let lw = girsanov_log_weight(&tilted, &init, traj.events.as_ref(), t_end).unwrap();
        let end = Configuration::from_occupancy(lat.clone(), traj.snapshots.last().unwrap().occupancy.clone()).unwrap();
        vals.push(f(end.state_index()) * (-lw).exp());
    }
    let mean = vals.iter().sum::<f64>() / reps as f64;
    let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0)).sqrt();
    let se = sd / (reps as f64).sqrt();
    assert!((mean - exact).abs() < 3.5 * se, "{mean} vs {exact} (se {se})");
}

#[test]
fn event_log_roundtrips() {
    let lat = Lattice::with_default_kernel(2, 3).unwrap();
    let g = lat.geometry().clone();
    let dynm = Dynamics::new(lat.clone(), 0.2, affine(0.6, 0.3)).unwrap();
    let cfg = sample_profile(lat, |_| 0.5, 1).unwrap();
    let opts = SimulationOptions {
        log_events: true,
        ..Default::default()
    };
    let traj = dynm.simulate(cfg, 0.05, &[], replica_rng(5, 0), opts).unwrap();
    let log = traj.events.unwrap();
    assert!(!log.is_empty());
    let mut csv = Vec::new();
    log.write_csv(&g, &mut csv).unwrap();
    assert_eq!(EventLog::read_csv(&g, csv.as_slice()).unwrap(), log);
    let mut bin = Vec::new();
    log.write_binary(&mut bin).unwrap();
    assert_eq!(EventLog::read_binary(&mut bin.as_slice()).unwrap(), log);
}

#[test]
fn rate_bound_violation_is_reported() {
    let lat = Lattice::with_default_kernel(1, 3).unwrap();
    // Declared bound 0.1 but actual |V| = 5.
    let tilt = FnTilt::new(|_, _, _| 5.0, 0.1, |_, _, _| 0.0, 0.0, true);
    let dynm = Dynamics::tilted(lat.clone(), 0.0, affine(0.5, 0.5), Arc::new(tilt)).unwrap();
    let cfg = sample_profile(lat, |_| 0.5, 1).unwrap();
    let res = dynm.simulate(cfg, 1.0, &[], replica_rng(1, 0), SimulationOptions::default());
    assert!(matches!(res, Err(kac_kawasaki::Error::RateBound { .. })));
}
