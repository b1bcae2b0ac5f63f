use std::fs;
use std::path::PathBuf;

use kac_harness::config::{ExperimentConfig, ExperimentKind, InitialKind, RatePair, TiltKind};
use kac_harness::experiments::{run_experiment, run_oracle_suite, run_rate_eval};
use kac_harness::output::{persist, replica_stream, stream_id, Table};
use kac_harness::sim::{mean_and_se, observation_times, snapshots_checked};
use proptest::prelude::*;
use rand::Rng;
use sha2::{Digest, Sha256};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kac-harness-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn small_hydro() -> ExperimentConfig {
    ExperimentConfig::from_toml(
        "experiment = \"hydro\"\nn = [10, 20]\nbeta = 0.5\ninitial = \"smooth\"\ninitial_bump = 0.1\n\
         t_end = 0.05\nsample_times = [0.025, 0.05]\nreplicas = 3\nmesh = [40]\nseed = 5\n",
    )
    .unwrap()
}

#[test]
fn defaults_parse_from_an_empty_file() {
    let cfg = ExperimentConfig::from_toml("").unwrap();
    assert_eq!(cfg, ExperimentConfig::default());
    assert_eq!(cfg.d, 1);
    assert_eq!(cfg.initial, InitialKind::Affine);
    assert_eq!(cfg.tilt, TiltKind::None);
    assert_eq!(cfg.rate_pair, RatePair::Hydro);
}

#[test]
fn single_n_and_lists_are_both_accepted() {
    assert_eq!(ExperimentConfig::from_toml("n = 7").unwrap().n, vec![7]);
    assert_eq!(ExperimentConfig::from_toml("n = [7, 9]").unwrap().n, vec![7, 9]);
}

#[test]
fn invalid_configs_are_rejected() {
    for text in [
        "n = [20, 10]",
        "n = [10, 10]",
        "unknown_key = 1",
        "d = 2\nmesh = [10]",
        "kernel = \"nonexistent\"",
        "boundary_left = 1.5",
        "mollifier_eps = 0.0",
        "experiment = \"bogus\"",
    ] {
        assert!(ExperimentConfig::from_toml(text).is_err(), "accepted: {text:?}");
    }
}

#[test]
fn config_round_trips_through_text() {
    let cfg = small_hydro();
    let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(cfg, back);
    assert_eq!(cfg.digest(), back.digest());
    let mut other = cfg.clone();
    other.seed += 1;
    assert_ne!(cfg.digest(), other.digest());
}

#[test]
fn experiment_kinds_parse_by_name() {
    for k in [
        ExperimentKind::Oracle,
        ExperimentKind::Hydro,
        ExperimentKind::Current,
        ExperimentKind::Tilt,
        ExperimentKind::Rate,
        ExperimentKind::Stationary,
    ] {
        assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
    }
}

#[test]
fn replica_streams_are_independent_of_scheduling() {
    let a: Vec<u64> = (0..4).map(|k| replica_stream(9, 50, k).random()).collect();
    let b: Vec<u64> = (0..4).rev().map(|k| replica_stream(9, 50, k).random()).collect::<Vec<_>>().into_iter().rev().collect();
    assert_eq!(a, b);
    assert_ne!(a[0], a[1]);
    assert_ne!(replica_stream(9, 50, 0).random::<u64>(), replica_stream(9, 51, 0).random::<u64>());
    assert_eq!(stream_id(3, 4), (3 << 32) | 4);
}

#[test]
fn hydro_outputs_are_byte_identical_across_runs() {
    let cfg = small_hydro();
    let (d1, d2) = (scratch("repro-a"), scratch("repro-b"));
    for d in [&d1, &d2] {
        let out = run_experiment(ExperimentKind::Hydro, &cfg).unwrap();
        persist(ExperimentKind::Hydro, &cfg, &out, 0.0, d).unwrap();
    }
    for name in ["hydro_replicas.csv", "hydro_summary.csv", "hydro_profiles.csv", "config.toml"] {
        let (a, b) = (fs::read(d1.join(name)).unwrap(), fs::read(d2.join(name)).unwrap());
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name} differs");
    }
    let _ = fs::remove_dir_all(&d1);
    let _ = fs::remove_dir_all(&d2);
}

#[test]
fn zero_horizon_distance_is_initial_sampling_noise() {
    let mut cfg = small_hydro();
    cfg.sample_times = vec![];
    cfg.t_end = 0.0;
    cfg.n = vec![20];
    cfg.replicas = 4;
    let out = run_experiment(ExperimentKind::Hydro, &cfg).unwrap();
    let t = out.table("hydro_summary").unwrap();
    assert_eq!(t.rows.len(), 1);
    let l1: f64 = t.rows[0][5].parse().unwrap();
    assert!(l1 > 0.0 && l1 < 0.5, "{l1}");
}

#[test]
fn manifest_lists_every_output_with_its_checksum() {
    let cfg = small_hydro();
    let dir = scratch("manifest");
    let out = run_experiment(ExperimentKind::Hydro, &cfg).unwrap();
    let record = persist(ExperimentKind::Hydro, &cfg, &out, 1.5, &dir).unwrap();
    let manifest = fs::read_to_string(dir.join("manifest")).unwrap();
    let mut listed = 0;
    for line in manifest.lines().filter(|l| !l.starts_with('#')) {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bytes = fs::read(dir.join(parts[0])).unwrap();
        assert_eq!(hex::encode(Sha256::digest(&bytes)), parts[1], "{}", parts[0]);
        assert_eq!(bytes.len().to_string(), parts[2]);
        listed += 1;
    }
    let on_disk = fs::read_dir(&dir).unwrap().count();
    assert_eq!(listed + 1, on_disk, "everything but the manifest is listed");
    assert_eq!(record.seeds.len(), 2 * cfg.replicas);
    assert_eq!(record.config_sha256, cfg.digest());
    let text = fs::read_to_string(dir.join("run_record.toml")).unwrap();
    assert!(text.contains("experiment = \"hydro\""));
    assert!(text.contains(&cfg.digest()));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn csv_headers_name_columns_and_units() {
    let cfg = small_hydro();
    let out = run_experiment(ExperimentKind::Hydro, &cfg).unwrap();
    for t in &out.tables {
        let csv = String::from_utf8(t.to_csv().unwrap()).unwrap();
        let header = csv.lines().next().unwrap();
        assert_eq!(header.split(',').count(), t.header.len());
        if t.header.iter().any(|h| h.starts_with("t")) {
            assert!(header.contains("[macro time]"), "{header}");
        }
    }
}

#[test]
fn simulations_are_conservation_checked() {
    let before = snapshots_checked();
    run_experiment(ExperimentKind::Hydro, &small_hydro()).unwrap();
    assert!(snapshots_checked() > before);
}

#[test]
fn oracle_rejects_large_lattices() {
    let cfg = ExperimentConfig::from_toml("n = 40").unwrap();
    assert!(run_oracle_suite(&cfg).is_err());
}

#[test]
fn oracle_product_measure_at_equal_reservoirs() {
    let cfg = ExperimentConfig::from_toml(
        "n = 2\nboundary = \"constant\"\nboundary_left = 0.3\noracle_betas = [0.0]\noracle_events = 200000\n\
         max_tv = 0.02\ngirsanov_replicas = 500\n",
    )
    .unwrap();
    let out = run_oracle_suite(&cfg).unwrap();
    let product = out.checks.iter().find(|c| c.name == "product_measure").unwrap();
    assert!(product.passed, "{}", product.detail);
    assert!(out.passed(), "{:?}", out.checks);
}

#[test]
fn symmetric_reservoirs_carry_no_mean_current() {
    let cfg = ExperimentConfig::from_toml(
        "n = 20\nboundary = \"constant\"\nboundary_left = 0.4\nt_end = 1.0\nburn_in = 0.1\nreplicas = 8\nmesh = [40]\n",
    )
    .unwrap();
    let out = run_experiment(ExperimentKind::Current, &cfg).unwrap();
    assert!(out.passed(), "{:?}", out.checks);
}

#[test]
fn rate_eval_reports_infinite_sentinel_for_violating_pairs() {
    let cfg = ExperimentConfig::from_toml(
        "rate_pair = \"violating\"\nmesh = [24]\nt_end = 0.1\nobservations = 20\ninitial = \"smooth\"\n",
    )
    .unwrap();
    let out = run_rate_eval(&cfg).unwrap();
    assert!(out.passed(), "{:?}", out.checks);
    let t = out.table("rates").unwrap();
    let j = t.rows.iter().find(|r| r[0] == "J_T").unwrap();
    assert_eq!(j[2], "true");
    assert_eq!(j[3], "continuity");
    let doc = &out.documents.iter().find(|(n, _)| n == "rate_j_t.txt").unwrap().1;
    assert!(doc.contains("kind = continuity"));
}

#[test]
fn rate_eval_on_hydro_pair_is_below_scheme_tolerance() {
    let cfg = ExperimentConfig::from_toml(
        "rate_pair = \"hydro\"\nbeta = 0.5\nmesh = [24]\nt_end = 0.1\nobservations = 30\ninitial = \"smooth\"\n\
         initial_bump = 0.2\ncontraction_samples = 4\n",
    )
    .unwrap();
    let out = run_rate_eval(&cfg).unwrap();
    assert!(out.passed(), "{:?}", out.checks);
}

#[test]
fn tilt_without_tilt_fails_its_check() {
    let cfg = ExperimentConfig::from_toml("n = 10\nmesh = [20]").unwrap();
    let out = run_experiment(ExperimentKind::Tilt, &cfg).unwrap();
    assert!(!out.passed());
}

#[test]
fn table_rows_match_the_header() {
    let mut t = Table::new("x", &["a", "b"]);
    t.push(vec!["1".into(), "2".into()]);
    assert_eq!(String::from_utf8(t.to_csv().unwrap()).unwrap(), "a,b\n1,2\n");
}

proptest! {
    #[test]
    fn observation_grid_is_sorted_and_contains_extras(m in 1usize..20, extra in proptest::collection::vec(0.0f64..1.0, 0..5)) {
        let t = observation_times(1.0, m, &extra);
        prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
        prop_assert!((t.last().unwrap() - 1.0).abs() < 1e-12);
        for e in extra.iter().filter(|e| **e > 0.0) {
            prop_assert!(t.iter().any(|x| (x - e).abs() < 1e-12));
        }
    }

    #[test]
    fn standard_error_scales_with_spread(xs in proptest::collection::vec(-5.0f64..5.0, 2..40), c in -3.0f64..3.0) {
        let (m, s) = mean_and_se(&xs);
        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        let (m2, s2) = mean_and_se(&shifted);
        prop_assert!((m2 - m - c).abs() < 1e-9);
        prop_assert!((s2 - s).abs() < 1e-9);
    }
}
