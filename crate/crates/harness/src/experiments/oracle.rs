use std::sync::Arc;

use anyhow::{ensure, Result};
use kac_kawasaki::dynamics::{
    detailed_balance_residual, empirical_occupation, exact_generator, girsanov_log_weight, product_bernoulli,
    total_variation, ConstantTilt, Dynamics, SimulationOptions, TiltFields, MAX_ORACLE_STATES,
};
use kac_kawasaki::lattice_gas::Configuration;

use crate::config::{BoundaryKind, ExperimentConfig, TiltKind};
use crate::output::{num, replica_stream, stream_id, Check, ExperimentOutput, Table};
use crate::sim::{initial_configuration, mean_and_se, replicas, simulate_checked};

/// Sample mean and standard error of `exp(−log w)` under the tilted law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanOne {
    pub n: usize,
    pub replicas: usize,
    pub mean: f64,
    pub std_error: f64,
}

impl MeanOne {
    pub fn z(&self) -> f64 {
        (self.mean - 1.0) / self.std_error
    }
}

/// Girsanov mean-one statistic at `cfg.girsanov_n`, seeded with `seed + 1`.
pub fn girsanov_mean_one(cfg: &ExperimentConfig, tilt: Arc<dyn TiltFields>, out: &mut ExperimentOutput) -> Result<MeanOne> {
    let n = cfg.girsanov_n;
    let lattice = cfg.lattice(n)?;
    let dynamics = Dynamics::tilted(lattice.clone(), cfg.beta, cfg.boundary_profile()?, tilt)?;
    let master = cfg.seed.wrapping_add(1);
    let t_end = cfg.girsanov_t;
    let opts = SimulationOptions {
        log_events: true,
        ..Default::default()
    };
    let values = replicas(cfg.girsanov_replicas, |k| {
        let mut rng = replica_stream(master, n, k);
        let init = initial_configuration(cfg, lattice.clone(), None, &mut rng)?;
        let traj = simulate_checked(&dynamics, init.clone(), t_end, &[t_end / 2.0], rng, opts)?;
        let lw = girsanov_log_weight(&dynamics, &init, traj.events.as_ref(), t_end)?;
        Ok((-lw).exp())
    })?;
    out.seeds
        .extend((0..cfg.girsanov_replicas).map(|k| (n, k, stream_id(n, k))));
    let (mean, std_error) = mean_and_se(&values);
    Ok(MeanOne {
        n,
        replicas: values.len(),
        mean,
        std_error,
    })
}

pub(crate) fn mean_one_table(m: &MeanOne, t_end: f64) -> Table {
    let mut t = Table::new("girsanov", &["n", "replicas", "t_end[macro time]", "mean", "std_error", "z_score"]);
    t.push(vec![m.n.to_string(), m.replicas.to_string(), num(t_end), num(m.mean), num(m.std_error), num(m.z())]);
    t
}

/// Exact-generator comparisons on a tiny lattice.
pub fn run_oracle_suite(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let n = cfg.n.first().copied().unwrap_or(2);
    let lattice = cfg.lattice(n)?;
    let sites = lattice.geometry().site_count();
    ensure!(
        sites < usize::BITS as usize && (1usize << sites) <= MAX_ORACLE_STATES,
        "the oracle needs a lattice with at most {MAX_ORACLE_STATES} states; d={} N={n} has 2^{sites}",
        cfg.d
    );
    let mut out = ExperimentOutput::default();
    let mut table = Table::new(
        "oracle",
        &["beta", "states", "events", "tv_distance", "detailed_balance_residual", "product_measure_error"],
    );
    for (i, &beta) in cfg.oracle_betas.iter().enumerate() {
        let dynamics = Dynamics::new(lattice.clone(), beta, cfg.boundary_profile()?)?;
        let gen = exact_generator(&dynamics, 0.0)?;
        let pi = gen.stationary()?;
        let emp = empirical_occupation(
            &dynamics,
            Configuration::empty(lattice.clone()),
            cfg.oracle_events,
            replica_stream(cfg.seed, n, i),
        )?;
        out.seeds.push((n, i, stream_id(n, i)));
        let tv = total_variation(&emp, pi.as_slice());
        let db = detailed_balance_residual(lattice.clone(), beta)?;
        let product = (beta == 0.0 && cfg.boundary == BoundaryKind::Constant)
            .then(|| (&pi - product_bernoulli(sites, cfg.boundary_left)).amax());
        table.push(vec![
            num(beta),
            gen.states().to_string(),
            cfg.oracle_events.to_string(),
            num(tv),
            num(db),
            product.map_or(String::new(), num),
        ]);
        out.checks.push(Check::new(
            format!("oracle_tv_beta_{beta}"),
            tv <= cfg.max_tv,
            format!("TV {tv:.3e} (limit {:.1e})", cfg.max_tv),
        ));
        out.checks.push(Check::new(
            format!("detailed_balance_beta_{beta}"),
            db <= 1e-12,
            format!("residual {db:.3e}"),
        ));
        if let Some(p) = product {
            out.checks.push(Check::new("product_measure", p < 1e-10, format!("max error {p:.3e}")));
        }
    }
    out.tables.push(table);
    let tilt: Arc<dyn TiltFields> = match cfg.tilt {
        TiltKind::None => {
            let mut v = vec![0.0; cfg.d];
            v[0] = 0.5;
            Arc::new(ConstantTilt::new(v, 0.0))
        }
        _ => cfg.tilt_fields(),
    };
    let m = girsanov_mean_one(cfg, tilt, &mut out)?;
    out.tables.push(mean_one_table(&m, cfg.girsanov_t));
    out.checks.push(Check::new(
        "girsanov_mean_one",
        m.z().abs() <= 3.0,
        format!("mean {:.5} ± {:.5} (z = {:.2})", m.mean, m.std_error, m.z()),
    ));
    Ok(out)
}
