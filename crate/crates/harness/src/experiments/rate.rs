use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use anyhow::Result;
use kac_kawasaki::dynamics::TiltFields;
use kac_kawasaki::hydrodynamics::{evolve, read_path_pair, FaceField, HydroSolver, PathPair};
use kac_kawasaki::rate_functionals::{
    contraction_check, energy_q_closed, rate_i_t, rate_j_t, Certificate, ContractionConfig, ContractionReport,
    GateConfig, RateReport, RateValue,
};

use crate::config::{ExperimentConfig, RatePair, TiltKind};
use crate::output::{num, Check, ExperimentOutput, Table};
use crate::sim::{grid, initial_grid_function, pde_config};

/// The evaluated pair together with the untilted solver of the configuration.
pub struct RateInputs {
    pub pair: PathPair,
    pub solver: HydroSolver,
}

/// PDE-generated pair of the configured kind, or a stored one from `rate_input`.
/// The violating pair adds `t ∇φ`, `φ = cos(πu₁/2)`, to the hydrodynamic current.
pub fn rate_inputs(cfg: &ExperimentConfig) -> Result<RateInputs> {
    if let Some(dir) = &cfg.rate_input {
        let pair = read_path_pair(Path::new(dir))?;
        let mut base = pde_config(cfg, &pair.grid, None)?;
        base.grid = pair.grid.clone();
        return Ok(RateInputs {
            solver: HydroSolver::new(base)?,
            pair,
        });
    }
    let g = grid(cfg)?;
    let base = pde_config(cfg, &g, None)?.with_horizon(cfg.t_end, cfg.observations);
    let rho0 = initial_grid_function(cfg, &g)?;
    let pair = match cfg.rate_pair {
        RatePair::Hydro => evolve(&rho0, &base)?.path,
        RatePair::Tilted => evolve(&rho0, &base.clone().with_tilt(cfg.tilt_fields()))?.path,
        RatePair::Violating => {
            let mut p = evolve(&rho0, &base)?.path;
            let bump = FaceField::from_fn(g.clone(), |k, u| if k == 0 { -FRAC_PI_2 * (FRAC_PI_2 * u[0]).sin() } else { 0.0 });
            let t0 = p.times[0];
            for (w, &t) in p.current.iter_mut().zip(&p.times) {
                w.axpy(t - t0, &bump);
            }
            p
        }
    };
    Ok(RateInputs {
        solver: HydroSolver::new(base)?,
        pair,
    })
}

/// `½ ∫ ⟨σ(ρ_t) V_t, V_t⟩ dt` with trapezoidal time weights.
pub fn quadratic_tilt_cost(solver: &HydroSolver, pair: &PathPair, tilt: &dyn TiltFields) -> f64 {
    let w = pair.trapezoid_weights();
    0.5 * pair
        .rho
        .iter()
        .zip(&w)
        .zip(&pair.times)
        .map(|((r, w), &t)| {
            let v = FaceField::from_fn(pair.grid.clone(), |k, u| tilt.v(t, u, k));
            w * v.weighted_dot(&solver.face_mobility(&r.values), &v)
        })
        .sum::<f64>()
}

pub fn certificate_kind(c: &Certificate) -> &'static str {
    match c {
        Certificate::Finite => "finite",
        Certificate::Continuity { .. } => "continuity",
        Certificate::ExcludedMass { .. } => "excluded_mass",
        Certificate::InfiniteEnergy { .. } => "infinite_energy",
        Certificate::OutOfRange { .. } => "out_of_range",
    }
}

/// Values of `𝒬`, `𝒥_T`, `ℐ_T` and the contraction report.
pub struct RateEvaluation {
    pub energy: RateValue,
    pub current: RateValue,
    pub density: RateValue,
    pub contraction: Option<ContractionReport>,
    pub reference: Option<f64>,
    pub scale: f64,
}

pub fn evaluate_rates(cfg: &ExperimentConfig, inputs: &RateInputs) -> Result<RateEvaluation> {
    let (pair, solver) = (&inputs.pair, &inputs.solver);
    let energy = energy_q_closed(pair);
    let current = rate_j_t(pair, solver, &GateConfig::default())?.rate;
    let density = rate_i_t(pair, solver)?.rate;
    let contraction = if current.is_finite() && density.is_finite() && cfg.contraction_samples > 0 {
        let c = ContractionConfig {
            samples: cfg.contraction_samples,
            seed: cfg.seed,
            ..Default::default()
        };
        Some(contraction_check(pair, solver, &c)?)
    } else {
        None
    };
    let reference = (cfg.rate_pair == RatePair::Tilted && cfg.rate_input.is_none() && cfg.tilt != TiltKind::None)
        .then(|| quadratic_tilt_cost(solver, pair, cfg.tilt_fields().as_ref()));
    Ok(RateEvaluation {
        energy,
        current,
        density,
        contraction,
        reference,
        scale: pair.discretisation_scale(),
    })
}

pub fn run_rate_eval(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let inputs = rate_inputs(cfg)?;
    let ev = evaluate_rates(cfg, &inputs)?;
    let mut out = ExperimentOutput::default();
    let mut table = Table::new(
        "rates",
        &["functional", "value", "infinite", "certificate", "reference", "relative_error", "discretisation_scale"],
    );
    let rel = |v: f64| ev.reference.map(|r| (v - r).abs() / r);
    for (name, v) in [("Q", &ev.energy), ("J_T", &ev.current), ("I_T", &ev.density)] {
        let reference = if name == "Q" { None } else { ev.reference };
        table.push(vec![
            name.into(),
            num(v.value),
            (!v.is_finite()).to_string(),
            certificate_kind(&v.certificate).into(),
            reference.map_or(String::new(), num),
            if name == "Q" { String::new() } else { rel(v.value).map_or(String::new(), num) },
            num(ev.scale),
        ]);
        let report = RateReport::new(name, &inputs.pair, v.clone())
            .with("cells", inputs.pair.grid.cell_count() as f64)
            .with("observations", inputs.pair.len() as f64)
            .with("discretisation_scale", ev.scale);
        out.documents.push((format!("rate_{}.txt", name.to_lowercase()), report.render()));
    }
    if let Some(c) = &ev.contraction {
        let mut t = Table::new("contraction", &["sample", "amplitude", "frequency", "rate_j", "margin"]);
        for (k, s) in c.samples.iter().enumerate() {
            t.push(vec![k.to_string(), num(s.amplitude), num(s.frequency), num(s.rate_j), num(s.margin)]);
        }
        out.tables.push(t);
        out.checks.push(Check::new(
            "contraction_equality",
            c.equality_holds(),
            format!("gap {:.3e} (tolerance {:.3e})", c.equality_gap, c.tolerance),
        ));
        out.checks.push(Check::new(
            "contraction_inequalities",
            c.inequalities_hold(),
            format!("{} samples, min margin {:.3e}", c.samples.len(), c.min_margin()),
        ));
    }
    out.tables.insert(0, table);
    match (cfg.rate_pair, cfg.rate_input.is_some()) {
        (_, true) => {}
        (RatePair::Hydro, false) => {
            for (name, v) in [("J_T", &ev.current), ("I_T", &ev.density)] {
                out.checks.push(Check::new(
                    format!("{name}_vanishes"),
                    v.is_finite() && v.value <= ev.scale,
                    format!("{:.3e} (scale h² + Δτ = {:.3e})", v.value, ev.scale),
                ));
            }
        }
        (RatePair::Tilted, false) => {
            if let Some(r) = ev.reference {
                let mut targets = vec![("J_T", &ev.current)];
                if cfg.tilt == TiltKind::Gradient {
                    targets.push(("I_T", &ev.density));
                }
                for (name, v) in targets {
                    let e = (v.value - r).abs() / r;
                    out.checks.push(Check::new(
                        format!("{name}_quadratic"),
                        e <= cfg.rate_tol,
                        format!("{:.5e} vs {r:.5e} ({:.3}%)", v.value, 100.0 * e),
                    ));
                }
            }
        }
        (RatePair::Violating, false) => out.checks.push(Check::new(
            "J_T_infinite",
            !ev.current.is_finite(),
            format!("certificate: {}", ev.current.certificate),
        )),
    }
    Ok(out)
}
