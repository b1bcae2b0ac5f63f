use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::common::{GateConfig, RateValue};
use super::current::rate_j_t_with_rate;
use super::density::{free_current, rate_i_t};
use crate::error::{domain, Result};
use crate::hydrodynamics::{FaceField, Grid, HydroSolver, PathPair};

/// One perturbed current `W' = W^F + a(t) P`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationSample {
    pub amplitude: f64,
    pub frequency: f64,
    pub rate_j: f64,
    /// `𝒥_T(W', π) − ℐ_T(π)`.
    pub margin: f64,
}

/// Outcome of [`contraction_check`].
#[derive(Clone, Debug)]
pub struct ContractionReport {
    pub rate_i: RateValue,
    /// `𝒥_T(W^F, π)`.
    pub rate_j_at_wf: RateValue,
    pub equality_gap: f64,
    pub tolerance: f64,
    pub samples: Vec<PerturbationSample>,
    /// Gate residual of `W^F`.
    pub gate_residual: f64,
}

impl ContractionReport {
    pub fn equality_holds(&self) -> bool {
        self.equality_gap <= self.tolerance
    }

    pub fn min_margin(&self) -> f64 {
        self.samples.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn inequalities_hold(&self) -> bool {
        self.samples.iter().all(|s| s.margin >= -self.tolerance)
    }

    pub fn passed(&self) -> bool {
        self.rate_i.is_finite() && self.equality_holds() && self.inequalities_hold()
    }
}

/// Settings of [`contraction_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionConfig {
    pub samples: usize,
    pub seed: u64,
    /// Relative tolerance on the equality branch and the inequalities.
    pub relative_tolerance: f64,
    pub gate: GateConfig,
}

impl Default for ContractionConfig {
    fn default() -> Self {
        ContractionConfig {
            samples: 20,
            seed: 0,
            relative_tolerance: 1e-3,
            gate: GateConfig::default(),
        }
    }
}

/// Exactly divergence-free staggered field: the discrete curl of a node
/// potential in the `(u1, u2)` plane for `d ≥ 2`, a uniform field for `d = 1`.
pub fn divergence_free_field(g: &Grid, rng: &mut impl Rng) -> FaceField {
    let mut p = FaceField::zeros(g.clone());
    if g.dim() == 1 {
        let c: f64 = rng.random_range(-1.0..1.0);
        p.comps[0].iter_mut().for_each(|v| *v = c);
        return p;
    }
    let modes: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(0..3) as f64,
                rng.random_range(0..3) as f64,
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let psi = |u1: f64, x: f64| -> f64 {
        modes
            .iter()
            .map(|&(a, m, n, ph)| a * (m * PI * (u1 + 1.0) / 2.0 + ph).cos() * (2.0 * PI * n * x + ph).cos())
            .sum()
    };
    let (m1, mt) = (g.m1(), g.transverse_count());
    let (h1, h2) = (g.h(0), g.h(1));
    let node = |f1: usize, j: usize| {
        let x = g.transverse_coords(j)[0] as f64 * h2;
        psi(-1.0 + f1 as f64 * h1, x)
    };
    for f1 in 0..=m1 {
        for j in 0..mt {
            let up = g.transverse_shift(j, 1, 1);
            p.comps[0][f1 * mt + j] = (node(f1, up) - node(f1, j)) / h2;
        }
    }
    for c in 0..g.cell_count() {
        let (i1, j) = g.split(c);
        let up = g.transverse_shift(j, 1, 1);
        p.comps[1][c] = -(node(i1 + 1, up) - node(i1, up)) / h1;
    }
    p
}

/// Builds `W^F` from the recovered potential, checks `𝒥_T(W^F, π) = ℐ_T(π)`
/// and `𝒥_T(W', π) ≥ ℐ_T(π)` for `W' = W^F + a(t)P` with `P` divergence-free
/// and `a(0) = 0`.
///
/// `Ẇ^F` and `Ẇ'` are passed to the current functional exactly rather than
/// differenced.
pub fn contraction_check(pair: &PathPair, solver: &HydroSolver, cfg: &ContractionConfig) -> Result<ContractionReport> {
    let g = &pair.grid;
    let density = rate_i_t(pair, solver)?;
    let Some(potential) = density.potential else {
        return domain(format!("density rate is infinite: {}", density.rate.certificate));
    };
    let beta = solver.config().beta;
    let sigma: Vec<FaceField> = pair.rho.iter().map(|r| solver.face_mobility(&r.values)).collect();
    let x: Vec<FaceField> = pair
        .rho
        .iter()
        .zip(&sigma)
        .zip(&potential.gradient)
        .map(|((rho, s), grad)| {
            let mut j = free_current(solver, &rho.values, beta);
            for (jc, (sc, gc)) in j.comps.iter_mut().zip(s.comps.iter().zip(&grad.comps)) {
                for (v, (a, b)) in jc.iter_mut().zip(sc.iter().zip(gc)) {
                    *v += a * b;
                }
            }
            j
        })
        .collect();
    let mut w = Vec::with_capacity(pair.len());
    w.push(FaceField::zeros(g.clone()));
    for k in 1..pair.len() {
        let dt = pair.times[k] - pair.times[k - 1];
        let mut next = w[k - 1].clone();
        next.axpy(0.5 * dt, &x[k - 1]);
        next.axpy(0.5 * dt, &x[k]);
        w.push(next);
    }
    let mut wf = pair.clone();
    wf.current = w;
    let base = rate_j_t_with_rate(&wf, &x, solver, &cfg.gate)?;
    let i_val = density.rate.value;
    let scale = i_val.abs().max(1e-12);
    let tolerance = cfg.relative_tolerance * scale;
    let equality_gap = (base.rate.value - i_val).abs();

    let t0 = pair.times[0];
    let horizon = pair.t_end() - t0;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        let p = divergence_free_field(g, &mut rng);
        let amplitude = rng.random_range(0.05..1.0) * scale.sqrt() / p.sup_norm().max(1e-12);
        let frequency = rng.random_range(0.5..3.0) * PI / horizon;
        let mut perturbed = wf.clone();
        let mut rate = Vec::with_capacity(pair.len());
        for k in 0..pair.len() {
            let t = pair.times[k] - t0;
            perturbed.current[k].axpy(amplitude * (frequency * t).sin(), &p);
            let mut r = x[k].clone();
            r.axpy(amplitude * frequency * (frequency * t).cos(), &p);
            rate.push(r);
        }
        let out = rate_j_t_with_rate(&perturbed, &rate, solver, &cfg.gate)?;
        samples.push(PerturbationSample {
            amplitude,
            frequency,
            rate_j: out.rate.value,
            margin: out.rate.value - i_val,
        });
    }
    Ok(ContractionReport {
        rate_i: density.rate,
        rate_j_at_wf: base.rate,
        equality_gap,
        tolerance,
        samples,
        gate_residual: base.gate.max_residual,
    })
}
