use nalgebra::{DMatrix, DVector};

use super::common::{Certificate, RateValue, SIGMA_FLOOR};
use super::energy::energy_q_closed;
use super::family::{ConfinedBasis, TestFamily};
use crate::error::{Error, Result};
use crate::hydrodynamics::{FaceField, Grid, HydroSolver, PathPair};
use crate::numerics::conjugate_gradient;

const CG_TOL: f64 = 1e-10;
const RANGE_SLACK: f64 = 1e-9;

/// Recovered potential `F` of the representation `∂ρ = Δρ − β∇·(σ∇(J⋆ρ)) − ∇·(σ∇F)`.
#[derive(Clone, Debug)]
pub struct PotentialField {
    pub times: Vec<f64>,
    /// Cell values per observation time; `F = 0` on `Γ`.
    pub f: Vec<Vec<f64>>,
    /// Face gradients with zero Dirichlet data.
    pub gradient: Vec<FaceField>,
    /// Relative CG residual per slice.
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
}

/// Output of [`rate_i_t`].
#[derive(Clone, Debug)]
pub struct DensityRate {
    pub rate: RateValue,
    pub potential: Option<PotentialField>,
    pub energy: RateValue,
}

/// `∂_t ρ + ∇_h·(−∇_h ρ + β σ ∇(J⋆ρ))` per slice: the source of the elliptic problem.
pub(crate) fn density_sources(pair: &PathPair, solver: &HydroSolver) -> Vec<Vec<f64>> {
    let g = &pair.grid;
    let beta = solver.config().beta;
    let rate = pair.rho_rate();
    pair.rho
        .iter()
        .zip(rate)
        .map(|(rho, mut src)| {
            let j0 = free_current(solver, &rho.values, beta);
            for (s, d) in src.iter_mut().zip(g.divergence(&j0)) {
                *s += d;
            }
            src
        })
        .collect()
}

/// `−∇_h ρ + β σ ∇(J⋆ρ)` without tilt.
pub(crate) fn free_current(solver: &HydroSolver, rho: &[f64], beta: f64) -> FaceField {
    let mut j = solver.density_gradient(rho).scaled(-1.0);
    if beta != 0.0 {
        let sigma = solver.face_mobility(rho);
        let dphi = solver.potential_gradient(rho);
        for (jc, (sc, pc)) in j.comps.iter_mut().zip(sigma.comps.iter().zip(&dphi.comps)) {
            for (x, (s, p)) in jc.iter_mut().zip(sc.iter().zip(pc)) {
                *x += beta * s * p;
            }
        }
    }
    j
}

fn zero_gradient(g: &Grid, f: &[f64]) -> FaceField {
    let zeros = vec![0.0; g.transverse_count()];
    g.face_gradient(f, &zeros, &zeros)
}

fn operator_diagonal(g: &Grid, sigma: &FaceField) -> Vec<f64> {
    let (m1, mt) = (g.m1(), g.transverse_count());
    let h1 = g.h(0);
    let mut diag = vec![0.0; g.cell_count()];
    for (c, d) in diag.iter_mut().enumerate() {
        let (i1, j) = g.split(c);
        let lo = sigma.comps[0][i1 * mt + j] / (h1 * if i1 == 0 { 0.5 * h1 } else { h1 });
        let hi = sigma.comps[0][(i1 + 1) * mt + j] / (h1 * if i1 + 1 == m1 { 0.5 * h1 } else { h1 });
        *d = lo + hi;
        for k in 1..g.dim() {
            let hk = g.h(k);
            let down = g.cell(i1, g.transverse_shift(j, k, -1));
            *d += (sigma.comps[k][c] + sigma.comps[k][down]) / (hk * hk);
        }
    }
    diag
}

fn out_of_range(pair: &PathPair) -> Option<Certificate> {
    for (t, rho) in pair.times.iter().zip(&pair.rho) {
        if let Some(v) = rho.values.iter().find(|v| !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(*v)) {
            return Some(Certificate::OutOfRange { time: *t, value: *v });
        }
    }
    None
}

/// `ℐ_T(π) = ½ ∫⟨σ(ρ), ∇F·∇F⟩` where, slice by slice, `F` solves
/// `−∇_h·(σ ∇_h F) = ∂_t ρ − Δ_h ρ + β ∇_h·(σ ∇(J⋆ρ))` with `F = 0` on `Γ`.
///
/// Face mobilities are clamped below at `σ_floor` in the operator. Only the
/// density path of `pair` is used.
pub fn rate_i_t(pair: &PathPair, solver: &HydroSolver) -> Result<DensityRate> {
    let g = &pair.grid;
    g.check_same(solver.grid())?;
    let energy = energy_q_closed(pair);
    if let Some(cert) = out_of_range(pair) {
        return Ok(DensityRate {
            rate: RateValue::infinite(cert),
            potential: None,
            energy,
        });
    }
    if !energy.is_finite() {
        return Ok(DensityRate {
            rate: RateValue::infinite(energy.certificate.clone()),
            potential: None,
            energy,
        });
    }
    let sources = density_sources(pair, solver);
    let weights = pair.trapezoid_weights();
    let n = g.cell_count();
    let mut field = PotentialField {
        times: pair.times.clone(),
        f: Vec::with_capacity(pair.len()),
        gradient: Vec::with_capacity(pair.len()),
        residuals: Vec::with_capacity(pair.len()),
        iterations: Vec::with_capacity(pair.len()),
    };
    let mut total = 0.0;
    let mut clamped = 0usize;
    let mut guess = vec![0.0; n];
    for (k, src) in sources.iter().enumerate() {
        let raw = solver.face_mobility(&pair.rho[k].values);
        let mut sigma = raw.clone();
        for v in sigma.comps.iter_mut().flatten() {
            if *v < SIGMA_FLOOR {
                *v = SIGMA_FLOOR;
                clamped += 1;
            }
        }
        let diag = operator_diagonal(g, &sigma);
        let apply = |x: &[f64], out: &mut [f64]| {
            let mut flux = zero_gradient(g, x);
            for (fc, sc) in flux.comps.iter_mut().zip(&sigma.comps) {
                fc.iter_mut().zip(sc).for_each(|(f, s)| *f *= s);
            }
            for (o, d) in out.iter_mut().zip(g.divergence(&flux)) {
                *o = -d;
            }
        };
        let report = conjugate_gradient(apply, &diag, src, &mut guess, CG_TOL, 20 * n + 1000)?;
        if report.residual > CG_TOL {
            return Err(Error::Elliptic {
                iterations: report.iterations,
                residual: report.residual,
            });
        }
        let grad = zero_gradient(g, &guess);
        total += weights[k] * grad.weighted_dot(&raw, &grad);
        field.f.push(guess.clone());
        field.gradient.push(grad);
        field.residuals.push(report.residual);
        field.iterations.push(report.iterations);
    }
    Ok(DensityRate {
        rate: RateValue::finite(0.5 * total, 0.0, clamped),
        potential: Some(field),
        energy,
    })
}

/// Result of [`i_hat_variational`].
#[derive(Clone, Debug, PartialEq)]
pub struct VariationalDensity {
    pub value: f64,
    /// Coefficients of the maximiser in the family.
    pub coefficients: Vec<f64>,
    pub condition: f64,
}

/// `sup Î_F` over the span of a boundary-vanishing family, with `ℓ_F` written
/// as `∫⟨F, ∂_t ρ − Δ_h ρ + β ∇_h·(σ∇(J⋆ρ))⟩` and the quadratic term with face
/// mobilities; the supremum is `½ ℓᵀB⁻¹ℓ`.
pub fn i_hat_variational(pair: &PathPair, solver: &HydroSolver, family: &TestFamily) -> Result<VariationalDensity> {
    let g = &pair.grid;
    g.check_same(solver.grid())?;
    if family.kind != ConfinedBasis::BoundaryVanishing {
        return Err(Error::DegenerateBasis("the density functional needs a boundary-vanishing family".into()));
    }
    if family.dim != g.dim() {
        return Err(Error::GridMismatch("family and grid dimensions differ".into()));
    }
    let nb = family.len();
    let vol = g.cell_volume();
    let t0 = pair.times[0];
    let weights = pair.trapezoid_weights();
    let sources = density_sources(pair, solver);
    let centres: Vec<Vec<f64>> = (0..g.cell_count()).map(|c| g.cell_center(c)).collect();
    let mut l = DVector::<f64>::zeros(nb);
    let mut b = DMatrix::<f64>::zeros(nb, nb);
    for (k, &w) in weights.iter().enumerate() {
        let t = pair.times[k] - t0;
        let vals: Vec<Vec<f64>> = centres.iter().map(|u| family.values(t, u)).collect();
        let basis: Vec<Vec<f64>> = (0..nb).map(|i| vals.iter().map(|v| v[i]).collect()).collect();
        let grads: Vec<FaceField> = basis.iter().map(|f| zero_gradient(g, f)).collect();
        let sigma = solver.face_mobility(&pair.rho[k].values);
        for i in 0..nb {
            l[i] += w * vol * basis[i].iter().zip(&sources[k]).map(|(a, s)| a * s).sum::<f64>();
            for j in 0..=i {
                let v = w * grads[i].weighted_dot(&sigma, &grads[j]);
                b[(i, j)] += v;
                if i != j {
                    b[(j, i)] += v;
                }
            }
        }
    }
    let eig = b.clone().symmetric_eigen();
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    let chol = b
        .cholesky()
        .ok_or_else(|| Error::DegenerateBasis(format!("mobility-weighted Dirichlet matrix of size {nb} is not positive definite")))?;
    let coeffs = chol.solve(&l);
    Ok(VariationalDensity {
        value: 0.5 * l.dot(&coeffs),
        coefficients: coeffs.iter().copied().collect(),
        condition: if lo > 0.0 { hi / lo } else { f64::INFINITY },
    })
}
