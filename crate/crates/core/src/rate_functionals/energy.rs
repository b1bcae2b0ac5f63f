use nalgebra::{DMatrix, DVector};

use super::common::{cell_derivative, mass_threshold, Certificate, RateValue, SIGMA_FLOOR};
use super::family::TestFamily;
use crate::error::{domain, Error, Result};
use crate::hydrodynamics::PathPair;
use crate::mobility;

/// `𝒬(π) = (1/8) ∫∫ |∇ρ|²/σ(ρ)`, midpoint in space and trapezoid in time.
///
/// Cells with `σ < σ_floor` are dropped; the result is `+∞` when their
/// gradient mass exceeds `10⁻⁸ T |Λ|`.
pub fn energy_q_closed(pair: &PathPair) -> RateValue {
    let g = &pair.grid;
    let vol = g.cell_volume();
    let weights = pair.trapezoid_weights();
    let (mut total, mut excluded, mut count) = (0.0, 0.0, 0usize);
    for (k, w) in weights.iter().enumerate() {
        let rho = &pair.rho[k].values;
        let grads: Vec<Vec<f64>> = (0..g.dim()).map(|d| cell_derivative(g, rho, d)).collect();
        for c in 0..g.cell_count() {
            let sq: f64 = grads.iter().map(|gd| gd[c] * gd[c]).sum();
            let s = mobility(rho[c]);
            if s >= SIGMA_FLOOR {
                total += w * vol * sq / s;
            } else if sq > 0.0 {
                excluded += w * vol * sq;
                count += 1;
            }
        }
    }
    let threshold = mass_threshold(pair);
    if excluded > threshold {
        return RateValue::infinite(Certificate::InfiniteEnergy {
            mass: excluded,
            threshold,
        });
    }
    RateValue::finite(total / 8.0, excluded, count)
}

/// Result of [`energy_q_variational`].
#[derive(Clone, Debug, PartialEq)]
pub struct VariationalEnergy {
    /// `(δ/2) Σ_i 𝒬̃^δ_i`.
    pub value: f64,
    /// `𝒬̃^δ_i` for each direction.
    pub per_direction: Vec<f64>,
    /// Condition number of each σ-weighted Gram matrix.
    pub condition: Vec<f64>,
}

/// Finite-dimensional supremum of `∫⟨ρ, ∂_i H⟩ − δ ∫⟨σ(ρ) H, H⟩` over the
/// span of `family`, direction by direction.
///
/// The linear term is evaluated as `−∫⟨∂_i ρ, H⟩` with the same discrete
/// derivative as [`energy_q_closed`], so the value increases towards the
/// closed form as the family grows. Each supremum equals `bᵀA⁻¹b/(4δ)`.
pub fn energy_q_variational(pair: &PathPair, family: &TestFamily, delta: f64) -> Result<VariationalEnergy> {
    if !(delta > 0.0) {
        return domain("δ must be positive");
    }
    let g = &pair.grid;
    if family.dim != g.dim() {
        return Err(Error::GridMismatch("family and grid dimensions differ".into()));
    }
    let nb = family.len();
    let vol = g.cell_volume();
    let weights = pair.trapezoid_weights();
    let centres: Vec<Vec<f64>> = (0..g.cell_count()).map(|c| g.cell_center(c)).collect();
    let mut a = DMatrix::<f64>::zeros(nb, nb);
    let mut bs = vec![DVector::<f64>::zeros(nb); g.dim()];
    let t0 = pair.times[0];
    for (k, &w) in weights.iter().enumerate() {
        let rho = &pair.rho[k].values;
        let grads: Vec<Vec<f64>> = (0..g.dim()).map(|d| cell_derivative(g, rho, d)).collect();
        for (c, u) in centres.iter().enumerate() {
            let phi = DVector::from_vec(family.values(pair.times[k] - t0, u));
            let s = mobility(rho[c]) * w * vol;
            a.syger(s, &phi, &phi, 1.0);
            for (d, b) in bs.iter_mut().enumerate() {
                b.axpy(-w * vol * grads[d][c], &phi, 1.0);
            }
        }
    }
    a.fill_upper_triangle_with_lower_triangle();
    let eig = a.clone().symmetric_eigen();
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::DegenerateBasis(format!("σ-weighted Gram matrix of size {nb} is not positive definite")))?;
    let per_direction: Vec<f64> = bs.iter().map(|b| b.dot(&chol.solve(b)) / (4.0 * delta)).collect();
    let value = 0.5 * delta * per_direction.iter().sum::<f64>();
    Ok(VariationalEnergy {
        value,
        condition: vec![cond; g.dim()],
        per_direction,
    })
}
