use super::common::{continuity_gate, mass_threshold, Certificate, GateConfig, GateOutcome, RateValue, SIGMA_FLOOR};
use super::energy::energy_q_closed;
use super::family::VectorField;
use crate::error::Result;
use crate::hydrodynamics::{FaceField, HydroSolver, PathPair};

/// The five terms of `L_V` and the quadratic correction.
#[derive(Clone, Debug, PartialEq)]
pub struct JHatTerms {
    pub terminal: f64,
    pub time_derivative: f64,
    pub divergence: f64,
    pub boundary: f64,
    pub drift: f64,
    /// `½ ∫⟨σ(ρ), V·V⟩`.
    pub quadratic: f64,
}

impl JHatTerms {
    /// `L_V`.
    pub fn linear(&self) -> f64 {
        self.terminal + self.time_derivative + self.divergence + self.boundary + self.drift
    }

    /// `Ĵ_V = L_V − ½∫⟨σ, V·V⟩`.
    pub fn value(&self) -> f64 {
        self.linear() - self.quadratic
    }
}

fn faces_of(pair: &PathPair, v: &dyn VectorField, t: f64, derivative: bool) -> FaceField {
    FaceField::from_fn(pair.grid.clone(), |k, u| {
        if derivative {
            v.time_derivative(t, u, k)
        } else {
            v.value(t, u, k)
        }
    })
}

/// `Ĵ_V(W, π)` with each term of `L_V` evaluated by quadrature: face pairings
/// for `W`, the discrete divergence of face-sampled `V` against cell values of
/// `ρ`, the surface integral over `Γ` at transverse cell centres and the
/// nonlocal drift with face mobilities.
pub fn j_hat_v(pair: &PathPair, solver: &HydroSolver, v: &dyn VectorField) -> Result<JHatTerms> {
    let g = &pair.grid;
    g.check_same(solver.grid())?;
    let beta = solver.config().beta;
    let weights = pair.trapezoid_weights();
    let t0 = pair.times[0];
    let n = pair.len();
    let mt = g.transverse_count();
    let area = g.transverse_area();
    let (m1, vol) = (g.m1(), g.cell_volume());
    let v_end = faces_of(pair, v, pair.t_end() - t0, false);
    let mut terms = JHatTerms {
        terminal: pair.current[n - 1].dot(&v_end),
        time_derivative: 0.0,
        divergence: 0.0,
        boundary: 0.0,
        drift: 0.0,
        quadratic: 0.0,
    };
    for (k, &w) in weights.iter().enumerate() {
        let t = pair.times[k] - t0;
        let vf = faces_of(pair, v, t, false);
        let dv = faces_of(pair, v, t, true);
        let rho = &pair.rho[k].values;
        terms.time_derivative -= w * pair.current[k].dot(&dv);
        let div = g.divergence(&vf);
        terms.divergence -= w * rho.iter().zip(&div).map(|(r, d)| r * d).sum::<f64>() * vol;
        let b: f64 = (0..mt)
            .map(|j| solver.right_values()[j] * vf.comps[0][m1 * mt + j] - solver.left_values()[j] * vf.comps[0][j])
            .sum();
        terms.boundary += w * b * area;
        let sigma = solver.face_mobility(rho);
        if beta != 0.0 {
            let dphi = solver.potential_gradient(rho);
            terms.drift -= w * beta * vf.weighted_dot(&sigma, &dphi);
        }
        terms.quadratic += 0.5 * w * vf.weighted_dot(&sigma, &vf);
    }
    Ok(terms)
}

/// Recovered control `U` of the representation `Ẇ = −∇ρ + σ(ρ)[β∇(J⋆ρ) + U]`.
#[derive(Clone, Debug)]
pub struct ControlField {
    pub times: Vec<f64>,
    pub u: Vec<FaceField>,
    /// Faces per time slice where `σ < σ_floor` (left at zero in `u`).
    pub excluded: Vec<usize>,
}

impl ControlField {
    pub fn sup_norm(&self) -> f64 {
        self.u.iter().map(FaceField::sup_norm).fold(0.0, f64::max)
    }
}

/// Output of [`rate_j_t`].
#[derive(Clone, Debug)]
pub struct CurrentRate {
    pub rate: RateValue,
    pub control: Option<ControlField>,
    pub gate: GateOutcome,
    pub energy: RateValue,
}

/// `𝒥_T(W, π) = ½ ∫⟨σ(ρ), U·U⟩` with `U` recovered face by face, `Ẇ` by
/// centred time differences.
pub fn rate_j_t(pair: &PathPair, solver: &HydroSolver, gate: &GateConfig) -> Result<CurrentRate> {
    let w_dot = pair.current_rate();
    rate_j_t_with_rate(pair, &w_dot, solver, gate)
}

/// As [`rate_j_t`] with a caller-supplied `Ẇ` at the observation times.
pub fn rate_j_t_with_rate(pair: &PathPair, w_dot: &[FaceField], solver: &HydroSolver, gate_cfg: &GateConfig) -> Result<CurrentRate> {
    let g = &pair.grid;
    g.check_same(solver.grid())?;
    let gate = continuity_gate(pair, gate_cfg);
    let energy = energy_q_closed(pair);
    if !gate.passed() {
        return Ok(CurrentRate {
            rate: RateValue::infinite(gate.certificate()),
            control: None,
            gate,
            energy,
        });
    }
    if !energy.is_finite() {
        return Ok(CurrentRate {
            rate: RateValue::infinite(energy.certificate.clone()),
            control: None,
            gate,
            energy,
        });
    }
    let beta = solver.config().beta;
    let weights = pair.trapezoid_weights();
    let mut control = ControlField {
        times: pair.times.clone(),
        u: Vec::with_capacity(pair.len()),
        excluded: Vec::with_capacity(pair.len()),
    };
    let (mut total, mut excluded_mass, mut excluded_count) = (0.0, 0.0, 0usize);
    for (k, &w) in weights.iter().enumerate() {
        let rho = &pair.rho[k].values;
        let sigma = solver.face_mobility(rho);
        let grad = solver.density_gradient(rho);
        let dphi = (beta != 0.0).then(|| solver.potential_gradient(rho));
        let mut u = FaceField::zeros(g.clone());
        let mut dropped = 0;
        for c in 0..g.dim() {
            for f in 0..g.face_count(c) {
                let s = sigma.comps[c][f];
                let drift = dphi.as_ref().map_or(0.0, |p| beta * s * p.comps[c][f]);
                let num = w_dot[k].comps[c][f] + grad.comps[c][f] - drift;
                let fw = g.face_weight(c, f);
                if s >= SIGMA_FLOOR {
                    let val = num / s;
                    u.comps[c][f] = val;
                    total += w * fw * s * val * val;
                } else {
                    excluded_mass += w * fw * num * num;
                    dropped += 1;
                }
            }
        }
        excluded_count += dropped;
        control.u.push(u);
        control.excluded.push(dropped);
    }
    let threshold = mass_threshold(pair);
    if excluded_mass > threshold {
        return Ok(CurrentRate {
            rate: RateValue::infinite(Certificate::ExcludedMass {
                mass: excluded_mass,
                threshold,
            }),
            control: Some(control),
            gate,
            energy,
        });
    }
    Ok(CurrentRate {
        rate: RateValue::finite(0.5 * total, excluded_mass, excluded_count),
        control: Some(control),
        gate,
        energy,
    })
}
