use std::fmt;

use super::family::GateFamily;
use crate::hydrodynamics::{Grid, PathPair};

/// Mobility below which a cell or face is excluded from `1/σ` weights.
pub const SIGMA_FLOOR: f64 = 1e-6;

/// Relative size of the excluded mass that turns a rate into `+∞`.
pub const EXCLUDED_MASS_FACTOR: f64 = 1e-8;

/// Why a functional returned the `+∞` sentinel.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// The value is finite.
    Finite,
    /// A gate test function violates the continuity equation.
    Continuity {
        index: usize,
        time: f64,
        residual: f64,
        tolerance: f64,
    },
    /// Faces with `σ < σ_floor` carry squared drift above the threshold.
    ExcludedMass { mass: f64, threshold: f64 },
    /// The energy `𝒬` is infinite.
    InfiniteEnergy { mass: f64, threshold: f64 },
    /// A density value leaves `[0, 1]`.
    OutOfRange { time: f64, value: f64 },
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::Finite => write!(f, "finite"),
            Certificate::Continuity {
                index,
                time,
                residual,
                tolerance,
            } => write!(
                f,
                "continuity violated by gate function {index} at t={time}: |residual| {residual:e} > {tolerance:e}"
            ),
            Certificate::ExcludedMass { mass, threshold } => {
                write!(f, "excluded-face mass {mass:e} exceeds {threshold:e}")
            }
            Certificate::InfiniteEnergy { mass, threshold } => {
                write!(f, "gradient mass {mass:e} on degenerate cells exceeds {threshold:e}")
            }
            Certificate::OutOfRange { time, value } => write!(f, "density {value} outside [0,1] at t={time}"),
        }
    }
}

/// Value of a rate functional, `+∞` when a certificate is attached.
#[derive(Clone, Debug, PartialEq)]
pub struct RateValue {
    pub value: f64,
    pub certificate: Certificate,
    /// Squared-drift mass dropped on degenerate faces or cells.
    pub excluded_mass: f64,
    pub excluded_count: usize,
}

impl RateValue {
    pub fn finite(value: f64, excluded_mass: f64, excluded_count: usize) -> Self {
        RateValue {
            value,
            certificate: Certificate::Finite,
            excluded_mass,
            excluded_count,
        }
    }

    pub fn infinite(certificate: Certificate) -> Self {
        RateValue {
            value: f64::INFINITY,
            certificate,
            excluded_mass: 0.0,
            excluded_count: 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.certificate == Certificate::Finite
    }
}

pub(crate) fn mass_threshold(pair: &PathPair) -> f64 {
    EXCLUDED_MASS_FACTOR * (pair.t_end() - pair.times[0]) * pair.grid.domain_volume()
}

/// Settings of the `𝔄_γ` membership test.
#[derive(Clone, Debug, PartialEq)]
pub struct GateConfig {
    pub family_size: usize,
    /// Tolerance is `factor · (h² + Δτ [+ 1/N])`.
    pub factor: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            family_size: 50,
            factor: 10.0,
        }
    }
}

/// Outcome of the membership test.
#[derive(Clone, Debug, PartialEq)]
pub struct GateOutcome {
    pub max_residual: f64,
    pub tolerance: f64,
    pub worst_index: usize,
    pub worst_time: f64,
}

impl GateOutcome {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }

    pub fn certificate(&self) -> Certificate {
        Certificate::Continuity {
            index: self.worst_index,
            time: self.worst_time,
            residual: self.max_residual,
            tolerance: self.tolerance,
        }
    }
}

/// `max_{G,t} |⟨ρ_t, G⟩ − ⟨γ, G⟩ − ⟨W_t, ∇G⟩|` over the gate family, with the
/// discrete gradient of cell-sampled `G` and zero boundary values.
pub fn continuity_gate(pair: &PathPair, cfg: &GateConfig) -> GateOutcome {
    let g = &pair.grid;
    let family = GateFamily::new(g.dim(), cfg.family_size);
    let centres: Vec<Vec<f64>> = (0..g.cell_count()).map(|c| g.cell_center(c)).collect();
    let mut out = GateOutcome {
        max_residual: 0.0,
        tolerance: cfg.factor * pair.discretisation_scale(),
        worst_index: 0,
        worst_time: pair.times[0],
    };
    for i in 0..cfg.family_size {
        let gv: Vec<f64> = centres.iter().map(|u| family.value(i, u)).collect();
        let g0 = pair.gamma.pair_values(&gv);
        for (k, &t) in pair.times.iter().enumerate() {
            let r = (pair.rho[k].pair_values(&gv) - g0 - pair.current[k].pair_gradient(&gv)).abs();
            if r > out.max_residual {
                out.max_residual = r;
                out.worst_index = i;
                out.worst_time = t;
            }
        }
    }
    out
}

/// Cell-centred derivative in direction `k`: centred in the interior,
/// one-sided at `u1 = ±1`, periodic transversally.
pub(crate) fn cell_derivative(g: &Grid, rho: &[f64], k: usize) -> Vec<f64> {
    let (m1, mt) = (g.m1(), g.transverse_count());
    let h = g.h(k);
    (0..g.cell_count())
        .map(|c| {
            let (i1, j) = g.split(c);
            if k == 0 {
                if m1 == 1 {
                    0.0
                } else if i1 == 0 {
                    (rho[c + mt] - rho[c]) / h
                } else if i1 + 1 == m1 {
                    (rho[c] - rho[c - mt]) / h
                } else {
                    (rho[c + mt] - rho[c - mt]) / (2.0 * h)
                }
            } else {
                let up = g.cell(i1, g.transverse_shift(j, k, 1));
                let down = g.cell(i1, g.transverse_shift(j, k, -1));
                (rho[up] - rho[down]) / (2.0 * h)
            }
        })
        .collect()
}
