use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::common::{Certificate, RateValue};
use crate::hydrodynamics::PathPair;

/// SHA-256 of the path data (times, densities, currents and `γ`).
pub fn path_digest(pair: &PathPair) -> String {
    let mut h = Sha256::new();
    h.update(pair.grid.dims().iter().map(|d| *d as u64).flat_map(u64::to_le_bytes).collect::<Vec<_>>());
    let mut put = |xs: &[f64]| xs.iter().for_each(|x| h.update(x.to_le_bytes()));
    put(&pair.times);
    put(&pair.gamma.values);
    for r in &pair.rho {
        put(&r.values);
    }
    for w in &pair.current {
        for c in &w.comps {
            put(c);
        }
    }
    hex::encode(h.finalize())
}

/// Structured text report of a rate evaluation.
#[derive(Clone, Debug)]
pub struct RateReport {
    pub name: String,
    pub digest: String,
    pub value: RateValue,
    /// Named solver diagnostics, printed in order.
    pub diagnostics: Vec<(String, f64)>,
}

impl RateReport {
    pub fn new(name: impl Into<String>, pair: &PathPair, value: RateValue) -> Self {
        RateReport {
            name: name.into(),
            digest: path_digest(pair),
            value,
            diagnostics: Vec::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, v: f64) -> Self {
        self.diagnostics.push((key.into(), v));
        self
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[rate]");
        let _ = writeln!(s, "functional = {}", self.name);
        let _ = writeln!(s, "inputs_sha256 = {}", self.digest);
        let _ = writeln!(s, "value = {:e}", self.value.value);
        let _ = writeln!(s, "infinite = {}", !self.value.is_finite());
        let _ = writeln!(s, "excluded_mass = {:e}", self.value.excluded_mass);
        let _ = writeln!(s, "excluded_count = {}", self.value.excluded_count);
        let _ = writeln!(s, "\n[certificate]");
        match &self.value.certificate {
            Certificate::Finite => {
                let _ = writeln!(s, "kind = finite");
            }
            Certificate::Continuity {
                index,
                time,
                residual,
                tolerance,
            } => {
                let _ = writeln!(s, "kind = continuity");
                let _ = writeln!(s, "test_function = {index}\ntime = {time}\nresidual = {residual:e}\ntolerance = {tolerance:e}");
            }
            Certificate::ExcludedMass { mass, threshold } => {
                let _ = writeln!(s, "kind = excluded_mass\nmass = {mass:e}\nthreshold = {threshold:e}");
            }
            Certificate::InfiniteEnergy { mass, threshold } => {
                let _ = writeln!(s, "kind = infinite_energy\nmass = {mass:e}\nthreshold = {threshold:e}");
            }
            Certificate::OutOfRange { time, value } => {
                let _ = writeln!(s, "kind = out_of_range\ntime = {time}\nvalue = {value}");
            }
        }
        if !self.diagnostics.is_empty() {
            let _ = writeln!(s, "\n[diagnostics]");
            for (k, v) in &self.diagnostics {
                let _ = writeln!(s, "{k} = {v:e}");
            }
        }
        s
    }
}
