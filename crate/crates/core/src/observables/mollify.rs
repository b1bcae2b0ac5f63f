use super::measures::DensityMeasure;
use crate::error::{domain, Result};
use crate::hydrodynamics::{Grid, GridFunction};
use crate::lattice_gas::Site;

/// Default normalisation `κ_ε = 1 + ε²`.
pub fn default_kappa(eps: f64) -> f64 {
    1.0 + eps * eps
}

/// `Ξ_ε(π)` at cell centres: `π(Λ_ε(u)) / (κ |Λ_ε(u)|)`, where `Λ_ε(u)` is the
/// sup-norm box of half-width `ε` truncated to `Λ` and `|·|` its volume.
pub fn mollify(pi: &DensityMeasure, grid: &Grid, eps: f64, kappa: f64) -> Result<GridFunction> {
    if !(eps > 0.0 && eps.is_finite()) {
        return domain("mollifier width must be positive");
    }
    if !(kappa >= 1.0) {
        return domain("κ_ε must be at least 1");
    }
    let geom = pi.geometry();
    if geom.dim() != grid.dim() {
        return domain("lattice and grid dimensions differ");
    }
    let n = geom.n() as i64;
    let nf = n as f64;
    let d = geom.dim();
    // Column-wise prefix sums over x1 for each transverse index.
    let mt = geom.transverse_count();
    let cols = geom.columns();
    let mut prefix = vec![0u32; (cols + 1) * mt];
    for col in 0..cols {
        for j in 0..mt {
            let s = Site(col * mt + j);
            prefix[(col + 1) * mt + j] = prefix[col * mt + j] + pi.occupancy()[s.0] as u32;
        }
    }
    let transverse_width = (2.0 * eps).min(1.0);
    let mut values = Vec::with_capacity(grid.cell_count());
    let weight = pi.atom_weight();
    for c in 0..grid.cell_count() {
        let u = grid.cell_center(c);
        let lo1 = ((u[0] - eps) * nf).ceil().max(-nf) as i64;
        let hi1 = ((u[0] + eps) * nf).floor().min(nf) as i64;
        let len1 = (u[0] + eps).min(1.0) - (u[0] - eps).max(-1.0);
        // Transverse integer ranges, periodic.
        let ranges: Vec<Vec<i64>> = (1..d)
            .map(|k| {
                if 2.0 * eps >= 1.0 {
                    (0..n).collect()
                } else {
                    let lo = ((u[k] - eps) * nf).ceil() as i64;
                    let hi = ((u[k] + eps) * nf).floor() as i64;
                    (lo..=hi).map(|x| x.rem_euclid(n)).collect()
                }
            })
            .collect();
        let mut count = 0u64;
        if hi1 >= lo1 {
            let (a, b) = ((lo1 + n) as usize, (hi1 + n) as usize + 1);
            let combos: usize = ranges.iter().map(Vec::len).product();
            for mut r in 0..combos {
                let mut j = 0usize;
                let mut stride = 1usize;
                for range in ranges.iter().rev() {
                    j += range[r % range.len()] as usize * stride;
                    r /= range.len();
                    stride *= n as usize;
                }
                count += (prefix[b * mt + j] - prefix[a * mt + j]) as u64;
            }
        }
        let volume = len1 * transverse_width.powi(d as i32 - 1);
        values.push(count as f64 * weight / (kappa * volume));
    }
    GridFunction::new(grid.clone(), values)
}
