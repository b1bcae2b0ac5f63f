use super::grid::{Grid, GridFunction};

/// Explicit heat-equation stepper on a ghost-cell stencil, kept separate from
/// the flux-form solver so the two code paths can be compared.
///
/// Ghost values in direction 1 are `2b − ρ`, placing the Dirichlet data at the
/// outer cell faces; transverse directions wrap around.
pub fn heat_reference(rho0: &GridFunction, left: &[f64], right: &[f64], dt: f64, steps: usize) -> GridFunction {
    let g: &Grid = &rho0.grid;
    let (m1, mt, dim) = (g.m1(), g.transverse_count(), g.dim());
    let h1 = g.h(0);
    let mut cur = rho0.values.clone();
    let mut next = cur.clone();
    for _ in 0..steps {
        for i1 in 0..m1 {
            for j in 0..mt {
                let c = i1 * mt + j;
                let here = cur[c];
                let west = if i1 == 0 { 2.0 * left[j] - here } else { cur[c - mt] };
                let east = if i1 + 1 == m1 { 2.0 * right[j] - here } else { cur[c + mt] };
                let mut lap = (east - 2.0 * here + west) / (h1 * h1);
                for k in 1..dim {
                    let hk = g.h(k);
                    let up = cur[i1 * mt + g.transverse_shift(j, k, 1)];
                    let down = cur[i1 * mt + g.transverse_shift(j, k, -1)];
                    lap += (up - 2.0 * here + down) / (hk * hk);
                }
                next[c] = here + dt * lap;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    GridFunction {
        grid: g.clone(),
        values: cur,
    }
}
