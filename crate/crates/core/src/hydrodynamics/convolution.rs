use super::grid::{Grid, GridFunction};
use crate::lattice_gas::KacKernel;

/// Precomputed quadrature stencil for `(J^neum ⋆ ρ)(u)`.
///
/// The kernel depends on first coordinates only and has unit transverse mass,
/// so the convolution acts on column means. Rows `0..M1` give the values at
/// cell centres, rows `M1` and `M1+1` the values at `u1 = −1` and `u1 = 1`.
#[derive(Clone, Debug)]
pub struct Convolver {
    m1: usize,
    h1: f64,
    rows: Vec<f64>,
    lipschitz: f64,
}

fn cell_integral(kernel: &KacKernel, u: f64, a: f64, b: f64) -> f64 {
    let mut cuts: Vec<f64> = [u - 1.0, u + 1.0, 1.0 - u, 3.0 - u, -1.0 - u, -3.0 - u]
        .into_iter()
        .filter(|&c| c > a && c < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| crate::numerics::gauss4(w[0], w[1], |v| kernel.neumann_1d(u, v)))
        .sum()
}

impl Convolver {
    pub fn new(grid: &Grid, kernel: &KacKernel) -> Self {
        let m1 = grid.m1();
        let h1 = grid.h(0);
        let points: Vec<f64> = (0..m1).map(|i| grid.u1_center(i)).chain([-1.0, 1.0]).collect();
        let mut rows = vec![0.0; points.len() * m1];
        for (r, &u) in points.iter().enumerate() {
            let row = &mut rows[r * m1..(r + 1) * m1];
            for (k, w) in row.iter_mut().enumerate() {
                let a = -1.0 + k as f64 * h1;
                *w = cell_integral(kernel, u, a, a + h1);
            }
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|w| *w /= s);
        }
        let mut conv = Convolver {
            m1,
            h1,
            rows,
            lipschitz: 0.0,
        };
        let diff = |a: usize, b: usize| -> f64 { conv.row(a).iter().zip(conv.row(b)).map(|(p, q)| (p - q).abs()).sum() };
        let mut lip = 0.0f64;
        for i in 1..m1 {
            lip = lip.max(diff(i, i - 1) / h1);
        }
        lip = lip.max(diff(0, m1) / (0.5 * h1)).max(diff(m1 + 1, m1 - 1) / (0.5 * h1));
        conv.lipschitz = lip;
        conv
    }

    #[inline]
    fn row(&self, r: usize) -> &[f64] {
        &self.rows[r * self.m1..(r + 1) * self.m1]
    }

    /// Bound on `|∂_1 (J ⋆ ρ)|` over all `ρ` with values in `[0, 1]` (discrete faces).
    pub fn lipschitz_constant(&self) -> f64 {
        self.lipschitz
    }

    /// `J ⋆ ρ` at cell centres plus the two end values, from column means.
    pub fn apply_columns(&self, col: &[f64]) -> (Vec<f64>, f64, f64) {
        let dot = |r: usize| self.row(r).iter().zip(col).map(|(w, c)| w * c).sum::<f64>();
        let phi = (0..self.m1).map(dot).collect();
        (phi, dot(self.m1), dot(self.m1 + 1))
    }

    /// Direction-1 face gradient of `J ⋆ ρ` (faces `0..=M1`), from column means.
    pub fn face_gradient(&self, col: &[f64]) -> Vec<f64> {
        let (phi, left, right) = self.apply_columns(col);
        let m1 = self.m1;
        let mut g = vec![0.0; m1 + 1];
        g[0] = (phi[0] - left) / (0.5 * self.h1);
        for f in 1..m1 {
            g[f] = (phi[f] - phi[f - 1]) / self.h1;
        }
        g[m1] = (right - phi[m1 - 1]) / (0.5 * self.h1);
        g
    }

    /// `J ⋆ ρ` as a cell-centred field.
    pub fn convolve(&self, rho: &GridFunction) -> GridFunction {
        let (phi, _, _) = self.apply_columns(&rho.column_means());
        let mt = rho.grid.transverse_count();
        let values = phi.iter().flat_map(|&p| std::iter::repeat_n(p, mt)).collect();
        GridFunction {
            grid: rho.grid.clone(),
            values,
        }
    }
}

/// Convenience wrapper building a fresh stencil with the default kernel.
pub fn convolve(rho: &GridFunction) -> GridFunction {
    Convolver::new(&rho.grid, &KacKernel::default()).convolve(rho)
}
