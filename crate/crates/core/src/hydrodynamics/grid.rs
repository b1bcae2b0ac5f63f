use crate::error::{domain, Error, Result};

/// Uniform cell-centred mesh of `[−1,1] × 𝕋^{d−1}` (Dirichlet in direction 1,
/// periodic in the others).
///
/// Cells are stored row-major with direction 1 slowest, so cell `(i1, j)` has
/// index `i1 · M_t + j` where `j` is the transverse linear index.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dims: Vec<usize>,
    h: Vec<f64>,
}

impl Grid {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&m| m == 0) {
            return domain("grid needs at least one cell per direction");
        }
        let h = dims
            .iter()
            .enumerate()
            .map(|(k, &m)| if k == 0 { 2.0 / m as f64 } else { 1.0 / m as f64 })
            .collect();
        Ok(Grid { dims, h })
    }

    /// `M1` cells in direction 1 and `mt` cells in every transverse direction.
    pub fn uniform(d: usize, m1: usize, mt: usize) -> Result<Self> {
        if d == 0 {
            return domain("dimension must be at least 1");
        }
        let mut dims = vec![mt; d];
        dims[0] = m1;
        Grid::new(dims)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn m1(&self) -> usize {
        self.dims[0]
    }

    pub fn h(&self, k: usize) -> f64 {
        self.h[k]
    }

    pub fn spacings(&self) -> &[f64] {
        &self.h
    }

    pub fn transverse_count(&self) -> usize {
        self.dims[1..].iter().product()
    }

    pub fn cell_count(&self) -> usize {
        self.m1() * self.transverse_count()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    /// Volume of a transverse slab of one cell, `Π_{k≥2} h_k`.
    pub fn transverse_area(&self) -> f64 {
        self.h[1..].iter().product()
    }

    /// Total volume `|Λ| = 2`.
    pub fn domain_volume(&self) -> f64 {
        2.0
    }

    #[inline]
    pub fn cell(&self, i1: usize, j: usize) -> usize {
        i1 * self.transverse_count() + j
    }

    #[inline]
    pub fn split(&self, c: usize) -> (usize, usize) {
        let mt = self.transverse_count();
        (c / mt, c % mt)
    }

    /// Transverse multi-index of linear index `j`.
    pub fn transverse_coords(&self, j: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim() - 1];
        let mut r = j;
        for k in (1..self.dim()).rev() {
            out[k - 1] = r % self.dims[k];
            r /= self.dims[k];
        }
        out
    }

    /// Transverse neighbour of `j` in direction `k ≥ 1` shifted by `step`, with wrap-around.
    pub fn transverse_shift(&self, j: usize, k: usize, step: i64) -> usize {
        let stride: usize = self.dims[k + 1..].iter().product();
        let m = self.dims[k];
        let c = (j / stride) % m;
        let nc = (c as i64 + step).rem_euclid(m as i64) as usize;
        j - c * stride + nc * stride
    }

    /// Transverse coordinates of the centre of transverse cell `j`.
    pub fn transverse_center(&self, j: usize) -> Vec<f64> {
        self.transverse_coords(j)
            .iter()
            .enumerate()
            .map(|(k, &c)| (c as f64 + 0.5) * self.h[k + 1])
            .collect()
    }

    pub fn u1_center(&self, i1: usize) -> f64 {
        -1.0 + (i1 as f64 + 0.5) * self.h[0]
    }

    pub fn cell_center(&self, c: usize) -> Vec<f64> {
        let (i1, j) = self.split(c);
        let mut p = Vec::with_capacity(self.dim());
        p.push(self.u1_center(i1));
        p.extend(self.transverse_center(j));
        p
    }

    /// Number of faces carrying component `comp` of a staggered field.
    pub fn face_count(&self, comp: usize) -> usize {
        if comp == 0 {
            (self.m1() + 1) * self.transverse_count()
        } else {
            self.cell_count()
        }
    }

    /// Location of face `f` of component `comp`.
    ///
    /// Direction-1 faces are indexed `f1 · M_t + j` with `f1 ∈ 0..=M1`;
    /// transverse faces share the index of the cell on their lower side.
    pub fn face_center(&self, comp: usize, f: usize) -> Vec<f64> {
        let mt = self.transverse_count();
        if comp == 0 {
            let (f1, j) = (f / mt, f % mt);
            let mut p = vec![-1.0 + f1 as f64 * self.h[0]];
            p.extend(self.transverse_center(j));
            p
        } else {
            let mut p = self.cell_center(f);
            p[comp] = (p[comp] + 0.5 * self.h[comp]).rem_euclid(1.0);
            p
        }
    }

    /// Quadrature weight of a face: the cell volume, halved on the two ends.
    pub fn face_weight(&self, comp: usize, f: usize) -> f64 {
        if comp == 0 {
            let f1 = f / self.transverse_count();
            if f1 == 0 || f1 == self.m1() {
                0.5 * self.cell_volume()
            } else {
                self.cell_volume()
            }
        } else {
            self.cell_volume()
        }
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.dims, other.dims)))
        }
    }

    /// Discrete gradient of a cell function at faces, using `left`/`right`
    /// as the Dirichlet values at `u1 = ∓1` (per transverse cell).
    pub fn face_gradient(&self, values: &[f64], left: &[f64], right: &[f64]) -> FaceField {
        let mut out = FaceField::zeros(self.clone());
        let (m1, mt) = (self.m1(), self.transverse_count());
        let h1 = self.h[0];
        let c0 = &mut out.comps[0];
        for j in 0..mt {
            c0[j] = (values[self.cell(0, j)] - left[j]) / (0.5 * h1);
            for f1 in 1..m1 {
                c0[f1 * mt + j] = (values[self.cell(f1, j)] - values[self.cell(f1 - 1, j)]) / h1;
            }
            c0[m1 * mt + j] = (right[j] - values[self.cell(m1 - 1, j)]) / (0.5 * h1);
        }
        for k in 1..self.dim() {
            let hk = self.h[k];
            for c in 0..self.cell_count() {
                let (i1, j) = self.split(c);
                let up = self.cell(i1, self.transverse_shift(j, k, 1));
                out.comps[k][c] = (values[up] - values[c]) / hk;
            }
        }
        out
    }

    /// Discrete divergence of a staggered field, one value per cell.
    pub fn divergence(&self, field: &FaceField) -> Vec<f64> {
        let (m1, mt) = (self.m1(), self.transverse_count());
        let h1 = self.h[0];
        let mut div = vec![0.0; self.cell_count()];
        for i1 in 0..m1 {
            for j in 0..mt {
                let c = self.cell(i1, j);
                div[c] = (field.comps[0][(i1 + 1) * mt + j] - field.comps[0][i1 * mt + j]) / h1;
            }
        }
        for k in 1..self.dim() {
            let hk = self.h[k];
            for (c, dv) in div.iter_mut().enumerate() {
                let (i1, j) = self.split(c);
                let down = self.cell(i1, self.transverse_shift(j, k, -1));
                *dv += (field.comps[k][c] - field.comps[k][down]) / hk;
            }
        }
        div
    }
}

/// Cell-centred scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        let n = grid.cell_count();
        GridFunction { grid, values: vec![c; n] }
    }

    /// Samples `f` at cell centres.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.cell_count()).map(|c| f(&grid.cell_center(c))).collect();
        GridFunction { grid, values }
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Midpoint-rule `∫ ρ F`.
    pub fn pair(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let vol = self.grid.cell_volume();
        (0..self.values.len())
            .map(|c| self.values[c] * f(&self.grid.cell_center(c)))
            .sum::<f64>()
            * vol
    }

    pub fn pair_values(&self, g: &[f64]) -> f64 {
        self.values.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l1_distance(&self, other: &GridFunction) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.cell_volume())
    }

    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Average over transverse cells, one value per column.
    pub fn column_means(&self) -> Vec<f64> {
        let mt = self.grid.transverse_count();
        self.values
            .chunks(mt)
            .map(|c| c.iter().sum::<f64>() / mt as f64)
            .collect()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Staggered vector field: component 0 on direction-1 faces (including the two
/// ends), transverse components on transverse faces.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceField {
    pub grid: Grid,
    pub comps: Vec<Vec<f64>>,
}

impl FaceField {
    pub fn zeros(grid: Grid) -> Self {
        let comps = (0..grid.dim()).map(|k| vec![0.0; grid.face_count(k)]).collect();
        FaceField { grid, comps }
    }

    /// Samples the vector field `g(comp, u)` at face centres.
    pub fn from_fn(grid: Grid, g: impl Fn(usize, &[f64]) -> f64) -> Self {
        let comps = (0..grid.dim())
            .map(|k| (0..grid.face_count(k)).map(|f| g(k, &grid.face_center(k, f))).collect())
            .collect();
        FaceField { grid, comps }
    }

    pub fn axpy(&mut self, a: f64, other: &FaceField) {
        for (x, y) in self.comps.iter_mut().zip(&other.comps) {
            for (p, q) in x.iter_mut().zip(y) {
                *p += a * q;
            }
        }
    }

    pub fn scaled(&self, a: f64) -> FaceField {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for v in c.iter_mut() {
                *v *= a;
            }
        }
        out
    }

    /// Weighted inner product `Σ_f w_f a_f b_f` with [`Grid::face_weight`].
    pub fn dot(&self, other: &FaceField) -> f64 {
        let g = &self.grid;
        let mut s = 0.0;
        for k in 0..g.dim() {
            for (f, (a, b)) in self.comps[k].iter().zip(&other.comps[k]).enumerate() {
                s += g.face_weight(k, f) * a * b;
            }
        }
        s
    }

    /// `Σ_f w_f μ_f a_f b_f`.
    pub fn weighted_dot(&self, weight: &FaceField, other: &FaceField) -> f64 {
        let g = &self.grid;
        let mut s = 0.0;
        for k in 0..g.dim() {
            for f in 0..g.face_count(k) {
                s += g.face_weight(k, f) * weight.comps[k][f] * self.comps[k][f] * other.comps[k][f];
            }
        }
        s
    }

    /// Pairing with a continuous vector field sampled at face centres.
    pub fn pair(&self, g: impl Fn(usize, &[f64]) -> f64) -> f64 {
        let grid = &self.grid;
        let mut s = 0.0;
        for k in 0..grid.dim() {
            for (f, w) in self.comps[k].iter().enumerate() {
                s += grid.face_weight(k, f) * w * g(k, &grid.face_center(k, f));
            }
        }
        s
    }

    /// `⟨W, ∇G⟩` for `G` given at cell centres and vanishing on the two ends.
    pub fn pair_gradient(&self, g_cells: &[f64]) -> f64 {
        let grid = &self.grid;
        let zeros = vec![0.0; grid.transverse_count()];
        let grad = grid.face_gradient(g_cells, &zeros, &zeros);
        self.dot(&grad)
    }

    pub fn sup_norm(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
