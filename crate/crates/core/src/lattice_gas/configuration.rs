use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::{LatticeGeometry, Site};
use super::kernel::KacKernel;
use crate::error::{domain, Result};

/// Geometry together with the precomputed discrete coupling
/// `J_N(x,y) = N^{−d} J^neum(x/N, y/N)`.
///
/// The coupling depends on first coordinates only, so it is stored as a dense
/// `(2N+1) × (2N+1)` table indexed by columns.
#[derive(Clone, Debug)]
pub struct Lattice {
    geom: LatticeGeometry,
    kernel: KacKernel,
    coupling: Vec<f64>,
    max_exchange_delta: f64,
}

impl Lattice {
    pub fn new(geom: LatticeGeometry, kernel: KacKernel) -> Self {
        let cols = geom.columns();
        let n = geom.n() as f64;
        let scale = n.powi(-(geom.dim() as i32));
        let mut coupling = vec![0.0; cols * cols];
        for a in 0..cols {
            let u = (a as f64 - n) / n;
            for b in 0..cols {
                let v = (b as f64 - n) / n;
                coupling[a * cols + b] = scale * kernel.neumann_1d(u, v);
            }
        }
        let t = geom.transverse_count() as f64;
        let mut max_exchange_delta = 0.0f64;
        for a in 0..cols.saturating_sub(1) {
            let (ra, rb) = (&coupling[a * cols..(a + 1) * cols], &coupling[(a + 1) * cols..(a + 2) * cols]);
            let spread: f64 = ra.iter().zip(rb).map(|(p, q)| (p - q).abs()).sum();
            let own = (2.0 * ra[a + 1] - ra[a] - rb[a + 1]).abs();
            max_exchange_delta = max_exchange_delta.max(2.0 * t * spread + own);
        }
        Lattice {
            geom,
            kernel,
            coupling,
            max_exchange_delta,
        }
    }

    pub fn with_default_kernel(d: usize, n: usize) -> Result<Arc<Self>> {
        Ok(Arc::new(Lattice::new(LatticeGeometry::new(d, n)?, KacKernel::default())))
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geom
    }

    pub fn kernel(&self) -> &KacKernel {
        &self.kernel
    }

    /// Row of the column coupling table.
    #[inline]
    pub fn coupling_row(&self, col: usize) -> &[f64] {
        let c = self.geom.columns();
        &self.coupling[col * c..(col + 1) * c]
    }

    #[inline]
    pub fn column_coupling(&self, a: usize, b: usize) -> f64 {
        self.coupling[a * self.geom.columns() + b]
    }

    /// `J_N(x, y)`.
    pub fn discrete_coupling(&self, x: Site, y: Site) -> Result<f64> {
        if !self.geom.contains(x) || !self.geom.contains(y) {
            return domain("site outside the lattice");
        }
        Ok(self.column_coupling(self.geom.column(x), self.geom.column(y)))
    }

    /// Upper bound on `|H(η^{x,y}) − H(η)|` over all configurations and bonds.
    pub fn max_exchange_delta(&self) -> f64 {
        self.max_exchange_delta
    }
}

/// Occupancy configuration with the cached interaction field
/// `h(x) = Σ_z J_N(x,z) η(z)`.
#[derive(Clone, Debug)]
pub struct Configuration {
    lattice: Arc<Lattice>,
    occ: Vec<u8>,
    column_count: Vec<u32>,
    column_field: Vec<f64>,
    particles: usize,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.lattice, &other.lattice) && self.occ == other.occ
    }
}

impl Configuration {
    pub fn empty(lattice: Arc<Lattice>) -> Self {
        let sites = lattice.geometry().site_count();
        Self::from_occupancy(lattice, vec![0; sites]).expect("empty occupancy is valid")
    }

    pub fn full(lattice: Arc<Lattice>) -> Self {
        let sites = lattice.geometry().site_count();
        Self::from_occupancy(lattice, vec![1; sites]).expect("full occupancy is valid")
    }

    pub fn from_occupancy(lattice: Arc<Lattice>, occ: Vec<u8>) -> Result<Self> {
        let geom = lattice.geometry();
        if occ.len() != geom.site_count() {
            return domain(format!(
                "occupancy has {} entries, lattice has {} sites",
                occ.len(),
                geom.site_count()
            ));
        }
        if occ.iter().any(|&b| b > 1) {
            return domain("occupancy entries must be 0 or 1");
        }
        let cols = geom.columns();
        let mut column_count = vec![0u32; cols];
        for (s, &b) in occ.iter().enumerate() {
            column_count[geom.column(Site(s))] += b as u32;
        }
        let particles = occ.iter().map(|&b| b as usize).sum();
        let mut cfg = Configuration {
            lattice,
            occ,
            column_count,
            column_field: vec![0.0; cols],
            particles,
        };
        cfg.recompute_field();
        Ok(cfg)
    }

    /// Builds the configuration whose site `i` is occupied iff bit `i` of `state` is set.
    pub fn from_state_index(lattice: Arc<Lattice>, state: usize) -> Result<Self> {
        let sites = lattice.geometry().site_count();
        let occ = (0..sites).map(|i| ((state >> i) & 1) as u8).collect();
        Self::from_occupancy(lattice, occ)
    }

    /// Inverse of [`Configuration::from_state_index`]; only meaningful for small lattices.
    pub fn state_index(&self) -> usize {
        self.occ
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &b)| acc | ((b as usize) << i))
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        self.lattice.geometry()
    }

    pub fn occupancy(&self) -> &[u8] {
        &self.occ
    }

    #[inline]
    pub fn eta(&self, x: Site) -> u8 {
        self.occ[x.0]
    }

    #[inline]
    pub fn occupied(&self, x: Site) -> bool {
        self.occ[x.0] == 1
    }

    pub fn particle_count(&self) -> usize {
        self.particles
    }

    /// Number of particles in each column (first coordinate fixed).
    pub fn column_counts(&self) -> &[u32] {
        &self.column_count
    }

    /// Cached field per column; every site of a column shares the same value.
    pub fn column_field(&self) -> &[f64] {
        &self.column_field
    }

    #[inline]
    pub fn field(&self, x: Site) -> f64 {
        self.column_field[self.lattice.geometry().column(x)]
    }

    /// Recomputes the cached field from the occupancy.
    pub fn recompute_field(&mut self) {
        self.column_field = self.fresh_field();
    }

    fn fresh_field(&self) -> Vec<f64> {
        let cols = self.lattice.geometry().columns();
        (0..cols)
            .map(|a| {
                self.lattice
                    .coupling_row(a)
                    .iter()
                    .zip(&self.column_count)
                    .map(|(c, &n)| c * n as f64)
                    .sum()
            })
            .collect()
    }

    /// Largest deviation of the cached field from a fresh recomputation.
    pub fn field_drift(&self) -> f64 {
        self.fresh_field()
            .iter()
            .zip(&self.column_field)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `H_N(η) = −Σ_x η(x) h(x)`.
    pub fn hamiltonian(&self) -> f64 {
        -self
            .column_count
            .iter()
            .zip(&self.column_field)
            .map(|(&n, h)| n as f64 * h)
            .sum::<f64>()
    }

    /// `H_N(η^{x,y}) − H_N(η)` from the cached field.
    pub fn exchange_delta(&self, x: Site, y: Site) -> f64 {
        let s = self.occ[x.0] as f64 - self.occ[y.0] as f64;
        if s == 0.0 {
            return 0.0;
        }
        let g = self.lattice.geometry();
        let (a, b) = (g.column(x), g.column(y));
        if a == b {
            return 0.0;
        }
        let l = &self.lattice;
        2.0 * s * (self.column_field[a] - self.column_field[b]) + 2.0 * l.column_coupling(a, b)
            - l.column_coupling(a, a)
            - l.column_coupling(b, b)
    }

    /// Swaps the occupancies of `x` and `y` and updates the field.
    pub fn apply_exchange(&mut self, x: Site, y: Site) {
        let (ex, ey) = (self.occ[x.0], self.occ[y.0]);
        if ex == ey {
            return;
        }
        self.occ[x.0] = ey;
        self.occ[y.0] = ex;
        let g = self.lattice.geometry();
        let (a, b) = (g.column(x), g.column(y));
        if a == b {
            return;
        }
        // The particle moves from column `from` to column `to`.
        let (from, to) = if ex == 1 { (a, b) } else { (b, a) };
        self.column_count[from] -= 1;
        self.column_count[to] += 1;
        let lattice = Arc::clone(&self.lattice);
        let (rf, rt) = (lattice.coupling_row(from), lattice.coupling_row(to));
        for ((h, cf), ct) in self.column_field.iter_mut().zip(rf).zip(rt) {
            *h += ct - cf;
        }
    }

    /// Toggles the occupancy of a boundary site.
    pub fn apply_flip(&mut self, x: Site) -> Result<()> {
        let g = self.lattice.geometry();
        if !g.contains(x) || !g.is_boundary(x) {
            return domain(format!("site {} is not a boundary site", x.0));
        }
        let a = g.column(x);
        let sign = if self.occ[x.0] == 1 { -1.0 } else { 1.0 };
        self.occ[x.0] ^= 1;
        if sign > 0.0 {
            self.column_count[a] += 1;
            self.particles += 1;
        } else {
            self.column_count[a] -= 1;
            self.particles -= 1;
        }
        let lattice = Arc::clone(&self.lattice);
        for (h, c) in self.column_field.iter_mut().zip(lattice.coupling_row(a)) {
            *h += sign * c;
        }
        Ok(())
    }
}

/// Independent Bernoulli occupancies with `P(η(x) = 1) = ρ(x/N)`.
pub fn sample_profile<F>(lattice: Arc<Lattice>, profile: F, seed: u64) -> Result<Configuration>
where
    F: Fn(&[f64]) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_profile_with(lattice, profile, &mut rng)
}

pub fn sample_profile_with<F, R>(lattice: Arc<Lattice>, profile: F, rng: &mut R) -> Result<Configuration>
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let g = lattice.geometry();
    let mut occ = Vec::with_capacity(g.site_count());
    for s in 0..g.site_count() {
        let p = profile(&g.macro_point(Site(s)));
        if !(0.0..=1.0).contains(&p) {
            return domain(format!("profile value {p} outside [0, 1]"));
        }
        occ.push(u8::from(rng.random::<f64>() < p));
    }
    Configuration::from_occupancy(lattice, occ)
}
