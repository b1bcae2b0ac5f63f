use crate::dynamics::CurrentLedger;
use crate::error::{domain, Error, Result};
use crate::hydrodynamics::{FaceField, Grid, GridFunction};
use crate::lattice_gas::{Configuration, LatticeGeometry, Site};

/// `π^N(η) = N^{−d} Σ_x η(x) δ_{x/N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMeasure {
    geom: LatticeGeometry,
    occ: Vec<u8>,
}

impl DensityMeasure {
    pub fn from_occupancy(geom: &LatticeGeometry, occ: &[u8]) -> Result<Self> {
        if occ.len() != geom.site_count() {
            return domain(format!("{} occupancies for {} sites", occ.len(), geom.site_count()));
        }
        if occ.iter().any(|&e| e > 1) {
            return domain("occupancies must be 0 or 1");
        }
        Ok(DensityMeasure {
            geom: geom.clone(),
            occ: occ.to_vec(),
        })
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geom
    }

    pub fn occupancy(&self) -> &[u8] {
        &self.occ
    }

    /// Mass `N^{−d}` of one particle.
    pub fn atom_weight(&self) -> f64 {
        (self.geom.n() as f64).powi(-(self.geom.dim() as i32))
    }

    pub fn mass(&self) -> f64 {
        self.occ.iter().map(|&e| e as u64).sum::<u64>() as f64 * self.atom_weight()
    }

    /// Macroscopic positions of the particles.
    pub fn atoms(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.occ
            .iter()
            .enumerate()
            .filter(|(_, &e)| e == 1)
            .map(|(s, _)| self.geom.macro_point(Site(s)))
    }

    /// `⟨π, F⟩ = N^{−d} Σ_x η(x) F(x/N)`.
    pub fn pair(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms().map(|u| f(&u)).sum::<f64>() * self.atom_weight()
    }

    /// Cell averages: mass in each cell divided by the cell volume.
    ///
    /// Atoms on a cell interface go to the upper cell, except at `u1 = 1`.
    pub fn project(&self, grid: &Grid) -> Result<GridFunction> {
        check_dim(&self.geom, grid)?;
        let mut values = vec![0.0; grid.cell_count()];
        let w = self.atom_weight() / grid.cell_volume();
        for u in self.atoms() {
            values[locate_cell(grid, &u)] += w;
        }
        GridFunction::new(grid.clone(), values)
    }
}

fn check_dim(geom: &LatticeGeometry, grid: &Grid) -> Result<()> {
    if geom.dim() != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "lattice dimension {} vs grid dimension {}",
            geom.dim(),
            grid.dim()
        )));
    }
    Ok(())
}

fn index_in(x: f64, h: f64, m: usize) -> usize {
    ((x / h).floor().max(0.0) as usize).min(m - 1)
}

pub(crate) fn locate_cell(grid: &Grid, u: &[f64]) -> usize {
    let i1 = index_in(u[0] + 1.0, grid.h(0), grid.m1());
    let mut j = 0;
    for k in 1..grid.dim() {
        j = j * grid.dims()[k] + index_in(u[k].rem_euclid(1.0), grid.h(k), grid.dims()[k]);
    }
    grid.cell(i1, j)
}

pub fn empirical_density(cfg: &Configuration) -> DensityMeasure {
    DensityMeasure {
        geom: cfg.geometry().clone(),
        occ: cfg.occupancy().to_vec(),
    }
}

pub fn pair_density(pi: &DensityMeasure, f: impl Fn(&[f64]) -> f64) -> f64 {
    pi.pair(f)
}

/// `W^N_t`: bond currents with weight `N^{−(d+1)}` at the lower endpoint, plus
/// boundary atoms `W^x_t` in the first component.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentMeasure {
    geom: LatticeGeometry,
    ledger: CurrentLedger,
}

impl CurrentMeasure {
    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geom
    }

    pub fn ledger(&self) -> &CurrentLedger {
        &self.ledger
    }

    pub fn atom_weight(&self) -> f64 {
        (self.geom.n() as f64).powi(-(self.geom.dim() as i32 + 1))
    }

    /// Signed atoms `(component, position, count)`.
    pub fn atoms(&self) -> impl Iterator<Item = (usize, Vec<f64>, i64)> + '_ {
        let g = &self.geom;
        let bonds = g
            .edges()
            .iter()
            .zip(self.ledger.edge_counts())
            .filter(|(_, &w)| w != 0)
            .map(|(e, &w)| (e.dir, g.macro_point(e.lower), w));
        let boundary = g
            .boundary_sites()
            .iter()
            .zip(self.ledger.boundary_counts())
            .filter(|(_, &w)| w != 0)
            .map(|(b, &w)| (0, g.macro_point(b.site), w));
        bonds.chain(boundary)
    }

    /// `⟨W, G⟩ = Σ_k ⟨W_k, G_k⟩`, with `G(k, u)` the zero-based component `k`.
    pub fn pair(&self, g: impl Fn(usize, &[f64]) -> f64) -> f64 {
        self.atoms().map(|(k, u, w)| w as f64 * g(k, &u)).sum::<f64>() * self.atom_weight()
    }

    /// `⟨W_k, G⟩` for a single component.
    pub fn pair_component(&self, k: usize, g: impl Fn(&[f64]) -> f64) -> f64 {
        self.pair(|c, u| if c == k { g(u) } else { 0.0 })
    }

    /// Staggered field whose face pairing reproduces the atoms: each atom is
    /// moved to the nearest face of its component.
    pub fn project(&self, grid: &Grid) -> Result<FaceField> {
        check_dim(&self.geom, grid)?;
        let mut out = FaceField::zeros(grid.clone());
        let mt = grid.transverse_count();
        let aw = self.atom_weight();
        for (k, u, w) in self.atoms() {
            let f = if k == 0 {
                let f1 = (((u[0] + 1.0) / grid.h(0)).round().max(0.0) as usize).min(grid.m1());
                let c = locate_cell(grid, &u);
                f1 * mt + grid.split(c).1
            } else {
                // Faces of component k sit at the upper side of each cell.
                let mut v = u.clone();
                v[k] = u[k] - 0.5 * grid.h(k);
                locate_cell(grid, &v)
            };
            out.comps[k][f] += aw * w as f64 / grid.face_weight(k, f);
        }
        Ok(out)
    }
}

pub fn empirical_current(ledger: &CurrentLedger, geom: &LatticeGeometry) -> Result<CurrentMeasure> {
    if ledger.edge_counts().len() != geom.edges().len() || ledger.boundary_counts().len() != geom.boundary_sites().len() {
        return domain("ledger does not match the lattice");
    }
    Ok(CurrentMeasure {
        geom: geom.clone(),
        ledger: ledger.clone(),
    })
}

pub fn pair_current(w: &CurrentMeasure, g: impl Fn(usize, &[f64]) -> f64) -> f64 {
    w.pair(g)
}

/// Mean occupancy over `Λ_l(x) = {y : |y − x|_∞ ≤ l} ∩ Λ_N`.
pub fn block_average(cfg: &Configuration, x: Site, l: usize) -> Result<f64> {
    let g = cfg.geometry();
    if !g.contains(x) {
        return domain(format!("site {} outside the lattice", x.0));
    }
    let sites = g.box_sites(x, l);
    Ok(sites.iter().map(|&y| cfg.eta(y) as f64).sum::<f64>() / sites.len() as f64)
}
