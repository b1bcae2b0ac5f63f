use crate::lattice_gas::{LatticeGeometry, Site};

/// Signed jump counters: `W^{x,x+e}` per bond (positive for jumps along `+e`)
/// and `W^x = N^{x,−} − N^{x,+}` per boundary site (annihilations minus
/// creations).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurrentLedger {
    edge: Vec<i64>,
    boundary: Vec<i64>,
}

impl CurrentLedger {
    pub fn new(geom: &LatticeGeometry) -> Self {
        CurrentLedger {
            edge: vec![0; geom.edges().len()],
            boundary: vec![0; geom.boundary_sites().len()],
        }
    }

    pub fn from_parts(edge: Vec<i64>, boundary: Vec<i64>) -> Self {
        CurrentLedger { edge, boundary }
    }

    pub fn edge_counts(&self) -> &[i64] {
        &self.edge
    }

    pub fn boundary_counts(&self) -> &[i64] {
        &self.boundary
    }

    pub fn is_zero(&self) -> bool {
        self.edge.iter().all(|&w| w == 0) && self.boundary.iter().all(|&w| w == 0)
    }

    /// Records a jump across bond `edge`; `forward` means along `+e`.
    pub fn record_jump(&mut self, edge: usize, forward: bool) {
        self.edge[edge] += if forward { 1 } else { -1 };
    }

    /// Records a flip at boundary slot `k`; `created` is true for a creation.
    pub fn record_flip(&mut self, k: usize, created: bool) {
        self.boundary[k] += if created { -1 } else { 1 };
    }

    /// `Σ_k [W^{x−e_k,x} − W^{x,x+e_k}] − W^x 1{x ∈ Γ}` at every site.
    pub fn divergence(&self, geom: &LatticeGeometry) -> Vec<i64> {
        let mut div = vec![0i64; geom.site_count()];
        for (e, w) in geom.edges().iter().zip(&self.edge) {
            div[e.lower.0] -= w;
            div[e.upper.0] += w;
        }
        for (bs, w) in geom.boundary_sites().iter().zip(&self.boundary) {
            div[bs.site.0] -= w;
        }
        div
    }

    /// First site where `η_t − η_0` differs from the ledger divergence, as
    /// `(site, change, divergence)`.
    pub fn conservation_defect(&self, geom: &LatticeGeometry, initial: &[u8], current: &[u8]) -> Option<(Site, i64, i64)> {
        self.divergence(geom)
            .into_iter()
            .enumerate()
            .map(|(s, div)| (Site(s), current[s] as i64 - initial[s] as i64, div))
            .find(|(_, change, div)| change != div)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divergence_of_single_jump() {
        let g = LatticeGeometry::new(1, 2).unwrap();
        let mut l = CurrentLedger::new(&g);
        assert!(l.is_zero());
        l.record_jump(1, true);
        assert_eq!(l.divergence(&g), vec![0, -1, 1, 0, 0]);
        l.record_flip(0, false);
        assert_eq!(l.divergence(&g)[0], -1);
        assert_eq!(l.conservation_defect(&g, &[1, 1, 0, 0, 0], &[0, 0, 1, 0, 0]), None);
        assert!(l.conservation_defect(&g, &[0; 5], &[0; 5]).is_some());
    }
}
