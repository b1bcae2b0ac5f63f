use crate::error::{domain, Result};

/// Index of a site of `Λ_N` in lexicographic order of `(x1, …, xd)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site(pub usize);

/// Which end of the cylinder a boundary site sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Outward normal component in direction 1.
    pub fn normal(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// A nearest-neighbour bond `(lower, lower + e_dir)`; transverse bonds wrap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub lower: Site,
    pub upper: Site,
    /// Zero-based direction, `0` being the confined direction.
    pub dir: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundarySite {
    pub site: Site,
    pub side: Side,
}

/// The cylinder `{−N..N} × {0..N−1}^{d−1}` with periodic transverse coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeGeometry {
    d: usize,
    n: usize,
    transverse: usize,
    edges: Vec<Edge>,
    boundary: Vec<BoundarySite>,
    /// `edge_slot[site * d + dir]` is the index of the edge `(site, site + e_dir)`.
    edge_slot: Vec<Option<usize>>,
    /// `boundary_slot[site]` is the index into `boundary`.
    boundary_slot: Vec<Option<usize>>,
}

impl LatticeGeometry {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 {
            return domain("dimension must be at least 1");
        }
        if n == 0 {
            return domain("scaling parameter N must be at least 1");
        }
        let transverse = n
            .checked_pow((d - 1) as u32)
            .filter(|t| t.checked_mul(2 * n + 1).is_some())
            .ok_or_else(|| crate::Error::Domain("lattice too large".into()))?;
        let mut g = LatticeGeometry {
            d,
            n,
            transverse,
            edges: Vec::new(),
            boundary: Vec::new(),
            edge_slot: Vec::new(),
            boundary_slot: Vec::new(),
        };
        let sites = g.site_count();
        g.edge_slot = vec![None; sites * d];
        g.boundary_slot = vec![None; sites];
        for s in 0..sites {
            let site = Site(s);
            let col = g.column(site);
            if col + 1 < 2 * n + 1 {
                g.edge_slot[s * d] = Some(g.edges.len());
                g.edges.push(Edge {
                    lower: site,
                    upper: Site(s + transverse),
                    dir: 0,
                });
            }
            // With N = 1 the transverse torus has a single point and no bonds.
            if n > 1 {
                for dir in 1..d {
                    g.edge_slot[s * d + dir] = Some(g.edges.len());
                    g.edges.push(Edge {
                        lower: site,
                        upper: g.shift(site, dir, 1),
                        dir,
                    });
                }
            }
            if col == 0 || col == 2 * n {
                g.boundary_slot[s] = Some(g.boundary.len());
                g.boundary.push(BoundarySite {
                    site,
                    side: if col == 0 { Side::Left } else { Side::Right },
                });
            }
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of columns `2N+1` along direction 1.
    pub fn columns(&self) -> usize {
        2 * self.n + 1
    }

    /// Number of sites per column, `N^{d−1}`.
    pub fn transverse_count(&self) -> usize {
        self.transverse
    }

    pub fn site_count(&self) -> usize {
        self.columns() * self.transverse
    }

    /// Column index `x1 + N` in `0..2N+1`.
    #[inline]
    pub fn column(&self, x: Site) -> usize {
        x.0 / self.transverse
    }

    #[inline]
    pub fn transverse_index(&self, x: Site) -> usize {
        x.0 % self.transverse
    }

    #[inline]
    pub fn x1(&self, x: Site) -> i64 {
        self.column(x) as i64 - self.n as i64
    }

    pub fn coords(&self, x: Site) -> Vec<i64> {
        let mut c = vec![0i64; self.d];
        c[0] = self.x1(x);
        let mut t = self.transverse_index(x);
        for k in (1..self.d).rev() {
            c[k] = (t % self.n) as i64;
            t /= self.n;
        }
        c
    }

    pub fn site(&self, coords: &[i64]) -> Result<Site> {
        if coords.len() != self.d {
            return domain(format!(
                "expected {} coordinates, got {}",
                self.d,
                coords.len()
            ));
        }
        let n = self.n as i64;
        if coords[0] < -n || coords[0] > n {
            return domain(format!("first coordinate {} outside [-{n}, {n}]", coords[0]));
        }
        let mut t = 0usize;
        for &c in &coords[1..] {
            if c < 0 || c >= n {
                return domain(format!("transverse coordinate {c} outside [0, {n})"));
            }
            t = t * self.n + c as usize;
        }
        Ok(Site((coords[0] + n) as usize * self.transverse + t))
    }

    /// Macroscopic position `x/N`.
    pub fn macro_point(&self, x: Site) -> Vec<f64> {
        let n = self.n as f64;
        self.coords(x).into_iter().map(|c| c as f64 / n).collect()
    }

    /// Transverse macroscopic coordinates `(x2/N, …, xd/N)`.
    pub fn transverse_point(&self, x: Site) -> Vec<f64> {
        let n = self.n as f64;
        self.coords(x)[1..].iter().map(|&c| c as f64 / n).collect()
    }

    /// Neighbour in transverse direction `dir ≥ 1`, shifted by `step` with wrap-around.
    pub fn shift(&self, x: Site, dir: usize, step: i64) -> Site {
        debug_assert!(dir >= 1 && dir < self.d);
        let stride = self.n.pow((self.d - 1 - dir) as u32);
        let c = (x.0 / stride) % self.n;
        let nc = (c as i64 + step).rem_euclid(self.n as i64) as usize;
        Site(x.0 - c * stride + nc * stride)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> Edge {
        self.edges[i]
    }

    /// Index of the edge `(x, x + e_dir)`, if it exists.
    pub fn edge_index(&self, x: Site, dir: usize) -> Option<usize> {
        self.edge_slot[x.0 * self.d + dir]
    }

    pub fn boundary_sites(&self) -> &[BoundarySite] {
        &self.boundary
    }

    pub fn boundary_index(&self, x: Site) -> Option<usize> {
        self.boundary_slot.get(x.0).copied().flatten()
    }

    pub fn is_boundary(&self, x: Site) -> bool {
        self.boundary_index(x).is_some()
    }

    pub fn contains(&self, x: Site) -> bool {
        x.0 < self.site_count()
    }

    /// Returns the oriented edge joining two nearest neighbours, or `None`
    /// when `x` and `y` are not adjacent.
    pub fn edge_between(&self, x: Site, y: Site) -> Option<usize> {
        if !self.contains(x) || !self.contains(y) || x == y {
            return None;
        }
        for dir in 0..self.d {
            if let Some(e) = self.edge_index(x, dir) {
                if self.edges[e].upper == y {
                    return Some(e);
                }
            }
            if let Some(e) = self.edge_index(y, dir) {
                if self.edges[e].upper == x {
                    return Some(e);
                }
            }
        }
        None
    }

    /// Indices of the bonds having `x` as an endpoint.
    pub fn incident_edges(&self, x: Site) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.d);
        for dir in 0..self.d {
            if let Some(e) = self.edge_index(x, dir) {
                out.push(e);
            }
            let below = if dir == 0 {
                (self.column(x) > 0).then(|| Site(x.0 - self.transverse))
            } else {
                (self.n > 1).then(|| self.shift(x, dir, -1))
            };
            if let Some(e) = below.and_then(|y| self.edge_index(y, dir)) {
                out.push(e);
            }
        }
        out
    }

    /// All sites `y` with `max_k |y_k − x_k| ≤ l` (transverse distance periodic).
    pub fn box_sites(&self, x: Site, l: usize) -> Vec<Site> {
        let c = self.coords(x);
        let n = self.n as i64;
        let l = l as i64;
        let lo1 = (c[0] - l).max(-n);
        let hi1 = (c[0] + l).min(n);
        let transverse_choices: Vec<Vec<i64>> = c[1..]
            .iter()
            .map(|&ck| {
                if 2 * l + 1 >= n {
                    (0..n).collect()
                } else {
                    (-l..=l).map(|o| (ck + o).rem_euclid(n)).collect()
                }
            })
            .collect();
        let mut out = Vec::new();
        let mut coords = c.clone();
        for x1 in lo1..=hi1 {
            coords[0] = x1;
            self.push_product(&mut out, &mut coords, &transverse_choices, 1);
        }
        out
    }

    fn push_product(&self, out: &mut Vec<Site>, coords: &mut Vec<i64>, choices: &[Vec<i64>], k: usize) {
        if k == self.d {
            out.push(self.site(coords).expect("coordinates in range"));
            return;
        }
        for &v in &choices[k - 1] {
            coords[k] = v;
            self.push_product(out, coords, choices, k + 1);
        }
    }
}
