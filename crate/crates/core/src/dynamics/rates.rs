use super::boundary::BoundaryProfile;
use super::tilt::TiltFields;
use crate::error::{domain, Result};
use crate::lattice_gas::{Configuration, Site};

/// `C(x,y;η) = exp(−β/2 · [H(η^{x,y}) − H(η)])` for nearest neighbours.
pub fn exchange_rate(cfg: &Configuration, x: Site, y: Site, beta: f64) -> Result<f64> {
    if beta < 0.0 {
        return domain("β must be non-negative");
    }
    if cfg.geometry().edge_between(x, y).is_none() {
        return domain(format!("sites {} and {} are not nearest neighbours", x.0, y.0));
    }
    Ok((-0.5 * beta * cfg.exchange_delta(x, y)).exp())
}

/// `b(x/N)(1 − η(x)) + (1 − b(x/N)) η(x)` at a boundary site.
pub fn boundary_rate(cfg: &Configuration, x: Site, b: &dyn BoundaryProfile) -> Result<f64> {
    let g = cfg.geometry();
    let Some(k) = g.contains(x).then(|| g.boundary_index(x)).flatten() else {
        return domain(format!("site {} is not on the boundary", x.0));
    };
    let bs = g.boundary_sites()[k];
    let c = b.value(bs.side, &g.transverse_point(x));
    super::boundary::check_open_unit(c)?;
    Ok(flip_rate(c, cfg.eta(x)))
}

#[inline]
pub(crate) fn flip_rate(b: f64, eta: u8) -> f64 {
    if eta == 1 {
        1.0 - b
    } else {
        b
    }
}

/// Exchange rate multiplied by `exp(−[η(x+e_i) − η(x)] V_i(t, x/N)/N)`, where
/// `x` is the lower endpoint of the bond regardless of argument order.
pub fn tilted_exchange_rate(
    cfg: &Configuration,
    x: Site,
    y: Site,
    beta: f64,
    tilt: &dyn TiltFields,
    t: f64,
) -> Result<f64> {
    let base = exchange_rate(cfg, x, y, beta)?;
    let g = cfg.geometry();
    let e = g.edge(g.edge_between(x, y).expect("adjacency checked"));
    let jump = cfg.eta(e.upper) as f64 - cfg.eta(e.lower) as f64;
    if jump == 0.0 {
        return Ok(base);
    }
    let v = tilt.v(t, &g.macro_point(e.lower), e.dir);
    Ok(base * (-jump * v / g.n() as f64).exp())
}

/// `|rate − (1 − N^{−1}[η(x+e_i) − η(x)]Υ_i)|` for bond `edge`, where
/// `Υ_i = β ∂_i^N (J ⋆ π^N)(x/N) + V_i(t, x/N)` and `x` is the lower endpoint.
pub fn rate_expansion_residual(cfg: &Configuration, edge: usize, beta: f64, tilt: &dyn TiltFields, t: f64) -> Result<f64> {
    let g = cfg.geometry();
    if edge >= g.edges().len() {
        return domain(format!("edge {edge} out of range"));
    }
    let e = g.edge(edge);
    let rate = tilted_exchange_rate(cfg, e.lower, e.upper, beta, tilt, t)?;
    let n = g.n() as f64;
    let jump = cfg.eta(e.upper) as f64 - cfg.eta(e.lower) as f64;
    let upsilon = beta * n * (cfg.field(e.upper) - cfg.field(e.lower)) + tilt.v(t, &g.macro_point(e.lower), e.dir);
    Ok((rate - (1.0 - jump * upsilon / n)).abs())
}

/// Boundary rate multiplied by `exp((2η(x) − 1) H(t, x/N)/N)`.
pub fn tilted_boundary_rate(
    cfg: &Configuration,
    x: Site,
    b: &dyn BoundaryProfile,
    tilt: &dyn TiltFields,
    t: f64,
) -> Result<f64> {
    let base = boundary_rate(cfg, x, b)?;
    let g = cfg.geometry();
    let side = g.boundary_sites()[g.boundary_index(x).expect("checked")].side;
    let h = tilt.h(t, side, &g.transverse_point(x));
    let s = 2.0 * cfg.eta(x) as f64 - 1.0;
    Ok(base * (s * h / g.n() as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{AffineBoundary, ConstantBoundary, ConstantTilt, NoTilt};
    use crate::lattice_gas::{Configuration, Lattice};

    #[test]
    fn beta_zero_is_unit_rate() {
        let l = Lattice::with_default_kernel(1, 3).unwrap();
        let g = l.geometry().clone();
        for state in [0usize, 5, 77, 127] {
            let cfg = Configuration::from_state_index(l.clone(), state).unwrap();
            for e in g.edges() {
                assert_eq!(exchange_rate(&cfg, e.lower, e.upper, 0.0).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn non_adjacent_is_rejected() {
        let l = Lattice::with_default_kernel(1, 3).unwrap();
        let cfg = Configuration::empty(l);
        assert!(exchange_rate(&cfg, Site(0), Site(2), 1.0).is_err());
        assert!(exchange_rate(&cfg, Site(0), Site(0), 1.0).is_err());
    }

    #[test]
    fn boundary_rate_reads() {
        let l = Lattice::with_default_kernel(1, 2).unwrap();
        let b = ConstantBoundary::new(0.3).unwrap();
        let empty = Configuration::empty(l.clone());
        let full = Configuration::full(l.clone());
        assert!((boundary_rate(&full, Site(0), &b).unwrap() - 0.7).abs() < 1e-15);
        assert!((boundary_rate(&empty, Site(0), &b).unwrap() - 0.3).abs() < 1e-15);
        assert!(boundary_rate(&empty, Site(2), &b).is_err());
        let half = ConstantBoundary::new(0.5).unwrap();
        assert_eq!(boundary_rate(&full, Site(4), &half).unwrap(), 0.5);
    }

    #[test]
    fn tilted_boundary_doubles_with_log2() {
        let n = 2usize;
        let l = Lattice::with_default_kernel(1, n).unwrap();
        let b = ConstantBoundary::new(0.3).unwrap();
        let tilt = ConstantTilt::new(vec![0.0], n as f64 * 2f64.ln());
        let full = Configuration::full(l);
        let r = tilted_boundary_rate(&full, Site(0), &b, &tilt, 0.0).unwrap();
        assert!((r - 1.4).abs() < 1e-12);
    }

    #[test]
    fn tilted_exhaustive_symbolic_d1_n2() {
        let n = 2.0f64;
        let l = Lattice::with_default_kernel(1, 2).unwrap();
        let g = l.geometry().clone();
        let b = AffineBoundary::new(0.8, 0.2).unwrap();
        let tilt = ConstantTilt::new(vec![0.7], -0.4);
        for state in 0..32 {
            let cfg = Configuration::from_state_index(l.clone(), state).unwrap();
            for (k, bs) in g.boundary_sites().iter().enumerate() {
                let eta = ((state >> bs.site.0) & 1) as f64;
                let bb = if k == 0 { 0.8 } else { 0.2 };
                let want = (bb * (1.0 - eta) + (1.0 - bb) * eta) * ((2.0 * eta - 1.0) * -0.4 / n).exp();
                let got = tilted_boundary_rate(&cfg, bs.site, &b, &tilt, 0.3).unwrap();
                assert!((got - want).abs() < 1e-14);
            }
            for e in g.edges() {
                let (a, c) = (((state >> e.lower.0) & 1) as f64, ((state >> e.upper.0) & 1) as f64);
                let base = exchange_rate(&cfg, e.lower, e.upper, 0.0).unwrap();
                let want = base * (-(c - a) * 0.7 / n).exp();
                let got = tilted_exchange_rate(&cfg, e.upper, e.lower, 0.0, &tilt, 0.0).unwrap();
                assert!((got - want).abs() < 1e-14);
                let none = tilted_exchange_rate(&cfg, e.lower, e.upper, 1.0, &NoTilt, 0.0).unwrap();
                assert_eq!(none, exchange_rate(&cfg, e.lower, e.upper, 1.0).unwrap());
            }
        }
    }
}
