use super::eventlog::{EventKind, EventLog};
use super::simulator::Dynamics;
use crate::error::{Error, Result};
use crate::lattice_gas::Configuration;
use crate::numerics::gauss4;

/// Intensity gap `Σ (tilted − untilted)` over all possible jumps, times `N²`.
fn intensity_gap(dynamics: &Dynamics, cfg: &Configuration, t: f64) -> f64 {
    let g = dynamics.geometry();
    let n = g.n() as f64;
    let mut gap = 0.0;
    for (e, edge) in g.edges().iter().enumerate() {
        let jump = cfg.eta(edge.upper) as f64 - cfg.eta(edge.lower) as f64;
        if jump != 0.0 {
            let v = dynamics.v_on_edge(e, t);
            if v != 0.0 {
                gap += dynamics.base_edge_rate(cfg, e) * ((-jump * v / n).exp() - 1.0);
            }
        }
    }
    for (k, bs) in g.boundary_sites().iter().enumerate() {
        let h = dynamics.h_on_boundary(k, t);
        if h != 0.0 {
            let s = 2.0 * cfg.eta(bs.site) as f64 - 1.0;
            gap += dynamics.base_flip_rate(cfg, k) * ((s * h / n).exp() - 1.0);
        }
    }
    n * n * gap
}

fn compensator(dynamics: &Dynamics, cfg: &Configuration, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if dynamics.tilt().time_dependent() {
        gauss4(a, b, |s| intensity_gap(dynamics, cfg, s))
    } else {
        (b - a) * intensity_gap(dynamics, cfg, a)
    }
}

/// `log dP^{β,V,H}/dP^β` on `[0, t_end]` for a path given by its initial
/// configuration and complete event log, with `dynamics` the tilted law.
pub fn girsanov_log_weight(
    dynamics: &Dynamics,
    initial: &Configuration,
    log: Option<&EventLog>,
    t_end: f64,
) -> Result<f64> {
    let log = log.ok_or(Error::MissingEventLog)?;
    if dynamics.tilt().is_zero() {
        return Ok(0.0);
    }
    let g = dynamics.geometry().clone();
    let n = g.n() as f64;
    let mut cfg = initial.clone();
    let mut t = 0.0;
    let mut weight = 0.0;
    for rec in &log.records {
        if rec.time > t_end {
            break;
        }
        weight -= compensator(dynamics, &cfg, t, rec.time);
        t = rec.time;
        match rec.kind {
            EventKind::Exchange => {
                let dir = (rec.aux - 1) as usize;
                let e = g
                    .edge_index(rec.site, dir)
                    .ok_or_else(|| Error::Parse("event log names a missing bond".into()))?;
                let edge = g.edge(e);
                let forward = rec.delta == -1;
                let consistent = cfg.occupied(edge.lower) == forward && cfg.occupied(edge.upper) != forward;
                if !consistent {
                    return Err(Error::Parse(format!("event at time {} does not match the replayed state", rec.time)));
                }
                let jump = if forward { -1.0 } else { 1.0 };
                weight += -jump * dynamics.v_on_edge(e, t) / n;
                cfg.apply_exchange(edge.lower, edge.upper);
            }
            EventKind::Flip => {
                let k = g
                    .boundary_index(rec.site)
                    .ok_or_else(|| Error::Parse("flip at a bulk site".into()))?;
                let s = 2.0 * cfg.eta(rec.site) as f64 - 1.0;
                if (s > 0.0) != (rec.delta == -1) {
                    return Err(Error::Parse(format!("flip at time {} does not match the replayed state", rec.time)));
                }
                weight += s * dynamics.h_on_boundary(k, t) / n;
                cfg.apply_flip(rec.site)?;
            }
        }
    }
    weight -= compensator(dynamics, &cfg, t, t_end);
    Ok(weight)
}
