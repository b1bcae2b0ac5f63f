use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::boundary::{check_open_unit, BoundaryProfile};
use super::eventlog::{EventKind, EventLog, EventRecord};
use super::ledger::CurrentLedger;
use super::rates::flip_rate;
use super::tilt::{NoTilt, TiltFields};
use crate::error::{domain, Error, Result};
use crate::lattice_gas::{Configuration, Lattice, LatticeGeometry, Site};

/// A state-changing jump of the chain.
pub type Event = EventRecord;

/// Event-selection strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Sampler {
    /// Proposals at constant per-class bounds, accepted with the rate ratio.
    #[default]
    Rejection,
    /// Exact selection from a binary sum tree of all current rates.
    Direct,
}

/// Per-replica generator: stream `replica` of the ChaCha8 generator seeded with `master`.
pub fn replica_rng(master: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(replica);
    rng
}

const FIELD_REFRESH: u64 = 1 << 16;

/// Generator `N²(L_exchange + L_boundary)`, optionally tilted.
#[derive(Debug, Clone)]
pub struct Dynamics {
    lattice: Arc<Lattice>,
    beta: f64,
    boundary: Arc<dyn BoundaryProfile>,
    tilt: Arc<dyn TiltFields>,
    sampler: Sampler,
    n: f64,
    n2: f64,
    b_values: Vec<f64>,
    points: Vec<f64>,
    edges_by_dir: Vec<Vec<usize>>,
    class_bound: Vec<f64>,
    class_cum: Vec<f64>,
    proposal_rate: f64,
    static_v: Option<Vec<f64>>,
    static_h: Option<Vec<f64>>,
}

impl Dynamics {
    pub fn new(lattice: Arc<Lattice>, beta: f64, boundary: Arc<dyn BoundaryProfile>) -> Result<Self> {
        Self::tilted(lattice, beta, boundary, Arc::new(NoTilt))
    }

    pub fn tilted(
        lattice: Arc<Lattice>,
        beta: f64,
        boundary: Arc<dyn BoundaryProfile>,
        tilt: Arc<dyn TiltFields>,
    ) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return domain("β must be finite and non-negative");
        }
        if !(tilt.v_sup().is_finite() && tilt.h_sup().is_finite()) {
            return domain("tilt bounds must be finite");
        }
        let g = lattice.geometry().clone();
        let d = g.dim();
        let n = g.n() as f64;
        let b_values = g
            .boundary_sites()
            .iter()
            .map(|bs| {
                let c = boundary.value(bs.side, &g.transverse_point(bs.site));
                check_open_unit(c).map(|_| c)
            })
            .collect::<Result<Vec<_>>>()?;
        let points: Vec<f64> = (0..g.site_count()).flat_map(|s| g.macro_point(Site(s))).collect();
        let mut edges_by_dir = vec![Vec::new(); d];
        for (i, e) in g.edges().iter().enumerate() {
            edges_by_dir[e.dir].push(i);
        }
        let tilt_factor = (tilt.v_sup() / n).exp();
        let mut class_bound: Vec<f64> = (0..d).map(|_| tilt_factor).collect();
        class_bound[0] *= (0.5 * beta * lattice.max_exchange_delta()).exp();
        let b_max = b_values.iter().fold(0.0f64, |m, &b| m.max(b).max(1.0 - b));
        class_bound.push(b_max * (tilt.h_sup() / n).exp());
        let n2 = n * n;
        let mut class_cum = Vec::with_capacity(d + 1);
        let mut acc = 0.0;
        for (k, bound) in class_bound.iter().enumerate() {
            let count = if k < d { edges_by_dir[k].len() } else { b_values.len() };
            acc += n2 * bound * count as f64;
            class_cum.push(acc);
        }
        let (static_v, static_h) = if tilt.time_dependent() {
            (None, None)
        } else {
            let v = g
                .edges()
                .iter()
                .map(|e| tilt.v(0.0, &points[e.lower.0 * d..(e.lower.0 + 1) * d], e.dir))
                .collect();
            let h = g
                .boundary_sites()
                .iter()
                .map(|bs| tilt.h(0.0, bs.side, &points[bs.site.0 * d + 1..(bs.site.0 + 1) * d]))
                .collect();
            (Some(v), Some(h))
        };
        Ok(Dynamics {
            lattice,
            beta,
            boundary,
            tilt,
            sampler: Sampler::Rejection,
            n,
            n2,
            b_values,
            points,
            edges_by_dir,
            class_bound,
            proposal_rate: acc,
            class_cum,
            static_v,
            static_h,
        })
    }

    pub fn with_sampler(mut self, sampler: Sampler) -> Result<Self> {
        if sampler == Sampler::Direct && self.tilt.time_dependent() {
            return domain("the direct sampler requires a time-independent tilt");
        }
        self.sampler = sampler;
        Ok(self)
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        self.lattice.geometry()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn boundary(&self) -> &Arc<dyn BoundaryProfile> {
        &self.boundary
    }

    pub fn tilt(&self) -> &Arc<dyn TiltFields> {
        &self.tilt
    }

    pub fn sampler(&self) -> Sampler {
        self.sampler
    }

    /// Reservoir density at boundary slot `k`.
    pub fn boundary_density(&self, k: usize) -> f64 {
        self.b_values[k]
    }

    /// Total proposal intensity of the rejection sampler (including `N²`).
    pub fn proposal_rate(&self) -> f64 {
        self.proposal_rate
    }

    /// Dynamics with the same `β` and `b` but without tilt.
    pub fn untilted(&self) -> Result<Self> {
        Dynamics::new(self.lattice.clone(), self.beta, self.boundary.clone())
    }

    #[inline]
    fn point(&self, x: Site) -> &[f64] {
        let d = self.lattice.geometry().dim();
        &self.points[x.0 * d..(x.0 + 1) * d]
    }

    /// `V_dir(t, x/N)` at the lower endpoint of bond `e`.
    #[inline]
    pub(crate) fn v_on_edge(&self, e: usize, t: f64) -> f64 {
        match &self.static_v {
            Some(v) => v[e],
            None => {
                let edge = self.lattice.geometry().edge(e);
                self.tilt.v(t, self.point(edge.lower), edge.dir)
            }
        }
    }

    #[inline]
    pub(crate) fn h_on_boundary(&self, k: usize, t: f64) -> f64 {
        match &self.static_h {
            Some(h) => h[k],
            None => {
                let bs = self.lattice.geometry().boundary_sites()[k];
                self.tilt.h(t, bs.side, &self.point(bs.site)[1..])
            }
        }
    }

    /// Untilted exchange rate of bond `e` (without `N²`).
    #[inline]
    pub(crate) fn base_edge_rate(&self, cfg: &Configuration, e: usize) -> f64 {
        let edge = self.lattice.geometry().edge(e);
        if edge.dir == 0 && self.beta != 0.0 {
            (-0.5 * self.beta * cfg.exchange_delta(edge.lower, edge.upper)).exp()
        } else {
            1.0
        }
    }

    /// Tilted rate of bond `e`, zero when the exchange would not change the state.
    pub fn edge_rate(&self, cfg: &Configuration, e: usize, t: f64) -> f64 {
        let edge = self.lattice.geometry().edge(e);
        let jump = cfg.eta(edge.upper) as f64 - cfg.eta(edge.lower) as f64;
        if jump == 0.0 {
            return 0.0;
        }
        let mut r = self.base_edge_rate(cfg, e);
        if !self.tilt.is_zero() {
            r *= (-jump * self.v_on_edge(e, t) / self.n).exp();
        }
        r
    }

    /// Tilted flip rate at boundary slot `k`.
    pub fn boundary_flip_rate(&self, cfg: &Configuration, k: usize, t: f64) -> f64 {
        let site = self.lattice.geometry().boundary_sites()[k].site;
        let eta = cfg.eta(site);
        let mut r = flip_rate(self.b_values[k], eta);
        if !self.tilt.is_zero() {
            r *= ((2.0 * eta as f64 - 1.0) * self.h_on_boundary(k, t) / self.n).exp();
        }
        r
    }

    /// Untilted flip rate at boundary slot `k`.
    pub(crate) fn base_flip_rate(&self, cfg: &Configuration, k: usize) -> f64 {
        let site = self.lattice.geometry().boundary_sites()[k].site;
        flip_rate(self.b_values[k], cfg.eta(site))
    }

    /// Advances `state` to its next state-changing event, or to `horizon` if
    /// no event occurs before it.
    pub fn step(&self, state: &mut SimState, horizon: f64) -> Result<Option<Event>> {
        match self.sampler {
            Sampler::Rejection => self.step_rejection(state, horizon),
            Sampler::Direct => self.step_direct(state, horizon),
        }
    }

    fn step_rejection(&self, state: &mut SimState, horizon: f64) -> Result<Option<Event>> {
        let d = self.lattice.geometry().dim();
        loop {
            let wait: f64 = state.rng.sample::<f64, _>(Exp1) / self.proposal_rate;
            let t = state.time + wait;
            if t > horizon {
                state.time = state.time.max(horizon);
                return Ok(None);
            }
            state.time = t;
            state.proposals += 1;
            let u = state.rng.random::<f64>() * self.proposal_rate;
            let class = self.class_cum.iter().position(|&c| u < c).unwrap_or(d);
            let bound = self.class_bound[class];
            if class < d {
                let list = &self.edges_by_dir[class];
                let e = list[state.rng.random_range(0..list.len())];
                let rate = self.edge_rate(&state.cfg, e, t);
                if rate == 0.0 {
                    continue;
                }
                check_bound("exchange", rate, bound)?;
                if state.rng.random::<f64>() * bound < rate {
                    return Ok(Some(self.commit_exchange(state, e)));
                }
            } else {
                let k = state.rng.random_range(0..self.b_values.len());
                let rate = self.boundary_flip_rate(&state.cfg, k, t);
                check_bound("flip", rate, bound)?;
                if state.rng.random::<f64>() * bound < rate {
                    return Ok(Some(self.commit_flip(state, k)));
                }
            }
        }
    }

    fn build_tree(&self, cfg: &Configuration) -> SumTree {
        let g = self.lattice.geometry();
        let ne = g.edges().len();
        let mut tree = SumTree::new(ne + self.b_values.len());
        for e in 0..ne {
            tree.set(e, self.edge_rate(cfg, e, 0.0));
        }
        for k in 0..self.b_values.len() {
            tree.set(ne + k, self.boundary_flip_rate(cfg, k, 0.0));
        }
        tree
    }

    fn step_direct(&self, state: &mut SimState, horizon: f64) -> Result<Option<Event>> {
        let mut tree = match state.tree.take() {
            Some(t) => t,
            None => self.build_tree(&state.cfg),
        };
        let total = tree.total();
        let wait: f64 = state.rng.sample::<f64, _>(Exp1) / (self.n2 * total);
        let t = state.time + wait;
        if t > horizon {
            state.time = state.time.max(horizon);
            state.tree = Some(tree);
            return Ok(None);
        }
        state.time = t;
        state.proposals += 1;
        let g = self.lattice.geometry();
        let ne = g.edges().len();
        let slot = tree.find(state.rng.random::<f64>() * total);
        let (event, touched) = if slot < ne {
            let edge = g.edge(slot);
            (self.commit_exchange(state, slot), [edge.lower, edge.upper])
        } else {
            let site = g.boundary_sites()[slot - ne].site;
            (self.commit_flip(state, slot - ne), [site, site])
        };
        let field_moved = (event.kind == EventKind::Flip || event.aux == 1) && self.beta != 0.0;
        if field_moved || state.since_refresh == 0 {
            for &e in &self.edges_by_dir[0] {
                tree.set(e, self.edge_rate(&state.cfg, e, t));
            }
        }
        for x in touched {
            for e in g.incident_edges(x) {
                tree.set(e, self.edge_rate(&state.cfg, e, t));
            }
            if let Some(k) = g.boundary_index(x) {
                tree.set(ne + k, self.boundary_flip_rate(&state.cfg, k, t));
            }
        }
        state.tree = Some(tree);
        Ok(Some(event))
    }

    fn commit_exchange(&self, state: &mut SimState, e: usize) -> Event {
        let edge = self.lattice.geometry().edge(e);
        let forward = state.cfg.occupied(edge.lower);
        if let Some(occ) = state.occupation.as_mut() {
            occ.touch(edge.lower, state.cfg.eta(edge.lower), state.time);
            occ.touch(edge.upper, state.cfg.eta(edge.upper), state.time);
        }
        state.cfg.apply_exchange(edge.lower, edge.upper);
        state.ledger.record_jump(e, forward);
        let event = EventRecord {
            time: state.time,
            kind: EventKind::Exchange,
            site: edge.lower,
            aux: edge.dir as i8 + 1,
            delta: if forward { -1 } else { 1 },
        };
        self.finish(state, event)
    }

    fn commit_flip(&self, state: &mut SimState, k: usize) -> Event {
        let bs = self.lattice.geometry().boundary_sites()[k];
        let created = !state.cfg.occupied(bs.site);
        if let Some(occ) = state.occupation.as_mut() {
            occ.touch(bs.site, state.cfg.eta(bs.site), state.time);
        }
        state.cfg.apply_flip(bs.site).expect("boundary slot is a boundary site");
        state.ledger.record_flip(k, created);
        let event = EventRecord {
            time: state.time,
            kind: EventKind::Flip,
            site: bs.site,
            aux: bs.side.normal() as i8,
            delta: if created { 1 } else { -1 },
        };
        self.finish(state, event)
    }

    fn finish(&self, state: &mut SimState, event: Event) -> Event {
        state.total_events += 1;
        state.since_refresh += 1;
        if state.since_refresh >= FIELD_REFRESH {
            state.cfg.recompute_field();
            state.since_refresh = 0;
        }
        if let Some(log) = state.log.as_mut() {
            log.records.push(event);
        }
        event
    }

    /// Runs the chain from `initial` up to `t_end`, recording snapshots at
    /// `observation_times` (plus `0` and `t_end`).
    pub fn simulate(
        &self,
        initial: Configuration,
        t_end: f64,
        observation_times: &[f64],
        rng: ChaCha8Rng,
        options: SimulationOptions,
    ) -> Result<Trajectory> {
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return domain("terminal time must be finite and non-negative");
        }
        if !Arc::ptr_eq(initial.lattice(), &self.lattice) {
            return domain("initial configuration lives on a different lattice");
        }
        let mut times: Vec<f64> = observation_times
            .iter()
            .copied()
            .filter(|t| *t > 0.0 && *t < t_end)
            .collect();
        if observation_times.iter().any(|t| !(0.0..=t_end).contains(t)) {
            return domain("observation times must lie in [0, T]");
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        if t_end > 0.0 {
            times.push(t_end);
        }
        let mut state = SimState::new(initial.clone(), rng);
        if options.log_events {
            state.log = Some(EventLog::default());
        }
        if options.track_occupation {
            state.occupation = Some(OccupationClock::new(initial.geometry().site_count()));
        }
        let geom = self.lattice.geometry();
        let mut snapshots = vec![Snapshot {
            time: 0.0,
            occupancy: initial.occupancy().to_vec(),
            ledger: state.ledger.clone(),
        }];
        for &t_obs in &times {
            while self.step(&mut state, t_obs)?.is_some() {}
            if let Some((site, change, divergence)) =
                state.ledger.conservation_defect(geom, initial.occupancy(), state.cfg.occupancy())
            {
                return Err(Error::Conservation {
                    site: site.0,
                    time: t_obs,
                    change,
                    divergence,
                });
            }
            snapshots.push(Snapshot {
                time: t_obs,
                occupancy: state.cfg.occupancy().to_vec(),
                ledger: state.ledger.clone(),
            });
        }
        let occupation = state
            .occupation
            .as_mut()
            .map(|o| o.finish(state.cfg.occupancy(), t_end));
        let events = state.log.take();
        Ok(Trajectory {
            initial,
            t_end,
            snapshots,
            occupation,
            events,
            final_state: state,
        })
    }
}

fn check_bound(kind: &'static str, rate: f64, bound: f64) -> Result<()> {
    if rate > bound * (1.0 + 1e-12) {
        Err(Error::RateBound { kind, rate, bound })
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SimulationOptions {
    pub log_events: bool,
    pub track_occupation: bool,
}

/// Running time integral `∫ η_s(x) ds`, updated lazily per site.
#[derive(Clone, Debug)]
struct OccupationClock {
    integral: Vec<f64>,
    last: Vec<f64>,
}

impl OccupationClock {
    fn new(sites: usize) -> Self {
        OccupationClock {
            integral: vec![0.0; sites],
            last: vec![0.0; sites],
        }
    }

    #[inline]
    fn touch(&mut self, x: Site, eta: u8, t: f64) {
        if eta == 1 {
            self.integral[x.0] += t - self.last[x.0];
        }
        self.last[x.0] = t;
    }

    fn finish(&mut self, occ: &[u8], t: f64) -> Vec<f64> {
        for (s, &eta) in occ.iter().enumerate() {
            self.touch(Site(s), eta, t);
        }
        self.integral.clone()
    }
}

/// Mutable state of one simulation worker.
#[derive(Clone, Debug)]
pub struct SimState {
    cfg: Configuration,
    time: f64,
    ledger: CurrentLedger,
    rng: ChaCha8Rng,
    total_events: u64,
    proposals: u64,
    since_refresh: u64,
    log: Option<EventLog>,
    occupation: Option<OccupationClock>,
    tree: Option<SumTree>,
}

impl SimState {
    pub fn new(cfg: Configuration, rng: ChaCha8Rng) -> Self {
        let ledger = CurrentLedger::new(cfg.geometry());
        SimState {
            cfg,
            time: 0.0,
            ledger,
            rng,
            total_events: 0,
            proposals: 0,
            since_refresh: 0,
            log: None,
            occupation: None,
            tree: None,
        }
    }

    pub fn with_event_log(mut self) -> Self {
        self.log = Some(EventLog::default());
        self
    }

    pub fn cfg(&self) -> &Configuration {
        &self.cfg
    }

    pub fn macro_time(&self) -> f64 {
        self.time
    }

    pub fn ledger(&self) -> &CurrentLedger {
        &self.ledger
    }

    pub fn total_events(&self) -> u64 {
        self.total_events
    }

    pub fn proposals(&self) -> u64 {
        self.proposals
    }

    pub fn event_log(&self) -> Option<&EventLog> {
        self.log.as_ref()
    }

    /// Generator state, for continuing the same stream in a later run.
    pub fn rng(&self) -> &ChaCha8Rng {
        &self.rng
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub occupancy: Vec<u8>,
    pub ledger: CurrentLedger,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub initial: Configuration,
    pub t_end: f64,
    /// Snapshot at `0`, at each requested time in `(0, T)`, and at `T`.
    pub snapshots: Vec<Snapshot>,
    /// `∫_0^T η_s(x) ds` per site when occupation tracking was requested.
    pub occupation: Option<Vec<f64>>,
    pub events: Option<EventLog>,
    pub final_state: SimState,
}

impl Trajectory {
    /// Writes every snapshot in the timed snapshot format.
    pub fn write_snapshots<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        for snap in &self.snapshots {
            let cfg = Configuration::from_occupancy(self.initial.lattice().clone(), snap.occupancy.clone())?;
            crate::lattice_gas::write_timed_snapshot(snap.time, &cfg, out)?;
        }
        Ok(())
    }
}

/// Complete binary tree of non-negative weights with prefix-sum search.
#[derive(Clone, Debug)]
struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    fn new(n: usize) -> Self {
        let leaves = n.next_power_of_two().max(1);
        SumTree {
            leaves,
            nodes: vec![0.0; 2 * leaves],
        }
    }

    fn set(&mut self, i: usize, w: f64) {
        let mut k = self.leaves + i;
        self.nodes[k] = w;
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    fn total(&self) -> f64 {
        self.nodes[1]
    }

    fn find(&self, mut u: f64) -> usize {
        let mut k = 1;
        while k < self.leaves {
            let left = self.nodes[2 * k];
            if u < left || self.nodes[2 * k + 1] == 0.0 {
                k *= 2;
            } else {
                u -= left;
                k = 2 * k + 1;
            }
        }
        k - self.leaves
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_tree_selects_by_weight() {
        let mut t = SumTree::new(5);
        for (i, w) in [1.0, 0.0, 2.0, 3.0, 4.0].iter().enumerate() {
            t.set(i, *w);
        }
        assert_eq!(t.total(), 10.0);
        assert_eq!(t.find(0.5), 0);
        assert_eq!(t.find(1.5), 2);
        assert_eq!(t.find(3.5), 3);
        assert_eq!(t.find(9.99), 4);
    }
}
