use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;

use super::simulator::{Dynamics, SimState};
use crate::error::{domain, Error, Result};
use crate::lattice_gas::{Configuration, Lattice};

/// Largest state space accepted by the dense oracle.
pub const MAX_ORACLE_STATES: usize = 4096;

/// Dense generator of the chain on `{0,1}^{Λ_N}`; state `i` has site `k`
/// occupied iff bit `k` of `i` is set.
#[derive(Clone, Debug)]
pub struct ExactGenerator {
    lattice: Arc<Lattice>,
    matrix: DMatrix<f64>,
}

/// Builds the generator of `dynamics` with tilt frozen at time `t`.
pub fn exact_generator(dynamics: &Dynamics, t: f64) -> Result<ExactGenerator> {
    let lattice = dynamics.lattice().clone();
    let g = lattice.geometry();
    let sites = g.site_count();
    if sites > 12 {
        return Err(Error::StateSpaceTooLarge {
            states: 1u128 << sites.min(127),
            limit: MAX_ORACLE_STATES,
        });
    }
    let states = 1usize << sites;
    let n2 = (g.n() * g.n()) as f64;
    let mut q = DMatrix::zeros(states, states);
    for i in 0..states {
        let cfg = Configuration::from_state_index(lattice.clone(), i)?;
        let mut out = 0.0;
        for (e, edge) in g.edges().iter().enumerate() {
            let r = dynamics.edge_rate(&cfg, e, t);
            if r > 0.0 {
                let j = i ^ (1 << edge.lower.0) ^ (1 << edge.upper.0);
                q[(i, j)] += n2 * r;
                out += n2 * r;
            }
        }
        for (k, bs) in g.boundary_sites().iter().enumerate() {
            let r = n2 * dynamics.boundary_flip_rate(&cfg, k, t);
            q[(i, i ^ (1 << bs.site.0))] += r;
            out += r;
        }
        q[(i, i)] -= out;
    }
    Ok(ExactGenerator { lattice, matrix: q })
}

impl ExactGenerator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn states(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn max_abs_row_sum(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| r.sum().abs())
            .fold(0.0, f64::max)
    }

    /// Solves `πQ = 0, Σπ = 1` by replacing one balance equation with the normalisation.
    pub fn stationary(&self) -> Result<DVector<f64>> {
        let n = self.states();
        let mut a = self.matrix.transpose();
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut rhs = DVector::zeros(n);
        rhs[n - 1] = 1.0;
        let pi = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Domain("generator has no unique stationary law".into()))?;
        Ok(pi)
    }

    /// `p0 · exp(tQ)` by uniformisation.
    pub fn transient(&self, p0: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        if t < 0.0 {
            return domain("time must be non-negative");
        }
        let n = self.states();
        let lambda = (0..n).map(|i| -self.matrix[(i, i)]).fold(0.0, f64::max) * 1.02;
        if lambda == 0.0 || t == 0.0 {
            return Ok(p0.clone());
        }
        let p = DMatrix::identity(n, n) + &self.matrix / lambda;
        let pt = p.transpose();
        let mean = lambda * t;
        let mut term = p0.clone();
        // Poisson weights in log space to survive large `λt`.
        let mut log_w = -mean;
        let mut acc = DVector::zeros(n);
        let mut mass = 0.0;
        let mut k = 0usize;
        loop {
            let w = log_w.exp();
            acc += &term * w;
            mass += w;
            k += 1;
            if (k as f64) > mean && 1.0 - mass < 1e-15 {
                break;
            }
            if k > 10 * (mean as usize) + 1000 {
                break;
            }
            term = &pt * term;
            log_w += mean.ln() - (k as f64).ln();
        }
        Ok(acc)
    }
}

/// Product Bernoulli(`c`) law on `sites` sites in the state-index convention.
pub fn product_bernoulli(sites: usize, c: f64) -> DVector<f64> {
    DVector::from_fn(1 << sites, |i, _| {
        let ones = (i as u32).count_ones() as i32;
        c.powi(ones) * (1.0 - c).powi(sites as i32 - ones)
    })
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Fraction of time spent in each state over the first `n_events`
/// state-changing events.
pub fn empirical_occupation(dynamics: &Dynamics, initial: Configuration, n_events: u64, rng: ChaCha8Rng) -> Result<Vec<f64>> {
    let sites = dynamics.geometry().site_count();
    if sites > 12 {
        return Err(Error::StateSpaceTooLarge {
            states: 1u128 << sites.min(127),
            limit: MAX_ORACLE_STATES,
        });
    }
    let mut hist = vec![0.0; 1 << sites];
    let mut state = SimState::new(initial, rng);
    let mut index = state.cfg().state_index();
    while state.total_events() < n_events {
        let t0 = state.macro_time();
        if dynamics.step(&mut state, f64::INFINITY)?.is_none() {
            break;
        }
        hist[index] += state.macro_time() - t0;
        index = state.cfg().state_index();
    }
    let total: f64 = hist.iter().sum();
    Ok(hist.into_iter().map(|h| h / total).collect())
}

/// Largest relative mismatch between `C(x,y;η)e^{−βH(η)}` and
/// `C(y,x;η^{x,y})e^{−βH(η^{x,y})}` over all states and bonds of a small lattice.
pub fn detailed_balance_residual(lattice: Arc<Lattice>, beta: f64) -> Result<f64> {
    let g = lattice.geometry().clone();
    let sites = g.site_count();
    if sites > 12 {
        return Err(Error::StateSpaceTooLarge {
            states: 1u128 << sites.min(127),
            limit: MAX_ORACLE_STATES,
        });
    }
    let mut worst = 0.0f64;
    for i in 0..1usize << sites {
        let cfg = Configuration::from_state_index(lattice.clone(), i)?;
        for e in g.edges() {
            let mut swapped = cfg.clone();
            swapped.apply_exchange(e.lower, e.upper);
            let fwd = super::rates::exchange_rate(&cfg, e.lower, e.upper, beta)? * (-beta * cfg.hamiltonian()).exp();
            let bwd = super::rates::exchange_rate(&swapped, e.upper, e.lower, beta)? * (-beta * swapped.hamiltonian()).exp();
            worst = worst.max((fwd - bwd).abs() / fwd.max(bwd));
        }
    }
    Ok(worst)
}
