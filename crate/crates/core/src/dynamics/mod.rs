//! Continuous-time simulation of the boundary-driven exchange dynamics,
//! tilted rates, current bookkeeping, Girsanov weights and a dense
//! generator oracle.

mod boundary;
mod eventlog;
mod exact;
mod girsanov;
mod ledger;
mod rates;
mod simulator;
mod tilt;

pub use boundary::{AffineBoundary, BoundaryProfile, ConstantBoundary, FnBoundary};
pub use eventlog::{EventKind, EventLog, EventRecord};
pub use exact::{
    detailed_balance_residual, empirical_occupation, exact_generator, product_bernoulli, total_variation,
    ExactGenerator, MAX_ORACLE_STATES,
};
pub use girsanov::girsanov_log_weight;
pub use ledger::CurrentLedger;
pub use rates::{boundary_rate, exchange_rate, rate_expansion_residual, tilted_boundary_rate, tilted_exchange_rate};
pub use simulator::{replica_rng, Dynamics, Event, Sampler, SimState, SimulationOptions, Snapshot, Trajectory};
pub use tilt::{ConstantTilt, FnTilt, NoTilt, TiltFields};
