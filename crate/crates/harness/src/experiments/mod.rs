//! Experiment drivers behind the CLI subcommands.

mod current;
mod density;
mod oracle;
mod rate;

pub use current::{
    binned_profile, binned_reference, bulk_increment, current_pairings, run_current_lln, run_stationary, CurrentTest,
    CURRENT_TESTS,
};
pub use density::{density_sweep, monotone_in_n, run_hydro_convergence, run_tilted_check, DensityRow};
pub use oracle::{girsanov_mean_one, run_oracle_suite, MeanOne};
pub use rate::{
    certificate_kind, evaluate_rates, quadratic_tilt_cost, rate_inputs, run_rate_eval, RateEvaluation, RateInputs,
};

use anyhow::Result;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output::ExperimentOutput;

pub fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match kind {
        ExperimentKind::Oracle => run_oracle_suite(cfg),
        ExperimentKind::Hydro => run_hydro_convergence(cfg),
        ExperimentKind::Current => run_current_lln(cfg),
        ExperimentKind::Tilt => run_tilted_check(cfg),
        ExperimentKind::Rate => run_rate_eval(cfg),
        ExperimentKind::Stationary => run_stationary(cfg),
    }
}
