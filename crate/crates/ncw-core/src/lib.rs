//! A mixed Lanchester battle model in which a blue force `B` faces a
//! networked red force (shooters `R` supplied by a network/support force `N`)
//! together with an independent force `A`.
//!
//! `B` splits its firepower over the three opposing forces with a fire
//! allocation `(pi1, pi2, pi3)`. Red's per-shooter effectiveness degrades
//! linearly as its support force is destroyed, which makes the support force
//! a high-value target in some parameter regimes and a waste of fire in
//! others. The crate provides:
//!
//! * [`model`] — scenario parameters, battle state, the coupled force
//!   derivatives, per-target threatening rates, and the optimal (vertex)
//!   fire allocation.
//! * [`analytic`] — the fire-integral reduction: closed-form linear force
//!   levels and the energy-style invariant that pins `B` to a cubic
//!   polynomial in the cumulative fire delivered.
//! * [`sim`] — a fixed-step RK4 integrator with bisection-refined
//!   elimination events, multi-stage battles (scripted or greedy
//!   allocation policies), and pointwise strategy comparison.
//! * [`oracle`] — independent checks: simplex-grid dominance of the optimal
//!   allocation and scalarized-objective minimality sweeps.
//! * [`scenario`] — the TOML scenario-file format used by the CLI and demos.
//! * [`timeseries`] — CSV export of trajectories and comparisons.

pub mod analytic;
pub mod model;
pub mod oracle;
pub mod scenario;
pub mod sim;
pub mod timeseries;

pub use model::{Allocation, BattleState, Derivative, Force, Scenario, ThreatRates, EPS_KILL};
pub use sim::{IntegratorConfig, Outcome, StrategyScript, Trajectory};

/// Errors produced by scenario validation, numeric routines, and file I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scenario's parameters or initial counts violate the model contract.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// A fire allocation is outside the unit simplex.
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    /// An integrator or grid configuration value is out of range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was called in a state it does not accept.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Integration produced a non-finite value.
    #[error("numeric failure: {0}")]
    NonFinite(String),

    /// A scenario file could not be parsed.
    #[error("scenario file: {0}")]
    Parse(String),

    /// An underlying I/O operation failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Rounds `value` to `digits` significant decimal digits.
///
/// Used for stable human-facing formatting (summaries, reports) so that
/// binary artifacts like `0.04000000000000001` print as `0.04`.
pub fn round_sig(value: f64, digits: i32) -> f64 {
    if value == 0.0 || !value.is_finite() {
        return value;
    }
    let magnitude = value.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits - 1 - magnitude);
    (value * factor).round() / factor
}
