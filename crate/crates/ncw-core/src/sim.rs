//! Fixed-step RK4 integration with bisection-refined elimination events,
//! multi-stage battles, and pointwise strategy comparison.
//!
//! A battle proceeds in stages. Within a stage the fire allocation is
//! constant; the stage ends when a force level crosses zero (an elimination
//! event, localized in time by bisection) or when the time budget runs out.
//! At each stage boundary the next allocation comes from the strategy: a
//! fixed script or the greedy policy that re-ranks threatening rates against
//! the surviving forces.

use serde::Serialize;

use crate::model::{rhs, Allocation, BattleState, Force, Scenario, ThreatRates, EPS_KILL};
use crate::{Error, Result};

/// Margin below zero tolerated when testing pointwise dominance of one
/// strategy's blue curve over another's.
pub const DOMINANCE_TOLERANCE: f64 = 1e-6;

/// Number of points on the common time grid used by [`compare_strategies`].
pub const COMPARISON_GRID_POINTS: usize = 1001;

/// Fixed-step integrator settings.
///
/// Memory for a run grows as `max_time / step` samples in the worst
/// (timeout) case, so lower `max_time` when probing stalemates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    /// RK4 step size.
    pub step: f64,
    /// Time-axis width to which elimination events are bisected.
    pub event_tolerance: f64,
    /// Simulated-time budget; reaching it makes the battle a [`Outcome::Timeout`].
    pub max_time: f64,
}

impl IntegratorConfig {
    /// Builds a config, validating `0 < event_tolerance <= step` and
    /// `max_time > 0`.
    pub fn new(step: f64, event_tolerance: f64, max_time: f64) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "step must be finite and > 0, got {step}"
            )));
        }
        if !event_tolerance.is_finite() || event_tolerance <= 0.0 || event_tolerance > step {
            return Err(Error::InvalidConfig(format!(
                "event_tolerance must lie in (0, step], got {event_tolerance}"
            )));
        }
        if !max_time.is_finite() || max_time <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "max_time must be finite and > 0, got {max_time}"
            )));
        }
        Ok(IntegratorConfig { step, event_tolerance, max_time })
    }

    /// Same config with a different time budget.
    pub fn with_max_time(mut self, max_time: f64) -> Self {
        self.max_time = max_time;
        self
    }
}

impl Default for IntegratorConfig {
    /// Step `1e-3`, event tolerance `1e-10`, time budget `1e4`.
    fn default() -> Self {
        IntegratorConfig {
            step: 1e-3,
            event_tolerance: 1e-10,
            max_time: 1e4,
        }
    }
}

/// How blue picks its allocation at each stage boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StrategyScript {
    /// Recompute threatening rates against the surviving forces at every
    /// stage boundary and fire everything at the largest one. Eliminated
    /// forces contribute a zero rate.
    Greedy,
    /// Fixed per-stage allocations. The final entry holds if the battle
    /// outlives the script.
    Scripted(Vec<Allocation>),
}

impl StrategyScript {
    /// The greedy (recomputed-rates) policy.
    pub fn greedy() -> Self {
        StrategyScript::Greedy
    }

    /// A fixed script; rejects an empty stage list.
    pub fn scripted(stages: Vec<Allocation>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidConfig(
                "a scripted strategy needs at least one stage allocation".into(),
            ));
        }
        Ok(StrategyScript::Scripted(stages))
    }
}

/// An elimination event: one or more forces crossed zero.
///
/// `eliminated` lists every force that crossed within the same bisected
/// step (simultaneous eliminations are recorded together); `state` is the
/// battle state at the event time with the crossed levels pinned to exactly
/// `0.0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageEvent {
    /// Event time.
    pub time: f64,
    /// Forces eliminated at this event.
    pub eliminated: Vec<Force>,
    /// State at the event, eliminated levels exactly zero.
    pub state: BattleState,
}

/// One accepted integrator state, tagged with the stage it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    /// Index into [`Trajectory::stages`].
    pub stage: usize,
    /// The accepted state.
    pub state: BattleState,
}

/// The allocation in force from `start_time` until the next event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageRecord {
    /// Stage index, starting at 0.
    pub index: usize,
    /// Allocation in force during the stage.
    pub allocation: Allocation,
    /// Time the stage began.
    pub start_time: f64,
}

/// How a battle ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    /// Both red shooters and the independent force were destroyed while
    /// blue survived.
    BlueWins,
    /// Blue was destroyed (mutual annihilation counts here: blue did not
    /// survive).
    BlueLoses,
    /// The time budget ran out first.
    Timeout,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let label = match self {
            Outcome::BlueWins => "BlueWins",
            Outcome::BlueLoses => "BlueLoses",
            Outcome::Timeout => "Timeout",
        };
        write!(f, "{label}")
    }
}

/// A complete simulated battle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// Accepted states in time order, starting with the initial state.
    pub samples: Vec<Sample>,
    /// Elimination events in time order.
    pub events: Vec<StageEvent>,
    /// Stage records in order.
    pub stages: Vec<StageRecord>,
    /// How the battle ended.
    pub outcome: Outcome,
}

impl Trajectory {
    /// The last accepted state.
    pub fn final_state(&self) -> &BattleState {
        &self.samples.last().expect("a trajectory always has samples").state
    }

    /// Time of the last accepted state.
    pub fn end_time(&self) -> f64 {
        self.final_state().t
    }
}

/// Result of integrating one stage: accepted states after the stage's start
/// state, and the event that ended it (`None` means the time budget ran
/// out).
#[derive(Debug, Clone, PartialEq)]
pub struct StageRun {
    /// Accepted states, excluding the entry state; the event state is last
    /// when an event occurred.
    pub samples: Vec<BattleState>,
    /// The elimination that ended the stage, if any.
    pub event: Option<StageEvent>,
}

/// Raw RK4 step, no clamping: the classical 4-stage scheme.
fn rk4_raw(scn: &Scenario, alloc: &Allocation, state: &BattleState, h: f64) -> BattleState {
    let advance = |s: &BattleState, d: &crate::model::Derivative, dt: f64| BattleState {
        t: state.t + dt,
        b: s.b + d.db * dt,
        r: s.r + d.dr * dt,
        n: s.n + d.dn * dt,
        a: s.a + d.da * dt,
        x: s.x + d.dx * dt,
    };
    let k1 = rhs(scn, alloc, state);
    let s2 = advance(state, &k1, 0.5 * h);
    let k2 = rhs(scn, alloc, &s2);
    let s3 = advance(state, &k2, 0.5 * h);
    let k3 = rhs(scn, alloc, &s3);
    let s4 = advance(state, &k3, h);
    let k4 = rhs(scn, alloc, &s4);
    BattleState {
        t: state.t + h,
        b: state.b + h / 6.0 * (k1.db + 2.0 * k2.db + 2.0 * k3.db + k4.db),
        r: state.r + h / 6.0 * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr),
        n: state.n + h / 6.0 * (k1.dn + 2.0 * k2.dn + 2.0 * k3.dn + k4.dn),
        a: state.a + h / 6.0 * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da),
        x: state.x + h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
    }
}

/// Snaps force levels at or below [`EPS_KILL`] to exactly zero.
fn clamp_eliminated(mut state: BattleState) -> BattleState {
    if state.b <= EPS_KILL {
        state.b = 0.0;
    }
    if state.r <= EPS_KILL {
        state.r = 0.0;
    }
    if state.n <= EPS_KILL {
        state.n = 0.0;
    }
    if state.a <= EPS_KILL {
        state.a = 0.0;
    }
    state
}

/// One accepted RK4 step: raw step, then elimination clamping.
///
/// Fails with a numeric error if the raw step produces a non-finite value
/// (checked before clamping, which would otherwise snap `-inf` levels to
/// zero and mask the failure).
pub fn step_rk4(
    scn: &Scenario,
    alloc: &Allocation,
    state: &BattleState,
    h: f64,
) -> Result<BattleState> {
    let raw = rk4_raw(scn, alloc, state, h);
    if !raw.is_finite() {
        return Err(Error::NonFinite(format!(
            "integration step from t = {} produced a non-finite state",
            state.t
        )));
    }
    Ok(clamp_eliminated(raw))
}

/// Forces that were alive in `before` and at or below [`EPS_KILL`] in `after`.
fn crossed_forces(before: &BattleState, after: &BattleState) -> Vec<Force> {
    let mut hits = Vec::new();
    for (force, prev, next) in [
        (Force::Blue, before.b, after.b),
        (Force::Red, before.r, after.r),
        (Force::Supply, before.n, after.n),
        (Force::Independent, before.a, after.a),
    ] {
        if prev > EPS_KILL && next <= EPS_KILL {
            hits.push(force);
        }
    }
    hits
}

/// Locates the first elimination between two consecutive accepted states.
///
/// `after` must be the accepted step taken from `before`. Returns `None`
/// when no force crossed zero in the bracket. Otherwise the crossing is
/// refined by bisection on the step fraction until the time bracket is
/// narrower than `event_tolerance`, and the returned event carries the state
/// at the refined time with every crossed level pinned to exactly `0.0`.
/// Forces crossing within the same refined bracket are reported together.
pub fn detect_elimination(
    scn: &Scenario,
    alloc: &Allocation,
    before: &BattleState,
    after: &BattleState,
    event_tolerance: f64,
) -> Option<StageEvent> {
    if crossed_forces(before, after).is_empty() {
        return None;
    }
    let h = after.t - before.t;
    let mut lo = 0.0f64;
    let mut hi = h;
    while hi - lo > event_tolerance {
        let mid = 0.5 * (lo + hi);
        if crossed_forces(before, &rk4_raw(scn, alloc, before, mid)).is_empty() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let at_event = rk4_raw(scn, alloc, before, hi);
    let eliminated = crossed_forces(before, &at_event);
    let mut state = clamp_eliminated(at_event);
    // Pin the crossed levels exactly; clamping already snapped any level
    // at or below the kill threshold, including the crossed ones.
    for force in &eliminated {
        match force {
            Force::Blue => state.b = 0.0,
            Force::Red => state.r = 0.0,
            Force::Supply => state.n = 0.0,
            Force::Independent => state.a = 0.0,
        }
    }
    Some(StageEvent { time: state.t, eliminated, state })
}

/// Integrates one stage under a constant allocation.
///
/// Requires a live blue force facing at least one live opponent among `R`
/// and `A` (otherwise the battle is already decided). Ends at the first
/// elimination event or when `cfg.max_time` is reached (`event == None`).
pub fn run_stage(
    scn: &Scenario,
    alloc: &Allocation,
    start: &BattleState,
    cfg: &IntegratorConfig,
) -> Result<StageRun> {
    if start.b <= EPS_KILL {
        return Err(Error::Precondition(format!(
            "stage start at t = {} has no blue force",
            start.t
        )));
    }
    if start.r <= EPS_KILL && start.a <= EPS_KILL {
        return Err(Error::Precondition(format!(
            "stage start at t = {} has no armed opponent (R and A both gone)",
            start.t
        )));
    }
    let mut samples = Vec::new();
    let mut state = *start;
    loop {
        let remaining = cfg.max_time - state.t;
        if remaining <= cfg.event_tolerance {
            return Ok(StageRun { samples, event: None });
        }
        let h = cfg.step.min(remaining);
        let next = step_rk4(scn, alloc, &state, h)?;
        if let Some(event) = detect_elimination(scn, alloc, &state, &next, cfg.event_tolerance) {
            samples.push(event.state);
            return Ok(StageRun { samples, event: Some(event) });
        }
        samples.push(next);
        state = next;
    }
}

/// Outcome implied by a state, if the battle is decided.
fn decided_outcome(state: &BattleState) -> Option<Outcome> {
    if state.b == 0.0 {
        Some(Outcome::BlueLoses)
    } else if state.r == 0.0 && state.a == 0.0 {
        Some(Outcome::BlueWins)
    } else {
        None
    }
}

/// The allocation a strategy picks for the stage beginning at `state`.
fn stage_allocation(
    scn: &Scenario,
    script: &StrategyScript,
    stage_index: usize,
    state: &BattleState,
) -> Result<Allocation> {
    match script {
        StrategyScript::Scripted(stages) => {
            Ok(stages[stage_index.min(stages.len() - 1)])
        }
        StrategyScript::Greedy => {
            let raw = scn.rebased_at(state)?.threat_rates();
            let rates = ThreatRates {
                b1: if state.r > 0.0 { raw.b1 } else { 0.0 },
                b2: raw.b2, // already zero when N or R is gone
                b3: if state.a > 0.0 { raw.b3 } else { 0.0 },
            };
            Ok(rates.optimal_allocation())
        }
    }
}

/// Simulates a full battle from the scenario's initial state.
///
/// Stages are stitched at elimination events until the battle is decided
/// (blue destroyed, or both `R` and `A` destroyed) or the time budget runs
/// out.
pub fn run_battle(
    scn: &Scenario,
    script: &StrategyScript,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    scn.validate()?;
    let mut state = BattleState::initial(scn);
    let mut samples = vec![Sample { stage: 0, state }];
    let mut events = Vec::new();
    let mut stages: Vec<StageRecord> = Vec::new();
    let outcome = loop {
        if let Some(outcome) = decided_outcome(&state) {
            break outcome;
        }
        if cfg.max_time - state.t <= cfg.event_tolerance {
            break Outcome::Timeout;
        }
        let index = stages.len();
        let allocation = stage_allocation(scn, script, index, &state)?;
        stages.push(StageRecord { index, allocation, start_time: state.t });
        let run = run_stage(scn, &allocation, &state, cfg)?;
        samples.extend(run.samples.iter().map(|&s| Sample { stage: index, state: s }));
        if let Some(last) = run.samples.last() {
            state = *last;
        }
        match run.event {
            Some(event) => events.push(event),
            None => break Outcome::Timeout,
        }
    };
    Ok(Trajectory { samples, events, stages, outcome })
}

/// Linear interpolation of blue level over a time-ordered series, frozen at
/// the first/last values outside the covered range.
pub(crate) fn lerp_series(series: &[(f64, f64)], t: f64) -> f64 {
    debug_assert!(!series.is_empty());
    if t <= series[0].0 {
        return series[0].1;
    }
    if t >= series[series.len() - 1].0 {
        return series[series.len() - 1].1;
    }
    let idx = series.partition_point(|&(ts, _)| ts <= t);
    let (t0, b0) = series[idx - 1];
    let (t1, b1) = series[idx];
    if t1 == t0 {
        return b1;
    }
    b0 + (b1 - b0) * (t - t0) / (t1 - t0)
}

/// Verdict on one contrast strategy versus the reference strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Verdict {
    /// Reference blue curve is pointwise at or above the contrast's
    /// (within [`DOMINANCE_TOLERANCE`]).
    Dominated {
        /// Smallest `reference - contrast` margin over the grid.
        worst_margin: f64,
    },
    /// The contrast exceeds the reference somewhere beyond tolerance.
    NotDominated {
        /// Smallest (most negative) margin over the grid.
        worst_margin: f64,
        /// Grid time where it occurs.
        at_time: f64,
    },
    /// The battles ended differently; pointwise comparison of blue levels
    /// does not rank them.
    DifferentOutcome {
        /// Reference strategy's outcome.
        reference: Outcome,
        /// Contrast strategy's outcome.
        contrast: Outcome,
    },
}

/// Battles for several strategies on one scenario, aligned on a common grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyComparison {
    /// Common time grid spanning the longest battle.
    pub grid: Vec<f64>,
    /// `curves[i][j]` is strategy `i`'s blue level at `grid[j]`; battles
    /// that end early hold their final blue level.
    pub curves: Vec<Vec<f64>>,
    /// Per-strategy outcome.
    pub outcomes: Vec<Outcome>,
    /// Per-strategy final state.
    pub final_states: Vec<BattleState>,
    /// One verdict per contrast strategy (`strategies[1..]`) against the
    /// reference (`strategies[0]`).
    pub verdicts: Vec<Verdict>,
}

/// Runs every strategy on the same scenario and compares blue curves on a
/// common [`COMPARISON_GRID_POINTS`]-point grid.
///
/// The first strategy is the reference. Requires at least two strategies.
/// Runs are independent, so results are identical no matter how callers
/// order or parallelize the underlying battles.
pub fn compare_strategies(
    scn: &Scenario,
    strategies: &[StrategyScript],
    cfg: &IntegratorConfig,
) -> Result<StrategyComparison> {
    if strategies.len() < 2 {
        return Err(Error::Precondition(format!(
            "comparison needs a reference and at least one contrast, got {} strategies",
            strategies.len()
        )));
    }
    let trajectories = strategies
        .iter()
        .map(|script| run_battle(scn, script, cfg))
        .collect::<Result<Vec<_>>>()?;
    let t_end = trajectories
        .iter()
        .map(|tr| tr.end_time())
        .fold(0.0f64, f64::max);
    let n = COMPARISON_GRID_POINTS;
    let grid: Vec<f64> = (0..n)
        .map(|j| t_end * j as f64 / (n - 1) as f64)
        .collect();
    let curves: Vec<Vec<f64>> = trajectories
        .iter()
        .map(|tr| {
            let series: Vec<(f64, f64)> =
                tr.samples.iter().map(|s| (s.state.t, s.state.b)).collect();
            grid.iter().map(|&t| lerp_series(&series, t)).collect()
        })
        .collect();
    let outcomes: Vec<Outcome> = trajectories.iter().map(|tr| tr.outcome).collect();
    let final_states: Vec<BattleState> =
        trajectories.iter().map(|tr| *tr.final_state()).collect();
    let verdicts = (1..strategies.len())
        .map(|i| {
            if outcomes[i] != outcomes[0] {
                return Verdict::DifferentOutcome {
                    reference: outcomes[0],
                    contrast: outcomes[i],
                };
            }
            let mut worst_margin = f64::INFINITY;
            let mut at_time = 0.0;
            for j in 0..n {
                let margin = curves[0][j] - curves[i][j];
                if margin < worst_margin {
                    worst_margin = margin;
                    at_time = grid[j];
                }
            }
            if worst_margin >= -DOMINANCE_TOLERANCE {
                Verdict::Dominated { worst_margin }
            } else {
                Verdict::NotDominated { worst_margin, at_time }
            }
        })
        .collect();
    Ok(StrategyComparison { grid, curves, outcomes, final_states, verdicts })
}
