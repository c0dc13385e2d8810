//! Domain types: scenario parameters, fire allocations, battle state, force
//! derivatives, and the threatening-rate ranking that drives fire allocation.
//!
//! The battle couples four force levels. Blue (`b`) is attrited by red
//! shooters (`r`) and by the independent force (`a`); red's per-shooter
//! effectiveness rises linearly with its surviving support/network force
//! (`n`). Blue fires back, splitting its firepower with an [`Allocation`]
//! `(pi1, pi2, pi3)` over `R`, `N`, and `A`. The cumulative fire delivered by
//! blue, `x = ∫ b dt`, is tracked alongside the force levels because the
//! whole system reduces to closed forms in `x` (see [`crate::analytic`]).

use std::fmt;

use serde::Serialize;

use crate::{Error, Result};

/// Force level at or below which an entity counts as eliminated.
///
/// The integrator snaps any level that falls to `EPS_KILL` or below to an
/// exact `0.0` at accepted steps and event times; derivative pinning keys off
/// that exact zero so that in-flight integrator stages retain full accuracy
/// during the final approach to an elimination.
pub const EPS_KILL: f64 = 1e-9;

/// Maximum tolerated deviation of `pi1 + pi2 + pi3` from 1 at construction.
pub const ALLOCATION_SUM_TOLERANCE: f64 = 1e-12;

/// One of the four forces in a battle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Force {
    /// The blue force `B`.
    Blue,
    /// Red shooters `R`.
    Red,
    /// Red's support/network force `N`.
    Supply,
    /// The independent force `A`.
    Independent,
}

impl Force {
    /// Conventional single-letter label used in logs and CSV summaries.
    pub fn symbol(self) -> char {
        match self {
            Force::Blue => 'B',
            Force::Red => 'R',
            Force::Supply => 'N',
            Force::Independent => 'A',
        }
    }
}

impl fmt::Display for Force {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Attrition parameters and initial force levels for one battle.
///
/// Invariants enforced by [`Scenario::validated`]:
/// * every rate is finite and non-negative;
/// * `alpha_d <= alpha_c` (connectivity can only help red's shooters);
/// * `b0 > 0` (there is a blue force to fight with);
/// * all initial levels are non-negative;
/// * `n0 > 0`, except that `n0 == 0` is admitted in the degenerate fully
///   disconnected form `alpha_c == alpha_d`, where the network slope is zero
///   and `n0` never appears in a denominator. That degenerate form arises
///   when a battle is rebased at a stage boundary after `N` has been
///   destroyed (see [`Scenario::rebased_at`]).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    /// Red per-shooter kill rate against blue at full network support.
    pub alpha_c: f64,
    /// Red per-shooter kill rate against blue with the network destroyed.
    pub alpha_d: f64,
    /// Independent-force per-unit kill rate against blue.
    pub gamma_a: f64,
    /// Blue per-unit kill rate against red shooters.
    pub beta_r: f64,
    /// Blue per-unit kill rate against the support force.
    pub beta_n: f64,
    /// Blue per-unit kill rate against the independent force.
    pub beta_a: f64,
    /// Initial blue level.
    pub b0: f64,
    /// Initial red-shooter level.
    pub r0: f64,
    /// Initial support-force level.
    pub n0: f64,
    /// Initial independent-force level.
    pub a0: f64,
}

impl Scenario {
    /// Checks every scenario invariant, returning `self` on success.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks every scenario invariant.
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("alpha_c", self.alpha_c),
            ("alpha_d", self.alpha_d),
            ("gamma_a", self.gamma_a),
            ("beta_r", self.beta_r),
            ("beta_n", self.beta_n),
            ("beta_a", self.beta_a),
        ];
        for (name, value) in rates {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidScenario(format!(
                    "{name} must be finite and >= 0, got {value}"
                )));
            }
        }
        if self.alpha_d > self.alpha_c {
            return Err(Error::InvalidScenario(format!(
                "alpha_d ({}) must not exceed alpha_c ({})",
                self.alpha_d, self.alpha_c
            )));
        }
        let counts = [
            ("b0", self.b0),
            ("r0", self.r0),
            ("n0", self.n0),
            ("a0", self.a0),
        ];
        for (name, value) in counts {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidScenario(format!(
                    "{name} must be finite and >= 0, got {value}"
                )));
            }
        }
        if self.b0 <= 0.0 {
            return Err(Error::InvalidScenario(format!(
                "b0 must be > 0, got {}",
                self.b0
            )));
        }
        if self.n0 <= 0.0 && self.alpha_c != self.alpha_d {
            return Err(Error::InvalidScenario(format!(
                "n0 must be > 0 when alpha_c != alpha_d, got n0 = {}",
                self.n0
            )));
        }
        Ok(())
    }

    /// Slope of red effectiveness with respect to the support level:
    /// `(alpha_c - alpha_d) / n0`, or zero in the disconnected degenerate
    /// form where `n0 == 0` forces `alpha_c == alpha_d`.
    pub(crate) fn connectivity_slope(&self) -> f64 {
        if self.n0 > 0.0 {
            (self.alpha_c - self.alpha_d) / self.n0
        } else {
            0.0
        }
    }

    /// Red's per-shooter kill rate at support level `n`.
    ///
    /// Linear interpolation between `alpha_d` (no support) and `alpha_c`
    /// (full support at the scenario's own `n0`). `n` outside `[0, n0]` is a
    /// domain error.
    pub fn attrition(&self, n: f64) -> Result<f64> {
        if !n.is_finite() || n < 0.0 || n > self.n0 {
            return Err(Error::Domain(format!(
                "support level {n} outside [0, {}]",
                self.n0
            )));
        }
        Ok(self.alpha_d + self.connectivity_slope() * n)
    }

    /// [`Scenario::attrition`] with `n` clamped into `[0, n0]`, for use on
    /// raw integrator states that may carry tiny transient excursions.
    pub(crate) fn attrition_clamped(&self, n: f64) -> f64 {
        self.alpha_d + self.connectivity_slope() * n.clamp(0.0, self.n0)
    }

    /// Per-target threatening rates against blue at the initial state.
    ///
    /// * `b1 = alpha_c * beta_r` — threat posed (and removable) via `R`;
    /// * `b2 = beta_n * (alpha_c - alpha_d) * r0 / n0` — threat removable
    ///   via the support force, proportional to the shooters it empowers;
    /// * `b3 = gamma_a * beta_a` — threat removable via `A`.
    pub fn threat_rates(&self) -> ThreatRates {
        ThreatRates {
            b1: self.alpha_c * self.beta_r,
            b2: self.beta_n * self.connectivity_slope() * self.r0,
            b3: self.gamma_a * self.beta_a,
        }
    }

    /// Derived scenario whose initial data is the given battle state.
    ///
    /// Used at stage boundaries of multi-stage battles: force levels become
    /// the new initial levels and the connected rate becomes the current
    /// effective rate `attrition(n)`, so the effectiveness slope stays
    /// anchored to the original `n0` (a destroyed fraction of the network
    /// stays destroyed; the slope is a property of the original network).
    ///
    /// Fails if the state has no blue force left (`b == 0`).
    pub fn rebased_at(&self, state: &BattleState) -> Result<Scenario> {
        Scenario {
            alpha_c: self.attrition_clamped(state.n),
            alpha_d: self.alpha_d,
            gamma_a: self.gamma_a,
            beta_r: self.beta_r,
            beta_n: self.beta_n,
            beta_a: self.beta_a,
            b0: state.b,
            r0: state.r,
            n0: state.n.min(self.n0),
            a0: state.a,
        }
        .validated()
    }
}

/// Blue's fire split `(pi1, pi2, pi3)` over `R`, `N`, `A`.
///
/// Components lie in `[0, 1]` and sum to 1. Construction renormalizes sums
/// that deviate from 1 by at most [`ALLOCATION_SUM_TOLERANCE`] and rejects
/// anything farther off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Allocation {
    pi1: f64,
    pi2: f64,
    pi3: f64,
}

impl Allocation {
    /// Builds an allocation, renormalizing tiny sum deviations.
    pub fn new(pi1: f64, pi2: f64, pi3: f64) -> Result<Self> {
        for (name, value) in [("pi1", pi1), ("pi2", pi2), ("pi3", pi3)] {
            if !value.is_finite() || value < 0.0 || value > 1.0 {
                return Err(Error::InvalidAllocation(format!(
                    "{name} must lie in [0, 1], got {value}"
                )));
            }
        }
        let sum = pi1 + pi2 + pi3;
        if (sum - 1.0).abs() > ALLOCATION_SUM_TOLERANCE {
            return Err(Error::InvalidAllocation(format!(
                "components must sum to 1 within {ALLOCATION_SUM_TOLERANCE:e}, got sum {sum}"
            )));
        }
        Ok(Allocation {
            pi1: pi1 / sum,
            pi2: pi2 / sum,
            pi3: pi3 / sum,
        })
    }

    /// All fire on red shooters: `(1, 0, 0)`.
    pub fn focus_r() -> Self {
        Allocation { pi1: 1.0, pi2: 0.0, pi3: 0.0 }
    }

    /// All fire on the support force: `(0, 1, 0)`.
    pub fn focus_n() -> Self {
        Allocation { pi1: 0.0, pi2: 1.0, pi3: 0.0 }
    }

    /// All fire on the independent force: `(0, 0, 1)`.
    pub fn focus_a() -> Self {
        Allocation { pi1: 0.0, pi2: 0.0, pi3: 1.0 }
    }

    /// Fire fraction on red shooters.
    pub fn pi1(&self) -> f64 {
        self.pi1
    }

    /// Fire fraction on the support force.
    pub fn pi2(&self) -> f64 {
        self.pi2
    }

    /// Fire fraction on the independent force.
    pub fn pi3(&self) -> f64 {
        self.pi3
    }

    /// Components as an array `[pi1, pi2, pi3]`.
    pub fn as_array(&self) -> [f64; 3] {
        [self.pi1, self.pi2, self.pi3]
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn component(v: f64) -> String {
            let rounded = crate::round_sig(v, 12);
            if rounded == rounded.round() {
                format!("{}", rounded as i64)
            } else {
                format!("{rounded}")
            }
        }
        write!(
            f,
            "({},{},{})",
            component(self.pi1),
            component(self.pi2),
            component(self.pi3)
        )
    }
}

/// The threatening rate each opposing force poses to blue, together with the
/// rate at which fire on that force removes the threat.
///
/// `b2 == 0` whenever the network confers no advantage (`alpha_c ==
/// alpha_d`) or there are no shooters to empower (`r0 == 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreatRates {
    /// Threat removable through red shooters.
    pub b1: f64,
    /// Threat removable through the support force.
    pub b2: f64,
    /// Threat removable through the independent force.
    pub b3: f64,
}

impl ThreatRates {
    /// The vertex allocation that counters the largest threatening rate.
    ///
    /// Ties break deterministically in the order `R`, then `N`, then `A`,
    /// so `(1,0,0)` wins an exact three-way tie.
    pub fn optimal_allocation(&self) -> Allocation {
        if self.b1 >= self.b2 && self.b1 >= self.b3 {
            Allocation::focus_r()
        } else if self.b2 >= self.b3 {
            Allocation::focus_n()
        } else {
            Allocation::focus_a()
        }
    }

    /// Rates as an array `[b1, b2, b3]`.
    pub fn as_array(&self) -> [f64; 3] {
        [self.b1, self.b2, self.b3]
    }
}

/// Instantaneous battle state.
///
/// `x` is the cumulative fire delivered by blue, `∫ b dt`; it is
/// non-decreasing along any trajectory and is the natural independent
/// variable for the closed forms in [`crate::analytic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BattleState {
    /// Elapsed time.
    pub t: f64,
    /// Blue level.
    pub b: f64,
    /// Red-shooter level.
    pub r: f64,
    /// Support-force level.
    pub n: f64,
    /// Independent-force level.
    pub a: f64,
    /// Cumulative blue fire `∫ b dt`.
    pub x: f64,
}

impl BattleState {
    /// The state at `t = 0` for a scenario.
    pub fn initial(scn: &Scenario) -> Self {
        BattleState {
            t: 0.0,
            b: scn.b0,
            r: scn.r0,
            n: scn.n0,
            a: scn.a0,
            x: 0.0,
        }
    }

    /// Builds a state, rejecting negative levels and non-finite values.
    pub fn new(t: f64, b: f64, r: f64, n: f64, a: f64, x: f64) -> Result<Self> {
        for (name, value) in [("t", t), ("b", b), ("r", r), ("n", n), ("a", a), ("x", x)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::Domain(format!(
                    "state component {name} must be finite and >= 0, got {value}"
                )));
            }
        }
        Ok(BattleState { t, b, r, n, a, x })
    }

    /// True when every component is finite.
    pub fn is_finite(&self) -> bool {
        [self.t, self.b, self.r, self.n, self.a, self.x]
            .iter()
            .all(|v| v.is_finite())
    }

    /// Force levels as `[b, r, n, a]`.
    pub fn levels(&self) -> [f64; 4] {
        [self.b, self.r, self.n, self.a]
    }
}

/// Time derivatives of a [`BattleState`] under a fixed allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    /// `db/dt`
    pub db: f64,
    /// `dr/dt`
    pub dr: f64,
    /// `dn/dt`
    pub dn: f64,
    /// `da/dt`
    pub da: f64,
    /// `dx/dt` (equals the live blue level)
    pub dx: f64,
}

impl Derivative {
    /// The all-zero derivative (battle frozen).
    pub const ZERO: Derivative = Derivative {
        db: 0.0,
        dr: 0.0,
        dn: 0.0,
        da: 0.0,
        dx: 0.0,
    };
}

/// Coupled force derivatives at `state` under allocation `alloc`.
///
/// ```text
/// db/dt = -attrition(n) * r - gamma_a * a
/// dr/dt = -pi1 * beta_r * b
/// dn/dt = -pi2 * beta_n * b
/// da/dt = -pi3 * beta_a * b
/// dx/dt = b
/// ```
///
/// Elimination semantics: a force level that is exactly `0.0` (the value the
/// integrator assigns at elimination) has its own derivative pinned to zero
/// — eliminated forces neither fire nor absorb fire. A blue level of exactly
/// `0.0` freezes the whole system. Transient negative levels that appear
/// inside integrator stages are clamped to zero *as inputs* (they contribute
/// no fire) while their own derivatives stay live, which preserves the
/// integrator's order of accuracy through an elimination.
pub fn rhs(scn: &Scenario, alloc: &Allocation, state: &BattleState) -> Derivative {
    if state.b == 0.0 {
        return Derivative::ZERO;
    }
    let b_eff = state.b.max(0.0);
    let r_eff = state.r.max(0.0);
    let a_eff = state.a.max(0.0);
    Derivative {
        db: -scn.attrition_clamped(state.n) * r_eff - scn.gamma_a * a_eff,
        dr: if state.r == 0.0 {
            0.0
        } else {
            -alloc.pi1 * scn.beta_r * b_eff
        },
        dn: if state.n == 0.0 {
            0.0
        } else {
            -alloc.pi2 * scn.beta_n * b_eff
        },
        da: if state.a == 0.0 {
            0.0
        } else {
            -alloc.pi3 * scn.beta_a * b_eff
        },
        dx: b_eff,
    }
}
