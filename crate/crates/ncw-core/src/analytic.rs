//! Closed forms in the cumulative-fire variable `x = ∫ b dt`.
//!
//! Under a fixed allocation, each targeted force declines linearly in `x`
//! (not in time): fire delivered is fire received. Substituting those linear
//! laws into blue's loss rate and integrating once yields an energy-style
//! invariant that pins the blue level to a cubic polynomial in `x`:
//!
//! ```text
//! b(x)^2 = -(2/3) c1 x^3 + c2 x^2 - 2 c3 x + c4
//! ```
//!
//! These forms hold piecewise — within one stage, while no force crosses
//! zero. Multi-stage battles re-derive the coefficients at each boundary
//! from the boundary state (see [`crate::model::Scenario::rebased_at`]).
//! The invariant doubles as an integrator diagnostic: along an exact
//! trajectory [`energy_residual`] is identically zero, so its drift measures
//! integration error directly.

use serde::Serialize;

use crate::model::{Allocation, BattleState, Scenario};
use crate::{Error, Result};

/// Coefficients of the cubic energy form for one scenario and allocation.
///
/// `c1` vanishes at every vertex allocation (it carries the `pi1 * pi2`
/// cross-term), `c2` weighs the allocation against the threatening rates,
/// `c3` is blue's initial loss rate, and `c4 = b0^2` anchors the invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedCoefficients {
    /// Cubic coefficient: `pi1 pi2 beta_r beta_n (alpha_c - alpha_d) / n0`.
    pub c1: f64,
    /// Quadratic coefficient: `pi1 b1 + pi2 b2 + pi3 b3` in threat-rate form.
    pub c2: f64,
    /// Linear coefficient: `alpha_c r0 + gamma_a a0` (initial blue loss rate).
    pub c3: f64,
    /// Constant term `b0^2`.
    pub c4: f64,
}

/// Computes the energy-form coefficients for `scn` under `alloc`.
///
/// `c2` equals the allocation-weighted sum of the threatening rates,
/// `pi1 b1 + pi2 b2 + pi3 b3`, which is what makes the vertex against the
/// largest rate optimal.
pub fn reduced_coefficients(scn: &Scenario, alloc: &Allocation) -> ReducedCoefficients {
    let slope = scn.connectivity_slope();
    let c1 = alloc.pi1() * alloc.pi2() * scn.beta_r * scn.beta_n * slope;
    let c2 = alloc.pi1() * scn.alpha_c * scn.beta_r
        + alloc.pi2() * scn.beta_n * slope * scn.r0
        + alloc.pi3() * scn.gamma_a * scn.beta_a;
    let c3 = scn.alpha_c * scn.r0 + scn.gamma_a * scn.a0;
    let c4 = scn.b0 * scn.b0;
    ReducedCoefficients { c1, c2, c3, c4 }
}

/// Force levels at cumulative fire `x` under a fixed allocation, clamped at
/// zero once a force's share of fire has destroyed it:
///
/// ```text
/// r(x) = max(0, r0 - pi1 beta_r x)
/// n(x) = max(0, n0 - pi2 beta_n x)
/// a(x) = max(0, a0 - pi3 beta_a x)
/// ```
///
/// The unclamped forms are exact only up to the first zero crossing; past it
/// the clamp matches the simulator's pinned-at-zero semantics.
pub fn linear_states_from_x(scn: &Scenario, alloc: &Allocation, x: f64) -> (f64, f64, f64) {
    let r = (scn.r0 - alloc.pi1() * scn.beta_r * x).max(0.0);
    let n = (scn.n0 - alloc.pi2() * scn.beta_n * x).max(0.0);
    let a = (scn.a0 - alloc.pi3() * scn.beta_a * x).max(0.0);
    (r, n, a)
}

/// Blue level at cumulative fire `x` from the energy invariant.
///
/// Valid within the first stage (no force eliminated yet). A negative
/// radicand means `x` lies beyond blue's annihilation point and is a domain
/// error; tiny negative values within `1e-9 * c4` of zero are treated as
/// roundoff and clamped to zero.
pub fn b_from_energy(coeffs: &ReducedCoefficients, x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "cumulative fire must be finite and >= 0, got {x}"
        )));
    }
    let radicand = radicand(coeffs, x);
    if radicand < 0.0 {
        if radicand > -1e-9 * coeffs.c4.abs() {
            return Ok(0.0);
        }
        return Err(Error::Domain(format!(
            "cumulative fire x = {x} lies beyond blue annihilation (b^2 = {radicand})"
        )));
    }
    Ok(radicand.sqrt())
}

/// Deviation of a state from the energy invariant:
/// `b^2 + (2/3) c1 x^3 - c2 x^2 + 2 c3 x - c4`.
///
/// Identically zero along exact first-stage trajectories; along an RK4
/// trajectory with step `h` it grows as `O(h^4)`, so halving the step
/// shrinks the worst residual about sixteen-fold (until the residual reaches
/// the floor set by double-precision roundoff).
pub fn energy_residual(coeffs: &ReducedCoefficients, state: &BattleState) -> f64 {
    state.b * state.b - radicand(coeffs, state.x)
}

fn radicand(coeffs: &ReducedCoefficients, x: f64) -> f64 {
    -(2.0 / 3.0) * coeffs.c1 * x.powi(3) + coeffs.c2 * x * x - 2.0 * coeffs.c3 * x + coeffs.c4
}
