//! Independent verification oracles for the optimal fire allocation.
//!
//! Two cross-checks, deliberately using different machinery than the
//! threatening-rate ranking they validate:
//!
//! * [`verify_dominance`] — brute force over a simplex grid of constant
//!   allocations, simulating each and checking that the claimed optimal
//!   vertex keeps the blue level pointwise highest up to the first
//!   elimination under any competitor.
//! * [`verify_scalarization_minimum`] — for a sweep of trade-off weights,
//!   checks that the claimed vertex minimizes the scalarized objective that
//!   balances the cubic cross-term of the energy form against the
//!   allocation-weighted threatening rate.

use serde::Serialize;

use crate::model::{Allocation, BattleState, Scenario};
use crate::sim::{lerp_series, run_stage, IntegratorConfig};
use crate::{Error, Result};

/// Number of sample times on `[0, horizon]` used by [`verify_dominance`].
pub const DOMINANCE_SAMPLE_TIMES: usize = 50;

/// Margin below zero tolerated by [`verify_dominance`].
pub const DOMINANCE_MARGIN_TOLERANCE: f64 = 1e-6;

/// Slack allowed when testing vertex minimality of the scalarized objective.
pub const SCALARIZATION_TOLERANCE: f64 = 1e-12;

/// Smallest grid resolution accepted by [`verify_scalarization_minimum`].
pub const MIN_SCALARIZATION_RESOLUTION: usize = 10;

/// A triangular grid over the allocation simplex: all `(i/k, j/k, (k-i-j)/k)`
/// with `i + j <= k`, which is `(k+1)(k+2)/2` points including the vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimplexGrid {
    resolution: usize,
}

impl SimplexGrid {
    /// Builds a grid of the given resolution (`k >= 1`).
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidConfig(
                "simplex grid resolution must be >= 1".into(),
            ));
        }
        Ok(SimplexGrid { resolution })
    }

    /// The grid resolution `k`.
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Number of grid points, `(k+1)(k+2)/2`.
    pub fn len(&self) -> usize {
        (self.resolution + 1) * (self.resolution + 2) / 2
    }

    /// Always false: a grid has at least three points (the vertices).
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Materializes the grid points.
    pub fn points(&self) -> Vec<Allocation> {
        let k = self.resolution;
        let mut points = Vec::with_capacity(self.len());
        for i in 0..=k {
            for j in 0..=(k - i) {
                let pi1 = i as f64 / k as f64;
                let pi2 = j as f64 / k as f64;
                let pi3 = (k - i - j) as f64 / k as f64;
                points.push(
                    Allocation::new(pi1, pi2, pi3)
                        .expect("simplex grid points satisfy the allocation invariants"),
                );
            }
        }
        points
    }
}

/// Scalarized allocation objective with trade-off weight `lambda`:
/// `lambda * (a * pi1 * pi2) - (1 - lambda) * (b1 pi1 + b2 pi2 + b3 pi3)`
/// where `a = beta_r * beta_n * (alpha_c - alpha_d) / n0`.
///
/// The product term is the cubic cross-term coefficient of the energy form
/// (zero at vertices, non-negative inside the simplex) and the linear term
/// is the allocation-weighted threatening rate, so for every `lambda` in
/// `(0, 1)` the vertex against the largest rate minimizes the objective.
pub fn scalarized_objective(scn: &Scenario, alloc: &Allocation, lambda: f64) -> f64 {
    let a = scn.beta_r * scn.beta_n * scn.connectivity_slope();
    let rates = scn.threat_rates();
    let product_term = a * alloc.pi1() * alloc.pi2();
    let threat_term =
        rates.b1 * alloc.pi1() + rates.b2 * alloc.pi2() + rates.b3 * alloc.pi3();
    lambda * product_term - (1.0 - lambda) * threat_term
}

/// One trade-off weight's minimality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaCheck {
    /// Trade-off weight.
    pub lambda: f64,
    /// Smallest objective value found on the grid.
    pub grid_min: f64,
    /// A grid point attaining it.
    pub minimizer: Allocation,
    /// Objective value at the claimed optimal vertex.
    pub vertex_value: f64,
    /// True when the vertex value is within tolerance of the grid minimum.
    pub passed: bool,
}

/// Result of [`verify_scalarization_minimum`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarizationReport {
    /// Grid resolution used.
    pub resolution: usize,
    /// The claimed optimal vertex under test.
    pub optimal: Allocation,
    /// One check per trade-off weight.
    pub checks: Vec<LambdaCheck>,
    /// True when every check passed.
    pub passed: bool,
}

/// Verifies that the threatening-rate vertex minimizes the scalarized
/// objective over a simplex grid, for each weight in `lambdas`.
///
/// Requires resolution at least [`MIN_SCALARIZATION_RESOLUTION`] (coarser
/// grids can miss interior structure) and every `lambda` strictly inside
/// `(0, 1)`.
pub fn verify_scalarization_minimum(
    scn: &Scenario,
    grid: &SimplexGrid,
    lambdas: &[f64],
) -> Result<ScalarizationReport> {
    if grid.resolution() < MIN_SCALARIZATION_RESOLUTION {
        return Err(Error::Precondition(format!(
            "scalarization check needs grid resolution >= {MIN_SCALARIZATION_RESOLUTION}, got {}",
            grid.resolution()
        )));
    }
    for &lambda in lambdas {
        if !lambda.is_finite() || lambda <= 0.0 || lambda >= 1.0 {
            return Err(Error::Precondition(format!(
                "trade-off weight must lie strictly in (0, 1), got {lambda}"
            )));
        }
    }
    let optimal = scn.threat_rates().optimal_allocation();
    let points = grid.points();
    let checks: Vec<LambdaCheck> = lambdas
        .iter()
        .map(|&lambda| {
            let vertex_value = scalarized_objective(scn, &optimal, lambda);
            let mut grid_min = f64::INFINITY;
            let mut minimizer = optimal;
            for point in &points {
                let value = scalarized_objective(scn, point, lambda);
                if value < grid_min {
                    grid_min = value;
                    minimizer = *point;
                }
            }
            LambdaCheck {
                lambda,
                grid_min,
                minimizer,
                vertex_value,
                passed: vertex_value <= grid_min + SCALARIZATION_TOLERANCE,
            }
        })
        .collect();
    let passed = checks.iter().all(|c| c.passed);
    Ok(ScalarizationReport {
        resolution: grid.resolution(),
        optimal,
        checks,
        passed,
    })
}

/// A competitor allocation that beat the optimal one somewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominanceViolation {
    /// The competitor allocation.
    pub competitor: Allocation,
    /// Sample time of the worst excess.
    pub time: f64,
    /// `optimal_b - competitor_b` there (more negative than tolerance).
    pub margin: f64,
}

/// Result of [`verify_dominance`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    /// Grid resolution used.
    pub resolution: usize,
    /// The claimed optimal vertex under test.
    pub optimal: Allocation,
    /// Comparison horizon: the earliest first-elimination time over the
    /// grid (battles diverge structurally past the first elimination).
    pub horizon: f64,
    /// Number of sample times on `[0, horizon]`.
    pub sample_times: usize,
    /// Smallest margin observed over all competitors and times.
    pub worst_margin: f64,
    /// Competitor attaining the worst margin.
    pub worst_competitor: Allocation,
    /// Sample time of the worst margin.
    pub worst_time: f64,
    /// All competitors that beat the optimal beyond tolerance.
    pub violations: Vec<DominanceViolation>,
    /// True when no violations were found.
    pub passed: bool,
}

/// Brute-force dominance check of the threatening-rate vertex.
///
/// Simulates one constant-allocation stage per grid point, takes the
/// earliest first-elimination time as the comparison horizon (capped by
/// `cfg.max_time`), then compares blue levels at
/// [`DOMINANCE_SAMPLE_TIMES`] equally spaced times on `[0, horizon]`. The
/// optimal vertex must stay within [`DOMINANCE_MARGIN_TOLERANCE`] of every
/// competitor pointwise.
pub fn verify_dominance(
    scn: &Scenario,
    grid: &SimplexGrid,
    cfg: &IntegratorConfig,
) -> Result<DominanceReport> {
    scn.validate()?;
    let optimal = scn.threat_rates().optimal_allocation();
    let initial = BattleState::initial(scn);
    let points = grid.points();

    // Pass 1: first-elimination horizon over the grid.
    let mut horizon = cfg.max_time;
    for alloc in &points {
        let run = run_stage(scn, alloc, &initial, cfg)?;
        if let Some(event) = run.event {
            horizon = horizon.min(event.time);
        }
    }

    // Pass 2: blue-level profiles on [0, horizon].
    let capped = cfg.with_max_time(horizon.max(cfg.step));
    let profile = |alloc: &Allocation| -> Result<Vec<(f64, f64)>> {
        let run = run_stage(scn, alloc, &initial, &capped)?;
        let mut series = vec![(initial.t, initial.b)];
        series.extend(run.samples.iter().map(|s| (s.t, s.b)));
        Ok(series)
    };
    let optimal_profile = profile(&optimal)?;

    let sample_times: Vec<f64> = (0..DOMINANCE_SAMPLE_TIMES)
        .map(|i| horizon * i as f64 / (DOMINANCE_SAMPLE_TIMES - 1) as f64)
        .collect();

    let mut worst_margin = f64::INFINITY;
    let mut worst_competitor = optimal;
    let mut worst_time = 0.0;
    let mut violations = Vec::new();
    for alloc in &points {
        let series = profile(alloc)?;
        let mut alloc_worst = f64::INFINITY;
        let mut alloc_worst_time = 0.0;
        for &t in &sample_times {
            let margin = lerp_series(&optimal_profile, t) - lerp_series(&series, t);
            if margin < alloc_worst {
                alloc_worst = margin;
                alloc_worst_time = t;
            }
        }
        if alloc_worst < worst_margin {
            worst_margin = alloc_worst;
            worst_competitor = *alloc;
            worst_time = alloc_worst_time;
        }
        if alloc_worst < -DOMINANCE_MARGIN_TOLERANCE {
            violations.push(DominanceViolation {
                competitor: *alloc,
                time: alloc_worst_time,
                margin: alloc_worst,
            });
        }
    }
    let passed = violations.is_empty();
    Ok(DominanceReport {
        resolution: grid.resolution(),
        optimal,
        horizon,
        sample_times: DOMINANCE_SAMPLE_TIMES,
        worst_margin,
        worst_competitor,
        worst_time,
        violations,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case1() -> Scenario {
        Scenario {
            alpha_c: 0.4,
            alpha_d: 0.15,
            gamma_a: 0.2,
            beta_r: 0.5,
            beta_n: 0.3,
            beta_a: 0.2,
            b0: 170.0,
            r0: 120.0,
            n0: 20.0,
            a0: 50.0,
        }
        .validated()
        .unwrap()
    }

    fn case3() -> Scenario {
        Scenario {
            alpha_c: 0.4,
            alpha_d: 0.2,
            gamma_a: 0.6,
            beta_r: 0.5,
            beta_n: 0.2,
            beta_a: 0.5,
            b0: 170.0,
            r0: 120.0,
            n0: 60.0,
            a0: 50.0,
        }
        .validated()
        .unwrap()
    }

    #[test]
    fn grid_size_and_vertices() {
        let grid = SimplexGrid::new(10).unwrap();
        assert_eq!(grid.len(), 66);
        let points = grid.points();
        assert_eq!(points.len(), 66);
        assert!(points.contains(&Allocation::focus_r()));
        assert!(points.contains(&Allocation::focus_n()));
        assert!(points.contains(&Allocation::focus_a()));
    }

    #[test]
    fn grid_rejects_zero_resolution() {
        assert!(matches!(SimplexGrid::new(0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn resolution_one_grid_is_exactly_the_vertices() {
        let points = SimplexGrid::new(1).unwrap().points();
        assert_eq!(points.len(), 3);
    }

    #[test]
    fn scalarized_objective_case1_focus_n() {
        let value = scalarized_objective(&case1(), &Allocation::focus_n(), 0.5);
        assert!((value - (-0.225)).abs() <= 1e-12);
    }

    #[test]
    fn scalarized_objective_case3_focus_a() {
        let value = scalarized_objective(&case3(), &Allocation::focus_a(), 0.3);
        assert!((value - (-0.21)).abs() <= 1e-12);
    }

    #[test]
    fn product_term_vanishes_at_vertices() {
        let scn = case1();
        for alloc in [Allocation::focus_r(), Allocation::focus_n(), Allocation::focus_a()] {
            // At lambda -> 1 the objective is the pure product term.
            let near_one = scalarized_objective(&scn, &alloc, 0.999999);
            assert!(near_one.abs() < 1e-5);
        }
    }

    #[test]
    fn scalarization_sweep_passes_on_case1() {
        let grid = SimplexGrid::new(20).unwrap();
        let lambdas: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        let report = verify_scalarization_minimum(&case1(), &grid, &lambdas).unwrap();
        assert!(report.passed);
        assert_eq!(report.optimal, Allocation::focus_n());
        for check in &report.checks {
            assert!(check.passed, "lambda {} failed", check.lambda);
        }
    }

    #[test]
    fn scalarization_rejects_coarse_grid_and_bad_lambda() {
        let scn = case1();
        let coarse = SimplexGrid::new(5).unwrap();
        assert!(matches!(
            verify_scalarization_minimum(&scn, &coarse, &[0.5]),
            Err(Error::Precondition(_))
        ));
        let grid = SimplexGrid::new(10).unwrap();
        assert!(matches!(
            verify_scalarization_minimum(&scn, &grid, &[1.0]),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            verify_scalarization_minimum(&scn, &grid, &[0.0]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn dominance_passes_on_case1_grid10() {
        let grid = SimplexGrid::new(10).unwrap();
        let report = verify_dominance(&case1(), &grid, &IntegratorConfig::default()).unwrap();
        assert!(report.passed, "worst margin {}", report.worst_margin);
        assert!(report.worst_margin >= -DOMINANCE_MARGIN_TOLERANCE);
        assert_eq!(report.optimal, Allocation::focus_n());
        assert!(report.horizon > 0.0 && report.horizon < 1.0);
    }

    #[test]
    fn dominance_on_vertices_only_case3() {
        let grid = SimplexGrid::new(1).unwrap();
        let report = verify_dominance(&case3(), &grid, &IntegratorConfig::default()).unwrap();
        assert!(report.passed);
        assert_eq!(report.optimal, Allocation::focus_a());
    }

    #[test]
    fn dominance_holds_in_degenerate_submodel_without_independent_force() {
        // gamma_a = 0 and a0 = 0 collapses the model to blue versus the
        // networked shooters only; the rate ranking must still dominate.
        let scn = Scenario {
            gamma_a: 0.0,
            a0: 0.0,
            ..case1()
        }
        .validated()
        .unwrap();
        let grid = SimplexGrid::new(10).unwrap();
        let report = verify_dominance(&scn, &grid, &IntegratorConfig::default()).unwrap();
        assert!(report.passed, "worst margin {}", report.worst_margin);
        assert_eq!(report.optimal, Allocation::focus_n());
    }

    #[test]
    fn refinement_does_not_create_violations() {
        let coarse = SimplexGrid::new(5).unwrap();
        let fine = SimplexGrid::new(10).unwrap();
        let cfg = IntegratorConfig::default();
        let scn = case1();
        let r_coarse = verify_dominance(&scn, &coarse, &cfg).unwrap();
        let r_fine = verify_dominance(&scn, &fine, &cfg).unwrap();
        assert!(r_coarse.passed && r_fine.passed);
        // Refining the grid may only tighten the worst margin slightly; it
        // must not surface a qualitatively different answer.
        assert!((r_coarse.worst_margin - r_fine.worst_margin).abs() < 1e-6);
    }
}
