//! Acceptance gate: one test per release criterion, each printing a single
//! `ACCEPTANCE <n> (<name>): PASS|FAIL` line (visible with `--nocapture`;
//! cargo also replays the line when a criterion fails).
//!
//! Run with:
//!
//! ```text
//! cargo test -p ncw-core --test acceptance -- --nocapture
//! ```

mod common;

use std::time::Instant;

use common::{battle_setup, load, run_bundled};
use ncw_core::analytic::{b_from_energy, energy_residual, reduced_coefficients, linear_states_from_x};
use ncw_core::model::{Allocation, BattleState, Scenario, ThreatRates};
use ncw_core::oracle::{verify_dominance, verify_scalarization_minimum, SimplexGrid};
use ncw_core::sim::{
    compare_strategies, run_battle, run_stage, IntegratorConfig, Outcome, StrategyScript, Verdict,
};

fn report(number: usize, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {number} ({name}): {status} — {detail}");
    assert!(pass, "criterion {number} ({name}) failed: {detail}");
}

fn bundled_cases() -> [(&'static str, Scenario); 3] {
    [
        ("case1", load("case1.toml").scenario().unwrap()),
        ("case2", load("case2.toml").scenario().unwrap()),
        ("case3", load("case3.toml").scenario().unwrap()),
    ]
}

#[test]
fn acceptance_1_threatening_rates() {
    let expected = [
        ("case1", [0.2, 0.45, 0.04], Allocation::focus_n()),
        ("case2", [0.2, 0.12, 0.04], Allocation::focus_r()),
        ("case3", [0.2, 0.08, 0.3], Allocation::focus_a()),
    ];
    let mut worst = 0.0f64;
    let mut pass = true;
    let mut detail = String::new();
    for ((case, scn), (_, rates_expected, alloc_expected)) in
        bundled_cases().iter().zip(&expected)
    {
        let rates = scn.threat_rates();
        for (got, want) in rates.as_array().iter().zip(rates_expected) {
            worst = worst.max((got - want).abs());
        }
        if worst > 1e-12 {
            pass = false;
        }
        if rates.optimal_allocation() != *alloc_expected {
            pass = false;
            detail.push_str(&format!("{case} allocation mismatch; "));
        }
    }
    detail.push_str(&format!("worst rate deviation {worst:.2e} (tolerance 1e-12)"));
    report(1, "threatening rates", pass, &detail);
}

#[test]
fn acceptance_2_tie_breaking() {
    let three_way = ThreatRates { b1: 0.5, b2: 0.5, b3: 0.5 };
    let two_way = ThreatRates { b1: 0.1, b2: 0.3, b3: 0.3 };
    let repeats_stable = (0..100).all(|_| {
        three_way.optimal_allocation() == Allocation::focus_r()
            && two_way.optimal_allocation() == Allocation::focus_n()
    });
    let pass = three_way.optimal_allocation() == Allocation::focus_r()
        && two_way.optimal_allocation() == Allocation::focus_n()
        && repeats_stable;
    report(
        2,
        "deterministic tie-breaking",
        pass,
        "three-way tie -> (1,0,0), support/independent tie -> (0,1,0), stable across repeats",
    );
}

#[test]
fn acceptance_3_greedy_multistage_case1() {
    let start = Instant::now();
    let (_, trajectory) = run_bundled("case1.toml");
    let elapsed = start.elapsed();
    let allocs: Vec<Allocation> = trajectory.stages.iter().map(|s| s.allocation).collect();
    let expected = vec![Allocation::focus_n(), Allocation::focus_r(), Allocation::focus_a()];
    let pass = allocs == expected
        && trajectory.outcome == Outcome::BlueWins
        && elapsed.as_secs_f64() < 1.0;
    let detail = format!(
        "stages (0,1,0)->(1,0,0)->(0,0,1): {}, outcome {}, runtime {:.2}s (budget 1s)",
        allocs == expected,
        trajectory.outcome,
        elapsed.as_secs_f64()
    );
    report(3, "greedy multi-stage battle", pass, &detail);
}

#[test]
fn acceptance_4_qualitative_outcomes() {
    let start = Instant::now();
    let cfg = IntegratorConfig::default();
    let mut clauses: Vec<(String, bool)> = Vec::new();

    // Helper: outcome of a bundled contrast file plus domination verdict
    // against the greedy reference on the same scenario.
    let mut contrast = |file: &str, expect_outcome: Outcome, expect_dominated: Option<bool>| {
        let scenario_file = load(file);
        let scn = scenario_file.scenario().unwrap();
        let script = scenario_file.strategy().unwrap();
        let trajectory = run_battle(&scn, &script, &cfg).unwrap();
        let outcome_ok = trajectory.outcome == expect_outcome;
        clauses.push((
            format!("{file} ends {expect_outcome} (got {})", trajectory.outcome),
            outcome_ok,
        ));
        if let Some(expect) = expect_dominated {
            let cmp = compare_strategies(&scn, &[StrategyScript::greedy(), script], &cfg).unwrap();
            let dominated = matches!(cmp.verdicts[0], Verdict::Dominated { .. });
            let margin = match &cmp.verdicts[0] {
                Verdict::Dominated { worst_margin } => *worst_margin,
                Verdict::NotDominated { worst_margin, .. } => *worst_margin,
                Verdict::DifferentOutcome { .. } => f64::NAN,
            };
            clauses.push((
                format!("{file} dominated by greedy (margin {margin:.2e})"),
                dominated == expect,
            ));
        }
    };

    contrast("case1_contrast.toml", Outcome::BlueWins, Some(true));
    contrast("case2_contrast.toml", Outcome::BlueWins, Some(true));
    contrast("case3_contrast_a.toml", Outcome::BlueWins, None);
    contrast("case3_contrast_b.toml", Outcome::BlueLoses, None);

    let elapsed = start.elapsed();
    clauses.push((
        format!("runtime {:.2}s (budget 5s)", elapsed.as_secs_f64()),
        elapsed.as_secs_f64() < 5.0,
    ));

    let pass = clauses.iter().all(|(_, ok)| *ok);
    let detail = clauses
        .iter()
        .map(|(text, ok)| format!("[{}] {text}", if *ok { "ok" } else { "FAILED" }))
        .collect::<Vec<_>>()
        .join("; ");
    report(4, "qualitative strategy outcomes", pass, &detail);
}

/// Worst |energy residual| over the first stage under the optimal vertex at
/// the given step size.
fn first_stage_worst_residual(scn: &Scenario, step: f64) -> f64 {
    let alloc = scn.threat_rates().optimal_allocation();
    let coeffs = reduced_coefficients(scn, &alloc);
    let cfg = IntegratorConfig::new(step, 1e-10, 1e4).unwrap();
    let run = run_stage(scn, &alloc, &BattleState::initial(scn), &cfg).unwrap();
    run.samples
        .iter()
        .map(|s| energy_residual(&coeffs, s).abs())
        .fold(0.0f64, f64::max)
}

#[test]
fn acceptance_5_energy_invariant() {
    let mut pass = true;
    let mut details = Vec::new();
    for (case, scn) in bundled_cases() {
        let at_pinned = first_stage_worst_residual(&scn, 1e-3);
        let bound = 1e-6 * scn.b0 * scn.b0;
        if at_pinned > bound {
            pass = false;
        }

        // Fourth-order convergence: the residual shrinks ~16x per halving
        // while truncation error dominates. At the pinned 1e-3 step the
        // residual already sits at the double-precision floor (~1e-10
        // absolute here), so the ratio is measured at the largest bundled
        // steps and the floor-limited ratio is reported alongside.
        let coarse = first_stage_worst_residual(&scn, 8e-3);
        let fine = first_stage_worst_residual(&scn, 4e-3);
        let ratio = coarse / fine;
        if !(8.0..=48.0).contains(&ratio) {
            pass = false;
        }
        let floor_ratio = at_pinned / first_stage_worst_residual(&scn, 5e-4);
        details.push(format!(
            "{case}: max|res|@1e-3 {at_pinned:.2e} <= {bound:.2e}, halving 8e-3->4e-3 x{ratio:.1}, \
             at-floor 1e-3->5e-4 x{floor_ratio:.1}"
        ));
    }
    report(5, "energy invariant", pass, &details.join("; "));
}

#[test]
fn acceptance_6_energy_form_blue_level() {
    let mut pass = true;
    let mut details = Vec::new();
    for (case, scn) in bundled_cases() {
        let alloc = scn.threat_rates().optimal_allocation();
        let coeffs = reduced_coefficients(&scn, &alloc);
        let cfg = IntegratorConfig::default();
        let run = run_stage(&scn, &alloc, &BattleState::initial(&scn), &cfg).unwrap();
        let worst_rel = run
            .samples
            .iter()
            .map(|s| {
                let predicted = b_from_energy(&coeffs, s.x).unwrap();
                (predicted - s.b).abs() / s.b
            })
            .fold(0.0f64, f64::max);
        if worst_rel > 1e-4 {
            pass = false;
        }
        details.push(format!("{case}: worst relative deviation {worst_rel:.2e}"));
    }
    details.push("tolerance 1e-4 relative".into());
    report(6, "energy-form blue level", pass, &details.join("; "));
}

#[test]
fn acceptance_7_linear_force_levels() {
    let mut pass = true;
    let mut worst_overall = 0.0f64;
    for name in ["case1.toml", "case2.toml", "case3.toml"] {
        let (scn, trajectory) = run_bundled(name);
        // Stage starts: initial sample, then each event state.
        let mut start = trajectory.samples[0].state;
        for record in &trajectory.stages {
            let stage_scn = if record.index == 0 {
                scn.clone()
            } else {
                scn.rebased_at(&start).unwrap()
            };
            for sample in trajectory.samples.iter().filter(|s| s.stage == record.index) {
                let xi = sample.state.x - start.x;
                let (r, n, a) = linear_states_from_x(&stage_scn, &record.allocation, xi);
                let err = (r - sample.state.r)
                    .abs()
                    .max((n - sample.state.n).abs())
                    .max((a - sample.state.a).abs());
                worst_overall = worst_overall.max(err);
            }
            if record.index < trajectory.events.len() {
                start = trajectory.events[record.index].state;
            }
        }
    }
    if worst_overall > 1e-9 {
        pass = false;
    }
    let detail = format!(
        "worst absolute reconstruction error {worst_overall:.2e} (tolerance 1e-9) across all stages of the three bundled cases"
    );
    report(7, "linear force levels in cumulative fire", pass, &detail);
}

#[test]
fn acceptance_8_oracles() {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    let cfg = IntegratorConfig::default();
    let dominance_grid = SimplexGrid::new(10).unwrap();
    let scalarization_grid = SimplexGrid::new(20).unwrap();
    let lambdas: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    for (case, scn) in bundled_cases() {
        let dominance = verify_dominance(&scn, &dominance_grid, &cfg).unwrap();
        if !dominance.passed {
            pass = false;
        }
        let scalarization =
            verify_scalarization_minimum(&scn, &scalarization_grid, &lambdas).unwrap();
        if !scalarization.passed {
            pass = false;
        }
        details.push(format!(
            "{case}: dominance k=10 {} (worst margin {:.1e}), scalarization k=20 {} over {} weights",
            if dominance.passed { "ok" } else { "FAILED" },
            dominance.worst_margin,
            if scalarization.passed { "ok" } else { "FAILED" },
            scalarization.checks.len()
        ));
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 30.0 {
        pass = false;
    }
    details.push(format!("runtime {:.1}s (budget 30s)", elapsed.as_secs_f64()));
    report(8, "allocation oracles", pass, &details.join("; "));
}

#[test]
fn acceptance_9_event_localization() {
    let (scn, _, cfg) = battle_setup("case1.toml");
    let alloc = Allocation::focus_n();
    let run = run_stage(&scn, &alloc, &BattleState::initial(&scn), &cfg).unwrap();
    let event = run.event.expect("case 1 first stage ends in an elimination");
    let x_error = (event.state.x - 20.0 / 0.3).abs();

    let tighter = IntegratorConfig::new(cfg.step, cfg.event_tolerance / 10.0, cfg.max_time).unwrap();
    let refined = run_stage(&scn, &alloc, &BattleState::initial(&scn), &tighter)
        .unwrap()
        .event
        .unwrap();
    let time_shift = (event.time - refined.time).abs();

    let pass = x_error <= 1e-6 && time_shift < 1e-10;
    let detail = format!(
        "support elimination at cumulative fire 20/0.3: error {x_error:.2e} (tolerance 1e-6); \
         tolerance/10 re-run moves the event {time_shift:.2e} (bound 1e-10)"
    );
    report(9, "event localization", pass, &detail);
}
