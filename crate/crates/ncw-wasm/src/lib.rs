//! Browser bindings for the battle toolkit in `ncw-core`.
//!
//! Three operations are exported through `wasm-bindgen`, each taking and
//! returning JSON strings so the page needs no generated glue types:
//!
//! * [`threat_report`] — threatening rates and the optimal allocation.
//! * [`simulate`] — integrate a battle; returns outcome, stages, events,
//!   and a downsampled trajectory suitable for plotting.
//! * [`compare`] — run a contrast strategy against a reference on the same
//!   battle and report the domination verdict with aligned blue curves.
//!
//! The scenario JSON uses the exact schema of the on-disk TOML scenario
//! files (`parameters`, `initial`, optional `strategy` and `integrator`
//! tables), so presets can be copied between the CLI and the page.
//!
//! All computation lives in plain Rust functions (`*_inner`) that are unit
//! tested on the host; the `wasm-bindgen` wrappers only translate errors.

use ncw_core::scenario::ScenarioFile;
use ncw_core::sim::{compare_strategies, run_battle, Sample, Trajectory, Verdict};
use ncw_core::{Error, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Threatening rates and the allocation that counters the largest one.
#[wasm_bindgen]
pub fn threat_report(scenario_json: &str) -> std::result::Result<String, JsError> {
    threat_report_inner(scenario_json).map_err(into_js)
}

/// Integrates the battle described by `scenario_json`; the trajectory is
/// thinned to roughly `max_points` samples (stage boundaries, the first,
/// and the last sample are always kept).
#[wasm_bindgen]
pub fn simulate(scenario_json: &str, max_points: usize) -> std::result::Result<String, JsError> {
    simulate_inner(scenario_json, max_points).map_err(into_js)
}

/// Runs the contrast scenario's strategy against the reference scenario's
/// own strategy. Both files must describe the same battle (identical
/// parameters and initial levels).
#[wasm_bindgen]
pub fn compare(
    reference_json: &str,
    contrast_json: &str,
    max_points: usize,
) -> std::result::Result<String, JsError> {
    compare_inner(reference_json, contrast_json, max_points).map_err(into_js)
}

fn into_js(err: Error) -> JsError {
    JsError::new(&err.to_string())
}

fn parse_scenario(json: &str) -> Result<ScenarioFile> {
    serde_json::from_str(json).map_err(|e| Error::Parse(format!("scenario JSON: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Parse(format!("response JSON: {e}")))
}

#[derive(Serialize)]
struct RatesOut {
    b1: f64,
    b2: f64,
    b3: f64,
}

#[derive(Serialize)]
struct ThreatReportOut {
    rates: RatesOut,
    allocation: [f64; 3],
    label: String,
}

pub(crate) fn threat_report_inner(scenario_json: &str) -> Result<String> {
    let file = parse_scenario(scenario_json)?;
    let scn = file.scenario()?;
    let rates = scn.threat_rates();
    let allocation = rates.optimal_allocation();
    to_json(&ThreatReportOut {
        rates: RatesOut { b1: rates.b1, b2: rates.b2, b3: rates.b3 },
        allocation: allocation.as_array(),
        label: allocation.to_string(),
    })
}

#[derive(Serialize)]
struct SampleOut {
    t: f64,
    b: f64,
    r: f64,
    n: f64,
    a: f64,
    x: f64,
    stage: usize,
}

impl SampleOut {
    fn from_sample(sample: &Sample) -> Self {
        let s = sample.state;
        SampleOut { t: s.t, b: s.b, r: s.r, n: s.n, a: s.a, x: s.x, stage: sample.stage }
    }
}

#[derive(Serialize)]
struct StageOut {
    index: usize,
    allocation: [f64; 3],
    label: String,
    start_time: f64,
}

#[derive(Serialize)]
struct EventOut {
    time: f64,
    /// Symbols of the eliminated forces (`"R"`, `"N"`, `"A"`, `"B"`).
    eliminated: Vec<String>,
    cumulative_fire: f64,
}

#[derive(Serialize)]
struct BattleOut {
    outcome: String,
    final_state: SampleOut,
    stages: Vec<StageOut>,
    events: Vec<EventOut>,
    samples: Vec<SampleOut>,
}

/// Indices to keep when thinning `samples` for plotting: the first and
/// last samples and every stage boundary survive; interior samples are
/// strided to land near `max_points` total.
fn downsample_indices(samples: &[Sample], max_points: usize) -> Vec<usize> {
    let len = samples.len();
    let max_points = max_points.max(2);
    let stride = len.div_ceil(max_points).max(1);
    let mut keep: Vec<usize> = Vec::new();
    for i in 0..len {
        let boundary = i == 0 || i == len - 1 || (i > 0 && samples[i].stage != samples[i - 1].stage);
        if boundary || i % stride == 0 {
            keep.push(i);
        }
    }
    keep
}

fn battle_out(trajectory: &Trajectory, max_points: usize) -> BattleOut {
    let samples: Vec<SampleOut> = downsample_indices(&trajectory.samples, max_points)
        .into_iter()
        .map(|i| SampleOut::from_sample(&trajectory.samples[i]))
        .collect();
    let stages = trajectory
        .stages
        .iter()
        .map(|s| StageOut {
            index: s.index,
            allocation: s.allocation.as_array(),
            label: s.allocation.to_string(),
            start_time: s.start_time,
        })
        .collect();
    let events = trajectory
        .events
        .iter()
        .map(|e| EventOut {
            time: e.time,
            eliminated: e.eliminated.iter().map(|f| f.symbol().to_string()).collect(),
            cumulative_fire: e.state.x,
        })
        .collect();
    let last = trajectory.samples.last().expect("a trajectory always has samples");
    BattleOut {
        outcome: trajectory.outcome.to_string(),
        final_state: SampleOut::from_sample(last),
        stages,
        events,
        samples,
    }
}

pub(crate) fn simulate_inner(scenario_json: &str, max_points: usize) -> Result<String> {
    let file = parse_scenario(scenario_json)?;
    let scn = file.scenario()?;
    let script = file.strategy()?;
    let cfg = file.integrator()?;
    let trajectory = run_battle(&scn, &script, &cfg)?;
    to_json(&battle_out(&trajectory, max_points))
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum VerdictOut {
    Dominated { worst_margin: f64 },
    NotDominated { worst_margin: f64, at_time: f64 },
    DifferentOutcome { reference: String, contrast: String },
}

#[derive(Serialize)]
struct CompareOut {
    grid: Vec<f64>,
    /// `curves[0]` is the reference blue level, `curves[1]` the contrast.
    curves: Vec<Vec<f64>>,
    outcomes: Vec<String>,
    verdict: VerdictOut,
}

/// Thins the comparison grid the same way samples are thinned.
fn stride_indices(len: usize, max_points: usize) -> Vec<usize> {
    let max_points = max_points.max(2);
    let stride = len.div_ceil(max_points).max(1);
    let mut keep: Vec<usize> = (0..len).step_by(stride).collect();
    if keep.last() != Some(&(len - 1)) && len > 0 {
        keep.push(len - 1);
    }
    keep
}

pub(crate) fn compare_inner(
    reference_json: &str,
    contrast_json: &str,
    max_points: usize,
) -> Result<String> {
    let reference = parse_scenario(reference_json)?;
    let contrast = parse_scenario(contrast_json)?;
    if !contrast.same_battle_as(&reference) {
        return Err(Error::InvalidConfig(
            "the contrast describes a different battle: compare needs identical \
             parameters and initial levels"
                .into(),
        ));
    }
    let scn = reference.scenario()?;
    let cfg = reference.integrator()?;
    let scripts = vec![reference.strategy()?, contrast.strategy()?];
    let comparison = compare_strategies(&scn, &scripts, &cfg)?;

    let keep = stride_indices(comparison.grid.len(), max_points);
    let grid: Vec<f64> = keep.iter().map(|&i| comparison.grid[i]).collect();
    let curves: Vec<Vec<f64>> = comparison
        .curves
        .iter()
        .map(|curve| keep.iter().map(|&i| curve[i]).collect())
        .collect();
    let verdict = match &comparison.verdicts[0] {
        Verdict::Dominated { worst_margin } => {
            VerdictOut::Dominated { worst_margin: *worst_margin }
        }
        Verdict::NotDominated { worst_margin, at_time } => {
            VerdictOut::NotDominated { worst_margin: *worst_margin, at_time: *at_time }
        }
        Verdict::DifferentOutcome { reference, contrast } => VerdictOut::DifferentOutcome {
            reference: reference.to_string(),
            contrast: contrast.to_string(),
        },
    };
    to_json(&CompareOut {
        grid,
        curves,
        outcomes: comparison.outcomes.iter().map(|o| o.to_string()).collect(),
        verdict,
    })
}
