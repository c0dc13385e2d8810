//! Shared helpers for the integration suites: loading bundled scenario
//! files and running their battles.

use std::path::PathBuf;

use ncw_core::scenario::ScenarioFile;
use ncw_core::sim::{run_battle, IntegratorConfig, StrategyScript, Trajectory};
use ncw_core::Scenario;

/// Path to a bundled scenario file at the repository root.
pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

/// Loads a bundled scenario file.
pub fn load(name: &str) -> ScenarioFile {
    ScenarioFile::from_path(scenario_path(name))
        .unwrap_or_else(|e| panic!("bundled scenario {name} must parse: {e}"))
}

/// Scenario, strategy, and integrator config from a bundled file.
pub fn battle_setup(name: &str) -> (Scenario, StrategyScript, IntegratorConfig) {
    let file = load(name);
    (
        file.scenario().expect("bundled scenario must validate"),
        file.strategy().expect("bundled strategy must validate"),
        file.integrator().expect("bundled integrator must validate"),
    )
}

/// Runs the battle described by a bundled file.
pub fn run_bundled(name: &str) -> (Scenario, Trajectory) {
    let (scn, script, cfg) = battle_setup(name);
    let trajectory = run_battle(&scn, &script, &cfg).expect("bundled battle must simulate");
    (scn, trajectory)
}

/// Every bundled battle file.
pub const ALL_BATTLES: [&str; 7] = [
    "case1.toml",
    "case2.toml",
    "case3.toml",
    "case1_contrast.toml",
    "case2_contrast.toml",
    "case3_contrast_a.toml",
    "case3_contrast_b.toml",
];
