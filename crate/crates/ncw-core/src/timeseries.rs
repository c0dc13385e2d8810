//! CSV export of trajectories and strategy comparisons.
//!
//! Rows are written with Rust's shortest-round-trip float formatting, so
//! files are lossless, locale-independent, and byte-identical across runs of
//! the same battle.

use std::io::{self, Write};

use serde::Serialize;

use crate::sim::{StrategyComparison, Trajectory};

/// Header of the trajectory CSV schema.
pub const TRAJECTORY_HEADER: &str = "t,b,r,n,a,x,stage_index,pi1,pi2,pi3";

/// One exported trajectory row: the state at an accepted step or event,
/// plus the stage it belongs to and the allocation in force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeseriesRow {
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
    /// Cumulative blue fire.
    pub x: f64,
    /// Stage index.
    pub stage_index: usize,
    /// Fire fraction on red shooters during the stage.
    pub pi1: f64,
    /// Fire fraction on the support force during the stage.
    pub pi2: f64,
    /// Fire fraction on the independent force during the stage.
    pub pi3: f64,
}

/// Flattens a trajectory into CSV rows (initial state, every accepted step,
/// and event states, in time order).
///
/// The initial sample is tagged with the first stage's allocation; a battle
/// decided at `t = 0` has no stages, so the allocation columns fall back to
/// zeros.
pub fn trajectory_rows(trajectory: &Trajectory) -> Vec<TimeseriesRow> {
    trajectory
        .samples
        .iter()
        .map(|sample| {
            let alloc = trajectory
                .stages
                .get(sample.stage)
                .map(|s| s.allocation.as_array())
                .unwrap_or([0.0; 3]);
            TimeseriesRow {
                t: sample.state.t,
                b: sample.state.b,
                r: sample.state.r,
                n: sample.state.n,
                a: sample.state.a,
                x: sample.state.x,
                stage_index: sample.stage,
                pi1: alloc[0],
                pi2: alloc[1],
                pi3: alloc[2],
            }
        })
        .collect()
}

/// Writes a trajectory as CSV with the [`TRAJECTORY_HEADER`] schema.
pub fn write_trajectory<W: Write>(mut out: W, trajectory: &Trajectory) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for row in trajectory_rows(trajectory) {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            row.t, row.b, row.r, row.n, row.a, row.x, row.stage_index, row.pi1, row.pi2, row.pi3
        )?;
    }
    Ok(())
}

/// Writes a strategy comparison as CSV: column `t`, then one blue-level
/// column `b_0`, `b_1`, ... per strategy on the common grid.
pub fn write_comparison<W: Write>(mut out: W, cmp: &StrategyComparison) -> io::Result<()> {
    write!(out, "t")?;
    for i in 0..cmp.curves.len() {
        write!(out, ",b_{i}")?;
    }
    writeln!(out)?;
    for (j, t) in cmp.grid.iter().enumerate() {
        write!(out, "{t}")?;
        for curve in &cmp.curves {
            write!(out, ",{}", curve[j])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Scenario;
    use crate::sim::{compare_strategies, run_battle, IntegratorConfig, StrategyScript};

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

    #[test]
    fn trajectory_csv_has_header_and_initial_row() {
        let tr = run_battle(&case1(), &StrategyScript::greedy(), &IntegratorConfig::default())
            .unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &tr).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRAJECTORY_HEADER);
        let first = lines.next().unwrap();
        assert_eq!(first, "0,170,120,20,50,0,0,0,1,0");
        assert_eq!(text.lines().count(), tr.samples.len() + 1);
    }

    #[test]
    fn trajectory_csv_is_deterministic() {
        let scn = case1();
        let cfg = IntegratorConfig::default();
        let render = || {
            let tr = run_battle(&scn, &StrategyScript::greedy(), &cfg).unwrap();
            let mut buf = Vec::new();
            write_trajectory(&mut buf, &tr).unwrap();
            buf
        };
        assert_eq!(render(), render());
    }

    #[test]
    fn rows_track_stage_allocations() {
        let tr = run_battle(&case1(), &StrategyScript::greedy(), &IntegratorConfig::default())
            .unwrap();
        let rows = trajectory_rows(&tr);
        for row in &rows {
            let expected = tr.stages[row.stage_index].allocation.as_array();
            assert_eq!([row.pi1, row.pi2, row.pi3], expected);
        }
        // All three stages appear.
        assert!(rows.iter().any(|r| r.stage_index == 2));
    }

    #[test]
    fn comparison_csv_shape() {
        let scn = case1();
        let contrast = StrategyScript::scripted(vec![
            crate::model::Allocation::focus_r(),
            crate::model::Allocation::focus_a(),
        ])
        .unwrap();
        let cmp = compare_strategies(
            &scn,
            &[StrategyScript::greedy(), contrast],
            &IntegratorConfig::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_comparison(&mut buf, &cmp).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,b_0,b_1");
        assert_eq!(text.lines().count(), cmp.grid.len() + 1);
        let first = lines.next().unwrap();
        assert!(first.starts_with("0,170,170"));
    }
}
