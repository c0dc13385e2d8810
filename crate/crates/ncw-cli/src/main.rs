//! `ncw` — command-line front end for the battle toolkit in `ncw-core`.
//!
//! Subcommands:
//!
//! * `rates`    — threatening rates and the optimal allocation vertex.
//! * `simulate` — integrate a battle, print a summary, optionally write CSV.
//! * `compare`  — pit contrast strategies against a scenario's own strategy.
//! * `verify`   — run the dominance and scalarization oracles.
//!
//! Exit codes: `0` success, `1` invalid input (parse or validation), `2`
//! oracle violation, `3` I/O failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use ncw_core::oracle::{verify_dominance, verify_scalarization_minimum, SimplexGrid};
use ncw_core::scenario::ScenarioFile;
use ncw_core::sim::{compare_strategies, run_battle, Trajectory, Verdict};
use ncw_core::timeseries::{write_comparison, write_trajectory};
use ncw_core::{round_sig, Error, Result};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_ORACLE: u8 = 2;
const EXIT_IO: u8 = 3;

/// Battle simulation and fire-allocation analysis for a blue force facing
/// armed red shooters, a red support force, and an independent red force.
#[derive(Parser)]
#[command(name = "ncw", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the threatening rates and the optimal allocation for a scenario.
    Rates {
        /// Scenario TOML file.
        scenario: PathBuf,
    },
    /// Integrate the battle described by a scenario file and print a summary.
    Simulate {
        /// Scenario TOML file.
        scenario: PathBuf,
        /// Write the trajectory as CSV to this path.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare contrast strategies against a scenario's own strategy.
    Compare {
        /// Reference scenario TOML file; its strategy is the baseline.
        scenario: PathBuf,
        /// Contrast scenario file (same parameters and initial levels,
        /// different strategy); repeatable.
        #[arg(short = 's', long = "strategy", required = true)]
        strategies: Vec<PathBuf>,
        /// Write the aligned blue-level curves as CSV to this path.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Audit the optimal allocation with the dominance and scalarization
    /// oracles.
    Verify {
        /// Scenario TOML file.
        scenario: PathBuf,
        /// Simplex grid resolution (the grid has (k+1)(k+2)/2 points).
        #[arg(long, default_value_t = 10)]
        grid: usize,
        /// Comma-separated trade-off weights, each strictly in (0, 1).
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes; anything else is a
            // usage error. Clap's default exit code of 2 is reserved here
            // for oracle violations, so usage errors map to 1.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err {
                Error::Io(_) => EXIT_IO,
                _ => EXIT_INVALID,
            })
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Rates { scenario } => cmd_rates(&scenario),
        Command::Simulate { scenario, output } => cmd_simulate(&scenario, output.as_deref()),
        Command::Compare { scenario, strategies, output } => {
            cmd_compare(&scenario, &strategies, output.as_deref())
        }
        Command::Verify { scenario, grid, lambdas } => cmd_verify(&scenario, grid, lambdas),
    }
}

/// Renders a value to `digits` significant digits without trailing noise.
fn fmt_sig(value: f64, digits: i32) -> String {
    format!("{}", round_sig(value, digits))
}

/// Wraps an I/O error with the path it concerns.
fn annotate_io(err: io::Error, path: &Path) -> Error {
    Error::Io(io::Error::new(err.kind(), format!("{}: {err}", path.display())))
}

fn cmd_rates(path: &Path) -> Result<u8> {
    let file = ScenarioFile::from_path(path)?;
    let scn = file.scenario()?;
    let rates = scn.threat_rates();
    println!(
        "b1={} b2={} b3={}, allocation={}",
        fmt_sig(rates.b1, 12),
        fmt_sig(rates.b2, 12),
        fmt_sig(rates.b3, 12),
        rates.optimal_allocation()
    );
    Ok(EXIT_OK)
}

fn cmd_simulate(path: &Path, output: Option<&Path>) -> Result<u8> {
    let file = ScenarioFile::from_path(path)?;
    let scn = file.scenario()?;
    let script = file.strategy()?;
    let cfg = file.integrator()?;
    let trajectory = run_battle(&scn, &script, &cfg)?;
    if let Some(csv_path) = output {
        let out = File::create(csv_path).map_err(|e| annotate_io(e, csv_path))?;
        let mut writer = BufWriter::new(out);
        write_trajectory(&mut writer, &trajectory)?;
        writer.flush().map_err(|e| annotate_io(e, csv_path))?;
    }
    print_summary(&trajectory);
    Ok(EXIT_OK)
}

fn print_summary(trajectory: &Trajectory) {
    println!("outcome {}", trajectory.outcome);
    let end = trajectory.final_state();
    println!(
        "final t={} b={} r={} n={} a={} x={}",
        fmt_sig(end.t, 6),
        fmt_sig(end.b, 6),
        fmt_sig(end.r, 6),
        fmt_sig(end.n, 6),
        fmt_sig(end.a, 6),
        fmt_sig(end.x, 6)
    );
    for stage in &trajectory.stages {
        println!(
            "stage {} allocation {} from t={}",
            stage.index,
            stage.allocation,
            fmt_sig(stage.start_time, 6)
        );
        if let Some(event) = trajectory.events.get(stage.index) {
            let eliminated = event
                .eliminated
                .iter()
                .map(|f| f.symbol().to_string())
                .collect::<Vec<_>>()
                .join("+");
            println!("event t={} eliminated {eliminated}", fmt_sig(event.time, 6));
        }
    }
}

fn cmd_compare(path: &Path, strategy_paths: &[PathBuf], output: Option<&Path>) -> Result<u8> {
    let reference = ScenarioFile::from_path(path)?;
    let scn = reference.scenario()?;
    let cfg = reference.integrator()?;
    let mut scripts = vec![reference.strategy()?];
    let mut labels = vec![path.display().to_string()];
    for contrast_path in strategy_paths {
        let contrast = ScenarioFile::from_path(contrast_path)?;
        if !contrast.same_battle_as(&reference) {
            return Err(Error::InvalidConfig(format!(
                "{} describes a different battle than {}: compare needs identical \
                 parameters and initial levels",
                contrast_path.display(),
                path.display()
            )));
        }
        scripts.push(contrast.strategy()?);
        labels.push(contrast_path.display().to_string());
    }
    let comparison = compare_strategies(&scn, &scripts, &cfg)?;
    if let Some(csv_path) = output {
        let out = File::create(csv_path).map_err(|e| annotate_io(e, csv_path))?;
        let mut writer = BufWriter::new(out);
        write_comparison(&mut writer, &comparison)?;
        writer.flush().map_err(|e| annotate_io(e, csv_path))?;
    }
    println!("reference {}: outcome {}", labels[0], comparison.outcomes[0]);
    for (i, verdict) in comparison.verdicts.iter().enumerate() {
        let label = &labels[i + 1];
        match verdict {
            Verdict::Dominated { worst_margin } => println!(
                "{label}: dominated by reference (worst margin {})",
                fmt_sig(*worst_margin, 6)
            ),
            Verdict::NotDominated { worst_margin, at_time } => println!(
                "{label}: NOT dominated (margin {} at t={})",
                fmt_sig(*worst_margin, 6),
                fmt_sig(*at_time, 6)
            ),
            Verdict::DifferentOutcome { reference, contrast } => println!(
                "{label}: different outcome (reference {reference}, contrast {contrast})"
            ),
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(path: &Path, grid_k: usize, lambdas: Option<Vec<f64>>) -> Result<u8> {
    let file = ScenarioFile::from_path(path)?;
    let scn = file.scenario()?;
    let cfg = file.integrator()?;

    let grid = SimplexGrid::new(grid_k)?;
    let dominance = verify_dominance(&scn, &grid, &cfg)?;
    println!(
        "dominance: {} (grid k={}, horizon {}, worst margin {})",
        pass_str(dominance.passed),
        dominance.resolution,
        fmt_sig(dominance.horizon, 6),
        fmt_sig(dominance.worst_margin, 6)
    );
    for violation in &dominance.violations {
        println!(
            "  violation: competitor {} leads by {} at t={}",
            violation.competitor,
            fmt_sig(-violation.margin, 6),
            fmt_sig(violation.time, 6)
        );
    }

    // The scalarization oracle refuses coarse grids, so run it at the
    // requested resolution or its documented minimum, whichever is finer.
    let lambdas =
        lambdas.unwrap_or_else(|| (1..=9).map(|i| f64::from(i) / 10.0).collect());
    let scalarization_grid =
        SimplexGrid::new(grid_k.max(ncw_core::oracle::MIN_SCALARIZATION_RESOLUTION))?;
    let scalarization = verify_scalarization_minimum(&scn, &scalarization_grid, &lambdas)?;
    println!(
        "scalarization: {} (grid k={}, {} weights)",
        pass_str(scalarization.passed),
        scalarization.resolution,
        scalarization.checks.len()
    );
    for check in scalarization.checks.iter().filter(|c| !c.passed) {
        println!(
            "  violation: weight {} has grid minimum {} at {} but vertex value {}",
            fmt_sig(check.lambda, 6),
            fmt_sig(check.grid_min, 6),
            check.minimizer,
            fmt_sig(check.vertex_value, 6)
        );
    }

    if dominance.passed && scalarization.passed {
        println!("oracle verdict: allocation {} confirmed", dominance.optimal);
        Ok(EXIT_OK)
    } else {
        eprintln!("error: oracle violation detected");
        Ok(EXIT_ORACLE)
    }
}

fn pass_str(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "FAIL"
    }
}
