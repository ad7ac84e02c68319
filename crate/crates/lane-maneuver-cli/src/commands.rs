//! Subcommand implementations.
//!
//! Each command returns its process exit code instead of exiting, so the
//! whole surface is testable in-process. Exit codes: 0 ok, 1 input error,
//! 2 planning aborted (no maneuver exists), 3 validation or reproduction
//! failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lane_maneuver::audit::audit_samples;
use lane_maneuver::scenario::Aggressiveness;
use lane_maneuver::{plan_maneuver, plan_with_audit, Error as PlanError, ManeuverPlan};

use crate::oracle_check::cross_check;
use crate::reference::{evaluate, reference_scenarios, render_table, ScenarioOutcome};
use crate::report::{build_report, Verdict};
use crate::scenario_file::ScenarioFile;
use crate::traj_io::{read_csv, rows_to_audit_samples, sample_plan, write_csv};

/// Exit code for a planner error: input problems are 1, "no maneuver
/// exists" outcomes are 2, and post-hoc rejections are 3.
fn planner_exit_code(err: &PlanError) -> i32 {
    match err {
        PlanError::InvalidScenario(_) | PlanError::Domain(_) => 1,
        PlanError::ManeuverAborted { .. }
        | PlanError::RelaxationFailed { .. }
        | PlanError::TerminalInfeasible { .. }
        | PlanError::OcpInfeasible { .. }
        | PlanError::ConstrainedInfeasible => 2,
        PlanError::AuditFailed { .. }
        | PlanError::OracleInfeasible
        | PlanError::OracleNoConverge { .. } => 3,
    }
}

/// Options shared by the plan-producing commands.
#[derive(Debug, Clone)]
pub struct OutputOptions {
    /// Directory for generated files; created if missing. Defaults to the
    /// current directory.
    pub out_dir: Option<PathBuf>,
    /// Trajectory sample step (s).
    pub dt: f64,
}

impl OutputOptions {
    fn dir(&self) -> &Path {
        self.out_dir.as_deref().unwrap_or(Path::new("."))
    }

    fn prepare(&self) -> std::io::Result<()> {
        fs::create_dir_all(self.dir())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir().join(name)
    }
}

fn write_trajectory(
    plan: &ManeuverPlan,
    cfg: &lane_maneuver::ScenarioConfig,
    dt: f64,
    path: &Path,
) -> Result<(), String> {
    let rows = sample_plan(plan, cfg, dt);
    let file = fs::File::create(path)
        .map_err(|e| format!("cannot create {}: {e}", path.display()))?;
    let mut buf = std::io::BufWriter::new(file);
    write_csv(&rows, &mut buf).map_err(|e| e.to_string())?;
    buf.flush().map_err(|e| e.to_string())
}

/// Plans one scenario file end to end and writes the trajectory table and
/// the plan report next to each other in the output directory.
pub fn cmd_plan(
    scenario_path: &Path,
    output: &OutputOptions,
    samples: usize,
    oracle_n: usize,
    tolerance: f64,
) -> i32 {
    let file = match ScenarioFile::load(scenario_path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let (cfg, mut opts) = file.into_parts();
    opts.n_samples = samples;

    // Planning proceeds even when the audit rejects the maneuver so the
    // report can say why; hard solver failures still map to exit codes.
    let plan = match plan_with_audit(&cfg, &opts) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return planner_exit_code(&e);
        }
    };
    let oracle = match cross_check(&plan, &cfg, oracle_n) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return planner_exit_code(&e);
        }
    };
    let report = build_report(&plan, &cfg, &opts, &oracle, tolerance);

    if let Err(e) = output.prepare() {
        eprintln!("error: cannot create {}: {e}", output.dir().display());
        return 1;
    }
    let stem = scenario_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());
    let traj_path = output.path(&format!("{stem}.trajectory.csv"));
    if let Err(e) = write_trajectory(&plan, &cfg, output.dt, &traj_path) {
        eprintln!("error: {e}");
        return 1;
    }
    let report_path = output.path(&format!("{stem}.report.json"));
    if let Err(e) = fs::write(&report_path, report.to_json()) {
        eprintln!("error: cannot write {}: {e}", report_path.display());
        return 1;
    }

    print!("{}", report.render_summary());
    println!("trajectory: {}", traj_path.display());
    println!("report: {}", report_path.display());
    if report.verdict == Verdict::Ok {
        0
    } else {
        3
    }
}

/// Re-audits an externally produced trajectory table against a scenario's
/// constraints and prints the minimum slack per constraint.
pub fn cmd_validate(scenario_path: &Path, traj_path: &Path) -> i32 {
    let file = match ScenarioFile::load(scenario_path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let (cfg, _) = file.into_parts();
    let reader = match fs::File::open(traj_path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: cannot open {}: {e}", traj_path.display());
            return 1;
        }
    };
    let rows = match read_csv(std::io::BufReader::new(reader)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let samples = rows_to_audit_samples(&rows);

    // The merging vehicle's constant spacing bound depends on whether the
    // maneuver accelerates toward the bound's terminal-speed form; infer
    // the direction from the recorded speeds.
    let first = samples.first().expect("read_csv rejects empty tables");
    let last = samples.last().expect("read_csv rejects empty tables");
    let accelerating = last.v_c >= first.v_c;
    let d_c = cfg.resolved_d_c_directed(last.t, accelerating);

    let audit = audit_samples(&samples, &cfg, d_c);
    println!(
        "audit over {} samples (d_C = {d_c:.3} m):",
        audit.n_samples
    );
    let lines = [
        ("running spacing 1-2", &audit.spacing_12),
        ("running spacing U-C", &audit.spacing_uc),
        ("control box", &audit.control_box),
        ("speed box", &audit.speed_box),
    ];
    for (name, slack) in lines {
        println!(
            "  {name:<20} min slack {:>12.6} at t = {:.3} s",
            slack.min_slack, slack.at_time
        );
    }
    println!("  {:<20} slack {:>12.6}", "terminal 1-C", audit.terminal_1c);
    println!("  {:<20} slack {:>12.6}", "terminal C-2", audit.terminal_c2);
    println!("result: {}", if audit.pass { "pass" } else { "fail" });
    if audit.pass {
        0
    } else {
        3
    }
}

/// Re-runs the published reference case studies concurrently and prints
/// the comparison table; any mismatch is a nonzero exit.
pub fn cmd_reproduce_paper(output: &OutputOptions) -> i32 {
    let scenarios = reference_scenarios();
    let outcomes: Vec<ScenarioOutcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|s| scope.spawn(move || evaluate(s)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario evaluation does not panic"))
            .collect()
    });

    print!("{}", render_table(&outcomes));

    // Trajectory tables are written serially, one per scenario that
    // produced a plan, certified or not.
    if output.out_dir.is_some() {
        if let Err(e) = output.prepare() {
            eprintln!("error: cannot create {}: {e}", output.dir().display());
            return 1;
        }
        for (scenario, outcome) in scenarios.iter().zip(&outcomes) {
            let Some(plan) = &outcome.plan else { continue };
            let path = output.path(&format!("{}.trajectory.csv", outcome.key));
            if let Err(e) = write_trajectory(plan, scenario.config(), output.dt, &path) {
                eprintln!("error: {e}");
                return 1;
            }
            println!("trajectory: {}", path.display());
        }
    }

    if outcomes.iter().all(ScenarioOutcome::pass) {
        0
    } else {
        3
    }
}

/// Scenario field varied by [`cmd_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// The merging vehicle's constant spacing bound (m).
    DCFixed,
    /// The pinned maneuver horizon (s).
    HorizonTf,
    /// Uniform aggressiveness for all controlled vehicles.
    Alpha,
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "d-c-fixed" => Ok(SweepParam::DCFixed),
            "t-f" => Ok(SweepParam::HorizonTf),
            "alpha" => Ok(SweepParam::Alpha),
            other => Err(format!(
                "unknown sweep parameter {other:?} (expected d-c-fixed, t-f, or alpha)"
            )),
        }
    }
}

impl std::fmt::Display for SweepParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SweepParam::DCFixed => "d-c-fixed",
            SweepParam::HorizonTf => "t-f",
            SweepParam::Alpha => "alpha",
        };
        f.write_str(s)
    }
}

/// One sweep grid point's result.
struct SweepRow {
    value: f64,
    outcome: Result<(String, f64, f64), String>,
}

/// Plans one scenario across a grid of one parameter and tabulates which
/// points certify, their cases, horizons, and total energies.
pub fn cmd_sweep(
    scenario_path: &Path,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
) -> i32 {
    if steps < 2 {
        eprintln!("error: sweep needs at least 2 steps, got {steps}");
        return 1;
    }
    if !(from.is_finite() && to.is_finite()) {
        eprintln!("error: sweep range must be finite");
        return 1;
    }
    let file = match ScenarioFile::load(scenario_path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let (cfg, opts) = file.into_parts();

    let values: Vec<f64> = (0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect();
    let rows: Vec<SweepRow> = std::thread::scope(|scope| {
        let handles: Vec<_> = values
            .iter()
            .map(|&value| {
                let cfg = cfg.clone();
                let mut opts = opts;
                scope.spawn(move || {
                    let mut cfg = cfg;
                    match param {
                        SweepParam::DCFixed => cfg.safety.d_c_fixed = Some(value),
                        SweepParam::HorizonTf => opts.t_f = Some(value),
                        SweepParam::Alpha => cfg.alpha = Aggressiveness::uniform(value),
                    }
                    let outcome = plan_maneuver(&cfg, &opts)
                        .map(|plan| {
                            let total =
                                plan.energy_1() + plan.energy_2() + plan.energy_c();
                            (plan.case_label.to_string(), plan.terminal.t_f, total)
                        })
                        .map_err(|e| e.to_string());
                    SweepRow { value, outcome }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep point does not panic"))
            .collect()
    });

    println!(
        "{:<12} {:<8} {:<22} {:>9} {:>12}",
        param, "status", "case", "t_f (s)", "energy ½∫u²"
    );
    for row in &rows {
        match &row.outcome {
            Ok((case, t_f, energy)) => println!(
                "{:<12.4} {:<8} {case:<22} {t_f:>9.4} {energy:>12.6}",
                row.value, "ok"
            ),
            Err(reason) => println!("{:<12.4} {:<8} {reason}", row.value, "error:"),
        }
    }
    0
}
