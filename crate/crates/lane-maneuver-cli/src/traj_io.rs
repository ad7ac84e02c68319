//! Trajectory table emission and ingestion.
//!
//! A trajectory table is a CSV file with a fixed 13-column header: the
//! sample time, position/speed/acceleration of the three controlled
//! vehicles, the uncontrolled vehicle's position, and the two running
//! safety slacks. Floating-point cells are written with 9 significant
//! digits in scientific notation, which round-trips every value that the
//! downstream audit needs at well below its decision margin and keeps the
//! emission byte-deterministic.

use std::io::{Read, Write};

use lane_maneuver::audit::AuditSample;
use lane_maneuver::pipeline::{ManeuverCase, ManeuverPlan};
use lane_maneuver::vehicle::safe_distance;
use lane_maneuver::ScenarioConfig;

/// Column names, in emission order.
pub const TRAJECTORY_HEADER: [&str; 13] = [
    "t", "x_1", "v_1", "u_1", "x_2", "v_2", "u_2", "x_C", "v_C", "u_C", "x_U", "slack_U",
    "slack_12",
];

/// Default sample step (s) for emitted tables.
pub const DEFAULT_DT: f64 = 0.01;

/// Problems reading a trajectory table. The command layer maps these onto
/// the input-error exit code.
#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("cannot read trajectory table: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed trajectory table: {0}")]
    Csv(#[from] csv::Error),
    #[error("trajectory table header mismatch: expected {expected:?}, found {found:?}")]
    Header { expected: String, found: String },
    #[error("trajectory table row {row}: {message}")]
    Cell { row: usize, message: String },
    #[error("trajectory table is empty")]
    Empty,
    #[error("trajectory table row {row}: sample times must not decrease")]
    TimeOrder { row: usize },
}

/// One sampled instant of the full maneuver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x_1: f64,
    pub v_1: f64,
    pub u_1: f64,
    pub x_2: f64,
    pub v_2: f64,
    pub u_2: f64,
    pub x_c: f64,
    pub v_c: f64,
    pub u_c: f64,
    pub x_u: f64,
    /// `x_U − x_C − d_C`: spacing slack below the uncontrolled vehicle (m).
    pub slack_u: f64,
    /// `x_1 − x_2 − d(v_2)`: spacing slack of the target-lane pair (m).
    pub slack_12: f64,
}

/// Formats one cell with 9 significant digits. Exact zero is normalized so
/// signed zeros cannot leak formatting differences into the output.
fn sig9(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.8e}")
}

/// The constant spacing bound toward the uncontrolled vehicle that a plan
/// was audited against.
pub fn plan_d_c(plan: &ManeuverPlan, cfg: &ScenarioConfig) -> f64 {
    cfg.resolved_d_c_directed(plan.terminal.t_f, plan.case_label == ManeuverCase::Case1)
}

/// Samples a finished plan on a uniform grid of step `dt`, always including
/// the terminal instant as the final row.
pub fn sample_plan(plan: &ManeuverPlan, cfg: &ScenarioConfig, dt: f64) -> Vec<TrajectoryRow> {
    assert!(dt > 0.0, "sample step must be positive");
    let t_f = plan.terminal.t_f;
    let d_c = plan_d_c(plan, cfg);
    let d_2 = |v: f64| safe_distance(v.max(0.0), &cfg.safety).expect("nonnegative speed");

    let n_steps = (t_f / dt).floor() as usize;
    let mut times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * dt).collect();
    if t_f - times[times.len() - 1] > 1e-9 {
        times.push(t_f);
    } else {
        *times.last_mut().expect("nonempty grid") = t_f;
    }

    times
        .into_iter()
        .map(|t| {
            let s1 = plan.traj_1().evaluate(t).expect("t within horizon");
            let s2 = plan.traj_2().evaluate(t).expect("t within horizon");
            let sc = plan.traj_c().evaluate(t).expect("t within horizon");
            let x_u = cfg.x_u_at(t);
            TrajectoryRow {
                t,
                x_1: s1.x,
                v_1: s1.v,
                u_1: s1.u,
                x_2: s2.x,
                v_2: s2.v,
                u_2: s2.u,
                x_c: sc.x,
                v_c: sc.v,
                u_c: sc.u,
                x_u,
                slack_u: x_u - sc.x - d_c,
                slack_12: s1.x - s2.x - d_2(s2.v),
            }
        })
        .collect()
}

/// Writes rows as CSV with the fixed header.
pub fn write_csv<W: Write>(rows: &[TrajectoryRow], out: W) -> Result<(), TableError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for r in rows {
        w.write_record([
            sig9(r.t),
            sig9(r.x_1),
            sig9(r.v_1),
            sig9(r.u_1),
            sig9(r.x_2),
            sig9(r.v_2),
            sig9(r.u_2),
            sig9(r.x_c),
            sig9(r.v_c),
            sig9(r.u_c),
            sig9(r.x_u),
            sig9(r.slack_u),
            sig9(r.slack_12),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trajectory table, enforcing the exact header and nondecreasing
/// sample times. The redundant columns (`x_U` and the slacks) are parsed but
/// otherwise ignored: validation recomputes them from the scenario.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrajectoryRow>, TableError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header != TRAJECTORY_HEADER {
        return Err(TableError::Header {
            expected: TRAJECTORY_HEADER.join(","),
            found: header.join(","),
        });
    }

    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = idx + 2; // 1-based, after the header line
        if record.len() != TRAJECTORY_HEADER.len() {
            return Err(TableError::Cell {
                row,
                message: format!(
                    "expected {} columns, found {}",
                    TRAJECTORY_HEADER.len(),
                    record.len()
                ),
            });
        }
        let mut cells = [0.0f64; 13];
        for (i, cell) in record.iter().enumerate() {
            cells[i] = cell.trim().parse::<f64>().map_err(|e| TableError::Cell {
                row,
                message: format!("column {}: {e}", TRAJECTORY_HEADER[i]),
            })?;
            if !cells[i].is_finite() {
                return Err(TableError::Cell {
                    row,
                    message: format!("column {}: non-finite value", TRAJECTORY_HEADER[i]),
                });
            }
        }
        rows.push(TrajectoryRow {
            t: cells[0],
            x_1: cells[1],
            v_1: cells[2],
            u_1: cells[3],
            x_2: cells[4],
            v_2: cells[5],
            u_2: cells[6],
            x_c: cells[7],
            v_c: cells[8],
            u_c: cells[9],
            x_u: cells[10],
            slack_u: cells[11],
            slack_12: cells[12],
        });
    }
    if rows.is_empty() {
        return Err(TableError::Empty);
    }
    for (i, pair) in rows.windows(2).enumerate() {
        if pair[1].t < pair[0].t {
            return Err(TableError::TimeOrder { row: i + 3 });
        }
    }
    Ok(rows)
}

/// Converts table rows into audit samples (dropping the redundant columns).
pub fn rows_to_audit_samples(rows: &[TrajectoryRow]) -> Vec<AuditSample> {
    rows.iter()
        .map(|r| AuditSample {
            t: r.t,
            x_1: r.x_1,
            v_1: r.v_1,
            u_1: r.u_1,
            x_2: r.x_2,
            v_2: r.v_2,
            u_2: r.u_2,
            x_c: r.x_c,
            v_c: r.v_c,
            u_c: r.u_c,
        })
        .collect()
}
