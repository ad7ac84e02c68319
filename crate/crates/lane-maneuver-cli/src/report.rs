//! Structured plan report.
//!
//! A [`PlanReport`] is the machine-readable product of one planning run: the
//! realized terminal specification, each vehicle's solution structure and
//! energy under both cost conventions (`½∫u²` and `∫u²`), the safety-audit
//! minimum slacks, and the discrete-solver cross-check deltas. The verdict
//! is `ok` exactly when the audit passed and the worst cross-check delta is
//! within the configured tolerance.
//!
//! Serialization is plain `serde_json` over fixed-order structs, so a report
//! is byte-deterministic for identical inputs.

use lane_maneuver::audit::{SafetyAudit, SlackRecord};
use lane_maneuver::pipeline::{ManeuverPlan, PlanOptions};
use lane_maneuver::planner::CPlan;
use lane_maneuver::terminal::TerminalBranch;
use lane_maneuver::ScenarioConfig;
use serde::{Deserialize, Serialize};

use crate::oracle_check::OracleCheck;
use crate::scenario_file::SCHEMA_VERSION;
use crate::traj_io::plan_d_c;

/// Overall outcome of a planning run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Audit passed and every cross-check delta is within tolerance.
    Ok,
    /// The post-hoc safety audit rejected the assembled plan.
    AuditFailed,
    /// Some vehicle's closed-form cost drifted from the discrete optimum.
    OracleMismatch,
}

/// Which inputs were pinned by overrides rather than optimized.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct PinnedInputs {
    pub t_f: bool,
    pub x_1f: bool,
    pub x_2f: bool,
    pub x_cf: bool,
}

/// The maneuver horizon and how it was obtained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HorizonReport {
    /// Horizon the plan realizes (s).
    pub t_f: f64,
    /// Smallest admissible horizon found by the minimal-time search (s);
    /// differs from `t_f` under pinning or feasibility relaxation, and is
    /// absent when a pinned horizon was planned after the search aborted.
    pub organic_t_f: Option<f64>,
    /// Branch the horizon was sized under.
    pub branch: String,
    /// Aggressiveness escalation rounds consumed by the search; absent
    /// together with `organic_t_f`.
    pub alpha_rounds: Option<u32>,
}

/// Realized terminal configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TerminalReport {
    pub x_1f: f64,
    pub x_2f: f64,
    pub x_cf: f64,
    /// Deviations from the zero-effort coast positions (m).
    pub delta_x_1: f64,
    pub delta_x_2: f64,
    pub delta_x_c: f64,
    /// Gap bounds the positions were solved against (m).
    pub gap_c: f64,
    pub gap_2: f64,
}

/// Energy of one vehicle under both conventions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `½∫u²` — the planner's native objective.
    pub half_integral_u_squared: f64,
    /// `∫u²` — the same trajectory without the ½ factor.
    pub integral_u_squared: f64,
}

impl EnergyReport {
    fn from_half(half: f64) -> Self {
        EnergyReport {
            half_integral_u_squared: half,
            integral_u_squared: 2.0 * half,
        }
    }
}

/// One support vehicle's solution structure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VehicleReport {
    /// Structural label of the closed-form optimum (I–V).
    pub case: String,
    /// Arc-junction times of the trajectory (s).
    pub switch_times: Vec<f64>,
    pub energy: EnergyReport,
}

/// The merging vehicle's solution structure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergingReport {
    /// Which regime the plan used (`case-1`, `case-2`,
    /// `case-3-unconstrained`, `case-3-constrained`).
    pub case: String,
    /// Arc-junction times of the trajectory (s).
    pub switch_times: Vec<f64>,
    pub energy: EnergyReport,
    /// Saturation pattern of the boundary-pinned transfer, when the plan
    /// rides the spacing bound.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub subcase: Option<String>,
    /// First instant the plan touches the spacing bound (s).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub boundary_entry_time: Option<f64>,
    /// Position at the boundary contact (m).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub boundary_entry_position: Option<f64>,
    /// Instant the plan leaves the spacing bound (s); equals the entry time
    /// for a tangential touch. The control may jump here and nowhere else.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub boundary_exit_time: Option<f64>,
}

/// Worst slack of one audited running constraint.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SlackReport {
    pub min_slack: f64,
    pub at_time: f64,
}

impl From<SlackRecord> for SlackReport {
    fn from(r: SlackRecord) -> Self {
        SlackReport {
            min_slack: r.min_slack,
            at_time: r.at_time,
        }
    }
}

/// Safety-audit outcome: minimum slacks per constraint family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub pass: bool,
    pub n_samples: usize,
    /// Constant spacing bound toward the uncontrolled vehicle (m).
    pub d_c: f64,
    pub spacing_12: SlackReport,
    pub spacing_uc: SlackReport,
    pub control_box: SlackReport,
    pub speed_box: SlackReport,
    pub terminal_1c: f64,
    pub terminal_c2: f64,
}

impl AuditReport {
    pub fn from_audit(audit: &SafetyAudit, d_c: f64) -> Self {
        AuditReport {
            pass: audit.pass,
            n_samples: audit.n_samples,
            d_c,
            spacing_12: audit.spacing_12.into(),
            spacing_uc: audit.spacing_uc.into(),
            control_box: audit.control_box.into(),
            speed_box: audit.speed_box.into(),
            terminal_1c: audit.terminal_1c,
            terminal_c2: audit.terminal_c2,
        }
    }
}

/// One vehicle's cost cross-check against the discrete solver.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OracleDeltaReport {
    pub analytic_cost: f64,
    pub oracle_cost: f64,
    pub rel_delta: f64,
}

/// Cross-check summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReport {
    /// Transcription steps per vehicle.
    pub n: usize,
    /// Verdict threshold on the relative deltas.
    pub tolerance: f64,
    pub max_rel_delta: f64,
    pub vehicle_1: OracleDeltaReport,
    pub vehicle_2: OracleDeltaReport,
    pub vehicle_c: OracleDeltaReport,
}

/// The machine-readable product of one planning run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanReport {
    pub schema_version: u32,
    pub verdict: Verdict,
    /// Merging-vehicle regime of the whole maneuver.
    pub case: String,
    pub pinned: PinnedInputs,
    pub horizon: HorizonReport,
    pub terminal: TerminalReport,
    pub vehicle_1: VehicleReport,
    pub vehicle_2: VehicleReport,
    pub vehicle_c: MergingReport,
    pub audit: AuditReport,
    pub oracle: OracleReport,
}

fn branch_name(branch: TerminalBranch) -> String {
    match branch {
        TerminalBranch::Accelerate => "accelerate".to_string(),
        TerminalBranch::Decelerate => "decelerate".to_string(),
    }
}

/// Assembles the report for a finished plan.
pub fn build_report(
    plan: &ManeuverPlan,
    cfg: &ScenarioConfig,
    opts: &PlanOptions,
    oracle: &OracleCheck,
    tolerance: f64,
) -> PlanReport {
    let max_rel_delta = oracle.max_rel_delta();
    let verdict = if !plan.audit.pass {
        Verdict::AuditFailed
    } else if max_rel_delta > tolerance {
        Verdict::OracleMismatch
    } else {
        Verdict::Ok
    };

    let merging = match &plan.c_plan {
        CPlan::Unconstrained(sol) => MergingReport {
            case: plan.case_label.to_string(),
            switch_times: sol.traj.switch_times(),
            energy: EnergyReport::from_half(plan.energy_c()),
            subcase: None,
            boundary_entry_time: None,
            boundary_entry_position: None,
            boundary_exit_time: None,
        },
        CPlan::Constrained(sol) => MergingReport {
            case: plan.case_label.to_string(),
            switch_times: sol.traj.switch_times(),
            energy: EnergyReport::from_half(plan.energy_c()),
            subcase: Some(sol.subcase.to_string()),
            boundary_entry_time: Some(sol.tau1),
            boundary_entry_position: Some(sol.a),
            boundary_exit_time: Some(sol.boundary_exit),
        },
    };

    PlanReport {
        schema_version: SCHEMA_VERSION,
        verdict,
        case: plan.case_label.to_string(),
        pinned: PinnedInputs {
            t_f: opts.t_f.is_some(),
            x_1f: opts.x_1f.is_some(),
            x_2f: opts.x_2f.is_some(),
            x_cf: opts.x_cf.is_some(),
        },
        horizon: HorizonReport {
            t_f: plan.terminal.t_f,
            organic_t_f: plan.min_time.map(|m| m.t_f),
            branch: branch_name(plan.terminal.branch),
            alpha_rounds: plan.min_time.map(|m| m.alpha_rounds),
        },
        terminal: TerminalReport {
            x_1f: plan.terminal.x_1f,
            x_2f: plan.terminal.x_2f,
            x_cf: plan.terminal.x_cf,
            delta_x_1: plan.terminal.delta_x_1,
            delta_x_2: plan.terminal.delta_x_2,
            delta_x_c: plan.terminal.delta_x_c,
            gap_c: plan.terminal.bounds.gap_c,
            gap_2: plan.terminal.bounds.gap_2,
        },
        vehicle_1: VehicleReport {
            case: plan.sol_1.case_id.to_string(),
            switch_times: plan.sol_1.traj.switch_times(),
            energy: EnergyReport::from_half(plan.energy_1()),
        },
        vehicle_2: VehicleReport {
            case: plan.sol_2.case_id.to_string(),
            switch_times: plan.sol_2.traj.switch_times(),
            energy: EnergyReport::from_half(plan.energy_2()),
        },
        vehicle_c: merging,
        audit: AuditReport::from_audit(&plan.audit, plan_d_c(plan, cfg)),
        oracle: OracleReport {
            n: oracle.n,
            tolerance,
            max_rel_delta,
            vehicle_1: OracleDeltaReport {
                analytic_cost: oracle.vehicle_1.analytic_cost,
                oracle_cost: oracle.vehicle_1.oracle_cost,
                rel_delta: oracle.vehicle_1.rel_delta,
            },
            vehicle_2: OracleDeltaReport {
                analytic_cost: oracle.vehicle_2.analytic_cost,
                oracle_cost: oracle.vehicle_2.oracle_cost,
                rel_delta: oracle.vehicle_2.rel_delta,
            },
            vehicle_c: OracleDeltaReport {
                analytic_cost: oracle.vehicle_c.analytic_cost,
                oracle_cost: oracle.vehicle_c.oracle_cost,
                rel_delta: oracle.vehicle_c.rel_delta,
            },
        },
    }
}

impl PlanReport {
    /// Serializes the report as pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable one-screen summary.
    pub fn render_summary(&self) -> String {
        let mut out = String::new();
        let verdict = match self.verdict {
            Verdict::Ok => "ok",
            Verdict::AuditFailed => "audit-failed",
            Verdict::OracleMismatch => "oracle-mismatch",
        };
        out.push_str(&format!("verdict: {verdict}\n"));
        out.push_str(&format!(
            "case: {} (branch {})\n",
            self.case, self.horizon.branch
        ));
        let pinned = if self.pinned.t_f { " (pinned)" } else { "" };
        let organic = match self.horizon.organic_t_f {
            Some(t) => format!("organic minimum {t:.4} s"),
            None => "organic horizon search aborted".to_string(),
        };
        out.push_str(&format!(
            "horizon: t_f = {:.4} s{pinned}; {organic}\n",
            self.horizon.t_f
        ));
        out.push_str(&format!(
            "terminal: x_1f = {:.3} m, x_2f = {:.3} m, x_cf = {:.3} m (gap_c {:.2}, gap_2 {:.2})\n",
            self.terminal.x_1f,
            self.terminal.x_2f,
            self.terminal.x_cf,
            self.terminal.gap_c,
            self.terminal.gap_2
        ));
        out.push_str(&format!(
            "energy 1/2*integral(u^2): vehicle 1 = {:.6}, vehicle 2 = {:.6}, vehicle C = {:.6}\n",
            self.vehicle_1.energy.half_integral_u_squared,
            self.vehicle_2.energy.half_integral_u_squared,
            self.vehicle_c.energy.half_integral_u_squared
        ));
        if let (Some(t), Some(a)) = (
            self.vehicle_c.boundary_entry_time,
            self.vehicle_c.boundary_entry_position,
        ) {
            out.push_str(&format!(
                "boundary contact: t = {:.4} s at x = {:.3} m (exit {:.4} s)\n",
                t,
                a,
                self.vehicle_c.boundary_exit_time.unwrap_or(t)
            ));
        }
        out.push_str(&format!(
            "audit: {} over {} samples; worst running slacks: 1-2 {:.4} m @ {:.2} s, U-C {:.4} m @ {:.2} s\n",
            if self.audit.pass { "pass" } else { "FAIL" },
            self.audit.n_samples,
            self.audit.spacing_12.min_slack,
            self.audit.spacing_12.at_time,
            self.audit.spacing_uc.min_slack,
            self.audit.spacing_uc.at_time
        ));
        out.push_str(&format!(
            "oracle: n = {}, max relative cost delta = {:.3e} (tolerance {:.1e})\n",
            self.oracle.n, self.oracle.max_rel_delta, self.oracle.tolerance
        ));
        out
    }
}
