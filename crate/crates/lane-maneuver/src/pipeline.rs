//! End-to-end maneuver planning.
//!
//! [`plan_maneuver`] chains the stages: size the horizon, optimize the
//! terminal positions, relax until every target is reachable, solve each
//! controlled vehicle's fixed-horizon energy-optimal problem, and audit the
//! assembled plan. A plan is returned only when the audit passes.

use crate::audit::{audit_trajectories, SafetyAudit, DEFAULT_AUDIT_SAMPLES};
use crate::error::Error;
use crate::feasibility::{feasible_spec_from, spec_violation};
use crate::ocp::{solve_advance, solve_retard, ControlSign, OcpProblem, OcpSolution};
use crate::planner::{classify_case, plan_c, CPlan, CaseLabel};
use crate::scenario::ScenarioConfig;
use crate::terminal::{
    min_terminal_time, terminal_positions_pinned, MinTimeOutcome, TerminalBranch, TerminalSpec,
};
use crate::trajectory::Trajectory;
use crate::vehicle::{VehicleLimits, VehicleState};
use crate::Result;

/// Optional pins applied to the planning pipeline, mainly for reproducing
/// externally specified maneuvers at their exact horizon and targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanOptions {
    /// Pins the maneuver horizon (s). Pinning disables horizon relaxation:
    /// an unreachable specification is an error instead.
    pub t_f: Option<f64>,
    /// Pins vehicle 1's terminal position (m).
    pub x_1f: Option<f64>,
    /// Pins vehicle 2's terminal position (m).
    pub x_2f: Option<f64>,
    /// Pins the merging vehicle's terminal position (m).
    pub x_cf: Option<f64>,
    /// Number of uniform samples in the safety audit.
    pub n_samples: usize,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            t_f: None,
            x_1f: None,
            x_2f: None,
            x_cf: None,
            n_samples: DEFAULT_AUDIT_SAMPLES,
        }
    }
}

/// Which of the merging-vehicle regimes the plan used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManeuverCase {
    /// The merging vehicle accelerates; the spacing bound below the
    /// uncontrolled vehicle is provably inactive.
    Case1,
    /// The merging vehicle decelerates and even coasting stays clear of the
    /// bound.
    Case2,
    /// Coasting would overrun the bound, but the deceleration optimum
    /// clears it anyway.
    Case3Unconstrained,
    /// The deceleration optimum would cross the bound, so the plan rides it
    /// through a constrained arc.
    Case3Constrained,
}

impl std::fmt::Display for ManeuverCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ManeuverCase::Case1 => "case-1",
            ManeuverCase::Case2 => "case-2",
            ManeuverCase::Case3Unconstrained => "case-3-unconstrained",
            ManeuverCase::Case3Constrained => "case-3-constrained",
        };
        f.write_str(s)
    }
}

/// A complete, audited maneuver plan.
#[derive(Debug, Clone)]
pub struct ManeuverPlan {
    /// The horizon and terminal positions the plan realizes.
    pub terminal: TerminalSpec,
    /// Outcome of the minimal-horizon search (branch, aggressiveness used).
    /// `None` only for pinned-horizon plans whose geometry defeats the
    /// constant-command search — the pin supplies the horizon instead.
    pub min_time: Option<MinTimeOutcome>,
    /// Vehicle 1's solve (always on the advancing side of its coast point).
    pub sol_1: OcpSolution,
    /// Vehicle 2's solve (always on the yielding side of its coast point).
    pub sol_2: OcpSolution,
    /// The merging vehicle's plan.
    pub c_plan: CPlan,
    pub case_label: ManeuverCase,
    /// Post-hoc dense-sampling audit; `pass` is true for any returned plan.
    pub audit: SafetyAudit,
}

impl ManeuverPlan {
    pub fn traj_1(&self) -> &Trajectory {
        &self.sol_1.traj
    }

    pub fn traj_2(&self) -> &Trajectory {
        &self.sol_2.traj
    }

    pub fn traj_c(&self) -> &Trajectory {
        self.c_plan.trajectory()
    }

    /// Vehicle 1's energy `½∫u²`.
    pub fn energy_1(&self) -> f64 {
        self.sol_1.cost
    }

    /// Vehicle 2's energy `½∫u²`.
    pub fn energy_2(&self) -> f64 {
        self.sol_2.cost
    }

    /// The merging vehicle's energy `½∫u²`.
    pub fn energy_c(&self) -> f64 {
        self.c_plan.cost()
    }
}

/// Branch assumed for a pinned horizon when the search could not supply
/// one: the merging vehicle yields exactly when coasting to the pinned
/// horizon would overrun the spacing line below the uncontrolled vehicle.
fn pinned_branch(cfg: &ScenarioConfig, t_f: f64) -> TerminalBranch {
    let coast = cfg.state_c.coast_position(t_f);
    let line = cfg.x_u_at(t_f) - cfg.resolved_d_c();
    if coast > line {
        TerminalBranch::Decelerate
    } else {
        TerminalBranch::Accelerate
    }
}

/// Solves one support vehicle: the control-sign family is chosen from the
/// side of the coast point its target lies on (the terminal optimizer only
/// ever moves vehicle 1 forward and vehicle 2 backward; explicit pins may
/// choose either side).
fn solve_support(
    state_0: VehicleState,
    limits: VehicleLimits,
    t_f: f64,
    x_f: f64,
) -> Result<OcpSolution> {
    let coast = state_0.coast_position(t_f);
    let problem = |sign| OcpProblem {
        state_0,
        limits,
        t_f,
        x_f,
        sign,
    };
    if x_f >= coast {
        solve_advance(&problem(ControlSign::NonNegative))
    } else {
        solve_retard(&problem(ControlSign::NonPositive))
    }
}

/// Plans the full cooperative maneuver.
///
/// Stages: horizon sizing (with aggressiveness escalation), terminal
/// positioning (exact small QP), feasibility relaxation (geometric horizon
/// growth; skipped when the horizon is pinned), the three per-vehicle
/// energy-optimal solves, and a dense safety audit. All stages are pure;
/// the first failure is returned as its specific error. A plan that fails
/// its own audit is refused ([`Error::AuditFailed`]), so every returned
/// plan has `audit.pass == true`.
pub fn plan_maneuver(cfg: &ScenarioConfig, opts: &PlanOptions) -> Result<ManeuverPlan> {
    cfg.validate()?;
    let plan = plan_with_audit(cfg, opts)?;
    if !plan.audit.pass {
        let (constraint, worst_slack) = plan.audit.worst();
        return Err(Error::AuditFailed {
            constraint: constraint.to_string(),
            worst_slack,
        });
    }
    Ok(plan)
}

/// Like [`plan_maneuver`], but hands back audit-rejected plans for
/// inspection instead of refusing them: the returned plan's `audit.pass`
/// may be `false`, with the offending slacks recorded. Solver-stage
/// failures still error, and so do malformed parameters — but an initial
/// configuration that already violates the spacing rules is planned
/// anyway and flagged by the audit's running checks at `t = 0`. Intended
/// for reproduction and diagnostic tooling that needs to look at a
/// maneuver the planner would not certify: pinned terminal specifications
/// and unsafely spaced starts can both force violations that no stage is
/// free to repair.
pub fn plan_with_audit(cfg: &ScenarioConfig, opts: &PlanOptions) -> Result<ManeuverPlan> {
    cfg.validate_parameters()?;
    // A pinned horizon can still be planned when the constant-command
    // search finds no horizon of its own (some reproducible geometries
    // defeat its uniform-aggressiveness model); every other path needs the
    // search to succeed.
    let min_time = match min_terminal_time(cfg) {
        Ok(m) => Some(m),
        Err(_) if opts.t_f.is_some() => None,
        Err(e) => return Err(e),
    };

    let pins = [opts.x_1f, opts.x_2f, opts.x_cf];
    let pinned = opts.t_f.is_some() || pins.iter().any(Option::is_some);
    let spec = match (pinned, min_time) {
        (true, _) => {
            // Pinned specifications are taken literally: the free positions
            // re-optimize around the pins, and reachability is verified
            // instead of relaxing the horizon away from the pin.
            let t_f = opts
                .t_f
                .or(min_time.map(|m| m.t_f))
                .expect("either the horizon pin or the search supplies t_f");
            let branch = min_time
                .map(|m| m.branch)
                .unwrap_or_else(|| pinned_branch(cfg, t_f));
            let spec = terminal_positions_pinned(cfg, t_f, branch, pins)?;
            if let Some(v) = spec_violation(cfg, &spec) {
                return Err(Error::TerminalInfeasible {
                    t_f: spec.t_f,
                    reason: v.to_string(),
                });
            }
            spec
        }
        (false, Some(m)) => feasible_spec_from(cfg, m.t_f, m.branch)?,
        (false, None) => unreachable!("search failure without a pin returns above"),
    };

    let sol_1 = solve_support(cfg.state_1, cfg.limits_1, spec.t_f, spec.x_1f)?;
    let sol_2 = solve_support(cfg.state_2, cfg.limits_2, spec.t_f, spec.x_2f)?;
    let cls = classify_case(cfg, &spec);
    let c_plan = plan_c(cfg, &spec)?;
    let case_label = match (cls.label, c_plan.is_constrained()) {
        (CaseLabel::Case1, _) => ManeuverCase::Case1,
        (CaseLabel::Case2, _) => ManeuverCase::Case2,
        (CaseLabel::Case3, false) => ManeuverCase::Case3Unconstrained,
        (CaseLabel::Case3, true) => ManeuverCase::Case3Constrained,
        (CaseLabel::Infeasible, _) => unreachable!("plan_c rejects infeasible targets"),
    };

    let d_c = cfg.resolved_d_c_directed(spec.t_f, case_label == ManeuverCase::Case1);
    let audit = audit_trajectories(
        &sol_1.traj,
        &sol_2.traj,
        c_plan.trajectory(),
        cfg,
        d_c,
        opts.n_samples,
    );

    Ok(ManeuverPlan {
        terminal: spec,
        min_time,
        sol_1,
        sol_2,
        c_plan,
        case_label,
        audit,
    })
}
