//! Independent cost cross-check of a finished plan.
//!
//! Every vehicle's fixed-horizon transfer is re-solved by the library's
//! discrete-time QP (direct transcription with exact zero-order-hold
//! dynamics) and the closed-form cost is compared against the QP optimum.
//! The merging vehicle's transcription carries the moving spacing ceiling
//! toward the uncontrolled vehicle, so the constrained-arc decomposition is
//! checked against the genuinely constrained discrete optimum.

use lane_maneuver::oracle::{solve_qp, MovingCeiling, TranscribedProblem};
use lane_maneuver::pipeline::ManeuverPlan;
use lane_maneuver::trajectory::Trajectory;
use lane_maneuver::vehicle::{VehicleLimits, VehicleState};
use lane_maneuver::{Error, ScenarioConfig};

use crate::traj_io::plan_d_c;

/// Default transcription resolution (steps over the horizon).
pub const DEFAULT_ORACLE_N: usize = 500;

/// Relative energies below this floor are compared absolutely: the
/// discretization error of a near-coast transfer is measured against this
/// scale instead of the vanishing cost itself.
pub const COST_FLOOR: f64 = 1e-3;

/// Cross-check of one vehicle's transfer.
#[derive(Debug, Clone, Copy)]
pub struct VehicleCheck {
    /// Closed-form cost `½∫u²`.
    pub analytic_cost: f64,
    /// Discrete-optimum cost at the same horizon and target.
    pub oracle_cost: f64,
    /// `|analytic − oracle| / max(|oracle|, COST_FLOOR)`.
    pub rel_delta: f64,
}

impl VehicleCheck {
    fn new(analytic_cost: f64, oracle_cost: f64) -> Self {
        let rel_delta = (analytic_cost - oracle_cost).abs() / oracle_cost.abs().max(COST_FLOOR);
        VehicleCheck {
            analytic_cost,
            oracle_cost,
            rel_delta,
        }
    }
}

/// Cross-check of a full plan.
#[derive(Debug, Clone, Copy)]
pub struct OracleCheck {
    /// Transcription steps used per vehicle.
    pub n: usize,
    pub vehicle_1: VehicleCheck,
    pub vehicle_2: VehicleCheck,
    pub vehicle_c: VehicleCheck,
}

impl OracleCheck {
    /// The worst of the three relative deltas.
    pub fn max_rel_delta(&self) -> f64 {
        self.vehicle_1
            .rel_delta
            .max(self.vehicle_2.rel_delta)
            .max(self.vehicle_c.rel_delta)
    }
}

fn check_vehicle(
    state0: VehicleState,
    limits: VehicleLimits,
    t_f: f64,
    x_f: f64,
    n: usize,
    ceiling: Option<MovingCeiling>,
    analytic_cost: f64,
) -> Result<VehicleCheck, Error> {
    let mut p = TranscribedProblem::new(state0, limits, t_f, x_f, n);
    if let Some(c) = ceiling {
        p = p.with_ceiling(c);
    }
    let sol = solve_qp(&p)?;
    Ok(VehicleCheck::new(analytic_cost, sol.cost))
}

/// Re-solves all three transfers at `n` steps and reports the cost deltas.
pub fn cross_check(
    plan: &ManeuverPlan,
    cfg: &ScenarioConfig,
    n: usize,
) -> Result<OracleCheck, Error> {
    let t = &plan.terminal;
    let ceiling = MovingCeiling {
        x0: cfg.state_u.x,
        v: cfg.state_u.v,
        gap: plan_d_c(plan, cfg),
    };
    Ok(OracleCheck {
        n,
        vehicle_1: check_vehicle(
            cfg.state_1,
            cfg.limits_1,
            t.t_f,
            t.x_1f,
            n,
            None,
            plan.energy_1(),
        )?,
        vehicle_2: check_vehicle(
            cfg.state_2,
            cfg.limits_2,
            t.t_f,
            t.x_2f,
            n,
            None,
            plan.energy_2(),
        )?,
        vehicle_c: check_vehicle(
            cfg.state_c,
            cfg.limits_c,
            t.t_f,
            t.x_cf,
            n,
            Some(ceiling),
            plan.energy_c(),
        )?,
    })
}

/// Verdict of checking a closed-form trajectory against a transcription's
/// constraint rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowFeasibility {
    /// Worst violation of the per-step control box (m/s²); ≤ 0 when clean.
    pub control_violation: f64,
    /// Worst violation of the per-node speed box (m/s); ≤ 0 when clean.
    pub speed_violation: f64,
    /// Worst violation of the per-node spacing ceiling (m); ≤ 0 when clean
    /// or when the transcription has no ceiling.
    pub ceiling_violation: f64,
    /// `|x_N − x_f|`: terminal-position mismatch (m).
    pub terminal_gap: f64,
}

impl RowFeasibility {
    /// True when every row holds within `tol` (the terminal equality too).
    pub fn feasible(&self, tol: f64) -> bool {
        self.control_violation <= tol
            && self.speed_violation <= tol
            && self.ceiling_violation <= tol
            && self.terminal_gap <= tol
    }
}

/// Projects a closed-form trajectory onto a transcription's decision space
/// (per-step mean accelerations) and evaluates every constraint row.
///
/// The projection reproduces the node speeds exactly; node positions differ
/// from the continuous trajectory only where the control varies within a
/// step, which is second-order in the step length.
pub fn check_rows(traj: &Trajectory, p: &TranscribedProblem) -> RowFeasibility {
    let n = p.n;
    let dt = p.dt();
    let t0 = traj.t0();

    let mut control_violation = f64::NEG_INFINITY;
    let mut speed_violation = f64::NEG_INFINITY;
    let mut ceiling_violation = f64::NEG_INFINITY;

    let start = traj.start_state();
    let mut x = start.x;
    let mut v = start.v;
    for k in 0..n {
        let t_next = t0 + (k + 1) as f64 * dt;
        let v_next = traj
            .evaluate(t_next.min(traj.t_end()))
            .expect("node within horizon")
            .v;
        let u_k = (v_next - v) / dt;
        control_violation = control_violation
            .max(p.limits.u_min - u_k)
            .max(u_k - p.limits.u_max);
        x += v * dt + 0.5 * u_k * dt * dt;
        v = v_next;
        speed_violation = speed_violation
            .max(p.limits.v_min - v)
            .max(v - p.limits.v_max);
        if let Some(c) = &p.ceiling {
            let bound = c.x0 + c.v * (t_next - t0) - c.gap;
            ceiling_violation = ceiling_violation.max(x - bound);
        }
    }
    if p.ceiling.is_none() {
        ceiling_violation = 0.0;
    }

    RowFeasibility {
        control_violation,
        speed_violation,
        ceiling_violation,
        terminal_gap: (x - p.x_f).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lane_maneuver::{plan_maneuver, PlanOptions, VehicleState};

    fn accelerating_plan() -> (ManeuverPlan, ScenarioConfig) {
        let mut cfg = ScenarioConfig::with_defaults(
            VehicleState::new(90.0, 13.0),
            VehicleState::new(50.0, 18.0),
            VehicleState::new(13.0, 10.0),
            VehicleState::new(100.0, 9.0),
        );
        cfg.safety.d_c_fixed = Some(30.0);
        let opts = PlanOptions {
            n_samples: 200,
            ..PlanOptions::default()
        };
        let plan = plan_maneuver(&cfg, &opts).expect("benchmark scenario plans");
        (plan, cfg)
    }

    #[test]
    fn closed_form_costs_match_the_discrete_optimum() {
        let (plan, cfg) = accelerating_plan();
        let check = cross_check(&plan, &cfg, 400).unwrap();
        assert!(
            check.max_rel_delta() < 0.01,
            "max delta {}",
            check.max_rel_delta()
        );
    }

    #[test]
    fn closed_form_trajectories_satisfy_the_transcribed_rows() {
        let (plan, cfg) = accelerating_plan();
        let t = plan.terminal;
        let p = TranscribedProblem::new(cfg.state_2, cfg.limits_2, t.t_f, t.x_2f, 300);
        let rows = check_rows(plan.traj_2(), &p);
        assert!(rows.feasible(1e-3), "{rows:?}");

        let ceiling = MovingCeiling {
            x0: cfg.state_u.x,
            v: cfg.state_u.v,
            gap: plan_d_c(&plan, &cfg),
        };
        let p_c = TranscribedProblem::new(cfg.state_c, cfg.limits_c, t.t_f, t.x_cf, 300)
            .with_ceiling(ceiling);
        let rows_c = check_rows(plan.traj_c(), &p_c);
        assert!(rows_c.feasible(1e-3), "{rows_c:?}");
    }

    #[test]
    fn near_zero_costs_compare_against_the_floor() {
        let c = VehicleCheck::new(1e-9, 0.0);
        assert!(c.rel_delta < 1e-5);
    }
}
