//! Reachability classification of terminal targets and the
//! horizon-relaxation loop.
//!
//! A double integrator with box bounds on acceleration and speed can reach
//! exactly the positions between its full-braking and full-throttle
//! envelopes at the horizon. Both envelopes have two regimes — the extreme
//! command either saturates the speed bound before the horizon or it does
//! not — giving four closed-form exclusion conditions. A fifth condition
//! bounds the merging vehicle's terminal position behind the uncontrolled
//! vehicle. When a terminal specification trips any condition, the
//! relaxation loop grows the horizon geometrically and re-solves the
//! terminal positions until every target is reachable.

use crate::error::Error;
use crate::scenario::ScenarioConfig;
use crate::terminal::{terminal_positions, TerminalBranch, TerminalSpec};
use crate::vehicle::{VehicleLimits, VehicleState};
use crate::Result;

/// Maximum horizon-growth steps before the relaxation loop gives up.
const MAX_RELAX_ITERS: u32 = 20;
/// Geometric escalation applied to the relaxation factor after each retry.
const BETA_GROWTH: f64 = 1.1;

/// Why a terminal target is unreachable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// Full throttle never reaches the speed cap by the horizon, yet the
    /// target lies beyond the resulting position envelope.
    CannotReachUnsaturated,
    /// Full throttle rides the speed cap for part of the horizon and the
    /// target still lies beyond the envelope.
    CannotReachSaturated,
    /// Full braking never reaches the speed floor by the horizon, yet even
    /// that trajectory overshoots the target.
    OvershootUnsaturated,
    /// Full braking rides the speed floor for part of the horizon and
    /// still overshoots the target.
    OvershootSaturated,
    /// The merging vehicle's terminal position would encroach on the
    /// uncontrolled vehicle's safety gap.
    UncontrolledSafetyBound,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Violation::CannotReachUnsaturated => "cannot-reach (below speed cap)",
            Violation::CannotReachSaturated => "cannot-reach (speed-capped)",
            Violation::OvershootUnsaturated => "overshoot (above speed floor)",
            Violation::OvershootSaturated => "overshoot (speed-floored)",
            Violation::UncontrolledSafetyBound => "uncontrolled-vehicle safety bound",
        };
        f.write_str(s)
    }
}

/// Outcome of a reachability check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibilityVerdict {
    /// True exactly when `violation` is empty.
    pub feasible: bool,
    /// First exclusion condition triggered, if any.
    pub violation: Option<Violation>,
}

impl FeasibilityVerdict {
    fn ok() -> Self {
        Self {
            feasible: true,
            violation: None,
        }
    }

    fn violated(v: Violation) -> Self {
        Self {
            feasible: false,
            violation: Some(v),
        }
    }
}

/// Closed-form reachable position interval `(x_min, x_max)` at the horizon:
/// the full-braking and full-throttle envelope positions, each with its
/// saturated and unsaturated regime.
pub fn reach_envelope(state_0: VehicleState, limits: &VehicleLimits, t_f: f64) -> (f64, f64) {
    let (x0, v0) = (state_0.x, state_0.v);
    let x_max = if limits.u_max * t_f + v0 <= limits.v_max {
        x0 + v0 * t_f + 0.5 * limits.u_max * t_f * t_f
    } else {
        let t_sat = (limits.v_max - v0) / limits.u_max;
        x0 + (limits.v_max * limits.v_max - v0 * v0) / (2.0 * limits.u_max)
            + limits.v_max * (t_f - t_sat)
    };
    let x_min = if limits.u_min * t_f + v0 >= limits.v_min {
        x0 + v0 * t_f + 0.5 * limits.u_min * t_f * t_f
    } else {
        let t_sat = (limits.v_min - v0) / limits.u_min;
        x0 + (limits.v_min * limits.v_min - v0 * v0) / (2.0 * limits.u_min)
            + limits.v_min * (t_f - t_sat)
    };
    (x_min, x_max)
}

/// Classifies whether `(x_f, t_f)` is reachable from `state_0` under the
/// given limits, evaluating the four envelope exclusion conditions in
/// order: cannot-reach below the speed cap, cannot-reach speed-capped,
/// overshoot above the speed floor, overshoot speed-floored.
pub fn classify(
    state_0: VehicleState,
    limits: &VehicleLimits,
    x_f: f64,
    t_f: f64,
) -> FeasibilityVerdict {
    let (x0, v0) = (state_0.x, state_0.v);
    let dx = x_f - x0;

    if limits.u_max * t_f + v0 <= limits.v_max {
        if v0 * t_f + 0.5 * limits.u_max * t_f * t_f < dx {
            return FeasibilityVerdict::violated(Violation::CannotReachUnsaturated);
        }
    } else if limits.v_max * (t_f - (limits.v_max - v0) / limits.u_max)
        < dx - (limits.v_max * limits.v_max - v0 * v0) / (2.0 * limits.u_max)
    {
        return FeasibilityVerdict::violated(Violation::CannotReachSaturated);
    }

    if limits.u_min * t_f + v0 >= limits.v_min {
        if v0 * t_f + 0.5 * limits.u_min * t_f * t_f > dx {
            return FeasibilityVerdict::violated(Violation::OvershootUnsaturated);
        }
    } else if limits.v_min * (t_f - (limits.v_min - v0) / limits.u_min)
        > dx - (limits.v_min * limits.v_min - v0 * v0) / (2.0 * limits.u_min)
    {
        return FeasibilityVerdict::violated(Violation::OvershootSaturated);
    }

    FeasibilityVerdict::ok()
}

/// Checks the merging vehicle's terminal position against the uncontrolled
/// vehicle: feasible only while `x_Cf` stays strictly below
/// `x_U(0) + v_U t_f − d_C` (by at least the configured margin). A float
/// slop absorbs optima that sit exactly on the margined bound.
pub fn check_c_safety_bound(cfg: &ScenarioConfig, x_cf: f64, t_f: f64) -> FeasibilityVerdict {
    const BOUNDARY_SLOP: f64 = 1e-9;
    let bound = cfg.x_u_at(t_f) - cfg.resolved_d_c();
    if x_cf > bound - cfg.eps_margin + BOUNDARY_SLOP {
        FeasibilityVerdict::violated(Violation::UncontrolledSafetyBound)
    } else {
        FeasibilityVerdict::ok()
    }
}

/// First exclusion condition tripped by a terminal specification, if any.
pub fn spec_violation(cfg: &ScenarioConfig, spec: &TerminalSpec) -> Option<Violation> {
    let checks = [
        classify(cfg.state_1, &cfg.limits_1, spec.x_1f, spec.t_f),
        classify(cfg.state_2, &cfg.limits_2, spec.x_2f, spec.t_f),
        classify(cfg.state_c, &cfg.limits_c, spec.x_cf, spec.t_f),
        check_c_safety_bound(cfg, spec.x_cf, spec.t_f),
    ];
    checks.into_iter().find_map(|v| v.violation)
}

/// Grows the horizon geometrically until the terminal specification is
/// reachable for every vehicle: each retry multiplies the horizon by the
/// current relaxation factor (which itself escalates geometrically) and
/// re-solves the terminal positions. An already-feasible specification is
/// returned unchanged. Fails once the horizon would exceed the scenario's
/// cap or the retry budget is exhausted.
pub fn relax_until_feasible(cfg: &ScenarioConfig, spec: &TerminalSpec) -> Result<TerminalSpec> {
    relax_core(cfg, spec.t_f, spec.branch, Some(*spec))
}

/// Solves the terminal positions at the first workable horizon at or after
/// `t_0` and relaxes to reachability. Unlike [`relax_until_feasible`] this
/// does not need a starting specification, so it also covers horizons where
/// the terminal program itself has an empty feasible set (for example when
/// the uncontrolled vehicle still caps the merging vehicle's terminal
/// position behind its start).
pub fn feasible_spec_from(
    cfg: &ScenarioConfig,
    t_0: f64,
    branch: TerminalBranch,
) -> Result<TerminalSpec> {
    let first = match terminal_positions(cfg, t_0, branch) {
        Ok(s) => Some(s),
        Err(Error::TerminalInfeasible { .. }) => None,
        Err(e) => return Err(e),
    };
    relax_core(cfg, t_0, branch, first)
}

fn relax_core(
    cfg: &ScenarioConfig,
    t_0: f64,
    branch: TerminalBranch,
    current0: Option<TerminalSpec>,
) -> Result<TerminalSpec> {
    let mut beta = cfg.beta0;
    let mut t_f = t_0;
    let mut current = current0;
    for iteration in 0..MAX_RELAX_ITERS {
        if let Some(s) = current {
            if spec_violation(cfg, &s).is_none() {
                return Ok(s);
            }
        }
        t_f *= beta;
        beta *= BETA_GROWTH;
        if t_f > cfg.t_max {
            return Err(Error::RelaxationFailed {
                iterations: iteration,
                t_f,
                t_max: cfg.t_max,
            });
        }
        current = match terminal_positions(cfg, t_f, branch) {
            Ok(s) => Some(s),
            // A temporarily unsolvable terminal configuration (for example
            // a cap still below the merging vehicle's start) is treated
            // like any other infeasibility: keep growing the horizon.
            Err(Error::TerminalInfeasible { .. }) => None,
            Err(e) => return Err(e),
        };
    }
    if let Some(s) = current {
        if spec_violation(cfg, &s).is_none() {
            return Ok(s);
        }
    }
    Err(Error::RelaxationFailed {
        iterations: MAX_RELAX_ITERS,
        t_f,
        t_max: cfg.t_max,
    })
}
