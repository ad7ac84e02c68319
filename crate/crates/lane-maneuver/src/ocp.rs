//! Closed-form fixed-horizon minimum-energy solvers for sign-constrained
//! double-integrator transfers.
//!
//! The advance problem moves a vehicle to a terminal position at or beyond
//! its coasting point using only non-negative acceleration; the retard
//! problem is its mirror image (non-positive acceleration, terminal at or
//! behind the coasting point). Pontryagin analysis makes the unsaturated
//! optimal control affine in time, so every optimum is a sequence of at
//! most three arcs — an acceleration-saturated arc, an affine arc, and a
//! speed-saturated arc — and the solver enumerates the five structural
//! arrangements, solves each boundary system in closed form, discards
//! parameterizations that violate their own case preconditions, and keeps
//! the cheapest survivor.
//!
//! The retard solver reuses the advance core through the reflection
//! `x ↦ −x`: negating position, speed, and control maps a retard problem
//! onto an advance problem with the box bounds swapped and negated, and
//! leaves the quadratic cost unchanged.

use crate::error::Error;
use crate::trajectory::{ControlArc, ControlLaw, Trajectory};
use crate::vehicle::{VehicleLimits, VehicleState};
use crate::Result;

/// Pointwise sign restriction on the control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlSign {
    /// `u(t) ≥ 0` everywhere (advance).
    NonNegative,
    /// `u(t) ≤ 0` everywhere (retard).
    NonPositive,
}

/// Structural label of the returned optimum.
///
/// Advance uses all five labels; retard uses I–IV. In both families the
/// labels run from the most saturated arrangement to the fully interior
/// one, and the interior label's cost has the exact closed form
/// `(3/2)(x_f − x_0 − v_0 T)² / T³`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    I,
    II,
    III,
    IV,
    V,
}

impl std::fmt::Display for CaseId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CaseId::I => "I",
            CaseId::II => "II",
            CaseId::III => "III",
            CaseId::IV => "IV",
            CaseId::V => "V",
        };
        f.write_str(s)
    }
}

/// Arc-boundary times of the returned optimum, in the trajectory's own
/// absolute time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SwitchTimes {
    /// End of the acceleration-saturated arc, if one exists.
    pub t1: Option<f64>,
    /// Entry into the speed-saturated arc, if one exists.
    pub tau: Option<f64>,
}

/// A fixed-horizon sign-constrained transfer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcpProblem {
    /// State at time zero.
    pub state_0: VehicleState,
    /// Acceleration and speed box bounds.
    pub limits: VehicleLimits,
    /// Horizon length (s), strictly positive.
    pub t_f: f64,
    /// Required terminal position (m).
    pub x_f: f64,
    /// Control-sign restriction; determines which family solves it.
    pub sign: ControlSign,
}

/// A solved transfer: the trajectory on `[0, t_f]`, its cost `½∫u²`, the
/// structural case, and the arc-boundary times.
#[derive(Debug, Clone, PartialEq)]
pub struct OcpSolution {
    pub traj: Trajectory,
    pub cost: f64,
    pub case_id: CaseId,
    pub switch_times: SwitchTimes,
}

/// Comparison slack for case preconditions. Candidates on a case boundary
/// may be generated by both neighboring cases with equal cost; selection
/// then prefers the less saturated arrangement.
const CASE_TOL: f64 = 1e-9;
/// Cost difference below which two candidates count as tied.
const COST_TIE: f64 = 1e-9;
/// Arcs shorter than this are dropped rather than materialized.
const MIN_ARC: f64 = 1e-12;

/// One feasible structural arrangement, in advance-core coordinates.
struct Candidate {
    arcs: Vec<ControlArc>,
    cost: f64,
    case: CaseId,
    t1: Option<f64>,
    tau: Option<f64>,
    /// Number of saturated arcs; the tie-break key.
    saturated: u32,
}

fn push_arc(arcs: &mut Vec<ControlArc>, t_start: f64, t_end: f64, law: ControlLaw) {
    if t_end - t_start > MIN_ARC {
        arcs.push(ControlArc {
            t_start,
            t_end,
            law,
        });
    }
}

/// Solves the advance problem in relative coordinates: start `(0, v0)`,
/// horizon `t_hor`, displacement target `dx ≥ v0·t_hor`, bounds
/// `0 < u_max`, `v0 ≤ v_max`. Returns `None` when no arrangement reaches
/// `dx`.
fn advance_core(v0: f64, t_hor: f64, dx: f64, u_max: f64, v_max: f64) -> Option<Candidate> {
    let t = t_hor;
    let delta = dx - v0 * t; // displacement beyond coasting, ≥ 0
    let headroom = v_max - v0;
    let mut candidates: Vec<Candidate> = Vec::new();

    // Fully interior: affine decay u(s) = u0(1 − s/T).
    {
        let u0 = 3.0 * delta / (t * t);
        let v_end = v0 + 1.5 * delta / t;
        if u0 <= u_max + CASE_TOL && v_end <= v_max + CASE_TOL {
            let mut arcs = Vec::new();
            push_arc(
                &mut arcs,
                0.0,
                t,
                ControlLaw::Linear {
                    u0,
                    slope: -u0 / t,
                },
            );
            candidates.push(Candidate {
                arcs,
                cost: 1.5 * delta * delta / (t * t * t),
                case: CaseId::V,
                t1: None,
                tau: None,
                saturated: 0,
            });
        }
    }

    // Speed-saturated only: affine decay reaching v_max at τ, then coast.
    if headroom > CASE_TOL {
        let tau = 3.0 * (headroom * t - delta) / headroom;
        let u0 = 2.0 * headroom / tau;
        if tau > CASE_TOL && tau <= t + CASE_TOL && u0 <= u_max + CASE_TOL {
            let tau_c = tau.min(t);
            let mut arcs = Vec::new();
            push_arc(
                &mut arcs,
                0.0,
                tau_c,
                ControlLaw::Linear {
                    u0,
                    slope: -u0 / tau_c,
                },
            );
            push_arc(&mut arcs, tau_c, t, ControlLaw::Constant(0.0));
            candidates.push(Candidate {
                arcs,
                cost: (2.0 / 3.0) * headroom * headroom / tau_c,
                case: CaseId::IV,
                t1: None,
                tau: Some(tau_c),
                saturated: 1,
            });
        }
    }

    // Acceleration-saturated only: u_max on [0, t₁], affine decay to zero
    // at the horizon, terminal speed below the cap.
    {
        let disc = 3.0 * t * t - 6.0 * delta / u_max;
        if disc >= 0.0 {
            let t1 = t - disc.sqrt();
            let v_end = v0 + u_max * (t1 + t) / 2.0;
            // The decay arc must have positive length (its boundary
            // condition u(t_f) = 0 is vacuous otherwise); a vanishing
            // decay arc is the envelope-boundary arrangement below.
            if t1 > CASE_TOL && t1 < t - CASE_TOL && v_end <= v_max + CASE_TOL {
                let span = t - t1;
                let mut arcs = Vec::new();
                push_arc(&mut arcs, 0.0, t1, ControlLaw::Constant(u_max));
                push_arc(
                    &mut arcs,
                    t1,
                    t,
                    ControlLaw::Linear {
                        u0: u_max,
                        slope: -u_max / span,
                    },
                );
                candidates.push(Candidate {
                    arcs,
                    cost: u_max * u_max * (t + 2.0 * t1) / 6.0,
                    case: CaseId::III,
                    t1: Some(t1),
                    tau: None,
                    saturated: 1,
                });
            }
        }
    }

    // Both saturated: u_max on [0, t₁], affine decay hitting zero exactly
    // as the speed reaches v_max at τ, coast to the horizon. The affine
    // window is symmetric about the bang-to-cap time T_v.
    if headroom > CASE_TOL {
        let t_v = headroom / u_max;
        if t_v < t {
            // Position of the pure bang-then-coast envelope trajectory.
            let x_env = v0 * t + 0.5 * headroom * t_v + headroom * (t - t_v);
            let shortfall = x_env - dx;
            if shortfall >= 0.0 {
                let window = (24.0 * shortfall / u_max).sqrt();
                let t1 = t_v - 0.5 * window;
                let tau = t_v + 0.5 * window;
                // The affine window must have positive length; a vanishing
                // window is the envelope-boundary arrangement below.
                if window > CASE_TOL && t1 > CASE_TOL && tau <= t + CASE_TOL {
                    let tau_c = tau.min(t);
                    let mut arcs = Vec::new();
                    push_arc(&mut arcs, 0.0, t1, ControlLaw::Constant(u_max));
                    push_arc(
                        &mut arcs,
                        t1,
                        tau_c,
                        ControlLaw::Linear {
                            u0: u_max,
                            slope: -u_max / (tau_c - t1),
                        },
                    );
                    push_arc(&mut arcs, tau_c, t, ControlLaw::Constant(0.0));
                    candidates.push(Candidate {
                        arcs,
                        cost: 0.5 * u_max * u_max * t1
                            + u_max * u_max * (tau_c - t1) / 6.0,
                        case: CaseId::II,
                        t1: Some(t1),
                        tau: Some(tau_c),
                        saturated: 2,
                    });
                }
            }
        }
    }

    // Envelope boundary: the target sits exactly on the bang(-then-coast)
    // envelope, so the only admissible control is the envelope itself.
    {
        let t_v = if headroom > CASE_TOL {
            headroom / u_max
        } else {
            0.0
        };
        let (x_env, bang_end) = if t_v >= t {
            (v0 * t + 0.5 * u_max * t * t, t)
        } else {
            (
                v0 * t + 0.5 * headroom * t_v + headroom * (t - t_v),
                t_v,
            )
        };
        // Absolute tolerance keeps the terminal-accuracy guarantee: the
        // boundary trajectory ends at the envelope position, so it may
        // only stand in for targets within the 1e-6 m terminal budget.
        if (dx - x_env).abs() <= 1e-6 {
            let mut arcs = Vec::new();
            push_arc(&mut arcs, 0.0, bang_end, ControlLaw::Constant(u_max));
            push_arc(&mut arcs, bang_end, t, ControlLaw::Constant(0.0));
            candidates.push(Candidate {
                arcs,
                cost: 0.5 * u_max * u_max * bang_end,
                case: CaseId::I,
                t1: Some(bang_end),
                tau: if bang_end < t { Some(bang_end) } else { None },
                saturated: 2,
            });
        }
    }

    // Cheapest candidate; on ties the less saturated arrangement wins.
    candidates.into_iter().min_by(|a, b| {
        if (a.cost - b.cost).abs() <= COST_TIE {
            a.saturated
                .cmp(&b.saturated)
                .then(a.arcs.len().cmp(&b.arcs.len()))
        } else {
            a.cost.partial_cmp(&b.cost).expect("finite costs")
        }
    })
}

fn validate_problem(p: &OcpProblem) -> Result<()> {
    p.limits.validate()?;
    if !(p.t_f > 0.0) || !p.t_f.is_finite() {
        return Err(Error::Domain(format!(
            "transfer horizon must be positive and finite, got {}",
            p.t_f
        )));
    }
    if !p.x_f.is_finite() || !p.state_0.x.is_finite() || !p.state_0.v.is_finite() {
        return Err(Error::Domain("non-finite transfer boundary data".into()));
    }
    let coast = p.state_0.coast_position(p.t_f);
    let slack = 1e-9 * (1.0 + coast.abs());
    match p.sign {
        ControlSign::NonNegative if p.x_f < coast - slack => Err(Error::Domain(format!(
            "advance target {:.6} m lies behind the coasting point {coast:.6} m",
            p.x_f
        ))),
        ControlSign::NonPositive if p.x_f > coast + slack => Err(Error::Domain(format!(
            "retard target {:.6} m lies beyond the coasting point {coast:.6} m",
            p.x_f
        ))),
        _ => Ok(()),
    }
}

/// Minimum-energy transfer with non-negative control: reaches `x_f ≥`
/// the coasting point at `t_f` with `u(t) ≥ 0`, speed nondecreasing, and
/// the speed cap respected.
pub fn solve_advance(p: &OcpProblem) -> Result<OcpSolution> {
    if p.sign != ControlSign::NonNegative {
        return Err(Error::Domain(
            "solve_advance requires the non-negative control sign".into(),
        ));
    }
    validate_problem(p)?;
    let dx = (p.x_f - p.state_0.x).max(p.state_0.v * p.t_f);
    let cand = advance_core(p.state_0.v, p.t_f, dx, p.limits.u_max, p.limits.v_max)
        .ok_or(Error::OcpInfeasible {
            x_f: p.x_f,
            t_f: p.t_f,
        })?;
    finish(p, cand, false)
}

/// Minimum-energy transfer with non-positive control: reaches `x_f ≤`
/// the coasting point at `t_f` with `u(t) ≤ 0`, speed nonincreasing, and
/// the speed floor respected. Solved by reflecting onto the advance core.
pub fn solve_retard(p: &OcpProblem) -> Result<OcpSolution> {
    if p.sign != ControlSign::NonPositive {
        return Err(Error::Domain(
            "solve_retard requires the non-positive control sign".into(),
        ));
    }
    validate_problem(p)?;
    let dx = (p.state_0.x - p.x_f).max(-p.state_0.v * p.t_f);
    let cand = advance_core(
        -p.state_0.v,
        p.t_f,
        dx,
        -p.limits.u_min,
        -p.limits.v_min,
    )
    .ok_or(Error::OcpInfeasible {
        x_f: p.x_f,
        t_f: p.t_f,
    })?;
    finish(p, cand, true)
}

/// Builds the trajectory from a core candidate, reflecting the control
/// laws back for retard problems, and relabels the case: the retard
/// taxonomy shifts each advance label down one (interior V ↦ IV, …) and
/// folds the envelope boundary into its own Case I.
fn finish(p: &OcpProblem, cand: Candidate, reflected: bool) -> Result<OcpSolution> {
    let arcs = if reflected {
        cand.arcs
            .iter()
            .map(|a| ControlArc {
                t_start: a.t_start,
                t_end: a.t_end,
                law: match a.law {
                    ControlLaw::Constant(u0) => ControlLaw::Constant(-u0),
                    ControlLaw::Linear { u0, slope } => ControlLaw::Linear {
                        u0: -u0,
                        slope: -slope,
                    },
                },
            })
            .collect()
    } else {
        cand.arcs
    };
    let traj = if arcs.is_empty() {
        Trajectory::coasting(0.0, p.state_0, p.t_f)?
    } else {
        let mut arcs = arcs;
        // Close any sub-resolution gaps left by dropped arcs.
        if let Some(first) = arcs.first_mut() {
            first.t_start = 0.0;
        }
        if let Some(last) = arcs.last_mut() {
            last.t_end = p.t_f;
        }
        Trajectory::new(0.0, p.state_0, arcs)?
    };
    debug_assert!(
        (traj.cost() - cand.cost).abs() <= 1e-6 * (1.0 + cand.cost),
        "closed-form cost {} vs integrated {}",
        cand.cost,
        traj.cost()
    );
    let case_id = if reflected {
        match cand.case {
            CaseId::V => CaseId::IV,
            CaseId::IV => CaseId::III,
            CaseId::III => CaseId::II,
            CaseId::II | CaseId::I => CaseId::I,
        }
    } else {
        cand.case
    };
    Ok(OcpSolution {
        traj,
        cost: cand.cost,
        case_id,
        switch_times: SwitchTimes {
            t1: cand.t1,
            tau: cand.tau,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn limits() -> VehicleLimits {
        VehicleLimits {
            u_min: -7.0,
            u_max: 3.3,
            v_min: 1.0,
            v_max: 33.0,
        }
    }

    fn advance(state: VehicleState, limits: VehicleLimits, t_f: f64, x_f: f64) -> OcpProblem {
        OcpProblem {
            state_0: state,
            limits,
            t_f,
            x_f,
            sign: ControlSign::NonNegative,
        }
    }

    fn retard(state: VehicleState, limits: VehicleLimits, t_f: f64, x_f: f64) -> OcpProblem {
        OcpProblem {
            state_0: state,
            limits,
            t_f,
            x_f,
            sign: ControlSign::NonPositive,
        }
    }

    /// Pointwise checks shared by every returned solution.
    fn check_invariants(sol: &OcpSolution, p: &OcpProblem) {
        let end = sol.traj.end_state();
        assert!(
            (end.x - p.x_f).abs() <= 1e-6,
            "terminal miss: {} vs {}",
            end.x,
            p.x_f
        );
        let (v_lo, v_hi) = sol.traj.speed_range();
        assert!(v_hi <= p.limits.v_max + 1e-7, "speed cap violated: {v_hi}");
        assert!(v_lo >= p.limits.v_min - 1e-7, "speed floor violated: {v_lo}");
        let (u_lo, u_hi) = sol.traj.control_range();
        assert!(u_hi <= p.limits.u_max + 1e-7);
        assert!(u_lo >= p.limits.u_min - 1e-7);
        match p.sign {
            ControlSign::NonNegative => assert!(u_lo >= -1e-9, "sign violated: {u_lo}"),
            ControlSign::NonPositive => assert!(u_hi <= 1e-9, "sign violated: {u_hi}"),
        }
        // Control continuity at interior arc junctions — except when the
        // target sits on the reach envelope, where the unique feasible
        // control (full effort, then coast on the speed bound) jumps.
        let (env_lo, env_hi) =
            crate::feasibility::reach_envelope(p.state_0, &p.limits, p.t_f);
        let on_boundary = (p.x_f - env_hi).abs() <= 1e-6 || (p.x_f - env_lo).abs() <= 1e-6;
        if !on_boundary {
            for &ts in &sol.traj.switch_times() {
                if ts <= 1e-9 || ts >= p.t_f - 1e-9 {
                    continue;
                }
                let before = sol.traj.control_at(ts - 1e-7).unwrap();
                let after = sol.traj.control_at(ts + 1e-7).unwrap();
                assert!(
                    (before - after).abs() < 1e-4,
                    "control jump at {ts}: {before} vs {after}"
                );
            }
        }
        assert_relative_eq!(sol.cost, sol.traj.cost(), max_relative = 1e-8, epsilon = 1e-12);
    }

    #[test]
    fn coasting_target_costs_nothing() {
        let s0 = VehicleState::new(10.0, 12.0);
        let p = advance(s0, limits(), 8.0, 10.0 + 12.0 * 8.0);
        let sol = solve_advance(&p).unwrap();
        assert_eq!(sol.case_id, CaseId::V);
        assert!(sol.cost.abs() < 1e-12);
        check_invariants(&sol, &p);

        let p = retard(s0, limits(), 8.0, 10.0 + 12.0 * 8.0);
        let sol = solve_retard(&p).unwrap();
        assert_eq!(sol.case_id, CaseId::IV);
        assert!(sol.cost.abs() < 1e-12);
        check_invariants(&sol, &p);
    }

    #[test]
    fn interior_advance_matches_the_cubic_cost_formula() {
        // Δ = 120 − 100 = 20; peak control 0.6 and terminal speed 13 stay
        // interior, so the cost is (3/2)·20²/10³ exactly.
        let p = advance(VehicleState::new(0.0, 10.0), limits(), 10.0, 120.0);
        let sol = solve_advance(&p).unwrap();
        assert_eq!(sol.case_id, CaseId::V);
        assert_relative_eq!(sol.cost, 0.6, max_relative = 1e-12);
        assert_eq!(sol.switch_times, SwitchTimes::default());
        check_invariants(&sol, &p);
    }

    #[test]
    fn interior_retard_matches_the_cubic_cost_formula() {
        // Δ = 120 − 200 = −80; u₀ = −2.4 and terminal speed 8 stay
        // interior, so the cost is (3/2)·80²/10³ exactly.
        let p = retard(VehicleState::new(0.0, 20.0), limits(), 10.0, 120.0);
        let sol = solve_retard(&p).unwrap();
        assert_eq!(sol.case_id, CaseId::IV);
        assert_relative_eq!(sol.cost, 9.6, max_relative = 1e-12);
        check_invariants(&sol, &p);
        // Speed is nonincreasing: terminal speed is the minimum.
        assert_relative_eq!(sol.traj.end_state().v, 8.0, max_relative = 1e-9);
    }

    #[test]
    fn speed_cap_produces_a_coast_tail() {
        // v_max = 12 forces saturation: τ = 3[(2)(10) − 15]/2 = 7.5 and
        // the cost is (2/3)·2²/7.5.
        let lim = VehicleLimits {
            v_max: 12.0,
            ..limits()
        };
        let p = advance(VehicleState::new(0.0, 10.0), lim, 10.0, 115.0);
        let sol = solve_advance(&p).unwrap();
        assert_eq!(sol.case_id, CaseId::IV);
        assert_relative_eq!(sol.cost, (2.0 / 3.0) * 4.0 / 7.5, max_relative = 1e-12);
        assert_relative_eq!(sol.switch_times.tau.unwrap(), 7.5, max_relative = 1e-12);
        assert!(sol.switch_times.t1.is_none());
        // On the coast tail the speed sits on the cap.
        let s = sol.traj.evaluate(9.0).unwrap();
        assert_relative_eq!(s.v, 12.0, max_relative = 1e-9);
        assert!(s.u.abs() < 1e-12);
        check_invariants(&sol, &p);
    }

    #[test]
    fn control_cap_produces_a_saturated_head() {
        // u_max = 1 with Δ = 40: t₁ = 10 − √60, cost u²(T + 2t₁)/6.
        let lim = VehicleLimits {
            u_max: 1.0,
            ..limits()
        };
        let p = advance(VehicleState::new(0.0, 10.0), lim, 10.0, 140.0);
        let sol = solve_advance(&p).unwrap();
        assert_eq!(sol.case_id, CaseId::III);
        let t1 = 10.0 - 60.0_f64.sqrt();
        assert_relative_eq!(sol.switch_times.t1.unwrap(), t1, max_relative = 1e-10);
        assert_relative_eq!(sol.cost, (10.0 + 2.0 * t1) / 6.0, max_relative = 1e-10);
        assert!(sol.switch_times.tau.is_none());
        // The head rides the control cap.
        assert_relative_eq!(sol.traj.control_at(0.5 * t1).unwrap(), 1.0, epsilon = 1e-12);
        check_invariants(&sol, &p);
    }

    #[test]
    fn both_caps_produce_the_three_arc_arrangement() {
        // u_max = 1, v_max = 13: the affine window is symmetric about the
        // bang-to-cap time 3 s with half-width √12/2.
        let lim = VehicleLimits {
            u_max: 1.0,
            v_max: 13.0,
            ..limits()
        };
        let p = advance(VehicleState::new(0.0, 10.0), lim, 10.0, 125.0);
        let sol = solve_advance(&p).unwrap();
        assert_eq!(sol.case_id, CaseId::II);
        let half = 12.0_f64.sqrt() / 2.0;
        assert_relative_eq!(sol.switch_times.t1.unwrap(), 3.0 - half, max_relative = 1e-9);
        assert_relative_eq!(sol.switch_times.tau.unwrap(), 3.0 + half, max_relative = 1e-9);
        let expected = 0.5 * (3.0 - half) + 2.0 * half / 6.0;
        assert_relative_eq!(sol.cost, expected, max_relative = 1e-9);
        check_invariants(&sol, &p);
    }

    #[test]
    fn envelope_boundary_forces_the_bang_arrangement() {
        // Targets exactly on the full-throttle envelope leave no slack.
        let lim = VehicleLimits {
            u_max: 1.0,
            v_max: 13.0,
            ..limits()
        };
        // Cap reached at 3 s: envelope = 30 + 4.5 + 13·7 = 125.5.
        let p = advance(VehicleState::new(0.0, 10.0), lim, 10.0, 125.5);
        let sol = solve_advance(&p).unwrap();
        assert_eq!(sol.case_id, CaseId::I);
        assert_relative_eq!(sol.cost, 0.5 * 3.0, max_relative = 1e-9);
        check_invariants(&sol, &p);

        // Short horizon: the cap is never reached, u ≡ u_max.
        let p = advance(VehicleState::new(0.0, 10.0), lim, 2.0, 22.0);
        let sol = solve_advance(&p).unwrap();
        assert_eq!(sol.case_id, CaseId::I);
        assert_relative_eq!(sol.cost, 0.5 * 2.0, max_relative = 1e-9);
        check_invariants(&sol, &p);
    }

    #[test]
    fn retard_relabels_the_reflected_cases() {
        // Mirror of the speed-cap test: the floor v_min = 8 catches a
        // deceleration from 10, giving the retard speed-saturated label.
        let lim = VehicleLimits {
            v_min: 8.0,
            ..limits()
        };
        let p = retard(VehicleState::new(0.0, 10.0), lim, 10.0, 85.0);
        let sol = solve_retard(&p).unwrap();
        assert_eq!(sol.case_id, CaseId::III);
        assert_relative_eq!(sol.cost, (2.0 / 3.0) * 4.0 / 7.5, max_relative = 1e-12);
        // Tail coasts on the floor.
        let s = sol.traj.evaluate(9.0).unwrap();
        assert_relative_eq!(s.v, 8.0, max_relative = 1e-9);
        check_invariants(&sol, &p);

        // Mirror of the control-cap test.
        let lim = VehicleLimits {
            u_min: -1.0,
            ..limits()
        };
        let p = retard(VehicleState::new(0.0, 10.0), lim, 10.0, 60.0);
        let sol = solve_retard(&p).unwrap();
        assert_eq!(sol.case_id, CaseId::II);
        let t1 = 10.0 - 60.0_f64.sqrt();
        assert_relative_eq!(sol.cost, (10.0 + 2.0 * t1) / 6.0, max_relative = 1e-10);
        check_invariants(&sol, &p);
    }

    #[test]
    fn unreachable_targets_are_rejected() {
        // Beyond the full-throttle envelope.
        let p = advance(VehicleState::new(0.0, 10.0), limits(), 5.0, 200.0);
        assert!(matches!(
            solve_advance(&p),
            Err(Error::OcpInfeasible { .. })
        ));
        // Behind the coasting point: wrong sign family.
        let p = advance(VehicleState::new(0.0, 10.0), limits(), 5.0, 30.0);
        assert!(matches!(solve_advance(&p), Err(Error::Domain(_))));
        // Above the braking envelope for retard.
        let p = retard(VehicleState::new(0.0, 10.0), limits(), 5.0, 80.0);
        assert!(matches!(solve_retard(&p), Err(Error::Domain(_))));
        // Below the braking envelope (floored at v_min = 1 after 9/7 s).
        let p = retard(VehicleState::new(0.0, 10.0), limits(), 20.0, 20.0);
        assert!(matches!(
            solve_retard(&p),
            Err(Error::OcpInfeasible { .. })
        ));
    }

    #[test]
    fn reflection_preserves_cost() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let v0 = rng.gen_range(2.0..30.0);
            let t_f = rng.gen_range(1.0..20.0);
            let lim = limits();
            // A retard target between the braking envelope and coasting.
            let coast = v0 * t_f;
            let (x_lo, _) = crate::feasibility::reach_envelope(
                VehicleState::new(0.0, v0),
                &lim,
                t_f,
            );
            let frac = rng.gen_range(0.05..0.95);
            let x_f = x_lo + frac * (coast - x_lo);
            let p = retard(VehicleState::new(0.0, v0), lim, t_f, x_f);
            let sol = solve_retard(&p).unwrap();
            check_invariants(&sol, &p);
            // The reflected core problem must agree exactly.
            let mirror = advance_core(-v0, t_f, -x_f, -lim.u_min, -lim.v_min)
                .expect("mirror core problem solvable");
            assert_relative_eq!(sol.cost, mirror.cost, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn selection_chooses_the_cheapest_arrangement() {
        // Sweep targets across the reachable band; the returned cost must
        // never exceed any individually valid case formula by more than
        // the tie tolerance, and must be monotone in the target beyond
        // coasting (more displacement costs more energy).
        let lim = VehicleLimits {
            u_max: 1.5,
            v_max: 16.0,
            ..limits()
        };
        let s0 = VehicleState::new(0.0, 10.0);
        let t_f = 12.0;
        let coast = s0.coast_position(t_f);
        let (_, hi) = crate::feasibility::reach_envelope(s0, &lim, t_f);
        let mut prev = -1.0;
        for k in 0..=200 {
            let x_f = coast + (hi - coast) * (k as f64) / 200.0;
            let sol = solve_advance(&advance(s0, lim, t_f, x_f)).unwrap();
            check_invariants(&sol, &advance(s0, lim, t_f, x_f));
            assert!(
                sol.cost >= prev - 1e-9,
                "cost not monotone at x_f = {x_f}: {} < {prev}",
                sol.cost
            );
            prev = sol.cost;
        }
    }
}
