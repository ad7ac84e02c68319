//! Planning the merging vehicle: case trichotomy, reduction to the
//! sign-constrained solvers where the moving safety bound is provably
//! inactive, and the constrained-arc decomposition otherwise.
//!
//! The trichotomy compares the merging vehicle's coasting terminal
//! position and the uncontrolled vehicle's safety bound: targets beyond
//! coasting need acceleration (the bound cannot activate), targets behind
//! coasting need deceleration, and if even coasting would overrun the
//! bound the deceleration may have to ride it. In the last case the plan
//! decomposes at the boundary-entry time τ₁: a pinned transfer onto the
//! bound (position *and* speed matched, by the speed-matching argument),
//! then a retard transfer from the bound to the terminal position. The
//! entry position is pinned to the boundary line, so the outer problem is
//! a one-dimensional search over τ₁.

use crate::error::Error;
use crate::ocp::{solve_advance, solve_retard, ControlSign, OcpProblem, OcpSolution};
use crate::scenario::ScenarioConfig;
use crate::search::grid_then_golden;
use crate::terminal::TerminalSpec;
use crate::trajectory::{ControlArc, ControlLaw, Trajectory};
use crate::vehicle::VehicleState;
use crate::Result;

/// Validity slack for the pinned subproblem's arc-pattern preconditions.
const PIN_TOL: f64 = 1e-9;
/// Grid resolution of the boundary-entry search.
const TAU1_GRID: usize = 101;
/// Refinement tolerance (s) of the boundary-entry search.
const TAU1_TOL: f64 = 1e-4;

/// How a terminal target relates to coasting and the safety bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseLabel {
    /// Target beyond coasting, below the bound: accelerate; the bound
    /// stays inactive.
    Case1,
    /// Target behind coasting, coasting below the bound: decelerate; the
    /// bound stays inactive.
    Case2,
    /// Target behind coasting, coasting at or beyond the bound: decelerate
    /// and possibly ride the bound.
    Case3,
    /// Target at or beyond the bound: no admissible plan; the terminal
    /// specification must change.
    Infeasible,
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CaseLabel::Case1 => "case-1",
            CaseLabel::Case2 => "case-2",
            CaseLabel::Case3 => "case-3",
            CaseLabel::Infeasible => "infeasible",
        };
        f.write_str(s)
    }
}

/// The trichotomy's inputs and verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseClassification {
    /// Coasting terminal position of the merging vehicle (m).
    pub xbar_cf: f64,
    /// Uncontrolled-vehicle bound on the terminal position (m).
    pub u_bound: f64,
    /// Required terminal position (m).
    pub x_cf: f64,
    pub label: CaseLabel,
}

/// Saturation pattern of the pinned transfer onto the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcase {
    /// Full braking first, then easing off.
    MinFirst,
    /// Easing in, full braking last.
    MinLast,
    /// No full-braking arc.
    Interior,
}

impl std::fmt::Display for Subcase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Subcase::MinFirst => "min-first",
            Subcase::MinLast => "min-last",
            Subcase::Interior => "interior",
        };
        f.write_str(s)
    }
}

/// A plan that rides the safety bound: boundary entry at `tau1`/`a`, the
/// pinned transfer's saturation switch `tau2`, both subproblem costs, and
/// the assembled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedArcSolution {
    /// Boundary-entry time (s): the first instant the plan touches the
    /// safety line (0 when the start state already sits on it).
    pub tau1: f64,
    /// Boundary-entry position (m), on the safety line exactly.
    pub a: f64,
    /// Time the plan leaves the safety line (s). Equals `tau1` for a
    /// tangential touch; exceeds it when the optimum rides the line for a
    /// while. The control may jump here and nowhere else.
    pub boundary_exit: f64,
    /// Saturation switch within the pinned transfer, when one exists.
    pub tau2: Option<f64>,
    pub subcase: Subcase,
    /// Cost of the pinned transfer onto the boundary.
    pub j1: f64,
    /// Cost of the retard transfer from the boundary to the target.
    pub j2: f64,
    pub traj: Trajectory,
}

impl ConstrainedArcSolution {
    /// Total cost `½∫u²` of the assembled plan.
    pub fn cost(&self) -> f64 {
        self.j1 + self.j2
    }
}

/// The merging vehicle's plan: either one sign-constrained solve (the
/// bound never activates) or the constrained-arc decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum CPlan {
    Unconstrained(OcpSolution),
    Constrained(ConstrainedArcSolution),
}

impl CPlan {
    pub fn trajectory(&self) -> &Trajectory {
        match self {
            CPlan::Unconstrained(s) => &s.traj,
            CPlan::Constrained(s) => &s.traj,
        }
    }

    pub fn cost(&self) -> f64 {
        match self {
            CPlan::Unconstrained(s) => s.cost,
            CPlan::Constrained(s) => s.cost(),
        }
    }

    pub fn is_constrained(&self) -> bool {
        matches!(self, CPlan::Constrained(_))
    }
}

/// Classifies the merging vehicle's terminal target against its coasting
/// position and the uncontrolled vehicle's safety bound at the horizon.
pub fn classify_case(cfg: &ScenarioConfig, spec: &TerminalSpec) -> CaseClassification {
    let xbar_cf = cfg.state_c.coast_position(spec.t_f);
    let accelerating = spec.x_cf >= xbar_cf;
    let d_c = cfg.resolved_d_c_directed(spec.t_f, accelerating);
    let u_bound = cfg.x_u_at(spec.t_f) - d_c;
    let label = if spec.x_cf >= u_bound {
        CaseLabel::Infeasible
    } else if accelerating {
        CaseLabel::Case1
    } else if xbar_cf < u_bound {
        CaseLabel::Case2
    } else {
        CaseLabel::Case3
    };
    CaseClassification {
        xbar_cf,
        u_bound,
        x_cf: spec.x_cf,
        label,
    }
}

/// Plans the merging vehicle for a valid terminal specification.
///
/// Targets beyond coasting reduce to one advance solve and targets behind
/// coasting with coasting clear of the bound reduce to one retard solve —
/// in both cases the moving safety bound is provably inactive. When
/// coasting would overrun the bound, the retard solve is attempted first
/// (its optimum often clears the bound anyway) and checked against the
/// boundary line exactly; only a genuine crossing invokes the
/// constrained-arc decomposition.
pub fn plan_c(cfg: &ScenarioConfig, spec: &TerminalSpec) -> Result<CPlan> {
    let cls = classify_case(cfg, spec);
    let problem = |sign| OcpProblem {
        state_0: cfg.state_c,
        limits: cfg.limits_c,
        t_f: spec.t_f,
        x_f: spec.x_cf,
        sign,
    };
    match cls.label {
        CaseLabel::Infeasible => Err(Error::TerminalInfeasible {
            t_f: spec.t_f,
            reason: format!(
                "merging-vehicle target {:.3} m is not strictly below the \
                 safety bound {:.3} m",
                cls.x_cf, cls.u_bound
            ),
        }),
        CaseLabel::Case1 => Ok(CPlan::Unconstrained(solve_advance(&problem(
            ControlSign::NonNegative,
        ))?)),
        CaseLabel::Case2 => Ok(CPlan::Unconstrained(solve_retard(&problem(
            ControlSign::NonPositive,
        ))?)),
        CaseLabel::Case3 => {
            let attempt = solve_retard(&problem(ControlSign::NonPositive))?;
            let d_c = cfg.resolved_d_c_directed(spec.t_f, false);
            let (_, gap_min) = attempt
                .traj
                .min_gap_below_line(cfg.state_u.x - d_c, cfg.state_u.v);
            if gap_min >= -1e-9 {
                Ok(CPlan::Unconstrained(attempt))
            } else {
                Ok(CPlan::Constrained(solve_constrained(cfg, spec)?))
            }
        }
    }
}

/// One arc pattern of the pinned transfer, in relative time on `[0, T]`.
struct PinnedCandidate {
    arcs: Vec<ControlArc>,
    cost: f64,
    tau2: Option<f64>,
    subcase: Subcase,
    /// Preference rank on cost ties: interior patterns first.
    rank: u32,
}

/// Solves the pinned transfer: change speed by `dv` and gain displacement
/// `dx` relative to coasting over a horizon `T`, with control confined to
/// `[u_min, 0]` and both terminal speed and position pinned.
///
/// The unsaturated optimal control is affine in time, so the optimum is
/// `clamp(p + qt, u_min, 0)` for some affine function — at most three arcs
/// with the clamps in monotone order. All seven realizable patterns are
/// solved in closed form (the published decomposition keeps the two
/// full-braking patterns and the interior one; the zero-clamped patterns
/// are their mirror completions and cost nothing extra to enumerate), and
/// the cheapest valid one wins.
fn solve_pinned(t_hor: f64, dv: f64, dx: f64, u_min: f64) -> Option<PinnedCandidate> {
    let t = t_hor;
    let m = u_min;
    if !(t > 0.0) || dv > PIN_TOL || m >= 0.0 {
        return None;
    }
    let mut cands: Vec<PinnedCandidate> = Vec::new();
    let admissible = |u: f64| u >= m - PIN_TOL && u <= PIN_TOL;

    // Interior: u = p + qt throughout.
    {
        let p = (6.0 * dx - 2.0 * dv * t) / (t * t);
        let q = 6.0 * (dv * t - 2.0 * dx) / (t * t * t);
        let u_end = p + q * t;
        if admissible(p) && admissible(u_end) {
            cands.push(PinnedCandidate {
                arcs: vec![arc(0.0, t, ControlLaw::Linear { u0: p, slope: q })],
                cost: 0.5 * (p * p * t + p * q * t * t + q * q * t * t * t / 3.0),
                tau2: None,
                subcase: Subcase::Interior,
                rank: 0,
            });
        }
    }

    // Coast head, then affine descent (upper clamp active first).
    if dv < -PIN_TOL {
        let s = 3.0 * dx / dv;
        let u_end = 2.0 * dv / s;
        if s > PIN_TOL && s <= t + PIN_TOL && u_end >= m - PIN_TOL {
            let s = s.min(t);
            let sigma = t - s;
            cands.push(PinnedCandidate {
                arcs: vec![
                    arc(0.0, sigma, ControlLaw::Constant(0.0)),
                    arc(
                        sigma,
                        t,
                        ControlLaw::Linear {
                            u0: 0.0,
                            slope: 2.0 * dv / (s * s),
                        },
                    ),
                ],
                cost: (2.0 / 3.0) * dv * dv / s,
                tau2: None,
                subcase: Subcase::Interior,
                rank: 1,
            });
        }
    }

    // Affine ascent to zero, then coast tail (upper clamp active last).
    if dv < -PIN_TOL {
        let s = 3.0 * (dv * t - dx) / dv;
        let u0 = 2.0 * dv / s;
        if s > PIN_TOL && s <= t + PIN_TOL && u0 >= m - PIN_TOL {
            let s = s.min(t);
            cands.push(PinnedCandidate {
                arcs: vec![
                    arc(
                        0.0,
                        s,
                        ControlLaw::Linear {
                            u0,
                            slope: -u0 / s,
                        },
                    ),
                    arc(s, t, ControlLaw::Constant(0.0)),
                ],
                cost: (2.0 / 3.0) * dv * dv / s,
                tau2: None,
                subcase: Subcase::Interior,
                rank: 1,
            });
        }
    }

    // Full braking first, easing off to the end (lower clamp first).
    {
        let w = dv - m * t;
        let d = dx - 0.5 * m * t * t;
        if w > PIN_TOL && d > PIN_TOL {
            let s = 3.0 * d / w;
            let u_end = m + 2.0 * w / s;
            if s > PIN_TOL && s <= t + PIN_TOL && u_end <= PIN_TOL {
                let s = s.min(t);
                let tau2 = t - s;
                cands.push(PinnedCandidate {
                    arcs: vec![
                        arc(0.0, tau2, ControlLaw::Constant(m)),
                        arc(
                            tau2,
                            t,
                            ControlLaw::Linear {
                                u0: m,
                                slope: 2.0 * w / (s * s),
                            },
                        ),
                    ],
                    cost: 0.5 * m * m * t + m * w + (2.0 / 9.0) * w * w * w / d,
                    tau2: Some(tau2),
                    subcase: Subcase::MinFirst,
                    rank: 2,
                });
            }
        }
    }

    // Easing in, full braking last (lower clamp last) — the time reversal
    // of the previous pattern.
    {
        let w = dv - m * t;
        let e = dv * t - dx - 0.5 * m * t * t;
        if w > PIN_TOL && e > PIN_TOL {
            let tau2 = 3.0 * e / w;
            let u0 = m + 2.0 * w / tau2;
            if tau2 > PIN_TOL && tau2 <= t + PIN_TOL && u0 <= PIN_TOL {
                let tau2 = tau2.min(t);
                cands.push(PinnedCandidate {
                    arcs: vec![
                        arc(
                            0.0,
                            tau2,
                            ControlLaw::Linear {
                                u0,
                                slope: -2.0 * w / (tau2 * tau2),
                            },
                        ),
                        arc(tau2, t, ControlLaw::Constant(m)),
                    ],
                    cost: 0.5 * m * m * t + m * w + (2.0 / 9.0) * w * w * w / e,
                    tau2: Some(tau2),
                    subcase: Subcase::MinLast,
                    rank: 2,
                });
            }
        }
    }

    // Full braking, affine ascent to zero, coast tail (both clamps, lower
    // first). The affine window length satisfies a pure quadratic.
    {
        let a_len = dv / m; // duration equivalent of the speed drop, ≥ 0
        let rhs = 24.0 * (t * a_len - 0.5 * a_len * a_len - dx / m);
        if rhs >= 0.0 {
            let s = rhs.sqrt();
            let tau2 = a_len - 0.5 * s;
            let tau_z = tau2 + s;
            if s > PIN_TOL && tau2 >= -PIN_TOL && tau_z <= t + PIN_TOL {
                let tau2 = tau2.max(0.0);
                let tau_z = tau_z.min(t);
                cands.push(PinnedCandidate {
                    arcs: vec![
                        arc(0.0, tau2, ControlLaw::Constant(m)),
                        arc(
                            tau2,
                            tau_z,
                            ControlLaw::Linear {
                                u0: m,
                                slope: -m / s,
                            },
                        ),
                        arc(tau_z, t, ControlLaw::Constant(0.0)),
                    ],
                    cost: 0.5 * m * m * (a_len - s / 6.0),
                    tau2: Some(tau2),
                    subcase: Subcase::MinFirst,
                    rank: 3,
                });
            }
        }
    }

    // Coast head, affine descent, full braking last — the time reversal of
    // the previous pattern.
    {
        let a_len = dv / m;
        let dx_rev = dv * t - dx;
        let rhs = 24.0 * (t * a_len - 0.5 * a_len * a_len - dx_rev / m);
        if rhs >= 0.0 {
            let s = rhs.sqrt();
            let m_len = a_len - 0.5 * s;
            let sigma = t - m_len - s;
            if s > PIN_TOL && m_len >= -PIN_TOL && sigma >= -PIN_TOL {
                let sigma = sigma.max(0.0);
                let tau2 = (sigma + s).min(t);
                cands.push(PinnedCandidate {
                    arcs: vec![
                        arc(0.0, sigma, ControlLaw::Constant(0.0)),
                        arc(
                            sigma,
                            tau2,
                            ControlLaw::Linear {
                                u0: 0.0,
                                slope: m / s,
                            },
                        ),
                        arc(tau2, t, ControlLaw::Constant(m)),
                    ],
                    cost: 0.5 * m * m * (a_len - s / 6.0),
                    tau2: Some(tau2),
                    subcase: Subcase::MinLast,
                    rank: 3,
                });
            }
        }
    }

    // Pure full braking, exactly consistent boundary data only.
    if (dv - m * t).abs() <= 1e-7 && (dx - 0.5 * m * t * t).abs() <= 1e-6 {
        cands.push(PinnedCandidate {
            arcs: vec![arc(0.0, t, ControlLaw::Constant(m))],
            cost: 0.5 * m * m * t,
            tau2: Some(t),
            subcase: Subcase::MinFirst,
            rank: 4,
        });
    }

    cands.into_iter().min_by(|a, b| {
        if (a.cost - b.cost).abs() <= 1e-9 {
            a.rank.cmp(&b.rank)
        } else {
            a.cost.partial_cmp(&b.cost).expect("finite pinned costs")
        }
    })
}

fn arc(t_start: f64, t_end: f64, law: ControlLaw) -> ControlArc {
    ControlArc {
        t_start,
        t_end,
        law,
    }
}

/// Drops zero-length arcs and re-ties endpoints so the list is strictly
/// increasing and spans exactly `[0, t]`.
fn tidy_arcs(arcs: Vec<ControlArc>, t: f64) -> Vec<ControlArc> {
    let mut out: Vec<ControlArc> = Vec::with_capacity(arcs.len());
    for a in arcs {
        if a.t_end - a.t_start > 1e-12 {
            out.push(a);
        }
    }
    if let Some(first) = out.first_mut() {
        first.t_start = 0.0;
    }
    for i in 1..out.len() {
        out[i].t_start = out[i - 1].t_end;
    }
    if let Some(last) = out.last_mut() {
        last.t_end = t;
    }
    out
}

/// Solves the constrained-arc decomposition: finds the boundary-entry time
/// τ₁ minimizing the summed cost of the pinned transfer onto the safety
/// line and the retard transfer from the line to the target, then
/// assembles the full trajectory.
///
/// For each τ₁ the entry position is forced to `a(τ₁) = x_U(0) + v_U τ₁ −
/// d_C` and the entry speed to `v_U` (entering slower would re-violate the
/// bound immediately; entering faster is impossible while staying below
/// it). The scan uses a uniform grid refined by golden-section search;
/// infeasible entry times cost `+∞`.
pub fn solve_constrained(
    cfg: &ScenarioConfig,
    spec: &TerminalSpec,
) -> Result<ConstrainedArcSolution> {
    let t_f = spec.t_f;
    let d_c = cfg.resolved_d_c_directed(t_f, false);
    let (x_c0, v_c0) = (cfg.state_c.x, cfg.state_c.v);
    let (x_u0, v_u) = (cfg.state_u.x, cfg.state_u.v);
    let a_of = |tau1: f64| x_u0 + v_u * tau1 - d_c;

    let parts_at = |tau1: f64| -> Option<(PinnedCandidate, OcpSolution)> {
        if tau1 <= 0.0 || tau1 >= t_f {
            return None;
        }
        let a = a_of(tau1);
        let pinned = solve_pinned(
            tau1,
            v_u - v_c0,
            a - x_c0 - v_c0 * tau1,
            cfg.limits_c.u_min,
        )?;
        let tail = solve_retard(&OcpProblem {
            state_0: VehicleState::new(a, v_u),
            limits: cfg.limits_c,
            t_f: t_f - tau1,
            x_f: spec.x_cf,
            sign: ControlSign::NonPositive,
        })
        .ok()?;
        Some((pinned, tail))
    };
    let total = |tau1: f64| {
        parts_at(tau1)
            .map(|(p, r)| p.cost + r.cost)
            .unwrap_or(f64::INFINITY)
    };

    let lo = 1e-6 * t_f;
    let hi = (1.0 - 1e-6) * t_f;
    let (tau1, j_star) = grid_then_golden(total, lo, hi, TAU1_GRID, TAU1_TOL);
    if !j_star.is_finite() {
        return Err(Error::ConstrainedInfeasible);
    }
    // Local-minimality post-check (central samples) away from the domain
    // edges; the entry-time limit toward 0 is a legitimate boundary
    // optimum when the start state already sits on the line.
    let h = 1e-3 * t_f;
    if tau1 - h > lo && tau1 + h < hi {
        let (l, r) = (total(tau1 - h), total(tau1 + h));
        debug_assert!(
            j_star <= l.min(r) + 1e-6 * (1.0 + j_star.abs()),
            "entry-time search not locally minimal: J({tau1}) = {j_star}, \
             J(±{h}) = {l}/{r}"
        );
    }

    let (pinned, tail) = parts_at(tau1).ok_or(Error::ConstrainedInfeasible)?;
    let head = Trajectory::new(0.0, cfg.state_c, tidy_arcs(pinned.arcs, tau1))?;
    let end = head.end_state();
    debug_assert!(
        (end.x - a_of(tau1)).abs() <= 1e-6 && (end.v - v_u).abs() <= 1e-6,
        "pinned transfer missed the boundary state: ({}, {}) vs ({}, {v_u})",
        end.x,
        end.v,
        a_of(tau1)
    );
    // The pinned transfer ends on the line at the line's own speed, so any
    // trailing zero-control stretch rides the line exactly: the first
    // boundary contact is the start of that stretch, not the search's
    // decomposition junction (which marks where the retard tail departs).
    let mut entry = tau1;
    for head_arc in head.arcs().iter().rev() {
        let flat = head_arc.law.at(0.0).abs() <= 1e-9
            && head_arc.law.at(head_arc.duration()).abs() <= 1e-9;
        if flat {
            entry = head_arc.t_start;
        } else {
            break;
        }
    }
    let traj = head.concat(&tail.traj.shift_time(tau1))?;
    Ok(ConstrainedArcSolution {
        tau1: entry,
        a: a_of(entry),
        boundary_exit: tau1,
        tau2: pinned.tau2,
        subcase: pinned.subcase,
        j1: pinned.cost,
        j2: tail.cost,
        traj,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::TerminalGapPolicy;
    use crate::terminal::{terminal_positions, TerminalBranch};
    use crate::vehicle::VehicleLimits;
    use approx::assert_relative_eq;

    /// The published benchmark limits for the merging vehicle.
    fn benchmark_cfg(
        s1: VehicleState,
        s2: VehicleState,
        sc: VehicleState,
        su: VehicleState,
    ) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::with_defaults(s1, s2, sc, su);
        cfg.terminal_gaps = TerminalGapPolicy::Fixed {
            gap_c: 50.0,
            gap_2: 30.0,
        };
        cfg.safety.d_c_fixed = Some(30.0);
        cfg
    }

    fn spec_for(cfg: &ScenarioConfig, t_f: f64) -> TerminalSpec {
        terminal_positions(cfg, t_f, TerminalBranch::Accelerate).unwrap()
    }

    #[test]
    fn accelerating_merge_classifies_and_clears_the_bound() {
        // Merge ahead of slower traffic: coast 294.4 < target < bound.
        let cfg = benchmark_cfg(
            VehicleState::new(90.0, 13.0),
            VehicleState::new(50.0, 18.0),
            VehicleState::new(13.0, 10.0),
            VehicleState::new(100.0, 9.0),
        );
        let spec = spec_for(&cfg, 28.14);
        let cls = classify_case(&cfg, &spec);
        assert_eq!(cls.label, CaseLabel::Case1);
        assert_relative_eq!(cls.xbar_cf, 13.0 + 10.0 * 28.14, max_relative = 1e-12);
        assert_relative_eq!(cls.u_bound, 100.0 + 9.0 * 28.14 - 30.0, max_relative = 1e-12);
        assert!(cls.xbar_cf < cls.x_cf && cls.x_cf < cls.u_bound);

        let plan = plan_c(&cfg, &spec).unwrap();
        assert!(!plan.is_constrained());
        // Accelerating plan: control non-negative, speed nondecreasing,
        // and the moving safety bound strictly inactive throughout.
        let (u_lo, _) = plan.trajectory().control_range();
        assert!(u_lo >= -1e-9);
        let (_, gap_min) = plan
            .trajectory()
            .min_gap_below_line(cfg.state_u.x - 30.0, cfg.state_u.v);
        assert!(gap_min > 0.0, "bound grazed: min slack {gap_min}");
    }

    #[test]
    fn decelerating_merge_stays_unconstrained_when_the_bound_is_clear() {
        // Merge behind faster traffic: the retard optimum never nears the
        // bound (its minimum slack is tens of meters).
        let cfg = benchmark_cfg(
            VehicleState::new(90.0, 13.0),
            VehicleState::new(50.0, 18.0),
            VehicleState::new(13.0, 12.0),
            VehicleState::new(80.0, 10.0),
        );
        let spec = spec_for(&cfg, 21.4);
        let cls = classify_case(&cfg, &spec);
        // Under this bound constant the coasting point exceeds the bound,
        // so the trichotomy says the bound may activate…
        assert_eq!(cls.label, CaseLabel::Case3);
        let plan = plan_c(&cfg, &spec).unwrap();
        // …but the retard optimum clears it, so no constrained arc.
        assert!(!plan.is_constrained());
        let (u_lo, u_hi) = plan.trajectory().control_range();
        assert!(u_hi <= 1e-9, "retard plan must not accelerate: {u_hi}");
        assert!(u_lo >= cfg.limits_c.u_min - 1e-9);
        let (_, gap_min) = plan
            .trajectory()
            .min_gap_below_line(cfg.state_u.x - 30.0, cfg.state_u.v);
        assert!(gap_min > 1.0, "expected a clear bound, slack {gap_min}");
    }

    #[test]
    fn genuinely_blocked_merge_takes_the_constrained_path() {
        // Close behind slow traffic: coasting overruns the bound and so
        // does the unconstrained retard optimum. The published case study
        // reports the entry near (τ₁ = 3.2, a = 43); the actual optimum of
        // this objective — confirmed below against the discrete
        // transcription — is a tangential graze slightly later, at the
        // bottom of a valley so flat that the published point costs only
        // 0.65% more (21.56 vs 21.425). The frozen values here are the
        // verified optimum.
        let cfg = adjusted_close_merge();
        let t_f = 14.49;
        let spec = TerminalSpec {
            t_f,
            x_1f: 0.0,
            x_2f: 0.0,
            x_cf: 105.92,
            delta_x_1: 0.0,
            delta_x_2: 0.0,
            delta_x_c: 0.0,
            branch: TerminalBranch::Decelerate,
            bounds: crate::terminal::GapBounds {
                gap_c: 22.6,
                gap_2: 30.0,
            },
        };
        let cls = classify_case(&cfg, &spec);
        assert_eq!(cls.label, CaseLabel::Case3);
        let plan = plan_c(&cfg, &spec).unwrap();
        assert!(plan.is_constrained(), "expected a constrained arc");
        let CPlan::Constrained(sol) = plan else {
            unreachable!()
        };
        // Frozen optimum: a single tangential touch of the line.
        assert!(
            (sol.tau1 - 3.5375).abs() <= 5e-3,
            "entry time {} moved off the verified optimum 3.5375",
            sol.tau1
        );
        assert!(
            (sol.a - 45.70).abs() <= 0.05,
            "entry position {} moved off the verified optimum 45.70",
            sol.a
        );
        assert!(
            (sol.cost() - 21.4247).abs() <= 1e-3,
            "cost {} moved off the verified optimum 21.4247",
            sol.cost()
        );
        assert_eq!(sol.subcase, Subcase::Interior);
        // A touch, not a ride: entry and exit coincide and the control is
        // continuous across the contact (the graze needs no jump).
        assert_eq!(sol.tau1, sol.boundary_exit);
        let before = sol.traj.control_at(sol.boundary_exit - 1e-6).unwrap();
        let after = sol.traj.control_at(sol.boundary_exit + 1e-6).unwrap();
        assert!(
            (before - after).abs() <= 1e-3,
            "tangential contact should be smooth, got {before} vs {after}"
        );
        // Entry state pinned to the line at matched speed.
        let at_entry = sol.traj.evaluate(sol.tau1).unwrap();
        assert_relative_eq!(at_entry.x, sol.a, epsilon = 1e-6);
        assert_relative_eq!(at_entry.v, cfg.state_u.v, epsilon = 1e-6);
        // Terminal position met.
        assert_relative_eq!(sol.traj.end_state().x, 105.92, epsilon = 1e-6);
        // The bound holds across the whole plan.
        let (_, gap_min) = sol
            .traj
            .min_gap_below_line(cfg.state_u.x - 22.6, cfg.state_u.v);
        assert!(gap_min >= -1e-6, "bound violated: {gap_min}");
        // The transcription solves the same problem with the moving bound
        // as explicit per-node constraints and the full control box; its
        // optimum certifies the analytic landing.
        use crate::oracle::{solve_qp, MovingCeiling, TranscribedProblem};
        let oracle = solve_qp(
            &TranscribedProblem::new(cfg.state_c, cfg.limits_c, t_f, 105.92, 800).with_ceiling(
                MovingCeiling {
                    x0: cfg.state_u.x,
                    v: cfg.state_u.v,
                    gap: 22.6,
                },
            ),
        )
        .unwrap();
        let rel = (sol.cost() - oracle.cost).abs() / (1.0 + oracle.cost);
        assert!(
            rel <= 0.01,
            "constrained cost {} vs transcription {}",
            sol.cost(),
            oracle.cost
        );
    }

    /// Close-merge scenario whose constrained solve has a published
    /// landing point: C at (3, 19) behind U at (40, 8), bound 22.6 m.
    fn adjusted_close_merge() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::with_defaults(
            VehicleState::new(200.0, 13.0),
            VehicleState::new(-60.0, 18.0),
            VehicleState::new(3.0, 19.0),
            VehicleState::new(40.0, 8.0),
        );
        cfg.terminal_gaps = TerminalGapPolicy::Fixed {
            gap_c: 22.6,
            gap_2: 30.0,
        };
        cfg.safety.d_c_fixed = Some(22.6);
        cfg
    }

    #[test]
    fn already_on_the_line_enters_immediately() {
        // Start exactly on the bound at matched speed; the target sits
        // just below the coast-along-the-line point, so the optimal entry
        // is the left edge of the search window and the pinned transfer
        // costs nothing.
        let mut cfg = ScenarioConfig::with_defaults(
            VehicleState::new(300.0, 13.0),
            VehicleState::new(-300.0, 18.0),
            VehicleState::new(20.0, 9.0),
            VehicleState::new(50.0, 9.0),
        );
        cfg.safety.d_c_fixed = Some(30.0);
        let t_f = 10.0;
        let u_bound = cfg.x_u_at(t_f) - 30.0;
        let spec = TerminalSpec {
            t_f,
            x_1f: 0.0,
            x_2f: 0.0,
            x_cf: u_bound - 3.0,
            delta_x_1: 0.0,
            delta_x_2: 0.0,
            delta_x_c: 0.0,
            branch: TerminalBranch::Decelerate,
            bounds: crate::terminal::GapBounds {
                gap_c: 30.0,
                gap_2: 30.0,
            },
        };
        let sol = solve_constrained(&cfg, &spec).unwrap();
        assert!(
            sol.tau1 <= 0.2,
            "expected an immediate entry, got τ₁ = {}",
            sol.tau1
        );
        assert!(sol.j1 <= 1e-9, "pinned cost should vanish, got {}", sol.j1);
        assert_relative_eq!(sol.traj.end_state().x, u_bound - 3.0, epsilon = 1e-6);
    }

    #[test]
    fn target_beyond_the_bound_is_rejected() {
        let cfg = benchmark_cfg(
            VehicleState::new(90.0, 13.0),
            VehicleState::new(50.0, 18.0),
            VehicleState::new(13.0, 10.0),
            VehicleState::new(100.0, 9.0),
        );
        let mut spec = spec_for(&cfg, 28.14);
        spec.x_cf = cfg.x_u_at(spec.t_f) - 30.0 + 0.5;
        let cls = classify_case(&cfg, &spec);
        assert_eq!(cls.label, CaseLabel::Infeasible);
        assert!(matches!(
            plan_c(&cfg, &spec),
            Err(Error::TerminalInfeasible { .. })
        ));
    }

    #[test]
    fn pinned_transfer_meets_its_boundary_conditions() {
        // Random pinned problems across the reachable (dv, dx) window:
        // every solution must hit both terminal conditions exactly, keep
        // the control in [u_min, 0], and report a cost consistent with
        // the integrated trajectory.
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let m = -7.0_f64;
        let mut solved = 0;
        for _ in 0..300 {
            let v0 = rng.gen_range(5.0..25.0);
            let t = rng.gen_range(1.0..8.0);
            let max_drop = (m.abs() * t).min(v0 - 1.0).max(0.01);
            let dv = -rng.gen_range(0.0..max_drop);
            // Sample between the extreme displacement profiles for this
            // speed drop: braking immediately (least distance) vs braking
            // as late as possible (most distance).
            let t_b = dv / m; // time spent at full brake
            let brake_first = 0.5 * m * t_b * t_b + dv * (t - t_b);
            let brake_last = 0.5 * m * t_b * t_b;
            let lo = brake_first.min(brake_last);
            let hi = brake_first.max(brake_last);
            let dx = rng.gen_range(lo..=hi);
            let Some(sol) = solve_pinned(t, dv, dx, m) else {
                continue;
            };
            solved += 1;
            let traj = Trajectory::new(
                0.0,
                VehicleState::new(0.0, v0),
                tidy_arcs(sol.arcs, t),
            )
            .unwrap();
            let end = traj.end_state();
            assert!(
                (end.v - (v0 + dv)).abs() <= 1e-6,
                "terminal speed {} vs {}",
                end.v,
                v0 + dv
            );
            assert!(
                (end.x - (v0 * t + dx)).abs() <= 1e-5,
                "terminal position {} vs {}",
                end.x,
                v0 * t + dx
            );
            let (u_lo, u_hi) = traj.control_range();
            assert!(u_lo >= m - 1e-7 && u_hi <= 1e-7);
            assert_relative_eq!(sol.cost, traj.cost(), max_relative = 1e-7, epsilon = 1e-10);
        }
        assert!(solved > 150, "only {solved} random pinned problems solved");
    }

    #[test]
    fn pinned_transfer_agrees_with_the_transcription_oracle() {
        // The oracle solves the same pinned problem (terminal position and
        // speed equalities, box [u_min, 0]) by quadratic programming.
        use crate::oracle::{solve_qp, TranscribedProblem};
        let cases = [
            // (v0, T, dv, dx): interior, min-first, min-last flavors.
            (15.0, 4.0, -3.0, -7.0),
            (19.0, 3.2, -11.0, -24.0),
            (20.0, 5.0, -10.0, -30.0),
            (12.0, 6.0, -2.0, -3.0),
            (22.0, 3.0, -15.0, -28.0),
        ];
        for &(v0, t, dv, dx) in &cases {
            let Some(sol) = solve_pinned(t, dv, dx, -7.0) else {
                continue;
            };
            // An upper control bound of essentially zero reproduces the
            // sign constraint inside the oracle's box formulation.
            let limits = VehicleLimits {
                u_min: -7.0,
                u_max: 1e-6,
                v_min: 0.5,
                v_max: 40.0,
            };
            let p = TranscribedProblem::new(VehicleState::new(0.0, v0), limits, t, v0 * t + dx, 600)
                .with_terminal_speed(v0 + dv);
            let oracle = solve_qp(&p).unwrap();
            let rel = (sol.cost - oracle.cost).abs() / (1.0 + oracle.cost);
            assert!(
                rel <= 0.01,
                "pinned cost {} vs oracle {} at (v0={v0}, T={t}, dv={dv}, dx={dx})",
                sol.cost,
                oracle.cost
            );
        }
    }
}
