//! Terminal configuration: the minimal maneuver horizon and the
//! least-deviation terminal positions.
//!
//! The horizon search imagines each controlled vehicle driving at a fixed
//! fraction (its aggressiveness) of full actuation — vehicle 1 advancing,
//! vehicle 2 yielding, vehicle C advancing or yielding depending on the
//! branch — and asks for the earliest time at which all three terminal
//! spacing requirements hold simultaneously. Each requirement is a
//! piecewise-quadratic inequality in time (quadratic while the assumed
//! ramp accelerates, affine once its speed saturates), so the set of
//! admissible horizons is computed exactly by root isolation and interval
//! intersection, never by simulation.
//!
//! Given the horizon, terminal positions minimize the summed squared
//! deviation from the zero-effort coast points subject to three linear
//! spacing constraints — a 3-variable convex QP solved exactly by
//! enumerating the eight candidate active sets.

use crate::error::Error;
use crate::scenario::{Aggressiveness, ScenarioConfig, TerminalGapPolicy};
use crate::search::{intersect_intervals, nonneg_intervals_quadratic};
use crate::vehicle::VehicleLimits;
use crate::Result;

/// Smallest horizon the search will return (s).
const T_FLOOR: f64 = 1e-3;
/// Aggressiveness escalation step and cap for the retry loop.
const ALPHA_STEP: f64 = 0.1;
const ALPHA_CAP: f64 = 0.9;
const ALPHA_ROUNDS: u32 = 5;

/// Which way vehicle C moves relative to its coast point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalBranch {
    /// C advances toward the gap (assumed throttle ramp).
    Accelerate,
    /// C yields into the gap (assumed braking ramp).
    Decelerate,
}

/// Resolved gap bounds used by the terminal-position constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapBounds {
    /// Bound on both `x_1f − x_Cf` and `x_U(t_f) − x_Cf` (m).
    pub gap_c: f64,
    /// Bound on `x_Cf − x_2f` (m).
    pub gap_2: f64,
}

/// Terminal configuration of the maneuver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalSpec {
    /// Maneuver horizon (s).
    pub t_f: f64,
    /// Terminal position of vehicle 1 (m).
    pub x_1f: f64,
    /// Terminal position of vehicle 2 (m).
    pub x_2f: f64,
    /// Terminal position of vehicle C (m).
    pub x_cf: f64,
    /// Deviation of vehicle 1 from its coast point (m), ≥ 0.
    pub delta_x_1: f64,
    /// Deviation of vehicle 2 from its coast point (m), ≤ 0.
    pub delta_x_2: f64,
    /// Deviation of vehicle C from its coast point (m).
    pub delta_x_c: f64,
    /// Branch the horizon was sized under.
    pub branch: TerminalBranch,
    /// Gap bounds the positions were solved against.
    pub bounds: GapBounds,
}

/// Outcome of the minimal-horizon search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinTimeOutcome {
    /// Smallest admissible horizon (s).
    pub t_f: f64,
    /// Branch that produced it.
    pub branch: TerminalBranch,
    /// Aggressiveness actually used (after any escalation rounds).
    pub alpha: Aggressiveness,
    /// Escalation rounds consumed (0 when the input levels sufficed).
    pub alpha_rounds: u32,
}

/// Constant-command speed ramp with clamping: `v(t) = clamp(v0 + a t)`,
/// position integrated exactly across the clamp point.
#[derive(Debug, Clone, Copy)]
struct ClampedRamp {
    x0: f64,
    v0: f64,
    a: f64,
    /// Time at which the speed clamps, `+∞` when it never does.
    t_clamp: f64,
    /// Speed after clamping.
    v_sat: f64,
}

impl ClampedRamp {
    fn new(x0: f64, v0: f64, a: f64, v_min: f64, v_max: f64) -> Self {
        let (t_clamp, v_sat) = if a > 0.0 {
            (((v_max - v0) / a).max(0.0), v_max)
        } else if a < 0.0 {
            (((v_min - v0) / a).max(0.0), v_min)
        } else {
            (f64::INFINITY, v0)
        };
        Self {
            x0,
            v0,
            a,
            t_clamp,
            v_sat,
        }
    }

    fn uniform(x0: f64, v0: f64) -> Self {
        Self::new(x0, v0, 0.0, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Position/speed polynomial pieces as `(t_lo, t_hi, [x0, x1, x2], [v0, v1])`
    /// in absolute time, covering `[0, t_hi]`.
    #[allow(clippy::type_complexity)]
    fn pieces(&self, t_hi: f64) -> Vec<(f64, f64, [f64; 3], [f64; 2])> {
        let mut out = Vec::with_capacity(2);
        if self.t_clamp >= t_hi {
            out.push((
                0.0,
                t_hi,
                [self.x0, self.v0, 0.5 * self.a],
                [self.v0, self.a],
            ));
        } else {
            let tc = self.t_clamp;
            if tc > 0.0 {
                out.push((
                    0.0,
                    tc,
                    [self.x0, self.v0, 0.5 * self.a],
                    [self.v0, self.a],
                ));
            }
            // After the clamp: x(t) = x(tc) + v_sat (t − tc).
            let x_c = self.x0 + self.v0 * tc + 0.5 * self.a * tc * tc;
            out.push((
                tc,
                t_hi,
                [x_c - self.v_sat * tc, self.v_sat, 0.0],
                [self.v_sat, 0.0],
            ));
        }
        out
    }

    fn position(&self, t: f64) -> f64 {
        if t <= self.t_clamp {
            self.x0 + self.v0 * t + 0.5 * self.a * t * t
        } else {
            let tc = self.t_clamp;
            self.x0 + self.v0 * tc + 0.5 * self.a * tc * tc + self.v_sat * (t - tc)
        }
    }

    fn speed(&self, t: f64) -> f64 {
        if t <= self.t_clamp {
            self.v0 + self.a * t
        } else {
            self.v_sat
        }
    }
}

/// Gap requirement toward the vehicle ahead.
#[derive(Debug, Clone, Copy)]
enum GapRule {
    /// `d = phi · v_follower + delta`.
    Affine { phi: f64, delta: f64 },
    /// Constant bound.
    Fixed(f64),
}

impl GapRule {
    fn at(&self, v_follower: f64) -> f64 {
        match *self {
            GapRule::Affine { phi, delta } => phi * v_follower + delta,
            GapRule::Fixed(d) => d,
        }
    }
}

/// Times in `[0, t_hi]` at which `x_lead(t) − x_follow(t) ≥ d(v_follow(t))`,
/// as a sorted union of closed intervals.
fn gap_hold_intervals(
    lead: &ClampedRamp,
    follow: &ClampedRamp,
    rule: GapRule,
    t_hi: f64,
) -> Vec<(f64, f64)> {
    // Split at both ramps' clamp times so every piece is jointly polynomial.
    let mut cuts = vec![0.0, t_hi];
    for tc in [lead.t_clamp, follow.t_clamp] {
        if tc > 0.0 && tc < t_hi {
            cuts.push(tc);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let lead_pieces = lead.pieces(t_hi);
    let follow_pieces = follow.pieces(t_hi);
    let piece_at = |pieces: &[(f64, f64, [f64; 3], [f64; 2])], t: f64| {
        pieces
            .iter()
            .find(|(lo, hi, _, _)| t >= *lo - 1e-12 && t <= *hi + 1e-12)
            .copied()
            .unwrap_or_else(|| *pieces.last().expect("ramp has pieces"))
    };

    let mut hold: Vec<(f64, f64)> = Vec::new();
    for win in cuts.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let (_, _, lx, _) = piece_at(&lead_pieces, mid);
        let (_, _, fx, fv) = piece_at(&follow_pieces, mid);
        // g(t) = x_lead − x_follow − d(v_follow): quadratic on this window.
        let (d0, d1) = match rule {
            GapRule::Affine { phi, delta } => (phi * fv[0] + delta, phi * fv[1]),
            GapRule::Fixed(d) => (d, 0.0),
        };
        let c0 = lx[0] - fx[0] - d0;
        let c1 = lx[1] - fx[1] - d1;
        let c2 = lx[2] - fx[2];
        for (s, e) in nonneg_intervals_quadratic(c2, c1, c0, lo, hi) {
            match hold.last_mut() {
                Some(last) if s <= last.1 + 1e-9 => last.1 = last.1.max(e),
                _ => hold.push((s, e)),
            }
        }
    }
    hold
}

/// Assumed constant commands for one branch of the horizon search.
fn branch_ramps(
    cfg: &ScenarioConfig,
    alpha: &Aggressiveness,
    branch: TerminalBranch,
) -> (ClampedRamp, ClampedRamp, ClampedRamp, ClampedRamp) {
    let ramp = |x0: f64, v0: f64, u: f64, lim: &VehicleLimits| {
        ClampedRamp::new(x0, v0, u, lim.v_min, lim.v_max)
    };
    let r1 = ramp(
        cfg.state_1.x,
        cfg.state_1.v,
        alpha.v1 * cfg.limits_1.u_max,
        &cfg.limits_1,
    );
    let r2 = ramp(
        cfg.state_2.x,
        cfg.state_2.v,
        alpha.v2 * cfg.limits_2.u_min,
        &cfg.limits_2,
    );
    let uc = match branch {
        TerminalBranch::Accelerate => alpha.c * cfg.limits_c.u_max,
        TerminalBranch::Decelerate => alpha.c * cfg.limits_c.u_min,
    };
    let rc = ramp(cfg.state_c.x, cfg.state_c.v, uc, &cfg.limits_c);
    let ru = ClampedRamp::uniform(cfg.state_u.x, cfg.state_u.v);
    (r1, r2, rc, ru)
}

/// Horizons in `[T_FLOOR, t_max]` at which all three spacing requirements
/// hold under one branch's assumed ramps.
fn branch_hold_set(
    cfg: &ScenarioConfig,
    alpha: &Aggressiveness,
    branch: TerminalBranch,
) -> Vec<(f64, f64)> {
    let (r1, r2, rc, ru) = branch_ramps(cfg, alpha, branch);
    let d_c_rule = match cfg.safety.d_c_fixed {
        Some(d) => GapRule::Fixed(d),
        None => GapRule::Affine {
            phi: cfg.safety.phi,
            delta: cfg.safety.delta,
        },
    };
    let d_2_rule = GapRule::Affine {
        phi: cfg.safety.phi,
        delta: cfg.safety.delta,
    };
    let t_hi = cfg.t_max;
    let lead_1 = gap_hold_intervals(&r1, &rc, d_c_rule, t_hi);
    let lead_u = gap_hold_intervals(&ru, &rc, d_c_rule, t_hi);
    let rear_2 = gap_hold_intervals(&rc, &r2, d_2_rule, t_hi);
    let both = intersect_intervals(&lead_1, &lead_u);
    let all = intersect_intervals(&both, &rear_2);
    intersect_intervals(&all, &[(T_FLOOR, t_hi)])
}

/// Direct evaluation of the three spacing requirements at one horizon; used
/// to confirm the interval arithmetic by substitution.
fn branch_holds_at(
    cfg: &ScenarioConfig,
    alpha: &Aggressiveness,
    branch: TerminalBranch,
    t: f64,
) -> bool {
    let (r1, r2, rc, ru) = branch_ramps(cfg, alpha, branch);
    let d_c = match cfg.safety.d_c_fixed {
        Some(d) => GapRule::Fixed(d),
        None => GapRule::Affine {
            phi: cfg.safety.phi,
            delta: cfg.safety.delta,
        },
    };
    let d_2 = GapRule::Affine {
        phi: cfg.safety.phi,
        delta: cfg.safety.delta,
    };
    let tol = 1e-7;
    r1.position(t) - rc.position(t) + tol >= d_c.at(rc.speed(t))
        && ru.position(t) - rc.position(t) + tol >= d_c.at(rc.speed(t))
        && rc.position(t) - r2.position(t) + tol >= d_2.at(r2.speed(t))
}

/// Smallest horizon at which the maneuver's terminal spacing requirements
/// can hold, assuming each vehicle drives at its aggressiveness-scaled
/// command. Tries the advancing branch for vehicle C first, then the
/// yielding branch; when neither admits any horizon up to `t_max`, all
/// aggressiveness levels escalate and the search retries, aborting after
/// the escalation rounds are exhausted.
pub fn min_terminal_time(cfg: &ScenarioConfig) -> Result<MinTimeOutcome> {
    let mut alpha = cfg.alpha;
    for round in 0..=ALPHA_ROUNDS {
        for branch in [TerminalBranch::Accelerate, TerminalBranch::Decelerate] {
            let hold = branch_hold_set(cfg, &alpha, branch);
            if let Some(&(s, _)) = hold.first() {
                let t_f = s.max(T_FLOOR);
                debug_assert!(branch_holds_at(cfg, &alpha, branch, t_f));
                return Ok(MinTimeOutcome {
                    t_f,
                    branch,
                    alpha,
                    alpha_rounds: round,
                });
            }
        }
        alpha = alpha.escalate(ALPHA_STEP, ALPHA_CAP);
    }
    Err(Error::ManeuverAborted {
        t_max: cfg.t_max,
        alpha_rounds: ALPHA_ROUNDS,
    })
}

/// Resolves the gap bounds the terminal positions must respect.
///
/// Under the safety-model policy the rear bound is the headway rule at
/// vehicle 2's initial speed, and the merging-vehicle bound is the rule at
/// C's most conservative speed for the branch — the full-throttle terminal
/// speed (clamped) when advancing, the initial speed when yielding — unless
/// the scenario pins a fixed constant.
pub fn resolve_terminal_gaps(cfg: &ScenarioConfig, t_f: f64, branch: TerminalBranch) -> GapBounds {
    match cfg.terminal_gaps {
        TerminalGapPolicy::Fixed { gap_c, gap_2 } => GapBounds { gap_c, gap_2 },
        TerminalGapPolicy::FromSafetyModel => {
            let gap_2 = cfg.safety.phi * cfg.state_2.v + cfg.safety.delta;
            let gap_c =
                cfg.resolved_d_c_directed(t_f, branch == TerminalBranch::Accelerate);
            GapBounds { gap_c, gap_2 }
        }
    }
}

/// Dense Gaussian elimination with partial pivoting for the tiny KKT
/// systems of the terminal QP. `None` when singular.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in row + 1..n {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

/// Energy-optimal terminal positions at a given horizon: minimizes
/// `Σ (x_if − x̄_if)²` over the three terminal positions, where `x̄_if` are
/// the zero-effort coast points, subject to
///
/// * `x_1f − x_Cf ≥ gap_c` (C merges behind 1),
/// * `x_Cf − x_2f ≥ gap_2` (2 stays behind C),
/// * `x_Cf ≤ x_U(t_f) − gap_c` (C stays behind U).
///
/// Solved exactly by enumerating the eight candidate active sets; the
/// unique optimum is the candidate whose KKT multipliers are nonnegative
/// and whose inactive constraints hold. Errors when any optimal terminal
/// position fails to lie ahead of the vehicle's initial position.
pub fn terminal_positions(
    cfg: &ScenarioConfig,
    t_f: f64,
    branch: TerminalBranch,
) -> Result<TerminalSpec> {
    terminal_positions_pinned(cfg, t_f, branch, [None; 3])
}

/// [`terminal_positions`] with individual positions pinned to literal
/// values, in the order `(x_1f, x_2f, x_Cf)`.
///
/// Pinned coordinates leave the objective and enter the constraint rows as
/// constants, so the free positions re-optimize *around* the pins. A
/// spacing row between two pinned positions cannot be honored by the
/// optimizer and is deliberately left to the post-hoc safety audit — pins
/// exist to reproduce externally specified maneuvers literally, and the
/// audit is the arbiter of whether the result is safe.
pub fn terminal_positions_pinned(
    cfg: &ScenarioConfig,
    t_f: f64,
    branch: TerminalBranch,
    pins: [Option<f64>; 3],
) -> Result<TerminalSpec> {
    if !(t_f > 0.0 && t_f.is_finite()) {
        return Err(Error::Domain(format!(
            "terminal positions need a positive horizon, got {t_f}"
        )));
    }
    let bounds = resolve_terminal_gaps(cfg, t_f, branch);
    let ideal = [
        cfg.state_1.coast_position(t_f),
        cfg.state_2.coast_position(t_f),
        cfg.state_c.coast_position(t_f),
    ];
    // The bound below the uncontrolled vehicle realizes a strict
    // inequality, so the feasible set retreats from it by the configured
    // margin; the optimum may then sit exactly on the margined cap.
    let cap = cfg.x_u_at(t_f) - bounds.gap_c - cfg.eps_margin;
    // Constraint rows n·y ≥ b over y = (x_1f, x_2f, x_Cf).
    let rows: [([f64; 3], f64); 3] = [
        ([1.0, 0.0, -1.0], bounds.gap_c),
        ([0.0, -1.0, 1.0], bounds.gap_2),
        ([0.0, 0.0, -1.0], -cap),
    ];
    let free: Vec<usize> = (0..3).filter(|&i| pins[i].is_none()).collect();
    // A row is solvable when it touches at least one free variable; rows
    // between pinned positions are audited, not optimized.
    let solvable: Vec<usize> = (0..3)
        .filter(|&r| free.iter().any(|&i| rows[r].0[i] != 0.0))
        .collect();
    // Substituted right-hand side: move pinned terms across.
    let rhs_of = |r: usize| {
        let (n, b) = rows[r];
        let mut b = b;
        for i in 0..3 {
            if let Some(p) = pins[i] {
                b -= n[i] * p;
            }
        }
        b
    };

    let mut best: Option<([f64; 3], f64)> = None;
    'subsets: for mask in 0usize..(1usize << solvable.len()) {
        let active: Vec<usize> = solvable
            .iter()
            .enumerate()
            .filter(|&(j, _)| mask & (1 << j) != 0)
            .map(|(_, &r)| r)
            .collect();
        let k = active.len();
        let nf = free.len();
        if k > nf {
            continue;
        }
        // KKT system over the free coordinates:
        // 2(y_i − ideal_i) = Σ λ_j n_j[i], active rows as equalities.
        let dim = nf + k;
        let mut m = vec![vec![0.0; dim]; dim];
        let mut rhs = vec![0.0; dim];
        for (fi, &i) in free.iter().enumerate() {
            m[fi][fi] = 2.0;
            rhs[fi] = 2.0 * ideal[i];
        }
        for (j, &row) in active.iter().enumerate() {
            let (n, _) = rows[row];
            for (fi, &i) in free.iter().enumerate() {
                m[fi][nf + j] = -n[i];
                m[nf + j][fi] = n[i];
            }
            rhs[nf + j] = rhs_of(row);
        }
        let sol = if dim == 0 {
            Vec::new()
        } else {
            match solve_dense(m, rhs) {
                Some(s) => s,
                None => continue,
            }
        };
        let mut y = [0.0; 3];
        for i in 0..3 {
            y[i] = pins[i].unwrap_or(0.0);
        }
        for (fi, &i) in free.iter().enumerate() {
            y[i] = sol[fi];
        }
        for (j, _) in active.iter().enumerate() {
            if sol[nf + j] < -1e-9 {
                continue 'subsets;
            }
        }
        for &r in &solvable {
            if active.contains(&r) {
                continue;
            }
            let (n, b) = rows[r];
            let g = n[0] * y[0] + n[1] * y[1] + n[2] * y[2] - b;
            if g < -1e-9 {
                continue 'subsets;
            }
        }
        let cost: f64 = free.iter().map(|&i| (y[i] - ideal[i]).powi(2)).sum();
        if best.map(|(_, c)| cost < c - 1e-12).unwrap_or(true) {
            best = Some((y, cost));
        }
    }

    let Some((y, _)) = best else {
        return Err(Error::TerminalInfeasible {
            t_f,
            reason: "no spacing-consistent terminal positions".into(),
        });
    };
    // Every optimized position must end ahead of where the vehicle
    // started; a cap below the merging vehicle's initial position (U too
    // close and too slow) shows up here. Pinned positions skip the check —
    // reachability classification judges them instead.
    let initials = [cfg.state_1.x, cfg.state_2.x, cfg.state_c.x];
    let names = ["vehicle 1", "vehicle 2", "vehicle C"];
    for &i in &free {
        if y[i] <= initials[i] + cfg.eps_margin {
            return Err(Error::TerminalInfeasible {
                t_f,
                reason: format!(
                    "{} would have to end at {:.3} m, behind its start {:.3} m",
                    names[i], y[i], initials[i]
                ),
            });
        }
    }
    Ok(TerminalSpec {
        t_f,
        x_1f: y[0],
        x_2f: y[1],
        x_cf: y[2],
        delta_x_1: y[0] - ideal[0],
        delta_x_2: y[1] - ideal[1],
        delta_x_c: y[2] - ideal[2],
        branch,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::TerminalGapPolicy;
    use crate::vehicle::VehicleState;
    use approx::assert_relative_eq;

    fn case_1() -> ScenarioConfig {
        ScenarioConfig::with_defaults(
            VehicleState::new(90.0, 13.0),
            VehicleState::new(50.0, 18.0),
            VehicleState::new(13.0, 10.0),
            VehicleState::new(100.0, 9.0),
        )
    }

    fn case_2() -> ScenarioConfig {
        ScenarioConfig::with_defaults(
            VehicleState::new(70.0, 13.0),
            VehicleState::new(30.0, 18.0),
            VehicleState::new(13.0, 12.0),
            VehicleState::new(80.0, 10.0),
        )
    }

    #[test]
    fn ideal_positions_kept_when_already_spaced() {
        // Huge initial gaps, generous horizon: coast points already satisfy
        // everything, so the QP returns them unchanged.
        let mut cfg = ScenarioConfig::with_defaults(
            VehicleState::new(500.0, 13.0),
            VehicleState::new(0.0, 13.0),
            VehicleState::new(250.0, 13.0),
            VehicleState::new(900.0, 13.0),
        );
        cfg.terminal_gaps = TerminalGapPolicy::Fixed {
            gap_c: 50.0,
            gap_2: 30.0,
        };
        let spec = terminal_positions(&cfg, 10.0, TerminalBranch::Accelerate).unwrap();
        assert_relative_eq!(spec.delta_x_1, 0.0, epsilon = 1e-9);
        assert_relative_eq!(spec.delta_x_2, 0.0, epsilon = 1e-9);
        assert_relative_eq!(spec.delta_x_c, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn benchmark_terminal_positions_match_published_values() {
        // With the published horizon and the 50 m / 30 m gap bounds the
        // published terminal positions are reproduced to a few centimeters
        // (their residual comes from the horizon being printed rounded).
        let mut cfg = case_1();
        cfg.terminal_gaps = TerminalGapPolicy::Fixed {
            gap_c: 50.0,
            gap_2: 30.0,
        };
        let spec = terminal_positions(&cfg, 28.14, TerminalBranch::Accelerate).unwrap();
        assert!((spec.x_1f - 455.8).abs() < 0.5, "x_1f = {}", spec.x_1f);
        assert!((spec.x_cf - 303.24).abs() < 0.5, "x_cf = {}", spec.x_cf);
        assert!((spec.x_2f - 273.24).abs() < 0.5, "x_2f = {}", spec.x_2f);
        assert!(spec.delta_x_1 >= 0.0);
        assert!(spec.delta_x_2 <= 0.0);

        let mut cfg = case_2();
        cfg.terminal_gaps = TerminalGapPolicy::Fixed {
            gap_c: 50.0,
            gap_2: 30.0,
        };
        let spec = terminal_positions(&cfg, 21.4, TerminalBranch::Accelerate).unwrap();
        assert!((spec.x_1f - 348.37).abs() < 0.5, "x_1f = {}", spec.x_1f);
        assert!((spec.x_cf - 244.13).abs() < 0.5, "x_cf = {}", spec.x_cf);
        assert!((spec.x_2f - 214.13).abs() < 0.5, "x_2f = {}", spec.x_2f);
    }

    #[test]
    fn qp_beats_a_dense_grid_around_the_optimum() {
        // Exhaustive 0.1 m grid over ±3 m boxes centered on the returned
        // optimum: no grid point satisfying the constraints may do better
        // (beyond the grid's own resolution).
        let mut cfg = case_1();
        cfg.terminal_gaps = TerminalGapPolicy::Fixed {
            gap_c: 50.0,
            gap_2: 30.0,
        };
        let t_f = 28.14;
        let spec = terminal_positions(&cfg, t_f, TerminalBranch::Accelerate).unwrap();
        let ideal = [
            cfg.state_1.coast_position(t_f),
            cfg.state_2.coast_position(t_f),
            cfg.state_c.coast_position(t_f),
        ];
        let cap = cfg.x_u_at(t_f) - 50.0 - cfg.eps_margin;
        let best = [spec.x_1f, spec.x_2f, spec.x_cf];
        let cost =
            |y: [f64; 3]| -> f64 { (0..3).map(|i| (y[i] - ideal[i]).powi(2)).sum() };
        let opt_cost = cost(best);
        let step = 0.1;
        let mut grid_best = f64::INFINITY;
        for i in -30..=30 {
            for j in -30..=30 {
                for k in -30..=30 {
                    let y = [
                        best[0] + step * i as f64,
                        best[1] + step * j as f64,
                        best[2] + step * k as f64,
                    ];
                    let ok = y[0] - y[2] >= 50.0 && y[2] - y[1] >= 30.0 && y[2] <= cap;
                    if ok {
                        grid_best = grid_best.min(cost(y));
                    }
                }
            }
        }
        assert!(
            opt_cost <= grid_best + 1e-9,
            "grid found {grid_best}, solver {opt_cost}"
        );
    }

    #[test]
    fn infeasible_cap_reports_terminal_infeasibility() {
        // U slower than C's minimum speed and barely ahead: the cap forces
        // C behind its own start at any reasonable horizon.
        let mut cfg = case_1();
        cfg.state_u = VehicleState::new(20.0, 0.5);
        cfg.safety.d_c_fixed = Some(30.0);
        // gap to U is 7 m < 30 m: already rejected as an invalid scenario;
        // relax the check by moving U ahead but keeping it slow.
        cfg.state_u.x = 50.0;
        let err = terminal_positions(&cfg, 20.0, TerminalBranch::Accelerate).unwrap_err();
        assert!(
            matches!(err, Error::TerminalInfeasible { .. }),
            "got {err:?}"
        );
    }

    #[test]
    fn minimal_time_agrees_with_dense_scanning() {
        // Independent check: scan the admissibility predicate on a fine
        // uniform grid and compare the earliest admissible horizon.
        for cfg in [case_1(), case_2()] {
            let out = min_terminal_time(&cfg).unwrap();
            let grid_first = (1..=2_000_000)
                .map(|k| k as f64 * 1e-4)
                .find(|&t| branch_holds_at(&cfg, &out.alpha, out.branch, t));
            let g = grid_first.expect("grid scan found an admissible horizon");
            assert!(
                (out.t_f - g).abs() <= 2e-4,
                "solver {} vs grid {}",
                out.t_f,
                g
            );
            assert_eq!(out.alpha_rounds, 0);
        }
    }

    #[test]
    fn minimal_time_is_minimal() {
        for cfg in [case_1(), case_2()] {
            let out = min_terminal_time(&cfg).unwrap();
            if out.t_f > T_FLOOR + 0.01 {
                assert!(
                    !branch_holds_at(&cfg, &out.alpha, out.branch, out.t_f - 0.01),
                    "t_f − 0.01 still admissible for t_f = {}",
                    out.t_f
                );
            }
        }
    }

    #[test]
    fn raising_aggressiveness_never_slows_the_maneuver() {
        let cfg = case_1();
        let base = min_terminal_time(&cfg).unwrap().t_f;
        for bump in [0.1, 0.2, 0.3, 0.4] {
            let mut hot = cfg.clone();
            hot.alpha = Aggressiveness::uniform(0.5 + bump);
            let t = min_terminal_time(&hot).unwrap().t_f;
            assert!(
                t <= base + 1e-9,
                "alpha bump {bump} raised t_f from {base} to {t}"
            );
        }
    }

    #[test]
    fn blocked_scenario_aborts_after_escalation() {
        // U crawls just ahead of C with a large fixed bound: the U-gap
        // condition can never hold, whatever the aggressiveness.
        let mut cfg = case_1();
        cfg.state_u = VehicleState::new(60.0, 1.0);
        cfg.safety.d_c_fixed = Some(40.0);
        cfg.t_max = 30.0;
        let err = min_terminal_time(&cfg).unwrap_err();
        assert!(
            matches!(
                err,
                Error::ManeuverAborted {
                    alpha_rounds: ALPHA_ROUNDS,
                    ..
                }
            ),
            "got {err:?}"
        );
    }

    #[test]
    fn gap_policy_resolution_follows_the_branch() {
        let mut cfg = case_1();
        // Safety-model policy, no fixed override.
        let acc = resolve_terminal_gaps(&cfg, 10.0, TerminalBranch::Accelerate);
        // Full throttle for 10 s from 10 m/s clamps at v_max = 33.
        assert_relative_eq!(acc.gap_c, 1.8 * 33.0 + 5.0);
        assert_relative_eq!(acc.gap_2, 1.8 * 18.0 + 5.0);
        let dec = resolve_terminal_gaps(&cfg, 10.0, TerminalBranch::Decelerate);
        assert_relative_eq!(dec.gap_c, 1.8 * 10.0 + 5.0);
        // Fixed override wins.
        cfg.safety.d_c_fixed = Some(30.0);
        let pinned = resolve_terminal_gaps(&cfg, 10.0, TerminalBranch::Accelerate);
        assert_relative_eq!(pinned.gap_c, 30.0);
        cfg.terminal_gaps = TerminalGapPolicy::Fixed {
            gap_c: 50.0,
            gap_2: 30.0,
        };
        let fixed = resolve_terminal_gaps(&cfg, 10.0, TerminalBranch::Accelerate);
        assert_relative_eq!(fixed.gap_c, 50.0);
        assert_relative_eq!(fixed.gap_2, 30.0);
    }
}
