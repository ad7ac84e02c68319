//! Piecewise-polynomial trajectories under piecewise-affine acceleration.
//!
//! Every planner output is a sequence of arcs on each of which the
//! acceleration is either constant or affine in time. Under the double
//! integrator this makes speed piecewise-quadratic and position
//! piecewise-cubic, so evaluation, energy, and extrema all have closed
//! forms — no numeric integration is involved anywhere in the planner.

use crate::error::Error;
use crate::vehicle::VehicleState;
use crate::Result;

/// Acceleration law on one arc, parameterized by the offset `s = t - t_start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlLaw {
    /// `u(s) = u0`.
    Constant(f64),
    /// `u(s) = u0 + slope * s`.
    Linear { u0: f64, slope: f64 },
}

impl ControlLaw {
    /// Acceleration at offset `s` from the arc start.
    #[inline]
    pub fn at(&self, s: f64) -> f64 {
        match *self {
            ControlLaw::Constant(u0) => u0,
            ControlLaw::Linear { u0, slope } => u0 + slope * s,
        }
    }

    #[inline]
    fn u0(&self) -> f64 {
        match *self {
            ControlLaw::Constant(u0) => u0,
            ControlLaw::Linear { u0, .. } => u0,
        }
    }

    #[inline]
    fn slope(&self) -> f64 {
        match *self {
            ControlLaw::Constant(_) => 0.0,
            ControlLaw::Linear { slope, .. } => slope,
        }
    }
}

/// One trajectory segment: a time interval and the acceleration law on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlArc {
    /// Absolute start time (s).
    pub t_start: f64,
    /// Absolute end time (s), ≥ `t_start`.
    pub t_end: f64,
    /// Acceleration law, parameterized by `t - t_start`.
    pub law: ControlLaw,
}

impl ControlArc {
    /// Arc duration (s).
    #[inline]
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// State advanced from `start` by `s` seconds into this arc.
    #[inline]
    fn propagate(&self, start: VehicleState, s: f64) -> VehicleState {
        let u0 = self.law.u0();
        let m = self.law.slope();
        VehicleState {
            x: start.x + start.v * s + 0.5 * u0 * s * s + m * s * s * s / 6.0,
            v: start.v + u0 * s + 0.5 * m * s * s,
        }
    }

    /// `0.5 * ∫ u(s)^2 ds` over the first `s` seconds of the arc.
    #[inline]
    fn half_energy(&self, s: f64) -> f64 {
        let u0 = self.law.u0();
        let m = self.law.slope();
        0.5 * (u0 * u0 * s + u0 * m * s * s + m * m * s * s * s / 3.0)
    }
}

/// A sampled point on a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// Absolute time (s).
    pub t: f64,
    /// Position (m).
    pub x: f64,
    /// Speed (m/s).
    pub v: f64,
    /// Acceleration (m/s²). At an arc junction the later arc's value.
    pub u: f64,
}

/// Immutable piecewise trajectory: an initial state at `t0` plus contiguous
/// control arcs. Arc start states are precomputed so evaluation is a binary
/// search plus one closed-form propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t0: f64,
    state0: VehicleState,
    arcs: Vec<ControlArc>,
    /// State at the start of each arc (same length as `arcs`).
    arc_starts: Vec<VehicleState>,
}

/// Slack below which two adjacent arc boundaries are considered contiguous.
const CONTIGUITY_TOL: f64 = 1e-9;

impl Trajectory {
    /// Builds a trajectory, checking the arcs are finite, ordered, and
    /// contiguous from `t0`.
    pub fn new(t0: f64, state0: VehicleState, arcs: Vec<ControlArc>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::Domain("trajectory needs at least one arc".into()));
        }
        let mut cursor = t0;
        for (k, arc) in arcs.iter().enumerate() {
            let finite = arc.t_start.is_finite()
                && arc.t_end.is_finite()
                && arc.law.u0().is_finite()
                && arc.law.slope().is_finite();
            if !finite {
                return Err(Error::Domain(format!("arc {k} has non-finite data")));
            }
            if (arc.t_start - cursor).abs() > CONTIGUITY_TOL.max(1e-12 * cursor.abs()) {
                return Err(Error::Domain(format!(
                    "arc {k} starts at {} but previous segment ends at {cursor}",
                    arc.t_start
                )));
            }
            if arc.t_end < arc.t_start - CONTIGUITY_TOL {
                return Err(Error::Domain(format!(
                    "arc {k} ends at {} before it starts at {}",
                    arc.t_end, arc.t_start
                )));
            }
            cursor = arc.t_end;
        }
        let mut arc_starts = Vec::with_capacity(arcs.len());
        let mut state = state0;
        for arc in &arcs {
            arc_starts.push(state);
            state = arc.propagate(state, arc.duration().max(0.0));
        }
        Ok(Self {
            t0,
            state0,
            arcs,
            arc_starts,
        })
    }

    /// A single-arc zero-acceleration trajectory (uniform motion).
    pub fn coasting(t0: f64, state0: VehicleState, t_end: f64) -> Result<Self> {
        Self::new(
            t0,
            state0,
            vec![ControlArc {
                t_start: t0,
                t_end,
                law: ControlLaw::Constant(0.0),
            }],
        )
    }

    /// Start time (s).
    #[inline]
    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// End time (s).
    #[inline]
    pub fn t_end(&self) -> f64 {
        self.arcs.last().map(|a| a.t_end).unwrap_or(self.t0)
    }

    /// Initial state.
    #[inline]
    pub fn start_state(&self) -> VehicleState {
        self.state0
    }

    /// Final state, evaluated in closed form.
    pub fn end_state(&self) -> VehicleState {
        match self.arcs.last() {
            Some(arc) => arc.propagate(self.arc_starts[self.arcs.len() - 1], arc.duration()),
            None => self.state0,
        }
    }

    /// The control arcs.
    #[inline]
    pub fn arcs(&self) -> &[ControlArc] {
        &self.arcs
    }

    /// Interior arc-junction times (candidate control discontinuities).
    pub fn switch_times(&self) -> Vec<f64> {
        self.arcs.iter().skip(1).map(|a| a.t_start).collect()
    }

    /// Index of the arc containing `t` (ties at junctions go to the later
    /// arc), with a small clamping tolerance at the domain ends.
    fn arc_index(&self, t: f64) -> Result<usize> {
        let slack = 1e-9 * (1.0 + self.t_end().abs());
        if t < self.t0 - slack || t > self.t_end() + slack {
            return Err(Error::Domain(format!(
                "time {t} outside trajectory domain [{}, {}]",
                self.t0,
                self.t_end()
            )));
        }
        // partition_point: first arc whose end is >= t (later arc at ties
        // because we compare against t_end strictly below t).
        let idx = self.arcs.partition_point(|a| a.t_end < t);
        Ok(idx.min(self.arcs.len() - 1))
    }

    /// Position, speed, and acceleration at absolute time `t`.
    pub fn evaluate(&self, t: f64) -> Result<Sample> {
        let idx = self.arc_index(t)?;
        let arc = &self.arcs[idx];
        let s = (t - arc.t_start).clamp(0.0, arc.duration().max(0.0));
        let st = arc.propagate(self.arc_starts[idx], s);
        Ok(Sample {
            t,
            x: st.x,
            v: st.v,
            u: arc.law.at(s),
        })
    }

    /// Acceleration at absolute time `t` (later arc at junctions).
    pub fn control_at(&self, t: f64) -> Result<f64> {
        let idx = self.arc_index(t)?;
        let arc = &self.arcs[idx];
        let s = (t - arc.t_start).clamp(0.0, arc.duration().max(0.0));
        Ok(arc.law.at(s))
    }

    /// Quadratic control cost `0.5 * ∫ u(t)^2 dt` over the whole span.
    pub fn cost(&self) -> f64 {
        self.arcs
            .iter()
            .map(|a| a.half_energy(a.duration().max(0.0)))
            .sum()
    }

    /// Control effort `∫ u(t)^2 dt` (twice the quadratic cost).
    #[inline]
    pub fn control_effort(&self) -> f64 {
        2.0 * self.cost()
    }

    /// Exact speed range over the whole trajectory.
    ///
    /// Speed is quadratic on each arc, so extrema are at arc endpoints or at
    /// the single interior stationary point of each arc.
    pub fn speed_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut take = |v: f64| {
            lo = lo.min(v);
            hi = hi.max(v);
        };
        for (arc, start) in self.arcs.iter().zip(&self.arc_starts) {
            let d = arc.duration().max(0.0);
            take(start.v);
            take(arc.propagate(*start, d).v);
            // v'(s) = u0 + m s = 0  =>  s = -u0/m.
            let m = arc.law.slope();
            if m != 0.0 {
                let s = -arc.law.u0() / m;
                if s > 0.0 && s < d {
                    take(arc.propagate(*start, s).v);
                }
            }
        }
        (lo, hi)
    }

    /// Exact acceleration range over the whole trajectory (affine per arc,
    /// so extrema sit at arc endpoints).
    pub fn control_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for arc in &self.arcs {
            let d = arc.duration().max(0.0);
            for u in [arc.law.at(0.0), arc.law.at(d)] {
                lo = lo.min(u);
                hi = hi.max(u);
            }
        }
        (lo, hi)
    }

    /// Exact minimum over the trajectory domain of the gap
    /// `g(t) = (b0 + b1 * t) - x(t)` to a boundary moving uniformly in
    /// absolute time. Returns `(t_min, g_min)`.
    ///
    /// On each arc `g` is cubic in the offset, so its derivative is a
    /// quadratic whose real roots plus the arc endpoints carry the minimum.
    pub fn min_gap_below_line(&self, b0: f64, b1: f64) -> (f64, f64) {
        let mut best_t = self.t0;
        let mut best_g = f64::INFINITY;
        let mut take = |t: f64, g: f64| {
            if g < best_g {
                best_g = g;
                best_t = t;
            }
        };
        for (arc, start) in self.arcs.iter().zip(&self.arc_starts) {
            let d = arc.duration().max(0.0);
            let u0 = arc.law.u0();
            let m = arc.law.slope();
            // g(s) = b0 + b1 (t_start + s) - [x0 + v0 s + u0 s²/2 + m s³/6]
            // g'(s) = (b1 - v0) - u0 s - m s²/2
            let eval = |s: f64| {
                let st = arc.propagate(*start, s);
                (arc.t_start + s, b0 + b1 * (arc.t_start + s) - st.x)
            };
            let (t, g) = eval(0.0);
            take(t, g);
            let (t, g) = eval(d);
            take(t, g);
            for s in real_roots_quadratic(-0.5 * m, -u0, b1 - start.v) {
                if s > 0.0 && s < d {
                    let (t, g) = eval(s);
                    take(t, g);
                }
            }
        }
        (best_t, best_g)
    }

    /// `n + 1` evenly spaced sample times covering `[t0, t_end]`.
    pub fn sample_grid(&self, n: usize) -> Vec<f64> {
        let n = n.max(1);
        let (a, b) = (self.t0, self.t_end());
        (0..=n)
            .map(|k| a + (b - a) * (k as f64) / (n as f64))
            .collect()
    }

    /// The same trajectory translated in time by `dt` (arc laws are
    /// unchanged; only absolute times move).
    pub fn shift_time(&self, dt: f64) -> Trajectory {
        let arcs = self
            .arcs
            .iter()
            .map(|a| ControlArc {
                t_start: a.t_start + dt,
                t_end: a.t_end + dt,
                law: a.law,
            })
            .collect();
        Trajectory::new(self.t0 + dt, self.state0, arcs)
            .expect("time translation preserves contiguity")
    }

    /// Concatenates two trajectories whose domains and states meet at the
    /// junction (position and speed must be continuous; acceleration may
    /// jump).
    pub fn concat(&self, tail: &Trajectory) -> Result<Trajectory> {
        let end = self.end_state();
        let t_join = self.t_end();
        let scale = 1.0 + end.x.abs().max(end.v.abs());
        if (tail.t0 - t_join).abs() > 1e-6 * (1.0 + t_join.abs()) {
            return Err(Error::Domain(format!(
                "cannot join trajectories: tail starts at {} but head ends at {t_join}",
                tail.t0
            )));
        }
        if (tail.state0.x - end.x).abs() > 1e-6 * scale
            || (tail.state0.v - end.v).abs() > 1e-6 * scale
        {
            return Err(Error::Domain(format!(
                "cannot join trajectories: state jump at t = {t_join} \
                 (x: {} vs {}, v: {} vs {})",
                end.x, tail.state0.x, end.v, tail.state0.v
            )));
        }
        let mut arcs = self.arcs.clone();
        // Snap the junction so the combined arc list is exactly contiguous.
        let mut tail_arcs = tail.arcs.clone();
        if let Some(first) = tail_arcs.first_mut() {
            first.t_start = t_join;
        }
        arcs.extend(tail_arcs);
        Trajectory::new(self.t0, self.state0, arcs)
    }
}

/// Real roots of `a s² + b s + c = 0`, handling the degenerate affine and
/// constant cases. Returns 0–2 roots.
pub(crate) fn real_roots_quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a.abs() < 1e-300 {
        if b.abs() < 1e-300 {
            return vec![];
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let sq = disc.sqrt();
    // Numerically stable pairing: compute the larger-magnitude root first.
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        return vec![0.0];
    }
    let r1 = q / a;
    let r2 = c / q;
    vec![r1, r2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ramp_down(t_f: f64, u0: f64, x0: f64, v0: f64) -> Trajectory {
        // u(t) = u0 (1 - t / t_f): the canonical interior minimum-energy law.
        Trajectory::new(
            0.0,
            VehicleState::new(x0, v0),
            vec![ControlArc {
                t_start: 0.0,
                t_end: t_f,
                law: ControlLaw::Linear {
                    u0,
                    slope: -u0 / t_f,
                },
            }],
        )
        .unwrap()
    }

    #[test]
    fn constant_arc_matches_kinematics() {
        let tr = Trajectory::new(
            1.0,
            VehicleState::new(10.0, 5.0),
            vec![ControlArc {
                t_start: 1.0,
                t_end: 3.0,
                law: ControlLaw::Constant(2.0),
            }],
        )
        .unwrap();
        let s = tr.evaluate(3.0).unwrap();
        // x = 10 + 5*2 + 0.5*2*4 = 24, v = 5 + 2*2 = 9
        assert_relative_eq!(s.x, 24.0);
        assert_relative_eq!(s.v, 9.0);
        assert_relative_eq!(s.u, 2.0);
        assert_relative_eq!(tr.cost(), 0.5 * 4.0 * 2.0);
    }

    #[test]
    fn linear_ramp_hits_closed_form_terminals() {
        // With u(t) = u0 (1 - t/T): v(T) = v0 + u0 T / 2,
        // x(T) = x0 + v0 T + u0 T² / 3, and 0.5 ∫u² = u0² T / 6.
        let (t_f, u0) = (6.0, 1.2);
        let tr = ramp_down(t_f, u0, 0.0, 10.0);
        let end = tr.end_state();
        assert_relative_eq!(end.v, 10.0 + u0 * t_f / 2.0, max_relative = 1e-12);
        assert_relative_eq!(
            end.x,
            10.0 * t_f + u0 * t_f * t_f / 3.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(tr.cost(), u0 * u0 * t_f / 6.0, max_relative = 1e-12);
    }

    #[test]
    fn evaluation_is_consistent_across_junctions() {
        let tr = Trajectory::new(
            0.0,
            VehicleState::new(0.0, 8.0),
            vec![
                ControlArc {
                    t_start: 0.0,
                    t_end: 2.0,
                    law: ControlLaw::Constant(3.3),
                },
                ControlArc {
                    t_start: 2.0,
                    t_end: 5.0,
                    law: ControlLaw::Linear {
                        u0: 3.3,
                        slope: -1.1,
                    },
                },
            ],
        )
        .unwrap();
        let before = tr.evaluate(2.0 - 1e-12).unwrap();
        let after = tr.evaluate(2.0 + 1e-12).unwrap();
        assert!((before.x - after.x).abs() < 1e-9);
        assert!((before.v - after.v).abs() < 1e-9);
        assert_eq!(tr.switch_times(), vec![2.0]);
    }

    #[test]
    fn rejects_non_contiguous_arcs() {
        let err = Trajectory::new(
            0.0,
            VehicleState::new(0.0, 0.0),
            vec![
                ControlArc {
                    t_start: 0.0,
                    t_end: 1.0,
                    law: ControlLaw::Constant(0.0),
                },
                ControlArc {
                    t_start: 1.5,
                    t_end: 2.0,
                    law: ControlLaw::Constant(0.0),
                },
            ],
        );
        assert!(err.is_err());
    }

    #[test]
    fn speed_range_catches_interior_extremum() {
        // Speed rises then falls inside a single arc: u = 2 - 1.0 t on [0,4]
        // peaks v at t=2.
        let tr = Trajectory::new(
            0.0,
            VehicleState::new(0.0, 1.0),
            vec![ControlArc {
                t_start: 0.0,
                t_end: 4.0,
                law: ControlLaw::Linear {
                    u0: 2.0,
                    slope: -1.0,
                },
            }],
        )
        .unwrap();
        let (lo, hi) = tr.speed_range();
        // v(t) = 1 + 2t - t²/2, v(2) = 3, v(4) = 1.
        assert_relative_eq!(hi, 3.0, max_relative = 1e-12);
        assert_relative_eq!(lo, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn min_gap_finds_interior_tangency() {
        // Follower accelerates toward a uniformly moving boundary and the
        // tightest approach happens strictly inside the arc.
        let tr = Trajectory::new(
            0.0,
            VehicleState::new(0.0, 12.0),
            vec![ControlArc {
                t_start: 0.0,
                t_end: 10.0,
                law: ControlLaw::Constant(-1.0),
            }],
        )
        .unwrap();
        // Boundary x_b = 30 + 8 t. Gap g = 30 - 4t + t²/2, minimized at t=4.
        let (t_min, g_min) = tr.min_gap_below_line(30.0, 8.0);
        assert_relative_eq!(t_min, 4.0, max_relative = 1e-9);
        assert_relative_eq!(g_min, 30.0 - 16.0 + 8.0, max_relative = 1e-9);
    }

    #[test]
    fn concat_preserves_evaluation_and_cost() {
        let head = ramp_down(3.0, 2.0, 0.0, 5.0);
        let join = head.end_state();
        let tail = Trajectory::new(
            3.0,
            join,
            vec![ControlArc {
                t_start: 3.0,
                t_end: 7.0,
                law: ControlLaw::Constant(-0.5),
            }],
        )
        .unwrap();
        let all = head.concat(&tail).unwrap();
        assert_relative_eq!(all.t_end(), 7.0);
        assert_relative_eq!(
            all.cost(),
            head.cost() + tail.cost(),
            max_relative = 1e-12
        );
        let s = all.evaluate(5.0).unwrap();
        let s_tail = tail.evaluate(5.0).unwrap();
        assert_relative_eq!(s.x, s_tail.x, max_relative = 1e-12);
        assert_relative_eq!(s.v, s_tail.v, max_relative = 1e-12);
    }

    #[test]
    fn quadratic_roots_cover_degenerate_cases() {
        assert!(real_roots_quadratic(0.0, 0.0, 1.0).is_empty());
        let r = real_roots_quadratic(0.0, 2.0, -4.0);
        assert_eq!(r, vec![2.0]);
        let mut r = real_roots_quadratic(1.0, -3.0, 2.0);
        r.sort_by(f64::total_cmp);
        assert_relative_eq!(r[0], 1.0);
        assert_relative_eq!(r[1], 2.0);
        assert!(real_roots_quadratic(1.0, 0.0, 1.0).is_empty());
    }
}
