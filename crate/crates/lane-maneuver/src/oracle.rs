//! Independent discrete-time verification oracle.
//!
//! Every analytic solution in this crate is cross-checked against a direct
//! transcription of the same optimal-control problem: the horizon is split
//! into `n` zero-order-hold steps, the double-integrator dynamics are
//! substituted exactly (`x_{k+1} = x_k + v_k dt + ½ u_k dt²`,
//! `v_{k+1} = v_k + u_k dt`, matching constant-arc integration bit for
//! bit), and the resulting convex quadratic program over the control
//! vector is solved to KKT stationarity with a dual active-set method on a
//! thin QR factorization of the working-set rows. No external solver is
//! involved, so the oracle stays auditable end to end.
//!
//! The module also houses two smaller independent checks used by the test
//! suites: a classic fourth-order Runge–Kutta integrator for validating
//! closed-form trajectory evaluation, and a dense bang–coast control
//! enumeration for validating reachability claims.

use crate::error::Error;
use crate::trajectory::Trajectory;
use crate::vehicle::{VehicleLimits, VehicleState};
use crate::Result;

/// Moving upper bound on position: `x(t) ≤ x0 + v t − gap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingCeiling {
    /// Boundary position at `t = 0` (m).
    pub x0: f64,
    /// Boundary speed (m/s).
    pub v: f64,
    /// Gap kept below the boundary (m).
    pub gap: f64,
}

/// Discrete transcription of one single-vehicle energy-minimization
/// problem: reach `x_f` at `t_f` from `state0` under box bounds on
/// acceleration and speed, optionally with a pinned terminal speed and a
/// moving position ceiling enforced at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct TranscribedProblem {
    /// Initial state.
    pub state0: VehicleState,
    /// Acceleration and speed bounds.
    pub limits: VehicleLimits,
    /// Horizon (s), > 0.
    pub t_f: f64,
    /// Required terminal position (m).
    pub x_f: f64,
    /// Optional required terminal speed (m/s).
    pub v_f: Option<f64>,
    /// Optional moving position ceiling applied at every interior and
    /// terminal step.
    pub ceiling: Option<MovingCeiling>,
    /// Step count, ≥ 2.
    pub n: usize,
}

impl TranscribedProblem {
    /// Plain reach-`x_f` problem with `n` steps.
    pub fn new(state0: VehicleState, limits: VehicleLimits, t_f: f64, x_f: f64, n: usize) -> Self {
        Self {
            state0,
            limits,
            t_f,
            x_f,
            v_f: None,
            ceiling: None,
            n,
        }
    }

    /// Adds a pinned terminal speed.
    pub fn with_terminal_speed(mut self, v_f: f64) -> Self {
        self.v_f = Some(v_f);
        self
    }

    /// Adds a moving position ceiling.
    pub fn with_ceiling(mut self, ceiling: MovingCeiling) -> Self {
        self.ceiling = Some(ceiling);
        self
    }

    /// Same problem at a different resolution.
    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// Step length (s).
    #[inline]
    pub fn dt(&self) -> f64 {
        self.t_f / self.n as f64
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!(
                "transcription needs at least 2 steps, got {}",
                self.n
            )));
        }
        if !(self.t_f > 0.0 && self.t_f.is_finite()) {
            return Err(Error::Domain(format!(
                "transcription horizon must be positive, got {}",
                self.t_f
            )));
        }
        self.limits.validate()?;
        Ok(())
    }

    /// Builds the constraint rows over the control vector, each normalized
    /// to a unit-norm coefficient vector. Equality rows come first.
    fn build_rows(&self) -> Vec<Row> {
        let n = self.n;
        let dt = self.dt();
        let lim = &self.limits;
        let (x0, v0) = (self.state0.x, self.state0.v);
        let mut rows = Vec::with_capacity(2 + 4 * n + if self.ceiling.is_some() { n } else { 0 });

        // Terminal position equality: Σ dt² (n − k − ½) u_k = x_f − x0 − n dt v0.
        let mut a = vec![0.0; n];
        for (k, ak) in a.iter_mut().enumerate() {
            *ak = dt * dt * (n as f64 - k as f64 - 0.5);
        }
        rows.push(Row::normalized(a, self.x_f - x0 - n as f64 * dt * v0, true));

        // Optional terminal speed equality: Σ dt u_k = v_f − v0.
        if let Some(v_f) = self.v_f {
            rows.push(Row::normalized(vec![dt; n], v_f - v0, true));
        }

        // Acceleration box: u_k ≥ u_min and −u_k ≥ −u_max.
        for k in 0..n {
            let mut a = vec![0.0; n];
            a[k] = 1.0;
            rows.push(Row::normalized(a, lim.u_min, false));
            let mut a = vec![0.0; n];
            a[k] = -1.0;
            rows.push(Row::normalized(a, -lim.u_max, false));
        }

        // Speed box at each step j ≥ 1: v_j = v0 + dt Σ_{k<j} u_k.
        for j in 1..=n {
            let mut a = vec![0.0; n];
            for ak in a.iter_mut().take(j) {
                *ak = dt;
            }
            rows.push(Row::normalized(a, lim.v_min - v0, false));
            let mut a = vec![0.0; n];
            for ak in a.iter_mut().take(j) {
                *ak = -dt;
            }
            rows.push(Row::normalized(a, v0 - lim.v_max, false));
        }

        // Moving ceiling at each step j ≥ 1:
        // x_j = x0 + j dt v0 + dt² Σ_{k<j} (j − k − ½) u_k ≤ c_j.
        if let Some(c) = self.ceiling {
            for j in 1..=n {
                let c_j = c.x0 + c.v * (j as f64 * dt) - c.gap;
                let mut a = vec![0.0; n];
                for (k, ak) in a.iter_mut().enumerate().take(j) {
                    *ak = -dt * dt * (j as f64 - k as f64 - 0.5);
                }
                rows.push(Row::normalized(a, x0 + j as f64 * dt * v0 - c_j, false));
            }
        }
        rows
    }
}

/// One linear constraint `a · u = b` (equality) or `a · u ≥ b`, with `a`
/// scaled to unit norm.
#[derive(Debug, Clone)]
struct Row {
    a: Vec<f64>,
    b: f64,
    eq: bool,
}

impl Row {
    fn normalized(mut a: Vec<f64>, mut b: f64, eq: bool) -> Self {
        let nrm = a.iter().map(|z| z * z).sum::<f64>().sqrt();
        if nrm > 0.0 {
            for z in &mut a {
                *z /= nrm;
            }
            b /= nrm;
        }
        Row { a, b, eq }
    }
}

/// Solution of a transcribed problem.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    /// Optimal piecewise-constant control, one value per step.
    pub u: Vec<f64>,
    /// Cost `½ dt Σ u_k²`.
    pub cost: f64,
    /// Relative KKT residual of the returned point (stationarity,
    /// feasibility, complementarity, and dual feasibility, scaled by the
    /// control magnitude).
    pub kkt_residual: f64,
    /// Active-set iterations used.
    pub iterations: usize,
    /// Number of active rows at the solution.
    pub active_rows: usize,
    /// Step length (s).
    pub dt: f64,
}

impl OracleSolution {
    /// Speed profile `v_0 .. v_n` implied by the control.
    pub fn speeds(&self, state0: VehicleState) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.u.len() + 1);
        v.push(state0.v);
        let mut cur = state0.v;
        for &u in &self.u {
            cur += u * self.dt;
            v.push(cur);
        }
        v
    }

    /// Position profile `x_0 .. x_n` implied by the control.
    pub fn positions(&self, state0: VehicleState) -> Vec<f64> {
        let mut xs = Vec::with_capacity(self.u.len() + 1);
        let (mut x, mut v) = (state0.x, state0.v);
        xs.push(x);
        for &u in &self.u {
            x += v * self.dt + 0.5 * u * self.dt * self.dt;
            v += u * self.dt;
            xs.push(x);
        }
        xs
    }
}

/// Hard cap on active-set iterations.
const MAX_ITER: usize = 200_000;
/// Feasibility tolerance on normalized rows.
const FEAS_TOL: f64 = 1e-9;
/// Squared norm below which a candidate row is treated as dependent on the
/// working set.
const Z_TOL2: f64 = 1e-18;
/// Multiplier tolerance for dual feasibility.
const MULT_TOL: f64 = 1e-10;

/// Thin QR factorization of the working-set rows (stored as columns of
/// `A_Wᵀ = Q R`), updated incrementally as rows enter and leave.
struct ThinQr {
    /// Orthonormal columns, each of length `n`.
    q_cols: Vec<Vec<f64>>,
    /// Upper-triangular factor, stored column-major; column `j` has
    /// `j + 1` entries.
    r_cols: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ThinQr {
    fn new() -> Self {
        Self {
            q_cols: Vec::new(),
            r_cols: Vec::new(),
        }
    }

    fn size(&self) -> usize {
        self.q_cols.len()
    }

    /// Splits `a` into its coordinates on the current basis (`w`) and the
    /// orthogonal remainder (`z`), with one reorthogonalization pass.
    fn project(&self, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.size();
        let mut w = vec![0.0; m];
        let mut z = a.to_vec();
        for pass in 0..2 {
            let mut moved = false;
            for (j, q) in self.q_cols.iter().enumerate() {
                let c = dot(q, &z);
                if c != 0.0 {
                    moved = true;
                    w[j] += c;
                    for (zi, qi) in z.iter_mut().zip(q) {
                        *zi -= c * qi;
                    }
                }
            }
            if pass == 0 && !moved {
                break;
            }
        }
        (w, z)
    }

    /// Appends a new working-set row whose projection was `(w, z)`.
    fn push(&mut self, w: Vec<f64>, z: &[f64]) {
        let rho = dot(z, z).sqrt();
        let q: Vec<f64> = z.iter().map(|zi| zi / rho).collect();
        let mut col = w;
        col.push(rho);
        self.q_cols.push(q);
        self.r_cols.push(col);
    }

    /// Forward-substitution solve of `Rᵀ y = b`.
    fn solve_rt(&self, b: &[f64]) -> Vec<f64> {
        let m = self.size();
        let mut y = vec![0.0; m];
        for j in 0..m {
            let mut s = b[j];
            for i in 0..j {
                s -= self.r_cols[j][i] * y[i];
            }
            y[j] = s / self.r_cols[j][j];
        }
        y
    }

    /// Back-substitution solve of `R λ = y`.
    fn solve_r(&self, y: &[f64]) -> Vec<f64> {
        let m = self.size();
        let mut lam = vec![0.0; m];
        for j in (0..m).rev() {
            let mut s = y[j];
            for k in j + 1..m {
                s -= self.r_cols[k][j] * lam[k];
            }
            lam[j] = s / self.r_cols[j][j];
        }
        lam
    }

    /// `Q y`.
    fn mul_q(&self, y: &[f64]) -> Vec<f64> {
        let n = self.q_cols.first().map(|q| q.len()).unwrap_or(0);
        let mut out = vec![0.0; n];
        for (q, &c) in self.q_cols.iter().zip(y) {
            for (oi, qi) in out.iter_mut().zip(q) {
                *oi += c * qi;
            }
        }
        out
    }

    /// Removes working-set column `k`, restoring triangularity with Givens
    /// rotations applied to both factors.
    fn delete(&mut self, k: usize) {
        let m = self.size();
        self.r_cols.remove(k);
        // Columns k.. now carry one extra sub-diagonal entry each; sweep it
        // away with rotations acting on rows (j, j+1).
        for j in k..m - 1 {
            let f = self.r_cols[j][j];
            let g = self.r_cols[j][j + 1];
            let r = f.hypot(g);
            let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (f / r, g / r) };
            self.r_cols[j][j] = r;
            self.r_cols[j].truncate(j + 1);
            for col in self.r_cols.iter_mut().skip(j + 1) {
                let a0 = col[j];
                let a1 = col[j + 1];
                col[j] = c * a0 + s * a1;
                col[j + 1] = -s * a0 + c * a1;
            }
            // Same rotation combines the two corresponding Q columns.
            for i in 0..self.q_cols[j].len() {
                let a0 = self.q_cols[j][i];
                let a1 = self.q_cols[j + 1][i];
                self.q_cols[j][i] = c * a0 + s * a1;
                self.q_cols[j + 1][i] = -s * a0 + c * a1;
            }
        }
        self.q_cols.pop();
    }
}

/// One member of the working set.
#[derive(Debug, Clone, Copy)]
struct ActiveRow {
    row: usize,
    eq: bool,
}

/// Solves the transcribed convex QP `min ½ Σ u_k²` (reported scaled by
/// `dt`) subject to the problem's equality and inequality rows, using a
/// dual active-set iteration: start from the unconstrained minimum,
/// repeatedly add the most violated row, and retreat along the dual
/// whenever a working-set multiplier would turn negative. Terminates at a
/// KKT point; the returned relative residual is at most 1e-8 on success.
pub fn solve_qp(p: &TranscribedProblem) -> Result<OracleSolution> {
    p.validate()?;
    let rows = p.build_rows();
    let n = p.n;

    let mut qr = ThinQr::new();
    let mut active: Vec<ActiveRow> = Vec::new();
    let mut lambda: Vec<f64> = Vec::new();
    let mut in_w = vec![false; rows.len()];
    let mut u = vec![0.0; n];
    let mut iters = 0usize;

    // Load the equality rows first; they never leave the working set. With
    // no inequalities active yet nothing can block a full step.
    for (idx, row) in rows.iter().enumerate().filter(|(_, r)| r.eq) {
        let (w, z) = qr.project(&row.a);
        let z2 = dot(&z, &z);
        if z2 <= Z_TOL2 {
            // Dependent equality: consistent → redundant, inconsistent →
            // no feasible point at all.
            if (dot(&row.a, &u) - row.b).abs() > 1e-7 {
                return Err(Error::OracleInfeasible);
            }
            continue;
        }
        let t = (row.b - dot(&row.a, &u)) / z2;
        for (ui, zi) in u.iter_mut().zip(&z) {
            *ui += t * zi;
        }
        for (l, r) in lambda.iter_mut().zip(qr.solve_r(&w)) {
            *l -= t * r;
        }
        qr.push(w, &z);
        active.push(ActiveRow { row: idx, eq: true });
        lambda.push(t);
        in_w[idx] = true;
    }

    loop {
        iters += 1;
        if iters > MAX_ITER {
            return Err(Error::OracleNoConverge { max_iter: MAX_ITER });
        }

        // Most violated inactive inequality row.
        let mut worst: Option<(usize, f64)> = None;
        for (idx, row) in rows.iter().enumerate() {
            if row.eq || in_w[idx] {
                continue;
            }
            let s = dot(&row.a, &u) - row.b;
            if s < -FEAS_TOL && worst.map(|(_, ws)| s < ws).unwrap_or(true) {
                worst = Some((idx, s));
            }
        }

        let Some((p_idx, _)) = worst else {
            // Primal feasible. Recompute the working-set solution from the
            // factorization to wash out incremental drift, then make sure
            // dual feasibility survived; drop any row whose multiplier went
            // negative and continue otherwise.
            let b_w: Vec<f64> = active.iter().map(|ar| rows[ar.row].b).collect();
            let y = qr.solve_rt(&b_w);
            let u_clean = qr.mul_q(&y);
            let lam_clean = qr.solve_r(&y);
            let mut worst_neg: Option<(usize, f64)> = None;
            for (k, ar) in active.iter().enumerate() {
                if !ar.eq && lam_clean[k] < -MULT_TOL {
                    if worst_neg.map(|(_, l)| lam_clean[k] < l).unwrap_or(true) {
                        worst_neg = Some((k, lam_clean[k]));
                    }
                }
            }
            u = u_clean;
            lambda = lam_clean;
            if let Some((k, _)) = worst_neg {
                in_w[active[k].row] = false;
                active.remove(k);
                lambda.remove(k);
                qr.delete(k);
                continue;
            }
            // Re-verify feasibility with the cleaned point before accepting.
            let still_violated = rows.iter().enumerate().any(|(idx, row)| {
                let s = dot(&row.a, &u) - row.b;
                if row.eq {
                    s.abs() > FEAS_TOL && !in_w[idx]
                } else {
                    !in_w[idx] && s < -10.0 * FEAS_TOL
                }
            });
            if still_violated {
                continue;
            }
            break;
        };

        // Resolve candidate p: take full or partial dual steps until it can
        // join the working set (or infeasibility is proven).
        let mut lam_p = 0.0;
        loop {
            iters += 1;
            if iters > MAX_ITER {
                return Err(Error::OracleNoConverge { max_iter: MAX_ITER });
            }
            let row_p = &rows[p_idx];
            let (w, z) = qr.project(&row_p.a);
            let z2 = dot(&z, &z);
            let r = qr.solve_r(&w);

            // Longest dual step before some inequality multiplier hits zero.
            let mut t_dual = f64::INFINITY;
            let mut blocker: Option<usize> = None;
            for (k, ar) in active.iter().enumerate() {
                if !ar.eq && r[k] > 1e-12 {
                    let t = lambda[k] / r[k];
                    if t < t_dual {
                        t_dual = t;
                        blocker = Some(k);
                    }
                }
            }

            if z2 > Z_TOL2 {
                let t_full = (row_p.b - dot(&row_p.a, &u)) / z2;
                if t_full <= t_dual {
                    for (ui, zi) in u.iter_mut().zip(&z) {
                        *ui += t_full * zi;
                    }
                    for (l, rk) in lambda.iter_mut().zip(&r) {
                        *l -= t_full * rk;
                    }
                    lam_p += t_full;
                    qr.push(w, &z);
                    active.push(ActiveRow {
                        row: p_idx,
                        eq: false,
                    });
                    lambda.push(lam_p);
                    in_w[p_idx] = true;
                    break;
                }
                let k = blocker.expect("finite dual step implies a blocking row");
                for (ui, zi) in u.iter_mut().zip(&z) {
                    *ui += t_dual * zi;
                }
                for (l, rk) in lambda.iter_mut().zip(&r) {
                    *l -= t_dual * rk;
                }
                lam_p += t_dual;
                in_w[active[k].row] = false;
                active.remove(k);
                lambda.remove(k);
                qr.delete(k);
            } else {
                // Candidate is dependent on the working set: only a pure
                // dual exchange can make room. No blocking row means the
                // dual is unbounded, i.e. the primal has no feasible point.
                let Some(k) = blocker else {
                    return Err(Error::OracleInfeasible);
                };
                for (l, rk) in lambda.iter_mut().zip(&r) {
                    *l -= t_dual * rk;
                }
                lam_p += t_dual;
                in_w[active[k].row] = false;
                active.remove(k);
                lambda.remove(k);
                qr.delete(k);
            }
        }
    }

    // KKT residual of the final point.
    let mut stat = u.clone();
    for (ar, &l) in active.iter().zip(&lambda) {
        for (si, ai) in stat.iter_mut().zip(&rows[ar.row].a) {
            *si -= l * ai;
        }
    }
    let stat_inf = stat.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let mut feas_inf = 0.0f64;
    for row in &rows {
        let s = dot(&row.a, &u) - row.b;
        feas_inf = feas_inf.max(if row.eq { s.abs() } else { (-s).max(0.0) });
    }
    let mut comp_inf = 0.0f64;
    let mut dual_inf = 0.0f64;
    for (ar, &l) in active.iter().zip(&lambda) {
        if !ar.eq {
            let s = dot(&rows[ar.row].a, &u) - rows[ar.row].b;
            comp_inf = comp_inf.max((l * s).abs());
            dual_inf = dual_inf.max((-l).max(0.0));
        }
    }
    let scale = 1.0 + u.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let kkt_residual = stat_inf.max(feas_inf).max(comp_inf).max(dual_inf) / scale;

    let dt = p.dt();
    let cost = 0.5 * dt * u.iter().map(|z| z * z).sum::<f64>();
    Ok(OracleSolution {
        u,
        cost,
        kkt_residual,
        iterations: iters,
        active_rows: active.len(),
        dt,
    })
}

/// Solves the same problem at each resolution in `n_list`, returning the
/// cost ladder. Used to confirm convergence of the discrete optimum toward
/// an analytic value as the grid refines.
pub fn refine_convergence(p: &TranscribedProblem, n_list: &[usize]) -> Result<Vec<f64>> {
    let mut costs = Vec::with_capacity(n_list.len());
    for &n in n_list {
        costs.push(solve_qp(&p.clone().with_n(n))?.cost);
    }
    Ok(costs)
}

/// Maximum absolute deviation `(position, speed)` between a trajectory's
/// closed-form evaluation and a fourth-order Runge–Kutta integration of the
/// same control signal at `steps_per_arc` steps per arc. The integrated
/// state is carried across arcs, so errors would accumulate if the closed
/// forms were wrong anywhere.
pub fn rk4_deviation(traj: &Trajectory, steps_per_arc: usize) -> (f64, f64) {
    let steps = steps_per_arc.max(1);
    let mut state = traj.start_state();
    let (mut max_dx, mut max_dv) = (0.0f64, 0.0f64);
    for arc in traj.arcs() {
        let h = arc.duration() / steps as f64;
        if h <= 0.0 {
            continue;
        }
        let mut t = arc.t_start;
        for _ in 0..steps {
            // RK4 on ẋ = v, v̇ = u(t); u is affine within the arc.
            let u_at = |tt: f64| arc.law.at(tt - arc.t_start);
            let (x, v) = (state.x, state.v);
            let k1 = (v, u_at(t));
            let k2 = (v + 0.5 * h * k1.1, u_at(t + 0.5 * h));
            let k3 = (v + 0.5 * h * k2.1, u_at(t + 0.5 * h));
            let k4 = (v + h * k3.1, u_at(t + h));
            state.x = x + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            state.v = v + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            t += h;
            let exact = traj
                .evaluate(t.min(arc.t_end))
                .expect("time inside trajectory domain");
            max_dx = max_dx.max((state.x - exact.x).abs());
            max_dv = max_dv.max((state.v - exact.v).abs());
        }
        // Snap to the closed form at the junction so per-arc roundoff does
        // not mask a later discrepancy.
        let exact = traj.evaluate(arc.t_end).expect("arc end inside domain");
        state.x = exact.x;
        state.v = exact.v;
    }
    (max_dx, max_dv)
}

/// Terminal positions reachable by the two extreme one-switch control
/// families, simulated densely with speed clamping:
/// `(x_min(t_f), x_max(t_f))`. Because the reachable position set of the
/// saturated double integrator is an interval, any target inside is
/// attainable.
pub fn simulate_envelope(
    state0: VehicleState,
    limits: &VehicleLimits,
    t_f: f64,
    dt: f64,
) -> (f64, f64) {
    let extreme = |u_cmd: f64| -> f64 {
        let steps = (t_f / dt).ceil() as usize;
        let h = t_f / steps as f64;
        let (mut x, mut v) = (state0.x, state0.v);
        for _ in 0..steps {
            let v_next = (v + u_cmd * h).clamp(limits.v_min, limits.v_max);
            x += 0.5 * (v + v_next) * h;
            v = v_next;
        }
        x
    };
    (extreme(limits.u_min), extreme(limits.u_max))
}

/// Searches the dense one-switch bang–coast families (accelerate-then-coast
/// and brake-then-coast, switch time on a `switch_dt` grid, speeds clamped)
/// for a control reaching `x_f` at `t_f` within `tol` meters. When the
/// terminal position crosses the target between two neighboring gridpoints
/// — the full-braking family moves it by up to `|u_min| · t_f · switch_dt`
/// per gridpoint, which can exceed `tol` — the bracket is refined by
/// bisection on the family's exact kinematics. Returns the switch time of a
/// certificate when one exists.
pub fn bang_coast_certificate(
    state0: VehicleState,
    limits: &VehicleLimits,
    t_f: f64,
    x_f: f64,
    switch_dt: f64,
    tol: f64,
) -> Option<f64> {
    for u_cmd in [limits.u_max, limits.u_min] {
        let v_sat = if u_cmd > 0.0 {
            limits.v_max
        } else {
            limits.v_min
        };
        let t_sat = ((v_sat - state0.v) / u_cmd).max(0.0);
        // Exact clamped-bang state after s seconds of commanded control.
        let state_at = |s: f64| -> (f64, f64) {
            if s <= t_sat {
                (
                    state0.x + state0.v * s + 0.5 * u_cmd * s * s,
                    state0.v + u_cmd * s,
                )
            } else {
                let x_sat = state0.x + state0.v * t_sat + 0.5 * u_cmd * t_sat * t_sat;
                (x_sat + v_sat * (s - t_sat), v_sat)
            }
        };
        // Terminal position when switching to a coast at s.
        let terminal_err = |s: f64| -> f64 {
            let (x, v) = state_at(s);
            x + v * (t_f - s) - x_f
        };
        let steps = (t_f / switch_dt).ceil().max(1.0) as usize;
        let mut s_prev = 0.0;
        let mut e_prev = terminal_err(0.0);
        if e_prev.abs() <= tol {
            return Some(0.0);
        }
        for j in 1..=steps {
            let s = t_f * j as f64 / steps as f64;
            let e = terminal_err(s);
            if e.abs() <= tol {
                return Some(s);
            }
            if e.signum() != e_prev.signum() {
                return crate::search::bisect_root(terminal_err, s_prev, s, 1e-9);
            }
            s_prev = s;
            e_prev = e;
        }
    }
    None
}
