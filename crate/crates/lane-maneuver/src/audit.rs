//! Post-hoc safety audit of an assembled maneuver.
//!
//! Every solver in this crate guarantees its own constraints analytically;
//! the audit re-checks the assembled plan anyway, by dense sampling, so a
//! plan is never reported as safe on the strength of a derivation alone.
//! Sampling is for auditing only — the trajectories themselves are exact
//! closed forms.

use crate::pipeline::{ManeuverCase, ManeuverPlan};
use crate::scenario::ScenarioConfig;
use crate::trajectory::Trajectory;
use crate::vehicle::safe_distance;

/// Default number of uniform audit samples.
pub const DEFAULT_AUDIT_SAMPLES: usize = 1000;

/// Worst observed slack of one audited constraint and the sample time where
/// it occurs. Positive slack means the constraint holds with margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlackRecord {
    /// Minimum slack over all samples (m, m/s, or m/s² depending on the
    /// constraint).
    pub min_slack: f64,
    /// Sample time (s) at which the minimum occurs.
    pub at_time: f64,
}

impl SlackRecord {
    fn fresh() -> Self {
        SlackRecord {
            min_slack: f64::INFINITY,
            at_time: 0.0,
        }
    }

    fn track(&mut self, slack: f64, t: f64) {
        if slack < self.min_slack {
            self.min_slack = slack;
            self.at_time = t;
        }
    }
}

/// One audited instant of the three controlled trajectories.
///
/// The uncontrolled vehicle needs no row of its own: it coasts, so its
/// position is reconstructed from the scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditSample {
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
}

/// Per-constraint minimum slacks over a maneuver and the overall verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyAudit {
    /// Running spacing of the target-lane pair: `x_1 − x_2 − d(v_2)`.
    pub spacing_12: SlackRecord,
    /// Running spacing of the merging vehicle below the uncontrolled one:
    /// `x_U − x_C − d_C`.
    pub spacing_uc: SlackRecord,
    /// Control-box slack, worst over vehicles 1, 2, C:
    /// `min(u − u_min, u_max − u)`.
    pub control_box: SlackRecord,
    /// Speed-box slack, worst over vehicles 1, 2, C:
    /// `min(v − v_min, v_max − v)`.
    pub speed_box: SlackRecord,
    /// Terminal spacing of the leader over the merging vehicle:
    /// `x_1(t_f) − x_C(t_f) − d_C`.
    pub terminal_1c: f64,
    /// Terminal spacing of the merging vehicle over the follower:
    /// `x_C(t_f) − x_2(t_f) − d(v_2(t_f))`.
    pub terminal_c2: f64,
    /// Number of uniform samples audited.
    pub n_samples: usize,
    /// True when every slack exceeds `−eps_margin`.
    pub pass: bool,
}

impl SafetyAudit {
    /// The constraint with the worst slack, for diagnostics.
    pub fn worst(&self) -> (&'static str, f64) {
        let entries = [
            ("running spacing 1-2", self.spacing_12.min_slack),
            ("running spacing U-C", self.spacing_uc.min_slack),
            ("control box", self.control_box.min_slack),
            ("speed box", self.speed_box.min_slack),
            ("terminal spacing 1-C", self.terminal_1c),
            ("terminal spacing C-2", self.terminal_c2),
        ];
        entries
            .into_iter()
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite slacks"))
            .expect("non-empty slack table")
    }
}

/// Audits a complete plan at `n_samples` uniform times.
///
/// The running checks are the target-lane spacing `x_1 − x_2 > d(v_2)`, the
/// merging vehicle's spacing below the uncontrolled one `x_U − x_C > d_C`,
/// and the control/speed boxes of all three controlled vehicles; at the
/// horizon the terminal gaps `x_1 − x_C > d_C` and `x_C − x_2 > d(v_2)` are
/// checked as well. Violations are reported through the slack records and
/// the `pass` flag, never as errors.
pub fn audit_safety(plan: &ManeuverPlan, cfg: &ScenarioConfig, n_samples: usize) -> SafetyAudit {
    let accelerating = plan.case_label == ManeuverCase::Case1;
    let d_c = cfg.resolved_d_c_directed(plan.terminal.t_f, accelerating);
    audit_trajectories(
        plan.traj_1(),
        plan.traj_2(),
        plan.traj_c(),
        cfg,
        d_c,
        n_samples,
    )
}

/// Audits three controlled trajectories sharing one horizon; see
/// [`audit_safety`]. `d_c` is the constant spacing bound used both for the
/// merging vehicle's running check against the uncontrolled vehicle and for
/// its terminal gap behind vehicle 1.
pub fn audit_trajectories(
    traj_1: &Trajectory,
    traj_2: &Trajectory,
    traj_c: &Trajectory,
    cfg: &ScenarioConfig,
    d_c: f64,
    n_samples: usize,
) -> SafetyAudit {
    let n = n_samples.max(2);
    let samples: Vec<AuditSample> = traj_c
        .sample_grid(n - 1)
        .into_iter()
        .map(|t| {
            let s1 = traj_1.evaluate(t).expect("sample inside horizon");
            let s2 = traj_2.evaluate(t).expect("sample inside horizon");
            let sc = traj_c.evaluate(t).expect("sample inside horizon");
            AuditSample {
                t,
                x_1: s1.x,
                v_1: s1.v,
                u_1: traj_1.control_at(t).expect("sample inside horizon"),
                x_2: s2.x,
                v_2: s2.v,
                u_2: traj_2.control_at(t).expect("sample inside horizon"),
                x_c: sc.x,
                v_c: sc.v,
                u_c: traj_c.control_at(t).expect("sample inside horizon"),
            }
        })
        .collect();
    audit_samples(&samples, cfg, d_c)
}

/// Core of the audit, over already-sampled rows (also used to re-audit
/// externally produced trajectory tables).
pub fn audit_samples(samples: &[AuditSample], cfg: &ScenarioConfig, d_c: f64) -> SafetyAudit {
    let mut spacing_12 = SlackRecord::fresh();
    let mut spacing_uc = SlackRecord::fresh();
    let mut control_box = SlackRecord::fresh();
    let mut speed_box = SlackRecord::fresh();

    let box_slack = |u: f64, v: f64, lim: &crate::vehicle::VehicleLimits| {
        (
            (u - lim.u_min).min(lim.u_max - u),
            (v - lim.v_min).min(lim.v_max - v),
        )
    };

    for s in samples {
        let d2 = safe_distance(s.v_2.max(0.0), &cfg.safety).expect("nonnegative speed");
        spacing_12.track(s.x_1 - s.x_2 - d2, s.t);
        spacing_uc.track(cfg.x_u_at(s.t) - s.x_c - d_c, s.t);
        for (u, v, lim) in [
            (s.u_1, s.v_1, &cfg.limits_1),
            (s.u_2, s.v_2, &cfg.limits_2),
            (s.u_c, s.v_c, &cfg.limits_c),
        ] {
            let (cu, cv) = box_slack(u, v, lim);
            control_box.track(cu, s.t);
            speed_box.track(cv, s.t);
        }
    }

    let (terminal_1c, terminal_c2) = match samples.last() {
        Some(end) => {
            let d2 = safe_distance(end.v_2.max(0.0), &cfg.safety).expect("nonnegative speed");
            (end.x_1 - end.x_c - d_c, end.x_c - end.x_2 - d2)
        }
        None => (f64::INFINITY, f64::INFINITY),
    };

    let floor = -cfg.eps_margin;
    let pass = spacing_12.min_slack > floor
        && spacing_uc.min_slack > floor
        && control_box.min_slack > floor
        && speed_box.min_slack > floor
        && terminal_1c > floor
        && terminal_c2 > floor;

    SafetyAudit {
        spacing_12,
        spacing_uc,
        control_box,
        speed_box,
        terminal_1c,
        terminal_c2,
        n_samples: samples.len(),
        pass,
    }
}
