//! Scenario description: initial states, per-vehicle limits, maneuver
//! parameters, and the safety model.
//!
//! Vehicle roles: vehicle C merges from its own lane into the gap between
//! vehicle 1 (ahead) and vehicle 2 (behind) in the target lane, while
//! vehicle U drives uncontrolled at constant speed ahead of C in C's
//! original lane. Vehicles 1, 2, and C are controlled; U is not.

use crate::error::Error;
use crate::vehicle::{safe_distance, SafetyModel, VehicleLimits, VehicleState};
use crate::Result;

/// Aggressiveness coefficient per controlled vehicle, each in `[0, 1)`.
///
/// A fraction of the full actuation authority assumed when estimating the
/// minimal maneuver time: vehicle `i` is imagined driving at
/// `alpha_i * u_i_max` (or `alpha_i * u_i_min` when it must brake).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggressiveness {
    pub v1: f64,
    pub v2: f64,
    pub c: f64,
}

impl Aggressiveness {
    /// Same coefficient for all three controlled vehicles.
    pub fn uniform(a: f64) -> Self {
        Self { v1: a, v2: a, c: a }
    }

    fn validate(&self) -> Result<()> {
        for (name, a) in [("v1", self.v1), ("v2", self.v2), ("c", self.c)] {
            if !(0.0..1.0).contains(&a) {
                return Err(Error::InvalidScenario(format!(
                    "aggressiveness {name} must lie in [0, 1), got {a}"
                )));
            }
        }
        Ok(())
    }

    /// Bumps every coefficient by `step`, capping at `cap`. Used by the
    /// minimal-time search when no horizon satisfies the spacing
    /// conditions at the current aggressiveness.
    pub fn escalate(&self, step: f64, cap: f64) -> Self {
        Self {
            v1: (self.v1 + step).min(cap),
            v2: (self.v2 + step).min(cap),
            c: (self.c + step).min(cap),
        }
    }
}

/// How the terminal-position optimizer resolves the two gap bounds of its
/// spacing constraints (lead-to-merging and merging-to-rear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminalGapPolicy {
    /// Derive both bounds from the safety model: the rear-gap bound is
    /// `d(v_2(0))`, and the merging-vehicle bound is `d(v_C)` evaluated at
    /// the branch's extreme terminal speed (full-throttle speed clamped to
    /// `v_max` when the merging vehicle advances, `v_C(0)` when it
    /// retards), unless a fixed merging-vehicle gap overrides it.
    FromSafetyModel,
    /// Pin both bounds explicitly (m).
    Fixed { gap_c: f64, gap_2: f64 },
}

/// Complete immutable description of one maneuver-planning problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Initial state of vehicle 1 (target-lane leader).
    pub state_1: VehicleState,
    /// Initial state of vehicle 2 (target-lane follower).
    pub state_2: VehicleState,
    /// Initial state of vehicle C (merging vehicle).
    pub state_c: VehicleState,
    /// Initial state of vehicle U (uncontrolled, ahead of C); `state_u.v`
    /// is its constant speed.
    pub state_u: VehicleState,
    /// Actuation and speed limits for vehicle 1.
    pub limits_1: VehicleLimits,
    /// Actuation and speed limits for vehicle 2.
    pub limits_2: VehicleLimits,
    /// Actuation and speed limits for vehicle C.
    pub limits_c: VehicleLimits,
    /// Aggressiveness coefficients for the minimal-time estimate.
    pub alpha: Aggressiveness,
    /// Time/energy trade-off weight in `[0, 1]` (carried through to
    /// reports; the staged planner fixes time first, then energy).
    pub rho: f64,
    /// Hard upper bound on the maneuver horizon (s).
    pub t_max: f64,
    /// Initial horizon-relaxation factor (> 1) applied when the terminal
    /// configuration is infeasible at the minimal time.
    pub beta0: f64,
    /// Safe-distance model.
    pub safety: SafetyModel,
    /// Numerical margin (m) standing in for strict inequalities.
    pub eps_margin: f64,
    /// Gap-bound policy for the terminal-position optimizer.
    pub terminal_gaps: TerminalGapPolicy,
}

impl ScenarioConfig {
    /// Builds a scenario from initial states using the benchmark defaults:
    /// `u ∈ [−7, 3.3] m/s²`, `v ∈ [1, 33] m/s`, aggressiveness 0.5 for all
    /// vehicles, `rho = 0.5`, `t_max = 120 s`, `beta0 = 1.1`, headway rule
    /// `d(v) = 1.8 v + 5`, margin `1e-6 m`, safety-model terminal gaps.
    pub fn with_defaults(
        state_1: VehicleState,
        state_2: VehicleState,
        state_c: VehicleState,
        state_u: VehicleState,
    ) -> Self {
        let limits = VehicleLimits {
            u_min: -7.0,
            u_max: 3.3,
            v_min: 1.0,
            v_max: 33.0,
        };
        Self {
            state_1,
            state_2,
            state_c,
            state_u,
            limits_1: limits,
            limits_2: limits,
            limits_c: limits,
            alpha: Aggressiveness::uniform(0.5),
            rho: 0.5,
            t_max: 120.0,
            beta0: 1.1,
            safety: SafetyModel {
                phi: 1.8,
                delta: 5.0,
                d_c_fixed: None,
            },
            eps_margin: 1e-6,
            terminal_gaps: TerminalGapPolicy::FromSafetyModel,
        }
    }

    /// Position of the uncontrolled vehicle at time `t`.
    #[inline]
    pub fn x_u_at(&self, t: f64) -> f64 {
        self.state_u.coast_position(t)
    }

    /// The constant gap bound enforced between U and C (and between 1 and C
    /// at the terminal time): the fixed override when present, otherwise
    /// the headway rule at C's initial speed.
    ///
    /// The horizon-dependent accelerating-branch variant is
    /// [`Self::resolved_d_c_directed`].
    pub fn resolved_d_c(&self) -> f64 {
        self.resolved_d_c_directed(0.0, false)
    }

    /// The constant gap bound between U and C, resolved for a maneuver
    /// direction: the fixed override when present, otherwise the headway
    /// rule at C's most conservative speed over the horizon — the clamped
    /// full-throttle terminal speed when accelerating, the initial speed
    /// otherwise.
    pub fn resolved_d_c_directed(&self, t_f: f64, accelerating: bool) -> f64 {
        match self.safety.d_c_fixed {
            Some(d) => d,
            None => {
                let v_peak = if accelerating {
                    (self.state_c.v + self.limits_c.u_max * t_f)
                        .clamp(self.limits_c.v_min, self.limits_c.v_max)
                } else {
                    self.state_c.v
                };
                self.safety.phi * v_peak + self.safety.delta
            }
        }
    }

    /// Validates all structural invariants and the initial safe ordering.
    pub fn validate(&self) -> Result<()> {
        self.validate_parameters()?;
        // Initial ordering must already be safe: the target-lane pair obeys
        // the headway rule, and C trails U by the constant bound whenever
        // that bound is pinned a priori.
        let d2 = safe_distance(self.state_2.v, &self.safety)?;
        let gap_12 = self.state_1.x - self.state_2.x;
        if gap_12 <= d2 {
            return Err(Error::InvalidScenario(format!(
                "initial target-lane gap {gap_12:.3} m does not clear the \
                 safe distance {d2:.3} m behind vehicle 1"
            )));
        }
        if let Some(d_c) = self.safety.d_c_fixed {
            let gap_uc = self.state_u.x - self.state_c.x;
            if gap_uc <= d_c {
                return Err(Error::InvalidScenario(format!(
                    "initial gap {gap_uc:.3} m between the uncontrolled vehicle \
                     and vehicle C does not clear the fixed bound {d_c:.3} m"
                )));
            }
        }
        Ok(())
    }

    /// Validates the structural invariants alone — limit boxes, parameter
    /// ranges, finite states — without requiring the initial configuration
    /// to satisfy the spacing rules. Diagnostic planning paths use this so
    /// that an unsafely spaced scenario is still planned and then rejected
    /// by the audit (with the violation quantified) instead of being
    /// refused outright.
    pub fn validate_parameters(&self) -> Result<()> {
        for (name, lim) in [
            ("vehicle 1", &self.limits_1),
            ("vehicle 2", &self.limits_2),
            ("vehicle C", &self.limits_c),
        ] {
            lim.validate()
                .map_err(|e| Error::InvalidScenario(format!("{name}: {e}")))?;
        }
        self.safety.validate()?;
        self.alpha.validate()?;
        for (name, st, lim) in [
            ("vehicle 1", self.state_1, Some(&self.limits_1)),
            ("vehicle 2", self.state_2, Some(&self.limits_2)),
            ("vehicle C", self.state_c, Some(&self.limits_c)),
            ("vehicle U", self.state_u, None),
        ] {
            if !(st.x.is_finite() && st.v.is_finite()) {
                return Err(Error::InvalidScenario(format!(
                    "{name}: non-finite initial state"
                )));
            }
            if st.v < 0.0 {
                return Err(Error::InvalidScenario(format!(
                    "{name}: negative initial speed {}",
                    st.v
                )));
            }
            if let Some(lim) = lim {
                if st.v < lim.v_min - 1e-12 || st.v > lim.v_max + 1e-12 {
                    return Err(Error::InvalidScenario(format!(
                        "{name}: initial speed {} outside [{}, {}]",
                        st.v, lim.v_min, lim.v_max
                    )));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidScenario(format!(
                "rho must lie in [0, 1], got {}",
                self.rho
            )));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if !(self.beta0 > 1.0) {
            return Err(Error::InvalidScenario(format!(
                "beta0 must exceed 1, got {}",
                self.beta0
            )));
        }
        if !(self.eps_margin >= 0.0) {
            return Err(Error::InvalidScenario(format!(
                "eps_margin must be >= 0, got {}",
                self.eps_margin
            )));
        }
        if let TerminalGapPolicy::Fixed { gap_c, gap_2 } = self.terminal_gaps {
            if !(gap_c >= 0.0 && gap_2 >= 0.0) {
                return Err(Error::InvalidScenario(format!(
                    "fixed terminal gaps must be >= 0, got gap_c={gap_c} gap_2={gap_2}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn benchmark_case_1() -> ScenarioConfig {
        ScenarioConfig::with_defaults(
            VehicleState::new(90.0, 13.0),
            VehicleState::new(50.0, 18.0),
            VehicleState::new(13.0, 10.0),
            VehicleState::new(100.0, 9.0),
        )
    }

    #[test]
    fn benchmark_defaults_validate() {
        benchmark_case_1().validate().unwrap();
    }

    #[test]
    fn unsafe_initial_target_lane_gap_is_rejected() {
        let mut cfg = benchmark_case_1();
        // d(18) = 1.8*18 + 5 = 37.4 > 30.
        cfg.state_2.x = 60.0;
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, Error::InvalidScenario(_)), "{err}");
    }

    #[test]
    fn unsafe_initial_gap_to_uncontrolled_vehicle_is_rejected_when_pinned() {
        let mut cfg = benchmark_case_1();
        cfg.safety.d_c_fixed = Some(30.0);
        cfg.state_c.x = 75.0; // gap to U = 25 < 30
        assert!(cfg.validate().is_err());
        cfg.state_c.x = 13.0; // gap 87 > 30
        cfg.validate().unwrap();
    }

    #[test]
    fn aggressiveness_outside_unit_interval_is_rejected() {
        let mut cfg = benchmark_case_1();
        cfg.alpha.c = 1.0;
        assert!(cfg.validate().is_err());
        cfg.alpha.c = -0.1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn initial_speed_outside_limits_is_rejected() {
        let mut cfg = benchmark_case_1();
        cfg.state_1.v = 0.5; // below v_min = 1
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn escalation_caps_at_the_ceiling() {
        let a = Aggressiveness::uniform(0.85).escalate(0.1, 0.9);
        assert_eq!(a.v1, 0.9);
        assert_eq!(a.v2, 0.9);
        assert_eq!(a.c, 0.9);
    }

    #[test]
    fn resolved_gap_prefers_the_fixed_override() {
        let mut cfg = benchmark_case_1();
        assert_eq!(cfg.resolved_d_c(), 1.8 * 10.0 + 5.0);
        cfg.safety.d_c_fixed = Some(30.0);
        assert_eq!(cfg.resolved_d_c(), 30.0);
    }
}
