//! Vehicle-level domain types: kinematic state, actuation limits, and the
//! affine safe-distance model.

use crate::error::Error;
use crate::Result;

/// Longitudinal state of one vehicle at an instant: position `x` (m) along
/// the lane and speed `v` (m/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    /// Position along the lane (m).
    pub x: f64,
    /// Speed (m/s); non-negative in every audited trajectory sample.
    pub v: f64,
}

impl VehicleState {
    /// Convenience constructor.
    #[inline]
    pub fn new(x: f64, v: f64) -> Self {
        Self { x, v }
    }

    /// Position after coasting (zero acceleration) for `dt` seconds.
    #[inline]
    pub fn coast_position(&self, dt: f64) -> f64 {
        self.x + self.v * dt
    }
}

/// Box bounds on a vehicle's acceleration and speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleLimits {
    /// Strongest deceleration (m/s², strictly negative).
    pub u_min: f64,
    /// Strongest acceleration (m/s², strictly positive).
    pub u_max: f64,
    /// Minimum speed (m/s, ≥ 0).
    pub v_min: f64,
    /// Maximum speed (m/s, > v_min).
    pub v_max: f64,
}

impl VehicleLimits {
    /// Validates the sign and ordering invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.u_min < 0.0 && 0.0 < self.u_max) {
            return Err(Error::InvalidScenario(format!(
                "acceleration bounds must satisfy u_min < 0 < u_max, got [{}, {}]",
                self.u_min, self.u_max
            )));
        }
        if !(0.0 <= self.v_min && self.v_min < self.v_max) {
            return Err(Error::InvalidScenario(format!(
                "speed bounds must satisfy 0 <= v_min < v_max, got [{}, {}]",
                self.v_min, self.v_max
            )));
        }
        if ![self.u_min, self.u_max, self.v_min, self.v_max]
            .iter()
            .all(|z| z.is_finite())
        {
            return Err(Error::InvalidScenario("non-finite vehicle limit".into()));
        }
        Ok(())
    }

    /// Clamps a speed into `[v_min, v_max]`.
    #[inline]
    pub fn clamp_speed(&self, v: f64) -> f64 {
        v.clamp(self.v_min, self.v_max)
    }

    /// True when `u` lies inside the acceleration box (with tolerance).
    #[inline]
    pub fn admits_control(&self, u: f64, tol: f64) -> bool {
        u >= self.u_min - tol && u <= self.u_max + tol
    }
}

/// Affine safe-distance rule toward the vehicle ahead, plus the optional
/// constant bound used for the merging vehicle against the uncontrolled one.
///
/// The running rule is `d(v) = phi * v + delta`: `phi` is the headway time
/// (the common street rule is 1.8 s) and `delta` the standstill gap. For the
/// merging vehicle the planner replaces the speed-dependent rule by a single
/// conservative constant `d_C`; `d_c_fixed` pins that constant explicitly,
/// otherwise it is derived from the rule at the relevant extreme speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyModel {
    /// Headway time (s), ≥ 0.
    pub phi: f64,
    /// Standstill gap (m), ≥ 0.
    pub delta: f64,
    /// Optional constant gap (m) for the merging vehicle against the
    /// uncontrolled vehicle; overrides the derived value when present.
    pub d_c_fixed: Option<f64>,
}

impl SafetyModel {
    /// Validates non-negativity (which also makes `d(v)` nondecreasing).
    pub fn validate(&self) -> Result<()> {
        if !(self.phi >= 0.0 && self.delta >= 0.0) {
            return Err(Error::InvalidScenario(format!(
                "safety model needs phi >= 0 and delta >= 0, got phi={} delta={}",
                self.phi, self.delta
            )));
        }
        if let Some(d) = self.d_c_fixed {
            if !(d >= 0.0) {
                return Err(Error::InvalidScenario(format!(
                    "fixed merging-vehicle gap must be >= 0, got {d}"
                )));
            }
        }
        Ok(())
    }
}

/// Minimum safe gap (m) toward the vehicle ahead at speed `v`.
///
/// Errors on negative speed: the rule is only meaningful for forward travel.
pub fn safe_distance(v: f64, model: &SafetyModel) -> Result<f64> {
    if v < 0.0 || !v.is_finite() {
        return Err(Error::Domain(format!(
            "safe_distance needs a finite non-negative speed, got {v}"
        )));
    }
    Ok(model.phi * v + model.delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> SafetyModel {
        SafetyModel {
            phi: 1.8,
            delta: 5.0,
            d_c_fixed: None,
        }
    }

    #[test]
    fn safe_distance_at_standstill_is_the_standstill_gap() {
        assert_eq!(safe_distance(0.0, &model()).unwrap(), 5.0);
    }

    #[test]
    fn safe_distance_is_affine_in_speed() {
        assert_eq!(safe_distance(10.0, &model()).unwrap(), 23.0);
    }

    #[test]
    fn safe_distance_near_50_kmh_matches_a_30_m_gap() {
        // 13.888... m/s is ~50 km/h; the affine rule lands within a
        // millimeter of the 30 m constant used in the benchmark scenarios.
        let d = safe_distance(13.888, &model()).unwrap();
        assert!((d - 30.0).abs() < 2e-3, "d = {d}");
    }

    #[test]
    fn safe_distance_rejects_negative_speed() {
        assert!(matches!(
            safe_distance(-1.0, &model()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn safe_distance_is_monotone_in_speed() {
        let m = model();
        let mut prev = safe_distance(0.0, &m).unwrap();
        for k in 1..100 {
            let d = safe_distance(k as f64 * 0.37, &m).unwrap();
            assert!(d >= prev);
            prev = d;
        }
    }

    #[test]
    fn limits_validation_catches_bad_orderings() {
        let good = VehicleLimits {
            u_min: -7.0,
            u_max: 3.3,
            v_min: 1.0,
            v_max: 33.0,
        };
        assert!(good.validate().is_ok());
        let bad = VehicleLimits { u_min: 0.5, ..good };
        assert!(bad.validate().is_err());
        let bad = VehicleLimits {
            v_min: 40.0,
            ..good
        };
        assert!(bad.validate().is_err());
    }
}
