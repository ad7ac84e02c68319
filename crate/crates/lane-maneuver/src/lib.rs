//! Longitudinal planning for a cooperative highway lane-change maneuver.
//!
//! Three connected, automated vehicles cooperate so that a merging vehicle
//! `C` can move from its own lane into the gap between a leading vehicle `1`
//! and a trailing vehicle `2` in the target lane, while an uncontrolled
//! vehicle `U` cruises ahead of `C` at constant speed. Every controlled
//! vehicle is modeled as a double integrator (position `x`, speed `v`,
//! acceleration input `u`) with box bounds on `u` and `v` and an affine
//! safe-distance rule `d(v) = phi * v + delta` toward the vehicle ahead.
//!
//! Planning runs as a pipeline of small, independently testable stages:
//!
//! 1. [`terminal::min_terminal_time`] sizes the maneuver horizon `t_f` from
//!    the initial states and per-vehicle aggressiveness levels.
//! 2. [`terminal::terminal_positions`] picks terminal positions that deviate
//!    least (in squared distance) from the zero-effort coast positions,
//!    subject to the terminal spacing requirements — a 3-variable convex QP
//!    solved exactly by active-set enumeration.
//! 3. [`feasibility`] classifies each `(x_f, t_f)` pair against the
//!    closed-form reachability envelopes and relaxes the horizon
//!    geometrically until every vehicle's target is reachable.
//! 4. [`ocp`] solves each vehicle's fixed-horizon minimum-energy problem in
//!    closed form (piecewise constant/affine optimal control).
//! 5. [`planner`] handles vehicle `C`, whose safety constraint against `U`
//!    may become active: it classifies the maneuver geometry, reuses the
//!    unconstrained solvers when the constraint is provably inactive, and
//!    otherwise splits the problem at the constrained-arc entry point and
//!    optimizes the split location.
//! 6. [`audit`] re-checks every constraint on the assembled plan, and
//!    [`oracle`] independently re-solves each vehicle's problem as a
//!    discrete-time QP to cross-validate the closed-form costs.
//!
//! All quantities are SI (meters, seconds, m/s, m/s²). Every type is an
//! immutable value after construction and every operation is a pure
//! function, so the API is thread-safe by construction.

pub mod audit;
pub mod error;
pub mod feasibility;
pub mod ocp;
pub mod oracle;
pub mod pipeline;
pub mod planner;
pub mod scenario;
pub mod search;
pub mod terminal;
pub mod trajectory;
pub mod vehicle;

pub use error::Error;
pub use pipeline::{plan_maneuver, plan_with_audit, ManeuverPlan, PlanOptions};
pub use scenario::ScenarioConfig;
pub use vehicle::{SafetyModel, VehicleLimits, VehicleState};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
