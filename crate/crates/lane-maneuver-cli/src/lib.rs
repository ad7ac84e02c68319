//! Command-line harness around the [`lane_maneuver`] planner.
//!
//! The binary reads schema-versioned scenario files (TOML or JSON), runs the
//! full planning pipeline, and emits two machine-readable artifacts next to a
//! human-readable summary: a dense trajectory table (CSV, one row per sample
//! time) and a structured plan report (JSON) that carries the terminal
//! specification, per-vehicle solution structure, both energy conventions,
//! the safety-audit slacks, and an independent cross-check of every vehicle's
//! cost against the discrete-time verification solver.
//!
//! Everything testable lives in this library target; `main.rs` only parses
//! arguments and forwards to [`commands`].

pub mod commands;
pub mod oracle_check;
pub mod reference;
pub mod report;
pub mod scenario_file;
pub mod traj_io;
