//! On-disk scenario description.
//!
//! A scenario file is a schema-versioned document with two sections:
//!
//! * `scenario` — the problem itself, mirroring [`ScenarioConfig`] field by
//!   field in named-field notation. Only the four initial states are
//!   required; every other field falls back to the benchmark defaults of
//!   [`ScenarioConfig::with_defaults`].
//! * `overrides` — optional pins that bypass parts of the pipeline: a fixed
//!   maneuver horizon, fixed terminal positions, and/or a fixed constant
//!   spacing bound toward the uncontrolled vehicle. Pins exist to reproduce
//!   externally specified maneuvers literally; a pinned quantity is used as
//!   given and judged by the safety audit rather than re-optimized.
//!
//! All quantities are SI: meters, seconds, m/s, m/s². Files are parsed
//! strictly — unknown fields are rejected so a typo cannot silently fall
//! back to a default. TOML is detected by default; a `.json` extension
//! switches to JSON.

use std::fs;
use std::path::Path;

use lane_maneuver::scenario::{Aggressiveness, TerminalGapPolicy};
use lane_maneuver::{PlanOptions, ScenarioConfig, VehicleLimits, VehicleState};
use serde::Deserialize;

/// Schema revision this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Problems with the scenario file itself, as opposed to planning failures.
/// The command layer maps these onto the input-error exit code.
#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
    #[error("unsupported schema_version {found}; this build reads version {SCHEMA_VERSION}")]
    Version { found: u32 },
}

/// An initial kinematic state.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    /// Position (m).
    pub x: f64,
    /// Speed (m/s).
    pub v: f64,
}

impl From<StateSpec> for VehicleState {
    fn from(s: StateSpec) -> Self {
        VehicleState::new(s.x, s.v)
    }
}

/// Acceleration and speed box bounds.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSpec {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl From<LimitsSpec> for VehicleLimits {
    fn from(l: LimitsSpec) -> Self {
        VehicleLimits {
            u_min: l.u_min,
            u_max: l.u_max,
            v_min: l.v_min,
            v_max: l.v_max,
        }
    }
}

/// Aggressiveness for the minimal-horizon estimate: either one coefficient
/// for all three controlled vehicles (`alpha = 0.5`) or per-vehicle values
/// (`alpha = { v1 = 0.4, v2 = 0.5, c = 0.6 }`).
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Uniform(f64),
    PerVehicle { v1: f64, v2: f64, c: f64 },
}

impl From<AlphaSpec> for Aggressiveness {
    fn from(a: AlphaSpec) -> Self {
        match a {
            AlphaSpec::Uniform(v) => Aggressiveness::uniform(v),
            AlphaSpec::PerVehicle { v1, v2, c } => Aggressiveness { v1, v2, c },
        }
    }
}

/// Safe-distance model `d(v) = phi * v + delta`, with an optional constant
/// override for the bound toward the uncontrolled vehicle.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetySpec {
    pub phi: f64,
    pub delta: f64,
    #[serde(default)]
    pub d_c_fixed: Option<f64>,
}

/// Explicit terminal gap bounds. When the table is omitted the bounds are
/// derived from the safety model instead.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapsSpec {
    /// Bound on both `x_1f − x_Cf` and `x_U(t_f) − x_Cf` (m).
    pub gap_c: f64,
    /// Bound on `x_Cf − x_2f` (m).
    pub gap_2: f64,
}

/// The `scenario` section: [`ScenarioConfig`] in named-field notation.
///
/// `limits` applies to all three controlled vehicles; `limits_1`/`limits_2`/
/// `limits_c` override it per vehicle.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub state_1: StateSpec,
    pub state_2: StateSpec,
    pub state_c: StateSpec,
    pub state_u: StateSpec,
    #[serde(default)]
    pub limits: Option<LimitsSpec>,
    #[serde(default)]
    pub limits_1: Option<LimitsSpec>,
    #[serde(default)]
    pub limits_2: Option<LimitsSpec>,
    #[serde(default)]
    pub limits_c: Option<LimitsSpec>,
    #[serde(default)]
    pub alpha: Option<AlphaSpec>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub beta0: Option<f64>,
    #[serde(default)]
    pub safety: Option<SafetySpec>,
    #[serde(default)]
    pub eps_margin: Option<f64>,
    #[serde(default)]
    pub terminal_gaps: Option<GapsSpec>,
}

/// The `overrides` section: optional pins applied on top of the scenario.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Overrides {
    /// Fixed maneuver horizon (s); disables horizon relaxation.
    pub t_f: Option<f64>,
    /// Fixed terminal position of vehicle 1 (m).
    pub x_1f: Option<f64>,
    /// Fixed terminal position of vehicle 2 (m).
    pub x_2f: Option<f64>,
    /// Fixed terminal position of the merging vehicle (m).
    pub x_cf: Option<f64>,
    /// Fixed constant spacing bound toward the uncontrolled vehicle (m);
    /// replaces the headway-rule bound.
    pub d_c_fixed: Option<f64>,
}

/// A parsed scenario file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub overrides: Overrides,
}

impl ScenarioFile {
    /// Parses a scenario document from text. `json` selects the parser.
    pub fn from_str(text: &str, json: bool, path: &str) -> Result<Self, FileError> {
        let file: ScenarioFile = if json {
            serde_json::from_str(text).map_err(|e| FileError::Parse {
                path: path.to_string(),
                message: e.to_string(),
            })?
        } else {
            toml::from_str(text).map_err(|e| FileError::Parse {
                path: path.to_string(),
                message: e.to_string(),
            })?
        };
        if file.schema_version != SCHEMA_VERSION {
            return Err(FileError::Version {
                found: file.schema_version,
            });
        }
        Ok(file)
    }

    /// Reads and parses a scenario file, choosing the parser from the
    /// extension (`.json` → JSON, everything else → TOML).
    pub fn load(path: &Path) -> Result<Self, FileError> {
        let text = fs::read_to_string(path).map_err(|source| FileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::from_str(&text, json, &path.display().to_string())
    }

    /// Resolves the file into a planner configuration and the pinning
    /// options. The audit sample count is a command-line concern and is left
    /// at its default.
    pub fn into_parts(self) -> (ScenarioConfig, PlanOptions) {
        let s = self.scenario;
        let mut cfg = ScenarioConfig::with_defaults(
            s.state_1.into(),
            s.state_2.into(),
            s.state_c.into(),
            s.state_u.into(),
        );
        if let Some(shared) = s.limits {
            cfg.limits_1 = shared.into();
            cfg.limits_2 = shared.into();
            cfg.limits_c = shared.into();
        }
        if let Some(l) = s.limits_1 {
            cfg.limits_1 = l.into();
        }
        if let Some(l) = s.limits_2 {
            cfg.limits_2 = l.into();
        }
        if let Some(l) = s.limits_c {
            cfg.limits_c = l.into();
        }
        if let Some(a) = s.alpha {
            cfg.alpha = a.into();
        }
        if let Some(rho) = s.rho {
            cfg.rho = rho;
        }
        if let Some(t_max) = s.t_max {
            cfg.t_max = t_max;
        }
        if let Some(beta0) = s.beta0 {
            cfg.beta0 = beta0;
        }
        if let Some(sf) = s.safety {
            cfg.safety.phi = sf.phi;
            cfg.safety.delta = sf.delta;
            cfg.safety.d_c_fixed = sf.d_c_fixed;
        }
        if let Some(eps) = s.eps_margin {
            cfg.eps_margin = eps;
        }
        if let Some(g) = s.terminal_gaps {
            cfg.terminal_gaps = TerminalGapPolicy::Fixed {
                gap_c: g.gap_c,
                gap_2: g.gap_2,
            };
        }
        if let Some(d) = self.overrides.d_c_fixed {
            cfg.safety.d_c_fixed = Some(d);
        }
        let opts = PlanOptions {
            t_f: self.overrides.t_f,
            x_1f: self.overrides.x_1f,
            x_2f: self.overrides.x_2f,
            x_cf: self.overrides.x_cf,
            ..PlanOptions::default()
        };
        (cfg, opts)
    }
}
