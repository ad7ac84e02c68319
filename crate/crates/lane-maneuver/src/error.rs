//! Error types shared across the planning pipeline.

use thiserror::Error;

/// Everything that can go wrong while building or executing a plan.
///
/// Solver stages distinguish *infeasible problem data* (the caller may relax
/// the horizon and retry) from *domain errors* (the caller handed us
/// arguments outside an operation's documented domain).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scenario failed validation before any solving started.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// An operation was called outside its documented domain
    /// (e.g. a negative speed, or an evaluation time outside the horizon).
    #[error("domain error: {0}")]
    Domain(String),

    /// No maneuver horizon exists within the configured bound, even after
    /// the aggressiveness iteration.
    #[error(
        "maneuver aborted: no feasible horizon in (0, {t_max}] s after {alpha_rounds} \
         aggressiveness rounds"
    )]
    ManeuverAborted { t_max: f64, alpha_rounds: u32 },

    /// The terminal-position program has an empty feasible set at this
    /// horizon (for example, the uncontrolled vehicle caps the merging
    /// vehicle's position below what the trailing spacing requires).
    #[error("terminal positions infeasible at t_f = {t_f} s: {reason}")]
    TerminalInfeasible { t_f: f64, reason: String },

    /// The horizon-relaxation loop ran out of iterations or hit the horizon
    /// cap without reaching a reachable terminal specification.
    #[error(
        "horizon relaxation failed after {iterations} iterations \
         (t_f = {t_f} s, cap {t_max} s)"
    )]
    RelaxationFailed { iterations: u32, t_f: f64, t_max: f64 },

    /// No admissible control profile reaches the requested terminal position
    /// at the fixed horizon (signals an upstream terminal-spec error).
    #[error("no admissible control reaches x_f = {x_f} m at t_f = {t_f} s")]
    OcpInfeasible { x_f: f64, t_f: f64 },

    /// The constrained-arc decomposition found no feasible entry time.
    #[error("no feasible constrained-arc entry time in (0, t_f)")]
    ConstrainedInfeasible,

    /// The assembled plan failed its own post-hoc safety audit. The
    /// closed-form solvers guarantee every constraint, so this is reachable
    /// only through conflicting terminal overrides.
    #[error("assembled plan failed the safety audit: {constraint} slack {worst_slack:.6} m")]
    AuditFailed { constraint: String, worst_slack: f64 },

    /// The discrete-time verification problem is infeasible.
    #[error("oracle: transcribed problem is infeasible")]
    OracleInfeasible,

    /// The discrete-time verification solver hit its iteration cap.
    #[error("oracle: no convergence within {max_iter} iterations")]
    OracleNoConverge { max_iter: usize },
}
