use thiserror::Error;

/// Errors shared across the kinematics modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinError {
    /// The chart metric is degenerate (EG - F^2 below tolerance).
    #[error("degenerate chart at (u={u}, v={v}): EG - F^2 = {metric_det}")]
    DegenerateChart { u: f64, v: f64, metric_det: f64 },

    /// Coordinate-curve curvature formulas require an orthogonal chart (F = 0).
    #[error("non-orthogonal chart at (u={u}, v={v}): F = {f}")]
    NonOrthogonalChart { u: f64, v: f64, f: f64 },

    /// Sphere coordinates degenerate near v_o = ±π/2.
    #[error("chart singularity: v_o = {v_o} too close to ±π/2")]
    ChartSingularity { v_o: f64 },

    /// The plane heading is too close to ±π/2 for its tangent to be finite.
    #[error("goal tangent singularity: heading {g_f} too close to ±π/2")]
    GoalTangentSingularity { g_f: f64 },

    /// The relative-torsion input β_s is zero; the goal-angle constraint
    /// and the full-rank input span both require it to be nonzero.
    #[error("beta_s must be nonzero")]
    ZeroBeta,

    /// A single integration step moved the state by more than the rejection bound.
    #[error("step too large at s={s}: max state change {change} rad")]
    StepTooLarge { s: f64, change: f64 },

    /// Scenario validation failure.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}
