//! Arc-length-domain rolling model driven by virtual-surface curvature
//! inputs.
//!
//! A fictitious surface sandwiched between the sphere and the plane carries
//! three curvature offsets (α_s, β_s, γ_s). Relative curvatures of the pair
//! define the angular velocity of the Darboux frame of the contact curve,
//! which maps to the sphere body angular velocity and, through the
//! time-domain contact equations, to a 5-state field over arc length. The
//! frame angles (θ, φ) are slaved to a desired plane heading, giving the
//! heading as an independent fourth input.

use serde::{Deserialize, Serialize};

use crate::diffgeo::{
    directional_curvature, plane_coordinate_curvatures, sphere_coordinate_curvatures,
    CurvatureTriple,
};
use crate::montana::{BodyAngularVelocity, ContactState, SphereGeometry, StateVector};
use crate::KinError;

/// |cos G_f| floor below which tan G_f is treated as singular.
pub const GOAL_TANGENT_TOL: f64 = 1e-9;

/// The three arc-length-domain control inputs: curvature offsets of the
/// virtual surface along the contact curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualSurfaceInputs {
    pub alpha_s: f64,
    pub beta_s: f64,
    pub gamma_s: f64,
}

impl VirtualSurfaceInputs {
    pub const ZERO: Self = Self {
        alpha_s: 0.0,
        beta_s: 0.0,
        gamma_s: 0.0,
    };

    pub fn new(alpha_s: f64, beta_s: f64, gamma_s: f64) -> Self {
        Self {
            alpha_s,
            beta_s,
            gamma_s,
        }
    }
}

/// Relative curvature and torsion of the sphere-plane pair along the contact
/// direction, with the virtual-surface offsets subtracted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeCurvature {
    pub kg_star: f64,
    pub kn_star: f64,
    pub taug_star: f64,
}

impl RelativeCurvature {
    pub fn new(kg_star: f64, kn_star: f64, taug_star: f64) -> Self {
        Self {
            kg_star,
            kn_star,
            taug_star,
        }
    }
}

/// Frame angles: θ between the sphere and plane induced tangent frames, and
/// φ between the sphere u-curve tangent and the Darboux tangent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameAngles {
    pub theta: f64,
    pub varphi: f64,
}

impl FrameAngles {
    pub fn new(theta: f64, varphi: f64) -> Self {
        Self { theta, varphi }
    }

    /// The combination θ + φ that enters every field component.
    pub fn total(&self) -> f64 {
        self.theta + self.varphi
    }
}

/// Desired heading of the contact path on the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalDirection {
    pub g_f: f64,
}

impl GoalDirection {
    pub fn new(g_f: f64) -> Self {
        Self { g_f }
    }
}

/// Rolling rate δ(t) = ds/dt schedule for time-domain runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RollingRateProfile {
    Constant { rate: f64 },
    /// Cosine ramp δ(t) = peak · ½(1 − cos(2πt/duration)); zero at both ends.
    RestToRest { peak: f64, duration: f64 },
}

impl RollingRateProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Self::Constant { rate } => rate,
            Self::RestToRest { peak, duration } => {
                0.5 * peak * (1.0 - (2.0 * std::f64::consts::PI * t / duration).cos())
            }
        }
    }
}

/// Angular velocity of the Darboux frame, components along its own basis
/// (tangent, tangent-normal, surface normal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarbouxAngularVelocity {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

impl DarbouxAngularVelocity {
    /// Speed of the contact point on a sphere of the given radius: the
    /// tangent-normal component times the radius.
    pub fn contact_speed(&self, radius: f64) -> f64 {
        self.e2 * radius
    }
}

/// Sphere curvature triple along the contact direction at angle `varphi`
/// from the sphere u-curve, in closed form.
pub fn sphere_direction_triple(geom: &SphereGeometry, v_o: f64, varphi: f64) -> CurvatureTriple {
    let (u_curve, v_curve) = sphere_coordinate_curvatures(geom.radius, v_o);
    directional_curvature(&u_curve, &v_curve, varphi)
}

/// Plane curvature triple along any direction: identically zero.
pub fn plane_direction_triple(theta_plus_varphi: f64) -> CurvatureTriple {
    let (u_curve, v_curve) = plane_coordinate_curvatures();
    directional_curvature(&u_curve, &v_curve, theta_plus_varphi)
}

/// Relative curvature of the pair along the contact direction: sphere minus
/// plane minus the virtual-surface offsets, component by component
/// (α_s off the geodesic curvature, γ_s off the normal curvature, β_s off
/// the geodesic torsion).
pub fn relative_curvature(
    sphere_dir: &CurvatureTriple,
    plane_dir: &CurvatureTriple,
    v: &VirtualSurfaceInputs,
) -> RelativeCurvature {
    RelativeCurvature {
        kg_star: sphere_dir.k_g - plane_dir.k_g - v.alpha_s,
        kn_star: sphere_dir.k_n - plane_dir.k_n - v.gamma_s,
        taug_star: sphere_dir.tau_g - plane_dir.tau_g - v.beta_s,
    }
}

/// Angular velocity of the Darboux frame: ω* = δ(−τ*_g, k*_n, −k*_g).
pub fn darboux_angular_velocity(rel: &RelativeCurvature, delta: f64) -> DarbouxAngularVelocity {
    DarbouxAngularVelocity {
        e1: -delta * rel.taug_star,
        e2: delta * rel.kn_star,
        e3: -delta * rel.kg_star,
    }
}

/// Sphere body angular velocity from the relative curvature:
///
/// ```text
/// ω_x = δ(−cos(θ+φ) τ*_g − sin(θ+φ) k*_n)
/// ω_y = δ(−sin(θ+φ) τ*_g + sin(θ+φ) k*_n)
/// ω_z = −δ k*_g
/// ```
///
/// ω_y carries sin(θ+φ) on both terms; the arc-length field below is the
/// exact image of this map through the time-domain contact equations, so the
/// two stay consistent by construction.
pub fn sphere_angular_velocity(
    rel: &RelativeCurvature,
    angles: &FrameAngles,
    delta: f64,
) -> BodyAngularVelocity {
    let (sin_t, cos_t) = angles.total().sin_cos();
    BodyAngularVelocity {
        wx: delta * (-cos_t * rel.taug_star - sin_t * rel.kn_star),
        wy: delta * (-sin_t * rel.taug_star + sin_t * rel.kn_star),
        wz: -delta * rel.kg_star,
    }
}

/// Input-independent drift column of the arc-length field.
pub fn drift_column(
    state: &ContactState,
    angles: &FrameAngles,
    geom: &SphereGeometry,
) -> StateVector {
    let r = geom.radius;
    let sin_t = angles.total().sin();
    let (sin_psi, cos_psi) = state.psi.sin_cos();
    let cos_v = state.v_o.cos();
    let tan_v = state.v_o.tan();
    StateVector::from([
        sin_t,
        sin_t,
        sin_t * (sin_psi - cos_psi) / (r * cos_v),
        sin_t * (cos_psi + sin_psi) / r,
        tan_v * (sin_t * (sin_psi - cos_psi) + angles.varphi.cos()) / r,
    ])
}

/// Column multiplying γ_s (the normal-curvature input).
pub fn gamma_column(
    state: &ContactState,
    angles: &FrameAngles,
    geom: &SphereGeometry,
) -> StateVector {
    let r = geom.radius;
    let sin_t = angles.total().sin();
    let (sin_psi, cos_psi) = state.psi.sin_cos();
    let cos_v = state.v_o.cos();
    let tan_v = state.v_o.tan();
    StateVector::from([
        -r * sin_t,
        -r * sin_t,
        sin_t * (cos_psi - sin_psi) / cos_v,
        -sin_t * (sin_psi + cos_psi),
        tan_v * sin_t * (cos_psi - sin_psi),
    ])
}

/// Column multiplying β_s (the geodesic-torsion input).
pub fn beta_column(
    state: &ContactState,
    angles: &FrameAngles,
    geom: &SphereGeometry,
) -> StateVector {
    let r = geom.radius;
    let total = angles.total();
    let (sin_t, cos_t) = total.sin_cos();
    let (sin_pt, cos_pt) = (state.psi + total).sin_cos();
    let cos_v = state.v_o.cos();
    let tan_v = state.v_o.tan();
    StateVector::from([
        r * sin_t,
        -r * cos_t,
        -sin_pt / cos_v,
        -cos_pt,
        -tan_v * sin_pt,
    ])
}

/// Column multiplying α_s (the geodesic-curvature input): pure spin.
pub fn alpha_column() -> StateVector {
    StateVector::from([0.0, 0.0, 0.0, 0.0, -1.0])
}

/// Arc-length derivative of the contact state: drift plus the three input
/// columns.
pub fn darboux_field(
    state: &ContactState,
    v: &VirtualSurfaceInputs,
    angles: &FrameAngles,
    geom: &SphereGeometry,
) -> Result<StateVector, KinError> {
    state.check_chart()?;
    Ok(drift_column(state, angles, geom)
        + v.gamma_s * gamma_column(state, angles, geom)
        + v.beta_s * beta_column(state, angles, geom)
        + v.alpha_s * alpha_column())
}

fn heading_cotangent(
    v: &VirtualSurfaceInputs,
    goal: &GoalDirection,
    geom: &SphereGeometry,
) -> Result<f64, KinError> {
    if v.beta_s == 0.0 {
        return Err(KinError::ZeroBeta);
    }
    if goal.g_f.cos().abs() < GOAL_TANGENT_TOL {
        return Err(KinError::GoalTangentSingularity { g_f: goal.g_f });
    }
    let tan_g = goal.g_f.tan();
    Ok(((1.0 - tan_g) / geom.radius + v.gamma_s * (tan_g - 1.0) - v.beta_s * tan_g) / v.beta_s)
}

/// Frame angles that keep the plane path of the arc-length field at the
/// heading `goal`:
///
/// θ + φ = arccot(ϱ) on the principal branch (0, π), with
/// ϱ = [(1/R)(1 − tan G_f) + γ_s(tan G_f − 1) − β_s tan G_f] / β_s,
/// and φ ∈ {0, π} by a case split on G_f (π on (−3π/4, π/4), 0 otherwise).
pub fn goal_angles(
    v: &VirtualSurfaceInputs,
    goal: &GoalDirection,
    geom: &SphereGeometry,
) -> Result<FrameAngles, KinError> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    let rho = heading_cotangent(v, goal, geom)?;
    let total = FRAC_PI_2 - rho.atan();
    let varphi = if goal.g_f > -3.0 * FRAC_PI_4 && goal.g_f < FRAC_PI_4 {
        PI
    } else {
        0.0
    };
    Ok(FrameAngles {
        theta: total - varphi,
        varphi,
    })
}

/// Recurrence-margin report: the heading cotangent ϱ must dominate 1 for the
/// frozen-angle assumption behind the bracket analysis to hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WppsReport {
    pub rho: f64,
    pub rho_squared: f64,
    pub passes: bool,
}

/// Default ϱ² threshold for [`wpps_report`].
pub const WPPS_DEFAULT_THRESHOLD: f64 = 100.0;

/// Evaluate ϱ and compare ϱ² against `threshold`.
pub fn wpps_report(
    v: &VirtualSurfaceInputs,
    goal: &GoalDirection,
    geom: &SphereGeometry,
    threshold: f64,
) -> Result<WppsReport, KinError> {
    let rho = heading_cotangent(v, goal, geom)?;
    let rho_squared = rho * rho;
    Ok(WppsReport {
        rho,
        rho_squared,
        passes: rho_squared > threshold,
    })
}
