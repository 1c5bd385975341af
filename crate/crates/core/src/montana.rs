//! Time-domain contact kinematics of a sphere rolling on a plane, driven by
//! the body angular velocity at the contact. Includes the constrained
//! two-input variant that slaves ω_x to a fixed plane heading.

use nalgebra::SVector;
use serde::{Deserialize, Serialize};

use crate::darboux::GoalDirection;
use crate::KinError;

/// 5-vector of contact-coordinate rates, ordered (u_s, v_s, u_o, v_o, ψ).
pub type StateVector = SVector<f64, 5>;

/// |cos v_o| floor below which the sphere chart is treated as singular.
pub const CHART_SINGULARITY_TOL: f64 = 1e-6;

/// Contact coordinates of the sphere-plane pair: the plane contact point
/// (u_s, v_s), the sphere contact point (u_o longitude, v_o latitude) and the
/// spin angle ψ between the two contact frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactState {
    pub u_s: f64,
    pub v_s: f64,
    pub u_o: f64,
    pub v_o: f64,
    pub psi: f64,
}

impl ContactState {
    pub fn new(u_s: f64, v_s: f64, u_o: f64, v_o: f64, psi: f64) -> Self {
        Self {
            u_s,
            v_s,
            u_o,
            v_o,
            psi,
        }
    }

    pub fn from_vector(x: &StateVector) -> Self {
        Self::new(x[0], x[1], x[2], x[3], x[4])
    }

    pub fn to_vector(self) -> StateVector {
        StateVector::from([self.u_s, self.v_s, self.u_o, self.v_o, self.psi])
    }

    /// Copy with u_o and ψ wrapped to (−π, π]. Used only when recording
    /// samples; derivative evaluation always sees unwrapped angles.
    pub fn wrapped(self) -> Self {
        Self {
            u_o: wrap_angle(self.u_o),
            psi: wrap_angle(self.psi),
            ..self
        }
    }

    /// Latitude must stay away from ±π/2 for tan v_o and 1/cos v_o to be usable.
    pub fn check_chart(&self) -> Result<(), KinError> {
        if self.v_o.cos().abs() < CHART_SINGULARITY_TOL {
            Err(KinError::ChartSingularity { v_o: self.v_o })
        } else {
            Ok(())
        }
    }
}

/// Wrap an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Angular velocity of the sphere expressed in its contact frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyAngularVelocity {
    pub wx: f64,
    pub wy: f64,
    pub wz: f64,
}

impl BodyAngularVelocity {
    pub fn new(wx: f64, wy: f64, wz: f64) -> Self {
        Self { wx, wy, wz }
    }
}

/// Sphere radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereGeometry {
    pub radius: f64,
}

impl SphereGeometry {
    pub fn new(radius: f64) -> Self {
        assert!(radius > 0.0, "sphere radius must be positive");
        Self { radius }
    }
}

/// Time derivative of the contact state under a given body angular velocity.
pub fn montana_field(
    state: &ContactState,
    omega: &BodyAngularVelocity,
    geom: &SphereGeometry,
) -> Result<StateVector, KinError> {
    state.check_chart()?;
    let r = geom.radius;
    let (sin_psi, cos_psi) = state.psi.sin_cos();
    let cos_v = state.v_o.cos();
    let tan_v = state.v_o.tan();
    let mix = sin_psi * omega.wx + cos_psi * omega.wy;
    Ok(StateVector::from([
        r * omega.wy,
        -r * omega.wx,
        -mix / cos_v,
        -cos_psi * omega.wx + sin_psi * omega.wy,
        -tan_v * mix - omega.wz,
    ]))
}

/// Two-input variant: ω_x is slaved to the plane heading `goal` through
/// ω_x = −ω_y tan G_f, so the plane path direction is fixed while only
/// (ω_y, ω_z) remain free. With three sphere coordinates left to steer this
/// demonstrates the underactuation of heading-constrained time-domain control.
pub fn constrained_montana_field(
    state: &ContactState,
    wy: f64,
    wz: f64,
    goal: &GoalDirection,
    geom: &SphereGeometry,
) -> Result<StateVector, KinError> {
    let g_f = goal.g_f;
    if g_f.cos().abs() < CHART_SINGULARITY_TOL {
        return Err(KinError::GoalTangentSingularity { g_f });
    }
    let omega = BodyAngularVelocity::new(-wy * g_f.tan(), wy, wz);
    montana_field(state, &omega, geom)
}
