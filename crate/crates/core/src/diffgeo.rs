//! Differential geometry of parametric surfaces.
//!
//! A [`SurfaceChart`] is a twice numerically differentiable map
//! (u, v) → R^3. All derivatives are taken by central differences, so any
//! chart evaluable at interior points works; the sphere and plane fixtures
//! used by the rolling-contact models are provided as constructors together
//! with their closed-form curvature sextets for cross-checking.

use std::sync::Arc;

use nalgebra::Vector3;

use crate::KinError;

/// Default finite-difference step as a fraction of the coordinate span.
pub const DEFAULT_FD_SCALE: f64 = 1e-5;
/// Regularity floor for EG - F^2.
pub const REGULARITY_TOL: f64 = 1e-12;
/// |F| bound under which a chart counts as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

type ChartMap = Arc<dyn Fn(f64, f64) -> Vector3<f64> + Send + Sync>;

/// A regular parametric chart of a surface in 3-space.
#[derive(Clone)]
pub struct SurfaceChart {
    map: ChartMap,
    u_range: (f64, f64),
    v_range: (f64, f64),
    /// Flip the r_u × r_v normal. The rolling-contact convention orients the
    /// surface normal along the shared contact normal, which for the sphere
    /// chart is opposite to the cross product of the coordinate tangents.
    flip_normal: bool,
}

impl SurfaceChart {
    pub fn new<F>(map: F, u_range: (f64, f64), v_range: (f64, f64)) -> Self
    where
        F: Fn(f64, f64) -> Vector3<f64> + Send + Sync + 'static,
    {
        Self {
            map: Arc::new(map),
            u_range,
            v_range,
            flip_normal: false,
        }
    }

    pub fn with_flipped_normal(mut self) -> Self {
        self.flip_normal = true;
        self
    }

    /// Sphere of the given radius, charted by longitude u and latitude v:
    /// (u, v) → (-R sin u cos v, R sin v, -R cos u cos v).
    ///
    /// The normal is flipped so the normal curvature along both coordinate
    /// curves comes out +1/R, matching the contact-frame orientation.
    pub fn sphere(radius: f64) -> Self {
        Self::new(
            move |u, v| {
                Vector3::new(
                    -radius * u.sin() * v.cos(),
                    radius * v.sin(),
                    -radius * u.cos() * v.cos(),
                )
            },
            (-std::f64::consts::PI, std::f64::consts::PI),
            (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
        )
        .with_flipped_normal()
    }

    /// The contact plane, charted by Cartesian coordinates: (u, v) → (u, v, 0).
    pub fn plane() -> Self {
        Self::new(
            |u, v| Vector3::new(u, v, 0.0),
            (-1e3, 1e3),
            (-1e3, 1e3),
        )
    }

    pub fn point(&self, u: f64, v: f64) -> Vector3<f64> {
        (self.map)(u, v)
    }

    pub fn u_range(&self) -> (f64, f64) {
        self.u_range
    }

    pub fn v_range(&self) -> (f64, f64) {
        self.v_range
    }

    fn steps(&self, scale: f64) -> (f64, f64) {
        let hu = scale * (self.u_range.1 - self.u_range.0);
        let hv = scale * (self.v_range.1 - self.v_range.0);
        (hu, hv)
    }

    /// First and second partials of the chart map by central differences.
    pub fn partials(&self, u: f64, v: f64, scale: f64) -> ChartPartials {
        let (hu, hv) = self.steps(scale);
        let f = |u, v| self.point(u, v);
        let r = f(u, v);
        let r_u = (f(u + hu, v) - f(u - hu, v)) / (2.0 * hu);
        let r_v = (f(u, v + hv) - f(u, v - hv)) / (2.0 * hv);
        let r_uu = (f(u + hu, v) - 2.0 * r + f(u - hu, v)) / (hu * hu);
        let r_vv = (f(u, v + hv) - 2.0 * r + f(u, v - hv)) / (hv * hv);
        let r_uv = (f(u + hu, v + hv) - f(u + hu, v - hv) - f(u - hu, v + hv)
            + f(u - hu, v - hv))
            / (4.0 * hu * hv);
        ChartPartials {
            r_u,
            r_v,
            r_uu,
            r_uv,
            r_vv,
            normal_sign: if self.flip_normal { -1.0 } else { 1.0 },
        }
    }
}

impl std::fmt::Debug for SurfaceChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurfaceChart")
            .field("u_range", &self.u_range)
            .field("v_range", &self.v_range)
            .field("flip_normal", &self.flip_normal)
            .finish()
    }
}

/// Chart derivatives at a point, as produced by [`SurfaceChart::partials`].
#[derive(Debug, Clone)]
pub struct ChartPartials {
    pub r_u: Vector3<f64>,
    pub r_v: Vector3<f64>,
    pub r_uu: Vector3<f64>,
    pub r_uv: Vector3<f64>,
    pub r_vv: Vector3<f64>,
    normal_sign: f64,
}

impl ChartPartials {
    /// Oriented unit normal.
    pub fn normal(&self) -> Vector3<f64> {
        let n = self.r_u.cross(&self.r_v);
        self.normal_sign * n / n.norm()
    }
}

/// First- and second-fundamental-form coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
}

impl FundamentalForms {
    pub fn metric_det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }
}

/// Christoffel symbols and Weingarten-map coefficients of a chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussWeingarten {
    pub gamma1_11: f64,
    pub gamma2_11: f64,
    pub gamma1_12: f64,
    pub gamma2_12: f64,
    pub gamma1_22: f64,
    pub gamma2_22: f64,
    pub w1_1: f64,
    pub w2_1: f64,
    pub w1_2: f64,
    pub w2_2: f64,
}

/// Geodesic curvature, normal curvature and geodesic torsion of a surface
/// along a tangent direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureTriple {
    pub k_g: f64,
    pub k_n: f64,
    pub tau_g: f64,
}

impl CurvatureTriple {
    pub const ZERO: Self = Self {
        k_g: 0.0,
        k_n: 0.0,
        tau_g: 0.0,
    };

    pub fn new(k_g: f64, k_n: f64, tau_g: f64) -> Self {
        Self { k_g, k_n, tau_g }
    }
}

fn forms_from_partials(p: &ChartPartials, u: f64, v: f64) -> Result<FundamentalForms, KinError> {
    let e = p.r_u.dot(&p.r_u);
    let f = p.r_u.dot(&p.r_v);
    let g = p.r_v.dot(&p.r_v);
    let det = e * g - f * f;
    if det <= REGULARITY_TOL {
        return Err(KinError::DegenerateChart {
            u,
            v,
            metric_det: det,
        });
    }
    let normal = p.normal();
    Ok(FundamentalForms {
        e,
        f,
        g,
        l: p.r_uu.dot(&normal),
        m: p.r_uv.dot(&normal),
        n: p.r_vv.dot(&normal),
    })
}

/// Fundamental forms at an interior point, default step.
pub fn fundamental_forms(
    chart: &SurfaceChart,
    u: f64,
    v: f64,
) -> Result<FundamentalForms, KinError> {
    fundamental_forms_with_step(chart, u, v, DEFAULT_FD_SCALE)
}

pub fn fundamental_forms_with_step(
    chart: &SurfaceChart,
    u: f64,
    v: f64,
    scale: f64,
) -> Result<FundamentalForms, KinError> {
    let p = chart.partials(u, v, scale);
    forms_from_partials(&p, u, v)
}

/// Gauss equation Christoffel symbols and Weingarten coefficients.
///
/// The metric partials are assembled from chart second partials
/// (E_u = 2 r_u · r_uu and so on) rather than by differencing the forms a
/// second time, which keeps one finite-difference level in every coefficient.
pub fn gauss_weingarten(
    chart: &SurfaceChart,
    u: f64,
    v: f64,
) -> Result<GaussWeingarten, KinError> {
    gauss_weingarten_with_step(chart, u, v, DEFAULT_FD_SCALE)
}

pub fn gauss_weingarten_with_step(
    chart: &SurfaceChart,
    u: f64,
    v: f64,
    scale: f64,
) -> Result<GaussWeingarten, KinError> {
    let p = chart.partials(u, v, scale);
    let forms = forms_from_partials(&p, u, v)?;
    let FundamentalForms { e, f, g, l, m, n } = forms;
    let e_u = 2.0 * p.r_u.dot(&p.r_uu);
    let e_v = 2.0 * p.r_u.dot(&p.r_uv);
    let f_u = p.r_uu.dot(&p.r_v) + p.r_u.dot(&p.r_uv);
    let f_v = p.r_uv.dot(&p.r_v) + p.r_u.dot(&p.r_vv);
    let g_u = 2.0 * p.r_v.dot(&p.r_uv);
    let g_v = 2.0 * p.r_v.dot(&p.r_vv);
    let det = forms.metric_det();
    let d2 = 2.0 * det;
    Ok(GaussWeingarten {
        gamma1_11: (g * e_u - 2.0 * f * f_u + f * e_v) / d2,
        gamma2_11: (2.0 * e * f_u - e * e_v + f * e_u) / d2,
        gamma1_12: (g * e_v - f * g_u) / d2,
        gamma2_12: (e * g_u - f * e_v) / d2,
        gamma1_22: (2.0 * g * f_v - 2.0 * g * g_u - f * g_v) / d2,
        gamma2_22: (e * g_v - 2.0 * f * f_v + f * g_u) / d2,
        w1_1: (m * f - l * g) / det,
        w2_1: (l * f - m * e) / det,
        w1_2: (n * f - m * g) / det,
        w2_2: (m * f - n * e) / det,
    })
}

/// Curvature triples along the u- and v-coordinate curves of an orthogonal
/// chart. The v-curve values follow the (e_v, -e_u, e_3) frame convention.
pub fn coordinate_curvatures(
    chart: &SurfaceChart,
    u: f64,
    v: f64,
) -> Result<(CurvatureTriple, CurvatureTriple), KinError> {
    coordinate_curvatures_with_step(chart, u, v, DEFAULT_FD_SCALE)
}

pub fn coordinate_curvatures_with_step(
    chart: &SurfaceChart,
    u: f64,
    v: f64,
    scale: f64,
) -> Result<(CurvatureTriple, CurvatureTriple), KinError> {
    let p = chart.partials(u, v, scale);
    let forms = forms_from_partials(&p, u, v)?;
    if forms.f.abs() >= ORTHOGONALITY_TOL {
        return Err(KinError::NonOrthogonalChart { u, v, f: forms.f });
    }
    let FundamentalForms { e, g, l, m, n, .. } = forms;
    let e_v = 2.0 * p.r_u.dot(&p.r_uv);
    let g_u = 2.0 * p.r_v.dot(&p.r_uv);
    let sqrt_eg = (e * g).sqrt();
    let u_curve = CurvatureTriple {
        k_g: -e_v / (2.0 * e * g.sqrt()),
        k_n: l / e,
        tau_g: m / sqrt_eg,
    };
    let v_curve = CurvatureTriple {
        k_g: g_u / (2.0 * g * e.sqrt()),
        k_n: n / g,
        tau_g: -m / sqrt_eg,
    };
    Ok((u_curve, v_curve))
}

/// Curvature triple in the tangent direction at angle `phi` from the u-curve.
pub fn directional_curvature(
    u_curve: &CurvatureTriple,
    v_curve: &CurvatureTriple,
    phi: f64,
) -> CurvatureTriple {
    let (sin, cos) = phi.sin_cos();
    CurvatureTriple {
        k_n: u_curve.k_n * cos * cos + 2.0 * u_curve.tau_g * cos * sin + v_curve.k_n * sin * sin,
        tau_g: u_curve.tau_g * (2.0 * phi).cos()
            + 0.5 * (v_curve.k_n - u_curve.k_n) * (2.0 * phi).sin(),
        k_g: u_curve.k_g * cos + v_curve.k_g * sin,
    }
}

/// Closed-form coordinate-curve curvatures of the sphere chart at latitude `v_o`.
pub fn sphere_coordinate_curvatures(radius: f64, v_o: f64) -> (CurvatureTriple, CurvatureTriple) {
    let u_curve = CurvatureTriple {
        k_g: v_o.tan() / radius,
        k_n: 1.0 / radius,
        tau_g: 0.0,
    };
    let v_curve = CurvatureTriple {
        k_g: 0.0,
        k_n: 1.0 / radius,
        tau_g: 0.0,
    };
    (u_curve, v_curve)
}

/// Coordinate-curve curvatures of the plane: identically zero.
pub fn plane_coordinate_curvatures() -> (CurvatureTriple, CurvatureTriple) {
    (CurvatureTriple::ZERO, CurvatureTriple::ZERO)
}
