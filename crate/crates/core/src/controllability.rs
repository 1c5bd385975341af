//! Lie-bracket diagnostics of the arc-length rolling model: drift divergence,
//! bracket columns in closed form and by finite differences, span ranks, the
//! closed-form determinant of the five-column bracket matrix, singularity
//! loci, and the rank collapse when the torsion input is removed.
//!
//! Throughout this module the frame angles (θ, φ) are frozen constants of
//! each field; they are not differentiated. The heading-cotangent margin
//! reported by [`crate::darboux::wpps_report`] is the user-facing gate for
//! that assumption.

use std::sync::Arc;

use nalgebra::{Matrix5, SMatrix};
use serde::{Deserialize, Serialize};

use crate::darboux::{alpha_column, beta_column, drift_column, gamma_column, FrameAngles};
use crate::montana::{ContactState, SphereGeometry, StateVector};
use crate::KinError;

/// Default finite-difference step for single-level brackets.
pub const DEFAULT_BRACKET_STEP: f64 = 1e-6;
/// Step for nested brackets, where differencing a differenced field amplifies
/// rounding noise and a larger step is needed.
pub const NESTED_BRACKET_STEP: f64 = 1e-4;
/// Singular-value ratio below which a direction does not count toward rank.
pub const RANK_TOL: f64 = 1e-9;
/// |factor| bound for flagging a determinant factor as vanished on a grid.
pub const SINGULARITY_TOL: f64 = 1e-9;

/// A state-dependent 5-vector field with all parameters frozen.
#[derive(Clone)]
pub struct VectorField5(
    Arc<dyn Fn(&ContactState) -> Result<StateVector, KinError> + Send + Sync>,
);

impl VectorField5 {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&ContactState) -> Result<StateVector, KinError> + Send + Sync + 'static,
    {
        Self(Arc::new(f))
    }

    pub fn eval(&self, state: &ContactState) -> Result<StateVector, KinError> {
        (self.0)(state)
    }
}

impl std::fmt::Debug for VectorField5 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("VectorField5")
    }
}

/// The drift field and the three input fields of the arc-length model, with
/// the frame angles frozen.
#[derive(Debug, Clone)]
pub struct ModelFields {
    /// Drift: present even with all inputs zero.
    pub f: VectorField5,
    /// Normal-curvature input column (γ_s).
    pub g1: VectorField5,
    /// Torsion input column (β_s).
    pub g2: VectorField5,
    /// Spin input column (α_s): constant (0, 0, 0, 0, −1).
    pub g3: VectorField5,
}

pub fn model_fields(angles: &FrameAngles, geom: &SphereGeometry) -> ModelFields {
    let (a, g) = (*angles, *geom);
    ModelFields {
        f: VectorField5::new(move |x| {
            x.check_chart()?;
            Ok(drift_column(x, &a, &g))
        }),
        g1: VectorField5::new(move |x| {
            x.check_chart()?;
            Ok(gamma_column(x, &a, &g))
        }),
        g2: VectorField5::new(move |x| {
            x.check_chart()?;
            Ok(beta_column(x, &a, &g))
        }),
        g3: VectorField5::new(|_| Ok(alpha_column())),
    }
}

fn jacobian(
    field: &VectorField5,
    at: &ContactState,
    h: f64,
) -> Result<SMatrix<f64, 5, 5>, KinError> {
    let mut j = SMatrix::<f64, 5, 5>::zeros();
    let x0 = at.to_vector();
    for i in 0..5 {
        let mut xp = x0;
        let mut xm = x0;
        xp[i] += h;
        xm[i] -= h;
        let fp = field.eval(&ContactState::from_vector(&xp))?;
        let fm = field.eval(&ContactState::from_vector(&xm))?;
        j.set_column(i, &((fp - fm) / (2.0 * h)));
    }
    Ok(j)
}

/// Bracket of two fields at a state: J_a·b − J_b·a with central-difference
/// Jacobians of step `h`. The sign convention is fixed so that the bracket of
/// the drift with the constant spin field equals minus the ψ-derivative of
/// the drift, matching the closed forms in [`closed_form_brackets`].
pub fn lie_bracket(
    a: &VectorField5,
    b: &VectorField5,
    at: &ContactState,
    h: f64,
) -> Result<StateVector, KinError> {
    let ja = jacobian(a, at, h)?;
    let jb = jacobian(b, at, h)?;
    Ok(ja * b.eval(at)? - jb * a.eval(at)?)
}

/// The bracket of two fields as a field, for nesting.
pub fn lie_bracket_field(a: &VectorField5, b: &VectorField5, h: f64) -> VectorField5 {
    let (a, b) = (a.clone(), b.clone());
    VectorField5::new(move |x| lie_bracket(&a, &b, x, h))
}

/// The two bracket columns of the rank analysis in closed form: the bracket
/// of the drift with the spin field, and that bracket iterated against the
/// spin field once more.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormBrackets {
    /// [drift, spin]
    pub drift_spin: StateVector,
    /// [[drift, spin], spin]
    pub drift_spin_spin: StateVector,
}

pub fn closed_form_brackets(
    state: &ContactState,
    angles: &FrameAngles,
    geom: &SphereGeometry,
) -> Result<ClosedFormBrackets, KinError> {
    state.check_chart()?;
    let r = geom.radius;
    let sin_t = angles.total().sin();
    let (sin_psi, cos_psi) = state.psi.sin_cos();
    let cos_v = state.v_o.cos();
    let tan_v = state.v_o.tan();
    let drift_spin = StateVector::from([
        0.0,
        0.0,
        -sin_t * (cos_psi + sin_psi) / (r * cos_v),
        -sin_t * (cos_psi - sin_psi) / r,
        -tan_v * sin_t * (cos_psi + sin_psi) / r,
    ]);
    let drift_spin_spin = StateVector::from([
        0.0,
        0.0,
        sin_t * (cos_psi - sin_psi) / (r * cos_v),
        -sin_t * (cos_psi + sin_psi) / r,
        tan_v * sin_t * (cos_psi - sin_psi) / r,
    ]);
    Ok(ClosedFormBrackets {
        drift_spin,
        drift_spin_spin,
    })
}

/// Closed form of the bracket-matrix determinant, for unit sphere radius:
///
/// ```text
/// det = −2 (sin v_o / cos² v_o) cos φ sin³(θ+φ) [sin(θ+φ) + cos(θ+φ)]
/// ```
///
/// For other radii the numerical determinant picks up a radius scale, so the
/// closed form is compared against it only at radius 1; the zero set is
/// radius-independent.
pub fn closed_form_determinant(v_o: f64, angles: &FrameAngles) -> f64 {
    let total = angles.total();
    let (sin_t, cos_t) = total.sin_cos();
    let cos_v = v_o.cos();
    -2.0 * (v_o.sin() / (cos_v * cos_v))
        * angles.varphi.cos()
        * sin_t.powi(3)
        * (sin_t + cos_t)
}

/// Rank of the span of a list of 5-vectors, by singular-value ratio.
pub fn span_rank(vectors: &[StateVector], tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let m = nalgebra::DMatrix::from_fn(5, vectors.len(), |i, j| vectors[j][i]);
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s / top > tol).count()
}

/// Five-column bracket matrix at a state together with its rank and the
/// numerical and closed-form determinants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    /// Columns: g1, g2, g3, [f, g3], [f, [f, g3]].
    pub columns: [[f64; 5]; 5],
    pub rank: usize,
    pub det_numeric: f64,
    pub det_closed: f64,
    pub singular_values: [f64; 5],
}

/// Assemble {g1, g2, g3, [f,g3], [f,[f,g3]]} at a state. The first bracket is
/// taken in closed form; the double bracket is a finite-difference bracket of
/// the drift against that closed-form field, which keeps the differencing to
/// one level and the noise well under the determinant tolerance.
pub fn controllability_matrix(
    state: &ContactState,
    angles: &FrameAngles,
    geom: &SphereGeometry,
) -> Result<BracketReport, KinError> {
    let fields = model_fields(angles, geom);
    let cf = closed_form_brackets(state, angles, geom)?;
    let (a, g) = (*angles, *geom);
    let fg3_field = VectorField5::new(move |x| {
        Ok(closed_form_brackets(x, &a, &g)?.drift_spin)
    });
    let double = lie_bracket(&fields.f, &fg3_field, state, DEFAULT_BRACKET_STEP)?;

    let cols = [
        fields.g1.eval(state)?,
        fields.g2.eval(state)?,
        fields.g3.eval(state)?,
        cf.drift_spin,
        double,
    ];
    let m = Matrix5::from_columns(&cols);
    let sv = m.singular_values();
    let rank = span_rank(&cols, RANK_TOL);
    Ok(BracketReport {
        columns: std::array::from_fn(|j| std::array::from_fn(|i| cols[j][i])),
        rank,
        det_numeric: m.determinant(),
        det_closed: closed_form_determinant(state.v_o, angles),
        singular_values: std::array::from_fn(|i| sv[i]),
    })
}

/// Rank of the bracket filtration with the torsion input removed.
///
/// The generating set is {f, g1, g3}; depth 1 adds [g1,g3], [f,g3], [f,g1];
/// depth 2 adds the brackets of each generator with every depth-1 bracket;
/// depth 3 adds the brackets of the drift with every depth-2 bracket. At
/// generic states the span stalls at dimension 4: every member has equal
/// first and second components, a structural identity that iterated brackets
/// preserve.
pub fn rank_without_beta(
    state: &ContactState,
    angles: &FrameAngles,
    geom: &SphereGeometry,
    bracket_depth: usize,
) -> Result<usize, KinError> {
    let fields = model_fields(angles, geom);
    let generators = [&fields.f, &fields.g1, &fields.g3];
    let h = NESTED_BRACKET_STEP;

    let mut level: Vec<VectorField5> = vec![
        lie_bracket_field(&fields.g1, &fields.g3, h),
        lie_bracket_field(&fields.f, &fields.g3, h),
        lie_bracket_field(&fields.f, &fields.g1, h),
    ];
    let mut vectors: Vec<StateVector> = generators
        .iter()
        .map(|g| g.eval(state))
        .collect::<Result<_, _>>()?;

    for depth in 1..=bracket_depth {
        for b in &level {
            vectors.push(b.eval(state)?);
        }
        if depth == bracket_depth {
            break;
        }
        level = if depth == 1 {
            generators
                .iter()
                .flat_map(|a| level.iter().map(|b| lie_bracket_field(a, b, h)))
                .collect()
        } else {
            level
                .iter()
                .map(|b| lie_bracket_field(&fields.f, b, h))
                .collect()
        };
    }
    Ok(span_rank(&vectors, RANK_TOL))
}

/// Closed-form and finite-difference divergence of the scaled drift field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub closed_form: f64,
    pub numeric: f64,
}

/// Divergence of δ·f: closed form δ sin(θ+φ)(sin ψ + cos ψ) tan v_o / R next
/// to a central-difference evaluation.
pub fn drift_divergence(
    state: &ContactState,
    angles: &FrameAngles,
    geom: &SphereGeometry,
    delta: f64,
) -> Result<DivergenceReport, KinError> {
    state.check_chart()?;
    let closed_form = delta * angles.total().sin() * (state.psi.sin() + state.psi.cos())
        * state.v_o.tan()
        / geom.radius;
    let (a, g) = (*angles, *geom);
    let field = VectorField5::new(move |x| {
        x.check_chart()?;
        Ok(delta * drift_column(x, &a, &g))
    });
    let j = jacobian(&field, state, DEFAULT_BRACKET_STEP)?;
    Ok(DivergenceReport {
        closed_form,
        numeric: j.trace(),
    })
}

/// Why a grid cell was flagged singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularFactor {
    /// sin(θ+φ) = 0: the cubed factor kills the determinant.
    FrameAngleMultipleOfPi,
    /// sin(θ+φ) + cos(θ+φ) = 0 (θ+φ an odd multiple of 3π/4 within π).
    DiagonalFrameAngle,
    /// cos φ = 0.
    VarphiOddHalfPi,
    /// sin v_o = 0: equator start.
    EquatorLatitude,
    /// cos v_o near 0: chart pole, determinant blows up.
    ChartPole,
    /// θ+φ an odd multiple of π/2. Flagged because the model's documented
    /// singular set lists it, although the closed-form determinant is nonzero
    /// there; cells carrying only this factor have nonzero determinant.
    ListedHalfPiFrameAngle,
}

/// A flagged grid cell of [`singularity_map`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularLocus {
    pub theta: f64,
    pub varphi: f64,
    pub v_o: f64,
    pub det_closed: f64,
    pub factors: Vec<SingularFactor>,
}

fn classify_cell(angles: &FrameAngles, v_o: f64) -> Option<SingularLocus> {
    use std::f64::consts::FRAC_PI_2;
    let mut factors = Vec::new();
    let total = angles.total();
    let (sin_t, cos_t) = total.sin_cos();
    if v_o.cos().abs() < 1e-3 {
        factors.push(SingularFactor::ChartPole);
    }
    if sin_t.abs() < SINGULARITY_TOL {
        factors.push(SingularFactor::FrameAngleMultipleOfPi);
    }
    if (sin_t + cos_t).abs() < SINGULARITY_TOL {
        factors.push(SingularFactor::DiagonalFrameAngle);
    }
    if angles.varphi.cos().abs() < SINGULARITY_TOL {
        factors.push(SingularFactor::VarphiOddHalfPi);
    }
    if v_o.sin().abs() < SINGULARITY_TOL {
        factors.push(SingularFactor::EquatorLatitude);
    }
    if cos_t.abs() < SINGULARITY_TOL {
        factors.push(SingularFactor::ListedHalfPiFrameAngle);
    }
    if factors.is_empty() {
        return None;
    }
    let det_closed = if (FRAC_PI_2 - v_o.abs()).abs() < 1e-12 {
        f64::INFINITY
    } else {
        closed_form_determinant(v_o, angles)
    };
    Some(SingularLocus {
        theta: angles.theta,
        varphi: angles.varphi,
        v_o,
        det_closed,
        factors,
    })
}

/// Scan a grid of frame angles and latitudes and return every cell where a
/// determinant factor vanishes, the chart degenerates, or the documented
/// singular set is touched. Cell order is the row-major grid order
/// regardless of how the scan is executed.
pub fn singularity_map(angles_grid: &[FrameAngles], v_o_grid: &[f64]) -> Vec<SingularLocus> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        angles_grid
            .par_iter()
            .flat_map_iter(|a| v_o_grid.iter().filter_map(move |&v| classify_cell(a, v)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        singularity_map_seq(angles_grid, v_o_grid)
    }
}

/// Sequential reference implementation of [`singularity_map`].
pub fn singularity_map_seq(angles_grid: &[FrameAngles], v_o_grid: &[f64]) -> Vec<SingularLocus> {
    angles_grid
        .iter()
        .flat_map(|a| v_o_grid.iter().filter_map(move |&v| classify_cell(a, v)))
        .collect()
}

/// Per-cell record of a controllability grid scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCellReport {
    pub theta: f64,
    pub varphi: f64,
    pub v_o: f64,
    pub psi: f64,
    pub rank: usize,
    pub det_numeric: f64,
    pub det_closed: f64,
}

fn grid_cell(angles: &FrameAngles, v_o: f64, psi: f64, geom: &SphereGeometry) -> GridCellReport {
    let state = ContactState::new(0.0, 0.0, 0.0, v_o, psi);
    match controllability_matrix(&state, angles, geom) {
        Ok(r) => GridCellReport {
            theta: angles.theta,
            varphi: angles.varphi,
            v_o,
            psi,
            rank: r.rank,
            det_numeric: r.det_numeric,
            det_closed: r.det_closed,
        },
        Err(_) => GridCellReport {
            theta: angles.theta,
            varphi: angles.varphi,
            v_o,
            psi,
            rank: 0,
            det_numeric: f64::NAN,
            det_closed: f64::NAN,
        },
    }
}

/// Full bracket-matrix report over a grid, in row-major grid order.
pub fn grid_report(
    angles_grid: &[FrameAngles],
    v_o_grid: &[f64],
    psi: f64,
    geom: &SphereGeometry,
) -> Vec<GridCellReport> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let g = *geom;
        angles_grid
            .par_iter()
            .flat_map_iter(move |a| v_o_grid.iter().map(move |&v| grid_cell(a, v, psi, &g)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        grid_report_seq(angles_grid, v_o_grid, psi, geom)
    }
}

/// Sequential reference implementation of [`grid_report`].
pub fn grid_report_seq(
    angles_grid: &[FrameAngles],
    v_o_grid: &[f64],
    psi: f64,
    geom: &SphereGeometry,
) -> Vec<GridCellReport> {
    angles_grid
        .iter()
        .flat_map(|a| v_o_grid.iter().map(move |&v| grid_cell(a, v, psi, geom)))
        .collect()
}
