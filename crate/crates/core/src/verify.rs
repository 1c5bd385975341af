//! Self-check suite: the end-to-end properties that pin the library to its
//! closed-form oracles. Run by the CLI `selftest` command and by the
//! acceptance integration test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controllability::{
    closed_form_brackets, controllability_matrix, drift_divergence, lie_bracket, model_fields,
    rank_without_beta, VectorField5, DEFAULT_BRACKET_STEP,
};
use crate::darboux::{
    darboux_angular_velocity, relative_curvature, sphere_direction_triple, FrameAngles,
    GoalDirection, RelativeCurvature, RollingRateProfile, VirtualSurfaceInputs,
};
use crate::diffgeo::{
    coordinate_curvatures_with_step, directional_curvature, plane_coordinate_curvatures,
    sphere_coordinate_curvatures, SurfaceChart,
};
use crate::montana::{wrap_angle, ContactState, SphereGeometry};
use crate::sim::{
    equivalence_run, fig4_study, fig5_study, integrate, AngleMode, InputSchedule, ModelKind,
    Scenario,
};
use crate::KinError;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(
    name: &'static str,
    body: impl FnOnce() -> Result<(bool, String), KinError>,
) -> CheckResult {
    match body() {
        Ok((passed, detail)) => CheckResult {
            name,
            passed,
            detail,
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(crate::seed_from_env())
}

fn random_nonsingular_state(rng: &mut ChaCha8Rng) -> ContactState {
    ContactState::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-3.0..3.0),
        rng.gen_range(-1.2..1.2),
        rng.gen_range(-3.0..3.0),
    )
}

fn oracle_equivalence() -> Result<(bool, String), KinError> {
    let mut rng = rng();
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let beta = rng.gen_range(0.3..1.2) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let scenario = Scenario {
            model: ModelKind::DarbouxArcLength,
            initial: ContactState::new(
                0.0,
                0.0,
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-0.4..0.4),
                rng.gen_range(-1.0..1.0),
            ),
            inputs: InputSchedule::Constant {
                inputs: VirtualSurfaceInputs::new(
                    rng.gen_range(-0.5..0.5),
                    beta,
                    rng.gen_range(-0.5..0.5),
                ),
            },
            angle_mode: AngleMode::GoalDriven {
                goal: GoalDirection::new(rng.gen_range(-1.0..1.0)),
            },
            delta: RollingRateProfile::Constant { rate: 1.0 },
            geom: SphereGeometry::new(rng.gen_range(0.8..1.5)),
            span: 5.0,
            step: 1e-3,
            drift_only: false,
        };
        let report = equivalence_run(&scenario)?;
        worst = worst.max(report.max_gap);
    }
    Ok((worst < 1e-6, format!("max cross-model gap {worst:.3e}")))
}

fn heading_invariance() -> Result<(bool, String), KinError> {
    let triples = [
        VirtualSurfaceInputs::new(0.1, 1.0, 0.0),
        VirtualSurfaceInputs::new(0.1, 0.5, 0.2),
        VirtualSurfaceInputs::new(0.0, 2.0, -0.3),
    ];
    let g_f = 0.4;
    let trajs = fig4_study(&SphereGeometry::new(1.0), g_f, &triples)?;
    let mut max_heading_dev = 0.0_f64;
    for traj in &trajs {
        if !traj.completed() {
            return Ok((false, "a heading run terminated early".into()));
        }
        for sample in &traj.samples {
            max_heading_dev = max_heading_dev.max((sample.heading - g_f).abs());
        }
    }
    let mut min_sup = f64::INFINITY;
    for i in 0..trajs.len() {
        for j in (i + 1)..trajs.len() {
            let sup = trajs[i]
                .samples
                .iter()
                .zip(&trajs[j].samples)
                .map(|(a, b)| {
                    wrap_angle(a.state.u_o - b.state.u_o)
                        .abs()
                        .max((a.state.v_o - b.state.v_o).abs())
                        .max(wrap_angle(a.state.psi - b.state.psi).abs())
                })
                .fold(0.0, f64::max);
            min_sup = min_sup.min(sup);
        }
    }
    Ok((
        max_heading_dev < 1e-6 && min_sup > 0.01,
        format!("heading deviation {max_heading_dev:.3e}, min sphere-trace separation {min_sup:.3}"),
    ))
}

fn drift_study() -> Result<(bool, String), KinError> {
    let report = fig5_study(&SphereGeometry::new(1.0))?;
    if !report.trajectory.completed() {
        return Ok((false, "drift run terminated early".into()));
    }
    if report.psi_crossing_spacings.len() < 2 {
        return Ok((false, "too few spin-angle crossings".into()));
    }
    let mean = report.psi_crossing_spacings.iter().sum::<f64>()
        / report.psi_crossing_spacings.len() as f64;
    let spread = report
        .psi_crossing_spacings
        .iter()
        .map(|x| (x - mean).abs() / mean)
        .fold(0.0, f64::max);
    Ok((
        report.max_heading_deviation < 1e-9 && spread < 0.01,
        format!(
            "heading deviation {:.3e}, cycle {:.4}, spacing spread {:.4}%",
            report.max_heading_deviation,
            mean,
            spread * 100.0
        ),
    ))
}

fn curvature_closed_forms() -> Result<(bool, String), KinError> {
    let chart = SurfaceChart::sphere(1.0);
    let mut worst_fd = 0.0_f64;
    for i in 0..20 {
        let v = -1.4 + 2.8 * i as f64 / 19.0;
        for j in 0..20 {
            let u = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / 19.0;
            let (uc, vc) = coordinate_curvatures_with_step(&chart, u, v, 3e-5)?;
            let (cu, cv) = sphere_coordinate_curvatures(1.0, v);
            for (a, b) in [
                (uc.k_g, cu.k_g),
                (uc.k_n, cu.k_n),
                (uc.tau_g, cu.tau_g),
                (vc.k_g, cv.k_g),
                (vc.k_n, cv.k_n),
                (vc.tau_g, cv.tau_g),
            ] {
                worst_fd = worst_fd.max((a - b).abs());
            }
        }
    }

    let mut rng = rng();
    let mut worst_dir = 0.0_f64;
    for _ in 0..200 {
        let r = rng.gen_range(0.5..3.0);
        let v_o = rng.gen_range(-1.4..1.4);
        let phi = rng.gen_range(-7.0..7.0);
        let (uc, vc) = sphere_coordinate_curvatures(r, v_o);
        let t = directional_curvature(&uc, &vc, phi);
        worst_dir = worst_dir.max((t.k_n - 1.0 / r).abs());
        worst_dir = worst_dir.max(t.tau_g.abs());
        worst_dir = worst_dir.max((t.k_g - v_o.tan() * phi.cos() / r).abs());
        let (pu, pv) = plane_coordinate_curvatures();
        let p = directional_curvature(&pu, &pv, phi);
        worst_dir = worst_dir.max(p.k_g.abs().max(p.k_n.abs()).max(p.tau_g.abs()));
    }
    Ok((
        worst_fd < 1e-7 && worst_dir < 1e-12,
        format!("finite-difference error {worst_fd:.3e}, directional identity error {worst_dir:.3e}"),
    ))
}

fn bracket_oracle() -> Result<(bool, String), KinError> {
    let mut rng = rng();
    let geom = SphereGeometry::new(1.0);
    let mut worst_bracket = 0.0_f64;
    let mut worst_det = 0.0_f64;
    let mut tried = 0;
    while tried < 200 {
        let total = rng.gen_range(0.15..std::f64::consts::PI - 0.15);
        if (total - 3.0 * std::f64::consts::FRAC_PI_4).abs() < 0.12 {
            continue;
        }
        let angles = FrameAngles::new(total, 0.0);
        let mut state = random_nonsingular_state(&mut rng);
        if state.v_o.abs() < 0.15 {
            state.v_o = 0.15_f64.copysign(state.v_o + 1e-3);
        }
        tried += 1;

        let fields = model_fields(&angles, &geom);
        let cf = closed_form_brackets(&state, &angles, &geom)?;
        let numeric = lie_bracket(&fields.f, &fields.g3, &state, DEFAULT_BRACKET_STEP)?;
        for i in 0..5 {
            worst_bracket = worst_bracket.max((numeric[i] - cf.drift_spin[i]).abs());
        }
        let (a, g) = (angles, geom);
        let fg3 = VectorField5::new(move |x| Ok(closed_form_brackets(x, &a, &g)?.drift_spin));
        let iterated = lie_bracket(&fg3, &fields.g3, &state, DEFAULT_BRACKET_STEP)?;
        for i in 0..5 {
            worst_bracket = worst_bracket.max((iterated[i] - cf.drift_spin_spin[i]).abs());
        }

        let report = controllability_matrix(&state, &angles, &geom)?;
        let rel = (report.det_numeric - report.det_closed).abs() / report.det_closed.abs();
        worst_det = worst_det.max(rel);
    }

    let spot = controllability_matrix(
        &ContactState::new(0.0, 0.0, 0.0, std::f64::consts::PI / 6.0, 0.0),
        &FrameAngles::new(std::f64::consts::FRAC_PI_3, 0.0),
        &geom,
    )?;
    let spot_ok = (spot.det_closed + 1.1830).abs() < 1e-4;
    Ok((
        worst_bracket < 1e-5 && worst_det < 1e-6 && spot_ok,
        format!(
            "bracket error {worst_bracket:.3e}, determinant relative error {worst_det:.3e}, spot determinant {:.5}",
            spot.det_closed
        ),
    ))
}

fn rank_claims() -> Result<(bool, String), KinError> {
    let geom = SphereGeometry::new(1.0);
    let generic_angles = FrameAngles::new(1.0, 0.0);
    let generic_state = ContactState::new(0.0, 0.0, 0.0, 0.4, 0.3);

    let full = controllability_matrix(&generic_state, &generic_angles, &geom)?.rank;
    let reduced = rank_without_beta(&generic_state, &generic_angles, &geom, 3)?;

    let mut drops = Vec::new();
    for (angles, state) in [
        (FrameAngles::new(std::f64::consts::PI, 0.0), generic_state),
        (
            FrameAngles::new(3.0 * std::f64::consts::FRAC_PI_4, 0.0),
            generic_state,
        ),
        (generic_angles, ContactState::new(0.0, 0.0, 0.0, 0.0, 0.3)),
    ] {
        drops.push(controllability_matrix(&state, &angles, &geom)?.rank);
    }
    let drops_ok = drops.iter().all(|&r| r < 5);
    Ok((
        full == 5 && reduced == 4 && drops_ok,
        format!("generic rank {full}, rank without torsion input {reduced}, ranks on zero set {drops:?}"),
    ))
}

fn divergence() -> Result<(bool, String), KinError> {
    let mut rng = rng();
    let geom = SphereGeometry::new(1.0);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let angles = FrameAngles::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let state = random_nonsingular_state(&mut rng);
        let d = drift_divergence(&state, &angles, &geom, 1.0)?;
        worst = worst.max((d.closed_form - d.numeric).abs());
    }

    let angles = FrameAngles::new(0.7, 0.2);
    let anti = drift_divergence(
        &ContactState::new(0.0, 0.0, 0.3, 0.5, -std::f64::consts::FRAC_PI_4),
        &angles,
        &geom,
        1.0,
    )?;
    let equator = drift_divergence(
        &ContactState::new(0.0, 0.0, 0.3, 0.0, 0.9),
        &angles,
        &geom,
        1.0,
    )?;
    let zeros_ok = anti.numeric.abs() < 1e-12
        && equator.closed_form == 0.0
        && equator.numeric.abs() < 1e-12;
    Ok((
        worst < 1e-6 && zeros_ok,
        format!(
            "max closed-vs-numeric gap {worst:.3e}, zero cases {:.1e} / {:.1e}",
            anti.numeric, equator.numeric
        ),
    ))
}

fn integrator_order() -> Result<(bool, String), KinError> {
    let scenario = |step: f64| Scenario {
        model: ModelKind::DarbouxArcLength,
        initial: ContactState::new(0.0, 0.0, 0.0, 0.3, 0.2),
        inputs: InputSchedule::Constant {
            inputs: VirtualSurfaceInputs::new(0.1, 0.8, 0.2),
        },
        angle_mode: AngleMode::GoalDriven {
            goal: GoalDirection::new(0.4),
        },
        delta: RollingRateProfile::Constant { rate: 1.0 },
        geom: SphereGeometry::new(1.0),
        span: 2.0,
        step,
        drift_only: false,
    };
    let final_state = |step: f64| -> Result<_, KinError> {
        Ok(integrate(&scenario(step))?
            .final_state()
            .expect("nonempty trajectory")
            .to_vector())
    };
    let reference = final_state(0.02 / 16.0)?;
    let err_coarse = (final_state(0.02)? - reference).amax();
    let err_fine = (final_state(0.01)? - reference).amax();
    let ratio = err_coarse / err_fine;
    Ok((
        (12.0..=20.0).contains(&ratio),
        format!("step-halving error ratio {ratio:.2}"),
    ))
}

fn disc_sanity() -> Result<(bool, String), KinError> {
    let mut rng = rng();
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let r = rng.gen_range(0.3..3.0);
        let gamma = rng.gen_range(-0.2..1.0);
        let delta = rng.gen_range(0.1..2.0);
        let rel = RelativeCurvature::new(0.0, 1.0 / r + gamma, 0.0);
        let omega = darboux_angular_velocity(&rel, delta);
        let expected_e2 = delta * (1.0 / r + gamma);
        let expected_speed = delta * (1.0 + r * gamma);
        worst = worst.max((omega.e1.abs()).max(omega.e3.abs()));
        worst = worst.max((omega.e2 - expected_e2).abs() / expected_e2.abs().max(1e-300));
        worst = worst
            .max((omega.contact_speed(r) - expected_speed).abs() / expected_speed.abs().max(1.0));
    }
    // the same triple must also fall out of the general relative-curvature
    // path with a zero-curvature second surface
    let sphere = sphere_direction_triple(&SphereGeometry::new(2.0), 0.0, 0.0);
    let plane = crate::darboux::plane_direction_triple(0.0);
    let rel = relative_curvature(&sphere, &plane, &VirtualSurfaceInputs::new(0.0, 0.0, -0.5));
    let composed_ok = (rel.kn_star - (0.5 + 0.5)).abs() < 1e-15;
    Ok((
        worst < 1e-14 && composed_ok,
        format!("max relative error {worst:.3e}"),
    ))
}

/// Run every check whose name contains `filter` (all checks when `None`),
/// in a fixed order.
pub fn run_all(filter: Option<&str>) -> Vec<CheckResult> {
    let checks: Vec<(&'static str, fn() -> Result<(bool, String), KinError>)> = vec![
        ("oracle_equivalence", oracle_equivalence),
        ("heading_invariance", heading_invariance),
        ("drift_study", drift_study),
        ("curvature_closed_forms", curvature_closed_forms),
        ("bracket_oracle", bracket_oracle),
        ("rank_claims", rank_claims),
        ("divergence", divergence),
        ("integrator_order", integrator_order),
        ("disc_sanity", disc_sanity),
    ];
    checks
        .into_iter()
        .filter(|(name, _)| filter.map_or(true, |f| name.contains(f)))
        .map(|(name, body)| check(name, body))
        .collect()
}
