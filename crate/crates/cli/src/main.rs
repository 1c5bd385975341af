//! Command-line scenario runner for the spin-rolling sphere models.
//!
//! `run <scenario.json>.. [--out DIR] [--force] [--jobs N]` executes scenario
//! files and writes CSV trajectories, JSON reports and plot scripts.
//! `selftest [--filter NAME]` runs the library's acceptance checks.
//!
//! Exit codes: 0 success, 2 validation error, 3 runtime singularity abort.

mod output;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use darboux_roll::controllability::{grid_report, singularity_map, GridCellReport, SingularLocus};
use darboux_roll::darboux::{wpps_report, FrameAngles, GoalDirection};
use darboux_roll::montana::{wrap_angle, ContactState};
use darboux_roll::sim::{equivalence_run, fig4_study, fig5_study, integrate, Termination, Trajectory};
use darboux_roll::verify;

use scenario::Job;

#[derive(Parser)]
#[command(name = "darboux-roll", version, about = "Spin-rolling sphere kinematics: scenario runner and self checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario files and write artifacts.
    Run {
        /// Scenario files (JSON).
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Output directory. With several scenarios, each gets a
        /// subdirectory named after its file stem.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overwrite existing output directories.
        #[arg(long)]
        force: bool,
        /// Worker threads for batch and grid work.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the acceptance checks and print a pass/fail table.
    Selftest {
        /// Only run checks whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Selftest { filter } => selftest(filter.as_deref()),
        Command::Run {
            paths,
            out,
            force,
            jobs,
        } => run(&paths, out.as_deref(), force, jobs),
    }
}

fn selftest(filter: Option<&str>) -> ExitCode {
    let results = verify::run_all(filter);
    if results.is_empty() {
        eprintln!("no checks match the filter");
        return ExitCode::from(2);
    }
    let mut all = true;
    for r in &results {
        println!(
            "{} {:<24} {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        all &= r.passed;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(paths: &[PathBuf], out: Option<&Path>, force: bool, jobs: Option<usize>) -> ExitCode {
    if let Some(n) = jobs {
        // ignore the error if a pool already exists (e.g. repeated calls in tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let codes: Vec<u8> = paths
        .iter()
        .map(|path| {
            let dir = output_dir(path, out, paths.len() > 1);
            match run_one(path, &dir, force) {
                Ok(code) => code,
                Err(msg) => {
                    eprintln!("{}: {msg}", path.display());
                    2
                }
            }
        })
        .collect();
    ExitCode::from(codes.into_iter().max().unwrap_or(0))
}

fn output_dir(path: &Path, out: Option<&Path>, multi: bool) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    match out {
        Some(dir) if multi => dir.join(stem),
        Some(dir) => dir.to_path_buf(),
        None => path.with_file_name(format!("{stem}_out")),
    }
}

fn prepare_dir(dir: &Path, force: bool) -> Result<(), String> {
    if dir.exists() {
        let occupied = std::fs::read_dir(dir)
            .map_err(|e| format!("cannot inspect {}: {e}", dir.display()))?
            .next()
            .is_some();
        if occupied && !force {
            return Err(format!(
                "output directory {} is not empty; pass --force to overwrite",
                dir.display()
            ));
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))
}

fn io_err(e: std::io::Error) -> String {
    format!("write failed: {e}")
}

#[derive(Serialize)]
struct TrajectorySummary {
    model: String,
    scenario_hash: String,
    step: f64,
    samples: usize,
    termination: Termination,
    final_state: Option<ContactState>,
}

impl TrajectorySummary {
    fn of(traj: &Trajectory) -> Self {
        Self {
            model: traj.model.clone(),
            scenario_hash: traj.scenario_hash.clone(),
            step: traj.step,
            samples: traj.samples.len(),
            termination: traj.termination,
            final_state: traj.final_state(),
        }
    }
}

fn abort_code(trajs: &[&Trajectory]) -> u8 {
    if trajs.iter().all(|t| t.completed()) {
        0
    } else {
        3
    }
}

fn run_one(path: &Path, dir: &Path, force: bool) -> Result<u8, String> {
    let job = scenario::load(path)?;
    prepare_dir(dir, force)?;
    match job {
        Job::Trajectory {
            scenario,
            emit_plot,
        } => {
            let traj = integrate(&scenario).map_err(|e| format!("invalid scenario: {e}"))?;
            output::write_trajectory_csv(&dir.join("trajectory.csv"), &traj).map_err(io_err)?;
            output::write_json(&dir.join("report.json"), &TrajectorySummary::of(&traj))
                .map_err(io_err)?;
            if emit_plot {
                output::write_plot_script(&dir.join("plot.gp"), "trajectory.csv")
                    .map_err(io_err)?;
            }
            Ok(abort_code(&[&traj]))
        }
        Job::Equivalence { scenario } => {
            let report =
                equivalence_run(&scenario).map_err(|e| format!("invalid scenario: {e}"))?;
            output::write_trajectory_csv(&dir.join("trajectory.csv"), &report.traj_darboux)
                .map_err(io_err)?;
            output::write_trajectory_csv(
                &dir.join("trajectory_mapped.csv"),
                &report.traj_montana_mapped,
            )
            .map_err(io_err)?;
            #[derive(Serialize)]
            struct EquivalenceSummary {
                max_gap: f64,
                direct: TrajectorySummary,
                mapped: TrajectorySummary,
            }
            output::write_json(
                &dir.join("report.json"),
                &EquivalenceSummary {
                    max_gap: report.max_gap,
                    direct: TrajectorySummary::of(&report.traj_darboux),
                    mapped: TrajectorySummary::of(&report.traj_montana_mapped),
                },
            )
            .map_err(io_err)?;
            Ok(abort_code(&[
                &report.traj_darboux,
                &report.traj_montana_mapped,
            ]))
        }
        Job::Fig4 {
            geom,
            g_f,
            triples,
            emit_plot,
        } => {
            let trajs =
                fig4_study(&geom, g_f, &triples).map_err(|e| format!("invalid scenario: {e}"))?;
            for (i, traj) in trajs.iter().enumerate() {
                let name = if i == 0 {
                    "trajectory.csv".to_string()
                } else {
                    format!("trajectory_{i}.csv")
                };
                output::write_trajectory_csv(&dir.join(name), traj).map_err(io_err)?;
            }
            let max_heading_dev = trajs
                .iter()
                .flat_map(|t| t.samples.iter())
                .filter(|s| s.heading.is_finite())
                .map(|s| (s.heading - g_f).abs())
                .fold(0.0, f64::max);
            let mut sphere_separations = Vec::new();
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
                    sphere_separations.push((i, j, sup));
                }
            }
            #[derive(Serialize)]
            struct Fig4Summary {
                g_f: f64,
                max_heading_deviation: f64,
                sphere_trace_separations: Vec<(usize, usize, f64)>,
                trajectories: Vec<TrajectorySummary>,
            }
            output::write_json(
                &dir.join("report.json"),
                &Fig4Summary {
                    g_f,
                    max_heading_deviation: max_heading_dev,
                    sphere_trace_separations: sphere_separations,
                    trajectories: trajs.iter().map(TrajectorySummary::of).collect(),
                },
            )
            .map_err(io_err)?;
            if emit_plot {
                output::write_plot_script(&dir.join("plot.gp"), "trajectory.csv")
                    .map_err(io_err)?;
            }
            Ok(abort_code(&trajs.iter().collect::<Vec<_>>()))
        }
        Job::Fig5 { geom, emit_plot } => {
            let report = fig5_study(&geom).map_err(|e| format!("invalid scenario: {e}"))?;
            output::write_trajectory_csv(&dir.join("trajectory.csv"), &report.trajectory)
                .map_err(io_err)?;
            #[derive(Serialize)]
            struct Fig5Summary {
                max_heading_deviation: f64,
                psi_crossing_spacings: Vec<f64>,
                u_o_crossing_spacings: Vec<f64>,
                trajectory: TrajectorySummary,
            }
            output::write_json(
                &dir.join("report.json"),
                &Fig5Summary {
                    max_heading_deviation: report.max_heading_deviation,
                    psi_crossing_spacings: report.psi_crossing_spacings.clone(),
                    u_o_crossing_spacings: report.u_o_crossing_spacings.clone(),
                    trajectory: TrajectorySummary::of(&report.trajectory),
                },
            )
            .map_err(io_err)?;
            if emit_plot {
                output::write_plot_script(&dir.join("plot.gp"), "trajectory.csv")
                    .map_err(io_err)?;
            }
            Ok(abort_code(&[&report.trajectory]))
        }
        Job::CtrbScan {
            geom,
            theta_grid,
            v_o_grid,
            varphi,
            psi,
        } => {
            let angles: Vec<FrameAngles> = theta_grid
                .values()
                .into_iter()
                .map(|t| FrameAngles::new(t, varphi))
                .collect();
            let v_values = v_o_grid.values();
            let cells: Vec<GridCellReport> = grid_report(&angles, &v_values, psi, &geom);
            let singular: Vec<SingularLocus> = singularity_map(&angles, &v_values);
            #[derive(Serialize)]
            struct CtrbSummary {
                cells: Vec<GridCellReport>,
                singular: Vec<SingularLocus>,
            }
            output::write_json(&dir.join("report.json"), &CtrbSummary { cells, singular })
                .map_err(io_err)?;
            Ok(0)
        }
        Job::Wpps {
            geom,
            inputs,
            g_f,
            threshold,
        } => {
            let report = wpps_report(&inputs, &GoalDirection::new(g_f), &geom, threshold)
                .map_err(|e| format!("invalid scenario: {e}"))?;
            output::write_json(&dir.join("report.json"), &report).map_err(io_err)?;
            Ok(0)
        }
    }
}
