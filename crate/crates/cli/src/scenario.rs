//! Scenario file schema and validation. Files are JSON documents with an
//! `analysis` discriminator; unknown keys are rejected before any computation.

use serde::Deserialize;

use darboux_roll::darboux::{VirtualSurfaceInputs, WPPS_DEFAULT_THRESHOLD};
use darboux_roll::montana::SphereGeometry;
use darboux_roll::sim::Scenario;

/// Uniform grid over one axis.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisGrid {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => vec![],
            1 => vec![self.min],
            n => (0..n)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

/// A parsed scenario file: the `analysis` key selects which fields apply.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub analysis: String,
    /// trajectory / equivalence
    pub scenario: Option<Scenario>,
    /// fig4 / fig5 / ctrb_scan / wpps
    pub geom: Option<SphereGeometry>,
    /// fig4 / wpps
    pub g_f: Option<f64>,
    /// fig4
    pub triples: Option<Vec<VirtualSurfaceInputs>>,
    /// wpps
    pub inputs: Option<VirtualSurfaceInputs>,
    pub threshold: Option<f64>,
    /// ctrb_scan
    pub theta_grid: Option<AxisGrid>,
    pub v_o_grid: Option<AxisGrid>,
    pub varphi: Option<f64>,
    pub psi: Option<f64>,
    /// emit a plot script next to the CSV (trajectory-producing analyses)
    pub emit_plot: Option<bool>,
}

/// The analysis job extracted from a scenario file.
#[derive(Debug, Clone)]
pub enum Job {
    Trajectory {
        scenario: Scenario,
        emit_plot: bool,
    },
    Equivalence {
        scenario: Scenario,
    },
    Fig4 {
        geom: SphereGeometry,
        g_f: f64,
        triples: Vec<VirtualSurfaceInputs>,
        emit_plot: bool,
    },
    Fig5 {
        geom: SphereGeometry,
        emit_plot: bool,
    },
    CtrbScan {
        geom: SphereGeometry,
        theta_grid: AxisGrid,
        v_o_grid: AxisGrid,
        varphi: f64,
        psi: f64,
    },
    Wpps {
        geom: SphereGeometry,
        inputs: VirtualSurfaceInputs,
        g_f: f64,
        threshold: f64,
    },
}

fn need<T>(field: Option<T>, name: &str, analysis: &str) -> Result<T, String> {
    field.ok_or_else(|| format!("analysis '{analysis}' requires the '{name}' key"))
}

impl ScenarioFile {
    pub fn into_job(self) -> Result<Job, String> {
        let a = self.analysis.clone();
        match a.as_str() {
            "trajectory" => Ok(Job::Trajectory {
                scenario: need(self.scenario, "scenario", &a)?,
                emit_plot: self.emit_plot.unwrap_or(true),
            }),
            "equivalence" => Ok(Job::Equivalence {
                scenario: need(self.scenario, "scenario", &a)?,
            }),
            "fig4" => Ok(Job::Fig4 {
                geom: need(self.geom, "geom", &a)?,
                g_f: need(self.g_f, "g_f", &a)?,
                triples: need(self.triples, "triples", &a)?,
                emit_plot: self.emit_plot.unwrap_or(true),
            }),
            "fig5" => Ok(Job::Fig5 {
                geom: need(self.geom, "geom", &a)?,
                emit_plot: self.emit_plot.unwrap_or(true),
            }),
            "ctrb_scan" => Ok(Job::CtrbScan {
                geom: need(self.geom, "geom", &a)?,
                theta_grid: need(self.theta_grid, "theta_grid", &a)?,
                v_o_grid: need(self.v_o_grid, "v_o_grid", &a)?,
                varphi: self.varphi.unwrap_or(0.0),
                psi: self.psi.unwrap_or(0.0),
            }),
            "wpps" => Ok(Job::Wpps {
                geom: need(self.geom, "geom", &a)?,
                inputs: need(self.inputs, "inputs", &a)?,
                g_f: need(self.g_f, "g_f", &a)?,
                threshold: self.threshold.unwrap_or(WPPS_DEFAULT_THRESHOLD),
            }),
            other => Err(format!(
                "unknown analysis '{other}' (expected trajectory, equivalence, fig4, fig5, ctrb_scan or wpps)"
            )),
        }
    }
}

/// Parse a scenario file, mapping serde errors (including unknown keys) to a
/// readable message.
pub fn load(path: &std::path::Path) -> Result<Job, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| format!("invalid scenario file {}: {e}", path.display()))?;
    file.into_job()
}
