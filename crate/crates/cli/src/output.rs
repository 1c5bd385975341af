//! Artifact writers: trajectory CSV, JSON reports and plot scripts.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use darboux_roll::sim::Trajectory;

/// Column order of every trajectory CSV.
pub const CSV_HEADER: &str =
    "s,t,u_s,v_s,u_o,v_o,psi,theta,varphi,delta,alpha_s,beta_s,gamma_s,heading";

/// Write one trajectory as CSV with LF line endings. Numbers carry 17
/// significant digits so parsing the file reproduces the doubles exactly.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> io::Result<()> {
    let mut out = io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{CSV_HEADER}")?;
    for sample in &traj.samples {
        let x = sample.state;
        let fields = [
            sample.s,
            sample.t,
            x.u_s,
            x.v_s,
            x.u_o,
            x.v_o,
            x.psi,
            sample.angles.theta,
            sample.angles.varphi,
            sample.delta,
            sample.inputs.alpha_s,
            sample.inputs.beta_s,
            sample.inputs.gamma_s,
            sample.heading,
        ];
        let line: Vec<String> = fields.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()
}

/// Write a JSON report. Struct fields serialize in declaration order, so the
/// output is deterministic and diffable.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    std::fs::write(path, text + "\n")
}

/// Plain-text line-plot script over a trajectory CSV. No plotting dependency;
/// the grammar is the common gnuplot subset.
pub fn write_plot_script(path: &Path, csv_name: &str) -> io::Result<()> {
    let script = format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'u_s'\n\
         set ylabel 'v_s'\n\
         plot '{csv_name}' using 3:4 with lines title 'plane path'\n\
         pause -1\n\
         set xlabel 's'\n\
         set ylabel 'angle'\n\
         plot '{csv_name}' using 1:5 with lines title 'u_o', \\\n\
              '{csv_name}' using 1:6 with lines title 'v_o', \\\n\
              '{csv_name}' using 1:7 with lines title 'psi'\n\
         pause -1\n"
    );
    std::fs::write(path, script)
}
