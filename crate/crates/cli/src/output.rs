//! Artifact writing: manifest, CSV series and JSON result blocks.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use boundwave::observables::ObservableRecord;

use crate::error::CliError;
use crate::run::{ScatterOutput, SimulationOutput, Snapshot, WkbOutput};

/// Environment variable naming the directory under which run directories are created.
pub const OUTPUT_ROOT_ENV: &str = "BOUNDWAVE_OUTPUT_ROOT";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

/// Files of one run directory, written in one go.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn add_json(&mut self, name: impl Into<String>, value: &impl Serialize) {
        let text = serde_json::to_string_pretty(value).expect("serializable result") + "\n";
        self.add(name, text);
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        for (name, contents) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
            }
            fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
        }
        Ok(())
    }
}

pub fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), source }
}

pub fn timeseries_csv(records: &[ObservableRecord], n_channels: usize) -> String {
    let mut s = ObservableRecord::csv_header(n_channels);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn snapshot_name(prefix: &str, snap: &Snapshot) -> String {
    format!("snapshots/{prefix}_t{:.4}.csv", snap.requested)
}

pub fn field_csv(snap: &Snapshot) -> String {
    let mut s = String::from("t,x");
    for n in 0..snap.channels.len() {
        let _ = write!(s, ",re_f{n},im_f{n}");
    }
    s.push('\n');
    for (j, x) in snap.x.iter().enumerate() {
        let _ = write!(s, "{:e},{x:e}", snap.t);
        for ch in &snap.channels {
            let _ = write!(s, ",{:e},{:e}", ch[j].re, ch[j].im);
        }
        s.push('\n');
    }
    s
}

/// `|ρ(x, x')|` as a matrix with the coordinates in the first row and column.
pub fn rho_csv(snap: &Snapshot) -> String {
    let mut s = String::from("x");
    for x in &snap.rho_x {
        let _ = write!(s, ",{x:e}");
    }
    s.push('\n');
    for (x, row) in snap.rho_x.iter().zip(&snap.rho_abs) {
        let _ = write!(s, "{x:e}");
        for v in row {
            let _ = write!(s, ",{v:e}");
        }
        s.push('\n');
    }
    s
}

pub fn simulation_artifacts(out: &SimulationOutput, n_channels: usize, arts: &mut Artifacts) {
    arts.add("timeseries.csv", timeseries_csv(&out.records, n_channels));
    let mut energy = String::from("t,E_total\n");
    for (t, e) in &out.energy_trace {
        let _ = writeln!(energy, "{t:e},{e:e}");
    }
    arts.add("energy.csv", energy);
    for snap in &out.snapshots {
        arts.add(snapshot_name("field", snap), field_csv(snap));
        arts.add(snapshot_name("rho_abs", snap), rho_csv(snap));
    }
    if let Some(summary) = &out.summary {
        arts.add_json("results.json", summary);
    }
}

pub fn scatter_artifacts(out: &ScatterOutput, sweep: bool, n_channels: usize, arts: &mut Artifacts) {
    if sweep {
        let mut s = String::from("E");
        for n in 0..n_channels {
            let _ = write!(s, ",T{n}");
        }
        for n in 0..n_channels {
            let _ = write!(s, ",R{n}");
        }
        s.push_str(",flux_defect\n");
        for m in &out.results {
            let _ = write!(s, "{:e}", m.energy);
            for n in 0..n_channels {
                let _ = write!(s, ",{:e}", m.transmission_probability(n, out.channel));
            }
            for n in 0..n_channels {
                let _ = write!(s, ",{:e}", m.reflection_probability(n, out.channel));
            }
            let _ = writeln!(s, ",{:e}", m.flux_defect());
        }
        arts.add("sweep.csv", s);
    }
    let blocks: Vec<_> = out
        .results
        .iter()
        .map(|m| {
            json!({
                "smatrix": m,
                "flux_defect": m.flux_defect(),
                "reciprocity_defect": m.reciprocity_defect(),
            })
        })
        .collect();
    arts.add_json("smatrix.json", &blocks);
}

pub fn wkb_artifacts(out: &WkbOutput, arts: &mut Artifacts) {
    let c = &out.curves;
    let mut s = String::from("x,V_plus,V_minus,V_plus_asym,V_minus_asym\n");
    for i in 0..c.x.len() {
        let _ = writeln!(
            s,
            "{:e},{:e},{:e},{:e},{:e}",
            c.x[i], c.v_plus[i], c.v_minus[i], c.v_plus_asym[i], c.v_minus_asym[i]
        );
    }
    arts.add("potentials.csv", s);
    arts.add_json(
        "wkb.json",
        &json!({
            "v_min": c.estimate.v_min,
            "omega": c.estimate.omega,
            "alpha": c.estimate.alpha,
            "beta": c.estimate.beta,
            "E_S": c.estimate.symmetric,
            "E_A": c.estimate.antisymmetric,
            "splitting": c.estimate.splitting(),
            "warning": c.estimate.warning,
            "constants": out.constants,
            "v_plus_minima": out.v_plus_minima,
            "v_minus_minima": out.v_minus_minima,
        }),
    );
}
