//! Command-line driver: configuration, run orchestration and file output.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::path::PathBuf;
use std::time::Instant;

use serde_json::{json, Value as Json};
use toml::{Table, Value};

use crate::config::{merge, preset, read_table, to_raw, ExperimentKind};
use crate::error::CliError;
use crate::output::{output_root, Artifacts};
use crate::run::{resolve, Plan};

/// One invocation: config layers are applied as preset < file < overrides.
#[derive(Debug, Clone)]
pub struct Request {
    pub kind: ExperimentKind,
    pub preset: Option<String>,
    pub config: Option<PathBuf>,
    pub overrides: Vec<(String, Value)>,
}

/// What a finished run produced.
#[derive(Debug)]
pub struct Report {
    pub dir: Option<PathBuf>,
    /// Printed to standard output.
    pub summary: Json,
}

pub fn execute(req: &Request) -> Result<Report, CliError> {
    let mut layers = Vec::new();
    if let Some(name) = &req.preset {
        layers.push(preset(name)?);
    }
    if let Some(path) = &req.config {
        layers.push(read_table(path)?);
    }
    layers.push(Table::from_iter(req.overrides.iter().cloned()));
    let raw = to_raw(merge(layers))?;
    let (plan, defaults) = resolve(req.kind, &raw)?;

    if let Plan::Mirror(p) = &plan {
        let result = run::run_mirror(p)?;
        return Ok(Report { dir: None, summary: serde_json::to_value(result).expect("serializable") });
    }

    let name = raw
        .output_dir
        .clone()
        .or_else(|| req.preset.clone())
        .unwrap_or_else(|| req.kind.to_string());
    let dir = output_root().join(name);
    let started = Instant::now();
    let mut arts = Artifacts::default();
    let mut warnings: Vec<String> = Vec::new();
    let (summary, outcome) = match &plan {
        Plan::Mirror(_) => unreachable!(),
        Plan::Simulate(p) => {
            let (out, result) = run::run_simulate(p);
            output::simulation_artifacts(&out, p.system.channels, &mut arts);
            if let Some(pred) = out.summary.as_ref().and_then(|s| s.prediction.as_ref()) {
                warnings.extend(pred.warnings.iter().cloned());
            }
            (serde_json::to_value(&out.summary).expect("serializable"), result)
        }
        Plan::Scatter(p) => match run::run_scatter(p) {
            Ok(out) => {
                output::scatter_artifacts(&out, p.sweep, p.system.channels, &mut arts);
                let summary = if p.sweep {
                    json!({ "energies": out.results.len() })
                } else {
                    serde_json::to_value(&out.results[0]).expect("serializable")
                };
                (summary, Ok(()))
            }
            Err(e) => (Json::Null, Err(e)),
        },
        Plan::Resonances(p) => match run::run_resonances(p) {
            Ok(out) => {
                arts.add_json("spectra.json", &out.spectra);
                arts.add_json("resonances.json", &json!({ "channels": out.channels, "resonances": out.resonances }));
                if out.resonances.iter().any(|r| r.ambiguous) {
                    warnings.push("some candidates had more than one partner within the pairing radius".into());
                }
                (json!({ "resonances": out.resonances }), Ok(()))
            }
            Err(e) => (Json::Null, Err(e)),
        },
        Plan::Wkb(p) => match run::run_wkb(p) {
            Ok(out) => {
                output::wkb_artifacts(&out, &mut arts);
                warnings.extend(out.curves.estimate.warning.iter().cloned());
                (json!({ "E_S": out.curves.estimate.symmetric, "E_A": out.curves.estimate.antisymmetric }), Ok(()))
            }
            Err(e) => (Json::Null, Err(e)),
        },
    };

    let mut files = arts.names();
    files.push("manifest.json".into());
    let manifest = json!({
        "tool": "boundwave",
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": req.kind,
        "preset": req.preset,
        "config_file": req.config,
        "parameters": plan,
        "defaults_applied": defaults,
        "status": if outcome.is_ok() { "complete" } else { "partial" },
        "error": outcome.as_ref().err().map(|e| e.to_string()),
        "warnings": warnings,
        "files": files,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
    });
    arts.add_json("manifest.json", &manifest);
    arts.write(&dir)?;
    outcome?;
    Ok(Report { dir: Some(dir), summary })
}
