//! Flat TOML run configuration, presets and `key=value` overrides.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Mirror,
    Simulate,
    Scatter,
    Resonances,
    Wkb,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Mirror => "mirror",
            Self::Simulate => "simulate",
            Self::Scatter => "scatter",
            Self::Resonances => "resonances",
            Self::Wkb => "wkb",
        };
        f.write_str(s)
    }
}

/// Every key a config file may contain. Unset keys fall back to defaults
/// that are recorded in the run manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<ExperimentKind>,
    pub output_dir: Option<String>,

    // binding and mirrors
    pub binding: Option<String>,
    pub omega: Option<f64>,
    pub half_width: Option<f64>,
    pub channels: Option<usize>,
    pub v1: Option<f64>,
    pub v2: Option<f64>,

    // single mirror
    pub k: Option<f64>,
    pub vm: Option<f64>,

    // wavepacket and propagation
    pub momentum: Option<f64>,
    pub width: Option<f64>,
    pub center: Option<f64>,
    pub channel: Option<usize>,
    pub length: Option<f64>,
    pub grid_points: Option<usize>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub record_interval: Option<f64>,
    pub snapshot_times: Option<Vec<f64>>,
    pub rho_points: Option<usize>,
    pub absorbing_width: Option<f64>,
    pub absorbing_strength: Option<f64>,
    pub compare_stationary: Option<bool>,
    pub prediction_nodes: Option<usize>,

    // stationary scattering
    pub energy: Option<f64>,
    pub sweep: Option<bool>,
    pub sweep_min: Option<f64>,
    pub sweep_max: Option<f64>,
    pub sweep_points: Option<usize>,
    pub scatter_x_max: Option<f64>,
    pub scatter_steps: Option<usize>,

    // complex scaling
    pub box_length: Option<f64>,
    pub box_points: Option<usize>,
    pub thetas: Option<Vec<f64>>,
    pub sector: Option<String>,
    pub angular_tolerance: Option<f64>,
    pub stability_tolerance: Option<f64>,

    // adiabatic potentials
    pub v: Option<f64>,
    pub wkb_x_max: Option<f64>,
    pub wkb_points: Option<usize>,
}

/// Presets named after the figures they regenerate.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2", FIG3),
    ("fig3", FIG3),
    ("fig4", FIG4),
    ("fig5", FIG4),
    ("fig6a", FIG6A),
    ("fig6b", FIG6B),
    ("fig7b", FIG7B),
    ("fig8", FIG8),
];

const FIG3: &str = r#"
experiment = "simulate"
omega = 10.0
v1 = 0.0
v2 = 11.0
momentum = 10.0
width = 0.5
center = -5.0
t_final = 1.5
snapshot_times = [0.0, 0.25, 1.5]
"#;

const FIG4: &str = r#"
experiment = "simulate"
omega = 5.0
v1 = 15.0
v2 = 15.0
momentum = 12.0
width = 0.5
center = -6.0
length = 160.0
dt = 6.0e-5
t_final = 1.5
snapshot_times = [0.0, 0.5, 0.8, 1.1, 1.5]
"#;

const FIG7B: &str = r#"
experiment = "simulate"
omega = 5.0
v1 = 20.0
v2 = 20.0
momentum = 8.0
width = 0.5
center = -6.0
length = 160.0
dt = 6.0e-5
t_final = 2.0
snapshot_times = [1.0, 1.5, 2.0]
"#;

const FIG6A: &str = r#"
experiment = "resonances"
omega = 5.0
v1 = 0.0
v2 = 30.0
thetas = [0.35, 0.4]
"#;

const FIG6B: &str = r#"
experiment = "resonances"
omega = 5.0
v1 = 30.0
v2 = 30.0
thetas = [0.1, 0.15]
"#;

const FIG8: &str = r#"
experiment = "wkb"
omega = 0.1
v = 10.0
"#;

pub fn preset(name: &str) -> Result<Table, CliError> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        CliError::Validation(format!("unknown preset '{name}' (known: {})", names.join(", ")))
    })?;
    text.parse::<Table>().map_err(|e| CliError::Validation(format!("preset '{name}': {e}")))
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    text.parse::<Table>()
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
}

/// Parses `key=value`; the value is read as a TOML scalar or list, falling back to a bare string.
pub fn parse_override(item: &str) -> Result<(String, Value), CliError> {
    let (key, value) = item
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("override '{item}' is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Validation(format!("override '{item}' has an empty key")));
    }
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(value.to_string()));
    Ok((key.to_string(), parsed))
}

/// Later layers win.
pub fn merge(layers: impl IntoIterator<Item = Table>) -> Table {
    let mut out = Table::new();
    for layer in layers {
        out.extend(layer);
    }
    out
}

pub fn to_raw(table: Table) -> Result<RawConfig, CliError> {
    // integers are accepted wherever floats are expected
    let table: Table = table
        .into_iter()
        .map(|(k, v)| (k.clone(), widen(&k, v)))
        .collect();
    RawConfig::deserialize(Value::Table(table)).map_err(|e| CliError::Validation(format!("config: {e}")))
}

const FLOAT_KEYS: &[&str] = &[
    "omega", "half_width", "v1", "v2", "k", "vm", "momentum", "width", "center", "length", "dt",
    "t_final", "record_interval", "snapshot_times", "absorbing_width", "absorbing_strength",
    "energy", "sweep_min", "sweep_max", "scatter_x_max", "box_length", "thetas",
    "angular_tolerance", "stability_tolerance", "v", "wkb_x_max",
];

fn widen(key: &str, v: Value) -> Value {
    if !FLOAT_KEYS.contains(&key) {
        return v;
    }
    match v {
        Value::Integer(i) => Value::Float(i as f64),
        Value::Array(items) => Value::Array(items.into_iter().map(|x| widen(key, x)).collect()),
        other => other,
    }
}

/// Resolves optional values against defaults, remembering which ones were applied.
#[derive(Debug, Default)]
pub struct Defaults {
    applied: BTreeSet<String>,
}

impl Defaults {
    pub fn take<T>(&mut self, key: &str, value: Option<T>, default: T) -> T {
        value.unwrap_or_else(|| {
            self.applied.insert(key.to_string());
            default
        })
    }

    pub fn take_with<T>(&mut self, key: &str, value: Option<T>, default: impl FnOnce() -> T) -> T {
        value.unwrap_or_else(|| {
            self.applied.insert(key.to_string());
            default()
        })
    }

    pub fn into_keys(self) -> Vec<String> {
        self.applied.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for (name, _) in PRESETS {
            let raw = to_raw(preset(name).unwrap()).unwrap();
            assert!(raw.experiment.is_some(), "{name}");
        }
        let fig3 = to_raw(preset("fig3").unwrap()).unwrap();
        assert_eq!((fig3.momentum, fig3.v2, fig3.width, fig3.omega), (Some(10.0), Some(11.0), Some(0.5), Some(10.0)));
        let fig4 = to_raw(preset("fig4").unwrap()).unwrap();
        assert_eq!((fig4.momentum, fig4.v1, fig4.v2, fig4.omega), (Some(12.0), Some(15.0), Some(15.0), Some(5.0)));
        let fig7b = to_raw(preset("fig7b").unwrap()).unwrap();
        assert_eq!((fig7b.momentum, fig7b.v1, fig7b.omega), (Some(8.0), Some(20.0), Some(5.0)));
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn overrides() {
        assert_eq!(parse_override("omega=5").unwrap(), ("omega".into(), Value::Integer(5)));
        assert_eq!(parse_override(" thetas = [0.1, 0.2]").unwrap().1, Value::Array(vec![Value::Float(0.1), Value::Float(0.2)]));
        assert_eq!(parse_override("sector=even").unwrap().1, Value::String("even".into()));
        assert!(parse_override("omega").is_err());
        let raw = to_raw(merge([preset("fig3").unwrap(), Table::from_iter([parse_override("omega=20").unwrap()])])).unwrap();
        assert_eq!(raw.omega, Some(20.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let t: Table = "omgea = 3.0".parse().unwrap();
        let err = to_raw(t).unwrap_err();
        assert!(err.to_string().contains("omgea"));
        let t: Table = "channels = 2.5".parse().unwrap();
        assert!(to_raw(t).is_err());
    }

    #[test]
    fn defaults_are_tracked() {
        let mut d = Defaults::default();
        assert_eq!(d.take("a", None, 3), 3);
        assert_eq!(d.take("b", Some(1), 3), 1);
        assert_eq!(d.take_with("c", None::<f64>, || 2.0), 2.0);
        assert_eq!(d.into_keys(), vec!["a".to_string(), "c".to_string()]);
    }
}
