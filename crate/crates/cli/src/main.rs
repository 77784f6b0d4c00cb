use std::path::PathBuf;
use std::process::ExitCode;

use boundwave_cli::config::{parse_override, ExperimentKind};
use boundwave_cli::error::CliError;
use boundwave_cli::{execute, Request};
use clap::{Args, Parser, Subcommand};
use toml::Value;

#[derive(Parser)]
#[command(name = "boundwave", version, about = "Bound-pair scattering at delta mirrors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named parameter preset (fig2 … fig8)
    #[arg(long)]
    preset: Option<String>,
    /// Override a configuration key, e.g. --set t_final=2.0
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Run directory below $BOUNDWAVE_OUTPUT_ROOT
    #[arg(long)]
    output_dir: Option<String>,
}

#[derive(Args)]
struct Physics {
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    v1: Option<f64>,
    #[arg(long)]
    v2: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Transmission and reflection at a single delta mirror
    Mirror {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        vm: Option<f64>,
    },
    /// Time-dependent wavepacket scattering
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        physics: Physics,
    },
    /// Stationary S-matrix at one energy or over a sweep
    Scatter {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        physics: Physics,
        #[arg(long)]
        energy: Option<f64>,
        #[arg(long)]
        sweep: bool,
    },
    /// Complex-scaling resonance search
    Resonances {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        physics: Physics,
        /// Scaling angles, comma separated
        #[arg(long, value_delimiter = ',')]
        theta: Vec<f64>,
    },
    /// Adiabatic potentials and the double-well resonance estimate
    Wkb {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        v: Option<f64>,
    },
}

fn float(key: &str, v: Option<f64>, out: &mut Vec<(String, Value)>) {
    if let Some(v) = v {
        out.push((key.into(), Value::Float(v)));
    }
}

fn physics(p: &Physics, out: &mut Vec<(String, Value)>) {
    float("omega", p.omega, out);
    float("v1", p.v1, out);
    float("v2", p.v2, out);
}

fn request(cli: Cli) -> Result<Request, CliError> {
    let mut direct = Vec::new();
    let (kind, common) = match cli.command {
        Command::Mirror { common, k, vm } => {
            float("k", k, &mut direct);
            float("vm", vm, &mut direct);
            (ExperimentKind::Mirror, common)
        }
        Command::Simulate { common, physics: p } => {
            physics(&p, &mut direct);
            (ExperimentKind::Simulate, common)
        }
        Command::Scatter { common, physics: p, energy, sweep } => {
            physics(&p, &mut direct);
            float("energy", energy, &mut direct);
            if sweep {
                direct.push(("sweep".into(), Value::Boolean(true)));
            }
            (ExperimentKind::Scatter, common)
        }
        Command::Resonances { common, physics: p, theta } => {
            physics(&p, &mut direct);
            if !theta.is_empty() {
                direct.push(("thetas".into(), Value::Array(theta.into_iter().map(Value::Float).collect())));
            }
            (ExperimentKind::Resonances, common)
        }
        Command::Wkb { common, omega, v } => {
            float("omega", omega, &mut direct);
            float("v", v, &mut direct);
            (ExperimentKind::Wkb, common)
        }
    };
    let mut overrides = common.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    overrides.extend(direct);
    if let Some(dir) = common.output_dir {
        overrides.push(("output_dir".into(), Value::String(dir)));
    }
    Ok(Request { kind, preset: common.preset, config: common.config, overrides })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match request(cli).and_then(|req| execute(&req)) {
        Ok(report) => {
            if let Some(dir) = &report.dir {
                eprintln!("wrote {}", dir.display());
            }
            println!("{}", serde_json::to_string_pretty(&report.summary).expect("serializable summary"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
