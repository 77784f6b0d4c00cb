//! Resolution of raw configs into validated plans, and their execution.

use std::sync::Arc;

use boundwave::basis::{BindingBasis, BindingKind, MirrorConfig, PotentialMatrix};
use boundwave::evolution::{
    default_time_step, init_wavepacket, AbsorbingMask, ChannelField, SplitStepPropagator, WavepacketSpec,
};
use boundwave::grid::SpatialGrid;
use boundwave::mirror1d::transmission_reflection;
use boundwave::observables::{reduced_density_matrix_window, total_energy, ObservableRecord};
use boundwave::resonance::{find_resonances, BoxGrid, ChannelSector, ResonanceSearch, ResonanceSettings};
use boundwave::stationary::{solve_smatrix, wavepacket_prediction, ScatteringMatrix, StationarySettings, WavepacketPrediction};
use boundwave::wkb::{local_minima, validate_constants, ConstantsReport, WkbCurves};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Defaults, ExperimentKind, RawConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Plan {
    Mirror(MirrorPlan),
    Simulate(SimulatePlan),
    Scatter(ScatterPlan),
    Resonances(ResonancePlan),
    Wkb(WkbPlan),
}

#[derive(Debug, Clone, Serialize)]
pub struct MirrorPlan {
    pub k: f64,
    pub vm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemParams {
    pub binding: BindingKind,
    pub channels: usize,
    pub v1: f64,
    pub v2: f64,
}

impl SystemParams {
    pub fn basis(&self) -> Result<BindingBasis, CliError> {
        BindingBasis::new(self.binding, self.channels).map_err(|e| CliError::model("basis", e))
    }

    pub fn mirror(&self) -> Result<MirrorConfig, CliError> {
        MirrorConfig::new(self.v1, self.v2).map_err(|e| CliError::model("mirror", e))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulatePlan {
    pub system: SystemParams,
    pub packet: WavepacketSpec,
    pub length: f64,
    pub grid_points: usize,
    pub dt: f64,
    pub t_final: f64,
    pub record_interval: f64,
    pub snapshot_times: Vec<f64>,
    pub rho_points: usize,
    pub absorbing: Option<AbsorbingMask>,
    pub compare_stationary: bool,
    pub prediction_nodes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatterPlan {
    pub system: SystemParams,
    pub channel: usize,
    pub energies: Vec<f64>,
    pub sweep: bool,
    pub x_max: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonancePlan {
    pub system: SystemParams,
    pub settings: ResonanceSettings,
}

#[derive(Debug, Clone, Serialize)]
pub struct WkbPlan {
    pub omega: f64,
    pub v: f64,
    pub x_max: f64,
    pub points: usize,
}

fn require<T>(value: Option<T>, key: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Validation(format!("missing required parameter '{key}'")))
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("'{key}' must be positive and finite, got {v}")))
    }
}

fn system(raw: &RawConfig, d: &mut Defaults) -> Result<SystemParams, CliError> {
    let binding = match d.take("binding", raw.binding.clone(), "harmonic".into()).as_str() {
        "harmonic" => BindingKind::Harmonic { omega: require(raw.omega, "omega")? },
        "hard_wall" => BindingKind::HardWall { half_width: require(raw.half_width, "half_width")? },
        other => {
            return Err(CliError::Validation(format!(
                "'binding' must be 'harmonic' or 'hard_wall', got '{other}'"
            )))
        }
    };
    let params = SystemParams {
        binding,
        channels: d.take("channels", raw.channels, 8),
        v1: require(raw.v1, "v1")?,
        v2: require(raw.v2, "v2")?,
    };
    params.basis()?;
    params.mirror()?;
    Ok(params)
}

fn omega_of(binding: BindingKind) -> Option<f64> {
    match binding {
        BindingKind::Harmonic { omega } => Some(omega),
        BindingKind::HardWall { .. } => None,
    }
}

/// Validates every parameter the experiment needs; nothing is computed beyond cheap checks.
pub fn resolve(kind: ExperimentKind, raw: &RawConfig) -> Result<(Plan, Vec<String>), CliError> {
    if let Some(declared) = raw.experiment {
        if declared != kind {
            return Err(CliError::Validation(format!(
                "configuration describes a '{declared}' experiment, not '{kind}'"
            )));
        }
    }
    let mut d = Defaults::default();
    let plan = match kind {
        ExperimentKind::Mirror => {
            let k = require(raw.k, "k")?;
            let vm = require(raw.vm, "vm")?;
            transmission_reflection(k, vm).map_err(|e| CliError::model("mirror", e))?;
            Plan::Mirror(MirrorPlan { k, vm })
        }
        ExperimentKind::Simulate => Plan::Simulate(resolve_simulate(raw, &mut d)?),
        ExperimentKind::Scatter => Plan::Scatter(resolve_scatter(raw, &mut d)?),
        ExperimentKind::Resonances => Plan::Resonances(resolve_resonances(raw, &mut d)?),
        ExperimentKind::Wkb => {
            let omega = positive("omega", require(raw.omega, "omega")?)?;
            let v = match (raw.v, raw.v1, raw.v2) {
                (Some(v), _, _) => v,
                (None, Some(a), Some(b)) if a == b => a,
                _ => return Err(CliError::Validation("missing required parameter 'v'".into())),
            };
            let plan = WkbPlan {
                omega,
                v,
                x_max: positive("wkb_x_max", d.take("wkb_x_max", raw.wkb_x_max, 3.0 / omega.sqrt()))?,
                points: d.take("wkb_points", raw.wkb_points, 2001),
            };
            boundwave::wkb::resonance_estimate(plan.omega, plan.v).map_err(|e| CliError::model("wkb", e))?;
            if plan.points < 3 {
                return Err(CliError::Validation("'wkb_points' must be at least 3".into()));
            }
            Plan::Wkb(plan)
        }
    };
    Ok((plan, d.into_keys()))
}

fn resolve_simulate(raw: &RawConfig, d: &mut Defaults) -> Result<SimulatePlan, CliError> {
    let system = system(raw, d)?;
    let packet = WavepacketSpec {
        momentum: require(raw.momentum, "momentum")?,
        width: require(raw.width, "width")?,
        center: require(raw.center, "center")?,
        channel: d.take("channel", raw.channel, 0),
    };
    let length = positive("length", d.take("length", raw.length, 128.0))?;
    let grid_points = d.take("grid_points", raw.grid_points, 4096);
    let grid = SpatialGrid::new(length, grid_points).map_err(|e| CliError::model("grid", e))?;
    let dt = positive("dt", d.take_with("dt", raw.dt, || default_time_step(&grid)))?;
    let t_final = positive("t_final", d.take("t_final", raw.t_final, 1.5))?;
    let record_interval = positive("record_interval", d.take("record_interval", raw.record_interval, t_final / 300.0))?;
    let mut snapshot_times = d.take("snapshot_times", raw.snapshot_times.clone(), Vec::new());
    snapshot_times.sort_by(f64::total_cmp);
    if let Some(&bad) = snapshot_times.iter().find(|&&t| !(0.0..=t_final).contains(&t)) {
        return Err(CliError::Validation(format!("snapshot time {bad} lies outside [0, t_final = {t_final}]")));
    }
    let absorbing = match (raw.absorbing_width, raw.absorbing_strength) {
        (None, None) => None,
        (Some(width), Some(strength)) => Some(AbsorbingMask {
            width: positive("absorbing_width", width)?,
            strength: positive("absorbing_strength", strength)?,
        }),
        _ => {
            return Err(CliError::Validation(
                "'absorbing_width' and 'absorbing_strength' must be given together".into(),
            ))
        }
    };
    if absorbing.is_none() {
        packet.check_no_wrap(&grid, t_final).map_err(|e| CliError::model("no-wrap condition", e))?;
    }
    let (basis, mirror) = (system.basis()?, system.mirror()?);
    init_wavepacket(Arc::new(grid), &basis, &mirror, &packet).map_err(|e| CliError::model("initial packet", e))?;
    let rho_points = d.take("rho_points", raw.rho_points, 256);
    if rho_points == 0 {
        return Err(CliError::Validation("'rho_points' must be positive".into()));
    }
    let prediction_nodes = d.take("prediction_nodes", raw.prediction_nodes, 24);
    if prediction_nodes == 0 {
        return Err(CliError::Validation("'prediction_nodes' must be positive".into()));
    }
    Ok(SimulatePlan {
        system,
        packet,
        length,
        grid_points,
        dt,
        t_final,
        record_interval,
        snapshot_times,
        rho_points,
        absorbing,
        compare_stationary: d.take("compare_stationary", raw.compare_stationary, true),
        prediction_nodes,
    })
}

fn resolve_scatter(raw: &RawConfig, d: &mut Defaults) -> Result<ScatterPlan, CliError> {
    let system = system(raw, d)?;
    let basis = system.basis()?;
    let channel = d.take("channel", raw.channel, 0);
    if channel >= system.channels {
        return Err(CliError::Validation(format!(
            "'channel' {channel} is not below 'channels' = {}",
            system.channels
        )));
    }
    let eps = basis.energies()[channel];
    let sweep = d.take("sweep", raw.sweep, raw.energy.is_none());
    let energies = if sweep {
        let lo = d.take("sweep_min", raw.sweep_min, eps + 0.1);
        let hi = d.take("sweep_max", raw.sweep_max, eps + 400.0);
        let n = d.take("sweep_points", raw.sweep_points, 200);
        if !(lo > eps && hi > lo && n >= 2) {
            return Err(CliError::Validation(format!(
                "sweep needs {eps} < sweep_min < sweep_max and at least two points"
            )));
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    } else {
        let e = require(raw.energy, "energy")?;
        if !(e > eps) {
            return Err(CliError::Validation(format!(
                "'energy' {e} must exceed the incident channel threshold {eps}"
            )));
        }
        vec![e]
    };
    if let Some(x) = raw.scatter_x_max {
        positive("scatter_x_max", x)?;
    }
    if raw.scatter_steps == Some(0) {
        return Err(CliError::Validation("'scatter_steps' must be positive".into()));
    }
    Ok(ScatterPlan { system, channel, energies, sweep, x_max: raw.scatter_x_max, steps: raw.scatter_steps })
}

fn resolve_resonances(raw: &RawConfig, d: &mut Defaults) -> Result<ResonancePlan, CliError> {
    let system = system(raw, d)?;
    let omega = omega_of(system.binding).ok_or_else(|| {
        CliError::Validation("complex scaling needs the harmonic binding (the hard wall is not analytic)".into())
    })?;
    let mirror = system.mirror()?;
    let symmetric = mirror.is_symmetric() && !mirror.is_free();
    let theta0 = if symmetric { 0.1 } else { 0.35 };
    let default_grid = BoxGrid::default_for(omega);
    let sector = match d.take("sector", raw.sector.clone(), "auto".into()).as_str() {
        // the ground state only reaches even modes of a symmetric mirror
        "auto" if symmetric => ChannelSector::Even,
        "auto" | "all" => ChannelSector::All,
        "even" => ChannelSector::Even,
        "odd" => ChannelSector::Odd,
        other => {
            return Err(CliError::Validation(format!(
                "'sector' must be auto, all, even or odd, got '{other}'"
            )))
        }
    };
    let settings = ResonanceSettings {
        thetas: d.take("thetas", raw.thetas.clone(), vec![theta0, theta0 + 0.05]),
        grid: BoxGrid {
            length: positive("box_length", d.take("box_length", raw.box_length, default_grid.length))?,
            points: d.take("box_points", raw.box_points, default_grid.points),
        },
        sector,
        angular_tolerance: d.take(
            "angular_tolerance",
            raw.angular_tolerance,
            boundwave::resonance::DEFAULT_ANGULAR_TOLERANCE,
        ),
        stability_tolerance: d.take(
            "stability_tolerance",
            raw.stability_tolerance,
            boundwave::resonance::DEFAULT_STABILITY_TOLERANCE,
        ),
    };
    if settings.thetas.len() < 2 {
        return Err(CliError::Validation("'thetas' needs at least two angles".into()));
    }
    let basis = system.basis()?;
    for &theta in &settings.thetas {
        // cheap structural check on the smallest admissible box
        let probe = BoxGrid { length: settings.grid.length, points: boundwave::resonance::MIN_BOX_POINTS };
        boundwave::resonance::ScaledHamiltonian::build(&basis, &mirror, theta, probe, ChannelSector::Even)
            .map_err(|e| CliError::model(format!("scaled Hamiltonian at θ = {theta}"), e))?;
    }
    let dim = sector.channels(system.channels).len() * settings.grid.points;
    if settings.grid.points < boundwave::resonance::MIN_BOX_POINTS
        || dim > boundwave::resonance::MAX_DENSE_DIMENSION
    {
        return Err(CliError::Validation(format!(
            "box_points = {} gives dimension {dim}; need at least {} points and at most {} in total",
            settings.grid.points,
            boundwave::resonance::MIN_BOX_POINTS,
            boundwave::resonance::MAX_DENSE_DIMENSION
        )));
    }
    Ok(ResonancePlan { system, settings })
}

#[derive(Debug, Clone, Serialize)]
pub struct MirrorResult {
    pub k: f64,
    pub vm: f64,
    pub t: Complex64,
    pub r: Complex64,
    pub transmission: f64,
    pub reflection: f64,
}

pub fn run_mirror(plan: &MirrorPlan) -> Result<MirrorResult, CliError> {
    let a = transmission_reflection(plan.k, plan.vm).map_err(|e| CliError::model("mirror", e))?;
    Ok(MirrorResult {
        k: plan.k,
        vm: plan.vm,
        t: a.t,
        r: a.r,
        transmission: a.transmission(),
        reflection: a.reflection(),
    })
}

/// Field and density-matrix magnitudes at one instant.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub requested: f64,
    pub t: f64,
    pub x: Vec<f64>,
    /// One amplitude vector per channel.
    pub channels: Vec<Vec<Complex64>>,
    pub rho_x: Vec<f64>,
    pub rho_abs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub steps: usize,
    pub t_end: f64,
    pub initial_energy: f64,
    pub max_norm_deviation: f64,
    pub max_energy_deviation: f64,
    pub max_odd_population: f64,
    pub final_left: Vec<f64>,
    pub final_right: Vec<f64>,
    pub total_left: f64,
    pub total_right: f64,
    pub final_entropy: f64,
    pub prediction: Option<WavepacketPrediction>,
    /// Largest per-channel gap between the prediction and the final populations.
    pub prediction_deviation: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct SimulationOutput {
    pub records: Vec<ObservableRecord>,
    /// `(t, ⟨H⟩)` at every record.
    pub energy_trace: Vec<(f64, f64)>,
    pub snapshots: Vec<Snapshot>,
    pub summary: Option<SimulationSummary>,
}

/// Runs the wavepacket experiment. Whatever was recorded before a failure is
/// returned alongside the error.
pub fn run_simulate(plan: &SimulatePlan) -> (SimulationOutput, Result<(), CliError>) {
    let mut out = SimulationOutput::default();
    let result = simulate_into(plan, &mut out);
    (out, result)
}

fn simulate_into(plan: &SimulatePlan, out: &mut SimulationOutput) -> Result<(), CliError> {
    let grid = Arc::new(SpatialGrid::new(plan.length, plan.grid_points).map_err(|e| CliError::model("grid", e))?);
    let basis = plan.system.basis()?;
    let mirror = plan.system.mirror()?;
    let mut field = init_wavepacket(Arc::clone(&grid), &basis, &mirror, &plan.packet)
        .map_err(|e| CliError::model("initial packet", e))?;
    let potential = PotentialMatrix::tabulate(&basis, &mirror, grid.x()).map_err(|e| CliError::model("potential", e))?;
    let mut prop = SplitStepPropagator::with_potential(&grid, basis.energies(), &potential, plan.dt)
        .map_err(|e| CliError::model("propagator", e))?;
    if let Some(mask) = plan.absorbing {
        prop = prop.with_absorbing_mask(&grid, mask);
    }
    let stride = ((plan.record_interval / plan.dt).round() as usize).max(1);
    let rho_stride = grid.len().div_ceil(plan.rho_points).max(1);
    let initial_energy = total_energy(&field, &potential);
    let odd: Vec<usize> = (1..basis.n_channels()).step_by(2).collect();
    let mut max_odd: f64 = 0.0;
    let mut calls = 0usize;
    let mut pending = plan.snapshot_times.iter().copied().peekable();
    let dt = plan.dt;
    let t_final = plan.t_final;
    let records = &mut out.records;
    let energy_trace = &mut out.energy_trace;
    let snapshots = &mut out.snapshots;
    let mut observer = |f: &ChannelField| -> boundwave::Result<()> {
        let is_last = f.time() >= t_final - 0.5 * dt;
        if calls % stride == 0 || is_last {
            records.push(ObservableRecord::capture(f)?);
            energy_trace.push((f.time(), total_energy(f, &potential)));
            max_odd = max_odd.max(odd.iter().map(|&n| f.population(n)).sum());
        }
        while let Some(&t_snap) = pending.peek() {
            if f.time() < t_snap - 0.5 * dt && !is_last {
                break;
            }
            pending.next();
            let rho = reduced_density_matrix_window(f, f64::NEG_INFINITY, f64::INFINITY, rho_stride)?;
            snapshots.push(Snapshot {
                requested: t_snap,
                t: f.time(),
                x: f.grid().x().to_vec(),
                channels: (0..f.n_channels()).map(|n| f.channel(n).to_vec()).collect(),
                rho_x: rho.x().to_vec(),
                rho_abs: rho.magnitude_rows().collect(),
            });
        }
        calls += 1;
        Ok(())
    };
    prop.evolve(&mut field, plan.t_final, 1, &mut [&mut observer])
        .map_err(|e| CliError::model(format!("propagation at t = {:.6}", field.time()), e))?;

    let last = out.records.last().expect("final record");
    let max_norm_deviation = out.records.iter().fold(0.0f64, |acc, r| acc.max((r.norm - 1.0).abs()));
    let max_energy_deviation = out
        .energy_trace
        .iter()
        .fold(0.0f64, |acc, &(_, e)| acc.max(((e - initial_energy) / initial_energy).abs()));
    let (prediction, prediction_deviation) = if plan.compare_stationary {
        let p = wavepacket_prediction(&plan.packet, &basis, &mirror, plan.prediction_nodes)
            .map_err(|e| CliError::model("stationary prediction", e))?;
        let dev = (0..basis.n_channels())
            .map(|n| (p.p_left[n] - last.p_left[n]).abs().max((p.p_right[n] - last.p_right[n]).abs()))
            .fold(0.0f64, f64::max);
        (Some(p), Some(dev))
    } else {
        (None, None)
    };
    out.summary = Some(SimulationSummary {
        steps: calls.saturating_sub(1),
        t_end: last.t,
        initial_energy,
        max_norm_deviation,
        max_energy_deviation,
        max_odd_population: max_odd,
        total_left: last.p_left.iter().sum(),
        total_right: last.p_right.iter().sum(),
        final_left: last.p_left.clone(),
        final_right: last.p_right.clone(),
        final_entropy: last.entropy,
        prediction,
        prediction_deviation,
    });
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatterOutput {
    pub channel: usize,
    pub results: Vec<ScatteringMatrix>,
}

pub fn run_scatter(plan: &ScatterPlan) -> Result<ScatterOutput, CliError> {
    let basis = plan.system.basis()?;
    let mirror = plan.system.mirror()?;
    let mut results = Vec::with_capacity(plan.energies.len());
    for &e in &plan.energies {
        let mut settings = StationarySettings::for_energy(&basis, &mirror, e);
        if let Some(x) = plan.x_max {
            settings.x_max = x;
        }
        if let Some(n) = plan.steps {
            settings.n_steps = n;
        }
        let s = solve_smatrix(e, &basis, &mirror, &settings).map_err(|err| CliError::model(format!("S-matrix at E = {e}"), err))?;
        results.push(s);
    }
    Ok(ScatterOutput { channel: plan.channel, results })
}

pub fn run_resonances(plan: &ResonancePlan) -> Result<ResonanceSearch, CliError> {
    let basis = plan.system.basis()?;
    let mirror = plan.system.mirror()?;
    find_resonances(&basis, &mirror, &plan.settings).map_err(|e| CliError::model("resonance search", e))
}

#[derive(Debug, Clone, Serialize)]
pub struct WkbOutput {
    pub curves: WkbCurves,
    pub constants: ConstantsReport,
    pub v_plus_minima: Vec<f64>,
    pub v_minus_minima: Vec<f64>,
}

pub fn run_wkb(plan: &WkbPlan) -> Result<WkbOutput, CliError> {
    let curves = WkbCurves::on_grid(plan.omega, plan.v, plan.x_max, plan.points).map_err(|e| CliError::model("wkb", e))?;
    let constants = validate_constants(plan.omega, plan.v).map_err(|e| CliError::model("wkb constants", e))?;
    let v_plus_minima = local_minima(&curves.v_plus).into_iter().map(|i| curves.x[i]).collect();
    let v_minus_minima = local_minima(&curves.v_minus).into_iter().map(|i| curves.x[i]).collect();
    Ok(WkbOutput { curves, constants, v_plus_minima, v_minus_minima })
}
