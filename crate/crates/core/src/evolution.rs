//! Split-step spectral propagation of the coupled center-of-mass amplitudes
//! `i ∂_t f_n = -f_n'' + ε_n f_n + Σ_m V_nm(x) f_m`.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::{Mat, Side};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::basis::{BindingBasis, MirrorConfig, PotentialMatrix};
use crate::error::{Error, Result};
use crate::grid::SpatialGrid;

/// Number of edge points watched by the wrap-around monitor on each side.
pub const EDGE_POINTS: usize = 5;
/// Edge probability above which a run is aborted.
pub const EDGE_TOLERANCE: f64 = 1e-8;
/// Allowed mirror overlap of the initial packet.
pub const INITIAL_OVERLAP_TOLERANCE: f64 = 1e-12;

/// Couplings below this (in units of 1/dt) are treated as exactly zero.
const INACTIVE_COUPLING: f64 = 1e-20;

/// Gaussian center-of-mass packet `(2/πσ²)^{1/4} exp(iPx - (x - x0)²/σ²)` in one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavepacketSpec {
    pub momentum: f64,
    pub width: f64,
    pub center: f64,
    pub channel: usize,
}

impl WavepacketSpec {
    pub fn new(momentum: f64, width: f64, center: f64) -> Self {
        Self { momentum, width, center, channel: 0 }
    }

    pub fn amplitude(&self, x: f64) -> Complex64 {
        let norm = (2.0 / (PI * self.width * self.width)).powf(0.25);
        let d = x - self.center;
        Complex64::from_polar(norm * (-(d * d) / (self.width * self.width)).exp(), self.momentum * x)
    }

    /// Normalized momentum density `|f̂(k)|²`; mean `P`, variance `1/σ²`.
    pub fn momentum_density(&self, k: f64) -> f64 {
        let d = k - self.momentum;
        self.width / (2.0 * PI).sqrt() * (-0.5 * self.width * self.width * d * d).exp()
    }

    /// Group speed `2k` of the fastest component kept by the no-wrap rule.
    pub fn max_speed(&self) -> f64 {
        2.0 * (self.momentum.abs() + 4.0 / self.width)
    }

    /// Requires `L/2 > |x0| + 2(P + 4/σ) t_final`.
    pub fn check_no_wrap(&self, grid: &SpatialGrid, t_final: f64) -> Result<()> {
        let reach = self.center.abs() + self.max_speed() * t_final;
        if grid.length() / 2.0 <= reach {
            return Err(Error::Config(format!(
                "grid half-length {} does not exceed the packet reach {reach:.3} at t = {t_final}",
                grid.length() / 2.0
            )));
        }
        Ok(())
    }

    fn validate(&self, grid: &SpatialGrid, basis: &BindingBasis) -> Result<()> {
        for (name, v) in [("momentum", self.momentum), ("center", self.center)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("packet {name} must be finite")));
            }
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::Config(format!("packet width must be positive, got {}", self.width)));
        }
        if self.center >= 0.0 {
            return Err(Error::Config("packet must start left of the mirror (center < 0)".into()));
        }
        if self.channel >= basis.n_channels() {
            return Err(Error::IndexOutOfRange { index: self.channel, n_channels: basis.n_channels() });
        }
        if self.center.abs() + 4.0 * self.width >= grid.length() / 2.0 {
            return Err(Error::Config(format!(
                "packet |x0| + 4σ = {} reaches the grid boundary {}",
                self.center.abs() + 4.0 * self.width,
                grid.length() / 2.0
            )));
        }
        Ok(())
    }
}

/// Radius outside which every `|V_nm|` is below `tol`.
pub fn mirror_radius(basis: &BindingBasis, mirror: &MirrorConfig, tol: f64) -> f64 {
    let strength = 2.0 * (mirror.v1 + mirror.v2);
    if strength == 0.0 {
        return 0.0;
    }
    basis.support_radius(tol / strength)
}

/// Amplitudes `f_n(x_j, t)`, stored channel-major.
#[derive(Debug, Clone)]
pub struct ChannelField {
    t: f64,
    grid: Arc<SpatialGrid>,
    thresholds: Arc<[f64]>,
    data: Vec<Complex64>,
}

impl ChannelField {
    pub fn zeros(grid: Arc<SpatialGrid>, basis: &BindingBasis) -> Self {
        let data = vec![Complex64::new(0.0, 0.0); grid.len() * basis.n_channels()];
        Self { t: 0.0, grid, thresholds: basis.energies().into(), data }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> Arc<SpatialGrid> {
        Arc::clone(&self.grid)
    }

    /// Channel thresholds `ε_n` of the basis the field was built on.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn n_channels(&self) -> usize {
        self.thresholds.len()
    }

    pub fn channel(&self, n: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.data[n * len..(n + 1) * len]
    }

    pub fn channel_mut(&mut self, n: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.data[n * len..(n + 1) * len]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// `∫ |f_n|² dx`.
    pub fn population(&self, n: usize) -> f64 {
        self.channel(n).iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Probability within `EDGE_POINTS` of either grid edge.
    pub fn edge_probability(&self) -> f64 {
        let len = self.grid.len();
        let mut sum = 0.0;
        for n in 0..self.n_channels() {
            let ch = self.channel(n);
            sum += ch[..EDGE_POINTS].iter().chain(&ch[len - EDGE_POINTS..]).map(|v| v.norm_sqr()).sum::<f64>();
        }
        sum * self.grid.dx()
    }

    /// Probability inside `|x| < radius`.
    pub fn probability_within(&self, radius: f64) -> f64 {
        let x = self.grid.x();
        let mut sum = 0.0;
        for n in 0..self.n_channels() {
            sum += self
                .channel(n)
                .iter()
                .zip(x)
                .filter(|(_, x)| x.abs() < radius)
                .map(|(v, _)| v.norm_sqr())
                .sum::<f64>();
        }
        sum * self.grid.dx()
    }
}

/// Builds the product initial state: packet in `spec.channel`, other channels empty.
pub fn init_wavepacket(
    grid: Arc<SpatialGrid>,
    basis: &BindingBasis,
    mirror: &MirrorConfig,
    spec: &WavepacketSpec,
) -> Result<ChannelField> {
    spec.validate(&grid, basis)?;
    let mut field = ChannelField::zeros(Arc::clone(&grid), basis);
    for (v, &x) in field.channel_mut(spec.channel).iter_mut().zip(grid.x()) {
        *v = spec.amplitude(x);
    }
    let radius = mirror_radius(basis, mirror, INITIAL_OVERLAP_TOLERANCE);
    let overlap = field.probability_within(radius);
    if overlap >= INITIAL_OVERLAP_TOLERANCE {
        return Err(Error::Config(format!(
            "initial packet overlaps the mirror region |x| < {radius:.3} with probability {overlap:.3e}"
        )));
    }
    let norm = field.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Config(format!(
            "initial packet is not resolved by the grid (norm {norm})"
        )));
    }
    Ok(field)
}

/// Default step `dt = 0.25 dx² / π`.
pub fn default_time_step(grid: &SpatialGrid) -> f64 {
    0.25 * grid.dx() * grid.dx() / PI
}

/// Called by [`SplitStepPropagator::evolve`] on a schedule.
pub trait Observer {
    fn observe(&mut self, field: &ChannelField) -> Result<()>;
}

impl<F: FnMut(&ChannelField) -> Result<()>> Observer for F {
    fn observe(&mut self, field: &ChannelField) -> Result<()> {
        self(field)
    }
}

/// Exponential absorbing layer at the grid edges, off unless requested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingMask {
    pub width: f64,
    pub strength: f64,
}

/// Strang splitting: half local channel map, full kinetic phase, half local map.
pub struct SplitStepPropagator {
    dt: f64,
    n_channels: usize,
    n_points: usize,
    /// `exp(-i ε_n dt/2)`, used wherever the coupling vanishes.
    diagonal_phase: Vec<Complex64>,
    /// Contiguous block of grid points carrying a full channel map.
    active: std::ops::Range<usize>,
    /// Row-major `N × N` unitaries, one per active point.
    local_maps: Vec<Complex64>,
    /// `exp(-i k² dt) / N_grid`.
    kinetic_phase: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    mask: Option<Vec<f64>>,
}

impl SplitStepPropagator {
    pub fn new(
        grid: &SpatialGrid,
        basis: &BindingBasis,
        mirror: &MirrorConfig,
        dt: f64,
    ) -> Result<Self> {
        let potential = PotentialMatrix::tabulate(basis, mirror, grid.x())?;
        Self::with_potential(grid, basis.energies(), &potential, dt)
    }

    pub fn with_potential(
        grid: &SpatialGrid,
        thresholds: &[f64],
        potential: &PotentialMatrix,
        dt: f64,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let n_ch = thresholds.len();
        let n_pts = grid.len();
        if potential.n_channels() != n_ch || potential.n_points() != n_pts {
            return Err(Error::Config("potential table does not match grid and basis".into()));
        }
        let diagonal_phase = thresholds
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -0.5 * e * dt))
            .collect();

        let is_active = |j: usize| potential.max_abs_at(j) * dt > INACTIVE_COUPLING;
        let first = (0..n_pts).find(|&j| is_active(j));
        let active = match first {
            Some(lo) => {
                let hi = (0..n_pts).rev().find(|&j| is_active(j)).unwrap_or(lo);
                lo..hi + 1
            }
            None => 0..0,
        };
        let mut local_maps = Vec::with_capacity(active.len() * n_ch * n_ch);
        for j in active.clone() {
            local_maps.extend(half_step_map(thresholds, potential.at(j), dt)?);
        }

        let scale = 1.0 / n_pts as f64;
        let kinetic_phase = grid.k().iter().map(|&k| Complex64::from_polar(scale, -k * k * dt)).collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_pts);
        let inverse = planner.plan_fft_inverse(n_pts);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Ok(Self {
            dt,
            n_channels: n_ch,
            n_points: n_pts,
            diagonal_phase,
            active,
            local_maps,
            kinetic_phase,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            mask: None,
        })
    }

    /// Enables an absorbing layer; disables the wrap-around monitor.
    pub fn with_absorbing_mask(mut self, grid: &SpatialGrid, mask: AbsorbingMask) -> Self {
        let inner = grid.length() / 2.0 - mask.width;
        self.mask = Some(
            grid.x()
                .iter()
                .map(|&x| {
                    let depth = ((x.abs() - inner) / mask.width).clamp(0.0, 1.0);
                    (-mask.strength * self.dt * depth * depth).exp()
                })
                .collect(),
        );
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of grid points that carry a non-diagonal channel map.
    pub fn active_points(&self) -> usize {
        self.active.len()
    }

    /// One Strang step of length `dt`.
    pub fn step(&mut self, field: &mut ChannelField) -> Result<()> {
        self.check_shape(field)?;
        self.apply_local(field);
        for n in 0..self.n_channels {
            let ch = field.channel_mut(n);
            self.forward.process_with_scratch(ch, &mut self.scratch);
            for (v, p) in ch.iter_mut().zip(&self.kinetic_phase) {
                *v *= p;
            }
            self.inverse.process_with_scratch(ch, &mut self.scratch);
        }
        self.apply_local(field);
        if let Some(mask) = &self.mask {
            for n in 0..self.n_channels {
                for (v, m) in field.channel_mut(n).iter_mut().zip(mask) {
                    *v *= m;
                }
            }
        }
        field.t += self.dt;
        if !field.is_finite() {
            return Err(Error::Blowup { t: field.t, max_abs: field.max_abs() });
        }
        Ok(())
    }

    /// Steps until `t ≥ t_final`, calling every observer at the start, every
    /// `stride` steps and after the last step.
    pub fn evolve(
        &mut self,
        field: &mut ChannelField,
        t_final: f64,
        stride: usize,
        observers: &mut [&mut dyn Observer],
    ) -> Result<()> {
        if !(t_final > field.t) {
            return Err(Error::Config(format!(
                "final time {t_final} must exceed the current time {}",
                field.t
            )));
        }
        let stride = stride.max(1);
        let t0 = field.t;
        let n_steps = ((t_final - t0) / self.dt - 1e-9).ceil() as usize;
        for obs in observers.iter_mut() {
            obs.observe(field)?;
        }
        for i in 1..=n_steps {
            self.step(field)?;
            field.t = t0 + i as f64 * self.dt;
            if self.mask.is_none() {
                let edge = field.edge_probability();
                if edge > EDGE_TOLERANCE {
                    return Err(Error::WrapAround { t: field.t, density: edge });
                }
            }
            if i % stride == 0 || i == n_steps {
                for obs in observers.iter_mut() {
                    obs.observe(field)?;
                }
            }
        }
        Ok(())
    }

    fn check_shape(&self, field: &ChannelField) -> Result<()> {
        if field.n_channels() != self.n_channels || field.grid().len() != self.n_points {
            return Err(Error::Config("field shape does not match the propagator".into()));
        }
        Ok(())
    }

    fn apply_local(&self, field: &mut ChannelField) {
        let n_ch = self.n_channels;
        let n_pts = self.n_points;
        let data = &mut field.data;
        for n in 0..n_ch {
            let phase = self.diagonal_phase[n];
            let ch = &mut data[n * n_pts..(n + 1) * n_pts];
            let (head, rest) = ch.split_at_mut(self.active.start);
            let tail = &mut rest[self.active.len()..];
            for v in head.iter_mut().chain(tail.iter_mut()) {
                *v *= phase;
            }
        }
        let mut input = vec![Complex64::new(0.0, 0.0); n_ch];
        for (a, j) in self.active.clone().enumerate() {
            let map = &self.local_maps[a * n_ch * n_ch..(a + 1) * n_ch * n_ch];
            for n in 0..n_ch {
                input[n] = data[n * n_pts + j];
            }
            for n in 0..n_ch {
                let row = &map[n * n_ch..(n + 1) * n_ch];
                data[n * n_pts + j] = row.iter().zip(&input).map(|(u, v)| u * v).sum();
            }
        }
    }
}

/// `exp(-i (ε̂ + V̂) dt / 2)` via the eigendecomposition of the real symmetric block.
fn half_step_map(thresholds: &[f64], coupling: &[f64], dt: f64) -> Result<Vec<Complex64>> {
    let n = thresholds.len();
    let h = Mat::<f64>::from_fn(n, n, |a, b| coupling[a * n + b] + if a == b { thresholds[a] } else { 0.0 });
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("channel map eigensolve failed: {e:?}")))?;
    let q = eig.U();
    let s = eig.S().column_vector();
    let phases: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(1.0, -0.5 * s[i] * dt)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            out[a * n + b] = (0..n).map(|i| phases[i] * (q[(a, i)] * q[(b, i)])).sum();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(omega: f64, n_ch: usize, v1: f64, v2: f64) -> (Arc<SpatialGrid>, BindingBasis, MirrorConfig) {
        let grid = Arc::new(SpatialGrid::new(40.0, 1024).unwrap());
        let basis = BindingBasis::harmonic(omega, n_ch).unwrap();
        let mirror = MirrorConfig::new(v1, v2).unwrap();
        (grid, basis, mirror)
    }

    #[test]
    fn initial_packet_moments() {
        let (grid, basis, mirror) = setup(10.0, 4, 0.0, 11.0);
        let spec = WavepacketSpec::new(10.0, 0.5, -10.0);
        let f = init_wavepacket(grid.clone(), &basis, &mirror, &spec).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-10);
        assert!((f.population(0) - 1.0).abs() < 1e-10);
        let dx = grid.dx();
        let ch = f.channel(0);
        let spread: f64 = ch.iter().zip(grid.x()).map(|(v, x)| v.norm_sqr() * (x + 10.0).powi(2)).sum::<f64>() * dx;
        assert!((spread - 0.0625).abs() < 1e-6, "{spread}");

        let mut spec_buf = ch.to_vec();
        FftPlanner::new().plan_fft_forward(grid.len()).process(&mut spec_buf);
        let weight: f64 = spec_buf.iter().map(|v| v.norm_sqr()).sum();
        let mean_k: f64 = spec_buf.iter().zip(grid.k()).map(|(v, k)| v.norm_sqr() * k).sum::<f64>() / weight;
        assert!((mean_k - 10.0).abs() < 1e-6, "{mean_k}");
    }

    #[test]
    fn rejects_bad_packets() {
        let (grid, basis, mirror) = setup(10.0, 4, 0.0, 11.0);
        let bad = [
            WavepacketSpec::new(10.0, 0.5, 1.0),
            WavepacketSpec::new(10.0, 0.5, -19.0),
            WavepacketSpec::new(10.0, 0.5, -0.5),
            WavepacketSpec::new(10.0, -0.5, -10.0),
            WavepacketSpec { channel: 4, ..WavepacketSpec::new(10.0, 0.5, -10.0) },
        ];
        for spec in bad {
            assert!(init_wavepacket(grid.clone(), &basis, &mirror, &spec).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn half_step_map_is_unitary() {
        let basis = BindingBasis::harmonic(5.0, 6).unwrap();
        let mirror = MirrorConfig::new(3.0, 20.0).unwrap();
        let v = crate::basis::coupling_matrix(&basis, &mirror, 0.3).unwrap();
        let u = half_step_map(basis.energies(), &v, 0.01).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                let dot: Complex64 = (0..6).map(|i| u[a * 6 + i].conj() * u[b * 6 + i]).sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn free_gaussian_matches_closed_form() {
        let grid = Arc::new(SpatialGrid::new(80.0, 2048).unwrap());
        let basis = BindingBasis::harmonic(10.0, 1).unwrap();
        let mirror = MirrorConfig::new(0.0, 0.0).unwrap();
        let spec = WavepacketSpec::new(3.0, 1.0, -10.0);
        let mut f = init_wavepacket(grid.clone(), &basis, &mirror, &spec).unwrap();
        let mut prop = SplitStepPropagator::new(&grid, &basis, &mirror, 1e-3).unwrap();
        prop.evolve(&mut f, 1.0, 1000, &mut []).unwrap();
        let t = f.time();
        // free evolution under i∂t f = -f'' + ε0 f of a Gaussian with width σ
        let (p, s2, x0, e0) = (3.0, 1.0f64, -10.0, basis.energies()[0]);
        let c = Complex64::new(s2, 4.0 * t);
        let norm = (2.0 / (PI * s2)).powf(0.25) * (s2 / c).sqrt();
        let err = grid
            .x()
            .iter()
            .zip(f.channel(0))
            .map(|(&x, v)| {
                let d = x - x0 - 2.0 * p * t;
                let exact = norm
                    * (-(d * d) / c + Complex64::new(0.0, p * x - p * p * t - e0 * t)).exp();
                (exact - v).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "max error {err}");
    }

    #[test]
    fn norm_is_conserved_over_many_steps() {
        let (grid, basis, mirror) = setup(10.0, 4, 0.0, 11.0);
        let spec = WavepacketSpec::new(5.0, 0.5, -5.0);
        let mut f = init_wavepacket(grid.clone(), &basis, &mirror, &spec).unwrap();
        let mut prop = SplitStepPropagator::new(&grid, &basis, &mirror, 1e-4).unwrap();
        for _ in 0..10_000 {
            prop.step(&mut f).unwrap();
        }
        assert!((f.norm() - 1.0).abs() < 1e-10, "{}", f.norm());
    }

    #[test]
    fn populations_frozen_away_from_the_mirror() {
        let (grid, basis, mirror) = setup(10.0, 4, 0.0, 11.0);
        let spec = WavepacketSpec::new(2.0, 0.5, -10.0);
        spec.check_no_wrap(&grid, 0.3).unwrap();
        let mut f = init_wavepacket(grid.clone(), &basis, &mirror, &spec).unwrap();
        let mut prop = SplitStepPropagator::new(&grid, &basis, &mirror, 1e-3).unwrap();
        prop.evolve(&mut f, 0.3, 100, &mut []).unwrap();
        assert!((f.population(0) - 1.0).abs() < 1e-10);
        for n in 1..4 {
            assert!(f.population(n) < 1e-10);
        }
    }

    #[test]
    fn wrap_around_is_detected() {
        let grid = Arc::new(SpatialGrid::new(20.0, 256).unwrap());
        let basis = BindingBasis::harmonic(10.0, 1).unwrap();
        let mirror = MirrorConfig::new(0.0, 0.0).unwrap();
        let spec = WavepacketSpec::new(10.0, 0.5, -5.0);
        let mut f = init_wavepacket(grid.clone(), &basis, &mirror, &spec).unwrap();
        let mut prop = SplitStepPropagator::new(&grid, &basis, &mirror, 1e-3).unwrap();
        let err = prop.evolve(&mut f, 2.0, 10, &mut []).unwrap_err();
        assert!(matches!(err, Error::WrapAround { .. }));
        assert!(spec.check_no_wrap(&grid, 2.0).is_err());
    }

    #[test]
    fn absorbing_mask_removes_outgoing_flux() {
        let grid = Arc::new(SpatialGrid::new(20.0, 256).unwrap());
        let basis = BindingBasis::harmonic(10.0, 1).unwrap();
        let mirror = MirrorConfig::new(0.0, 0.0).unwrap();
        let spec = WavepacketSpec::new(10.0, 0.5, -5.0);
        let mut f = init_wavepacket(grid.clone(), &basis, &mirror, &spec).unwrap();
        let mut prop = SplitStepPropagator::new(&grid, &basis, &mirror, 1e-3)
            .unwrap()
            .with_absorbing_mask(&grid, AbsorbingMask { width: 3.0, strength: 200.0 });
        prop.evolve(&mut f, 1.5, 10, &mut []).unwrap();
        assert!(f.norm() < 0.05, "{}", f.norm());
    }

    #[test]
    fn observers_follow_the_stride() {
        let (grid, basis, mirror) = setup(10.0, 2, 0.0, 0.0);
        let spec = WavepacketSpec::new(1.0, 0.5, -5.0);
        let mut f = init_wavepacket(grid.clone(), &basis, &mirror, &spec).unwrap();
        let mut prop = SplitStepPropagator::new(&grid, &basis, &mirror, 0.01).unwrap();
        let mut times = Vec::new();
        let mut obs = |f: &ChannelField| {
            times.push(f.time());
            Ok(())
        };
        prop.evolve(&mut f, 0.095, 3, &mut [&mut obs]).unwrap();
        assert_eq!(times.len(), 5);
        assert!((times[4] - 0.1).abs() < 1e-12);
    }
}
