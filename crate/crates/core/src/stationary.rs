//! Time-independent coupled-channel scattering: integrates
//! `f'' = (ε̂ + V̂(x) - E) f` inward from both ends of the coupling region and
//! matches plane waves (open channels) and decaying exponentials (closed
//! channels) to extract transmission and reflection amplitudes.

use std::num::NonZeroUsize;

use faer::linalg::solvers::Solve;
use faer::Mat;
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::basis::{coupling_matrix, BindingBasis, MirrorConfig};
use crate::error::{Error, Result};
use crate::evolution::{mirror_radius, WavepacketSpec};

/// Couplings are truncated once every `|V_nm|` is below this.
pub const COUPLING_CUTOFF: f64 = 1e-12;

/// Phase advance per RK4 step used to pick default step counts.
const PHASE_PER_STEP: f64 = 0.01;

/// Closed-channel solutions are re-orthonormalized once they grow past this norm.
const REORTHOGONALIZE_ABOVE: f64 = 1e4;

/// Smallest tolerated ratio of LU pivots of the equilibrated matching matrix.
const MIN_PIVOT_RATIO: f64 = 1e-13;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Integration range `[-x_max, x_max]` and RK4 steps per half range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationarySettings {
    pub x_max: f64,
    pub n_steps: usize,
}

impl StationarySettings {
    /// Range from the coupling envelope, steps fine enough for the fastest
    /// local wavenumber at `energy`.
    pub fn for_energy(basis: &BindingBasis, mirror: &MirrorConfig, energy: f64) -> Self {
        let x_max = mirror_radius(basis, mirror, COUPLING_CUTOFF).max(1.0);
        let eps = basis.energies();
        let peak = 2.0 * (mirror.v1 + mirror.v2) * peak_density(basis);
        let scale = [energy - eps[0], eps[eps.len() - 1] - energy, peak]
            .iter()
            .fold(1.0f64, |acc, v| acc.max(v.abs()))
            .sqrt();
        let n_steps = ((x_max * scale / PHASE_PER_STEP).ceil() as usize).max(200);
        Self { x_max, n_steps }
    }
}

/// Upper bound for `max_x φ_n(x)²` across the retained channels.
fn peak_density(basis: &BindingBasis) -> f64 {
    let r = basis.support_radius(1e-6);
    let mut peak: f64 = 0.0;
    let n = 400;
    for i in 0..=n {
        let x = r * i as f64 / n as f64;
        if let Ok(phi) = basis.eigenfunctions(x) {
            peak = phi.iter().fold(peak, |acc, v| acc.max(v * v));
        }
    }
    peak
}

/// Energy-resolved channel amplitudes.
///
/// Amplitudes are raw plane-wave coefficients: for unit incoming `e^{i k_m x}`
/// from the left, channel `n` leaves as `t_nm e^{i k_n x}` on the right and
/// `r_nm e^{-i k_n x}` on the left. Probabilities carry the flux factor
/// `k_n / k_m`.
#[derive(Debug, Clone, Serialize)]
pub struct ScatteringMatrix {
    pub energy: f64,
    pub open: Vec<usize>,
    pub wavenumbers: Vec<f64>,
    /// Row = outgoing open index, column = incident open index; incidence from the left.
    pub transmission: Vec<Complex64>,
    pub reflection: Vec<Complex64>,
    /// Same, incidence from the right.
    pub transmission_from_right: Vec<Complex64>,
    pub reflection_from_right: Vec<Complex64>,
}

impl ScatteringMatrix {
    pub fn n_open(&self) -> usize {
        self.open.len()
    }

    pub fn open_index(&self, channel: usize) -> Option<usize> {
        self.open.iter().position(|&c| c == channel)
    }

    /// `t_nm` by channel number; `None` when either channel is closed.
    pub fn t(&self, n: usize, m: usize) -> Option<Complex64> {
        let (a, b) = (self.open_index(n)?, self.open_index(m)?);
        Some(self.transmission[a * self.n_open() + b])
    }

    pub fn r(&self, n: usize, m: usize) -> Option<Complex64> {
        let (a, b) = (self.open_index(n)?, self.open_index(m)?);
        Some(self.reflection[a * self.n_open() + b])
    }

    /// `|t_nm|² k_n / k_m`, zero for closed channels.
    pub fn transmission_probability(&self, n: usize, m: usize) -> f64 {
        self.flux(n, m, &self.transmission)
    }

    pub fn reflection_probability(&self, n: usize, m: usize) -> f64 {
        self.flux(n, m, &self.reflection)
    }

    fn flux(&self, n: usize, m: usize, amps: &[Complex64]) -> f64 {
        match (self.open_index(n), self.open_index(m)) {
            (Some(a), Some(b)) => {
                amps[a * self.n_open() + b].norm_sqr() * self.wavenumbers[a] / self.wavenumbers[b]
            }
            _ => 0.0,
        }
    }

    /// `max_m |Σ_n (|t_nm|² + |r_nm|²) k_n/k_m - 1|` over both incidence sides.
    pub fn flux_defect(&self) -> f64 {
        let no = self.n_open();
        let mut worst: f64 = 0.0;
        for (t, r) in [
            (&self.transmission, &self.reflection),
            (&self.transmission_from_right, &self.reflection_from_right),
        ] {
            for b in 0..no {
                let total: f64 = (0..no)
                    .map(|a| {
                        (t[a * no + b].norm_sqr() + r[a * no + b].norm_sqr()) * self.wavenumbers[a]
                            / self.wavenumbers[b]
                    })
                    .sum();
                worst = worst.max((total - 1.0).abs());
            }
        }
        worst
    }

    /// Flux-normalized `2N_open × 2N_open` S-matrix, ordered (left, right) in and out.
    pub fn flux_normalized(&self) -> Vec<Complex64> {
        let no = self.n_open();
        let dim = 2 * no;
        let mut s = vec![ZERO; dim * dim];
        for a in 0..no {
            for b in 0..no {
                let f = (self.wavenumbers[a] / self.wavenumbers[b]).sqrt();
                s[a * dim + b] = self.reflection[a * no + b] * f;
                s[(no + a) * dim + b] = self.transmission[a * no + b] * f;
                s[a * dim + no + b] = self.transmission_from_right[a * no + b] * f;
                s[(no + a) * dim + no + b] = self.reflection_from_right[a * no + b] * f;
            }
        }
        s
    }

    /// `max |S - Sᵀ|` of the flux-normalized matrix.
    pub fn reciprocity_defect(&self) -> f64 {
        let s = self.flux_normalized();
        let dim = 2 * self.n_open();
        let mut worst: f64 = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                worst = worst.max((s[a * dim + b] - s[b * dim + a]).norm());
            }
        }
        worst
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Column {
    /// Wave travelling toward the coupling region.
    Incoming(usize),
    /// Wave travelling away from it.
    Outgoing(usize),
    /// Solution decaying away from the coupling region.
    Decaying(usize),
}

/// Inward-integrated solution set from one end.
struct Side {
    columns: Vec<Column>,
    n_ch: usize,
    /// Values and derivatives at the matching point, one `n_ch` block per column.
    values: Vec<Complex64>,
    derivs: Vec<Complex64>,
}

impl Side {
    fn value(&self, c: usize, n: usize) -> Complex64 {
        self.values[c * self.n_ch + n]
    }

    fn deriv(&self, c: usize, n: usize) -> Complex64 {
        self.derivs[c * self.n_ch + n]
    }
}

/// `V̂(x)` sampled every half step on `[-x_max, x_max]`, shared by all energies.
pub struct CouplingTable {
    settings: StationarySettings,
    n_ch: usize,
    thresholds: Vec<f64>,
    /// Row-major `N × N` blocks at `x_i = -x_max + i h/2`.
    values: Vec<f64>,
}

impl CouplingTable {
    pub fn new(basis: &BindingBasis, mirror: &MirrorConfig, settings: StationarySettings) -> Result<Self> {
        if !(settings.x_max > 0.0 && settings.x_max.is_finite() && settings.n_steps > 0) {
            return Err(Error::Config("integration range and step count must be positive".into()));
        }
        let n_ch = basis.n_channels();
        let n_pts = 4 * settings.n_steps + 1;
        let half = settings.x_max / (2 * settings.n_steps) as f64;
        let mut values = Vec::with_capacity(n_pts * n_ch * n_ch);
        for i in 0..n_pts {
            values.extend(coupling_matrix(basis, mirror, -settings.x_max + i as f64 * half)?);
        }
        Ok(Self { settings, n_ch, thresholds: basis.energies().to_vec(), values })
    }

    pub fn settings(&self) -> StationarySettings {
        self.settings
    }

    fn block(&self, i: usize) -> &[f64] {
        let len = self.n_ch * self.n_ch;
        &self.values[i * len..(i + 1) * len]
    }
}

pub fn solve_smatrix(
    energy: f64,
    basis: &BindingBasis,
    mirror: &MirrorConfig,
    settings: &StationarySettings,
) -> Result<ScatteringMatrix> {
    if !(settings.x_max > 0.0 && settings.n_steps > 0) {
        return Err(Error::Config("integration range and step count must be positive".into()));
    }
    let eps = basis.energies();
    if !energy.is_finite() || energy <= eps[0] {
        return Err(Error::Domain(format!(
            "energy {energy} must exceed the lowest threshold {}",
            eps[0]
        )));
    }
    let table = CouplingTable::new(basis, mirror, *settings)?;
    solve_with_table(energy, &table)
}

/// Same as [`solve_smatrix`] with a precomputed coupling table.
pub fn solve_with_table(energy: f64, table: &CouplingTable) -> Result<ScatteringMatrix> {
    let eps = &table.thresholds[..];
    if !energy.is_finite() || energy <= eps[0] {
        return Err(Error::Domain(format!(
            "energy {energy} must exceed the lowest threshold {}",
            eps[0]
        )));
    }
    let n_ch = table.n_ch;
    let open: Vec<usize> = (0..n_ch).filter(|&n| energy > eps[n]).collect();
    let closed: Vec<usize> = (0..n_ch).filter(|&n| energy <= eps[n]).collect();
    let wavenumbers: Vec<f64> = open.iter().map(|&n| (energy - eps[n]).sqrt()).collect();
    let decay: Vec<f64> = closed.iter().map(|&n| (eps[n] - energy).sqrt()).collect();

    let left = integrate_side(table, energy, false, &open, &wavenumbers, &closed, &decay);
    let right = integrate_side(table, energy, true, &open, &wavenumbers, &closed, &decay);

    // unknowns: outgoing + decaying coefficients on the left, then on the right
    let unknown_l: Vec<usize> =
        (0..left.columns.len()).filter(|&c| !matches!(left.columns[c], Column::Incoming(_))).collect();
    let unknown_r: Vec<usize> =
        (0..right.columns.len()).filter(|&c| !matches!(right.columns[c], Column::Incoming(_))).collect();
    let dim = 2 * n_ch;
    debug_assert_eq!(unknown_l.len() + unknown_r.len(), dim);
    let mut a = Mat::<Complex64>::from_fn(dim, dim, |row, col| {
        let (n, deriv) = (row % n_ch, row >= n_ch);
        let pick = |s: &Side, c: usize| if deriv { s.deriv(c, n) } else { s.value(c, n) };
        if col < unknown_l.len() {
            pick(&left, unknown_l[col])
        } else {
            -pick(&right, unknown_r[col - unknown_l.len()])
        }
    });
    // closed-channel columns can be many orders larger than the open ones
    let mut col_scale = vec![1.0; dim];
    for (col, scale) in col_scale.iter_mut().enumerate() {
        let norm = (0..dim).map(|row| a[(row, col)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            *scale = norm.recip();
            for row in 0..dim {
                a[(row, col)] *= *scale;
            }
        }
    }
    let no = open.len();
    let incoming = |s: &Side, k: usize| {
        s.columns.iter().position(|c| *c == Column::Incoming(open[k])).expect("open channel column")
    };
    // right-hand sides: left incidence then right incidence
    let rhs = Mat::<Complex64>::from_fn(dim, 2 * no, |row, col| {
        let (n, deriv) = (row % n_ch, row >= n_ch);
        let pick = |s: &Side, c: usize| if deriv { s.deriv(c, n) } else { s.value(c, n) };
        if col < no {
            -pick(&left, incoming(&left, col))
        } else {
            pick(&right, incoming(&right, col - no))
        }
    });

    let lu = a.partial_piv_lu();
    let diag: Vec<f64> = (0..dim).map(|i| lu.U()[(i, i)].norm()).collect();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(lo > hi * MIN_PIVOT_RATIO) {
        return Err(Error::Conditioning(format!(
            "matching matrix is numerically singular (pivot ratio {:.2e}); reduce x_max or the channel count",
            lo / hi
        )));
    }
    let sol = lu.solve(&rhs);

    let outgoing_row = |unknown: &[usize], side: &Side, offset: usize, k: usize| {
        offset + unknown.iter().position(|&c| side.columns[c] == Column::Outgoing(open[k])).unwrap()
    };
    let mut transmission = vec![ZERO; no * no];
    let mut reflection = vec![ZERO; no * no];
    let mut transmission_from_right = vec![ZERO; no * no];
    let mut reflection_from_right = vec![ZERO; no * no];
    let off_r = unknown_l.len();
    for a_idx in 0..no {
        let row_l = outgoing_row(&unknown_l, &left, 0, a_idx);
        let row_r = outgoing_row(&unknown_r, &right, off_r, a_idx);
        for b in 0..no {
            reflection[a_idx * no + b] = sol[(row_l, b)] * col_scale[row_l];
            transmission[a_idx * no + b] = sol[(row_r, b)] * col_scale[row_r];
            transmission_from_right[a_idx * no + b] = sol[(row_l, no + b)] * col_scale[row_l];
            reflection_from_right[a_idx * no + b] = sol[(row_r, no + b)] * col_scale[row_r];
        }
    }
    let s = ScatteringMatrix {
        energy,
        open,
        wavenumbers,
        transmission,
        reflection,
        transmission_from_right,
        reflection_from_right,
    };
    if s.transmission.iter().chain(&s.reflection).any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Numerical(format!("non-finite amplitudes at E = {energy}")));
    }
    Ok(s)
}

/// RK4 from `∓x_max` to the origin for every asymptotic basis solution.
fn integrate_side(
    table: &CouplingTable,
    energy: f64,
    from_right: bool,
    open: &[usize],
    wavenumbers: &[f64],
    closed: &[usize],
    decay: &[f64],
) -> Side {
    let n_ch = table.n_ch;
    let settings = table.settings;
    let start = if from_right { settings.x_max } else { -settings.x_max };
    // direction pointing away from the coupling region
    let away = start.signum();
    let mut columns = Vec::new();
    let mut y0 = Vec::new();
    let mut d0 = Vec::new();
    let mut push = |col: Column, n: usize, v: Complex64, dv: Complex64| {
        columns.push(col);
        let base = y0.len();
        y0.resize(base + n_ch, ZERO);
        d0.resize(base + n_ch, ZERO);
        y0[base + n] = v;
        d0[base + n] = dv;
    };
    for (&n, &k) in open.iter().zip(wavenumbers) {
        // incoming moves toward the origin: e^{-i away k x}
        for (col, dir) in [(Column::Incoming(n), -away), (Column::Outgoing(n), away)] {
            let phase = Complex64::from_polar(1.0, dir * k * start);
            push(col, n, phase, I * (dir * k) * phase);
        }
    }
    for (&n, &kappa) in closed.iter().zip(decay) {
        // e^{-κ|x|} scaled to one at the boundary
        push(Column::Decaying(n), n, Complex64::new(1.0, 0.0), Complex64::new(-away * kappa, 0.0));
    }

    let n_cols = columns.len();
    let len = n_cols * n_ch;
    let h = -start / settings.n_steps as f64;
    let shift: Vec<f64> = table.thresholds.iter().map(|e| e - energy).collect();
    // d' = W y with W = V̂ + ε̂ - E
    let apply = |w: &[f64], y: &[Complex64], out: &mut [Complex64]| {
        for c in 0..n_cols {
            let yc = &y[c * n_ch..(c + 1) * n_ch];
            let oc = &mut out[c * n_ch..(c + 1) * n_ch];
            for a in 0..n_ch {
                let row = &w[a * n_ch..(a + 1) * n_ch];
                let mut acc = yc[a] * shift[a];
                for b in 0..n_ch {
                    acc += yc[b] * row[b];
                }
                oc[a] = acc;
            }
        }
    };
    let (mut y, mut d) = (y0, d0);
    let mut tmp = vec![ZERO; len];
    let mut k1d = vec![ZERO; len];
    let mut k2d = vec![ZERO; len];
    let mut k3d = vec![ZERO; len];
    let mut k4d = vec![ZERO; len];
    let last = 4 * settings.n_steps;
    let index = |step: usize, quarter: usize| {
        let i = 2 * step + quarter;
        if from_right { last - i } else { i }
    };
    let decaying: Vec<usize> = (0..n_cols).filter(|&c| matches!(columns[c], Column::Decaying(_))).collect();
    for step in 0..settings.n_steps {
        let (w0, w_mid, w1) = (table.block(index(step, 0)), table.block(index(step, 1)), table.block(index(step, 2)));
        // classical RK4 on (y, d); k_y stages are d plus the previous k_d
        apply(w0, &y, &mut k1d);
        for i in 0..len {
            tmp[i] = y[i] + d[i] * (0.5 * h);
        }
        apply(w_mid, &tmp, &mut k2d);
        for i in 0..len {
            tmp[i] = y[i] + (d[i] + k1d[i] * (0.5 * h)) * (0.5 * h);
        }
        apply(w_mid, &tmp, &mut k3d);
        for i in 0..len {
            tmp[i] = y[i] + (d[i] + k2d[i] * (0.5 * h)) * h;
        }
        apply(w1, &tmp, &mut k4d);
        for i in 0..len {
            let k1y = d[i];
            let k2y = d[i] + k1d[i] * (0.5 * h);
            let k3y = d[i] + k2d[i] * (0.5 * h);
            let k4y = d[i] + k3d[i] * h;
            y[i] += (k1y + (k2y + k3y) * 2.0 + k4y) * (h / 6.0);
            d[i] += (k1d[i] + (k2d[i] + k3d[i]) * 2.0 + k4d[i]) * (h / 6.0);
        }
        if decaying.iter().any(|&c| column_norm(&y, &d, c, n_ch) > REORTHOGONALIZE_ABOVE) {
            stabilize(&mut y, &mut d, n_ch, &decaying, n_cols);
        }
    }
    Side { columns, n_ch, values: y, derivs: d }
}

fn column_norm(y: &[Complex64], d: &[Complex64], c: usize, n_ch: usize) -> f64 {
    let r = c * n_ch..(c + 1) * n_ch;
    y[r.clone()].iter().chain(&d[r]).map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Only the span of the closed-channel solutions matters, and adding any of them
/// to an open column leaves its asymptotic content untouched. Orthonormalizing the
/// closed set and projecting it out of the open columns keeps the growing
/// solutions from swamping everything else.
fn stabilize(y: &mut [Complex64], d: &mut [Complex64], n_ch: usize, decaying: &[usize], n_cols: usize) {
    let dot = |y: &[Complex64], d: &[Complex64], a: usize, b: usize| -> Complex64 {
        let (ra, rb) = (a * n_ch..(a + 1) * n_ch, b * n_ch..(b + 1) * n_ch);
        let mut acc = ZERO;
        for (u, v) in y[ra.clone()].iter().zip(&y[rb.clone()]).chain(d[ra].iter().zip(&d[rb])) {
            acc += u.conj() * v;
        }
        acc
    };
    let subtract = |y: &mut [Complex64], d: &mut [Complex64], target: usize, basis: usize, coef: Complex64| {
        for i in 0..n_ch {
            let (t, b) = (target * n_ch + i, basis * n_ch + i);
            y[t] = y[t] - coef * y[b];
            d[t] = d[t] - coef * d[b];
        }
    };
    for (j, &c) in decaying.iter().enumerate() {
        for &b in &decaying[..j] {
            let coef = dot(y, d, b, c);
            subtract(y, d, c, b, coef);
        }
        let norm = column_norm(y, d, c, n_ch);
        for i in c * n_ch..(c + 1) * n_ch {
            y[i] /= norm;
            d[i] /= norm;
        }
    }
    for c in (0..n_cols).filter(|c| !decaying.contains(c)) {
        for &b in decaying {
            let coef = dot(y, d, b, c);
            subtract(y, d, c, b, coef);
        }
    }
}

/// Asymptotic channel probabilities predicted by folding the stationary
/// amplitudes with a packet's momentum density.
#[derive(Debug, Clone, Serialize)]
pub struct WavepacketPrediction {
    pub p_left: Vec<f64>,
    pub p_right: Vec<f64>,
    /// Non-fatal conditions such as channel thresholds inside the momentum window.
    pub warnings: Vec<String>,
    pub energies_sampled: usize,
    /// Worst flux unitarity defect over the sampled energies.
    pub max_flux_defect: f64,
}

impl WavepacketPrediction {
    pub fn total_left(&self) -> f64 {
        self.p_left.iter().sum()
    }

    pub fn total_right(&self) -> f64 {
        self.p_right.iter().sum()
    }
}

/// Gauss–Legendre panels over `P ± 6/σ`, split at every channel threshold.
pub fn wavepacket_prediction(
    spec: &WavepacketSpec,
    basis: &BindingBasis,
    mirror: &MirrorConfig,
    nodes_per_panel: usize,
) -> Result<WavepacketPrediction> {
    let n_ch = basis.n_channels();
    let n0 = spec.channel;
    if n0 >= n_ch {
        return Err(Error::IndexOutOfRange { index: n0, n_channels: n_ch });
    }
    let nodes = NonZeroUsize::new(nodes_per_panel)
        .ok_or_else(|| Error::Config("at least one quadrature node per panel is required".into()))?;
    let eps = basis.energies();
    let half_width = 6.0 / spec.width;
    let k_lo = (spec.momentum - half_width).max(0.0);
    let k_hi = spec.momentum + half_width;
    if k_hi <= 0.0 {
        return Err(Error::Domain("packet momentum window lies entirely below zero".into()));
    }

    let mut warnings = Vec::new();
    let mut breaks = vec![k_lo];
    for n in n0 + 1..n_ch {
        let k_thr = (eps[n] - eps[n0]).sqrt();
        if k_thr > k_lo && k_thr < k_hi {
            breaks.push(k_thr);
            warnings.push(format!(
                "channel {n} opens at k = {k_thr:.4} inside the packet's momentum window"
            ));
        }
    }
    breaks.push(k_hi);

    let mut p_left = vec![0.0; n_ch];
    let mut p_right = vec![0.0; n_ch];
    // components moving away from the mirror stay on the left
    p_left[n0] += 0.5 * erfc(spec.momentum * spec.width / 2f64.sqrt());

    // the most demanding energy fixes one grid for the whole window
    let settings = StationarySettings::for_energy(basis, mirror, k_hi * k_hi + eps[n0]);
    let table = CouplingTable::new(basis, mirror, settings)?;
    let rule = GaussLegendre::new(nodes);
    let mut sampled = 0;
    let mut max_flux_defect: f64 = 0.0;
    for panel in breaks.windows(2) {
        let (a, b) = (panel[0], panel[1]);
        for &(node, weight) in rule.as_node_weight_pairs() {
            let k = 0.5 * (b - a) * node + 0.5 * (b + a);
            let w = 0.5 * (b - a) * weight * spec.momentum_density(k);
            let energy = k * k + eps[n0];
            let s = solve_with_table(energy, &table)?;
            sampled += 1;
            max_flux_defect = max_flux_defect.max(s.flux_defect());
            for n in 0..n_ch {
                p_right[n] += w * s.transmission_probability(n, n0);
                p_left[n] += w * s.reflection_probability(n, n0);
            }
        }
    }
    Ok(WavepacketPrediction { p_left, p_right, warnings, energies_sampled: sampled, max_flux_defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirror1d::transmission_reflection;

    fn solve(basis: &BindingBasis, mirror: &MirrorConfig, e: f64) -> ScatteringMatrix {
        let settings = StationarySettings::for_energy(basis, mirror, e);
        solve_smatrix(e, basis, mirror, &settings).unwrap()
    }

    #[test]
    fn free_propagation_is_identity() {
        let basis = BindingBasis::harmonic(5.0, 4).unwrap();
        let mirror = MirrorConfig::new(0.0, 0.0).unwrap();
        let s = solve(&basis, &mirror, 30.0);
        assert_eq!(s.open, vec![0, 1, 2]);
        for n in 0..3 {
            for m in 0..3 {
                let expected = if n == m { 1.0 } else { 0.0 };
                assert!((s.t(n, m).unwrap() - expected).norm() < 1e-9);
                assert!(s.r(n, m).unwrap().norm() < 1e-9);
            }
        }
        assert!(s.t(3, 0).is_none());
    }

    #[test]
    fn single_channel_flux_and_reciprocity() {
        let basis = BindingBasis::harmonic(10.0, 1).unwrap();
        let mirror = MirrorConfig::new(0.0, 11.0).unwrap();
        let s = solve(&basis, &mirror, 110.0);
        assert!(s.flux_defect() < 1e-8, "{}", s.flux_defect());
        assert!(s.reciprocity_defect() < 1e-8);
    }

    #[test]
    fn multichannel_flux_unitarity_with_closed_channels() {
        let basis = BindingBasis::harmonic(10.0, 8).unwrap();
        let mirror = MirrorConfig::new(0.0, 11.0).unwrap();
        for e in [20.0, 57.3, 114.0, 141.0] {
            let s = solve(&basis, &mirror, e);
            assert!(s.flux_defect() < 1e-6, "E={e}: {}", s.flux_defect());
            assert!(s.reciprocity_defect() < 1e-6, "E={e}: {}", s.reciprocity_defect());
        }
    }

    #[test]
    fn symmetric_mirror_parity_selection() {
        let basis = BindingBasis::harmonic(5.0, 6).unwrap();
        let mirror = MirrorConfig::symmetric(15.0).unwrap();
        let s = solve(&basis, &mirror, 62.0);
        for &n in &s.open {
            for &m in &s.open {
                if (n + m) % 2 == 1 {
                    assert!(s.t(n, m).unwrap().norm() < 1e-12);
                    assert!(s.r(n, m).unwrap().norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_channel_matches_direct_integration() {
        // adaptive high-accuracy integration of the Gaussian barrier 4√(Ω/π)e^{-Ωx²}
        let basis = BindingBasis::harmonic(400.0, 1).unwrap();
        let mirror = MirrorConfig::new(1.0, 1.0).unwrap();
        for (k, expected) in [(0.5, 0.05073966656303328), (5.0, 0.8579470380211252), (20.0, 0.9983702628798858)] {
            let s = solve(&basis, &mirror, k * k + 400.0);
            let num = s.transmission_probability(0, 0);
            assert!((num - expected).abs() < 1e-7, "k={k}: {num} vs {expected}");
        }
    }

    #[test]
    fn approaches_the_rigid_limit_as_binding_stiffens() {
        let mirror = MirrorConfig::new(1.0, 1.0).unwrap();
        let k = 2.0;
        let exact = transmission_reflection(k, mirror.v1 + mirror.v2).unwrap().transmission();
        let mut last = f64::INFINITY;
        for omega in [100.0, 400.0, 1600.0, 6400.0] {
            let basis = BindingBasis::harmonic(omega, 1).unwrap();
            let num = solve(&basis, &mirror, k * k + omega).transmission_probability(0, 0);
            let err = (num - exact).abs();
            assert!(err < 0.6 * last, "Ω={omega}: {err} vs {last}");
            last = err;
        }
        assert!(last < 0.02 * exact);
    }

    #[test]
    fn below_threshold_is_a_domain_error() {
        let basis = BindingBasis::harmonic(5.0, 2).unwrap();
        let mirror = MirrorConfig::new(1.0, 1.0).unwrap();
        let settings = StationarySettings { x_max: 3.0, n_steps: 100 };
        assert!(matches!(solve_smatrix(4.0, &basis, &mirror, &settings), Err(Error::Domain(_))));
    }

    #[test]
    fn deep_closed_channels_over_long_ranges() {
        let basis = BindingBasis::harmonic(50.0, 12).unwrap();
        let mirror = MirrorConfig::new(3.0, 8.0).unwrap();
        let base = StationarySettings::for_energy(&basis, &mirror, 160.0);
        let settings = StationarySettings { x_max: 4.0 * base.x_max, n_steps: 4 * base.n_steps };
        let s = solve_smatrix(160.0, &basis, &mirror, &settings).unwrap();
        assert!(s.flux_defect() < 1e-6, "{}", s.flux_defect());
        let near = solve_smatrix(160.0, &basis, &mirror, &base).unwrap();
        assert!((s.transmission_probability(0, 0) - near.transmission_probability(0, 0)).abs() < 1e-6);
    }

    #[test]
    fn mirror_free_prediction_is_full_transmission() {
        let basis = BindingBasis::harmonic(10.0, 3).unwrap();
        let mirror = MirrorConfig::new(0.0, 0.0).unwrap();
        let spec = WavepacketSpec::new(10.0, 0.5, -10.0);
        let p = wavepacket_prediction(&spec, &basis, &mirror, 24).unwrap();
        assert!((p.p_right[0] - 1.0).abs() < 1e-6, "{:?}", p.p_right);
        assert!(p.total_left() < 1e-5);
        assert!(!p.warnings.is_empty());
    }
}
