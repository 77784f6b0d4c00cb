//! Quantities read off a [`ChannelField`]: side-resolved channel
//! probabilities, the reduced center-of-mass density matrix, entanglement
//! entropy and energies.

use faer::{Mat, Side};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::basis::PotentialMatrix;
use crate::error::{Error, Result};
use crate::evolution::ChannelField;

/// Largest grid for which the dense `ρ_cm` is built.
pub const MAX_DENSE_POINTS: usize = 4096;

/// Eigenvalues below this are treated as a numerical failure rather than clipped.
const NEGATIVE_EIGENVALUE_TOLERANCE: f64 = 1e-8;

/// Weight of grid point `x` on the left and right half-lines.
fn side_weights(x: f64) -> (f64, f64) {
    if x < 0.0 {
        (1.0, 0.0)
    } else if x > 0.0 {
        (0.0, 1.0)
    } else {
        (0.5, 0.5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideProbabilities {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl SideProbabilities {
    pub fn total_left(&self) -> f64 {
        self.left.iter().sum()
    }

    pub fn total_right(&self) -> f64 {
        self.right.iter().sum()
    }
}

/// `p_{n,L} = ∫_{x<0} |f_n|²`, `p_{n,R} = ∫_{x>0} |f_n|²`; the point `x = 0` is split evenly.
pub fn side_probabilities(field: &ChannelField) -> SideProbabilities {
    let dx = field.grid().dx();
    let x = field.grid().x();
    let (left, right) = (0..field.n_channels())
        .map(|n| {
            field.channel(n).iter().zip(x).fold((0.0, 0.0), |(l, r), (v, &x)| {
                let (wl, wr) = side_weights(x);
                let p = v.norm_sqr();
                (l + wl * p, r + wr * p)
            })
        })
        .map(|(l, r)| (l * dx, r * dx))
        .unzip();
    SideProbabilities { left, right }
}

/// `ρ_cm(x, x') = Σ_n conj(f_n(x)) f_n(x')` on a subset of grid points.
#[derive(Debug, Clone)]
pub struct ReducedDensityMatrix {
    x: Vec<f64>,
    /// Spacing of the retained points.
    spacing: f64,
    rho: Vec<Complex64>,
}

impl ReducedDensityMatrix {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rho[i * self.len() + j]
    }

    /// `Σ_i ρ(x_i, x_i) dx`.
    pub fn trace(&self) -> f64 {
        (0..self.len()).map(|i| self.get(i, i).re).sum::<f64>() * self.spacing
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `tr(ρ²) dx²`.
    pub fn purity(&self) -> f64 {
        let n = self.len();
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                sum += (self.get(i, j) * self.get(j, i)).re;
            }
        }
        sum * self.spacing * self.spacing
    }

    /// Eigenvalues of `ρ dx` in ascending order.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let n = self.len();
        let m = Mat::<Complex64>::from_fn(n, n, |i, j| self.get(i, j) * self.spacing);
        m.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("density matrix eigensolve failed: {e:?}")))
    }

    /// Von Neumann entropy from the dense matrix, normalized by its trace.
    pub fn entropy(&self) -> Result<f64> {
        let trace = self.trace();
        entropy_from_weights(self.spectrum()?.into_iter().map(|l| l / trace))
    }

    /// `|ρ(x, x')|` rows for plotting.
    pub fn magnitude_rows(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        let n = self.len();
        (0..n).map(move |i| (0..n).map(|j| self.get(i, j).norm()).collect())
    }
}

pub fn reduced_density_matrix(field: &ChannelField) -> Result<ReducedDensityMatrix> {
    let len = field.grid().len();
    if len > MAX_DENSE_POINTS {
        return Err(Error::Capacity(format!(
            "dense density matrix on {len} points exceeds {MAX_DENSE_POINTS}; use the windowed variant"
        )));
    }
    reduced_density_matrix_window(field, f64::NEG_INFINITY, f64::INFINITY, 1)
}

/// Density matrix restricted to `lo ≤ x ≤ hi`, keeping every `stride`-th point.
pub fn reduced_density_matrix_window(
    field: &ChannelField,
    lo: f64,
    hi: f64,
    stride: usize,
) -> Result<ReducedDensityMatrix> {
    let stride = stride.max(1);
    let idx: Vec<usize> = field
        .grid()
        .x()
        .iter()
        .enumerate()
        .filter(|&(j, &x)| j % stride == 0 && x >= lo && x <= hi)
        .map(|(j, _)| j)
        .collect();
    if idx.len() > MAX_DENSE_POINTS {
        return Err(Error::Capacity(format!(
            "window holds {} points, more than {MAX_DENSE_POINTS}",
            idx.len()
        )));
    }
    let n = idx.len();
    let mut rho = vec![Complex64::new(0.0, 0.0); n * n];
    for c in 0..field.n_channels() {
        let f = field.channel(c);
        for (a, &i) in idx.iter().enumerate() {
            let fi = f[i].conj();
            if fi == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = &mut rho[a * n..(a + 1) * n];
            for (r, &j) in row.iter_mut().zip(&idx) {
                *r += fi * f[j];
            }
        }
    }
    Ok(ReducedDensityMatrix {
        x: idx.iter().map(|&j| field.grid().x()[j]).collect(),
        spacing: field.grid().dx() * stride as f64,
        rho,
    })
}

/// Channel overlap matrix `G_nm = ∫ conj(f_m) f_n dx`, row-major.
pub fn channel_gram(field: &ChannelField) -> Vec<Complex64> {
    let n_ch = field.n_channels();
    let dx = field.grid().dx();
    let mut g = vec![Complex64::new(0.0, 0.0); n_ch * n_ch];
    for n in 0..n_ch {
        for m in n..n_ch {
            let v: Complex64 =
                field.channel(n).iter().zip(field.channel(m)).map(|(a, b)| b.conj() * a).sum::<Complex64>() * dx;
            g[n * n_ch + m] = v;
            g[m * n_ch + n] = v.conj();
        }
    }
    g
}

/// `S = -tr(ρ_cm ln ρ_cm)` in nats, from the spectrum of the channel Gram matrix.
pub fn entanglement_entropy(field: &ChannelField) -> Result<f64> {
    let n_ch = field.n_channels();
    let norm = field.norm();
    if !(norm > 0.0) {
        return Err(Error::Numerical("entropy of an empty field".into()));
    }
    let g = channel_gram(field);
    let m = Mat::<Complex64>::from_fn(n_ch, n_ch, |i, j| g[i * n_ch + j] / norm);
    let eig = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Gram eigensolve failed: {e:?}")))?;
    entropy_from_weights(eig)
}

fn entropy_from_weights(weights: impl IntoIterator<Item = f64>) -> Result<f64> {
    let mut s = 0.0;
    for l in weights {
        if l < -NEGATIVE_EIGENVALUE_TOLERANCE {
            return Err(Error::Numerical(format!("non-physical Schmidt weight {l:e}")));
        }
        let l = l.clamp(0.0, 1.0);
        if l > 0.0 {
            s -= l * l.ln();
        }
    }
    Ok(s.max(0.0))
}

/// Center-of-mass and internal energies, total and per side of the mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energies {
    pub cm: f64,
    pub rel: f64,
    pub cm_left: f64,
    pub cm_right: f64,
    pub rel_left: f64,
    pub rel_right: f64,
}

/// `E_cm = ⟨p_cm²⟩` spectrally, `E_rel = Σ ε_n ∫|f_n|²`.
///
/// The side-resolved kinetic energies apply a sharp half-line window before
/// the spectral derivative, so they carry an artifact while the packet sits on
/// the mirror. They are meaningful once the packet has separated.
pub fn energies(field: &ChannelField) -> Energies {
    let grid = field.grid();
    let n_pts = grid.len();
    let fft = FftPlanner::new().plan_fft_forward(n_pts);
    let scale = grid.dx() / n_pts as f64;
    let weights: Vec<(f64, f64)> = grid.x().iter().map(|&x| side_weights(x)).collect();
    let kinetic = |buf: &mut Vec<Complex64>| -> f64 {
        fft.process(buf);
        buf.iter().zip(grid.k()).map(|(v, k)| k * k * v.norm_sqr()).sum::<f64>() * scale
    };
    let (mut cm, mut cm_left, mut cm_right) = (0.0, 0.0, 0.0);
    let mut buf = Vec::with_capacity(n_pts);
    for n in 0..field.n_channels() {
        let ch = field.channel(n);
        buf.clear();
        buf.extend_from_slice(ch);
        cm += kinetic(&mut buf);
        buf.clear();
        buf.extend(ch.iter().zip(&weights).map(|(v, w)| v * w.0));
        cm_left += kinetic(&mut buf);
        buf.clear();
        buf.extend(ch.iter().zip(&weights).map(|(v, w)| v * w.1));
        cm_right += kinetic(&mut buf);
    }
    let sides = side_probabilities(field);
    let eps = field.thresholds();
    let dot = |p: &[f64]| p.iter().zip(eps).map(|(p, e)| p * e).sum::<f64>();
    let rel_left = dot(&sides.left);
    let rel_right = dot(&sides.right);
    Energies { cm, rel: rel_left + rel_right, cm_left, cm_right, rel_left, rel_right }
}

/// `Σ_j dx Σ_nm conj(f_n) V_nm f_m`.
pub fn potential_energy(field: &ChannelField, potential: &PotentialMatrix) -> f64 {
    let n_ch = field.n_channels();
    let dx = field.grid().dx();
    let mut sum = 0.0;
    for j in 0..field.grid().len() {
        if potential.max_abs_at(j) == 0.0 {
            continue;
        }
        let v = potential.at(j);
        for n in 0..n_ch {
            let fn_conj = field.channel(n)[j].conj();
            for m in 0..n_ch {
                sum += (fn_conj * field.channel(m)[j] * v[n * n_ch + m]).re;
            }
        }
    }
    sum * dx
}

/// `⟨H⟩ = E_cm + E_rel + ⟨V⟩`.
pub fn total_energy(field: &ChannelField, potential: &PotentialMatrix) -> f64 {
    let e = energies(field);
    e.cm + e.rel + potential_energy(field, potential)
}

/// One row of the observable time series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableRecord {
    pub t: f64,
    pub norm: f64,
    pub entropy: f64,
    pub energies: Energies,
    pub p_left: Vec<f64>,
    pub p_right: Vec<f64>,
}

impl ObservableRecord {
    pub fn capture(field: &ChannelField) -> Result<Self> {
        let sides = side_probabilities(field);
        Ok(Self {
            t: field.time(),
            norm: field.norm(),
            entropy: entanglement_entropy(field)?,
            energies: energies(field),
            p_left: sides.left,
            p_right: sides.right,
        })
    }

    pub fn csv_header(n_channels: usize) -> String {
        let mut cols: Vec<String> =
            ["t", "norm", "S", "E_cm", "E_rel", "E_cm_L", "E_cm_R", "E_rel_L", "E_rel_R"]
                .iter()
                .map(|s| s.to_string())
                .collect();
        cols.extend((0..n_channels).map(|n| format!("p{n}_L")));
        cols.extend((0..n_channels).map(|n| format!("p{n}_R")));
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let e = &self.energies;
        let mut vals = vec![
            self.t, self.norm, self.entropy, e.cm, e.rel, e.cm_left, e.cm_right, e.rel_left, e.rel_right,
        ];
        vals.extend(&self.p_left);
        vals.extend(&self.p_right);
        vals.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::LN_2;
    use std::sync::Arc;

    use super::*;
    use crate::basis::{BindingBasis, MirrorConfig};
    use crate::evolution::{init_wavepacket, WavepacketSpec};
    use crate::grid::SpatialGrid;

    fn packet_field(n_ch: usize) -> ChannelField {
        let grid = Arc::new(SpatialGrid::new(40.0, 512).unwrap());
        let basis = BindingBasis::harmonic(10.0, n_ch).unwrap();
        let mirror = MirrorConfig::new(0.0, 11.0).unwrap();
        init_wavepacket(grid, &basis, &mirror, &WavepacketSpec::new(10.0, 0.5, -10.0)).unwrap()
    }

    #[test]
    fn initial_packet_is_left() {
        let f = packet_field(3);
        let p = side_probabilities(&f);
        assert!((p.left[0] - 1.0).abs() < 1e-10);
        assert_eq!(p.right.iter().sum::<f64>(), 0.0);
        assert_eq!(p.left[1] + p.left[2], 0.0);
    }

    #[test]
    fn origin_point_is_split() {
        let grid = Arc::new(SpatialGrid::new(8.0, 16).unwrap());
        let basis = BindingBasis::harmonic(1.0, 1).unwrap();
        let mut f = ChannelField::zeros(grid.clone(), &basis);
        f.channel_mut(0)[grid.origin()] = Complex64::new(1.0, 0.0);
        let p = side_probabilities(&f);
        assert_eq!(p.left[0], p.right[0]);
        assert!((p.total_left() + p.total_right() - f.norm()).abs() < 1e-15);
    }

    #[test]
    fn product_state_has_zero_entropy_and_rank_one_rho() {
        let f = packet_field(3);
        assert!(entanglement_entropy(&f).unwrap().abs() < 1e-10);
        let rho = reduced_density_matrix(&f).unwrap();
        assert!(rho.hermiticity_residual() < 1e-12);
        assert!((rho.trace() - f.norm()).abs() < 1e-10);
        assert!((rho.purity() - f.norm().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn equal_weight_orthogonal_profiles_give_ln2() {
        let grid = Arc::new(SpatialGrid::new(40.0, 512).unwrap());
        let basis = BindingBasis::harmonic(1.0, 2).unwrap();
        let mut f = ChannelField::zeros(grid.clone(), &basis);
        let a = WavepacketSpec::new(1.0, 0.5, -5.0);
        let b = WavepacketSpec::new(-2.0, 0.5, 5.0);
        let s = 0.5f64.sqrt();
        for (j, &x) in grid.x().iter().enumerate() {
            f.channel_mut(0)[j] = a.amplitude(x) * s;
            f.channel_mut(1)[j] = b.amplitude(x) * s;
        }
        let gram = entanglement_entropy(&f).unwrap();
        assert!((gram - LN_2).abs() < 1e-10, "{gram}");
        let dense = reduced_density_matrix(&f).unwrap().entropy().unwrap();
        assert!((dense - gram).abs() < 1e-8);
        assert!(gram <= (2f64).ln() + 1e-12);
    }

    #[test]
    fn initial_energies() {
        let f = packet_field(3);
        let e = energies(&f);
        assert!((e.cm - (100.0 + 4.0)).abs() < 1e-4, "{}", e.cm);
        assert!((e.rel - 10.0).abs() < 1e-10);
        assert!((e.rel_left - e.rel).abs() < 1e-12);
        assert!((e.cm_left - e.cm).abs() < 1e-6);
        assert!(e.cm_right.abs() < 1e-10);
    }

    #[test]
    fn window_variant_is_strided() {
        let f = packet_field(2);
        let rho = reduced_density_matrix_window(&f, -12.0, -8.0, 2).unwrap();
        assert!(rho.len() > 10 && rho.len() < 40);
        assert!(rho.x().iter().all(|&x| (-12.0..=-8.0).contains(&x)));
    }

    #[test]
    fn capacity_error_for_large_grids() {
        let grid = Arc::new(SpatialGrid::new(100.0, 8192).unwrap());
        let basis = BindingBasis::harmonic(1.0, 1).unwrap();
        let f = ChannelField::zeros(grid, &basis);
        assert!(matches!(reduced_density_matrix(&f), Err(Error::Capacity(_))));
    }

    #[test]
    fn csv_row_matches_header() {
        let f = packet_field(3);
        let rec = ObservableRecord::capture(&f).unwrap();
        let header = ObservableRecord::csv_header(3);
        assert_eq!(header.split(',').count(), rec.csv_row().split(',').count());
        assert!(header.starts_with("t,norm,S,E_cm"));
    }

    #[test]
    fn potential_energy_of_a_static_profile() {
        let grid = Arc::new(SpatialGrid::new(20.0, 1024).unwrap());
        let basis = BindingBasis::harmonic(4.0, 1).unwrap();
        let mirror = MirrorConfig::new(1.0, 1.0).unwrap();
        let pot = PotentialMatrix::tabulate(&basis, &mirror, grid.x()).unwrap();
        let mut f = ChannelField::zeros(grid.clone(), &basis);
        // a flat profile of height 1 picks up ∫ V_00 dx = 2(V1 + V2)
        f.channel_mut(0).iter_mut().for_each(|v| *v = Complex64::new(1.0, 0.0));
        assert!((potential_energy(&f, &pot) - 4.0).abs() < 1e-10);
    }
}
