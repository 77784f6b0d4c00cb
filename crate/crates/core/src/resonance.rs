//! Complex scaling `x → x e^{iθ}` of the coupled-channel Hamiltonian in a
//! Dirichlet box. Continua rotate about their thresholds by `-2θ`; resonances
//! show up as isolated eigenvalues that do not move with `θ`.

use std::f64::consts::FRAC_PI_4;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{coupling_matrix_complex, BindingBasis, MirrorConfig};
use crate::error::{Error, Result};

/// Largest matrix dimension handed to the dense eigensolver.
pub const MAX_DENSE_DIMENSION: usize = 4096;
pub const MIN_BOX_POINTS: usize = 100;
pub const DEFAULT_ANGULAR_TOLERANCE: f64 = 0.05;
pub const DEFAULT_STABILITY_TOLERANCE: f64 = 5e-3;

/// Which internal modes enter the Hamiltonian.
///
/// A symmetric mirror only couples modes of equal parity, so even and odd
/// modes can be diagonalized separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSector {
    #[default]
    All,
    Even,
    Odd,
}

impl ChannelSector {
    pub fn channels(self, n_channels: usize) -> Vec<usize> {
        (0..n_channels)
            .filter(|n| match self {
                Self::All => true,
                Self::Even => n % 2 == 0,
                Self::Odd => n % 2 == 1,
            })
            .collect()
    }
}

/// Box `[-L/2, L/2]` with `points` interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    pub length: f64,
    pub points: usize,
}

impl BoxGrid {
    /// `L = 12/√Ω`, 300 points.
    pub fn default_for(omega: f64) -> Self {
        Self { length: 12.0 / omega.sqrt(), points: 300 }
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.points + 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -0.5 * self.length + (j + 1) as f64 * self.spacing()
    }

    fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::Config(format!("box length must be positive, got {}", self.length)));
        }
        if self.points < MIN_BOX_POINTS {
            return Err(Error::Config(format!(
                "box needs at least {MIN_BOX_POINTS} points, got {}",
                self.points
            )));
        }
        Ok(())
    }
}

/// Dense `e^{-2iθ} p² + ε̂ + V̂(x e^{iθ})`, channel-major.
pub struct ScaledHamiltonian {
    theta: f64,
    grid: BoxGrid,
    channels: Vec<usize>,
    thresholds: Vec<f64>,
    matrix: Mat<Complex64>,
}

impl ScaledHamiltonian {
    pub fn build(
        basis: &BindingBasis,
        mirror: &MirrorConfig,
        theta: f64,
        grid: BoxGrid,
        sector: ChannelSector,
    ) -> Result<Self> {
        if !basis.is_analytic() {
            return Err(Error::Unsupported(
                "complex scaling needs an analytic binding basis; the hard wall is not".into(),
            ));
        }
        if !(theta.is_finite() && (0.0..FRAC_PI_4).contains(&theta)) {
            return Err(Error::Domain(format!("scaling angle must lie in [0, π/4), got {theta}")));
        }
        grid.validate()?;
        let channels = sector.channels(basis.n_channels());
        if channels.is_empty() {
            return Err(Error::Config("channel sector is empty".into()));
        }
        let dim = channels.len() * grid.points;
        if dim > MAX_DENSE_DIMENSION {
            return Err(Error::Capacity(format!(
                "matrix dimension {dim} exceeds {MAX_DENSE_DIMENSION}; reduce the box points or channels"
            )));
        }
        let n_ch = basis.n_channels();
        let n_r = grid.points;
        let eta = Complex64::from_polar(1.0, theta);
        let h = grid.spacing();
        let kin = Complex64::from_polar(1.0 / (h * h), -2.0 * theta);
        let thresholds: Vec<f64> = channels.iter().map(|&n| basis.energies()[n]).collect();

        let mut matrix = Mat::<Complex64>::zeros(dim, dim);
        for j in 0..n_r {
            let v = coupling_matrix_complex(basis, mirror, eta * grid.node(j))?;
            for (a, &n) in channels.iter().enumerate() {
                for (b, &m) in channels.iter().enumerate() {
                    matrix[(a * n_r + j, b * n_r + j)] = v[n * n_ch + m];
                }
            }
        }
        for (a, &eps) in thresholds.iter().enumerate() {
            for j in 0..n_r {
                let i = a * n_r + j;
                matrix[(i, i)] += kin * 2.0 + eps;
                if j + 1 < n_r {
                    matrix[(i, i + 1)] = -kin;
                    matrix[(i + 1, i)] = -kin;
                }
            }
        }
        Ok(Self { theta, grid, channels, thresholds, matrix })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn grid(&self) -> BoxGrid {
        self.grid
    }

    pub fn channels(&self) -> &[usize] {
        &self.channels
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.matrix
    }

    /// `max |H - H†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dimension();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// All eigenvalues, sorted by real part.
pub fn complex_spectrum(h: &ScaledHamiltonian) -> Result<Vec<Complex64>> {
    let mut eig = h
        .matrix
        .eigenvalues()
        .map_err(|e| Error::Numerical(format!("dense eigensolve failed: {e:?}")))?;
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(eig)
}

/// Index partition of a spectrum into rotated continua and the rest.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Classification {
    pub continuum: Vec<usize>,
    pub candidates: Vec<usize>,
}

/// Angle by which `e` deviates from the nearest rotated ray `arg(E - ε_n) = -2θ`.
pub fn ray_deviation(e: Complex64, thresholds: &[f64], theta: f64) -> Option<f64> {
    thresholds
        .iter()
        .filter(|&&eps| e.re > eps)
        .map(|&eps| ((e - eps).arg() + 2.0 * theta).abs())
        .min_by(f64::total_cmp)
}

pub fn classify_continuum(
    eigs: &[Complex64],
    thresholds: &[f64],
    theta: f64,
    tol: f64,
) -> Classification {
    let mut out = Classification::default();
    for (i, &e) in eigs.iter().enumerate() {
        match ray_deviation(e, thresholds, theta) {
            Some(d) if d < tol => out.continuum.push(i),
            _ => out.candidates.push(i),
        }
    }
    out
}

/// `τ = -1 / (2 Im E)`.
pub fn lifetime(energy: Complex64) -> Result<f64> {
    if !(energy.im < 0.0) {
        return Err(Error::Domain(format!("resonance energy must have Im E < 0, got {energy}")));
    }
    Ok(-0.5 / energy.im)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResonanceSettings {
    pub thetas: Vec<f64>,
    pub grid: BoxGrid,
    pub sector: ChannelSector,
    pub angular_tolerance: f64,
    pub stability_tolerance: f64,
}

impl ResonanceSettings {
    /// Primary angle plus a companion `θ + 0.05`.
    pub fn new(omega: f64, theta: f64) -> Self {
        Self {
            thetas: vec![theta, theta + 0.05],
            grid: BoxGrid::default_for(omega),
            sector: ChannelSector::All,
            angular_tolerance: DEFAULT_ANGULAR_TOLERANCE,
            stability_tolerance: DEFAULT_STABILITY_TOLERANCE,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.thetas.len() < 2 {
            return Err(Error::Config("stability screening needs at least two angles".into()));
        }
        for (name, v) in [
            ("angular tolerance", self.angular_tolerance),
            ("stability tolerance", self.stability_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceCandidate {
    /// Value at the first angle of the sweep.
    pub energy: Complex64,
    pub lifetime: f64,
    pub theta_window: (f64, f64),
    /// Largest distance from `energy` across the sweep.
    pub stability: f64,
    /// Nearest channel threshold below `Re E`.
    pub threshold_below: Option<f64>,
    /// Another eigenvalue fell within the pairing radius at some angle.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaSpectrum {
    pub theta: f64,
    pub eigenvalues: Vec<Complex64>,
    pub continuum: usize,
    pub candidates: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceSearch {
    pub channels: Vec<usize>,
    pub spectra: Vec<ThetaSpectrum>,
    pub resonances: Vec<ResonanceCandidate>,
}

/// Spectra for every angle and the candidates that stay put across all of them.
pub fn find_resonances(
    basis: &BindingBasis,
    mirror: &MirrorConfig,
    settings: &ResonanceSettings,
) -> Result<ResonanceSearch> {
    settings.validate()?;
    let mut spectra = Vec::with_capacity(settings.thetas.len());
    let mut first_candidates = Vec::new();
    let mut thresholds = Vec::new();
    let mut channels = Vec::new();
    for (i, &theta) in settings.thetas.iter().enumerate() {
        let h = ScaledHamiltonian::build(basis, mirror, theta, settings.grid, settings.sector)?;
        let eigs = complex_spectrum(&h)?;
        let class = classify_continuum(&eigs, h.thresholds(), theta, settings.angular_tolerance);
        if i == 0 {
            first_candidates = class.candidates.iter().map(|&k| eigs[k]).collect();
            thresholds = h.thresholds().to_vec();
            channels = h.channels().to_vec();
        }
        spectra.push(ThetaSpectrum {
            theta,
            eigenvalues: eigs,
            continuum: class.continuum.len(),
            candidates: class.candidates.len(),
        });
    }

    let radius = 10.0 * settings.stability_tolerance;
    let lo = settings.thetas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = settings.thetas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut resonances = Vec::new();
    for &e0 in &first_candidates {
        if !(e0.im < 0.0) {
            continue;
        }
        let mut stability: f64 = 0.0;
        let mut ambiguous = false;
        for spec in &spectra[1..] {
            let mut near: Vec<f64> = spec.eigenvalues.iter().map(|e| (e - e0).norm()).filter(|&d| d < radius).collect();
            near.sort_by(f64::total_cmp);
            ambiguous |= near.len() > 1;
            stability = stability.max(near.first().copied().unwrap_or(f64::INFINITY));
        }
        if stability < settings.stability_tolerance {
            resonances.push(ResonanceCandidate {
                energy: e0,
                lifetime: lifetime(e0)?,
                theta_window: (lo, hi),
                stability,
                threshold_below: thresholds.iter().copied().filter(|&t| t < e0.re).reduce(f64::max),
                ambiguous,
            });
        }
    }
    resonances.sort_by(|a, b| a.energy.re.total_cmp(&b.energy.re));
    Ok(ResonanceSearch { channels, spectra, resonances })
}

/// Eigenvalue of one scaled Hamiltonian closest to `guess`, for convergence studies.
pub fn track(
    basis: &BindingBasis,
    mirror: &MirrorConfig,
    theta: f64,
    grid: BoxGrid,
    sector: ChannelSector,
    guess: Complex64,
) -> Result<Complex64> {
    let h = ScaledHamiltonian::build(basis, mirror, theta, grid, sector)?;
    complex_spectrum(&h)?
        .into_iter()
        .min_by(|a, b| (a - guess).norm().total_cmp(&(b - guess).norm()))
        .ok_or_else(|| Error::Numerical("empty spectrum".into()))
}
