//! Internal-mode eigenbasis of the binding potential and the channel
//! coupling `V_nm(x_cm)` obtained by projecting the two delta mirrors onto it.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ln` of the smallest positive normal double, below which the Gaussian seed
/// of the Hermite recurrence underflows.
const LN_MIN_POSITIVE: f64 = -708.0;
/// Values below `e^{-460}` (about 1e-200) are treated as exact zeros.
const LN_NEGLIGIBLE: f64 = -460.0;

/// Tabulated potentials larger than this are refused.
const MAX_TABLE_BYTES: usize = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BindingKind {
    /// `V_b = Ω² x_rel²`, levels `ε_n = 2Ω(n + 1/2)`.
    Harmonic { omega: f64 },
    /// Infinite well on `|x_rel| < a`, levels `ε_n = ((n + 1)π / 2a)²`.
    HardWall { half_width: f64 },
}

/// Truncated eigenbasis `{φ_n, ε_n}` of `-d²/dx_rel² + V_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BindingBasis {
    kind: BindingKind,
    energies: Vec<f64>,
}

impl BindingBasis {
    pub fn harmonic(omega: f64, n_channels: usize) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::Domain(format!("stiffness must be positive, got {omega}")));
        }
        Self::new(BindingKind::Harmonic { omega }, n_channels)
    }

    pub fn hard_wall(half_width: f64, n_channels: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Domain(format!(
                "hard-wall half-width must be positive, got {half_width}"
            )));
        }
        Self::new(BindingKind::HardWall { half_width }, n_channels)
    }

    pub fn new(kind: BindingKind, n_channels: usize) -> Result<Self> {
        if n_channels == 0 {
            return Err(Error::Domain("at least one channel is required".into()));
        }
        let energies = (0..n_channels)
            .map(|n| match kind {
                BindingKind::Harmonic { omega } => 2.0 * omega * (n as f64 + 0.5),
                BindingKind::HardWall { half_width } => {
                    let q = (n as f64 + 1.0) * PI / (2.0 * half_width);
                    q * q
                }
            })
            .collect();
        Ok(Self { kind, energies })
    }

    pub fn kind(&self) -> BindingKind {
        self.kind
    }

    pub fn n_channels(&self) -> usize {
        self.energies.len()
    }

    /// Channel thresholds `ε_n`, strictly increasing.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Same binding potential with a different truncation.
    pub fn with_channels(&self, n_channels: usize) -> Result<Self> {
        Self::new(self.kind, n_channels)
    }

    pub fn eigenenergy(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        Ok(self.energies[n])
    }

    pub fn eigenfunction(&self, n: usize, x: f64) -> Result<f64> {
        self.check_index(n)?;
        let mut out = vec![0.0; n + 1];
        self.fill_eigenfunctions(x, &mut out)?;
        Ok(out[n])
    }

    /// `φ_0(x), …, φ_{N-1}(x)`.
    pub fn eigenfunctions(&self, x: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_channels()];
        self.fill_eigenfunctions(x, &mut out)?;
        Ok(out)
    }

    /// Writes `φ_n(x)` for `n < out.len()` into `out`.
    pub fn fill_eigenfunctions(&self, x: f64, out: &mut [f64]) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("x_rel must be finite, got {x}")));
        }
        match self.kind {
            BindingKind::Harmonic { omega } => {
                let s = omega.sqrt();
                let y = s * x;
                let log_seed = 0.25 * (omega / PI).ln() - 0.5 * y * y;
                if log_seed < LN_MIN_POSITIVE {
                    check_negligible(out.len(), y, omega, x)?;
                    out.fill(0.0);
                    return Ok(());
                }
                hermite_functions(log_seed.exp(), y, out);
            }
            BindingKind::HardWall { half_width } => {
                let norm = half_width.sqrt().recip();
                for (n, v) in out.iter_mut().enumerate() {
                    *v = if x.abs() > half_width {
                        0.0
                    } else {
                        let arg = (n as f64 + 1.0) * PI * x / (2.0 * half_width);
                        // sin(q(x + a)) rewritten so that parity is exact
                        let v = match n % 4 {
                            0 => arg.cos(),
                            1 => -arg.sin(),
                            2 => -arg.cos(),
                            _ => arg.sin(),
                        };
                        v * norm
                    };
                }
            }
        }
        Ok(())
    }

    /// Harmonic eigenfunctions continued to complex argument `z`.
    pub fn eigenfunctions_complex(&self, z: Complex64) -> Result<Vec<Complex64>> {
        let BindingKind::Harmonic { omega } = self.kind else {
            return Err(Error::Unsupported(
                "hard-wall eigenfunctions are not entire and cannot be continued".into(),
            ));
        };
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain(format!("argument must be finite, got {z}")));
        }
        let s = omega.sqrt();
        let y = z * s;
        let log_seed = Complex64::new(0.25 * (omega / PI).ln(), 0.0) - 0.5 * y * y;
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_channels()];
        if log_seed.re < LN_MIN_POSITIVE {
            check_negligible(out.len(), y.norm(), omega, z.norm())?;
            return Ok(out);
        }
        let sqrt2 = 2f64.sqrt();
        out[0] = log_seed.exp();
        if out.len() > 1 {
            out[1] = out[0] * y * sqrt2;
        }
        for n in 1..out.len().saturating_sub(1) {
            let nf = n as f64;
            out[n + 1] = out[n] * y * (2.0 / (nf + 1.0)).sqrt() - out[n - 1] * (nf / (nf + 1.0)).sqrt();
        }
        Ok(out)
    }

    /// True when the eigenfunctions are entire functions (complex scaling allowed).
    pub fn is_analytic(&self) -> bool {
        matches!(self.kind, BindingKind::Harmonic { .. })
    }

    /// Radius beyond which `max_n φ_n(x)² < tol` for every retained channel.
    pub fn support_radius(&self, tol: f64) -> f64 {
        match self.kind {
            BindingKind::HardWall { half_width } => half_width,
            BindingKind::Harmonic { omega } => {
                let s = omega.sqrt();
                let n = self.n_channels() as f64;
                // start at the outermost classical turning point and walk out
                let mut x = (2.0 * n + 1.0).sqrt() / s;
                let step = 0.01 / s;
                let mut buf = vec![0.0; self.n_channels()];
                loop {
                    self.fill_eigenfunctions(x, &mut buf)
                        .expect("finite argument below the underflow limit");
                    if buf.iter().all(|v| v * v < tol) {
                        return x;
                    }
                    x += step;
                }
            }
        }
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n >= self.n_channels() {
            return Err(Error::IndexOutOfRange { index: n, n_channels: self.n_channels() });
        }
        Ok(())
    }
}

/// Three-term recurrence on the normalized Hermite functions in `y = √Ω x`.
fn hermite_functions(seed: f64, y: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = seed;
    if out.len() > 1 {
        out[1] = 2f64.sqrt() * y * seed;
    }
    for n in 1..out.len() - 1 {
        let nf = n as f64;
        out[n + 1] = (2.0 / (nf + 1.0)).sqrt() * y * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
}

/// The seed underflowed. That is harmless as long as every requested order is
/// itself far below the underflow limit; otherwise the recurrence has no digits left.
fn check_negligible(len: usize, y: f64, omega: f64, x: f64) -> Result<()> {
    let y = y.abs();
    let mut ln_fact = 0.0;
    for n in 0..len {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        // |φ_n(y)| ≲ (Ω/π)^{1/4} (√2 y)^n e^{-y²/2} / √(n!) beyond the turning point
        let ln_bound = 0.25 * (omega / PI).ln() + n as f64 * (2f64.sqrt() * y).ln()
            - 0.5 * ln_fact
            - 0.5 * y * y;
        let turning = (2.0 * n as f64 + 1.0).sqrt();
        if y <= turning + 1.0 || ln_bound > LN_NEGLIGIBLE {
            return Err(Error::Precision { n, x });
        }
    }
    Ok(())
}

/// Strengths of the mirrors acting on particle 1 and particle 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorConfig {
    pub v1: f64,
    pub v2: f64,
}

impl MirrorConfig {
    pub fn new(v1: f64, v2: f64) -> Result<Self> {
        for (name, v) in [("v1", v1), ("v2", v2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(Self { v1, v2 })
    }

    pub fn symmetric(v: f64) -> Result<Self> {
        Self::new(v, v)
    }

    pub fn is_symmetric(&self) -> bool {
        self.v1 == self.v2
    }

    /// Only particle 2 feels the mirror.
    pub fn is_asymmetric(&self) -> bool {
        self.v1 == 0.0 && self.v2 > 0.0
    }

    pub fn is_free(&self) -> bool {
        self.v1 == 0.0 && self.v2 == 0.0
    }
}

/// `V_nm(x) = 2V1 φ_n(-x)φ_m(-x) + 2V2 φ_n(x)φ_m(x)`.
pub fn effective_potential(
    basis: &BindingBasis,
    mirror: &MirrorConfig,
    n: usize,
    m: usize,
    x_cm: f64,
) -> Result<f64> {
    basis.check_index(n)?;
    basis.check_index(m)?;
    let len = n.max(m) + 1;
    let mut plus = vec![0.0; len];
    let mut minus = vec![0.0; len];
    basis.fill_eigenfunctions(x_cm, &mut plus)?;
    basis.fill_eigenfunctions(-x_cm, &mut minus)?;
    Ok(2.0 * mirror.v1 * minus[n] * minus[m] + 2.0 * mirror.v2 * plus[n] * plus[m])
}

/// Full symmetric `N × N` coupling matrix at one center-of-mass position, row-major.
pub fn coupling_matrix(basis: &BindingBasis, mirror: &MirrorConfig, x_cm: f64) -> Result<Vec<f64>> {
    let n_ch = basis.n_channels();
    let mut out = vec![0.0; n_ch * n_ch];
    let mut plus = vec![0.0; n_ch];
    let mut minus = vec![0.0; n_ch];
    fill_coupling(basis, mirror, x_cm, &mut plus, &mut minus, &mut out)?;
    Ok(out)
}

fn fill_coupling(
    basis: &BindingBasis,
    mirror: &MirrorConfig,
    x_cm: f64,
    plus: &mut [f64],
    minus: &mut [f64],
    out: &mut [f64],
) -> Result<()> {
    let n_ch = plus.len();
    basis.fill_eigenfunctions(x_cm, plus)?;
    basis.fill_eigenfunctions(-x_cm, minus)?;
    for n in 0..n_ch {
        for m in n..n_ch {
            let v = 2.0 * mirror.v1 * minus[n] * minus[m] + 2.0 * mirror.v2 * plus[n] * plus[m];
            out[n * n_ch + m] = v;
            out[m * n_ch + n] = v;
        }
    }
    Ok(())
}

/// Coupling matrix continued to complex `x_cm` (harmonic basis only).
pub fn coupling_matrix_complex(
    basis: &BindingBasis,
    mirror: &MirrorConfig,
    z: Complex64,
) -> Result<Vec<Complex64>> {
    let n_ch = basis.n_channels();
    let plus = basis.eigenfunctions_complex(z)?;
    let minus = basis.eigenfunctions_complex(-z)?;
    let mut out = vec![Complex64::new(0.0, 0.0); n_ch * n_ch];
    for n in 0..n_ch {
        for m in n..n_ch {
            let v = minus[n] * minus[m] * (2.0 * mirror.v1) + plus[n] * plus[m] * (2.0 * mirror.v2);
            out[n * n_ch + m] = v;
            out[m * n_ch + n] = v;
        }
    }
    Ok(out)
}

/// `V_nm(x_j)` tabulated on a set of center-of-mass points.
#[derive(Debug, Clone)]
pub struct PotentialMatrix {
    n_channels: usize,
    n_points: usize,
    // point-major: values[(j * N + n) * N + m]
    values: Vec<f64>,
}

impl PotentialMatrix {
    pub fn tabulate(basis: &BindingBasis, mirror: &MirrorConfig, points: &[f64]) -> Result<Self> {
        let n_ch = basis.n_channels();
        let entries = n_ch
            .checked_mul(n_ch)
            .and_then(|v| v.checked_mul(points.len()))
            .ok_or_else(|| Error::Capacity("potential table size overflows".into()))?;
        if entries.saturating_mul(std::mem::size_of::<f64>()) > MAX_TABLE_BYTES {
            return Err(Error::Capacity(format!(
                "potential table of {n_ch}×{n_ch}×{} entries exceeds {} bytes",
                points.len(),
                MAX_TABLE_BYTES
            )));
        }
        let mut values = vec![0.0; entries];
        let mut plus = vec![0.0; n_ch];
        let mut minus = vec![0.0; n_ch];
        for (j, &x) in points.iter().enumerate() {
            let block = &mut values[j * n_ch * n_ch..(j + 1) * n_ch * n_ch];
            fill_coupling(basis, mirror, x, &mut plus, &mut minus, block)?;
        }
        Ok(Self { n_channels: n_ch, n_points: points.len(), values })
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn get(&self, n: usize, m: usize, j: usize) -> f64 {
        self.values[(j * self.n_channels + n) * self.n_channels + m]
    }

    /// Row-major `N × N` block at point `j`.
    pub fn at(&self, j: usize) -> &[f64] {
        let nn = self.n_channels * self.n_channels;
        &self.values[j * nn..(j + 1) * nn]
    }

    pub fn max_abs_at(&self, j: usize) -> f64 {
        self.at(j).iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
        h * (inner + 0.5 * (f(a) + f(b)))
    }

    #[test]
    fn harmonic_levels() {
        let b = BindingBasis::harmonic(5.0, 8).unwrap();
        assert_eq!(b.eigenenergy(0).unwrap(), 5.0);
        assert_eq!(b.eigenenergy(2).unwrap(), 25.0);
        assert_eq!(b.eigenenergy(2).unwrap() - b.eigenenergy(0).unwrap(), 20.0);
        assert!(b.energies().windows(2).all(|w| w[1] > w[0]));
        assert!(matches!(b.eigenenergy(8), Err(Error::IndexOutOfRange { index: 8, .. })));
    }

    #[test]
    fn hard_wall_levels() {
        let b = BindingBasis::hard_wall(PI / 2.0, 4).unwrap();
        assert!((b.eigenenergy(0).unwrap() - 1.0).abs() < 1e-15);
        assert!((b.eigenenergy(3).unwrap() - 16.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BindingBasis::harmonic(0.0, 4).is_err());
        assert!(BindingBasis::harmonic(1.0, 0).is_err());
        assert!(BindingBasis::hard_wall(-1.0, 4).is_err());
        assert!(MirrorConfig::new(-1.0, 0.0).is_err());
        assert!(MirrorConfig::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn ground_state_peak_and_odd_node() {
        let b = BindingBasis::harmonic(1.0, 4).unwrap();
        assert!((b.eigenfunction(0, 0.0).unwrap() - PI.powf(-0.25)).abs() < 1e-15);
        assert_eq!(b.eigenfunction(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn matches_closed_form_hermite() {
        // H_3(y) = 8y³ - 12y, evaluated directly with the explicit normalization
        let omega: f64 = 10.0;
        let x = 0.7;
        let y = omega.sqrt() * x;
        let h3 = 8.0 * y.powi(3) - 12.0 * y;
        let direct = (omega / PI).powf(0.25) / (8.0f64 * 6.0).sqrt() * h3 * (-0.5 * y * y).exp();
        let b = BindingBasis::harmonic(omega, 4).unwrap();
        let rec = b.eigenfunction(3, x).unwrap();
        assert!((rec - direct).abs() < 1e-14 * direct.abs().max(1.0), "{rec} vs {direct}");
    }

    #[test]
    fn exact_parity() {
        for basis in [
            BindingBasis::harmonic(3.0, 12).unwrap(),
            BindingBasis::hard_wall(1.3, 12).unwrap(),
        ] {
            for &x in &[0.0, 0.123, 0.77, 1.2, 2.9] {
                let p = basis.eigenfunctions(x).unwrap();
                let m = basis.eigenfunctions(-x).unwrap();
                for n in 0..12 {
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    assert_eq!(m[n], sign * p[n], "n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn orthonormal_harmonic() {
        let omega = 10.0;
        let b = BindingBasis::harmonic(omega, 20).unwrap();
        let r = b.support_radius(1e-40);
        let n_pts = 8000;
        let h = 2.0 * r / n_pts as f64;
        let table: Vec<Vec<f64>> = (0..=n_pts)
            .map(|i| b.eigenfunctions(-r + i as f64 * h).unwrap())
            .collect();
        for n in 0..20 {
            for m in 0..20 {
                let s: f64 = table.iter().map(|row| row[n] * row[m]).sum::<f64>() * h;
                let expected = if n == m { 1.0 } else { 0.0 };
                assert!((s - expected).abs() < 1e-10, "<{n}|{m}> = {s}");
            }
        }
    }

    #[test]
    fn orthonormal_hard_wall() {
        let a = 0.8;
        let b = BindingBasis::hard_wall(a, 6).unwrap();
        for n in 0..6 {
            for m in 0..6 {
                let s = trapezoid(
                    |x| b.eigenfunction(n, x).unwrap() * b.eigenfunction(m, x).unwrap(),
                    -a,
                    a,
                    20000,
                );
                let expected = if n == m { 1.0 } else { 0.0 };
                assert!((s - expected).abs() < 1e-10, "<{n}|{m}> = {s}");
            }
        }
        assert_eq!(b.eigenfunction(0, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn deep_tail_underflows_cleanly() {
        let b = BindingBasis::harmonic(10.0, 8).unwrap();
        assert_eq!(b.eigenfunctions(50.0).unwrap(), vec![0.0; 8]);
    }

    #[test]
    fn precision_error_for_orders_near_the_underflowed_seed() {
        let b = BindingBasis::harmonic(1.0, 800).unwrap();
        assert!(matches!(b.eigenfunctions(38.0), Err(Error::Precision { .. })));
    }

    #[test]
    fn complex_continuation_matches_real_axis() {
        let b = BindingBasis::harmonic(5.0, 10).unwrap();
        for &x in &[-1.3, 0.0, 0.4, 2.0] {
            let r = b.eigenfunctions(x).unwrap();
            let c = b.eigenfunctions_complex(Complex64::new(x, 0.0)).unwrap();
            for n in 0..10 {
                assert!((c[n].re - r[n]).abs() < 1e-13 && c[n].im.abs() < 1e-13);
            }
        }
        let hw = BindingBasis::hard_wall(1.0, 3).unwrap();
        assert!(matches!(hw.eigenfunctions_complex(Complex64::new(0.1, 0.1)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn effective_potential_examples() {
        let b = BindingBasis::harmonic(10.0, 4).unwrap();
        let sym = MirrorConfig::symmetric(7.0).unwrap();
        for &x in &[0.0, 0.2, -0.5, 1.1] {
            assert_eq!(effective_potential(&b, &sym, 0, 1, x).unwrap(), 0.0);
        }
        let asym = MirrorConfig::new(0.0, 11.0).unwrap();
        let v = effective_potential(&b, &asym, 0, 0, 0.0).unwrap();
        let expected = 2.0 * 11.0 * (10.0 / PI).sqrt();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 39.25).abs() < 0.01);
        let free = MirrorConfig::new(0.0, 0.0).unwrap();
        assert_eq!(effective_potential(&b, &free, 2, 3, 0.3).unwrap(), 0.0);
        assert!(effective_potential(&b, &asym, 4, 0, 0.0).is_err());
    }

    #[test]
    fn tabulated_parity_selection_and_single_sided_form() {
        let b = BindingBasis::harmonic(5.0, 8).unwrap();
        let xs: Vec<f64> = (0..200).map(|i| -3.0 + 0.03 * i as f64).collect();
        let sym = MirrorConfig::symmetric(15.0).unwrap();
        let table = PotentialMatrix::tabulate(&b, &sym, &xs).unwrap();
        for j in 0..xs.len() {
            for n in 0..8 {
                for m in 0..8 {
                    assert_eq!(table.get(n, m, j), table.get(m, n, j));
                    if (n + m) % 2 == 1 {
                        assert!(table.get(n, m, j).abs() < 1e-13);
                    }
                }
            }
        }
        let asym = MirrorConfig::new(0.0, 11.0).unwrap();
        let table = PotentialMatrix::tabulate(&b, &asym, &xs).unwrap();
        for (j, &x) in xs.iter().enumerate() {
            let phi = b.eigenfunctions(x).unwrap();
            assert!((table.get(2, 5, j) - 22.0 * phi[2] * phi[5]).abs() < 1e-12);
        }
    }

    #[test]
    fn tabulated_entries_vanish_beyond_support_radius() {
        let b = BindingBasis::harmonic(10.0, 8).unwrap();
        let mirror = MirrorConfig::symmetric(15.0).unwrap();
        // |V_nm| ≤ 2(V1 + V2) max φ², so this radius bounds entries by 1e-12
        let x_cut = b.support_radius(1e-12 / (2.0 * (mirror.v1 + mirror.v2)));
        let xs: Vec<f64> = (0..400).map(|i| x_cut + 0.01 * i as f64).collect();
        let table = PotentialMatrix::tabulate(&b, &mirror, &xs).unwrap();
        for j in 0..xs.len() {
            assert!(table.max_abs_at(j) < 1e-12);
        }
    }

    #[test]
    fn integrated_ground_coupling_is_rigid_strength() {
        let b = BindingBasis::harmonic(4.0, 1).unwrap();
        let mirror = MirrorConfig::new(1.5, 2.5).unwrap();
        let integral = trapezoid(|x| effective_potential(&b, &mirror, 0, 0, x).unwrap(), -8.0, 8.0, 4000);
        assert!((integral - 2.0 * (mirror.v1 + mirror.v2)).abs() < 1e-10);
    }

    #[test]
    fn capacity_error() {
        let b = BindingBasis::harmonic(1.0, 64).unwrap();
        let m = MirrorConfig::symmetric(1.0).unwrap();
        let xs = vec![0.0; 1 << 17];
        assert!(matches!(PotentialMatrix::tabulate(&b, &m, &xs), Err(Error::Capacity(_))));
    }

    proptest! {
        #[test]
        fn coupling_is_symmetric(x in -4.0f64..4.0, v1 in 0.0f64..30.0, v2 in 0.0f64..30.0) {
            let b = BindingBasis::harmonic(2.0, 6).unwrap();
            let m = MirrorConfig::new(v1, v2).unwrap();
            let c = coupling_matrix(&b, &m, x).unwrap();
            for n in 0..6 {
                for k in 0..6 {
                    prop_assert_eq!(c[n * 6 + k], c[k * 6 + n]);
                }
            }
        }
    }
}
