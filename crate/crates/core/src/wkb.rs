//! Two-channel adiabatic analysis of a bound pair at a symmetric mirror.
//!
//! Diagonalizing `ε̂ + V̂(x)` over the even modes {0, 2} gives the adiabatic
//! potentials `V₋ ≤ V₊`. For strong mirrors `V₊` is a double well whose
//! quasi-bound levels are estimated in closed form.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::basis::BindingBasis;
use crate::error::{Error, Result};

/// Mirror strength relative to `√Ω` below which the asymptotic forms are unreliable.
pub const REGIME_RATIO: f64 = 10.0;

pub const DEPTH_COEFFICIENT: f64 = 1.20;
pub const STIFFNESS_COEFFICIENT: f64 = 2.14;
pub const ALPHA: (f64, f64) = (-1.20, 1.22);
pub const BETA: (f64, f64) = (-1.91, 0.45);

fn check(omega: f64, v: f64) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!("binding frequency must be positive, got {omega}")));
    }
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Domain(format!("mirror strength must be positive, got {v}")));
    }
    Ok(())
}

fn regime_warning(omega: f64, v: f64) -> Option<String> {
    (v < REGIME_RATIO * omega.sqrt()).then(|| {
        format!(
            "V = {v} is below {REGIME_RATIO}·√Ω = {:.4}; asymptotic forms are outside their regime",
            REGIME_RATIO * omega.sqrt()
        )
    })
}

/// Lower and upper eigenvalues of the {0, 2} block at `x`.
pub fn adiabatic_pair(basis: &BindingBasis, v: f64, x: f64) -> Result<(f64, f64)> {
    let phi = basis.eigenfunctions(x)?;
    let (e0, e2) = (basis.eigenenergy(0)?, basis.eigenenergy(2)?);
    let (p0, p2) = (phi[0] * phi[0], phi[2] * phi[2]);
    let mean = e0 + e2 + 4.0 * v * (p0 + p2);
    let gap = ((e0 - e2 + 4.0 * v * (p0 - p2)).powi(2) + 64.0 * v * v * p0 * p2).sqrt();
    Ok((0.5 * (mean - gap), 0.5 * (mean + gap)))
}

/// `(V₋_asym, V₊_asym)` at `x`.
pub fn asymptotic_pair(omega: f64, v: f64, x: f64) -> (f64, f64) {
    let u = omega * x * x;
    let p = 3.0 - 4.0 * u + 4.0 * u * u;
    let lower = omega * (11.0 - 4.0 * u + 4.0 * u * u) / p;
    let upper = 2.0 * omega.sqrt() * v / PI.sqrt() * (-u).exp() * p;
    (lower, upper)
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceEstimate {
    pub v_min: f64,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub symmetric: Complex64,
    pub antisymmetric: Complex64,
    pub warning: Option<String>,
}

impl ResonanceEstimate {
    pub fn splitting(&self) -> f64 {
        self.symmetric.re - self.antisymmetric.re
    }
}

/// `E^{S/A} = V_min + ω ± (ω/π)e^{-α} - i(ω/π)e^{-2β}`.
pub fn resonance_estimate(omega: f64, v: f64) -> Result<ResonanceEstimate> {
    check(omega, v)?;
    let v_min = DEPTH_COEFFICIENT * omega.sqrt() * v;
    let w = STIFFNESS_COEFFICIENT * omega.powf(0.75) * v.sqrt();
    let s = omega.powf(-0.25) * v.sqrt();
    let alpha = ALPHA.0 + ALPHA.1 * s;
    let beta = BETA.0 + BETA.1 * s;
    let split = w / PI * (-alpha).exp();
    let width = w / PI * (-2.0 * beta).exp();
    Ok(ResonanceEstimate {
        v_min,
        omega: w,
        alpha,
        beta,
        symmetric: Complex64::new(v_min + w + split, -width),
        antisymmetric: Complex64::new(v_min + w - split, -width),
        warning: regime_warning(omega, v),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WkbCurves {
    pub x: Vec<f64>,
    pub v_plus: Vec<f64>,
    pub v_minus: Vec<f64>,
    pub v_plus_asym: Vec<f64>,
    pub v_minus_asym: Vec<f64>,
    pub estimate: ResonanceEstimate,
}

impl WkbCurves {
    pub fn new(omega: f64, v: f64, x: &[f64]) -> Result<Self> {
        check(omega, v)?;
        let basis = BindingBasis::harmonic(omega, 3)?;
        let mut curves = Self {
            x: x.to_vec(),
            v_plus: Vec::with_capacity(x.len()),
            v_minus: Vec::with_capacity(x.len()),
            v_plus_asym: Vec::with_capacity(x.len()),
            v_minus_asym: Vec::with_capacity(x.len()),
            estimate: resonance_estimate(omega, v)?,
        };
        for &xi in x {
            let (lo, hi) = adiabatic_pair(&basis, v, xi)?;
            let (lo_a, hi_a) = asymptotic_pair(omega, v, xi);
            curves.v_minus.push(lo);
            curves.v_plus.push(hi);
            curves.v_minus_asym.push(lo_a);
            curves.v_plus_asym.push(hi_a);
        }
        Ok(curves)
    }

    /// Symmetric grid `[-x_max, x_max]` with `n` points.
    pub fn on_grid(omega: f64, v: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 2 || !(x_max > 0.0) {
            return Err(Error::Config("grid needs at least two points and a positive extent".into()));
        }
        let x: Vec<f64> = (0..n).map(|i| -x_max + 2.0 * x_max * i as f64 / (n - 1) as f64).collect();
        Self::new(omega, v, &x)
    }
}

/// Interior indices where `y` has a strict local minimum.
pub fn local_minima(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1)).filter(|&i| y[i] < y[i - 1] && y[i] < y[i + 1]).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    /// `Ω x*²` at the minimum of `V₊_asym`.
    pub u_star: f64,
    pub x_star: f64,
    pub depth: f64,
    pub depth_coefficient: f64,
    pub curvature: f64,
    pub stiffness_coefficient: f64,
}

/// Recovers the well depth and level spacing of `V₊_asym` numerically.
pub fn validate_constants(omega: f64, v: f64) -> Result<ConstantsReport> {
    check(omega, v)?;
    let f = |x: f64| asymptotic_pair(omega, v, x).1;
    // the outer well edge sits at u ≈ 2.2; bracket the minimum inside it
    let (mut a, mut b) = (0.0, (1.5 / omega).sqrt());
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-12 * (1.0 + b.abs()) {
            break;
        }
    }
    let x_star = 0.5 * (a + b);
    let h = 1e-3 * (1.0 / omega).sqrt();
    let curvature = (f(x_star + h) - 2.0 * f(x_star) + f(x_star - h)) / (h * h);
    if !(curvature > 0.0) || x_star <= 0.0 || x_star >= (1.5 / omega).sqrt() * (1.0 - 1e-6) {
        return Err(Error::Numerical("failed to locate the minimum of V₊".into()));
    }
    let depth = f(x_star);
    let half_spacing = (2.0 * curvature).sqrt() / 2.0;
    Ok(ConstantsReport {
        u_star: omega * x_star * x_star,
        x_star,
        depth,
        depth_coefficient: depth / (omega.sqrt() * v),
        curvature,
        stiffness_coefficient: half_spacing / (omega.powf(0.75) * v.sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{coupling_matrix, MirrorConfig};
    use faer::{Mat, Side};

    #[test]
    fn pair_matches_direct_eigensolve() {
        let (omega, v) = (0.1, 10.0);
        let basis = BindingBasis::harmonic(omega, 3).unwrap();
        let mirror = MirrorConfig::symmetric(v).unwrap();
        for x in [-7.0, -2.8, -0.3, 0.0, 1.1, 4.2] {
            let w = coupling_matrix(&basis, &mirror, x).unwrap();
            let m = Mat::<f64>::from_fn(2, 2, |i, j| {
                let (a, b) = (2 * i, 2 * j);
                w[a * 3 + b] + if a == b { basis.eigenenergy(a).unwrap() } else { 0.0 }
            });
            let ev = m.self_adjoint_eigenvalues(Side::Lower).unwrap();
            let (lo, hi) = adiabatic_pair(&basis, v, x).unwrap();
            assert!((lo - ev[0]).abs() < 1e-12 && (hi - ev[1]).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn far_field_thresholds() {
        let basis = BindingBasis::harmonic(0.1, 3).unwrap();
        let (lo, hi) = adiabatic_pair(&basis, 10.0, 40.0).unwrap();
        assert!((lo - 0.1).abs() < 1e-12);
        assert!((hi - 0.5).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_values_at_origin() {
        let (lo, hi) = asymptotic_pair(0.1, 10.0, 0.0);
        assert!((lo - 11.0 * 0.1 / 3.0).abs() < 1e-14);
        assert!((hi - 6.0 * 0.1f64.sqrt() * 10.0 / PI.sqrt()).abs() < 1e-12);
        assert!((hi - 10.70).abs() < 0.01);
        let (far, _) = asymptotic_pair(0.1, 10.0, 1e3);
        assert!((far - 0.1).abs() < 1e-6);
    }

    #[test]
    fn estimate_structure() {
        let est = resonance_estimate(0.1, 10.0).unwrap();
        assert!((est.v_min - 3.79).abs() < 0.01);
        assert!(est.symmetric.im < 0.0);
        assert_eq!(est.symmetric.im, est.antisymmetric.im);
        let expected = 2.0 * est.omega / PI * (-est.alpha).exp();
        assert!((est.splitting() - expected).abs() < 1e-12 && est.splitting() > 0.0);
        assert!(est.warning.is_none());
        assert!(resonance_estimate(1.0, 2.0).unwrap().warning.is_some());
    }

    #[test]
    fn non_positive_strength_is_rejected() {
        assert!(matches!(resonance_estimate(0.1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(WkbCurves::on_grid(0.1, -1.0, 5.0, 11), Err(Error::Domain(_))));
    }

    #[test]
    fn recovered_constants() {
        let r = validate_constants(0.1, 10.0).unwrap();
        assert!((r.u_star - (12.0 - 32f64.sqrt()) / 8.0).abs() < 1e-6);
        assert!((r.depth_coefficient - DEPTH_COEFFICIENT).abs() < 0.01);
        assert!((r.stiffness_coefficient - STIFFNESS_COEFFICIENT).abs() < 0.02);
    }

    #[test]
    fn figure_topology() {
        let c = WkbCurves::on_grid(0.1, 10.0, 10.0, 4001).unwrap();
        let plus = local_minima(&c.v_plus);
        let minus = local_minima(&c.v_minus);
        assert_eq!(plus.len(), 2);
        assert!((c.x[plus[0]] + c.x[plus[1]]).abs() < 1e-9);
        assert_eq!(minus.len(), 1);
        assert!(c.x[minus[0]].abs() < 1e-9);
        assert!(c.v_minus.iter().zip(&c.v_plus).all(|(a, b)| a <= b));
    }
}
