//! Single particle scattering off one delta mirror `V_m δ(x)` with kinetic
//! term `p²/2`. Serves as the closed-form limit of the coupled model.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Transmission and reflection amplitudes of a delta mirror at wavenumber `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MirrorAmplitudes {
    pub k: f64,
    pub strength: f64,
    pub t: Complex64,
    pub r: Complex64,
}

impl MirrorAmplitudes {
    pub fn transmission(&self) -> f64 {
        self.t.norm_sqr()
    }

    pub fn reflection(&self) -> f64 {
        self.r.norm_sqr()
    }
}

/// `t = k / (k + i V_m)`, `r = -i V_m / (k + i V_m)`.
pub fn transmission_reflection(k: f64, strength: f64) -> Result<MirrorAmplitudes> {
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::Domain(format!("wavenumber must be finite and positive, got {k}")));
    }
    if !strength.is_finite() {
        return Err(Error::Domain(format!("mirror strength must be finite, got {strength}")));
    }
    let denom = Complex64::new(k, strength);
    let t = Complex64::new(k, 0.0) / denom;
    let r = Complex64::new(0.0, -strength) / denom;
    Ok(MirrorAmplitudes { k, strength, t, r })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PoleKind {
    /// `Im k < 0`: outgoing solution growing at large `|x|`.
    Resonance,
    /// `Im k > 0`: normalizable state of an attractive mirror.
    BoundState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pole {
    pub k: Complex64,
    pub kind: PoleKind,
}

/// Pole of the amplitudes at `k = -i V_m`; `None` for a vanishing mirror.
pub fn pole_wavenumber(strength: f64) -> Option<Pole> {
    if strength == 0.0 || !strength.is_finite() {
        return None;
    }
    let k = Complex64::new(0.0, -strength);
    let kind = if strength > 0.0 {
        PoleKind::Resonance
    } else {
        PoleKind::BoundState
    };
    Some(Pole { k, kind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_silvered_at_k_equal_strength() {
        let amp = transmission_reflection(1.0, 1.0).unwrap();
        assert!((amp.transmission() - 0.5).abs() < 1e-15);
        assert!((amp.reflection() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn no_mirror_is_transparent() {
        let amp = transmission_reflection(5.0, 0.0).unwrap();
        assert_eq!(amp.t, Complex64::new(1.0, 0.0));
        assert_eq!(amp.r.norm(), 0.0);
    }

    #[test]
    fn hand_evaluated_k2() {
        let amp = transmission_reflection(2.0, 1.0).unwrap();
        assert!((amp.transmission() - 0.8).abs() < 1e-15);
        assert!((amp.reflection() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_wavenumbers() {
        for k in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(transmission_reflection(k, 1.0), Err(Error::Domain(_))));
        }
        assert!(transmission_reflection(1.0, f64::NAN).is_err());
    }

    #[test]
    fn poles() {
        let p = pole_wavenumber(1.0).unwrap();
        assert_eq!(p.k, Complex64::new(0.0, -1.0));
        assert_eq!(p.kind, PoleKind::Resonance);
        let p = pole_wavenumber(-1.0).unwrap();
        assert_eq!(p.k, Complex64::new(0.0, 1.0));
        assert_eq!(p.kind, PoleKind::BoundState);
        assert!(pole_wavenumber(0.0).is_none());
    }

    proptest! {
        #[test]
        fn unitarity_and_continuity(k in 1e-3f64..100.0, vm in -100.0f64..100.0) {
            let amp = transmission_reflection(k, vm).unwrap();
            prop_assert!((amp.transmission() + amp.reflection() - 1.0).abs() < 1e-12);
            prop_assert!((Complex64::new(1.0, 0.0) + amp.r - amp.t).norm() < 1e-12);
        }

        #[test]
        fn pole_is_purely_imaginary(vm in -100.0f64..100.0) {
            if let Some(p) = pole_wavenumber(vm) {
                prop_assert_eq!(p.k.re, 0.0);
            }
        }

        #[test]
        fn transmission_monotone_in_k(k in 0.01f64..50.0, dk in 0.01f64..50.0, vm in -100.0f64..100.0) {
            let lo = transmission_reflection(k, vm).unwrap().transmission();
            let hi = transmission_reflection(k + dk, vm).unwrap().transmission();
            prop_assert!(hi >= lo);
        }
    }

    #[test]
    fn high_energy_transparency() {
        let amp = transmission_reflection(1e8, 3.0).unwrap();
        assert!((amp.t - Complex64::new(1.0, 0.0)).norm() < 1e-7);
    }
}
