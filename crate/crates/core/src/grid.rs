use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Periodic center-of-mass grid `x_j = (j - N/2) dx` with FFT-ordered wavenumbers.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    length: f64,
    dx: f64,
    x: Vec<f64>,
    k: Vec<f64>,
}

impl SpatialGrid {
    pub fn new(length: f64, n_points: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Config(format!("grid length must be positive, got {length}")));
        }
        if n_points < 4 || !n_points.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid point count must be a power of two ≥ 4, got {n_points}"
            )));
        }
        let dx = length / n_points as f64;
        let half = (n_points / 2) as isize;
        let x = (0..n_points as isize).map(|j| (j - half) as f64 * dx).collect();
        let dk = 2.0 * PI / length;
        let k = (0..n_points as isize)
            .map(|j| if j < half { j as f64 * dk } else { (j - n_points as isize) as f64 * dk })
            .collect();
        Ok(Self { length, dx, x, k })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Wavenumbers in DFT order: `0, dk, …, (N/2 - 1) dk, -N/2 dk, …, -dk`.
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn k_max(&self) -> f64 {
        PI / self.dx
    }

    /// Index of the `x = 0` point (the mirror position).
    pub fn origin(&self) -> usize {
        self.len() / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let g = SpatialGrid::new(20.0, 64).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.x()[g.origin()], 0.0);
        assert_eq!(g.x()[0], -10.0);
        for j in 1..32 {
            assert_eq!(g.x()[g.origin() + j], -g.x()[g.origin() - j]);
        }
        assert!((g.dx() * g.k_max() - PI).abs() < 1e-15);
        assert_eq!(g.k()[0], 0.0);
        assert!((g.k()[32] + g.k_max()).abs() < 1e-12);
        assert!((g.k()[63] + 2.0 * PI / 20.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(SpatialGrid::new(10.0, 100).is_err());
        assert!(SpatialGrid::new(-1.0, 64).is_err());
    }
}
