use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{CvError, CvResult};

/// Default value of the reduced Planck constant.
pub const DEFAULT_HBAR: f64 = 2.0;

/// Dimensionless action unit. All states taking part in one computation must
/// agree on it.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HBar(f64);

impl HBar {
    pub fn new(value: f64) -> CvResult<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Self(value))
        } else {
            Err(CvError::Domain(format!("hbar must be positive and finite, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Error unless `self` and `other` are the same value.
    pub fn ensure_same(self, other: HBar) -> CvResult<()> {
        if self.0 == other.0 {
            Ok(())
        } else {
            Err(CvError::HbarMismatch { left: self.0, right: other.0 })
        }
    }
}

impl Default for HBar {
    fn default() -> Self {
        Self(DEFAULT_HBAR)
    }
}

/// Uniform cell-centred discretisation of one quadrature axis.
///
/// Position samples sit at `x_k = -L/2 + (k + 1/2) dx`. The induced momentum
/// grid uses the same cell-centred layout with spacing `dp = 2 pi hbar / L`,
/// so on a self-dual grid (`dx == dp`) both axes hold identical points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    #[serde(rename = "L")]
    extent: f64,
    hbar: HBar,
}

impl Grid {
    pub fn new(n_points: usize, extent: f64, hbar: HBar) -> CvResult<Self> {
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(CvError::Config(format!(
                "grid point count must be a power of two >= 2, got {n_points}"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(CvError::Config(format!("grid extent must be positive, got {extent}")));
        }
        Ok(Self { n: n_points, extent, hbar })
    }

    /// The grid with `dx == dp`, i.e. `L^2 = 2 pi hbar n`.
    pub fn self_dual(n_points: usize, hbar: HBar) -> CvResult<Self> {
        let extent = (2.0 * PI * hbar.value() * n_points as f64).sqrt();
        Self::new(n_points, extent, hbar)
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn hbar(&self) -> HBar {
        self.hbar
    }

    pub fn dx(&self) -> f64 {
        self.extent / self.n as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI * self.hbar.value() / self.extent
    }

    pub fn x(&self, k: usize) -> f64 {
        (k as f64 - self.n as f64 / 2.0 + 0.5) * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        (j as f64 - self.n as f64 / 2.0 + 0.5) * self.dp()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.x(k)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.p(j)).collect()
    }

    /// Largest |p| represented on the momentum grid.
    pub fn p_max(&self) -> f64 {
        PI * self.hbar.value() / self.dx()
    }

    pub fn is_self_dual(&self) -> bool {
        (self.dx() - self.dp()).abs() <= 1e-12 * self.dx()
    }

    /// Index of the bin containing `x`, if inside the extent.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let t = (x + self.extent / 2.0) / self.dx();
        if t >= 0.0 && t < self.n as f64 {
            Some(t.floor() as usize)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Grid::new(100, 10.0, HBar::default()).is_err());
        assert!(Grid::new(128, -1.0, HBar::default()).is_err());
        assert!(HBar::new(0.0).is_err());
    }

    #[test]
    fn cell_centres_are_symmetric() {
        let g = Grid::new(8, 4.0, HBar::default()).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.x(0), -1.75);
        assert_eq!(g.x(7), 1.75);
        for k in 0..8 {
            assert_eq!(g.x(k), -g.x(7 - k));
            assert_eq!(g.p(k), -g.p(7 - k));
        }
        assert_eq!(g.bin_of(0.1), Some(4));
        assert_eq!(g.bin_of(2.5), None);
    }

    #[test]
    fn self_dual_spacing() {
        let g = Grid::self_dual(256, HBar::new(1.3).unwrap()).unwrap();
        assert!(g.is_self_dual());
        assert!((g.dx() * g.dp() * 256.0 - 2.0 * PI * 1.3).abs() < 1e-12);
        assert!(!Grid::new(256, 10.0, HBar::default()).unwrap().is_self_dual());
    }
}
