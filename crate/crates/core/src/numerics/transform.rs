//! Unitary discrete transform between the position and momentum grids.
//!
//! The continuum pair
//!
//! ```text
//! phi(p) = (2 pi hbar)^{-1/2} ∫ psi(x) exp(-i p x / hbar) dx
//! psi(x) = (2 pi hbar)^{-1/2} ∫ phi(p) exp(+i p x / hbar) dp
//! ```
//!
//! is discretised on cell-centred grids. With `a_j = j - (n-1)/2` the kernel
//! `exp(-2 pi i a_j a_k / n)` factors into a plain DFT sandwiched between two
//! diagonal phase ramps, so one FFT per transform suffices and the discrete
//! map is exactly unitary with respect to the `dx`/`dp` weights.

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use super::grid::Grid;
use crate::error::{check_len, CvResult};

/// A reusable plan for one grid: the two FFTs plus their phase ramps.
#[derive(Clone)]
pub struct Transform {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // exp(i pi (n-1) k / n)
    ramp: Vec<C64>,
    // scale * exp(-i pi (n-1)^2 / (2n)) for x -> p
    fwd_const: C64,
    inv_const: C64,
}

impl Transform {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.n_points();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let two_n = 2 * n as u64;
        let ramp = (0..n as u64)
            .map(|k| {
                let r = ((n as u64 - 1) * k) % two_n;
                C64::from_polar(1.0, PI * r as f64 / n as f64)
            })
            .collect();
        let q = ((n as u64 - 1) * (n as u64 - 1)) % (4 * n as u64);
        let chirp = C64::from_polar(1.0, -PI * q as f64 / (2.0 * n as f64));
        let norm = (2.0 * PI * grid.hbar().value()).sqrt();
        Self {
            n,
            forward,
            inverse,
            ramp,
            fwd_const: chirp * (grid.dx() / norm),
            inv_const: chirp.conj() * (grid.dp() / norm),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// x-samples to p-samples, in place. `buf.len()` must equal the grid size.
    pub fn x_to_p_in_place(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.n);
        for (v, r) in buf.iter_mut().zip(&self.ramp) {
            *v *= r;
        }
        self.forward.process(buf);
        for (v, r) in buf.iter_mut().zip(&self.ramp) {
            *v *= r * self.fwd_const;
        }
    }

    /// p-samples to x-samples, in place; exact inverse of [`Self::x_to_p_in_place`].
    pub fn p_to_x_in_place(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.n);
        for (v, r) in buf.iter_mut().zip(&self.ramp) {
            *v *= r.conj();
        }
        self.inverse.process(buf);
        for (v, r) in buf.iter_mut().zip(&self.ramp) {
            *v *= r.conj() * self.inv_const;
        }
    }
}

pub fn x_to_p_transform(values: &[C64], grid: &Grid) -> CvResult<Vec<C64>> {
    check_len(grid.n_points(), values.len())?;
    let mut out = values.to_vec();
    Transform::new(grid).x_to_p_in_place(&mut out);
    Ok(out)
}

pub fn p_to_x_transform(values: &[C64], grid: &Grid) -> CvResult<Vec<C64>> {
    check_len(grid.n_points(), values.len())?;
    let mut out = values.to_vec();
    Transform::new(grid).p_to_x_in_place(&mut out);
    Ok(out)
}

/// Riemann sum `sum(values) * dx`.
pub fn quadrature_integrate(values: &[C64], grid: &Grid) -> CvResult<C64> {
    check_len(grid.n_points(), values.len())?;
    Ok(values.iter().sum::<C64>() * grid.dx())
}

/// `(1 / 2 pi hbar) sum_p exp(i p (x - x') / hbar) dp` evaluated at every x for
/// the source bin `source`. On the grid this should be `1/dx` at `source` and
/// zero elsewhere.
pub fn delta_kernel(grid: &Grid, source: usize) -> Vec<C64> {
    let n = grid.n_points() as i64;
    let two_n = 2 * n;
    let weight = grid.dp() / (2.0 * PI * grid.hbar().value());
    (0..n)
        .map(|k| {
            let m = k - source as i64;
            // p_j (x_k - x_source) / hbar = pi (2j - (n-1)) m / n
            let sum: C64 = (0..n)
                .map(|j| {
                    let r = ((2 * j - (n - 1)) * m).rem_euclid(two_n);
                    C64::from_polar(1.0, PI * r as f64 / n as f64)
                })
                .sum();
            sum * weight
        })
        .collect()
}

/// Max deviation of [`delta_kernel`] from the grid delta, over a spread of
/// source bins (both edges and the two bins straddling the origin).
pub fn delta_identity_check(grid: &Grid) -> f64 {
    let n = grid.n_points();
    let inv_dx = 1.0 / grid.dx();
    let mut sources = vec![0, n / 2 - 1, n / 2, n - 1];
    sources.dedup();
    sources
        .into_iter()
        .flat_map(|s| {
            delta_kernel(grid, s).into_iter().enumerate().map(move |(k, v)| {
                let target = if k == s { inv_dx } else { 0.0 };
                (v - target).norm()
            })
        })
        .fold(0.0, f64::max)
}
