use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use super::grid::Grid;
use crate::error::{CvError, CvResult};

/// Highest order the normalised recurrence is trusted for.
pub const MAX_HERMITE_ORDER: usize = 200;

/// Oscillator eigenfunction `psi_n(x)` sampled on the grid, unit-mass,
/// unit-frequency, with the grid's hbar.
pub fn hermite_function(n: usize, grid: &Grid) -> CvResult<Vec<C64>> {
    Ok(hermite_functions(n, grid)?.pop().expect("n + 1 rows"))
}

/// `psi_0 ..= psi_nmax` on the grid, one row per order.
///
/// Uses `psi_{k+1} = sqrt(2/(k+1)) (x/sqrt(hbar)) psi_k - sqrt(k/(k+1)) psi_{k-1}`,
/// which never forms `k!` or `2^k`.
pub fn hermite_functions(nmax: usize, grid: &Grid) -> CvResult<Vec<Vec<C64>>> {
    if nmax > MAX_HERMITE_ORDER {
        return Err(CvError::Domain(format!(
            "Hermite order {nmax} exceeds the supported maximum {MAX_HERMITE_ORDER}"
        )));
    }
    let h = grid.hbar().value();
    let xs = grid.xs();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(nmax + 1);
    let pref = (PI * h).powf(-0.25);
    rows.push(xs.iter().map(|x| pref * (-x * x / (2.0 * h)).exp()).collect());
    if nmax >= 1 {
        let s = 2f64.sqrt() / h.sqrt();
        rows.push(xs.iter().zip(&rows[0]).map(|(x, p0)| s * x * p0).collect());
    }
    for k in 1..nmax {
        let a = (2.0 / (k as f64 + 1.0)).sqrt() / h.sqrt();
        let b = (k as f64 / (k as f64 + 1.0)).sqrt();
        let next = xs
            .iter()
            .enumerate()
            .map(|(i, x)| a * x * rows[k][i] - b * rows[k - 1][i])
            .collect();
        rows.push(next);
    }
    Ok(rows
        .into_iter()
        .map(|r| r.into_iter().map(|v| C64::new(v, 0.0)).collect())
        .collect())
}
