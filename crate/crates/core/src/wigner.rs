//! Wigner quasi-probability functions and plot-ready exports.
//!
//! The transform is the standard
//! `W(x, p) = (1/(pi hbar)) int psi*(x + y) psi(x - y) e^{2 i p y / hbar} dy`.
//!
//! For grid states the wavefunction is evaluated off-lattice through its
//! band-limited interpolant: for each output `x` a zero-padded length-`2n`
//! FFT of the momentum amplitudes gives `psi(x + m dx/2)` for all `m` at
//! once, and the `y` integral becomes a half-step sum. Points outside the
//! grid extent count as zero. Gaussian states use the closed form.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{CvError, CvResult};
use crate::fock::FockState;
use crate::gaussian::GaussianState;
use crate::gridstate::GridState;
use crate::numerics::{Grid, HBar, Transform};
use crate::par::{self, Exec};

pub const DEFAULT_AXIS_POINTS: usize = 200;
pub const DEFAULT_AXIS_HALF_WIDTHS: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub x_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    /// `values[i][j]` is `W(x_axis[j], p_axis[i])`.
    pub values: Vec<Vec<f64>>,
    pub hbar: HBar,
}

#[derive(Serialize, Deserialize)]
struct WignerJson {
    x_axis: Vec<f64>,
    p_axis: Vec<f64>,
    values: Vec<Vec<f64>>,
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![(lo + hi) / 2.0],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `[-k sqrt(hbar/2), k sqrt(hbar/2)]` sampled at `points` points.
pub fn default_axis(hbar: HBar, half_widths: f64, points: usize) -> Vec<f64> {
    let r = half_widths * (hbar.value() / 2.0).sqrt();
    linspace(-r, r, points)
}

fn spacing(axis: &[f64]) -> f64 {
    if axis.len() < 2 {
        0.0
    } else {
        (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
    }
}

impl WignerGrid {
    /// `sum W dx dp` over the axes.
    pub fn normalization(&self) -> f64 {
        normalization_check(self)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sum_p W(x, p) dp` for each x.
    pub fn x_marginal(&self) -> Vec<f64> {
        let dp = spacing(&self.p_axis);
        (0..self.x_axis.len()).map(|j| self.values.iter().map(|row| row[j]).sum::<f64>() * dp).collect()
    }

    /// `sum_x W(x, p) dx` for each p.
    pub fn p_marginal(&self) -> Vec<f64> {
        let dx = spacing(&self.x_axis);
        self.values.iter().map(|row| row.iter().sum::<f64>() * dx).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> CvResult<()> {
        writeln!(out, "x,p,w")?;
        for (p, row) in self.p_axis.iter().zip(&self.values) {
            for (x, w) in self.x_axis.iter().zip(row) {
                writeln!(out, "{x:.16e},{p:.16e},{w:.16e}")?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> CvResult<String> {
        Ok(serde_json::to_string(&WignerJson {
            x_axis: self.x_axis.clone(),
            p_axis: self.p_axis.clone(),
            values: self.values.clone(),
        })?)
    }

    pub fn from_json(s: &str, hbar: HBar) -> CvResult<Self> {
        let j: WignerJson = serde_json::from_str(s)?;
        if j.values.len() != j.p_axis.len() || j.values.iter().any(|r| r.len() != j.x_axis.len()) {
            return Err(CvError::Dimension { expected: j.p_axis.len(), found: j.values.len() });
        }
        Ok(Self { x_axis: j.x_axis, p_axis: j.p_axis, values: j.values, hbar })
    }

    /// Binary greyscale PGM (P5), high `p` on the top row, values mapped
    /// linearly from the minimum (black) to the maximum (white).
    pub fn write_pgm<W: Write>(&self, mut out: W) -> CvResult<()> {
        let (w, h) = (self.x_axis.len(), self.p_axis.len());
        write!(out, "P5\n{w} {h}\n255\n")?;
        let (lo, hi) = (self.min(), self.max());
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut bytes = Vec::with_capacity(w * h);
        for row in self.values.iter().rev() {
            bytes.extend(row.iter().map(|v| (((v - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8));
        }
        out.write_all(&bytes)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

pub fn export(w: &WignerGrid, format: ExportFormat, path: &Path) -> CvResult<()> {
    let mut f = BufWriter::new(File::create(path)?);
    match format {
        ExportFormat::Csv => w.write_csv(&mut f)?,
        ExportFormat::Json => f.write_all(w.to_json()?.as_bytes())?,
    }
    f.flush()?;
    Ok(())
}

pub fn export_pgm(w: &WignerGrid, path: &Path) -> CvResult<()> {
    let mut f = BufWriter::new(File::create(path)?);
    w.write_pgm(&mut f)?;
    f.flush()?;
    Ok(())
}

/// `sum W dx dp` with the axis spacings.
pub fn normalization_check(w: &WignerGrid) -> f64 {
    w.values.iter().flatten().sum::<f64>() * spacing(&w.x_axis) * spacing(&w.p_axis)
}

fn check_axes(grid: &Grid, x_axis: &[f64], p_axis: &[f64]) -> CvResult<()> {
    let half = grid.extent() / 2.0;
    if let Some(x) = x_axis.iter().find(|x| !(x.abs() <= half)) {
        return Err(CvError::Domain(format!("x = {x} lies outside the grid extent +-{half}")));
    }
    let pm = grid.p_max();
    if let Some(p) = p_axis.iter().find(|p| !(p.abs() <= pm)) {
        return Err(CvError::Domain(format!("p = {p} lies outside the momentum range +-{pm}")));
    }
    Ok(())
}

pub fn wigner_from_grid(state: &GridState, x_axis: &[f64], p_axis: &[f64]) -> CvResult<WignerGrid> {
    wigner_from_grid_with(state, x_axis, p_axis, Exec::default())
}

pub fn wigner_from_grid_with(
    state: &GridState,
    x_axis: &[f64],
    p_axis: &[f64],
    exec: Exec,
) -> CvResult<WignerGrid> {
    if state.modes() != 1 {
        return Err(CvError::Domain("Wigner function needs a single-mode state".into()));
    }
    let grid = *state.grid();
    check_axes(&grid, x_axis, p_axis)?;
    let n = grid.n_points();
    let m2 = 2 * n;
    let hb = grid.hbar().value();
    let h = grid.dx() / 2.0;
    let half = grid.extent() / 2.0;

    let mut phi = state.amplitudes().to_vec();
    Transform::new(&grid).x_to_p_in_place(&mut phi);
    let ps = grid.ps();
    let pref = grid.dp() / (2.0 * PI * hb).sqrt();
    let ifft = FftPlanner::new().plan_fft_inverse(m2);
    // e^{i p_j m h / hbar} = e^{2 pi i j m / 2n} e^{-i pi (n-1) m / 2n}
    let ramp: Vec<C64> = (0..m2)
        .map(|k| {
            let m = if k < n { k as i64 } else { k as i64 - m2 as i64 };
            C64::from_polar(pref, -PI * (n as f64 - 1.0) * m as f64 / m2 as f64)
        })
        .collect();
    // m runs over -(n-1)..=(n-1); kernel[i][m + n - 1] = e^{2 i p m h / hbar}
    let kernel: Vec<Vec<C64>> = p_axis
        .iter()
        .map(|p| (0..m2 - 1).map(|t| C64::from_polar(1.0, 2.0 * p * (t as f64 - (n as f64 - 1.0)) * h / hb)).collect())
        .collect();
    let scale = h / (PI * hb);

    let columns: Vec<Vec<f64>> = par::map_range(exec, x_axis.len(), |ix| {
        let x = x_axis[ix];
        let mut buf: Vec<C64> = phi.iter().zip(&ps).map(|(f, p)| f * C64::from_polar(1.0, p * x / hb)).collect();
        buf.resize(m2, C64::new(0.0, 0.0));
        ifft.process(&mut buf);
        // psi(x + m h), m in [-n, n), stored at m mod 2n
        let psi = |m: i64| -> C64 {
            let y = x + m as f64 * h;
            if y.abs() > half {
                return C64::new(0.0, 0.0);
            }
            let k = m.rem_euclid(m2 as i64) as usize;
            buf[k] * ramp[k]
        };
        let nn = n as i64;
        let g: Vec<C64> = (-(nn - 1)..nn).map(|m| psi(m).conj() * psi(-m)).collect();
        kernel.iter().map(|row| (row.iter().zip(&g).map(|(e, v)| e * v).sum::<C64>()).re * scale).collect()
    });

    let values = (0..p_axis.len()).map(|ip| columns.iter().map(|c| c[ip]).collect()).collect();
    Ok(WignerGrid { x_axis: x_axis.to_vec(), p_axis: p_axis.to_vec(), values, hbar: grid.hbar() })
}

/// Closed-form Wigner function of one mode of a Gaussian state.
pub fn wigner_from_gaussian(state: &GaussianState, mode: usize, x_axis: &[f64], p_axis: &[f64]) -> CvResult<WignerGrid> {
    let (mu, v) = state.wigner_params(mode)?;
    let inv = v.try_inverse().ok_or_else(|| CvError::Contract("singular reduced covariance".into()))?;
    let norm = 1.0 / (2.0 * PI * v.determinant().sqrt());
    let values = p_axis
        .iter()
        .map(|&p| {
            x_axis
                .iter()
                .map(|&x| {
                    let d = nalgebra::Vector2::new(x - mu[0], p - mu[1]);
                    norm * (-0.5 * d.dot(&(inv * d))).exp()
                })
                .collect()
        })
        .collect();
    Ok(WignerGrid { x_axis: x_axis.to_vec(), p_axis: p_axis.to_vec(), values, hbar: state.hbar() })
}

/// Wigner function of a single-mode Fock state, through Hermite synthesis on `grid`.
pub fn wigner_from_fock(state: &FockState, grid: Grid, x_axis: &[f64], p_axis: &[f64]) -> CvResult<WignerGrid> {
    wigner_from_grid(&state.to_grid(grid)?, x_axis, p_axis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockGate;

    fn hb() -> HBar {
        HBar::new(2.0).unwrap()
    }

    fn grid() -> Grid {
        Grid::self_dual(512, hb()).unwrap()
    }

    fn vacuum_w(x: f64, p: f64) -> f64 {
        (-(x * x + p * p) / 2.0).exp() / (2.0 * PI)
    }

    fn max_dev(w: &WignerGrid, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in w.p_axis.iter().enumerate() {
            for (j, x) in w.x_axis.iter().enumerate() {
                d = d.max((w.values[i][j] - f(*x, *p)).abs());
            }
        }
        d
    }

    #[test]
    fn vacuum_matches_closed_form() {
        let ax = default_axis(hb(), 5.0, 41);
        let w = wigner_from_grid(&GridState::vacuum(grid(), 1).unwrap(), &ax, &ax).unwrap();
        assert!(max_dev(&w, vacuum_w) < 1e-6);
        let ax = linspace(-10.0, 10.0, 161);
        let w = wigner_from_grid(&GridState::vacuum(grid(), 1).unwrap(), &ax, &ax).unwrap();
        assert!((w.normalization() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn displaced_vacuum_is_translated() {
        let s = GridState::vacuum(grid(), 1).unwrap().displace(0, 1.2, -0.7).unwrap();
        let ax = linspace(-4.0, 4.0, 33);
        let w = wigner_from_grid(&s, &ax, &ax).unwrap();
        assert!(max_dev(&w, |x, p| vacuum_w(x - 1.2, p + 0.7)) < 1e-6);
    }

    #[test]
    fn fock_one_is_negative_at_origin() {
        let one = FockState::number_state(1, 10, hb()).unwrap();
        let w = wigner_from_fock(&one, grid(), &[0.0], &[0.0]).unwrap();
        assert!((w.values[0][0] + 1.0 / (2.0 * PI)).abs() < 1e-4);
        let three = FockState::number_state(3, 10, hb()).unwrap();
        let ax = linspace(-9.0, 9.0, 181);
        let w = wigner_from_fock(&three, grid(), &ax, &ax).unwrap();
        assert!((w.normalization() - 1.0).abs() < 1e-4);
        assert!(w.min() >= -1.0 / (2.0 * PI) - 1e-6);
    }

    #[test]
    fn marginals() {
        let g = grid();
        let s = GridState::gaussian(g, 0.4, 0.3, 1.3).unwrap().squeeze(0, 0.2, 0.7).unwrap();
        let xs: Vec<f64> = (200..312).map(|k| g.x(k)).collect();
        let ps = linspace(-20.0, 20.0, 801);
        let w = wigner_from_grid(&s, &xs, &ps).unwrap();
        let marg = w.x_marginal();
        for (j, k) in (200..312).enumerate() {
            assert!((marg[j] - s.amplitudes()[k].norm_sqr()).abs() < 1e-5);
        }
    }

    #[test]
    fn gaussian_closed_form() {
        let v = GaussianState::vacuum(1, hb()).unwrap();
        let w = wigner_from_gaussian(&v, 0, &[0.0], &[0.0]).unwrap();
        assert!((w.values[0][0] - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let sq = v.apply_squeeze(0, 0.5, 0.0).unwrap();
        let from_grid = wigner_from_grid(
            &GridState::vacuum(grid(), 1).unwrap().squeeze(0, 0.5, 0.0).unwrap(),
            &linspace(-3.0, 3.0, 13),
            &linspace(-3.0, 3.0, 13),
        )
        .unwrap();
        let analytic = wigner_from_gaussian(&sq, 0, &linspace(-3.0, 3.0, 13), &linspace(-3.0, 3.0, 13)).unwrap();
        assert!(max_dev(&from_grid, |x, p| {
            let j = analytic.x_axis.iter().position(|v| *v == x).unwrap();
            let i = analytic.p_axis.iter().position(|v| *v == p).unwrap();
            analytic.values[i][j]
        }) < 1e-6);
    }

    #[test]
    fn squeezed_fock_matches_gaussian() {
        let sq = FockState::vacuum(1, 40, hb()).unwrap().apply_gate(0, FockGate::Squeeze(C64::new(0.3, 0.0))).unwrap();
        let ax = linspace(-3.0, 3.0, 7);
        let a = wigner_from_fock(&sq, grid(), &ax, &ax).unwrap();
        let g = GaussianState::vacuum(1, hb()).unwrap().apply_squeeze(0, 0.3, 0.0).unwrap();
        let b = wigner_from_gaussian(&g, 0, &ax, &ax).unwrap();
        for (ra, rb) in a.values.iter().zip(&b.values) {
            for (u, v) in ra.iter().zip(rb) {
                assert!((u - v).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn axes_out_of_range() {
        let s = GridState::vacuum(grid(), 1).unwrap();
        assert!(matches!(wigner_from_grid(&s, &[1e3], &[0.0]), Err(CvError::Domain(_))));
        assert!(matches!(wigner_from_grid(&s, &[0.0], &[1e3]), Err(CvError::Domain(_))));
    }

    #[test]
    fn seq_and_par_agree() {
        let s = GridState::gaussian(grid(), 0.5, 0.0, 1.0).unwrap();
        let ax = linspace(-3.0, 3.0, 9);
        let a = wigner_from_grid_with(&s, &ax, &ax, Exec::Seq).unwrap();
        let b = wigner_from_grid_with(&s, &ax, &ax, Exec::Par).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exports() {
        let v = GaussianState::vacuum(1, hb()).unwrap();
        let ax = linspace(-1.0, 1.0, 3);
        let w = wigner_from_gaussian(&v, 0, &ax, &ax).unwrap();
        let mut csv = Vec::new();
        w.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert_eq!(text.lines().next(), Some("x,p,w"));
        assert!(text.lines().nth(2).unwrap().starts_with("0.0000000000000000e0,-1.0000000000000000e0,"));

        let empty = WignerGrid { x_axis: vec![], p_axis: vec![], values: vec![], hbar: hb() };
        let mut csv = Vec::new();
        empty.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "x,p,w\n");

        let back = WignerGrid::from_json(&w.to_json().unwrap(), hb()).unwrap();
        assert_eq!(back, w);

        let mut pgm = Vec::new();
        w.write_pgm(&mut pgm).unwrap();
        assert!(pgm.starts_with(b"P5\n3 3\n255\n"));
        assert_eq!(pgm.len(), b"P5\n3 3\n255\n".len() + 9);
        assert_eq!(pgm[pgm.len() - 5], 255);
    }
}
