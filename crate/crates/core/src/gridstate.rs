//! Discretised wavefunctions in the position representation.
//!
//! A [`GridState`] holds one or two modes on a shared [`Grid`]. Amplitudes are
//! wavefunction samples, so `sum |a|^2 dx^m = 1` for a normalised state. For
//! two modes the layout is row-major with mode 0 as the slow index.
//!
//! Momentum is handled spectrally: `p` acts as multiplication after the unitary
//! grid transform, which keeps it exactly Hermitian on the grid. Single-mode
//! Gaussian unitaries are built from exact diagonal steps (phase ramps and
//! quadratic chirps in either representation); quarter turns use the discrete
//! Fourier gate and therefore need a self-dual grid.

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{check_len, CvError, CvResult};
use crate::numerics::{Grid, HBar, Transform};
use crate::par::{self, Exec};
use crate::rng::SimRng;

const MAX_GRID_MODES: usize = 2;
const EDGE_WARN_RATIO: f64 = 1e-8;
const NORM_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GridState {
    grid: Grid,
    modes: usize,
    amps: Vec<C64>,
}

/// Which observable a [`QuadratureOperator`] applies.
#[derive(Clone, Debug, PartialEq)]
pub enum QuadKind {
    X,
    P,
    /// Pointwise multiplication in the position representation.
    DiagX(Vec<C64>),
    /// Pointwise multiplication in the momentum representation.
    DiagP(Vec<C64>),
    /// `a x + b p`.
    Linear { x: f64, p: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureOperator {
    pub kind: QuadKind,
    pub mode: usize,
}

impl QuadratureOperator {
    pub fn x(mode: usize) -> Self {
        Self { kind: QuadKind::X, mode }
    }

    pub fn p(mode: usize) -> Self {
        Self { kind: QuadKind::P, mode }
    }

    pub fn linear(mode: usize, x: f64, p: f64) -> Self {
        Self { kind: QuadKind::Linear { x, p }, mode }
    }
}

/// Finite-precision position window `[centre - width/2, centre + width/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionWindow {
    pub center: f64,
    pub width: f64,
    pub mode: usize,
}

impl ProjectionWindow {
    pub fn new(center: f64, width: f64, mode: usize) -> Self {
        Self { center, width, mode }
    }

    /// The window spanning the whole grid.
    pub fn full(grid: &Grid, mode: usize) -> Self {
        Self { center: 0.0, width: grid.extent(), mode }
    }

    /// The one-bin window around bin `k`.
    pub fn bin(grid: &Grid, k: usize, mode: usize) -> Self {
        Self { center: grid.x(k), width: grid.dx(), mode }
    }

    fn validate(&self, grid: &Grid) -> CvResult<()> {
        let tol = 1e-12 * grid.dx();
        if !(self.width.is_finite() && self.width >= grid.dx() - tol) {
            return Err(CvError::Domain(format!(
                "window width {} is below the grid spacing {}",
                self.width,
                grid.dx()
            )));
        }
        let half = grid.extent() / 2.0;
        let lo = self.center - self.width / 2.0;
        let hi = self.center + self.width / 2.0;
        if lo < -half - tol * grid.n_points() as f64 || hi > half + tol * grid.n_points() as f64 {
            return Err(CvError::Domain(format!("window [{lo}, {hi}) leaves the grid extent")));
        }
        Ok(())
    }

    fn contains(&self, x: f64, dx: f64) -> bool {
        let eps = 1e-9 * dx;
        let lo = self.center - self.width / 2.0;
        let hi = self.center + self.width / 2.0;
        x >= lo - eps && x < hi - eps
    }
}

/// Result of a single-shot position measurement.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub bin: usize,
    pub x: f64,
    pub post: GridState,
}

/// Serialised form: `{grid: {n, L, hbar}, modes, amplitudes: [[re, im], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSnapshot {
    pub grid: GridSpec,
    pub modes: usize,
    pub amplitudes: Vec<C64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "L")]
    pub extent: f64,
    pub hbar: f64,
}

impl GridSpec {
    pub fn to_grid(self) -> CvResult<Grid> {
        Grid::new(self.n, self.extent, HBar::new(self.hbar)?)
    }
}

impl From<&Grid> for GridSpec {
    fn from(g: &Grid) -> Self {
        Self { n: g.n_points(), extent: g.extent(), hbar: g.hbar().value() }
    }
}

fn check_modes(modes: usize) -> CvResult<()> {
    if (1..=MAX_GRID_MODES).contains(&modes) {
        Ok(())
    } else {
        Err(CvError::Domain(format!("grid backend supports 1 or 2 modes, got {modes}")))
    }
}

impl GridState {
    /// Wrap raw amplitudes. They are normalised; an all-zero input is an error.
    pub fn from_amplitudes(grid: Grid, modes: usize, amps: Vec<C64>) -> CvResult<Self> {
        check_modes(modes)?;
        check_len(grid.n_points().pow(modes as u32), amps.len())?;
        if amps.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(CvError::Contract("non-finite amplitude".into()));
        }
        let mut s = Self { grid, modes, amps };
        let nrm = s.norm_sqr();
        if nrm == 0.0 {
            return Err(CvError::Degenerate);
        }
        let scale = 1.0 / nrm.sqrt();
        s.amps.iter_mut().for_each(|a| *a *= scale);
        s.warn_on_edges();
        Ok(s)
    }

    /// Sample `f` on every mode (product state `f(x_1) ... f(x_m)`) and normalise.
    pub fn from_function<F: Fn(f64) -> C64>(grid: Grid, modes: usize, f: F) -> CvResult<Self> {
        check_modes(modes)?;
        let row: Vec<C64> = grid.xs().into_iter().map(f).collect();
        let amps = if modes == 1 {
            row
        } else {
            row.iter().flat_map(|a| row.iter().map(move |b| a * b)).collect()
        };
        Self::from_amplitudes(grid, modes, amps)
    }

    /// Two-mode state sampled from a joint function `f(x_1, x_2)`.
    pub fn from_function_2d<F: Fn(f64, f64) -> C64>(grid: Grid, f: F) -> CvResult<Self> {
        let xs = grid.xs();
        let amps = xs.iter().flat_map(|&a| xs.iter().map(move |&b| (a, b))).map(|(a, b)| f(a, b));
        Self::from_amplitudes(grid, 2, amps.collect())
    }

    /// Single-mode Gaussian `exp(-R^2 (x - x0)^2 / 2 hbar) exp(i p0 x / hbar)`.
    /// `R = 1` is the vacuum width for any hbar; `R > 1` squeezes x.
    pub fn gaussian(grid: Grid, x0: f64, p0: f64, squeeze_factor: f64) -> CvResult<Self> {
        if !(squeeze_factor.is_finite() && squeeze_factor > 0.0) {
            return Err(CvError::Domain(format!("squeezing factor must be positive, got {squeeze_factor}")));
        }
        let h = grid.hbar().value();
        let r2 = squeeze_factor * squeeze_factor;
        Self::from_function(grid, 1, |x| {
            C64::from_polar((-r2 * (x - x0).powi(2) / (2.0 * h)).exp(), p0 * x / h)
        })
    }

    pub fn vacuum(grid: Grid, modes: usize) -> CvResult<Self> {
        let h = grid.hbar().value();
        Self::from_function(grid, modes, |x| C64::new((-x * x / (2.0 * h)).exp(), 0.0))
    }

    /// The normalised grid delta `1/sqrt(dx)` at bin `k`.
    pub fn grid_delta(grid: Grid, k: usize) -> CvResult<Self> {
        if k >= grid.n_points() {
            return Err(CvError::Domain(format!("bin {k} outside grid of {}", grid.n_points())));
        }
        let mut amps = vec![C64::new(0.0, 0.0); grid.n_points()];
        amps[k] = C64::new(1.0 / grid.dx().sqrt(), 0.0);
        Ok(Self { grid, modes: 1, amps })
    }

    /// Perfectly correlated pair: amplitude `g(x_1)` on the diagonal
    /// `x_2 = x_1 - c`, with `c` rounded to a whole number of bins.
    pub fn entangled_pair<F: Fn(f64) -> C64>(grid: Grid, g: F, c: f64) -> CvResult<Self> {
        let n = grid.n_points();
        let shift_f = c / grid.dx();
        let shift = shift_f.round();
        if (shift_f - shift).abs() > 1e-9 {
            log::warn!("entangled pair offset {c} is not a whole number of bins; rounding to {shift}");
        }
        let shift = shift as i64;
        let mut amps = vec![C64::new(0.0, 0.0); n * n];
        let bin_height = 1.0 / grid.dx().sqrt();
        for (i, x) in grid.xs().into_iter().enumerate() {
            let j = i as i64 - shift;
            if (0..n as i64).contains(&j) {
                amps[i * n + j as usize] = g(x) * bin_height;
            }
        }
        Self::from_amplitudes(grid, 2, amps)
    }

    /// Product state of two single-mode states on the same grid.
    pub fn tensor(a: &GridState, b: &GridState) -> CvResult<Self> {
        if a.modes != 1 || b.modes != 1 {
            return Err(CvError::Domain("tensor expects two single-mode states".into()));
        }
        a.ensure_same_grid(b)?;
        let amps = a.amps.iter().flat_map(|x| b.amps.iter().map(move |y| x * y)).collect();
        Ok(Self { grid: a.grid, modes: 2, amps })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn hbar(&self) -> HBar {
        self.grid.hbar()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    fn weight(&self) -> f64 {
        self.grid.dx().powi(self.modes as i32)
    }

    /// `sum |a|^2 dx^m`.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.weight()
    }

    pub fn inner(&self, other: &GridState) -> CvResult<C64> {
        self.ensure_same_grid(other)?;
        if self.modes != other.modes {
            return Err(CvError::Dimension { expected: self.modes, found: other.modes });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum::<C64>() * self.weight())
    }

    /// `|<self|other>|^2`; equals 1 for states equal up to a global phase.
    pub fn fidelity(&self, other: &GridState) -> CvResult<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    fn ensure_same_grid(&self, other: &GridState) -> CvResult<()> {
        self.grid.hbar().ensure_same(other.grid.hbar())?;
        if self.grid != other.grid {
            return Err(CvError::Config("states live on different grids".into()));
        }
        Ok(())
    }

    fn check_mode(&self, mode: usize) -> CvResult<()> {
        if mode < self.modes {
            Ok(())
        } else {
            Err(CvError::Domain(format!("mode {mode} out of range for {}-mode state", self.modes)))
        }
    }

    fn warn_on_edges(&self) {
        let n = self.grid.n_points();
        let max = self.amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let edge = (0..self.modes)
            .flat_map(|m| [0, n - 1].into_iter().map(move |k| (m, k)))
            .flat_map(|(m, k)| self.axis_slice_indices(m, k))
            .map(|i| self.amps[i].norm())
            .fold(0.0, f64::max);
        if edge > EDGE_WARN_RATIO * max {
            log::warn!("state has amplitude {edge:.3e} at the grid boundary (max {max:.3e})");
        }
    }

    /// Flat indices whose `mode` coordinate equals `k`.
    fn axis_slice_indices(&self, mode: usize, k: usize) -> Vec<usize> {
        let n = self.grid.n_points();
        match (self.modes, mode) {
            (1, _) => vec![k],
            (_, 0) => (0..n).map(|j| k * n + j).collect(),
            _ => (0..n).map(|i| i * n + k).collect(),
        }
    }

    #[inline]
    fn axis_index(&self, flat: usize, mode: usize) -> usize {
        let n = self.grid.n_points();
        match (self.modes, mode) {
            (1, _) => flat,
            (_, 0) => flat / n,
            _ => flat % n,
        }
    }

    /// Run `f` over every 1-D line along `mode`.
    fn map_axis<F>(&mut self, mode: usize, exec: Exec, f: F)
    where
        F: Fn(&mut [C64]) + Sync + Send,
    {
        let n = self.grid.n_points();
        if self.modes == 1 {
            f(&mut self.amps);
        } else if mode == 1 {
            par::for_each_chunk_mut(exec, &mut self.amps, n, |_, row| f(row));
        } else {
            transpose_in_place(&mut self.amps, n);
            par::for_each_chunk_mut(exec, &mut self.amps, n, |_, row| f(row));
            transpose_in_place(&mut self.amps, n);
        }
    }

    fn mul_diag(&mut self, mode: usize, diag: &[C64]) {
        for flat in 0..self.amps.len() {
            let k = self.axis_index(flat, mode);
            self.amps[flat] *= diag[k];
        }
    }

    fn mul_diag_p(&mut self, mode: usize, diag: &[C64], exec: Exec) {
        let t = Transform::new(&self.grid);
        self.map_axis(mode, exec, |line| {
            t.x_to_p_in_place(line);
            line.iter_mut().zip(diag).for_each(|(v, d)| *v *= d);
            t.p_to_x_in_place(line);
        });
    }

    fn require_self_dual(&self) -> CvResult<()> {
        if self.grid.is_self_dual() {
            Ok(())
        } else {
            Err(CvError::Config(format!(
                "Fourier gate needs a self-dual grid (dx = dp); dx = {}, dp = {}",
                self.grid.dx(),
                self.grid.dp()
            )))
        }
    }

    /// Discrete Fourier gate on `mode`: the x-to-p transform read back on the
    /// x axis. Acts as a quarter-turn rotation `exp(-i pi/2 N)`.
    pub fn fourier_gate(&self, mode: usize) -> CvResult<GridState> {
        self.fourier_gate_with(mode, Exec::default())
    }

    pub fn fourier_gate_with(&self, mode: usize, exec: Exec) -> CvResult<GridState> {
        self.check_mode(mode)?;
        self.require_self_dual()?;
        let t = Transform::new(&self.grid);
        let mut out = self.clone();
        out.map_axis(mode, exec, |line| t.x_to_p_in_place(line));
        Ok(out)
    }

    pub fn inverse_fourier_gate(&self, mode: usize) -> CvResult<GridState> {
        self.check_mode(mode)?;
        self.require_self_dual()?;
        let t = Transform::new(&self.grid);
        let mut out = self.clone();
        out.map_axis(mode, Exec::default(), |line| t.p_to_x_in_place(line));
        Ok(out)
    }

    /// `psi(x) -> psi(-x)` on `mode`.
    pub fn parity(&self, mode: usize) -> CvResult<GridState> {
        self.check_mode(mode)?;
        let mut out = self.clone();
        out.map_axis(mode, Exec::default(), |line| line.reverse());
        Ok(out)
    }

    /// Rotation `exp(-i theta N)` for theta a multiple of pi/2.
    pub fn rotate(&self, mode: usize, theta: f64) -> CvResult<GridState> {
        match quarter_turns(theta) {
            Some(0) => {
                self.check_mode(mode)?;
                Ok(self.clone())
            }
            Some(1) => self.fourier_gate(mode),
            Some(2) => self.parity(mode),
            Some(3) => self.inverse_fourier_gate(mode),
            _ => Err(CvError::Capability(format!(
                "grid backend rotates only by multiples of pi/2, got {theta}"
            ))),
        }
    }

    /// Phase-space displacement moving the means by `(dx_amount, dp_amount)`,
    /// in the symmetric ordering `e^{i dp x / 2 hbar} e^{-i dx p / hbar} e^{i dp x / 2 hbar}`.
    pub fn displace(&self, mode: usize, dx_amount: f64, dp_amount: f64) -> CvResult<GridState> {
        self.check_mode(mode)?;
        let limit = self.grid.extent() / 4.0;
        if !(dx_amount.abs() < limit) {
            return Err(CvError::Wraparound { shift: dx_amount, limit });
        }
        let h = self.grid.hbar().value();
        let kick: Vec<C64> =
            self.grid.xs().iter().map(|x| C64::from_polar(1.0, dp_amount * x / (2.0 * h))).collect();
        let shift: Vec<C64> =
            self.grid.ps().iter().map(|p| C64::from_polar(1.0, -dx_amount * p / h)).collect();
        let mut out = self.clone();
        out.mul_diag(mode, &kick);
        if dx_amount != 0.0 {
            out.mul_diag_p(mode, &shift, Exec::default());
        }
        out.mul_diag(mode, &kick);
        Ok(out)
    }

    /// Position-space chirp `exp(i c x^2 / 2 hbar)`: `p -> p + c x`.
    fn shear_x(&mut self, mode: usize, c: f64) {
        let h = self.grid.hbar().value();
        let d: Vec<C64> =
            self.grid.xs().iter().map(|x| C64::from_polar(1.0, c * x * x / (2.0 * h))).collect();
        self.mul_diag(mode, &d);
    }

    /// Momentum-space chirp `exp(-i b p^2 / 2 hbar)`: `x -> x + b p`.
    fn shear_p(&mut self, mode: usize, b: f64) {
        let h = self.grid.hbar().value();
        let d: Vec<C64> =
            self.grid.ps().iter().map(|p| C64::from_polar(1.0, -b * p * p / (2.0 * h))).collect();
        self.mul_diag_p(mode, &d, Exec::default());
    }

    /// Apply the unitary whose Heisenberg action on `(x, p)` of `mode` is the
    /// unit-determinant matrix `m`, as a product of three chirps (preceded by
    /// a quarter turn when `m` is close to diagonal).
    pub fn apply_symplectic(&self, mode: usize, m: [[f64; 2]; 2]) -> CvResult<GridState> {
        self.check_mode(mode)?;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if (det - 1.0).abs() > 1e-9 {
            return Err(CvError::Domain(format!("matrix is not symplectic (det = {det})")));
        }
        let mut out = self.clone();
        let m = if m[0][1].abs() >= m[0][0].abs() {
            m
        } else {
            // m = (m R(-pi/2)) R(pi/2); R(-pi/2) = [[0, -1], [1, 0]]
            out.quarter_turn(mode)?;
            [[m[0][1], -m[0][0]], [m[1][1], -m[1][0]]]
        };
        let beta = m[0][1];
        let c1 = (m[1][1] - 1.0) / beta;
        let c2 = (m[0][0] - 1.0) / beta;
        out.shear_x(mode, c2);
        out.shear_p(mode, beta);
        out.shear_x(mode, c1);
        Ok(out)
    }

    fn quarter_turn(&mut self, mode: usize) -> CvResult<()> {
        if self.grid.is_self_dual() {
            *self = self.fourier_gate(mode)?;
        } else {
            // [[0, 1], [-1, 0]] via chirps
            self.shear_x(mode, -1.0);
            self.shear_p(mode, 1.0);
            self.shear_x(mode, -1.0);
        }
        Ok(())
    }

    /// Squeezing `S(r e^{i phi})`; for `phi = 0` x shrinks by `e^{-r}`.
    pub fn squeeze(&self, mode: usize, r: f64, phi: f64) -> CvResult<GridState> {
        if r == 0.0 {
            self.check_mode(mode)?;
            return Ok(self.clone());
        }
        self.apply_symplectic(mode, squeeze_matrix(r, phi))
    }

    /// `P psi`: amplitudes outside the window zeroed, no renormalisation.
    /// Returns the projected state and its surviving probability.
    pub fn project(&self, window: &ProjectionWindow) -> CvResult<(GridState, f64)> {
        self.check_mode(window.mode)?;
        window.validate(&self.grid)?;
        let inside = self.window_mask(window);
        let mut out = self.clone();
        for (flat, a) in out.amps.iter_mut().enumerate() {
            if !inside[self.axis_index(flat, window.mode)] {
                *a = C64::new(0.0, 0.0);
            }
        }
        let weight = out.norm_sqr();
        Ok((out, weight))
    }

    /// `(2P - 1) psi`: inside the window unchanged, outside negated.
    pub fn invert_about(&self, window: &ProjectionWindow) -> CvResult<GridState> {
        self.check_mode(window.mode)?;
        window.validate(&self.grid)?;
        let inside = self.window_mask(window);
        let mut out = self.clone();
        for (flat, a) in out.amps.iter_mut().enumerate() {
            if !inside[self.axis_index(flat, window.mode)] {
                *a = -*a;
            }
        }
        Ok(out)
    }

    fn window_mask(&self, w: &ProjectionWindow) -> Vec<bool> {
        let dx = self.grid.dx();
        self.grid.xs().iter().map(|&x| w.contains(x, dx)).collect()
    }

    /// Probability of each bin of `mode`, summed over the other mode.
    pub fn bin_probabilities(&self, mode: usize) -> CvResult<Vec<f64>> {
        self.check_mode(mode)?;
        let mut pmf = vec![0.0; self.grid.n_points()];
        let w = self.weight();
        for (flat, a) in self.amps.iter().enumerate() {
            pmf[self.axis_index(flat, mode)] += a.norm_sqr() * w;
        }
        Ok(pmf)
    }

    fn ensure_normalised(&self) -> CvResult<()> {
        let nrm = self.norm_sqr();
        if (nrm - 1.0).abs() > NORM_TOL {
            Err(CvError::Contract(format!("measurement needs a normalised state, norm^2 = {nrm}")))
        } else {
            Ok(())
        }
    }

    /// One-bin position measurement of `mode`. The post-state keeps both modes,
    /// with the measured one collapsed onto the outcome bin.
    pub fn measure_x(&self, mode: usize, rng: &mut SimRng) -> CvResult<Measurement> {
        self.ensure_normalised()?;
        let pmf = self.bin_probabilities(mode)?;
        let bin = sample_index(&pmf, rng.random::<f64>());
        let mut post = self.clone();
        for (flat, a) in post.amps.iter_mut().enumerate() {
            if self.axis_index(flat, mode) != bin {
                *a = C64::new(0.0, 0.0);
            }
        }
        let nrm = post.norm_sqr();
        post.amps.iter_mut().for_each(|a| *a /= nrm.sqrt());
        Ok(Measurement { bin, x: self.grid.x(bin), post })
    }

    /// Outcome bins of `shots` independent measurements of `mode`. Each shot
    /// draws from its own stream of a child of `rng`.
    pub fn sample_bins(&self, mode: usize, shots: usize, rng: &mut SimRng, exec: Exec) -> CvResult<Vec<usize>> {
        self.ensure_normalised()?;
        let pmf = self.bin_probabilities(mode)?;
        let mut cdf = Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        for p in &pmf {
            acc += p;
            cdf.push(acc);
        }
        let child = rng.split();
        Ok(par::map_range(exec, shots, |i| {
            let u: f64 = child.stream(i as u64).random::<f64>() * acc;
            cdf.partition_point(|&c| c <= u).min(pmf.len() - 1)
        }))
    }

    /// `A psi` as raw amplitudes.
    pub fn apply_operator(&self, op: &QuadratureOperator) -> CvResult<Vec<C64>> {
        self.check_mode(op.mode)?;
        let xs = self.grid.xs();
        let ps = self.grid.ps();
        let to_c = |v: &[f64]| v.iter().map(|&r| C64::new(r, 0.0)).collect::<Vec<_>>();
        let mut out = self.clone();
        match &op.kind {
            QuadKind::X => out.mul_diag(op.mode, &to_c(&xs)),
            QuadKind::P => out.mul_diag_p(op.mode, &to_c(&ps), Exec::default()),
            QuadKind::DiagX(d) | QuadKind::DiagP(d) => {
                check_len(self.grid.n_points(), d.len())?;
                if d.iter().any(|v| v.im.abs() > 1e-12 * (1.0 + v.re.abs())) {
                    return Err(CvError::Contract("custom diagonal operator is not Hermitian".into()));
                }
                if matches!(op.kind, QuadKind::DiagX(_)) {
                    out.mul_diag(op.mode, d);
                } else {
                    out.mul_diag_p(op.mode, d, Exec::default());
                }
            }
            QuadKind::Linear { x, p } => {
                let ax = self.apply_operator(&QuadratureOperator::x(op.mode))?;
                let bp = self.apply_operator(&QuadratureOperator::p(op.mode))?;
                return Ok(ax.iter().zip(&bp).map(|(u, v)| u * *x + v * *p).collect());
            }
        }
        Ok(out.amps)
    }

    fn braket(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(u, v)| u.conj() * v).sum::<C64>() * self.weight()
    }

    /// `<psi|A|psi>` for Hermitian `A`.
    pub fn expectation(&self, op: &QuadratureOperator) -> CvResult<f64> {
        let a_psi = self.apply_operator(op)?;
        let v = self.braket(&self.amps, &a_psi);
        debug_assert!(v.im.abs() < 1e-8 * (1.0 + v.re.abs()), "imaginary residual {}", v.im);
        Ok(v.re)
    }

    /// `(dx, dp, dx * dp)` for `mode`.
    pub fn uncertainty_product(&self, mode: usize) -> CvResult<(f64, f64, f64)> {
        let sx = self.std_dev(&QuadratureOperator::x(mode))?;
        let sp = self.std_dev(&QuadratureOperator::p(mode))?;
        Ok((sx, sp, sx * sp))
    }

    fn std_dev(&self, op: &QuadratureOperator) -> CvResult<f64> {
        let a_psi = self.apply_operator(op)?;
        let mean = self.braket(&self.amps, &a_psi).re;
        let second = self.braket(&a_psi, &a_psi).re;
        Ok((second - mean * mean).max(0.0).sqrt())
    }

    /// Symmetrised covariance `Re<x p> - <x><p>` of `mode`.
    pub fn covariance_xp(&self, mode: usize) -> CvResult<f64> {
        let x_psi = self.apply_operator(&QuadratureOperator::x(mode))?;
        let p_psi = self.apply_operator(&QuadratureOperator::p(mode))?;
        let mx = self.braket(&self.amps, &x_psi).re;
        let mp = self.braket(&self.amps, &p_psi).re;
        Ok(self.braket(&x_psi, &p_psi).re - mx * mp)
    }

    /// `(dA dB, |<[A, B]>| / 2, holds)` for Hermitian `A`, `B`.
    pub fn generalized_uncertainty_check(
        &self,
        a: &QuadratureOperator,
        b: &QuadratureOperator,
    ) -> CvResult<(f64, f64, bool)> {
        let da = self.std_dev(a)?;
        let db = self.std_dev(b)?;
        let a_psi = self.apply_operator(a)?;
        let b_psi = self.apply_operator(b)?;
        // <[A,B]> = <A psi|B psi> - <B psi|A psi> = 2i Im<A psi|B psi>
        let rhs = self.braket(&a_psi, &b_psi).im.abs();
        let lhs = da * db;
        Ok((lhs, rhs, lhs >= rhs * (1.0 - 1e-6)))
    }

    pub fn snapshot(&self) -> GridSnapshot {
        GridSnapshot { grid: (&self.grid).into(), modes: self.modes, amplitudes: self.amps.clone() }
    }

    pub fn from_snapshot(s: &GridSnapshot) -> CvResult<Self> {
        let grid = s.grid.to_grid()?;
        Self::from_amplitudes(grid, s.modes, s.amplitudes.clone())
    }
}

/// Max over `|x| < L/4` of `|(x p - p x) psi - i hbar psi|` for a single-mode
/// test state.
pub fn commutator_residual(grid: &Grid, test_state: &GridState) -> CvResult<f64> {
    if test_state.modes != 1 {
        return Err(CvError::Domain("commutator residual expects a single-mode state".into()));
    }
    if test_state.grid != *grid {
        return Err(CvError::Config("test state lives on a different grid".into()));
    }
    let x_op = QuadratureOperator::x(0);
    let p_op = QuadratureOperator::p(0);
    let p_psi = test_state.apply_operator(&p_op)?;
    let x_p_psi = GridState { amps: p_psi, ..test_state.clone() }.apply_operator(&x_op)?;
    let x_psi = test_state.apply_operator(&x_op)?;
    let p_x_psi = GridState { amps: x_psi, ..test_state.clone() }.apply_operator(&p_op)?;
    let ih = C64::new(0.0, grid.hbar().value());
    let quarter = grid.extent() / 4.0;
    Ok((0..grid.n_points())
        .filter(|&k| grid.x(k).abs() < quarter)
        .map(|k| (x_p_psi[k] - p_x_psi[k] - ih * test_state.amps[k]).norm())
        .fold(0.0, f64::max))
}

/// Heisenberg matrix of `S(r e^{i phi})` on `(x, p)`.
pub fn squeeze_matrix(r: f64, phi: f64) -> [[f64; 2]; 2] {
    let (ch, sh) = (r.cosh(), r.sinh());
    let (c, s) = (phi.cos(), phi.sin());
    [[ch - sh * c, -sh * s], [-sh * s, ch + sh * c]]
}

/// `Some(k)` with `theta = k pi/2 (mod 2 pi)`, `k in 0..4`, when theta is a
/// quarter turn to within 1e-12.
pub fn quarter_turns(theta: f64) -> Option<u8> {
    let t = theta / FRAC_PI_2;
    let k = t.round();
    if (t - k).abs() < 1e-12 * (1.0 + t.abs()) {
        Some((k as i64).rem_euclid(4) as u8)
    } else {
        None
    }
}

/// In-place square transpose, in cache-sized tiles.
fn transpose_in_place(a: &mut [C64], n: usize) {
    const TILE: usize = 32;
    for i0 in (0..n).step_by(TILE) {
        for j0 in (i0..n).step_by(TILE) {
            for i in i0..(i0 + TILE).min(n) {
                for j in j0.max(i + 1)..(j0 + TILE).min(n) {
                    a.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

fn sample_index(pmf: &[f64], u: f64) -> usize {
    let total: f64 = pmf.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    for (k, p) in pmf.iter().enumerate() {
        acc += p;
        if target < acc {
            return k;
        }
    }
    pmf.iter().rposition(|&p| p > 0.0).unwrap_or(pmf.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::hermite_function;

    const H: f64 = 2.0;

    fn hb() -> HBar {
        HBar::new(H).unwrap()
    }

    fn wide_grid() -> Grid {
        Grid::new(512, 20.0 * H.sqrt(), hb()).unwrap()
    }

    fn sd_grid() -> Grid {
        Grid::self_dual(512, hb()).unwrap()
    }

    fn max_diff(a: &GridState, b: &GridState) -> f64 {
        a.amps.iter().zip(&b.amps).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max)
    }

    fn means(s: &GridState, mode: usize) -> (f64, f64) {
        (
            s.expectation(&QuadratureOperator::x(mode)).unwrap(),
            s.expectation(&QuadratureOperator::p(mode)).unwrap(),
        )
    }

    #[test]
    fn ground_state_moments() {
        let s = GridState::vacuum(wide_grid(), 1).unwrap();
        let (mx, mp) = means(&s, 0);
        assert!(mx.abs() < 1e-12 && mp.abs() < 1e-10);
        let x2 = s
            .expectation(&QuadratureOperator { kind: QuadKind::DiagX(s.grid.xs().iter().map(|x| C64::new(x * x, 0.0)).collect()), mode: 0 })
            .unwrap();
        assert!((x2 - H / 2.0).abs() < 1e-6);
        let (_, _, prod) = s.uncertainty_product(0).unwrap();
        assert!((prod - H / 2.0).abs() < 1e-6);
    }

    #[test]
    fn squeezed_factor_two() {
        let s = GridState::gaussian(wide_grid(), 0.0, 0.0, 2.0).unwrap();
        let (sx, sp, prod) = s.uncertainty_product(0).unwrap();
        let v = (H / 2.0).sqrt();
        assert!((sx - v / 2.0).abs() < 1e-6);
        assert!((sp - 2.0 * v).abs() < 1e-6);
        assert!((prod - H / 2.0).abs() < 1e-6);
    }

    #[test]
    fn first_excited_product() {
        let g = wide_grid();
        let s = GridState::from_amplitudes(g, 1, hermite_function(1, &g).unwrap()).unwrap();
        let (_, _, prod) = s.uncertainty_product(0).unwrap();
        assert!((prod - 1.5 * H).abs() < 1e-6);
    }

    #[test]
    fn degenerate_and_delta() {
        let g = wide_grid();
        assert!(matches!(GridState::from_function(g, 1, |_| C64::new(0.0, 0.0)), Err(CvError::Degenerate)));
        let d = GridState::grid_delta(g, 100).unwrap();
        let mut rng = SimRng::seed_from(1);
        for _ in 0..20 {
            assert_eq!(d.measure_x(0, &mut rng).unwrap().bin, 100);
        }
    }

    #[test]
    fn fourier_properties() {
        let g = sd_grid();
        let vac = GridState::vacuum(g, 1).unwrap();
        let f = vac.fourier_gate(0).unwrap();
        assert!(max_diff(&f, &vac) < 1e-9);

        let shifted = GridState::gaussian(g, 1.3, -0.4, 1.0).unwrap();
        let f2 = shifted.fourier_gate(0).unwrap().fourier_gate(0).unwrap();
        assert!(max_diff(&f2, &shifted.parity(0).unwrap()) < 1e-9);
        let f4 = f2.fourier_gate(0).unwrap().fourier_gate(0).unwrap();
        assert!(max_diff(&f4, &shifted) < 1e-9);
        assert!((f4.norm_sqr() - 1.0).abs() < 1e-12);

        // quarter turn: (x, p) -> (p, -x)
        let (mx, mp) = means(&shifted.fourier_gate(0).unwrap(), 0);
        assert!((mx + 0.4).abs() < 1e-8 && (mp + 1.3).abs() < 1e-8);

        let sq = GridState::gaussian(g, 0.0, 0.0, 2.0).unwrap();
        let (sx0, _, _) = sq.uncertainty_product(0).unwrap();
        let (sx1, _, _) = sq.fourier_gate(0).unwrap().uncertainty_product(0).unwrap();
        assert!((sx1 / sx0 - 4.0).abs() < 1e-6);

        assert!(matches!(GridState::vacuum(wide_grid(), 1).unwrap().fourier_gate(0), Err(CvError::Config(_))));
    }

    #[test]
    fn displacement() {
        let g = wide_grid();
        let vac = GridState::vacuum(g, 1).unwrap();
        let d = vac.displace(0, 1.0, 0.0).unwrap();
        let (mx, mp) = means(&d, 0);
        assert!((mx - 1.0).abs() < 1e-8 && mp.abs() < 1e-8);

        let k = vac.displace(0, 0.0, 2.0).unwrap();
        let (_, mp) = means(&k, 0);
        assert!((mp - 2.0).abs() < 1e-8);
        for (a, b) in k.amps.iter().zip(&vac.amps) {
            assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-14);
        }

        let back = vac.displace(0, 0.7, -1.1).unwrap().displace(0, -0.7, 1.1).unwrap();
        assert!(back.fidelity(&vac).unwrap() > 1.0 - 1e-9);
        assert!(max_diff(&back, &vac) < 1e-10);

        assert!(matches!(vac.displace(0, g.extent() / 3.0, 0.0), Err(CvError::Wraparound { .. })));
    }

    #[test]
    fn squeeze_and_rotate_match_heisenberg_matrices() {
        let g = sd_grid();
        let s = GridState::gaussian(g, 0.8, 0.5, 1.0).unwrap();
        for (r, phi) in [(0.5, 0.0), (0.3, 1.1), (-0.4, 2.0)] {
            let out = s.squeeze(0, r, phi).unwrap();
            let m = squeeze_matrix(r, phi);
            let (mx, mp) = means(&out, 0);
            assert!((mx - (m[0][0] * 0.8 + m[0][1] * 0.5)).abs() < 1e-8);
            assert!((mp - (m[1][0] * 0.8 + m[1][1] * 0.5)).abs() < 1e-8);
            assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        }
        let out = GridState::vacuum(g, 1).unwrap().squeeze(0, 2f64.ln(), 0.0).unwrap();
        let (sx, _, _) = out.uncertainty_product(0).unwrap();
        assert!((sx - (H / 2.0).sqrt() / 2.0).abs() < 1e-8);

        // non-self-dual grids fall back to chirped quarter turns
        let wg = wide_grid();
        let out = GridState::gaussian(wg, 0.8, 0.5, 1.0).unwrap().squeeze(0, 0.4, 0.0).unwrap();
        let (mx, mp) = means(&out, 0);
        assert!((mx - 0.8 * (-0.4f64).exp()).abs() < 1e-8 && (mp - 0.5 * 0.4f64.exp()).abs() < 1e-8);

        assert!(matches!(s.rotate(0, 0.3), Err(CvError::Capability(_))));
        assert!(max_diff(&s.rotate(0, -FRAC_PI_2).unwrap(), &s.inverse_fourier_gate(0).unwrap()) < 1e-15);
    }

    #[test]
    fn projection_is_idempotent() {
        let g = wide_grid();
        let s = GridState::gaussian(g, 0.3, 1.0, 0.7).unwrap();
        let w = ProjectionWindow::new(0.5, 1.3, 0);
        let (once, w1) = s.project(&w).unwrap();
        let (twice, w2) = once.project(&w).unwrap();
        assert!(max_diff(&once, &twice) < 1e-12);
        assert!((w1 - w2).abs() < 1e-14);

        let (full, wf) = s.project(&ProjectionWindow::full(&g, 0)).unwrap();
        assert!(max_diff(&full, &s) == 0.0 && (wf - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_weight_one_sigma() {
        // L = 16 puts the window edges at +-sigma = +-1 on bin boundaries
        let g = Grid::new(512, 16.0, hb()).unwrap();
        let s = GridState::vacuum(g, 1).unwrap();
        let (sx, _, _) = s.uncertainty_product(0).unwrap();
        assert!((sx - 1.0).abs() < 1e-12);
        let (_, weight) = s.project(&ProjectionWindow::new(0.0, 2.0 * sx, 0)).unwrap();
        // erf(1/sqrt 2)
        assert!((weight - 0.682_689_492_137_085_9).abs() < 1e-4, "{weight}");
    }

    #[test]
    fn inversion_properties() {
        let g = wide_grid();
        let s = GridState::gaussian(g, -0.4, 0.2, 1.2).unwrap();
        let w = ProjectionWindow::new(0.0, 1.0, 0);
        let once = s.invert_about(&w).unwrap();
        assert!((once.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(max_diff(&once.invert_about(&w).unwrap(), &s) < 1e-12);
        assert!(max_diff(&s.invert_about(&ProjectionWindow::full(&g, 0)).unwrap(), &s) == 0.0);
        let far = ProjectionWindow::new(12.0, 1.0, 0);
        let flipped = s.invert_about(&far).unwrap();
        let neg = GridState { amps: s.amps.iter().map(|a| -a).collect(), ..s.clone() };
        assert!(max_diff(&flipped, &neg) < 1e-12);
        assert!(s.project(&ProjectionWindow::new(0.0, g.dx() / 2.0, 0)).is_err());
        assert!(s.project(&ProjectionWindow::new(g.extent() / 2.0, 1.0, 0)).is_err());
    }

    #[test]
    fn entangled_pair_correlation() {
        let g = wide_grid();
        let c = 5.0 * g.dx();
        let pair = GridState::entangled_pair(g, |x| C64::new((-x * x / (2.0 * H)).exp(), 0.0), c).unwrap();
        let mut rng = SimRng::seed_from(4);
        for _ in 0..30 {
            let m = pair.measure_x(0, &mut rng).unwrap();
            let second = m.post.bin_probabilities(1).unwrap();
            let peak = (0..g.n_points()).max_by(|&a, &b| second[a].total_cmp(&second[b])).unwrap();
            assert_eq!(peak, m.bin - 5);
            assert!((second[peak] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn entangled_pair_uniform_window_is_uniform_diagonal() {
        let g = Grid::new(64, 16.0, hb()).unwrap();
        let pair = GridState::entangled_pair(g, |x| C64::new(if x.abs() < 4.0 { 1.0 } else { 0.0 }, 0.0), 0.0).unwrap();
        let w = g.dx() * g.dx();
        let support: Vec<usize> = (0..64).filter(|&k| g.x(k).abs() < 4.0).collect();
        let expect = 1.0 / support.len() as f64;
        for i in 0..64 {
            for j in 0..64 {
                let p = pair.amps[i * 64 + j].norm_sqr() * w;
                let want = if i == j && support.contains(&i) { expect } else { 0.0 };
                assert!((p - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn histogram_converges() {
        let g = Grid::new(128, 20.0, hb()).unwrap();
        let s = GridState::vacuum(g, 1).unwrap();
        let pmf = s.bin_probabilities(0).unwrap();
        let mut rng = SimRng::seed_from(42);
        let shots = 100_000;
        let bins = s.sample_bins(0, shots, &mut rng, Exec::default()).unwrap();
        let mut hist = vec![0.0; 128];
        bins.iter().for_each(|&b| hist[b] += 1.0 / shots as f64);
        let tv: f64 = hist.iter().zip(&pmf).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        assert!(tv < 0.02, "{tv}");
    }

    #[test]
    fn measurement_requires_normalised_input() {
        let g = wide_grid();
        let s = GridState::vacuum(g, 1).unwrap();
        let (half, _) = s.project(&ProjectionWindow::new(1.0, 2.0, 0)).unwrap();
        assert!(matches!(half.measure_x(0, &mut SimRng::seed_from(0)), Err(CvError::Contract(_))));
    }

    #[test]
    fn real_wavefunction_has_zero_momentum() {
        let g = wide_grid();
        let s = GridState::from_function(g, 1, |x| C64::new((1.0 + 0.3 * x) * (-x * x / 3.0).exp(), 0.0)).unwrap();
        assert!(s.expectation(&QuadratureOperator::p(0)).unwrap().abs() < 1e-10);
    }

    #[test]
    fn generalized_uncertainty() {
        let g = wide_grid();
        let s = GridState::gaussian(g, 0.5, -0.3, 1.4).unwrap();
        let (lhs, rhs, holds) = s.generalized_uncertainty_check(&QuadratureOperator::x(0), &QuadratureOperator::p(0)).unwrap();
        assert!((rhs - H / 2.0).abs() < 1e-6 && holds && lhs >= rhs);
        let (_, rhs, holds) = s.generalized_uncertainty_check(&QuadratureOperator::x(0), &QuadratureOperator::x(0)).unwrap();
        assert!(rhs.abs() < 1e-12 && holds);
        let bad = QuadratureOperator { kind: QuadKind::DiagX(vec![C64::new(0.0, 1.0); g.n_points()]), mode: 0 };
        assert!(matches!(s.expectation(&bad), Err(CvError::Contract(_))));
    }

    #[test]
    fn commutator_residual_small() {
        let g = wide_grid();
        let vac = GridState::vacuum(g, 1).unwrap();
        assert!(commutator_residual(&g, &vac).unwrap() < 1e-6);
        let disp = vac.displace(0, 1.5, -0.8).unwrap();
        assert!(commutator_residual(&g, &disp).unwrap() < 1e-6);
        let h5 = GridState::from_amplitudes(g, 1, hermite_function(5, &g).unwrap()).unwrap();
        assert!(commutator_residual(&g, &h5).unwrap() < 1e-5);
    }

    #[test]
    fn two_mode_ops_act_on_one_axis() {
        let g = sd_grid();
        let a = GridState::gaussian(g, 0.5, 0.0, 1.0).unwrap();
        let b = GridState::gaussian(g, -1.0, 0.3, 1.5).unwrap();
        let ab = GridState::tensor(&a, &b).unwrap();
        let out = ab.fourier_gate(0).unwrap().displace(1, 0.4, 0.0).unwrap();
        let (mx0, mp0) = means(&out, 0);
        let (mx1, mp1) = means(&out, 1);
        assert!((mx0 - 0.0).abs() < 1e-8 && (mp0 + 0.5).abs() < 1e-8);
        assert!((mx1 + 0.6).abs() < 1e-8 && (mp1 - 0.3).abs() < 1e-8);
        let seq = ab.fourier_gate_with(1, Exec::Seq).unwrap();
        let par = ab.fourier_gate_with(1, Exec::Par).unwrap();
        assert_eq!(seq.amps, par.amps);
    }

    #[test]
    fn snapshot_round_trip() {
        let g = Grid::new(16, 6.0, hb()).unwrap();
        let s = GridState::gaussian(g, 0.2, 0.1, 1.0).unwrap();
        let json = serde_json::to_string(&s.snapshot()).unwrap();
        assert!(json.contains("\"L\":6.0") && json.contains("\"amplitudes\":[["));
        let back = GridState::from_snapshot(&serde_json::from_str(&json).unwrap()).unwrap();
        assert!(max_diff(&back, &s) < 1e-15);
    }
}
