//! Truncated number-basis backend.
//!
//! Operators are dense `D x D` matrices on `|0> .. |D-1>`. Gates are built by
//! exponentiating their generators, which are exactly anti-Hermitian after
//! truncation, so the gate matrices are unitary to rounding. What truncation
//! does break is the algebra at the top level, so every gate application
//! checks how much population reached `|D-1>`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, CvError, CvResult};
use crate::gridstate::GridState;
use crate::numerics::{hermite_functions, matrix_exp, ComplexMatrix, Grid, HBar};

pub const DEFAULT_CUTOFF: usize = 40;
pub const MAX_CUTOFF: usize = 64;
pub const LEAKAGE_WARN: f64 = 1e-6;
pub const LEAKAGE_ERROR: f64 = 1e-3;
const MAX_MIXER_DIM: usize = 4096;
const MAX_SQUEEZE_MAG: f64 = 2.0;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn check_cutoff(cutoff: usize) -> CvResult<()> {
    if !(2..=MAX_CUTOFF).contains(&cutoff) {
        return Err(CvError::Domain(format!("cutoff must lie in 2..={MAX_CUTOFF}, got {cutoff}")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct LadderOps {
    pub a: ComplexMatrix,
    pub a_dag: ComplexMatrix,
    pub n_op: ComplexMatrix,
}

pub fn ladder_ops(cutoff: usize) -> CvResult<LadderOps> {
    check_cutoff(cutoff)?;
    let a = ComplexMatrix::from_fn(cutoff, cutoff, |i, j| if j == i + 1 { c((j as f64).sqrt()) } else { c(0.0) });
    let a_dag = a.adjoint();
    // a^dag a, with the diagonal written exactly instead of as sqrt(n)^2
    let n_op = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_fn(cutoff, |n, _| c(n as f64)));
    Ok(LadderOps { a, a_dag, n_op })
}

/// `x = sqrt(hbar/2)(a + a^dag)`, `p = -i sqrt(hbar/2)(a - a^dag)`.
pub fn quadrature_ops(cutoff: usize, hbar: HBar) -> CvResult<(ComplexMatrix, ComplexMatrix)> {
    let l = ladder_ops(cutoff)?;
    let s = (hbar.value() / 2.0).sqrt();
    let x = (&l.a + &l.a_dag) * c(s);
    let p = (&l.a - &l.a_dag) * C64::new(0.0, -s);
    Ok((x, p))
}

/// `H = p^2/2 + x^2/2` from the truncated quadratures.
pub fn hamiltonian(cutoff: usize, hbar: HBar) -> CvResult<ComplexMatrix> {
    let (x, p) = quadrature_ops(cutoff, hbar)?;
    Ok((&p * &p + &x * &x) * c(0.5))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FockGate {
    /// `exp(-i theta N)`
    Phase(f64),
    /// `exp(alpha a^dag - alpha* a)`
    Displace(C64),
    /// `exp((zeta* a^2 - zeta a^dag^2) / 2)`
    Squeeze(C64),
}

pub fn gate_matrix(kind: FockGate, cutoff: usize) -> CvResult<ComplexMatrix> {
    let l = ladder_ops(cutoff)?;
    match kind {
        FockGate::Phase(theta) => Ok(ComplexMatrix::from_diagonal(&nalgebra::DVector::from_fn(cutoff, |n, _| {
            C64::from_polar(1.0, -theta * n as f64)
        }))),
        FockGate::Displace(alpha) => {
            let bound = (cutoff as f64).sqrt() / 3.0;
            if alpha.norm() > bound {
                return Err(CvError::Truncation(format!(
                    "|alpha| = {} exceeds {bound:.4} for cutoff {cutoff}",
                    alpha.norm()
                )));
            }
            matrix_exp(&(&l.a_dag * alpha - &l.a * alpha.conj()))
        }
        FockGate::Squeeze(zeta) => {
            if zeta.norm() > MAX_SQUEEZE_MAG {
                return Err(CvError::Truncation(format!(
                    "|zeta| = {} exceeds {MAX_SQUEEZE_MAG}",
                    zeta.norm()
                )));
            }
            let a2 = &l.a * &l.a;
            let ad2 = &l.a_dag * &l.a_dag;
            matrix_exp(&((a2 * zeta.conj() - ad2 * zeta) * c(0.5)))
        }
    }
}

/// Number-conserving generator blocks of the beamsplitter. Sector `N`
/// spans `|k, N-k>` for the `k` that keep both levels below the cutoff.
fn mixer_blocks(theta: f64, phi: f64, cutoff: usize) -> CvResult<Vec<(Vec<usize>, ComplexMatrix)>> {
    let d = cutoff;
    let fwd = C64::from_polar(theta, -phi);
    let mut blocks = Vec::with_capacity(2 * d - 1);
    for total in 0..(2 * d - 1) {
        let ks: Vec<usize> = (0..d).filter(|&k| total >= k && total - k < d).collect();
        let m = ks.len();
        // a_1 a_2^dag |k, N-k> = sqrt(k (N-k+1)) |k-1, N-k+1>
        let mut g = ComplexMatrix::zeros(m, m);
        for (col, &k) in ks.iter().enumerate() {
            if k == 0 {
                continue;
            }
            if let Some(row) = ks.iter().position(|&j| j == k - 1) {
                let amp = ((k * (total - k + 1)) as f64).sqrt();
                g[(row, col)] += fwd * amp;
                g[(col, row)] -= fwd.conj() * amp;
            }
        }
        let flat = ks.iter().map(|&k| k * d + (total - k)).collect();
        blocks.push((flat, matrix_exp(&g)?));
    }
    Ok(blocks)
}

/// `exp(theta (e^{-i phi} a_1 a_2^dag - e^{i phi} a_1^dag a_2))` on the
/// `D^2`-dimensional two-mode space, index `n_1 D + n_2`.
pub fn mixer_matrix(theta: f64, phi: f64, cutoff: usize) -> CvResult<ComplexMatrix> {
    check_cutoff(cutoff)?;
    let dim = cutoff * cutoff;
    if dim > MAX_MIXER_DIM {
        return Err(CvError::Resource(format!("mixer dimension {dim} exceeds {MAX_MIXER_DIM}")));
    }
    let mut u = ComplexMatrix::zeros(dim, dim);
    for (idx, block) in mixer_blocks(theta, phi, cutoff)? {
        for (i, &r) in idx.iter().enumerate() {
            for (j, &cc) in idx.iter().enumerate() {
                u[(r, cc)] = block[(i, j)];
            }
        }
    }
    Ok(u)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    modes: usize,
    cutoff: usize,
    amps: Vec<C64>,
    hbar: HBar,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FockSnapshot {
    pub cutoff: usize,
    pub modes: usize,
    pub hbar: f64,
    pub amplitudes: Vec<C64>,
}

/// Quadrature statistics of one mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub std_x: f64,
    pub std_p: f64,
}

impl FockState {
    pub fn from_amplitudes(modes: usize, cutoff: usize, amps: Vec<C64>, hbar: HBar) -> CvResult<Self> {
        check_cutoff(cutoff)?;
        if !(1..=2).contains(&modes) {
            return Err(CvError::Domain(format!("Fock backend supports 1 or 2 modes, got {modes}")));
        }
        check_len(cutoff.pow(modes as u32), amps.len())?;
        let nrm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(CvError::Degenerate);
        }
        let s = 1.0 / nrm.sqrt();
        Ok(Self { modes, cutoff, amps: amps.into_iter().map(|a| a * s).collect(), hbar })
    }

    pub fn vacuum(modes: usize, cutoff: usize, hbar: HBar) -> CvResult<Self> {
        let mut amps = vec![c(0.0); cutoff.pow(modes as u32)];
        if let Some(a) = amps.first_mut() {
            *a = c(1.0);
        }
        Self::from_amplitudes(modes, cutoff, amps, hbar)
    }

    pub fn number_state(n: usize, cutoff: usize, hbar: HBar) -> CvResult<Self> {
        if n >= cutoff {
            return Err(CvError::Domain(format!("level {n} not below cutoff {cutoff}")));
        }
        let mut amps = vec![c(0.0); cutoff];
        amps[n] = c(1.0);
        Self::from_amplitudes(1, cutoff, amps, hbar)
    }

    /// `e^{-|alpha|^2/2} alpha^n / sqrt(n!)`, renormalised on the truncated basis.
    pub fn coherent(alpha: C64, cutoff: usize, hbar: HBar) -> CvResult<Self> {
        check_cutoff(cutoff)?;
        if alpha.norm_sqr() >= cutoff as f64 / 4.0 {
            return Err(CvError::Truncation(format!(
                "|alpha|^2 = {} must stay below cutoff/4 = {}",
                alpha.norm_sqr(),
                cutoff as f64 / 4.0
            )));
        }
        let mut amps = Vec::with_capacity(cutoff);
        let mut cur = c((-alpha.norm_sqr() / 2.0).exp());
        for n in 0..cutoff {
            amps.push(cur);
            cur = cur * alpha / ((n + 1) as f64).sqrt();
        }
        Self::from_amplitudes(1, cutoff, amps, hbar)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn hbar(&self) -> HBar {
        self.hbar
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_mode(&self, mode: usize) -> CvResult<()> {
        if mode < self.modes {
            Ok(())
        } else {
            Err(CvError::Domain(format!("mode {mode} out of range for {}-mode state", self.modes)))
        }
    }

    fn level(&self, flat: usize, mode: usize) -> usize {
        match (self.modes, mode) {
            (1, _) => flat,
            (_, 0) => flat / self.cutoff,
            _ => flat % self.cutoff,
        }
    }

    /// Largest population on the top level of any mode.
    pub fn leakage(&self) -> f64 {
        (0..self.modes)
            .map(|m| {
                self.amps
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| self.level(*i, m) == self.cutoff - 1)
                    .map(|(_, a)| a.norm_sqr())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    fn checked(self) -> CvResult<Self> {
        let leak = self.leakage();
        if leak > LEAKAGE_ERROR {
            return Err(CvError::Truncation(format!(
                "top-level population {leak:.3e} exceeds {LEAKAGE_ERROR:e}; raise the cutoff"
            )));
        }
        if leak > LEAKAGE_WARN {
            log::warn!("top-level population {leak:.3e} exceeds {LEAKAGE_WARN:e}");
        }
        Ok(self)
    }

    /// `M` acting on one mode, without the leakage check.
    fn map_mode(&self, mode: usize, m: &ComplexMatrix) -> CvResult<Vec<C64>> {
        self.check_mode(mode)?;
        check_len(self.cutoff, m.nrows())?;
        check_len(self.cutoff, m.ncols())?;
        let d = self.cutoff;
        let mut out = vec![c(0.0); self.amps.len()];
        for (flat, o) in out.iter_mut().enumerate() {
            let row = self.level(flat, mode);
            let base = match (self.modes, mode) {
                (1, _) => 0,
                (_, 0) => flat % d,
                _ => (flat / d) * d,
            };
            let stride = if self.modes == 2 && mode == 0 { d } else { 1 };
            *o = (0..d).map(|k| m[(row, k)] * self.amps[base + k * stride]).sum();
        }
        Ok(out)
    }

    pub fn apply_matrix(&self, mode: usize, m: &ComplexMatrix) -> CvResult<FockState> {
        let amps = self.map_mode(mode, m)?;
        Self { amps, ..self.clone() }.checked()
    }

    pub fn apply_gate(&self, mode: usize, gate: FockGate) -> CvResult<FockState> {
        self.apply_matrix(mode, &gate_matrix(gate, self.cutoff)?)
    }

    /// Beamsplitter on a two-mode state, applied sector by sector.
    pub fn apply_mixer(&self, theta: f64, phi: f64) -> CvResult<FockState> {
        if self.modes != 2 {
            return Err(CvError::Contract("mixer needs a two-mode state".into()));
        }
        let mut amps = vec![c(0.0); self.amps.len()];
        for (idx, block) in mixer_blocks(theta, phi, self.cutoff)? {
            for (i, &r) in idx.iter().enumerate() {
                amps[r] = idx.iter().enumerate().map(|(j, &cc)| block[(i, j)] * self.amps[cc]).sum();
            }
        }
        Self { amps, ..self.clone() }.checked()
    }

    /// Swap the two modes' roles (relabelling, not a physical gate).
    pub fn swap_modes(&self) -> FockState {
        if self.modes != 2 {
            return self.clone();
        }
        let d = self.cutoff;
        let amps = (0..d * d).map(|f| self.amps[(f % d) * d + f / d]).collect();
        Self { amps, ..self.clone() }
    }

    fn braket(&self, u: &[C64], v: &[C64]) -> C64 {
        u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
    }

    /// `<psi|M|psi>` for `M` acting on `mode`.
    pub fn expectation(&self, mode: usize, m: &ComplexMatrix) -> CvResult<C64> {
        Ok(self.braket(&self.amps, &self.map_mode(mode, m)?))
    }

    pub fn moments(&self, mode: usize) -> CvResult<Moments> {
        let (x, p) = quadrature_ops(self.cutoff, self.hbar)?;
        let xv = self.map_mode(mode, &x)?;
        let pv = self.map_mode(mode, &p)?;
        let mean_x = self.braket(&self.amps, &xv).re;
        let mean_p = self.braket(&self.amps, &pv).re;
        let std_x = (self.braket(&xv, &xv).re - mean_x * mean_x).max(0.0).sqrt();
        let std_p = (self.braket(&pv, &pv).re - mean_p * mean_p).max(0.0).sqrt();
        Ok(Moments { mean_x, mean_p, std_x, std_p })
    }

    /// Hermite synthesis `psi(x) = sum_n c_n psi_n(x)` of a single-mode state.
    pub fn to_grid(&self, grid: Grid) -> CvResult<GridState> {
        if self.modes != 1 {
            return Err(CvError::Domain("to_grid expects a single-mode state".into()));
        }
        self.hbar.ensure_same(grid.hbar())?;
        let reach = (2.0 * self.hbar.value() * self.cutoff as f64).sqrt();
        if grid.extent() < 2.0 * reach || grid.p_max() < reach {
            return Err(CvError::Config(format!(
                "grid (L = {}, p_max = {}) does not resolve cutoff {}; need L >= {} and p_max >= {reach}",
                grid.extent(),
                grid.p_max(),
                self.cutoff,
                2.0 * reach
            )));
        }
        let rows = hermite_functions(self.cutoff - 1, &grid)?;
        let mut psi = vec![c(0.0); grid.n_points()];
        for (cn, row) in self.amps.iter().zip(&rows) {
            if *cn != c(0.0) {
                psi.iter_mut().zip(row).for_each(|(p, h)| *p += cn * h);
            }
        }
        let s = GridState::from_amplitudes(grid, 1, psi)?;
        Ok(s)
    }

    pub fn snapshot(&self) -> FockSnapshot {
        FockSnapshot { cutoff: self.cutoff, modes: self.modes, hbar: self.hbar.value(), amplitudes: self.amps.clone() }
    }

    pub fn from_snapshot(s: &FockSnapshot) -> CvResult<Self> {
        Self::from_amplitudes(s.modes, s.cutoff, s.amplitudes.clone(), HBar::new(s.hbar)?)
    }
}

/// `max |[A, B] - k I|` over the top-left `(D-1) x (D-1)` block.
pub fn interior_commutator_error(a: &ComplexMatrix, b: &ComplexMatrix, k: C64) -> f64 {
    let comm = a * b - b * a;
    let d = comm.nrows() - 1;
    let mut err: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { k } else { c(0.0) };
            err = err.max((comm[(i, j)] - want).norm());
        }
    }
    err
}

/// `max |U^dag U - I|` over the top-left `(D-1) x (D-1)` block.
pub fn interior_unitarity_error(u: &DMatrix<C64>) -> f64 {
    let g = u.adjoint() * u;
    let d = g.nrows() - 1;
    let mut err: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { 1.0 } else { 0.0 };
            err = err.max((g[(i, j)] - c(want)).norm());
        }
    }
    err
}
