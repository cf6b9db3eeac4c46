//! Gaussian states as phase-space mean and covariance.
//!
//! Ordering is interleaved, `(x_1, p_1, ..., x_m, p_m)`. Gates act through
//! their Heisenberg matrices: a gate with symplectic `S` and offset `d` maps
//! `mean -> S mean + d` and `cov -> S cov S^T`.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};
use num_complex::Complex64 as C64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, CvError, CvResult};
use crate::gridstate::squeeze_matrix;
use crate::numerics::HBar;
use crate::rng::SimRng;

pub const MAX_SQUEEZE: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    hbar: HBar,
}

/// Heisenberg action `r -> S r + d` of a Gaussian unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticGate {
    pub matrix: DMatrix<f64>,
    pub displacement: DVector<f64>,
}

impl SymplecticGate {
    pub fn new(matrix: DMatrix<f64>, displacement: DVector<f64>) -> CvResult<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n || !n.is_multiple_of(2) {
            return Err(CvError::Dimension { expected: n, found: matrix.ncols() });
        }
        check_len(n, displacement.len())?;
        if !is_symplectic(&matrix, 1e-10) {
            return Err(CvError::Domain("matrix does not preserve the symplectic form".into()));
        }
        Ok(Self { matrix, displacement })
    }

    /// Embed a single-mode 2x2 action into `modes` modes.
    pub fn single_mode(modes: usize, mode: usize, m: [[f64; 2]; 2], d: [f64; 2]) -> Self {
        let mut matrix = DMatrix::identity(2 * modes, 2 * modes);
        let mut displacement = DVector::zeros(2 * modes);
        for i in 0..2 {
            for j in 0..2 {
                matrix[(2 * mode + i, 2 * mode + j)] = m[i][j];
            }
            displacement[2 * mode + i] = d[i];
        }
        Self { matrix, displacement }
    }
}

/// Block-diagonal `Omega` with `[[0, 1], [-1, 0]]` per mode.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        o[(2 * k, 2 * k + 1)] = 1.0;
        o[(2 * k + 1, 2 * k)] = -1.0;
    }
    o
}

pub fn is_symplectic(s: &DMatrix<f64>, tol: f64) -> bool {
    let o = symplectic_form(s.nrows() / 2);
    (s.transpose() * &o * s - o).amax() < tol
}

pub fn rotation_matrix(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, s], [-s, c]]
}

/// Two-mode beamsplitter `exp(theta (e^{-i phi} a_1 a_2^dag - e^{i phi} a_1^dag a_2))`
/// on `(x_1, p_1, x_2, p_2)`.
pub fn mixer_matrix(theta: f64, phi: f64) -> [[f64; 4]; 4] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [
        [ct, 0.0, -st * cp, st * sp],
        [0.0, ct, -st * sp, -st * cp],
        [st * cp, st * sp, ct, 0.0],
        [-st * sp, st * cp, 0.0, ct],
    ]
}

/// Squeezing factor `R` of a realistic Gaussian for gate parameter `r`.
pub fn squeeze_factor_from_r(r: f64) -> f64 {
    r.exp()
}

pub fn r_from_squeeze_factor(factor: f64) -> CvResult<f64> {
    if factor > 0.0 && factor.is_finite() {
        Ok(factor.ln())
    } else {
        Err(CvError::Domain(format!("squeezing factor must be positive, got {factor}")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussianSnapshot {
    pub modes: usize,
    pub hbar: f64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl GaussianState {
    pub fn vacuum(modes: usize, hbar: HBar) -> CvResult<Self> {
        if modes == 0 {
            return Err(CvError::Domain("a Gaussian state needs at least one mode".into()));
        }
        Ok(Self::vacuum_unchecked(modes, hbar))
    }

    fn vacuum_unchecked(modes: usize, hbar: HBar) -> Self {
        Self {
            modes,
            mean: DVector::zeros(2 * modes),
            cov: DMatrix::identity(2 * modes, 2 * modes) * (hbar.value() / 2.0),
            hbar,
        }
    }

    /// Validated construction from raw moments.
    pub fn from_moments(mean: DVector<f64>, cov: DMatrix<f64>, hbar: HBar) -> CvResult<Self> {
        let n = mean.len();
        if !n.is_multiple_of(2) {
            return Err(CvError::Dimension { expected: n + 1, found: n });
        }
        check_len(n, cov.nrows())?;
        check_len(n, cov.ncols())?;
        if (&cov - cov.transpose()).amax() > 1e-12 * (1.0 + cov.amax()) {
            return Err(CvError::Contract("covariance is not symmetric".into()));
        }
        let s = Self { modes: n / 2, mean, cov, hbar };
        if s.modes > 0 && s.uncertainty_min_eigenvalue() < -1e-9 {
            return Err(CvError::Contract("covariance violates the uncertainty principle".into()));
        }
        Ok(s)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn hbar(&self) -> HBar {
        self.hbar
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    fn check_mode(&self, mode: usize) -> CvResult<()> {
        if mode < self.modes {
            Ok(())
        } else {
            Err(CvError::Domain(format!("mode {mode} out of range for {}-mode state", self.modes)))
        }
    }

    pub fn apply(&self, gate: &SymplecticGate) -> CvResult<GaussianState> {
        check_len(2 * self.modes, gate.matrix.nrows())?;
        let s = &gate.matrix;
        let cov = s * &self.cov * s.transpose();
        Ok(Self {
            modes: self.modes,
            mean: s * &self.mean + &gate.displacement,
            cov: (&cov + cov.transpose()) * 0.5,
            hbar: self.hbar,
        })
    }

    fn apply_single(&self, mode: usize, m: [[f64; 2]; 2], d: [f64; 2]) -> CvResult<GaussianState> {
        self.check_mode(mode)?;
        self.apply(&SymplecticGate::single_mode(self.modes, mode, m, d))
    }

    /// `D(alpha)`: mean moves by `sqrt(2 hbar) (Re alpha, Im alpha)`.
    pub fn apply_displacement(&self, mode: usize, alpha: C64) -> CvResult<GaussianState> {
        let k = (2.0 * self.hbar.value()).sqrt();
        self.apply_displacement_xp(mode, k * alpha.re, k * alpha.im)
    }

    pub fn apply_displacement_xp(&self, mode: usize, dx: f64, dp: f64) -> CvResult<GaussianState> {
        self.apply_single(mode, [[1.0, 0.0], [0.0, 1.0]], [dx, dp])
    }

    /// `exp(-i theta N)`.
    pub fn apply_rotation(&self, mode: usize, theta: f64) -> CvResult<GaussianState> {
        self.apply_single(mode, rotation_matrix(theta), [0.0; 2])
    }

    /// `S(r e^{i phi})`; for `phi = 0` x shrinks by `e^{-r}`.
    pub fn apply_squeeze(&self, mode: usize, r: f64, phi: f64) -> CvResult<GaussianState> {
        if !(r.abs() <= MAX_SQUEEZE) {
            return Err(CvError::Domain(format!("squeezing |r| = {} exceeds {MAX_SQUEEZE}", r.abs())));
        }
        self.apply_single(mode, squeeze_matrix(r, phi), [0.0; 2])
    }

    pub fn apply_mixer(&self, mode_a: usize, mode_b: usize, theta: f64, phi: f64) -> CvResult<GaussianState> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        if mode_a == mode_b {
            return Err(CvError::Contract(format!("mixer needs two distinct modes, got {mode_a} twice")));
        }
        let b = mixer_matrix(theta, phi);
        let idx = [2 * mode_a, 2 * mode_a + 1, 2 * mode_b, 2 * mode_b + 1];
        let mut s = DMatrix::identity(2 * self.modes, 2 * self.modes);
        for (i, &r) in idx.iter().enumerate() {
            for (j, &c) in idx.iter().enumerate() {
                s[(r, c)] = b[i][j];
            }
        }
        self.apply(&SymplecticGate { matrix: s, displacement: DVector::zeros(2 * self.modes) })
    }

    /// `(mean, variance)` of the x quadrature of `mode`.
    pub fn marginal_x(&self, mode: usize) -> CvResult<(f64, f64)> {
        self.check_mode(mode)?;
        Ok((self.mean[2 * mode], self.cov[(2 * mode, 2 * mode)]))
    }

    /// Reduced single-mode mean and covariance.
    pub fn wigner_params(&self, mode: usize) -> CvResult<(Vector2<f64>, Matrix2<f64>)> {
        self.check_mode(mode)?;
        let i = 2 * mode;
        let v = Matrix2::new(self.cov[(i, i)], self.cov[(i, i + 1)], self.cov[(i + 1, i)], self.cov[(i + 1, i + 1)]);
        if v.determinant() <= 0.0 {
            return Err(CvError::Contract(format!("reduced covariance of mode {mode} is singular")));
        }
        Ok((Vector2::new(self.mean[i], self.mean[i + 1]), v))
    }

    /// `(dx, dp)` of `mode`.
    pub fn std_devs(&self, mode: usize) -> CvResult<(f64, f64)> {
        self.check_mode(mode)?;
        Ok((self.cov[(2 * mode, 2 * mode)].sqrt(), self.cov[(2 * mode + 1, 2 * mode + 1)].sqrt()))
    }

    /// Condition on the x quadrature of `mode` having value `v`; the measured
    /// mode is removed.
    pub fn condition_x(&self, mode: usize, v: f64) -> CvResult<GaussianState> {
        self.check_mode(mode)?;
        let ix = 2 * mode;
        let vxx = self.cov[(ix, ix)];
        if !(vxx > 0.0) {
            return Err(CvError::Contract("x variance must be positive to condition on it".into()));
        }
        let keep: Vec<usize> = (0..2 * self.modes).filter(|&i| i / 2 != mode).collect();
        let k = keep.len();
        let dmu = v - self.mean[ix];
        let mean = DVector::from_fn(k, |a, _| self.mean[keep[a]] + self.cov[(keep[a], ix)] * dmu / vxx);
        let cov = DMatrix::from_fn(k, k, |a, b| {
            self.cov[(keep[a], keep[b])] - self.cov[(keep[a], ix)] * self.cov[(ix, keep[b])] / vxx
        });
        Ok(Self { modes: self.modes - 1, cov: (&cov + cov.transpose()) * 0.5, mean, hbar: self.hbar })
    }

    /// Homodyne x measurement: sample from the marginal, then condition.
    pub fn homodyne_x(&self, mode: usize, rng: &mut SimRng) -> CvResult<(f64, GaussianState)> {
        let (mu, var) = self.marginal_x(mode)?;
        let normal = Normal::new(mu, var.sqrt()).map_err(|e| CvError::Domain(e.to_string()))?;
        let v = normal.sample(rng);
        Ok((v, self.condition_x(mode, v)?))
    }

    /// Smallest eigenvalue of `cov + i (hbar/2) Omega`, via its real embedding.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let n = 2 * self.modes;
        let b = symplectic_form(self.modes) * (self.hbar.value() / 2.0);
        let mut big = DMatrix::zeros(2 * n, 2 * n);
        big.view_mut((0, 0), (n, n)).copy_from(&self.cov);
        big.view_mut((n, n), (n, n)).copy_from(&self.cov);
        big.view_mut((0, n), (n, n)).copy_from(&(-&b));
        big.view_mut((n, 0), (n, n)).copy_from(&b);
        SymmetricEigen::new(big).eigenvalues.min()
    }

    /// `det(cov) / (hbar/2)^{2m}`; 1 for pure states.
    pub fn purity_ratio(&self) -> f64 {
        self.cov.determinant() / (self.hbar.value() / 2.0).powi(2 * self.modes as i32)
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity_ratio() - 1.0).abs() < tol
    }

    pub fn snapshot(&self) -> GaussianSnapshot {
        GaussianSnapshot {
            modes: self.modes,
            hbar: self.hbar.value(),
            mean: self.mean.iter().copied().collect(),
            cov: self.cov.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }

    pub fn from_snapshot(s: &GaussianSnapshot) -> CvResult<Self> {
        let n = 2 * s.modes;
        check_len(n, s.mean.len())?;
        check_len(n, s.cov.len())?;
        for row in &s.cov {
            check_len(n, row.len())?;
        }
        Self::from_moments(
            DVector::from_vec(s.mean.clone()),
            DMatrix::from_fn(n, n, |i, j| s.cov[i][j]),
            HBar::new(s.hbar)?,
        )
    }
}
