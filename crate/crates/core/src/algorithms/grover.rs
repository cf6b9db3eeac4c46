//! Grover search along one continuous variable.
//!
//! The search space is a self-dual grid with one point per bin, so the
//! oracle window, the start window and the bins coincide. One iteration is
//! `I_{x0} F^dag O F`; conjugating by `F` shows it is discrete Grover
//! with the uniform state `F|x0>`, so the success probability is read in
//! that frame as the target-bin weight of `F psi`.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{CvError, CvResult};
use crate::gridstate::{GridState, ProjectionWindow};
use crate::numerics::{Grid, HBar};
use crate::par::Exec;
use crate::rng::SimRng;

/// z-score enclosing 99% of a normal distribution (two-sided).
pub const Z99: f64 = 2.5758293035489004;

#[derive(Clone, Debug, PartialEq)]
pub struct GroverProblem {
    grid: Grid,
    target_bin: usize,
    start_x0: f64,
}

impl GroverProblem {
    /// `bins` must be a power of two; the extent is the self-dual `sqrt(2 pi hbar N)`.
    pub fn new(bins: usize, target_bin: usize, hbar: HBar) -> CvResult<Self> {
        if bins < 2 || !bins.is_power_of_two() {
            return Err(CvError::Config(format!("bin count {bins} is not a power of two >= 2")));
        }
        if target_bin >= bins {
            return Err(CvError::Config(format!("target bin {target_bin} outside 0..{bins}")));
        }
        let grid = Grid::self_dual(bins, hbar)?;
        Ok(Self { grid, target_bin, start_x0: 0.0 })
    }

    pub fn with_start(mut self, x0: f64) -> CvResult<Self> {
        if self.grid.bin_of(x0).is_none() {
            return Err(CvError::Config(format!("start position {x0} outside the grid")));
        }
        self.start_x0 = x0;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bins(&self) -> usize {
        self.grid.n_points()
    }

    pub fn extent(&self) -> f64 {
        self.grid.extent()
    }

    /// Bin width `L / N`.
    pub fn precision(&self) -> f64 {
        self.grid.dx()
    }

    pub fn target_bin(&self) -> usize {
        self.target_bin
    }

    pub fn start_bin(&self) -> usize {
        self.grid.bin_of(self.start_x0).expect("checked on construction")
    }

    pub fn target_window(&self) -> ProjectionWindow {
        ProjectionWindow::bin(&self.grid, self.target_bin, 0)
    }

    pub fn start_window(&self) -> ProjectionWindow {
        ProjectionWindow::bin(&self.grid, self.start_bin(), 0)
    }

    /// Squeeze factor putting 99% of the realistic start Gaussian inside one bin.
    pub fn realistic_squeeze_factor(&self) -> f64 {
        2.0 * Z99 * (self.grid.hbar().value() / 2.0).sqrt() / self.precision()
    }

    pub fn default_iterations(&self) -> usize {
        (FRAC_PI_4 * (self.bins() as f64).sqrt()).floor() as usize
    }
}

/// A black-box unitary marking the solution.
pub trait GroverOracle {
    fn apply(&self, state: &GridState) -> CvResult<GridState>;
}

impl<F> GroverOracle for F
where
    F: Fn(&GridState) -> CvResult<GridState>,
{
    fn apply(&self, state: &GridState) -> CvResult<GridState> {
        self(state)
    }
}

/// The reference oracle: inversion about the target window.
#[derive(Clone, Debug)]
pub struct WindowOracle(pub ProjectionWindow);

impl WindowOracle {
    pub fn for_problem(problem: &GroverProblem) -> Self {
        Self(problem.target_window())
    }
}

impl GroverOracle for WindowOracle {
    fn apply(&self, state: &GridState) -> CvResult<GridState> {
        state.invert_about(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroverTrace {
    /// Target probability before the first iteration and after each one.
    pub target_prob: Vec<f64>,
    pub iterations_run: usize,
    pub success_prob_final: f64,
}

impl GroverTrace {
    /// Index of the first local maximum of the trace (the last index if it never turns down).
    pub fn first_peak(&self) -> usize {
        let p = &self.target_prob;
        (1..p.len()).find(|&k| k + 1 == p.len() || p[k + 1] < p[k]).unwrap_or(0)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iteration,target_prob")?;
        for (k, p) in self.target_prob.iter().enumerate() {
            writeln!(w, "{k},{p:.16e}")?;
        }
        Ok(())
    }
}

/// `I_{x0} F^dag O F psi`.
pub fn grover_iterate<O: GroverOracle + ?Sized>(
    state: &GridState,
    oracle: &O,
    x0_window: &ProjectionWindow,
) -> CvResult<GridState> {
    let marked = oracle.apply(&state.fourier_gate(0)?)?;
    marked.inverse_fourier_gate(0)?.invert_about(x0_window)
}

/// Probability of the target window in the oracle frame.
pub fn target_probability(state: &GridState, target: &ProjectionWindow) -> CvResult<f64> {
    Ok(state.fourier_gate(0)?.project(target)?.1)
}

pub fn initial_state(problem: &GroverProblem, realistic: Option<f64>) -> CvResult<GridState> {
    match realistic {
        None => GridState::grid_delta(problem.grid, problem.start_bin()),
        Some(r) => {
            if !(r.is_finite() && r > 0.0) {
                return Err(CvError::Config(format!("squeeze factor {r} must be positive")));
            }
            let center = problem.grid.x(problem.start_bin());
            GridState::gaussian(problem.grid, center, 0.0, r)
        }
    }
}

/// Run the search. `realistic = Some(R)` starts from a Gaussian of squeeze
/// factor `R` at the start bin instead of the grid delta.
pub fn grover_search<O: GroverOracle + ?Sized>(
    problem: &GroverProblem,
    oracle: &O,
    iterations: Option<usize>,
    realistic: Option<f64>,
) -> CvResult<GroverTrace> {
    let iterations = iterations.unwrap_or_else(|| problem.default_iterations());
    let x0 = problem.start_window();
    let target = problem.target_window();
    let mut state = initial_state(problem, realistic)?;
    let mut probs = vec![target_probability(&state, &target)?];
    for _ in 0..iterations {
        state = grover_iterate(&state, oracle, &x0)?;
        probs.push(target_probability(&state, &target)?);
    }
    let success = *probs.last().expect("at least the initial entry");
    Ok(GroverTrace { target_prob: probs, iterations_run: iterations, success_prob_final: success })
}

/// Final state in the oracle frame, ready for a bin measurement.
pub fn grover_final_state<O: GroverOracle + ?Sized>(
    problem: &GroverProblem,
    oracle: &O,
    iterations: Option<usize>,
    realistic: Option<f64>,
) -> CvResult<GridState> {
    let iterations = iterations.unwrap_or_else(|| problem.default_iterations());
    let x0 = problem.start_window();
    let mut state = initial_state(problem, realistic)?;
    for _ in 0..iterations {
        state = grover_iterate(&state, oracle, &x0)?;
    }
    state.fourier_gate(0)
}

/// Measure the oracle-frame bin of the final state once.
pub fn grover_measure<O: GroverOracle + ?Sized>(
    problem: &GroverProblem,
    oracle: &O,
    iterations: Option<usize>,
    realistic: Option<f64>,
    rng: &mut SimRng,
) -> CvResult<usize> {
    let state = grover_final_state(problem, oracle, iterations, realistic)?;
    Ok(state.sample_bins(0, 1, rng, Exec::Seq)?[0])
}
