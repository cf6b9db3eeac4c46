#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use cvqsim::circuit::{run, Backend, Circuit, FinalState, GateKind};
use cvqsim::gridstate::GridState;
use cvqsim::wigner::{wigner_from_gaussian, wigner_from_grid, WignerGrid};
use cvqsim::{Grid, HBar, SimRng};
use rand::Rng;

pub fn hbar() -> HBar {
    HBar::new(2.0).unwrap()
}

/// Grid shared by the cross-backend comparisons.
pub fn grid() -> Grid {
    Grid::self_dual(512, hbar()).unwrap()
}

/// The largest supported cutoff, so stacked squeezes stay resolved.
pub const CUTOFF: usize = cvqsim::fock::MAX_CUTOFF;

/// One-mode sequence of 1 to `max_len` displacement, squeeze and rotation
/// gates. Rotations are multiples of pi/2 so every backend can run them.
pub fn random_dsr(rng: &mut SimRng, max_len: usize) -> Circuit {
    let mut c = Circuit::new(1).unwrap();
    let len = rng.random_range(1..=max_len);
    for _ in 0..len {
        let kind = match rng.random_range(0..3) {
            0 => GateKind::Dgate { r: rng.random_range(0.0..0.6), phi: rng.random_range(-PI..PI) },
            1 => GateKind::Sgate { r: rng.random_range(-0.4..0.4), phi: rng.random_range(-PI..PI) },
            _ => GateKind::Rgate(FRAC_PI_2 * rng.random_range(-2..=2) as f64),
        };
        c.push(kind, &[0]).unwrap();
    }
    c
}

#[derive(Clone, Copy, Debug)]
pub struct Stats {
    pub mean_x: f64,
    pub mean_p: f64,
    pub std_x: f64,
    pub std_p: f64,
}

impl Stats {
    pub fn max_diff(&self, o: &Stats) -> f64 {
        [
            self.mean_x - o.mean_x,
            self.mean_p - o.mean_p,
            self.std_x - o.std_x,
            self.std_p - o.std_p,
        ]
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()))
    }
}

pub fn grid_stats(s: &GridState) -> Stats {
    use cvqsim::gridstate::QuadratureOperator;
    let (std_x, std_p, _) = s.uncertainty_product(0).unwrap();
    Stats {
        mean_x: s.expectation(&QuadratureOperator::x(0)).unwrap(),
        mean_p: s.expectation(&QuadratureOperator::p(0)).unwrap(),
        std_x,
        std_p,
    }
}

/// Final single-mode states of `c` on the grid, Gaussian and Fock backends,
/// the last synthesised onto the grid.
pub struct Triangle {
    pub grid: GridState,
    pub gaussian: cvqsim::gaussian::GaussianState,
    pub fock_on_grid: GridState,
}

pub fn run_triangle(c: &Circuit) -> Triangle {
    let mut rng = SimRng::seed_from(0);
    let FinalState::Grid(g) = run(c, &Backend::Grid(grid()), &mut rng).unwrap().1 else { unreachable!() };
    let FinalState::Gaussian { state, .. } = run(c, &Backend::Gaussian { hbar: hbar() }, &mut rng).unwrap().1 else {
        unreachable!()
    };
    let FinalState::Fock(f) = run(c, &Backend::Fock { cutoff: CUTOFF, hbar: hbar() }, &mut rng).unwrap().1 else {
        unreachable!()
    };
    Triangle { grid: g, gaussian: state, fock_on_grid: f.to_grid(grid()).unwrap() }
}

impl Triangle {
    pub fn gaussian_stats(&self) -> Stats {
        let (std_x, std_p) = self.gaussian.std_devs(0).unwrap();
        Stats { mean_x: self.gaussian.mean()[0], mean_p: self.gaussian.mean()[1], std_x, std_p }
    }

    /// Largest pairwise difference of moments and of Wigner values on a 20x20 probe grid.
    pub fn discrepancies(&self) -> (f64, f64) {
        let a = grid_stats(&self.grid);
        let b = self.gaussian_stats();
        let c = grid_stats(&self.fock_on_grid);
        let moments = a.max_diff(&b).max(a.max_diff(&c)).max(b.max_diff(&c));

        let probe = cvqsim::wigner::linspace(-4.0, 4.0, 20);
        let wa = wigner_from_grid(&self.grid, &probe, &probe).unwrap();
        let wb = wigner_from_gaussian(&self.gaussian, 0, &probe, &probe).unwrap();
        let wc = wigner_from_grid(&self.fock_on_grid, &probe, &probe).unwrap();
        let w = max_abs_diff(&wa, &wb).max(max_abs_diff(&wa, &wc)).max(max_abs_diff(&wb, &wc));
        (moments, w)
    }
}

pub fn max_abs_diff(a: &WignerGrid, b: &WignerGrid) -> f64 {
    a.values
        .iter()
        .flatten()
        .zip(b.values.iter().flatten())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn rough_value(rng: &mut SimRng) -> f64 {
    match rng.random_range(0..4) {
        0 => 0.0,
        1 => rng.random_range(-5i32..=5) as f64 / 2.0,
        2 => rng.random_range(-1e3..1e3),
        _ => rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-12..12)),
    }
}

/// A random valid circuit exercising every gate kind.
pub fn fuzz_circuit(rng: &mut SimRng) -> Circuit {
    let modes = rng.random_range(1..=4usize);
    let mut c = Circuit::new(modes).unwrap();
    for m in 0..modes {
        match rng.random_range(0..4) {
            0 => c.push(GateKind::Vacuum, &[m]).unwrap(),
            1 => c.push(GateKind::Squeezed { r: rough_value(rng), phi: rough_value(rng) }, &[m]).unwrap(),
            2 => c.push(GateKind::Coherent { r: rough_value(rng), phi: rough_value(rng) }, &[m]).unwrap(),
            _ => {}
        }
    }
    let mut measured = vec![false; modes];
    for _ in 0..rng.random_range(0..12) {
        let live: Vec<usize> = (0..modes).filter(|&m| !measured[m]).collect();
        if live.is_empty() {
            break;
        }
        let m = live[rng.random_range(0..live.len())];
        let v = rough_value(rng);
        let w = rough_value(rng);
        let kind = match rng.random_range(0..10) {
            0 => GateKind::Xgate(v),
            1 => GateKind::Zgate(v),
            2 => GateKind::Dgate { r: v, phi: w },
            3 => GateKind::Sgate { r: v, phi: w },
            4 => GateKind::Rgate(v),
            5 => GateKind::Fourier,
            6 => GateKind::Invert { x0: v, width: w.abs() + 1.0 },
            7 if live.len() >= 2 => {
                let other = live.iter().copied().find(|&o| o != m).unwrap();
                c.push(GateKind::BSgate { theta: v, phi: w }, &[m, other]).unwrap();
                continue;
            }
            8 => {
                measured[m] = true;
                GateKind::MeasureX
            }
            _ => GateKind::Rgate(-PI / 2.0),
        };
        c.push(kind, &[m]).unwrap();
    }
    c
}
