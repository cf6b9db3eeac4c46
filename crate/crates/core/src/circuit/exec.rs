use std::f64::consts::FRAC_PI_2;

use log::debug;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::ir::{Circuit, GateKind, GateOp};
use crate::error::{CvError, CvResult};
use crate::fock::{FockGate, FockSnapshot, FockState, DEFAULT_CUTOFF};
use crate::gaussian::{GaussianSnapshot, GaussianState};
use crate::gridstate::{GridSnapshot, GridState, ProjectionWindow};
use crate::numerics::{Grid, HBar};
use crate::rng::SimRng;

#[derive(Clone, Debug, PartialEq)]
pub enum Backend {
    Grid(Grid),
    Gaussian { hbar: HBar },
    Fock { cutoff: usize, hbar: HBar },
}

impl Backend {
    pub fn fock(hbar: HBar) -> Self {
        Backend::Fock { cutoff: DEFAULT_CUTOFF, hbar }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Grid(_) => "grid",
            Backend::Gaussian { .. } => "gaussian",
            Backend::Fock { .. } => "fock",
        }
    }

    pub fn hbar(&self) -> HBar {
        match self {
            Backend::Grid(g) => g.hbar(),
            Backend::Gaussian { hbar } | Backend::Fock { hbar, .. } => *hbar,
        }
    }

    /// Refuse circuits this backend cannot run.
    pub fn check(&self, circuit: &Circuit) -> CvResult<()> {
        let class = circuit.classify();
        let verdict = match self {
            Backend::Grid(_) => class.grid,
            Backend::Gaussian { .. } => class.gaussian,
            Backend::Fock { .. } => class.fock,
        };
        verdict.map_err(CvError::Capability)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub op_index: usize,
    pub mode: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
pub enum Snapshot {
    Grid(GridSnapshot),
    Gaussian(GaussianSnapshot),
    Fock(FockSnapshot),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub outcomes: Vec<Outcome>,
    pub snapshot: Snapshot,
}

/// The state left after a run.
///
/// For Gaussian runs, measured modes are traced out; `mode_map[m]` gives the
/// index of circuit mode `m` in the remaining state, or `None` once measured.
#[derive(Clone, Debug)]
pub enum FinalState {
    Grid(GridState),
    Gaussian { state: GaussianState, mode_map: Vec<Option<usize>> },
    Fock(FockState),
}

impl FinalState {
    pub fn snapshot(&self) -> Snapshot {
        match self {
            FinalState::Grid(s) => Snapshot::Grid(s.snapshot()),
            FinalState::Gaussian { state, .. } => Snapshot::Gaussian(state.snapshot()),
            FinalState::Fock(s) => Snapshot::Fock(s.snapshot()),
        }
    }
}

/// `(dx, dp)` of `D(r e^{i phi})`.
pub fn polar_to_shift(r: f64, phi: f64, hbar: HBar) -> (f64, f64) {
    let s = (2.0 * hbar.value()).sqrt() * r;
    (s * phi.cos(), s * phi.sin())
}

/// Run a circuit and return its measurement outcomes and final state.
pub fn run(circuit: &Circuit, backend: &Backend, rng: &mut SimRng) -> CvResult<(Vec<Outcome>, FinalState)> {
    backend.check(circuit)?;
    let n = circuit.mode_count();
    let hbar = backend.hbar();
    let mut outcomes = Vec::new();
    let mut state = match backend {
        Backend::Grid(grid) => FinalState::Grid(GridState::vacuum(*grid, n)?),
        Backend::Gaussian { hbar } => FinalState::Gaussian {
            state: GaussianState::vacuum(n, *hbar)?,
            mode_map: (0..n).map(Some).collect(),
        },
        Backend::Fock { cutoff, hbar } => FinalState::Fock(FockState::vacuum(n, *cutoff, *hbar)?),
    };
    for (index, op) in circuit.ops().iter().enumerate() {
        debug!("op {index}: {} on {:?}", op.kind.name(), op.targets);
        state = match state {
            FinalState::Grid(s) => FinalState::Grid(step_grid(s, op, index, rng, &mut outcomes)?),
            FinalState::Gaussian { state, mut mode_map } => {
                let state = step_gaussian(state, &mut mode_map, op, index, rng, &mut outcomes)?;
                FinalState::Gaussian { state, mode_map }
            }
            FinalState::Fock(s) => FinalState::Fock(step_fock(s, op, hbar)?),
        };
    }
    Ok((outcomes, state))
}

/// [`run`], packaged as a serialisable result.
pub fn execute(circuit: &Circuit, backend: &Backend, rng: &mut SimRng) -> CvResult<ExecutionResult> {
    let (outcomes, state) = run(circuit, backend, rng)?;
    Ok(ExecutionResult { outcomes, snapshot: state.snapshot() })
}

fn step_grid(
    s: GridState,
    op: &GateOp,
    index: usize,
    rng: &mut SimRng,
    outcomes: &mut Vec<Outcome>,
) -> CvResult<GridState> {
    let m = op.targets[0];
    let hbar = s.hbar();
    match op.kind {
        GateKind::Vacuum => Ok(s),
        GateKind::Squeezed { r, phi } | GateKind::Sgate { r, phi } => s.squeeze(m, r, phi),
        GateKind::Coherent { r, phi } | GateKind::Dgate { r, phi } => {
            let (dx, dp) = polar_to_shift(r, phi, hbar);
            s.displace(m, dx, dp)
        }
        GateKind::Xgate(dx) => s.displace(m, dx, 0.0),
        GateKind::Zgate(dp) => s.displace(m, 0.0, dp),
        GateKind::Rgate(theta) => s.rotate(m, theta),
        GateKind::Fourier => s.fourier_gate(m),
        GateKind::Invert { x0, width } => s.invert_about(&ProjectionWindow::new(x0, width, m)),
        GateKind::MeasureX => {
            let meas = s.measure_x(m, rng)?;
            outcomes.push(Outcome { op_index: index, mode: m, value: meas.x });
            Ok(meas.post)
        }
        GateKind::BSgate { .. } => Err(CvError::Capability("grid backend does not implement BSgate".into())),
    }
}

fn live(mode_map: &[Option<usize>], m: usize) -> CvResult<usize> {
    mode_map[m].ok_or_else(|| CvError::Contract(format!("q[{m}] was already measured")))
}

fn step_gaussian(
    s: GaussianState,
    mode_map: &mut [Option<usize>],
    op: &GateOp,
    index: usize,
    rng: &mut SimRng,
    outcomes: &mut Vec<Outcome>,
) -> CvResult<GaussianState> {
    let m = op.targets[0];
    let k = live(mode_map, m)?;
    match op.kind {
        GateKind::Vacuum => Ok(s),
        GateKind::Squeezed { r, phi } | GateKind::Sgate { r, phi } => s.apply_squeeze(k, r, phi),
        GateKind::Coherent { r, phi } | GateKind::Dgate { r, phi } => {
            s.apply_displacement(k, C64::from_polar(r, phi))
        }
        GateKind::Xgate(dx) => s.apply_displacement_xp(k, dx, 0.0),
        GateKind::Zgate(dp) => s.apply_displacement_xp(k, 0.0, dp),
        GateKind::Rgate(theta) => s.apply_rotation(k, theta),
        GateKind::Fourier => s.apply_rotation(k, FRAC_PI_2),
        GateKind::BSgate { theta, phi } => {
            let k2 = live(mode_map, op.targets[1])?;
            s.apply_mixer(k, k2, theta, phi)
        }
        GateKind::MeasureX => {
            let (value, post) = s.homodyne_x(k, rng)?;
            outcomes.push(Outcome { op_index: index, mode: m, value });
            mode_map[m] = None;
            for slot in mode_map.iter_mut().flatten() {
                if *slot > k {
                    *slot -= 1;
                }
            }
            Ok(post)
        }
        GateKind::Invert { .. } => Err(CvError::Capability("Invert is not a Gaussian operation".into())),
    }
}

fn step_fock(s: FockState, op: &GateOp, hbar: HBar) -> CvResult<FockState> {
    let m = op.targets[0];
    let displace = |s: &FockState, dx: f64, dp: f64| {
        let alpha = C64::new(dx, dp) / (2.0 * hbar.value()).sqrt();
        s.apply_gate(m, FockGate::Displace(alpha))
    };
    match op.kind {
        GateKind::Vacuum => Ok(s),
        GateKind::Squeezed { r, phi } | GateKind::Sgate { r, phi } => {
            s.apply_gate(m, FockGate::Squeeze(C64::from_polar(r, phi)))
        }
        GateKind::Coherent { r, phi } | GateKind::Dgate { r, phi } => {
            s.apply_gate(m, FockGate::Displace(C64::from_polar(r, phi)))
        }
        GateKind::Xgate(dx) => displace(&s, dx, 0.0),
        GateKind::Zgate(dp) => displace(&s, 0.0, dp),
        GateKind::Rgate(theta) => s.apply_gate(m, FockGate::Phase(theta)),
        GateKind::Fourier => s.apply_gate(m, FockGate::Phase(FRAC_PI_2)),
        GateKind::BSgate { theta, phi } => {
            if op.targets[0] == 0 {
                s.apply_mixer(theta, phi)
            } else {
                Ok(s.swap_modes().apply_mixer(theta, phi)?.swap_modes())
            }
        }
        GateKind::Invert { .. } | GateKind::MeasureX => Err(CvError::Capability(format!(
            "Fock backend does not implement {}",
            op.kind.name()
        ))),
    }
}
