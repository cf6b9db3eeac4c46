use std::fmt;

use crate::error::{CvError, CvResult};
use crate::gridstate::quarter_turns;

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    Vacuum,
    Squeezed { r: f64, phi: f64 },
    /// Coherent state `|r e^{i phi}>`.
    Coherent { r: f64, phi: f64 },
    /// Position shift by `dx`.
    Xgate(f64),
    /// Momentum kick by `dp`.
    Zgate(f64),
    /// `D(alpha)` with `alpha = r e^{i phi}`.
    Dgate { r: f64, phi: f64 },
    Sgate { r: f64, phi: f64 },
    Rgate(f64),
    Fourier,
    BSgate { theta: f64, phi: f64 },
    /// `2 P - 1` for the window `[x0 - width/2, x0 + width/2)`.
    Invert { x0: f64, width: f64 },
    MeasureX,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Vacuum => "Vacuum",
            GateKind::Squeezed { .. } => "Squeezed",
            GateKind::Coherent { .. } => "Coherent",
            GateKind::Xgate(_) => "Xgate",
            GateKind::Zgate(_) => "Zgate",
            GateKind::Dgate { .. } => "Dgate",
            GateKind::Sgate { .. } => "Sgate",
            GateKind::Rgate(_) => "Rgate",
            GateKind::Fourier => "Fourier",
            GateKind::BSgate { .. } => "BSgate",
            GateKind::Invert { .. } => "Invert",
            GateKind::MeasureX => "MeasureX",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            GateKind::Vacuum | GateKind::Fourier | GateKind::MeasureX => vec![],
            GateKind::Xgate(v) | GateKind::Zgate(v) | GateKind::Rgate(v) => vec![v],
            GateKind::Squeezed { r, phi }
            | GateKind::Coherent { r, phi }
            | GateKind::Dgate { r, phi }
            | GateKind::Sgate { r, phi } => vec![r, phi],
            GateKind::BSgate { theta, phi } => vec![theta, phi],
            GateKind::Invert { x0, width } => vec![x0, width],
        }
    }

    pub fn arity(&self) -> usize {
        if matches!(self, GateKind::BSgate { .. }) {
            2
        } else {
            1
        }
    }

    pub fn is_preparation(&self) -> bool {
        matches!(self, GateKind::Vacuum | GateKind::Squeezed { .. } | GateKind::Coherent { .. })
    }

    pub fn is_gaussian(&self) -> bool {
        !matches!(self, GateKind::Invert { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    mode_count: usize,
    ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(mode_count: usize) -> CvResult<Self> {
        if mode_count == 0 {
            return Err(CvError::Domain("a circuit needs at least one mode".into()));
        }
        Ok(Self { mode_count, ops: Vec::new() })
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    /// Append an op after checking it against the circuit so far.
    pub fn push(&mut self, kind: GateKind, targets: &[usize]) -> CvResult<()> {
        let op = GateOp { kind, targets: targets.to_vec() };
        self.check_op(&op)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> CvResult<()> {
        for op in &other.ops {
            self.push(op.kind.clone(), &op.targets)?;
        }
        Ok(())
    }

    fn check_op(&self, op: &GateOp) -> CvResult<()> {
        let name = op.kind.name();
        if op.targets.len() != op.kind.arity() {
            return Err(CvError::Domain(format!(
                "{name} takes {} target(s), got {}",
                op.kind.arity(),
                op.targets.len()
            )));
        }
        if op.targets.len() == 2 && op.targets[0] == op.targets[1] {
            return Err(CvError::Domain(format!("{name} needs two distinct modes")));
        }
        if let Some(t) = op.targets.iter().find(|&&t| t >= self.mode_count) {
            return Err(CvError::Domain(format!("target q[{t}] out of range for {} modes", self.mode_count)));
        }
        if op.kind.params().iter().any(|v| !v.is_finite()) {
            return Err(CvError::Domain(format!("{name} has a non-finite parameter")));
        }
        for &t in &op.targets {
            let earlier = self.ops.iter().filter(|o| o.targets.contains(&t));
            for prev in earlier {
                if prev.kind == GateKind::MeasureX {
                    return Err(CvError::Domain(format!("q[{t}] is used after it was measured")));
                }
                if op.kind.is_preparation() && !prev.kind.is_preparation() {
                    return Err(CvError::Domain(format!(
                        "preparation {name} on q[{t}] follows a gate on that mode"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn classify(&self) -> BackendClass {
        classify(self)
    }
}

impl fmt::Display for Circuit {
    /// Prints the DSL form; parsing the output gives back an equal circuit.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "modes {}", self.mode_count)?;
        for op in &self.ops {
            let targets: Vec<String> = op.targets.iter().map(|t| format!("q[{t}]")).collect();
            let params: Vec<String> = op.kind.params().iter().map(|v| format!("{v:?}")).collect();
            if op.kind == GateKind::MeasureX {
                writeln!(f, "MeasureX | {}", targets.join(", "))?;
            } else {
                writeln!(f, "{}({}) | {}", op.kind.name(), params.join(", "), targets.join(", "))?;
            }
        }
        Ok(())
    }
}

/// Which backends can run a circuit, with the first reason for each refusal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackendClass {
    pub gaussian: Result<(), String>,
    pub grid: Result<(), String>,
    pub fock: Result<(), String>,
}

impl BackendClass {
    pub fn gaussian_compatible(&self) -> bool {
        self.gaussian.is_ok()
    }

    pub fn grid_compatible(&self) -> bool {
        self.grid.is_ok()
    }

    pub fn fock_compatible(&self) -> bool {
        self.fock.is_ok()
    }
}

pub const MAX_GRID_MODES: usize = 2;
pub const MAX_FOCK_MODES: usize = 2;

pub fn classify(c: &Circuit) -> BackendClass {
    let find = |pred: &dyn Fn(&GateKind) -> bool| c.ops.iter().find(|o| pred(&o.kind)).map(|o| o.kind.clone());

    let gaussian = match find(&|k| !k.is_gaussian()) {
        Some(k) => Err(format!("{} is not a Gaussian operation", k.name())),
        None => Ok(()),
    };

    let grid = if c.mode_count > MAX_GRID_MODES {
        Err(format!("grid backend supports at most {MAX_GRID_MODES} modes, circuit has {}", c.mode_count))
    } else if let Some(k) = find(&|k| matches!(k, GateKind::Rgate(t) if quarter_turns(*t).is_none())) {
        Err(format!("grid backend rotates only by multiples of pi/2, got Rgate({:?})", k.params()[0]))
    } else if find(&|k| matches!(k, GateKind::BSgate { .. })).is_some() {
        Err("grid backend does not implement BSgate".into())
    } else {
        Ok(())
    };

    let fock = if c.mode_count > MAX_FOCK_MODES {
        Err(format!("Fock backend supports at most {MAX_FOCK_MODES} modes, circuit has {}", c.mode_count))
    } else if let Some(k) = find(&|k| matches!(k, GateKind::Invert { .. } | GateKind::MeasureX)) {
        Err(format!("Fock backend does not implement {}", k.name()))
    } else {
        Ok(())
    };

    BackendClass { gaussian, grid, fock }
}
