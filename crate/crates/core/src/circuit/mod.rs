//! Circuit IR, the `.cvq` text format, backend classification and execution.

mod exec;
mod ir;
mod parse;

pub use exec::{execute, polar_to_shift, run, Backend, ExecutionResult, FinalState, Outcome, Snapshot};
pub use ir::{classify, BackendClass, Circuit, GateKind, GateOp, MAX_FOCK_MODES, MAX_GRID_MODES};
pub use parse::{parse, ParseError};
