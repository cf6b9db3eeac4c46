//! Grover search on the grid backend and Deutsch-Jozsa on the Gaussian backend.

pub mod dj;
pub mod grover;

pub use dj::{dj_run, DJOracle, DJResult, Verdict, DJ_THRESHOLD};
pub use grover::{grover_iterate, grover_search, GroverOracle, GroverProblem, GroverTrace, WindowOracle};
