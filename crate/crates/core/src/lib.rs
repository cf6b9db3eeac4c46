//! Continuous-variable quantum computing simulator.
//!
//! Three interchangeable state representations share one circuit front end:
//! sampled wavefunctions on a position grid ([`gridstate`]), Gaussian
//! mean/covariance pairs ([`gaussian`]) and truncated number-basis vectors
//! ([`fock`]). [`wigner`] renders phase-space pictures of the first two,
//! [`circuit`] parses and runs the text DSL, and [`algorithms`] hosts the
//! continuous-variable Grover search and Deutsch-Jozsa drivers.

// `!(a <= b)` is used deliberately so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod numerics;
pub mod par;
pub mod rng;

pub mod fock;
pub mod gaussian;
pub mod gridstate;
pub mod wigner;

pub mod circuit;

pub mod algorithms;
pub mod cli;

pub use error::{CvError, CvResult};
pub use numerics::{Grid, HBar, DEFAULT_HBAR};
pub use rng::SimRng;
