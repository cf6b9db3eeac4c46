//! Shared numerical substrate: grid geometry, the position/momentum
//! transform, quadrature, oscillator eigenfunctions and the matrix exponential.

mod expm;
mod grid;
mod hermite;
mod transform;

pub use expm::{matrix_exp, ComplexMatrix};
pub use grid::{Grid, HBar, DEFAULT_HBAR};
pub use hermite::{hermite_function, hermite_functions, MAX_HERMITE_ORDER};
pub use transform::{
    delta_identity_check, delta_kernel, p_to_x_transform, quadrature_integrate, x_to_p_transform,
    Transform,
};
