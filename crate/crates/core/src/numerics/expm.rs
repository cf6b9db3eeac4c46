use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{CvError, CvResult};

pub type ComplexMatrix = DMatrix<C64>;

// Degree-13 Pade coefficients and the matching 1-norm bound.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1(m: &ComplexMatrix) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a [13/13] Pade approximant.
pub fn matrix_exp(m: &ComplexMatrix) -> CvResult<ComplexMatrix> {
    let (r, c) = m.shape();
    if r != c {
        return Err(CvError::Dimension { expected: r, found: c });
    }
    if r == 0 {
        return Ok(m.clone());
    }
    let nrm = norm1(m);
    let squarings = if nrm > THETA13 { (nrm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = m * C64::new(2f64.powi(-squarings), 0.0);

    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let ident = ComplexMatrix::identity(r, r);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = &a * (inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &ident * b(1));
    let inner_v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8));
    let v = inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut x = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| CvError::Domain("singular Pade denominator".into()))?;
    for _ in 0..squarings {
        x = &x * &x;
    }
    Ok(x)
}
