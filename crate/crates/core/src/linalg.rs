//! Small dense helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// J = [[0, I], [-I, 0]].
pub fn symplectic_j(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// max |S^T J S - J|
pub fn symplectic_defect(s: &DMatrix<f64>) -> f64 {
    let n = s.nrows() / 2;
    let j = symplectic_j(n);
    (s.transpose() * &j * s - j).amax()
}

pub fn complex_identity(n: usize) -> DMatrix<Complex64> {
    DMatrix::identity(n, n)
}

/// Largest modulus entry of a complex matrix.
pub fn cmax(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Row-major copy, used when matrices leave the crate.
pub fn to_row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        out.extend(m.row(i).iter());
    }
    out
}

pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

/// Mean of a vector's entries.
pub fn mean(v: &DVector<f64>) -> f64 {
    v.sum() / v.len() as f64
}
