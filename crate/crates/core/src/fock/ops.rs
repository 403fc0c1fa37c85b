//! Ladder, quadrature and number operators truncated to `D` Fock levels.

use crate::error::{Error, Result};
use crate::C64;

use super::OperatorMatrix;

pub(crate) fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        return Err(Error::InvalidCutoff(cutoff));
    }
    Ok(())
}

/// Annihilation and creation operators: `a[k−1, k] = √k`, `a_dag = a†`.
pub fn ladder_matrices(cutoff: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    check_cutoff(cutoff)?;
    let mut a = OperatorMatrix::zeros(cutoff);
    for k in 1..cutoff {
        a[(k - 1, k)] = C64::new(libm::sqrt(k as f64), 0.0);
    }
    let a_dag = a.adjoint();
    Ok((a, a_dag))
}

/// Position and momentum quadratures `X = (a† + a)/√2`, `P = i(a† − a)/√2`.
pub fn quadrature_matrices(cutoff: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let (a, a_dag) = ladder_matrices(cutoff)?;
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let x = a_dag.add(&a).scale(C64::new(s, 0.0));
    let p = a_dag.sub(&a).scale(C64::new(0.0, s));
    Ok((x, p))
}

/// Number operator `n̂ = a†a = diag(0, 1, …, D−1)`.
pub fn number_matrix(cutoff: usize) -> Result<OperatorMatrix> {
    check_cutoff(cutoff)?;
    let diag: alloc::vec::Vec<C64> = (0..cutoff).map(|k| C64::new(k as f64, 0.0)).collect();
    Ok(OperatorMatrix::from_diagonal(&diag))
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    a.matmul(b).sub(&b.matmul(a))
}
