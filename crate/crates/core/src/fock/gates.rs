//! The five CV gates as exponentials of truncated anti-Hermitian generators.
//!
//! Every gate is `U(t) = exp(t·G)` for a fixed generator `G` built from the
//! truncated ladder operators, so `U` is exactly unitary on the truncated
//! space and `∂U/∂t = G·U` holds exactly. Conventions (Heisenberg picture,
//! `U†·O·U`):
//!
//! | gate | generator `G` | action |
//! |------|---------------|--------|
//! | `D(α)` | `α a† − α* a` | `x̂ → x̂ + √2 Re α`, `p̂ → p̂ + √2 Im α` |
//! | `R(φ)` | `−i n̂` | `x̂ → cos φ x̂ + sin φ p̂` |
//! | `S(r)` | `(a² − a†²)/2` | `x̂ → e^{−r} x̂`, `p̂ → e^{r} p̂` |
//! | `BS(θ)` | `a₁a₂† − a₁†a₂` | `x̂₁ → cos θ x̂₁ − sin θ x̂₂` |
//! | `K(κ)` | `i n̂²` | diagonal phases `e^{iκk²}` |

use alloc::vec::Vec;

use crate::error::Result;
use crate::C64;

use super::{check_cutoff, ladder_matrices, OperatorMatrix};

/// `α a† − α* a`.
pub fn displacement_generator(alpha: C64, cutoff: usize) -> Result<OperatorMatrix> {
    let (a, a_dag) = ladder_matrices(cutoff)?;
    Ok(a_dag.scale(alpha).sub(&a.scale(alpha.conj())))
}

pub fn displacement_gate(alpha: C64, cutoff: usize) -> Result<OperatorMatrix> {
    Ok(displacement_generator(alpha, cutoff)?.exp())
}

/// `−i n̂`, the generator of `R(φ) = exp(−iφn̂)`.
pub fn rotation_generator(cutoff: usize) -> Result<OperatorMatrix> {
    check_cutoff(cutoff)?;
    let diag: Vec<C64> = (0..cutoff).map(|k| C64::new(0.0, -(k as f64))).collect();
    Ok(OperatorMatrix::from_diagonal(&diag))
}

/// Diagonal `exp(−iφk)`, evaluated in closed form.
pub fn rotation_gate(phi: f64, cutoff: usize) -> Result<OperatorMatrix> {
    check_cutoff(cutoff)?;
    let diag: Vec<C64> = (0..cutoff)
        .map(|k| C64::from_polar(1.0, -phi * k as f64))
        .collect();
    Ok(OperatorMatrix::from_diagonal(&diag))
}

/// `(a·a − a†·a†)/2`.
pub fn squeeze_generator(cutoff: usize) -> Result<OperatorMatrix> {
    let (a, a_dag) = ladder_matrices(cutoff)?;
    Ok(a.matmul(&a)
        .sub(&a_dag.matmul(&a_dag))
        .scale(C64::new(0.5, 0.0)))
}

pub fn squeeze_gate(r: f64, cutoff: usize) -> Result<OperatorMatrix> {
    Ok(squeeze_generator(cutoff)?.scale(C64::new(r, 0.0)).exp())
}

/// `a₁a₂† − a₁†a₂` on the two-mode space, mode 1 on the slow index.
pub fn beamsplitter_generator(cutoff: usize) -> Result<OperatorMatrix> {
    let (a, a_dag) = ladder_matrices(cutoff)?;
    Ok(a.kron(&a_dag).sub(&a_dag.kron(&a)))
}

/// Two-mode beamsplitter of dimension `D²`.
///
/// The generator commutes with `n̂₁ + n̂₂`, so the exponential is taken block
/// by block over total occupancy. Entries outside those blocks are exactly
/// zero.
pub fn beamsplitter_gate(theta: f64, cutoff: usize) -> Result<OperatorMatrix> {
    let g = beamsplitter_generator(cutoff)?.scale(C64::new(theta, 0.0));
    let d = cutoff;
    let mut u = OperatorMatrix::zeros(d * d);
    for total in 0..=2 * (d - 1) {
        let block: Vec<usize> = (0..d)
            .filter(|&n1| total >= n1 && total - n1 < d)
            .map(|n1| n1 * d + (total - n1))
            .collect();
        let e = g.restrict(&block).exp();
        for (a, &i) in block.iter().enumerate() {
            for (b, &j) in block.iter().enumerate() {
                u[(i, j)] = e[(a, b)];
            }
        }
    }
    Ok(u)
}

/// `i n̂²`, the generator of `K(κ) = exp(iκn̂²)`.
pub fn kerr_generator(cutoff: usize) -> Result<OperatorMatrix> {
    check_cutoff(cutoff)?;
    let diag: Vec<C64> = (0..cutoff)
        .map(|k| C64::new(0.0, (k * k) as f64))
        .collect();
    Ok(OperatorMatrix::from_diagonal(&diag))
}

/// Diagonal `exp(iκk²)`.
pub fn kerr_gate(kappa: f64, cutoff: usize) -> Result<OperatorMatrix> {
    check_cutoff(cutoff)?;
    let diag: Vec<C64> = (0..cutoff)
        .map(|k| C64::from_polar(1.0, kappa * (k * k) as f64))
        .collect();
    Ok(OperatorMatrix::from_diagonal(&diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{number_matrix, quadrature_matrices};
    use core::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    /// `⟨0|U† O U|0⟩` for a single-mode gate.
    fn vacuum_heisenberg(u: &OperatorMatrix, o: &OperatorMatrix) -> C64 {
        u.adjoint().matmul(o).matmul(u)[(0, 0)]
    }

    #[test]
    fn zero_parameters_give_identity() {
        let id = OperatorMatrix::identity(6);
        assert!(displacement_gate(re(0.0), 6).unwrap().max_abs_diff(&id) == 0.0);
        assert_eq!(rotation_gate(0.0, 6).unwrap(), id);
        assert!(squeeze_gate(0.0, 6).unwrap().max_abs_diff(&id) == 0.0);
        assert_eq!(kerr_gate(0.0, 6).unwrap(), id);
        let id2 = OperatorMatrix::identity(36);
        assert!(beamsplitter_gate(0.0, 6).unwrap().max_abs_diff(&id2) == 0.0);
    }

    #[test]
    fn displacement_shifts_quadratures() {
        let (x, p) = quadrature_matrices(10).unwrap();
        let u = displacement_gate(re(0.3), 10).unwrap();
        assert!((vacuum_heisenberg(&u, &x).re - 0.424_264_07).abs() < 1e-6);

        let u = displacement_gate(C64::new(0.3, 0.2), 10).unwrap();
        assert!((vacuum_heisenberg(&u, &p).re - 0.282_842_71).abs() < 1e-6);
        assert!((vacuum_heisenberg(&u, &x).re - SQRT_2 * 0.3).abs() < 1e-6);
    }

    #[test]
    fn coherent_state_photon_number() {
        let n = number_matrix(10).unwrap();
        let u = displacement_gate(re(0.3), 10).unwrap();
        assert!((vacuum_heisenberg(&u, &n).re - 0.09).abs() < 1e-8);
    }

    #[test]
    fn rotation_pi_alternates_sign() {
        let u = rotation_gate(PI, 4).unwrap();
        for (k, want) in [1.0, -1.0, 1.0, -1.0].iter().enumerate() {
            assert!((u[(k, k)] - re(*want)).norm() < 1e-15);
        }
    }

    #[test]
    fn rotation_heisenberg_action_is_exact() {
        let (x, p) = quadrature_matrices(12).unwrap();
        let phi: f64 = 0.7;
        let u = rotation_gate(phi, 12).unwrap();
        let lhs = u.adjoint().matmul(&x).matmul(&u);
        let rhs = x.scale(re(libm::cos(phi))).add(&p.scale(re(libm::sin(phi))));
        assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn rotation_closed_form_matches_generator_exponential() {
        let g = rotation_generator(10).unwrap().scale(re(1.3));
        assert!(g.exp().max_abs_diff(&rotation_gate(1.3, 10).unwrap()) < 1e-13);
        let g = kerr_generator(10).unwrap().scale(re(0.4));
        assert!(g.exp().max_abs_diff(&kerr_gate(0.4, 10).unwrap()) < 1e-12);
    }

    #[test]
    fn squeezing_scales_vacuum_variance() {
        let (x, _) = quadrature_matrices(20).unwrap();
        let x2 = x.matmul(&x);
        let u = squeeze_gate(0.5, 20).unwrap();
        let v = vacuum_heisenberg(&u, &x2).re;
        assert!((v - 0.183_939_72).abs() < 1e-4, "{v}");
        let u = squeeze_gate(-0.5, 20).unwrap();
        let v = vacuum_heisenberg(&u, &x2).re;
        assert!((v - 1.359_140_91).abs() < 1e-3, "{v}");
    }

    #[test]
    fn kerr_diagonal_phases() {
        let u = kerr_gate(0.1, 3).unwrap();
        let want = [re(1.0), C64::from_polar(1.0, 0.1), C64::from_polar(1.0, 0.4)];
        for (k, w) in want.iter().enumerate() {
            assert!((u[(k, k)] - w).norm() < 1e-15);
        }
    }

    /// Restricts a two-mode matrix to basis states with total occupancy ≤ `max_total`.
    fn restrict_total(m: &OperatorMatrix, d: usize, max_total: usize) -> OperatorMatrix {
        let idx: Vec<usize> = (0..d * d).filter(|i| i / d + i % d <= max_total).collect();
        m.restrict(&idx)
    }

    #[test]
    fn beamsplitter_quarter_turn_swaps_modes() {
        let d = 6;
        let (x, _) = quadrature_matrices(d).unwrap();
        let id = OperatorMatrix::identity(d);
        let (x1, x2) = (x.kron(&id), id.kron(&x));
        let u = beamsplitter_gate(FRAC_PI_2, d).unwrap();
        let ud = u.adjoint();
        let x1h = ud.matmul(&x1).matmul(&u);
        let x2h = ud.matmul(&x2).matmul(&u);
        let neg_x2 = x2.scale(re(-1.0));
        assert!(restrict_total(&x1h, d, d - 2).max_abs_diff(&restrict_total(&neg_x2, d, d - 2)) < 1e-12);
        assert!(restrict_total(&x2h, d, d - 2).max_abs_diff(&restrict_total(&x1, d, d - 2)) < 1e-12);
    }

    #[test]
    fn beamsplitter_conserves_total_photon_number() {
        let d = 6;
        let u = beamsplitter_gate(0.4, d).unwrap();
        for i in 0..d * d {
            for j in 0..d * d {
                if i / d + i % d != j / d + j % d {
                    assert!(u[(i, j)].norm() <= 1e-13);
                }
            }
        }
    }

    #[test]
    fn blockwise_beamsplitter_matches_full_exponential() {
        let d = 5;
        let full = beamsplitter_generator(d).unwrap().scale(re(0.9)).exp();
        assert!(full.max_abs_diff(&beamsplitter_gate(0.9, d).unwrap()) < 1e-13);
    }

    #[test]
    fn gates_reject_bad_cutoff() {
        assert!(displacement_gate(re(0.1), 1).is_err());
        assert!(rotation_gate(0.1, 1).is_err());
        assert!(squeeze_gate(0.1, 0).is_err());
        assert!(beamsplitter_gate(0.1, 1).is_err());
        assert!(kerr_gate(0.1, 1).is_err());
    }
}
