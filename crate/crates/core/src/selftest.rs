//! Built-in consistency checks for the gate library and the gradients.
//!
//! Gate constructors are taken from a [`GateSet`] so that deliberately broken
//! variants can be fed through the same checks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::cvqnn::{init_params, NetworkConfig};
use crate::error::Result;
use crate::fock::{self, commutator, ladder_matrices, quadrature_matrices, OperatorMatrix};
use crate::gradients::{evaluate_with_gradients, finite_difference_grad, DEFAULT_FD_STEP};
use crate::C64;

pub const UNITARITY_CUTOFF: usize = 10;
pub const UNITARITY_TOL: f64 = 1e-12;
pub const HEISENBERG_CUTOFF: usize = 20;
pub const HEISENBERG_TOL: f64 = 1e-6;
pub const COMPOSITION_TOL: f64 = 1e-12;
pub const GRADIENT_REL_TOL: f64 = 1e-5;
pub const GRADIENT_ABS_TOL: f64 = 1e-7;
pub const MIXED_REL_TOL: f64 = 1e-3;
pub const MIXED_ABS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Largest observed deviation.
    pub worst: f64,
    pub tolerance: f64,
}

impl CheckResult {
    fn new(name: impl Into<String>, worst: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: worst <= tolerance,
            worst,
            tolerance,
        }
    }
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

type Gate<P> = fn(P, usize) -> Result<OperatorMatrix>;

/// Gate constructors under test.
#[derive(Clone, Copy)]
pub struct GateSet {
    pub displacement: Gate<C64>,
    pub rotation: Gate<f64>,
    pub squeeze: Gate<f64>,
    pub beamsplitter: Gate<f64>,
    pub kerr: Gate<f64>,
}

impl Default for GateSet {
    fn default() -> Self {
        Self {
            displacement: fock::displacement_gate,
            rotation: fock::rotation_gate,
            squeeze: fock::squeeze_gate,
            beamsplitter: fock::beamsplitter_gate,
            kerr: fock::kerr_gate,
        }
    }
}

/// Which matrix entries a Heisenberg check compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Projection {
    /// Single-mode gates: keep Fock levels `0..=single_mode`.
    pub single_mode: usize,
    /// Beamsplitter: keep two-mode states with `n₁ + n₂ ≤ two_mode_total`.
    pub two_mode_total: usize,
}

impl Projection {
    /// Occupancies up to `D − 5` in every check.
    pub fn edge_margin(cutoff: usize) -> Self {
        Self {
            single_mode: cutoff - 5,
            two_mode_total: cutoff - 5,
        }
    }

    /// Setting used by [`gate_algebra_suite`]: single-mode gates on `|0⟩, |1⟩`,
    /// two-mode gates up to total occupancy `cutoff − 5`.
    pub fn selftest(cutoff: usize) -> Self {
        Self {
            single_mode: 1,
            two_mode_total: cutoff - 5,
        }
    }
}

const ALPHAS: [C64; 6] = [
    C64::new(0.0, 0.0),
    C64::new(0.3, 0.0),
    C64::new(0.0, -0.4),
    C64::new(0.25, 0.2),
    C64::new(-0.4, 0.3),
    C64::new(0.0, 0.5),
];
const ANGLES: [f64; 5] = [0.0, 0.3, FRAC_PI_2, 2.0, -PI];
const SQUEEZES: [f64; 6] = [0.0, 0.1, -0.2, 0.3, 0.5, -0.5];
const KERRS: [f64; 5] = [0.0, 0.1, -0.3, 1.0, PI];
const UNITARITY_ALPHAS: [C64; 5] = [
    C64::new(1.0, 0.0),
    C64::new(0.0, -1.0),
    C64::new(-0.6, 0.8),
    C64::new(0.5, 0.5),
    C64::new(-0.1, 0.0),
];
const UNITARITY_REALS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
const UNITARITY_ANGLES: [f64; 5] = [0.0, 1.0, PI, 4.5, 2.0 * PI];

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `max |(A − B)ᵢⱼ|` over the rows and columns in `keep`.
fn projected_diff(a: &OperatorMatrix, b: &OperatorMatrix, keep: &[usize]) -> f64 {
    a.restrict(keep).max_abs_diff(&b.restrict(keep))
}

fn heisenberg(u: &OperatorMatrix, o: &OperatorMatrix) -> OperatorMatrix {
    u.adjoint().matmul(o).matmul(u)
}

fn fold_max<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    it.into_iter().try_fold(0.0f64, |acc, v| Ok(acc.max(v?)))
}

/// Unitarity, Heisenberg action, Kerr diagonals, one-parameter composition
/// and the ladder commutator.
pub fn gate_algebra_suite(gates: &GateSet) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let d = UNITARITY_CUTOFF;

    out.push(CheckResult::new(
        "unitarity displacement",
        fold_max(
            ALPHAS
                .iter()
                .chain(&UNITARITY_ALPHAS)
                .map(|&a| Ok((gates.displacement)(a, d)?.unitarity_defect())),
        )?,
        UNITARITY_TOL,
    ));
    for (name, gate, grid) in [
        ("unitarity rotation", gates.rotation, &UNITARITY_ANGLES),
        ("unitarity squeeze", gates.squeeze, &UNITARITY_REALS),
        ("unitarity beamsplitter", gates.beamsplitter, &UNITARITY_ANGLES),
        ("unitarity kerr", gates.kerr, &UNITARITY_REALS),
    ] {
        let worst = fold_max(grid.iter().map(|&t| Ok(gate(t, d)?.unitarity_defect())))?;
        out.push(CheckResult::new(name, worst, UNITARITY_TOL));
    }

    out.extend(heisenberg_checks(gates, HEISENBERG_CUTOFF, Projection::selftest(HEISENBERG_CUTOFF))?);
    out.push(kerr_diagonal_check(gates)?);
    out.extend(composition_checks(gates)?);

    let (a, a_dag) = ladder_matrices(d)?;
    let mut want = OperatorMatrix::identity(d);
    want[(d - 1, d - 1)] = c(-((d - 1) as f64));
    out.push(CheckResult::new(
        "commutator [a, a†]",
        commutator(&a, &a_dag).max_abs_diff(&want),
        1e-12,
    ));
    Ok(out)
}

/// `U†OU` against the ideal affine action for every Gaussian gate over a
/// parameter grid of magnitude at most 0.5, compared on the kept entries.
pub fn heisenberg_checks(gates: &GateSet, cutoff: usize, projection: Projection) -> Result<Vec<CheckResult>> {
    let d = cutoff;
    let keep: Vec<usize> = (0..=projection.single_mode.min(d - 1)).collect();
    let (x, p) = quadrature_matrices(d)?;
    let id = OperatorMatrix::identity(d);
    let mut out = Vec::new();

    let worst = fold_max(ALPHAS.iter().map(|&alpha| {
        let u = (gates.displacement)(alpha, d)?;
        let ex = x.add(&id.scale(c(SQRT_2 * alpha.re)));
        let ep = p.add(&id.scale(c(SQRT_2 * alpha.im)));
        Ok(projected_diff(&heisenberg(&u, &x), &ex, &keep).max(projected_diff(&heisenberg(&u, &p), &ep, &keep)))
    }))?;
    out.push(CheckResult::new("heisenberg displacement", worst, HEISENBERG_TOL));

    let worst = fold_max(ANGLES.iter().map(|&phi| {
        let u = (gates.rotation)(phi, d)?;
        let (cs, sn) = (libm::cos(phi), libm::sin(phi));
        let ex = x.scale(c(cs)).add(&p.scale(c(sn)));
        let ep = p.scale(c(cs)).sub(&x.scale(c(sn)));
        Ok(projected_diff(&heisenberg(&u, &x), &ex, &keep).max(projected_diff(&heisenberg(&u, &p), &ep, &keep)))
    }))?;
    out.push(CheckResult::new("heisenberg rotation", worst, HEISENBERG_TOL));

    let worst = fold_max(SQUEEZES.iter().map(|&r| {
        let u = (gates.squeeze)(r, d)?;
        let ex = x.scale(c(libm::exp(-r)));
        let ep = p.scale(c(libm::exp(r)));
        Ok(projected_diff(&heisenberg(&u, &x), &ex, &keep).max(projected_diff(&heisenberg(&u, &p), &ep, &keep)))
    }))?;
    out.push(CheckResult::new("heisenberg squeeze", worst, HEISENBERG_TOL));

    let keep2: Vec<usize> = (0..d * d)
        .filter(|&i| i / d + i % d <= projection.two_mode_total)
        .collect();
    let x1 = x.kron(&id);
    let x2 = id.kron(&x);
    let p1 = p.kron(&id);
    let p2 = id.kron(&p);
    let worst = fold_max(ANGLES.iter().map(|&theta| {
        let u = (gates.beamsplitter)(theta, d)?;
        let (cs, sn) = (libm::cos(theta), libm::sin(theta));
        let mut worst = 0.0f64;
        for (o1, o2) in [(&x1, &x2), (&p1, &p2)] {
            let e1 = o1.scale(c(cs)).sub(&o2.scale(c(sn)));
            let e2 = o1.scale(c(sn)).add(&o2.scale(c(cs)));
            worst = worst
                .max(projected_diff(&heisenberg(&u, o1), &e1, &keep2))
                .max(projected_diff(&heisenberg(&u, o2), &e2, &keep2));
        }
        Ok(worst)
    }))?;
    out.push(CheckResult::new("heisenberg beamsplitter", worst, HEISENBERG_TOL));
    Ok(out)
}

fn kerr_diagonal_check(gates: &GateSet) -> Result<CheckResult> {
    let d = UNITARITY_CUTOFF;
    let mut worst = 0.0f64;
    for &kappa in &KERRS {
        let u = (gates.kerr)(kappa, d)?;
        for i in 0..d {
            for j in 0..d {
                let want = if i == j {
                    C64::from_polar(1.0, kappa * (i * i) as f64)
                } else {
                    c(0.0)
                };
                worst = worst.max((u[(i, j)] - want).norm());
            }
        }
    }
    Ok(CheckResult::new("kerr diagonal", worst, 0.0))
}

fn composition_checks(gates: &GateSet) -> Result<Vec<CheckResult>> {
    let d = UNITARITY_CUTOFF;
    let mut out = Vec::new();
    let pairs = [(0.3, 0.2), (-0.1, 0.25), (1.1, -0.4)];
    for (name, gate) in [
        ("composition rotation", gates.rotation),
        ("composition squeeze", gates.squeeze),
        ("composition beamsplitter", gates.beamsplitter),
        ("composition kerr", gates.kerr),
    ] {
        let worst = fold_max(
            pairs
                .iter()
                .map(|&(s, t)| Ok(gate(s, d)?.matmul(&gate(t, d)?).max_abs_diff(&gate(s + t, d)?))),
        )?;
        out.push(CheckResult::new(name, worst, COMPOSITION_TOL));
    }
    let worst = fold_max(pairs.iter().map(|&(s, t)| {
        let alpha = C64::new(0.0, 1.0) * c(0.7);
        let lhs = (gates.displacement)(alpha * c(s), d)?.matmul(&(gates.displacement)(alpha * c(t), d)?);
        Ok(lhs.max_abs_diff(&(gates.displacement)(alpha * c(s + t), d)?))
    }))?;
    out.push(CheckResult::new("composition displacement", worst, COMPOSITION_TOL));
    Ok(out)
}

pub const GRADIENT_INPUTS: [f64; 3] = [-1.0, 0.0, 0.7];

/// Analytic first and mixed derivatives against central finite differences
/// on the networks initialized with seeds `0..draws` (2 modes, 1 layer,
/// cutoff 10) at each of [`GRADIENT_INPUTS`].
pub fn gradient_suite(draws: u64) -> Result<Vec<CheckResult>> {
    let config = NetworkConfig::new(2, 1, 10)?;
    let mut first = 0.0f64;
    let mut mixed = 0.0f64;
    for (seed, &x) in (0..draws).flat_map(|s| GRADIENT_INPUTS.iter().map(move |x| (s, x))) {
        let params = init_params(&config, seed);
        let a = evaluate_with_gradients(x, &params, &config)?;
        let f = finite_difference_grad(x, &params, &config, DEFAULT_FD_STEP)?;
        first = first.max(scaled_err(a.dy_dx, f.dy_dx, GRADIENT_REL_TOL, GRADIENT_ABS_TOL));
        for j in 0..a.dy_dtheta.len() {
            first = first.max(scaled_err(a.dy_dtheta[j], f.dy_dtheta[j], GRADIENT_REL_TOL, GRADIENT_ABS_TOL));
            mixed = mixed.max(scaled_err(a.d2y_dxdtheta[j], f.d2y_dxdtheta[j], MIXED_REL_TOL, MIXED_ABS_TOL));
        }
    }
    Ok(alloc::vec![
        CheckResult::new(format!("gradient first order, error/tol ({draws} draws)"), first, 1.0),
        CheckResult::new(format!("gradient mixed order, error/tol ({draws} draws)"), mixed, 1.0),
    ])
}

/// `|a − b| / max(rel·|b|, abs)`; at most 1 when within tolerance.
fn scaled_err(a: f64, b: f64, rel: f64, abs: f64) -> f64 {
    (a - b).abs() / abs.max(rel * b.abs())
}

/// Gate algebra with the library gates followed by 20 gradient draws.
pub fn run_all() -> Result<Vec<CheckResult>> {
    let mut out = gate_algebra_suite(&GateSet::default())?;
    out.extend(gradient_suite(20)?);
    Ok(out)
}
