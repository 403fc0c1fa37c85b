//! Benchmark initial value problems and a classical RK4 reference solver.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ode::{CollocationGrid, IVProblem};

/// `y' = −2xy`, `y(0) = 1` on `[−1, 1]`; solution `e^{−x²}`.
pub fn linear_problem() -> IVProblem {
    IVProblem {
        name: "linear",
        rhs: |x, y| -2.0 * x * y,
        rhs_dy: |x, _| -2.0 * x,
        x0: 0.0,
        y0: 1.0,
        domain: (-1.0, 1.0),
        exact: Some(|x| libm::exp(-x * x)),
    }
}

/// Riccati equation `y' = x² + y² − 1`, `y(0) = 0` on `[−1, 1]`. No closed
/// form is used; compare against [`rk4_solve`].
pub fn riccati_problem() -> IVProblem {
    IVProblem {
        name: "riccati",
        rhs: |x, y| x * x + y * y - 1.0,
        rhs_dy: |_, y| 2.0 * y,
        x0: 0.0,
        y0: 0.0,
        domain: (-1.0, 1.0),
        exact: None,
    }
}

/// `y' = −2y`, `y(0) = 1/2` on `[0, 1]`; solution `e^{−2x}/2`.
pub fn stiff_problem() -> IVProblem {
    IVProblem {
        name: "stiff",
        rhs: |_, y| -2.0 * y,
        rhs_dy: |_, _| -2.0,
        x0: 0.0,
        y0: 0.5,
        domain: (0.0, 1.0),
        exact: Some(|x| 0.5 * libm::exp(-2.0 * x)),
    }
}

/// Looks a problem up by name.
pub fn problem_by_name(name: &str) -> Option<IVProblem> {
    match name {
        "linear" => Some(linear_problem()),
        "riccati" => Some(riccati_problem()),
        "stiff" => Some(stiff_problem()),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMethod {
    Analytic,
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub method: ReferenceMethod,
}

impl ReferenceSolution {
    /// Exact solution on the grid, when the problem has one.
    pub fn analytic(problem: &IVProblem, grid: &CollocationGrid) -> Option<Self> {
        let exact = problem.exact?;
        Some(Self {
            xs: grid.points().to_vec(),
            ys: grid.points().iter().map(|&x| exact(x)).collect(),
            method: ReferenceMethod::Analytic,
        })
    }

    /// `max |ys − other|`.
    pub fn max_abs_error(&self, other: &[f64]) -> f64 {
        self.ys
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Analytic values if available, RK4 with `substeps` otherwise.
pub fn reference_solution(problem: &IVProblem, grid: &CollocationGrid, substeps: usize) -> Result<ReferenceSolution> {
    match ReferenceSolution::analytic(problem, grid) {
        Some(r) => Ok(r),
        None => rk4_solve(problem, grid, substeps),
    }
}

fn rk4_step(f: fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
    let k1 = f(x, y);
    let k2 = f(x + 0.5 * h, y + 0.5 * h * k1);
    let k3 = f(x + 0.5 * h, y + 0.5 * h * k2);
    let k4 = f(x + h, y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Classical fourth-order Runge-Kutta from `x₀` outward to every grid point.
///
/// Points right of `x₀` are reached in ascending order and points left of it
/// in descending order, each segment between consecutive stops split into
/// `substeps` equal steps. The first segment of each direction starts at `x₀`
/// itself, which need not be a grid point.
pub fn rk4_solve(problem: &IVProblem, grid: &CollocationGrid, substeps: usize) -> Result<ReferenceSolution> {
    if substeps == 0 {
        return Err(Error::InvalidConfig("substeps must be at least 1"));
    }
    let xs = grid.points();
    let mut ys = alloc::vec![0.0; xs.len()];
    let first_right = xs.partition_point(|&x| x < problem.x0);

    let mut march = |indices: &mut dyn Iterator<Item = usize>| -> Result<()> {
        let (mut x, mut y) = (problem.x0, problem.y0);
        for i in indices {
            let target = xs[i];
            let h = (target - x) / substeps as f64;
            if h != 0.0 {
                for s in 0..substeps {
                    y = rk4_step(problem.rhs, x + s as f64 * h, y, h);
                    if !y.is_finite() {
                        return Err(Error::BlowUp { x: x + (s + 1) as f64 * h });
                    }
                }
            }
            x = target;
            ys[i] = y;
        }
        Ok(())
    };
    march(&mut (first_right..xs.len()))?;
    march(&mut (0..first_right).rev())?;
    Ok(ReferenceSolution {
        xs: xs.to_vec(),
        ys,
        method: ReferenceMethod::Rk4,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::make_grid;

    /// High-accuracy value of the Riccati solution at x = 0.5 from an
    /// independent adaptive 8th-order integrator (rtol 1e−13).
    const RICCATI_AT_HALF: f64 = -0.424_030_835_987_377_8;

    #[test]
    fn problem_definitions() {
        let lin = linear_problem();
        assert_eq!((lin.exact.unwrap())(0.0), 1.0);
        assert!(((lin.exact.unwrap())(1.0) - 0.367_879_44).abs() < 1e-8);
        let x = 0.5;
        let y = (lin.exact.unwrap())(x);
        assert!(lin.residual(x, y, -2.0 * x * y).abs() < 1e-14);

        let ric = riccati_problem();
        assert_eq!((ric.rhs)(0.0, 0.0), -1.0);
        assert_eq!((ric.rhs)(1.0, 0.0), 0.0);
        assert!(ric.exact.is_none());

        let st = stiff_problem();
        assert_eq!((st.exact.unwrap())(0.0), 0.5);
        assert!(((st.exact.unwrap())(1.0) - 0.067_667_64).abs() < 1e-8);
        for x in [0.0, 0.3, 0.9] {
            let y = (st.exact.unwrap())(x);
            assert!(st.residual(x, y, -2.0 * y).abs() < 1e-14);
        }
        for p in [lin, ric, st] {
            p.validate().unwrap();
            assert_eq!(problem_by_name(p.name).map(|q| q.name), Some(p.name));
        }
        assert!(problem_by_name("heat").is_none());
    }

    #[test]
    fn rk4_matches_analytic_solutions() {
        for p in [linear_problem(), stiff_problem()] {
            let grid = make_grid(p.domain, 20).unwrap();
            let r = rk4_solve(&p, &grid, 100).unwrap();
            let exact = ReferenceSolution::analytic(&p, &grid).unwrap();
            assert!(exact.max_abs_error(&r.ys) <= 1e-10, "{}", p.name);
            assert_eq!(r.method, ReferenceMethod::Rk4);
        }
    }

    #[test]
    fn riccati_reference_value() {
        let p = riccati_problem();
        let grid = make_grid(p.domain, 5).unwrap();
        assert_eq!(grid.points()[3], 0.5);
        // step 1e-4 and 5e-5 over a segment of length 0.5
        let coarse = rk4_solve(&p, &grid, 5_000).unwrap().ys[3];
        let fine = rk4_solve(&p, &grid, 10_000).unwrap().ys[3];
        assert!((coarse - fine).abs() <= 1e-9);
        assert!((fine - RICCATI_AT_HALF).abs() <= 1e-10);
        // odd symmetry y(−x) = −y(x)
        let r = rk4_solve(&p, &grid, 5_000).unwrap();
        assert!((r.ys[1] + r.ys[3]).abs() < 1e-12);
    }

    #[test]
    fn directions_agree_with_single_pass() {
        // Stiff problem on [0, 1] integrates in one rightward pass. On
        // [−1, 1] with x₀ = 0 the right half is reached the same way.
        let one_sided = stiff_problem();
        let two_sided = stiff_problem().with_domain(-1.0, 1.0).unwrap();
        let g1 = make_grid(one_sided.domain, 11).unwrap();
        let g2 = make_grid(two_sided.domain, 21).unwrap();
        let r1 = rk4_solve(&one_sided, &g1, 20).unwrap();
        let r2 = rk4_solve(&two_sided, &g2, 20).unwrap();
        for i in 0..11 {
            assert!((g1.points()[i] - g2.points()[i + 10]).abs() < 1e-15);
            assert!((r1.ys[i] - r2.ys[i + 10]).abs() <= 1e-12);
        }
        // and the left half is accurate too
        let exact = ReferenceSolution::analytic(&two_sided, &g2).unwrap();
        assert!(exact.max_abs_error(&r2.ys) < 1e-9);
    }

    #[test]
    fn fourth_order_convergence() {
        let p = linear_problem();
        let grid = make_grid(p.domain, 5).unwrap();
        let exact = ReferenceSolution::analytic(&p, &grid).unwrap();
        let errors: alloc::vec::Vec<f64> = [10, 20, 40, 80]
            .iter()
            .map(|&s| exact.max_abs_error(&rk4_solve(&p, &grid, s).unwrap().ys))
            .collect();
        for w in errors.windows(2) {
            let slope = libm::log2(w[0] / w[1]);
            assert!((slope - 4.0).abs() <= 0.2, "{errors:?}");
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let p = IVProblem {
            rhs: |_, y| y * y,
            y0: 1.0,
            ..riccati_problem()
        }
        .with_domain(0.0, 2.0)
        .unwrap();
        let grid = make_grid(p.domain, 3).unwrap();
        match rk4_solve(&p, &grid, 1000) {
            Err(Error::BlowUp { x }) => assert!(x > 1.0 && x <= 2.0),
            other => panic!("{other:?}"),
        }
        assert!(rk4_solve(&p, &grid, 0).is_err());
    }
}
