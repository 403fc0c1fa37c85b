//! Collocation cost for `y' = f(x, y), y(x₀) = y₀`, its parameter gradient,
//! Adam, and the training loop.
//!
//! The cost is
//!
//! ```text
//! C = (y(x₀) − y₀)² + Σᵢ (y'(xᵢ) − f(xᵢ, y(xᵢ)))²
//! ```
//!
//! and its gradient needs `∂y/∂θ` at every point plus the mixed `∂²y/∂θ∂x`
//! from the residual term:
//!
//! ```text
//! ∂C/∂θ = 2(y(x₀) − y₀)·∂y(x₀)/∂θ
//!       + Σᵢ 2(y'(xᵢ) − f)·(∂²y(xᵢ)/∂θ∂x − ∂f/∂y·∂y(xᵢ)/∂θ)
//! ```

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::cvqnn::{init_params, param_count, Circuit, NetworkConfig, NetworkParams};
use crate::error::{Error, Result};
use crate::gradients::GradientBundle;

/// Loss above which training is considered diverged.
pub const DIVERGENCE_LOSS: f64 = 1e6;

/// Initial value problem on a closed interval.
#[derive(Debug, Clone, Copy)]
pub struct IVProblem {
    pub name: &'static str,
    pub rhs: fn(f64, f64) -> f64,
    /// `∂f/∂y`.
    pub rhs_dy: fn(f64, f64) -> f64,
    pub x0: f64,
    pub y0: f64,
    pub domain: (f64, f64),
    pub exact: Option<fn(f64) -> f64>,
}

impl IVProblem {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.domain;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidConfig("domain must be a finite interval with a < b"));
        }
        if !(a <= self.x0 && self.x0 <= b) {
            return Err(Error::InvalidConfig("x0 must lie inside the domain"));
        }
        if !self.y0.is_finite() {
            return Err(Error::InvalidConfig("y0 must be finite"));
        }
        Ok(())
    }

    pub fn with_domain(self, a: f64, b: f64) -> Result<Self> {
        let p = Self {
            domain: (a, b),
            ..self
        };
        p.validate()?;
        Ok(p)
    }

    /// `y'(x) − f(x, y(x))`.
    pub fn residual(&self, x: f64, y: f64, dy: f64) -> f64 {
        dy - (self.rhs)(x, y)
    }
}

/// Evenly spaced collocation points, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationGrid {
    points: Vec<f64>,
}

impl CollocationGrid {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `xᵢ = a + i·(b − a)/(N − 1)`.
pub fn make_grid(domain: (f64, f64), n: usize) -> Result<CollocationGrid> {
    if n < 2 {
        return Err(Error::InvalidConfig("grid needs at least 2 points"));
    }
    let (a, b) = domain;
    if !(a < b) {
        return Err(Error::InvalidConfig("grid domain must satisfy a < b"));
    }
    let h = (b - a) / (n - 1) as f64;
    let mut points: Vec<f64> = (0..n).map(|i| a + i as f64 * h).collect();
    points[n - 1] = b;
    Ok(CollocationGrid { points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    /// Added to `√v̂` in the update denominator.
    pub adam_eps: f64,
    pub max_steps: usize,
    pub seed: u64,
    pub grid_size: usize,
    /// Steps at which the grid values of the current parameters are kept.
    pub snapshot_steps: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.02,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-5,
            max_steps: 1000,
            seed: 0,
            grid_size: 20,
            snapshot_steps: vec![0, 20, 100, 999],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        // A zero learning rate is allowed: it freezes the parameters.
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig("learning_rate must be finite and non-negative"));
        }
        if !(self.adam_beta1 > 0.0 && self.adam_beta1 < 1.0) {
            return Err(Error::InvalidConfig("adam_beta1 must lie in (0, 1)"));
        }
        if !(self.adam_beta2 > 0.0 && self.adam_beta2 < 1.0) {
            return Err(Error::InvalidConfig("adam_beta2 must lie in (0, 1)"));
        }
        if !(self.adam_eps > 0.0) {
            return Err(Error::InvalidConfig("adam_eps must be positive"));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1"));
        }
        if self.grid_size < 2 {
            return Err(Error::InvalidConfig("grid_size must be at least 2"));
        }
        Ok(())
    }
}

/// Network values on the grid at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub ys: Vec<f64>,
}

/// Lowest-loss parameters seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct BestSnapshot {
    pub step: usize,
    pub loss: f64,
    pub params: NetworkParams,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub params: NetworkParams,
    /// First and second Adam moments, in flattened parameter order.
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    /// Completed optimizer steps.
    pub step: usize,
    /// `loss_history[k]` is the loss of the parameters before update `k`.
    pub loss_history: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub best: Option<BestSnapshot>,
}

impl TrainState {
    pub fn new(params: NetworkParams) -> Self {
        let m = params.len();
        Self {
            params,
            m: vec![0.0; m],
            v: vec![0.0; m],
            step: 0,
            loss_history: Vec::new(),
            snapshots: Vec::new(),
            best: None,
        }
    }
}

/// Cost for an arbitrary model given as `x ↦ (y(x), y'(x))`.
///
/// The initial-value term is evaluated once at the exact `x₀`, whether or not
/// `x₀` is a grid point; the residual sum runs over all grid points.
pub fn ode_loss<F>(y_fn: F, problem: &IVProblem, grid: &CollocationGrid) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let eval = |x: f64| -> Result<(f64, f64)> {
        let (y, dy) = y_fn(x);
        if y.is_finite() && dy.is_finite() {
            Ok((y, dy))
        } else {
            Err(Error::NonFiniteOutput { x })
        }
    };
    let (y0, _) = eval(problem.x0)?;
    let init = y0 - problem.y0;
    let mut loss = init * init;
    for &x in grid.points() {
        let (y, dy) = eval(x)?;
        let r = problem.residual(x, y, dy);
        loss += r * r;
    }
    Ok(loss)
}

/// Cost, gradient and grid values of one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LossEvaluation {
    pub loss: f64,
    pub grad: Vec<f64>,
    /// `y(xᵢ)` on the grid.
    pub grid_values: Vec<f64>,
}

/// Assembles the cost and its gradient from per-point derivative bundles.
pub fn evaluate_loss(circuit: &Circuit, problem: &IVProblem, grid: &CollocationGrid) -> Result<LossEvaluation> {
    let check = |x: f64, b: &GradientBundle| -> Result<()> {
        if b.y.is_finite() && b.dy_dx.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFiniteOutput { x })
        }
    };
    let at_x0 = circuit.gradients(problem.x0)?;
    check(problem.x0, &at_x0)?;
    let init = at_x0.y - problem.y0;
    let mut loss = init * init;
    let mut grad: Vec<f64> = at_x0.dy_dtheta.iter().map(|d| 2.0 * init * d).collect();
    let mut grid_values = Vec::with_capacity(grid.len());
    for &x in grid.points() {
        let b = circuit.gradients(x)?;
        check(x, &b)?;
        let r = problem.residual(x, b.y, b.dy_dx);
        let f_y = (problem.rhs_dy)(x, b.y);
        loss += r * r;
        for ((g, &dxt), &dt) in grad.iter_mut().zip(&b.d2y_dxdtheta).zip(&b.dy_dtheta) {
            *g += 2.0 * r * (dxt - f_y * dt);
        }
        grid_values.push(b.y);
    }
    Ok(LossEvaluation {
        loss,
        grad,
        grid_values,
    })
}

/// `(C, ∂C/∂θ)` for the network with `params`.
pub fn ode_loss_grad(
    params: &NetworkParams,
    problem: &IVProblem,
    grid: &CollocationGrid,
    config: &NetworkConfig,
) -> Result<(f64, Vec<f64>)> {
    let circuit = Circuit::new(params, config)?;
    let e = evaluate_loss(&circuit, problem, grid)?;
    Ok((e.loss, e.grad))
}

/// One Adam update with bias correction:
/// `θ ← θ − lr·m̂/(√v̂ + ε)`.
pub fn adam_step(state: &mut TrainState, grad: &[f64], config: &TrainConfig) -> Result<()> {
    let n = state.m.len();
    if grad.len() != n {
        return Err(Error::LengthMismatch {
            what: "gradient",
            expected: n,
            found: grad.len(),
        });
    }
    if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient { index });
    }
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    let t = (state.step + 1) as i32;
    let c1 = 1.0 - libm::pow(b1, t as f64);
    let c2 = 1.0 - libm::pow(b2, t as f64);
    let mut flat = state.params.flatten();
    for i in 0..n {
        let g = grad[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        flat[i] -= config.learning_rate * m_hat / (libm::sqrt(v_hat) + config.adam_eps);
    }
    state.params.assign_flat(&flat);
    state.step += 1;
    Ok(())
}

/// Why training stopped early.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    /// Invalid input; nothing was trained.
    Invalid(Error),
    /// Loss became non-finite or exceeded [`DIVERGENCE_LOSS`], or an
    /// evaluation failed mid-run. `state` holds everything up to the last
    /// good step, including the best-so-far snapshot.
    Diverged {
        step: usize,
        loss: f64,
        cause: Option<Error>,
        state: Box<TrainState>,
    },
}

impl core::fmt::Display for TrainError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TrainError::Invalid(e) => write!(f, "{e}"),
            TrainError::Diverged { step, loss, cause: None, .. } => {
                write!(f, "training diverged at step {step} (loss {loss:e})")
            }
            TrainError::Diverged { step, cause: Some(e), .. } => {
                write!(f, "training failed at step {step}: {e}")
            }
        }
    }
}

impl core::error::Error for TrainError {}

impl From<Error> for TrainError {
    fn from(e: Error) -> Self {
        TrainError::Invalid(e)
    }
}

/// Trains from `init_params(seed)`; see [`train_with`].
pub fn train(
    problem: &IVProblem,
    net_config: &NetworkConfig,
    train_config: &TrainConfig,
) -> core::result::Result<TrainState, TrainError> {
    train_with(problem, net_config, train_config, |_, _| {})
}

/// Runs `max_steps` rounds of (cost and gradient, Adam update).
///
/// `observe(state, loss)` runs after each loss evaluation, before the update.
pub fn train_with<F>(
    problem: &IVProblem,
    net_config: &NetworkConfig,
    train_config: &TrainConfig,
    mut observe: F,
) -> core::result::Result<TrainState, TrainError>
where
    F: FnMut(&TrainState, f64),
{
    problem.validate()?;
    net_config.validate()?;
    train_config.validate()?;
    let grid = make_grid(problem.domain, train_config.grid_size)?;
    let params = init_params(net_config, train_config.seed);
    debug_assert_eq!(params.len(), param_count(net_config));
    let mut state = TrainState::new(params);

    for step in 0..train_config.max_steps {
        let diverged = |state: TrainState, loss: f64, cause: Option<Error>| TrainError::Diverged {
            step,
            loss,
            cause,
            state: Box::new(state),
        };
        let eval = Circuit::new(&state.params, net_config)
            .and_then(|c| evaluate_loss(&c, problem, &grid));
        let eval = match eval {
            Ok(e) => e,
            Err(e) => return Err(diverged(state, f64::NAN, Some(e))),
        };
        if !eval.loss.is_finite() || eval.loss > DIVERGENCE_LOSS {
            return Err(diverged(state, eval.loss, None));
        }

        state.loss_history.push(eval.loss);
        if train_config.snapshot_steps.contains(&step) {
            state.snapshots.push(Snapshot {
                step,
                ys: eval.grid_values.clone(),
            });
        }
        if state.best.as_ref().is_none_or(|b| eval.loss < b.loss) {
            state.best = Some(BestSnapshot {
                step,
                loss: eval.loss,
                params: state.params.clone(),
                ys: eval.grid_values,
            });
        }
        observe(&state, eval.loss);

        if let Err(e) = adam_step(&mut state, &eval.grad, train_config) {
            return Err(diverged(state, eval.loss, Some(e)));
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvqnn::forward;
    use crate::problems::{linear_problem, stiff_problem};
    use core::f64::consts::SQRT_2;

    #[test]
    fn grids() {
        let g = make_grid((-1.0, 1.0), 20).unwrap();
        assert_eq!(g.points()[0], -1.0);
        assert_eq!(g.points()[19], 1.0);
        for w in g.points().windows(2) {
            assert!((w[1] - w[0] - 2.0 / 19.0).abs() < 1e-12);
        }
        assert!((2.0f64 / 19.0 - 0.105_263_16).abs() < 1e-8);
        assert_eq!(make_grid((0.0, 1.0), 2).unwrap().points(), &[0.0, 1.0]);
        assert_eq!(make_grid((-1.0, 1.0), 3).unwrap().points(), &[-1.0, 0.0, 1.0]);
        assert!(make_grid((0.0, 1.0), 1).is_err());
        assert!(make_grid((1.0, 0.0), 5).is_err());
    }

    #[test]
    fn loss_of_exact_and_zero_models() {
        let lin = linear_problem();
        let grid = make_grid(lin.domain, 20).unwrap();
        let exact = |x: f64| {
            let y = libm::exp(-x * x);
            (y, -2.0 * x * y)
        };
        assert!(ode_loss(exact, &lin, &grid).unwrap() < 1e-12);
        assert_eq!(ode_loss(|_| (0.0, 0.0), &lin, &grid).unwrap(), 1.0);

        let stiff = stiff_problem();
        let grid = make_grid(stiff.domain, 20).unwrap();
        assert_eq!(ode_loss(|_| (0.0, 0.0), &stiff, &grid).unwrap(), 0.25);
    }

    #[test]
    fn loss_reports_non_finite_point() {
        let lin = linear_problem();
        let grid = make_grid(lin.domain, 3).unwrap();
        let err = ode_loss(|x| if x > 0.5 { (f64::NAN, 0.0) } else { (0.0, 0.0) }, &lin, &grid);
        assert_eq!(err.unwrap_err(), Error::NonFiniteOutput { x: 1.0 });
    }

    #[test]
    fn network_loss_matches_generic_loss() {
        let lin = linear_problem();
        let grid = make_grid(lin.domain, 20).unwrap();
        let c = NetworkConfig::new(2, 1, 10).unwrap();
        let p = init_params(&c, 0);
        let circuit = Circuit::new(&p, &c).unwrap();
        let e = evaluate_loss(&circuit, &lin, &grid).unwrap();
        let generic = ode_loss(
            |x| {
                let b = circuit.gradients(x).unwrap();
                (b.y, b.dy_dx)
            },
            &lin,
            &grid,
        )
        .unwrap();
        assert!((e.loss - generic).abs() < 1e-12);
        for (i, &x) in grid.points().iter().enumerate() {
            assert!((e.grid_values[i] - forward(x, &p, &c).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_network_closed_form() {
        // Cutoff 20 makes the truncated encoding exact to ~1e−15.
        // y = 2√2·x, y' = 2√2. Initial term (0 − 1)², residuals 2√2 + 2x·2√2x.
        let lin = linear_problem();
        let grid = make_grid(lin.domain, 20).unwrap();
        let c = NetworkConfig::new(2, 2, 20).unwrap();
        let (loss, grad) = ode_loss_grad(&NetworkParams::zeros(&c), &lin, &grid, &c).unwrap();
        let k = 2.0 * SQRT_2;
        let want: f64 = 1.0
            + grid
                .points()
                .iter()
                .map(|&x| {
                    let r = k + 2.0 * x * k * x;
                    r * r
                })
                .sum::<f64>();
        assert!((loss - want).abs() < 1e-6 * want, "{loss} vs {want}");
        // ∂y/∂α_k = √2, ∂²y/∂x∂α_k = 0, ∂f/∂y = −2x:
        // ∂C/∂α = 2(0 − 1)√2 + Σ 2 rᵢ (0 + 2xᵢ√2).
        let dalpha: f64 = -2.0 * SQRT_2
            + grid
                .points()
                .iter()
                .map(|&x| 2.0 * (k + 2.0 * x * k * x) * 2.0 * x * SQRT_2)
                .sum::<f64>();
        for j in [0, 1, 12, 13] {
            assert!((grad[j] - dalpha).abs() < 1e-6, "{j}: {} vs {dalpha}", grad[j]);
        }
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let c = NetworkConfig::new(2, 1, 4).unwrap();
        let p = init_params(&c, 1);
        let before = p.flatten();
        let mut state = TrainState::new(p);
        let grad: Vec<f64> = (0..12).map(|i| if i % 2 == 0 { 0.3 + i as f64 } else { -2.0 }).collect();
        let tc = TrainConfig::default();
        adam_step(&mut state, &grad, &tc).unwrap();
        let after = state.params.flatten();
        for i in 0..12 {
            let delta = after[i] - before[i];
            let want = -tc.learning_rate * grad[i].signum();
            assert!((delta - want).abs() <= 0.01 * tc.learning_rate, "{i}: {delta}");
        }
        assert_eq!(state.step, 1);
    }

    #[test]
    fn adam_zero_gradient_and_huge_eps() {
        let c = NetworkConfig::new(2, 1, 4).unwrap();
        let p = init_params(&c, 1);
        let mut state = TrainState::new(p.clone());
        let tc = TrainConfig::default();
        for _ in 0..10 {
            adam_step(&mut state, &[0.0; 12], &tc).unwrap();
        }
        assert_eq!(state.params, p);

        let mut state = TrainState::new(p.clone());
        let tc = TrainConfig {
            adam_eps: 1e12,
            ..TrainConfig::default()
        };
        adam_step(&mut state, &[1.0; 12], &tc).unwrap();
        let moved: f64 = state
            .params
            .flatten()
            .iter()
            .zip(p.flatten())
            .map(|(a, b)| (a - b).abs())
            .sum();
        assert!(moved < 1e-12);
    }

    #[test]
    fn adam_rejects_bad_gradients() {
        let c = NetworkConfig::new(1, 1, 4).unwrap();
        let mut state = TrainState::new(init_params(&c, 1));
        let tc = TrainConfig::default();
        assert_eq!(
            adam_step(&mut state, &[0.0, f64::NAN, 0.0, 0.0, 0.0], &tc).unwrap_err(),
            Error::NonFiniteGradient { index: 1 }
        );
        assert!(adam_step(&mut state, &[0.0; 4], &tc).is_err());
    }

    #[test]
    fn zero_learning_rate_freezes_loss() {
        let lin = linear_problem();
        let c = NetworkConfig::new(1, 1, 6).unwrap();
        let tc = TrainConfig {
            learning_rate: 0.0,
            max_steps: 4,
            grid_size: 5,
            ..TrainConfig::default()
        };
        let s = train(&lin, &c, &tc).unwrap();
        assert_eq!(s.loss_history.len(), 4);
        assert!(s.loss_history.iter().all(|&l| l == s.loss_history[0]));
    }

    #[test]
    fn single_step_training() {
        let lin = linear_problem();
        let c = NetworkConfig::new(1, 1, 6).unwrap();
        let tc = TrainConfig {
            max_steps: 1,
            grid_size: 5,
            ..TrainConfig::default()
        };
        let s = train(&lin, &c, &tc).unwrap();
        assert_eq!(s.loss_history.len(), 1);
        assert_eq!(s.step, 1);
        assert_eq!(s.snapshots.len(), 1);
        assert_eq!(s.best.as_ref().unwrap().step, 0);
    }

    #[test]
    fn invalid_train_config() {
        let lin = linear_problem();
        let c = NetworkConfig::new(1, 1, 6).unwrap();
        for tc in [
            TrainConfig { max_steps: 0, ..TrainConfig::default() },
            TrainConfig { grid_size: 1, ..TrainConfig::default() },
            TrainConfig { adam_eps: 0.0, ..TrainConfig::default() },
            TrainConfig { adam_beta1: 1.0, ..TrainConfig::default() },
            TrainConfig { learning_rate: -0.1, ..TrainConfig::default() },
        ] {
            assert!(matches!(train(&lin, &c, &tc), Err(TrainError::Invalid(_))));
        }
    }

    #[test]
    fn divergence_guard_aborts() {
        let c = NetworkConfig::new(1, 1, 6).unwrap();
        let tc = TrainConfig {
            max_steps: 5,
            grid_size: 5,
            ..TrainConfig::default()
        };
        let explosive = IVProblem {
            rhs: |_, y| 1e5 * (y + 1.0),
            ..linear_problem()
        };
        match train(&explosive, &c, &tc) {
            Err(TrainError::Diverged { state, step, loss, cause }) => {
                assert_eq!(step, 0);
                assert!(loss > DIVERGENCE_LOSS);
                assert!(cause.is_none());
                assert!(state.loss_history.is_empty());
            }
            other => panic!("{other:?}"),
        }
        let nan = IVProblem {
            rhs: |_, _| f64::NAN,
            ..linear_problem()
        };
        assert!(matches!(train(&nan, &c, &tc), Err(TrainError::Diverged { .. })));
    }
}
