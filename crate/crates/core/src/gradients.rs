//! Derivatives of the network output w.r.t. its input and every circuit
//! parameter, including the mixed second derivative `∂²y/∂θ∂x` that the
//! collocation cost gradient needs.
//!
//! The analytic path is forward mode. Each gate is `U(θ) = exp(θG)` with a
//! truncated generator, so `∂U/∂θ = G·U` exactly and the product rule carries
//! `(ψ, ∂ₓψ, ∂_θψ, ∂²_{xθ}ψ)` through the circuit, one scalar parameter at a
//! time. The input derivative is seeded at the encoding, where `x` enters
//! every mode's displacement at once.
//!
//! [`finite_difference_grad`] and [`parameter_shift_displacement`] are
//! independent routes used to check it.

use alloc::vec;
use alloc::vec::Vec;

use crate::cvqnn::{Circuit, CircuitOp, NetworkConfig, NetworkParams};
use crate::error::{Error, Result};
use crate::fock::{inner, inner_re};
use crate::C64;

/// Default step for [`finite_difference_grad`].
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// A state together with its derivatives w.r.t. the input `x` and one scalar
/// parameter `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub psi: Vec<C64>,
    pub d_x: Vec<C64>,
    pub d_theta: Vec<C64>,
    pub d_xtheta: Vec<C64>,
}

impl DualState {
    /// Encoded input state; the θ-derivatives start at zero.
    pub fn encoded(circuit: &Circuit, x: f64) -> Result<Self> {
        let psi = circuit.encoded(x, None)?;
        let d_x = circuit.encoding_tangent(&psi);
        let zero = vec![C64::new(0.0, 0.0); psi.len()];
        Ok(Self {
            psi,
            d_x,
            d_theta: zero.clone(),
            d_xtheta: zero,
        })
    }

    /// Pushes all four tensors through `op`. When `op` carries the
    /// differentiated parameter, adds `G·U·ψ` and `G·U·∂ₓψ`.
    pub(crate) fn push(&mut self, circuit: &Circuit, op: &CircuitOp, carries_theta: bool) {
        let mut scratch = vec![C64::new(0.0, 0.0); self.psi.len()];
        for t in [&mut self.psi, &mut self.d_x, &mut self.d_theta, &mut self.d_xtheta] {
            circuit.apply_op(op, t, &mut scratch);
        }
        if carries_theta {
            add_assign(&mut self.d_theta, &circuit.apply_generator(op, &self.psi));
            add_assign(&mut self.d_xtheta, &circuit.apply_generator(op, &self.d_x));
        }
    }

    /// `2Re⟨ψ|∂ₓψ⟩`, zero for a norm-preserving circuit.
    pub fn norm_drift_x(&self) -> f64 {
        2.0 * inner_re(&self.psi, &self.d_x)
    }

    /// `(z, ∂ₓz, ∂_θz, ∂²_{xθ}z)` for the summed readout `z = ⟨ψ|X|ψ⟩`.
    pub fn readout_derivatives(&self, circuit: &Circuit) -> (f64, f64, f64, f64) {
        let x_psi = circuit.position_sum(&self.psi);
        let x_dx = circuit.position_sum(&self.d_x);
        let z = inner_re(&self.psi, &x_psi);
        let z_x = 2.0 * inner_re(&x_psi, &self.d_x);
        let z_t = 2.0 * inner_re(&x_psi, &self.d_theta);
        let z_xt = 2.0 * (inner(&self.d_theta, &x_dx).re + inner_re(&x_psi, &self.d_xtheta));
        (z, z_x, z_t, z_xt)
    }
}

fn add_assign(acc: &mut [C64], v: &[C64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

/// Output value and its derivatives at one input point.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    pub y: f64,
    pub dy_dx: f64,
    pub dy_dtheta: Vec<f64>,
    pub d2y_dxdtheta: Vec<f64>,
}

/// Analytic `y`, `∂y/∂x`, `∂y/∂θ` and `∂²y/∂x∂θ` at `x`.
pub fn evaluate_with_gradients(
    x: f64,
    params: &NetworkParams,
    config: &NetworkConfig,
) -> Result<GradientBundle> {
    Circuit::new(params, config)?.gradients(x)
}

impl Circuit {
    /// Forward-mode derivatives at `x`.
    ///
    /// `ψ` and `∂ₓψ` do not depend on which parameter is differentiated, so
    /// they are recorded once on a tape. For each parameter the θ-parts are
    /// seeded right after its gate and only they are pushed through the rest
    /// of the circuit.
    pub fn gradients(&self, x: f64) -> Result<GradientBundle> {
        let start = DualState::encoded(self, x)?;
        let mut tape_psi = Vec::with_capacity(self.ops.len() + 1);
        let mut tape_dx = Vec::with_capacity(self.ops.len() + 1);
        let (mut psi, mut dx) = (start.psi, start.d_x);
        let mut scratch = vec![C64::new(0.0, 0.0); self.dim()];
        for op in &self.ops {
            tape_psi.push(psi.clone());
            tape_dx.push(dx.clone());
            self.apply_op(op, &mut psi, &mut scratch);
            self.apply_op(op, &mut dx, &mut scratch);
        }

        let x_psi = self.position_sum(&psi);
        let x_dx = self.position_sum(&dx);
        let z = inner_re(&psi, &x_psi);
        let z_x = 2.0 * inner_re(&x_psi, &dx);

        let m = self.param_count();
        let mut z_theta = vec![0.0; m];
        let mut z_xtheta = vec![0.0; m];
        for (k, op) in self.ops.iter().enumerate() {
            // After the gate: ∂_θψ = G·U·ψ_k = G·ψ_{k+1}.
            let after_psi = tape_psi.get(k + 1).unwrap_or(&psi);
            let after_dx = tape_dx.get(k + 1).unwrap_or(&dx);
            let mut d_theta = self.apply_generator(op, after_psi);
            let mut d_xtheta = self.apply_generator(op, after_dx);
            for later in &self.ops[k + 1..] {
                self.apply_op(later, &mut d_theta, &mut scratch);
                self.apply_op(later, &mut d_xtheta, &mut scratch);
            }
            z_theta[op.param] = 2.0 * inner_re(&x_psi, &d_theta);
            z_xtheta[op.param] =
                2.0 * (inner(&d_theta, &x_dx).re + inner_re(&x_psi, &d_xtheta));
        }

        let (y, s1, s2) = self.config().activation.eval(z);
        Ok(GradientBundle {
            y,
            dy_dx: s1 * z_x,
            d2y_dxdtheta: z_theta
                .iter()
                .zip(&z_xtheta)
                .map(|(&zt, &zxt)| s2 * z_x * zt + s1 * zxt)
                .collect(),
            dy_dtheta: z_theta.iter().map(|&zt| s1 * zt).collect(),
        })
    }

    /// Full forward-mode propagation of all four tensors for the flattened
    /// parameter `param`, without the tape shortcut of [`Circuit::gradients`].
    pub fn dual_state(&self, x: f64, param: usize) -> Result<DualState> {
        if param >= self.param_count() {
            return Err(Error::LengthMismatch {
                what: "parameter index",
                expected: self.param_count(),
                found: param,
            });
        }
        let mut dual = DualState::encoded(self, x)?;
        for op in &self.ops {
            dual.push(self, op, op.param == param);
        }
        Ok(dual)
    }

    /// `∂y/∂aᵢ` for the encoding amplitude `aᵢ` of each mode. Their sum times
    /// `input_scale` is `∂y/∂x`.
    pub fn encoding_gradient(&self, x: f64) -> Result<Vec<f64>> {
        let psi0 = self.encoded(x, None)?;
        let psi = self.propagate(psi0.clone());
        let x_psi = self.position_sum(&psi);
        let (_, s1, _) = self.config().activation.eval(inner_re(&psi, &x_psi));
        Ok((0..self.config().num_modes)
            .map(|mode| {
                let tangent = self.propagate(self.encoding_tangent_mode(&psi0, mode));
                s1 * 2.0 * inner_re(&x_psi, &tangent)
            })
            .collect())
    }
}

/// Per-mode encoding-amplitude derivatives; see [`Circuit::encoding_gradient`].
pub fn encoding_gradient(x: f64, params: &NetworkParams, config: &NetworkConfig) -> Result<Vec<f64>> {
    Circuit::new(params, config)?.encoding_gradient(x)
}

/// Central differences with step `h`; the mixed term uses the nested stencil
/// `[y(x+h,θ+h) − y(x+h,θ−h) − y(x−h,θ+h) + y(x−h,θ−h)]/(4h²)`.
pub fn finite_difference_grad(
    x: f64,
    params: &NetworkParams,
    config: &NetworkConfig,
    h: f64,
) -> Result<GradientBundle> {
    if !(h > 0.0) {
        return Err(Error::InvalidConfig("finite-difference step must be positive"));
    }
    let base = Circuit::new(params, config)?;
    let y = base.output(x);
    let dy_dx = (base.output(x + h) - base.output(x - h)) / (2.0 * h);

    let flat = params.flatten();
    let mut dy_dtheta = Vec::with_capacity(flat.len());
    let mut d2y_dxdtheta = Vec::with_capacity(flat.len());
    for j in 0..flat.len() {
        let shifted = |delta: f64| -> Result<Circuit> {
            let mut p = flat.clone();
            p[j] += delta;
            Circuit::new(&NetworkParams::from_flat(config, &p)?, config)
        };
        let plus = shifted(h)?;
        let minus = shifted(-h)?;
        dy_dtheta.push((plus.output(x) - minus.output(x)) / (2.0 * h));
        d2y_dxdtheta.push(
            (plus.output(x + h) - minus.output(x + h) - plus.output(x - h) + minus.output(x - h))
                / (4.0 * h * h),
        );
    }
    Ok(GradientBundle {
        y,
        dy_dx,
        dy_dtheta,
        d2y_dxdtheta,
    })
}

/// Two-point shift rule for the encoding displacement of `mode`:
/// `[y(aₘ + s) − y(aₘ − s)]/(2s)`.
///
/// Only Gaussian circuits are accepted (all Kerr parameters zero). With
/// identity activation the output is then affine in each displacement
/// amplitude, so the result is the exact derivative for every `s`.
pub fn parameter_shift_displacement(
    x: f64,
    params: &NetworkParams,
    config: &NetworkConfig,
    mode: usize,
    shift: f64,
) -> Result<f64> {
    if !(shift > 0.0) {
        return Err(Error::InvalidConfig("shift must be positive"));
    }
    if mode >= config.num_modes {
        return Err(Error::ModeOutOfRange {
            mode,
            num_modes: config.num_modes,
        });
    }
    reject_non_gaussian(params, config)?;
    let circuit = Circuit::new(params, config)?;
    let mut offsets = vec![0.0; config.num_modes];
    offsets[mode] = shift;
    let plus = circuit.output_shifted(x, Some(&offsets));
    offsets[mode] = -shift;
    let minus = circuit.output_shifted(x, Some(&offsets));
    Ok((plus - minus) / (2.0 * shift))
}

fn reject_non_gaussian(params: &NetworkParams, config: &NetworkConfig) -> Result<()> {
    params.check(config)?;
    let per_layer = crate::cvqnn::LayerParams::scalar_count(config.num_modes);
    let kappa_offset = per_layer - config.num_modes;
    for (l, layer) in params.layers.iter().enumerate() {
        for (i, &k) in layer.kappa.iter().enumerate() {
            if k != 0.0 {
                return Err(Error::NonGaussian {
                    index: l * per_layer + kappa_offset + i,
                    value: k,
                });
            }
        }
    }
    Ok(())
}
