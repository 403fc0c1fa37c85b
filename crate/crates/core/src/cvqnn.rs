//! Layered CV circuit with displacement input encoding and summed position
//! readout.
//!
//! One layer applies, on every mode, `D(αᵢ)`, then interferometer
//! `U₁(φ₁, θ₁)`, `S(rᵢ)`, interferometer `U₂(φ₂, θ₂)` and finally `K(κᵢ)`. The
//! scalar input `x` is broadcast to all modes as a real displacement before
//! the first layer and the network output is `σ(Σᵢ ⟨x̂ᵢ⟩)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::fock::{
    apply_gate, beamsplitter_gate, beamsplitter_generator, check_cutoff, displacement_gate,
    displacement_generator, kerr_gate, kerr_generator, quadrature_matrices, rotation_gate,
    rotation_generator, squeeze_gate, squeeze_generator, FockState, ModeLayout, ModeSelection,
    OperatorMatrix, SparseOperator, DEFAULT_CUTOFF,
};
use crate::rng::InitRng;
use crate::C64;

/// Standard deviation of the normal draws for α, r and κ.
pub const INIT_STD_DEV: f64 = 0.1;

/// Which flattened fields are drawn from the normal distribution (the rest
/// are angles).
const NORMAL_FIELDS: [bool; 7] = [true, false, false, true, false, false, true];

/// Classical post-processing of the summed quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Identity,
    Tanh,
}

impl Activation {
    /// `(σ(z), σ'(z), σ''(z))`.
    pub fn eval(self, z: f64) -> (f64, f64, f64) {
        match self {
            Activation::Identity => (z, 1.0, 0.0),
            Activation::Tanh => {
                let t = libm::tanh(z);
                let d = 1.0 - t * t;
                (t, d, -2.0 * t * d)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub num_modes: usize,
    pub num_layers: usize,
    pub cutoff: usize,
    pub activation: Activation,
    /// Multiplies `x` before it becomes the encoding displacement amplitude.
    pub input_scale: f64,
}

impl NetworkConfig {
    pub fn new(num_modes: usize, num_layers: usize, cutoff: usize) -> Result<Self> {
        let config = Self {
            num_modes,
            num_layers,
            cutoff,
            activation: Activation::Identity,
            input_scale: 1.0,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_modes == 0 {
            return Err(Error::InvalidConfig("num_modes must be at least 1"));
        }
        if self.num_layers == 0 {
            return Err(Error::InvalidConfig("num_layers must be at least 1"));
        }
        check_cutoff(self.cutoff)?;
        if !self.input_scale.is_finite() {
            return Err(Error::InvalidConfig("input_scale must be finite"));
        }
        Ok(())
    }
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            num_modes: 2,
            num_layers: 1,
            cutoff: DEFAULT_CUTOFF,
            activation: Activation::Identity,
            input_scale: 1.0,
        }
    }
}

/// `n(n−1)/2`, beamsplitters per interferometer.
pub fn beamsplitter_count(num_modes: usize) -> usize {
    num_modes * num_modes.saturating_sub(1) / 2
}

/// `a mod 2π` in `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = libm::fmod(a, TAU);
    let r = if r < 0.0 { r + TAU } else { r };
    // -tiny + 2π rounds to 2π
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Trainable parameters of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub alpha: Vec<f64>,
    pub phi1: Vec<f64>,
    pub theta1: Vec<f64>,
    pub r: Vec<f64>,
    pub phi2: Vec<f64>,
    pub theta2: Vec<f64>,
    pub kappa: Vec<f64>,
}

impl LayerParams {
    pub fn zeros(num_modes: usize) -> Self {
        let b = beamsplitter_count(num_modes);
        Self {
            alpha: vec![0.0; num_modes],
            phi1: vec![0.0; num_modes],
            theta1: vec![0.0; b],
            r: vec![0.0; num_modes],
            phi2: vec![0.0; num_modes],
            theta2: vec![0.0; b],
            kappa: vec![0.0; num_modes],
        }
    }

    /// `n(n+4)`.
    pub fn scalar_count(num_modes: usize) -> usize {
        num_modes * (num_modes + 4)
    }

    pub fn num_modes(&self) -> usize {
        self.alpha.len()
    }

    fn fields(&self) -> [&Vec<f64>; 7] {
        [
            &self.alpha,
            &self.phi1,
            &self.theta1,
            &self.r,
            &self.phi2,
            &self.theta2,
            &self.kappa,
        ]
    }

    fn fields_mut(&mut self) -> [&mut Vec<f64>; 7] {
        [
            &mut self.alpha,
            &mut self.phi1,
            &mut self.theta1,
            &mut self.r,
            &mut self.phi2,
            &mut self.theta2,
            &mut self.kappa,
        ]
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.num_modes();
        let b = beamsplitter_count(n);
        let expected = [n, n, b, n, n, b, n];
        let names = ["alpha", "phi1", "theta1", "r", "phi2", "theta2", "kappa"];
        for ((field, want), what) in self.fields().iter().zip(expected).zip(names) {
            if field.len() != want {
                return Err(Error::LengthMismatch {
                    what,
                    expected: want,
                    found: field.len(),
                });
            }
        }
        Ok(())
    }

    /// Copy with every angle wrapped into `[0, 2π)`, for reporting.
    pub fn canonicalized(&self) -> Self {
        let wrap = |v: &Vec<f64>| v.iter().map(|&a| wrap_angle(a)).collect();
        Self {
            phi1: wrap(&self.phi1),
            theta1: wrap(&self.theta1),
            phi2: wrap(&self.phi2),
            theta2: wrap(&self.theta2),
            ..self.clone()
        }
    }
}

/// Parameters of the whole stack. Flattened order is layer-major, and within
/// a layer `alpha, phi1, theta1, r, phi2, theta2, kappa`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub layers: Vec<LayerParams>,
}

impl NetworkParams {
    pub fn zeros(config: &NetworkConfig) -> Self {
        Self {
            layers: vec![LayerParams::zeros(config.num_modes); config.num_layers],
        }
    }

    pub fn len(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.fields().iter().map(|f| f.len()).sum::<usize>())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for layer in &self.layers {
            for field in layer.fields() {
                out.extend_from_slice(field);
            }
        }
        out
    }

    pub fn from_flat(config: &NetworkConfig, flat: &[f64]) -> Result<Self> {
        let expected = param_count(config);
        if flat.len() != expected {
            return Err(Error::LengthMismatch {
                what: "flattened parameters",
                expected,
                found: flat.len(),
            });
        }
        let mut params = Self::zeros(config);
        params.assign_flat(flat);
        Ok(params)
    }

    /// Overwrites every scalar from a flat vector of the same length.
    /// Panics if the length differs from [`NetworkParams::len`].
    pub fn assign_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.len(), "flat parameter length");
        let mut rest = flat;
        for layer in &mut self.layers {
            for field in layer.fields_mut() {
                let (head, tail) = rest.split_at(field.len());
                field.copy_from_slice(head);
                rest = tail;
            }
        }
    }

    /// Checks the shape against `config`.
    pub fn check(&self, config: &NetworkConfig) -> Result<()> {
        if self.layers.len() != config.num_layers {
            return Err(Error::LengthMismatch {
                what: "layers",
                expected: config.num_layers,
                found: self.layers.len(),
            });
        }
        for layer in &self.layers {
            if layer.num_modes() != config.num_modes {
                return Err(Error::LengthMismatch {
                    what: "alpha",
                    expected: config.num_modes,
                    found: layer.num_modes(),
                });
            }
            layer.check_shape()?;
        }
        Ok(())
    }

    pub fn kappas(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers.iter().flat_map(|l| l.kappa.iter().copied())
    }
}

/// `n(n+4)·L`.
pub fn param_count(config: &NetworkConfig) -> usize {
    LayerParams::scalar_count(config.num_modes) * config.num_layers
}

/// Random initial parameters: α, r, κ from `Normal(0, 0.1)`, all angles
/// uniform on `[0, 2π)`. Draw order follows the flattened parameter order.
pub fn init_params(config: &NetworkConfig, seed: u64) -> NetworkParams {
    let mut rng = InitRng::new(seed);
    let mut params = NetworkParams::zeros(config);
    for layer in &mut params.layers {
        for (field, normal) in layer.fields_mut().into_iter().zip(NORMAL_FIELDS) {
            for v in field.iter_mut() {
                *v = if normal {
                    rng.normal(0.0, INIT_STD_DEV)
                } else {
                    rng.angle()
                };
            }
        }
    }
    params
}

/// Mode pairs of the rectangular beamsplitter mesh: `(0,1), (2,3), …` then
/// `(1,2), (3,4), …`, alternating until `n(n−1)/2` pairs are listed.
pub fn interferometer_pairs(num_modes: usize) -> Vec<(usize, usize)> {
    let count = beamsplitter_count(num_modes);
    let mut pairs = Vec::with_capacity(count);
    let mut column = 0;
    while pairs.len() < count {
        let mut first = column % 2;
        while first + 1 < num_modes && pairs.len() < count {
            pairs.push((first, first + 1));
            first += 2;
        }
        column += 1;
    }
    pairs
}

/// Applies `D(input_scale·x)` to every mode.
pub fn encode_input(x: f64, state: &FockState, config: &NetworkConfig) -> Result<FockState> {
    let gate = displacement_gate(C64::new(config.input_scale * x, 0.0), state.cutoff())?;
    let mut out = state.clone();
    for mode in 0..state.num_modes() {
        out = apply_gate(&out, &gate, ModeSelection::One(mode))?;
    }
    Ok(out)
}

/// Beamsplitter mesh with angles `theta` followed by `R(φⱼ)` on each mode.
pub fn interferometer(state: &FockState, phi: &[f64], theta: &[f64]) -> Result<FockState> {
    let n = state.num_modes();
    let d = state.cutoff();
    if phi.len() != n {
        return Err(Error::LengthMismatch {
            what: "phi",
            expected: n,
            found: phi.len(),
        });
    }
    let pairs = interferometer_pairs(n);
    if theta.len() != pairs.len() {
        return Err(Error::LengthMismatch {
            what: "theta",
            expected: pairs.len(),
            found: theta.len(),
        });
    }
    let mut out = state.clone();
    for (&(m1, m2), &t) in pairs.iter().zip(theta) {
        out = apply_gate(&out, &beamsplitter_gate(t, d)?, ModeSelection::Two(m1, m2))?;
    }
    for (mode, &p) in phi.iter().enumerate() {
        out = apply_gate(&out, &rotation_gate(p, d)?, ModeSelection::One(mode))?;
    }
    Ok(out)
}

/// One layer: `D(α)`, `U₁(φ₁, θ₁)`, `S(r)`, `U₂(φ₂, θ₂)`, `K(κ)`.
pub fn apply_layer(state: &FockState, p: &LayerParams) -> Result<FockState> {
    p.check_shape()?;
    if p.num_modes() != state.num_modes() {
        return Err(Error::LengthMismatch {
            what: "alpha",
            expected: state.num_modes(),
            found: p.num_modes(),
        });
    }
    let d = state.cutoff();
    let mut out = state.clone();
    for (mode, &a) in p.alpha.iter().enumerate() {
        out = apply_gate(&out, &displacement_gate(C64::new(a, 0.0), d)?, ModeSelection::One(mode))?;
    }
    out = interferometer(&out, &p.phi1, &p.theta1)?;
    for (mode, &r) in p.r.iter().enumerate() {
        out = apply_gate(&out, &squeeze_gate(r, d)?, ModeSelection::One(mode))?;
    }
    out = interferometer(&out, &p.phi2, &p.theta2)?;
    for (mode, &k) in p.kappa.iter().enumerate() {
        out = apply_gate(&out, &kerr_gate(k, d)?, ModeSelection::One(mode))?;
    }
    Ok(out)
}

/// Network output `y(x) = σ(Σᵢ ⟨x̂ᵢ⟩)`.
pub fn forward(x: f64, params: &NetworkParams, config: &NetworkConfig) -> Result<f64> {
    let circuit = Circuit::new(params, config)?;
    Ok(circuit.output(x))
}

/// One parametrized gate of a compiled circuit: `U = exp(t·G)`.
#[derive(Debug, Clone)]
pub(crate) struct CircuitOp {
    pub(crate) layout: ModeLayout,
    pub(crate) unitary: SparseOperator,
    /// Index into the flattened parameter vector.
    pub(crate) param: usize,
    pub(crate) kind: GateKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum GateKind {
    Displacement,
    Rotation,
    Squeeze,
    Beamsplitter,
    Kerr,
}

/// Gate matrices for fixed parameters, reused across input points.
///
/// Building the gates once per parameter vector and only the encoding per
/// `x` is what makes per-point evaluation cheap during training.
#[derive(Debug, Clone)]
pub struct Circuit {
    config: NetworkConfig,
    dim: usize,
    pub(crate) ops: Vec<CircuitOp>,
    generators: Generators,
    /// Single-mode layouts, indexed by mode.
    mode_layouts: Vec<ModeLayout>,
    position: SparseOperator,
    /// `a† − a`, the derivative of a real displacement w.r.t. its amplitude.
    encoding_generator: SparseOperator,
}

#[derive(Debug, Clone)]
struct Generators {
    displacement: SparseOperator,
    rotation: SparseOperator,
    squeeze: SparseOperator,
    beamsplitter: SparseOperator,
    kerr: SparseOperator,
}

impl Circuit {
    pub fn new(params: &NetworkParams, config: &NetworkConfig) -> Result<Self> {
        config.validate()?;
        params.check(config)?;
        let n = config.num_modes;
        let d = config.cutoff;
        let one = C64::new(1.0, 0.0);
        let generators = Generators {
            displacement: SparseOperator::from_dense(&displacement_generator(one, d)?),
            rotation: SparseOperator::from_dense(&rotation_generator(d)?),
            squeeze: SparseOperator::from_dense(&squeeze_generator(d)?),
            beamsplitter: SparseOperator::from_dense(&beamsplitter_generator(d)?),
            kerr: SparseOperator::from_dense(&kerr_generator(d)?),
        };
        let mode_layouts = (0..n)
            .map(|m| ModeLayout::new(n, d, ModeSelection::One(m)))
            .collect::<Result<Vec<_>>>()?;
        let pairs = interferometer_pairs(n);
        let pair_layouts = pairs
            .iter()
            .map(|&(a, b)| ModeLayout::new(n, d, ModeSelection::Two(a, b)))
            .collect::<Result<Vec<_>>>()?;

        let mut ops = Vec::new();
        let mut offset = 0;
        let b = pairs.len();
        for layer in &params.layers {
            // Flat offsets of each field inside this layer.
            let (o_alpha, o_phi1, o_theta1) = (offset, offset + n, offset + 2 * n);
            let o_r = o_theta1 + b;
            let (o_phi2, o_theta2) = (o_r + n, o_r + 2 * n);
            let o_kappa = o_theta2 + b;

            let single = |ops: &mut Vec<CircuitOp>, kind, values: &[f64], base: usize| -> Result<()> {
                for (mode, &v) in values.iter().enumerate() {
                    let u = match kind {
                        GateKind::Displacement => displacement_gate(C64::new(v, 0.0), d)?,
                        GateKind::Rotation => rotation_gate(v, d)?,
                        GateKind::Squeeze => squeeze_gate(v, d)?,
                        GateKind::Kerr => kerr_gate(v, d)?,
                        GateKind::Beamsplitter => unreachable!(),
                    };
                    ops.push(CircuitOp {
                        layout: mode_layouts[mode].clone(),
                        unitary: SparseOperator::from_dense(&u),
                        param: base + mode,
                        kind,
                    });
                }
                Ok(())
            };
            let mesh = |ops: &mut Vec<CircuitOp>, thetas: &[f64], base: usize| -> Result<()> {
                for (k, &t) in thetas.iter().enumerate() {
                    ops.push(CircuitOp {
                        layout: pair_layouts[k].clone(),
                        unitary: SparseOperator::from_dense(&beamsplitter_gate(t, d)?),
                        param: base + k,
                        kind: GateKind::Beamsplitter,
                    });
                }
                Ok(())
            };

            single(&mut ops, GateKind::Displacement, &layer.alpha, o_alpha)?;
            mesh(&mut ops, &layer.theta1, o_theta1)?;
            single(&mut ops, GateKind::Rotation, &layer.phi1, o_phi1)?;
            single(&mut ops, GateKind::Squeeze, &layer.r, o_r)?;
            mesh(&mut ops, &layer.theta2, o_theta2)?;
            single(&mut ops, GateKind::Rotation, &layer.phi2, o_phi2)?;
            single(&mut ops, GateKind::Kerr, &layer.kappa, o_kappa)?;
            offset += LayerParams::scalar_count(n);
        }

        let (x, _) = quadrature_matrices(d)?;
        let encoding_generator = generators.displacement.clone();
        Ok(Self {
            config: config.clone(),
            dim: d.pow(n as u32),
            ops,
            generators,
            mode_layouts,
            position: SparseOperator::from_dense(&x),
            encoding_generator,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn param_count(&self) -> usize {
        param_count(&self.config)
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn generator(&self, kind: GateKind) -> &SparseOperator {
        match kind {
            GateKind::Displacement => &self.generators.displacement,
            GateKind::Rotation => &self.generators.rotation,
            GateKind::Squeeze => &self.generators.squeeze,
            GateKind::Beamsplitter => &self.generators.beamsplitter,
            GateKind::Kerr => &self.generators.kerr,
        }
    }

    /// Vacuum displaced by `input_scale·x + offsets[i]` on each mode `i`.
    pub(crate) fn encoded(&self, x: f64, offsets: Option<&[f64]>) -> Result<Vec<C64>> {
        let n = self.config.num_modes;
        let d = self.config.cutoff;
        let mut psi = vec![C64::new(0.0, 0.0); self.dim];
        psi[0] = C64::new(1.0, 0.0);
        let mut tmp = psi.clone();
        let base = self.config.input_scale * x;
        let shared = SparseOperator::from_dense(&displacement_gate(C64::new(base, 0.0), d)?);
        for mode in 0..n {
            let shift = offsets.map_or(0.0, |o| o[mode]);
            if shift == 0.0 {
                self.mode_layouts[mode].apply(&shared, &psi, &mut tmp);
            } else {
                let g = displacement_gate(C64::new(base + shift, 0.0), d)?;
                self.mode_layouts[mode].apply(&g, &psi, &mut tmp);
            }
            core::mem::swap(&mut psi, &mut tmp);
        }
        Ok(psi)
    }

    /// `∂ψ/∂x` right after encoding: `input_scale · Σᵢ Gᵢ ψ` with `Gᵢ = a†ᵢ − aᵢ`.
    pub(crate) fn encoding_tangent(&self, psi: &[C64]) -> Vec<C64> {
        let scale = C64::new(self.config.input_scale, 0.0);
        let mut total = vec![C64::new(0.0, 0.0); self.dim];
        for mode in 0..self.config.num_modes {
            let t = self.encoding_tangent_mode(psi, mode);
            for (acc, v) in total.iter_mut().zip(t) {
                *acc += scale * v;
            }
        }
        total
    }

    /// `Gᵢ ψ`: derivative w.r.t. the encoding amplitude of one mode.
    pub(crate) fn encoding_tangent_mode(&self, psi: &[C64], mode: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        self.mode_layouts[mode].apply(&self.encoding_generator, psi, &mut out);
        out
    }

    /// `ψ ← U ψ` for one op, using `scratch` as the output buffer.
    pub(crate) fn apply_op(&self, op: &CircuitOp, psi: &mut Vec<C64>, scratch: &mut Vec<C64>) {
        op.layout.apply(&op.unitary, psi, scratch);
        core::mem::swap(psi, scratch);
    }

    /// `G ψ` for the generator of `op`.
    pub(crate) fn apply_generator(&self, op: &CircuitOp, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        op.layout.apply(self.generator(op.kind), psi, &mut out);
        out
    }

    /// `(Σᵢ x̂ᵢ) ψ`.
    pub(crate) fn position_sum(&self, psi: &[C64]) -> Vec<C64> {
        let mut total = vec![C64::new(0.0, 0.0); self.dim];
        let mut tmp = vec![C64::new(0.0, 0.0); self.dim];
        for layout in &self.mode_layouts {
            layout.apply(&self.position, psi, &mut tmp);
            for (acc, v) in total.iter_mut().zip(&tmp) {
                *acc += v;
            }
        }
        total
    }

    /// Runs the layer stack on an already encoded state.
    pub(crate) fn propagate(&self, mut psi: Vec<C64>) -> Vec<C64> {
        let mut scratch = vec![C64::new(0.0, 0.0); self.dim];
        for op in &self.ops {
            self.apply_op(op, &mut psi, &mut scratch);
        }
        psi
    }

    /// Summed quadrature `z = Σᵢ ⟨x̂ᵢ⟩` before activation.
    pub(crate) fn readout(&self, psi: &[C64]) -> f64 {
        crate::fock::inner_re(psi, &self.position_sum(psi))
    }

    /// Final state for input `x`.
    pub fn state(&self, x: f64) -> Result<FockState> {
        let psi = self.propagate(self.encoded(x, None)?);
        FockState::from_amplitudes(self.config.num_modes, self.config.cutoff, psi)
    }

    pub fn output(&self, x: f64) -> f64 {
        self.output_shifted(x, None)
    }

    /// Output with per-mode offsets added to the encoding amplitudes.
    pub(crate) fn output_shifted(&self, x: f64, offsets: Option<&[f64]>) -> f64 {
        // The cutoff was validated in `new`, so the encoding gate cannot fail.
        let psi = self
            .propagate(self.encoded(x, offsets).expect("validated cutoff"));
        self.config.activation.eval(self.readout(&psi)).0
    }
}

/// Dense form of the readout observable `Σᵢ x̂ᵢ` on the full space. Only
/// meant for small checks.
pub fn position_sum_matrix(config: &NetworkConfig) -> Result<OperatorMatrix> {
    let (x, _) = quadrature_matrices(config.cutoff)?;
    let id = OperatorMatrix::identity(config.cutoff);
    let n = config.num_modes;
    let mut total = OperatorMatrix::zeros(config.cutoff.pow(n as u32));
    for mode in 0..n {
        let mut term = OperatorMatrix::identity(1);
        for m in 0..n {
            term = term.kron(if m == mode { &x } else { &id });
        }
        total = total.add(&term);
    }
    Ok(total)
}
