use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::C64;

use super::{check_cutoff, OperatorMatrix, SparseOperator};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Pure state of `num_modes` qumodes, each truncated to `cutoff` levels.
///
/// Amplitudes are stored row-major over occupation numbers with mode 0 the
/// slowest index: `|n₀,…,n_{k−1}⟩` sits at `Σ nᵢ·D^{k−1−i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    num_modes: usize,
    cutoff: usize,
    amplitudes: Vec<C64>,
}

impl FockState {
    pub fn vacuum(num_modes: usize, cutoff: usize) -> Result<Self> {
        check_cutoff(cutoff)?;
        if num_modes == 0 {
            return Err(Error::InvalidConfig("at least one mode is required"));
        }
        let mut amplitudes = vec![ZERO; cutoff.pow(num_modes as u32)];
        amplitudes[0] = C64::new(1.0, 0.0);
        Ok(Self {
            num_modes,
            cutoff,
            amplitudes,
        })
    }

    pub fn from_amplitudes(num_modes: usize, cutoff: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_cutoff(cutoff)?;
        if num_modes == 0 {
            return Err(Error::InvalidConfig("at least one mode is required"));
        }
        let expected = cutoff.pow(num_modes as u32);
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            num_modes,
            cutoff,
            amplitudes,
        })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// Amplitude of `|occupations⟩`. Panics on out-of-range occupations.
    pub fn amplitude(&self, occupations: &[usize]) -> C64 {
        assert_eq!(occupations.len(), self.num_modes);
        let idx = occupations.iter().fold(0, |acc, &n| {
            assert!(n < self.cutoff);
            acc * self.cutoff + n
        });
        self.amplitudes[idx]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Total probability in basis states where some mode has occupancy
    /// `≥ cutoff − margin`; a cheap truncation diagnostic.
    pub fn edge_population(&self, margin: usize) -> f64 {
        let limit = self.cutoff.saturating_sub(margin);
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let mut rest = *i;
                (0..self.num_modes).any(|_| {
                    let n = rest % self.cutoff;
                    rest /= self.cutoff;
                    n >= limit
                })
            })
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Target modes of a local operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelection {
    One(usize),
    /// The first index is the slow index of the `D²` local space.
    Two(usize, usize),
}

/// Anything that can act on the local (one- or two-mode) space.
pub(crate) trait LocalOperator {
    fn local_dim(&self) -> usize;
    fn matvec(&self, x: &[C64], y: &mut [C64]);
}

impl LocalOperator for OperatorMatrix {
    fn local_dim(&self) -> usize {
        self.dim()
    }
    fn matvec(&self, x: &[C64], y: &mut [C64]) {
        OperatorMatrix::matvec(self, x, y)
    }
}

impl LocalOperator for SparseOperator {
    fn local_dim(&self) -> usize {
        self.dim()
    }
    fn matvec(&self, x: &[C64], y: &mut [C64]) {
        SparseOperator::matvec(self, x, y)
    }
}

/// Index bookkeeping for contracting a local operator into the full tensor.
///
/// `bases` enumerates flat indices whose target-mode digits are zero and
/// `locals[l]` is the flat offset of local basis state `l`.
#[derive(Debug, Clone)]
pub(crate) struct ModeLayout {
    bases: Vec<usize>,
    locals: Vec<usize>,
}

impl ModeLayout {
    pub(crate) fn new(num_modes: usize, cutoff: usize, modes: ModeSelection) -> Result<Self> {
        let check = |m: usize| {
            if m >= num_modes {
                Err(Error::ModeOutOfRange { mode: m, num_modes })
            } else {
                Ok(())
            }
        };
        let stride = |m: usize| cutoff.pow((num_modes - 1 - m) as u32);
        let targets: Vec<usize> = match modes {
            ModeSelection::One(m) => {
                check(m)?;
                vec![m]
            }
            ModeSelection::Two(m1, m2) => {
                check(m1)?;
                check(m2)?;
                if m1 == m2 {
                    return Err(Error::DuplicateModes(m1));
                }
                vec![m1, m2]
            }
        };
        let mut locals = vec![0usize];
        for &m in &targets {
            locals = locals
                .iter()
                .flat_map(|&off| (0..cutoff).map(move |k| off + k * stride(m)))
                .collect();
        }
        let mut bases = vec![0usize];
        for m in (0..num_modes).filter(|m| !targets.contains(m)) {
            bases = bases
                .iter()
                .flat_map(|&off| (0..cutoff).map(move |k| off + k * stride(m)))
                .collect();
        }
        Ok(Self { bases, locals })
    }

    pub(crate) fn local_dim(&self) -> usize {
        self.locals.len()
    }

    /// `out = (op on target modes) · input`.
    pub(crate) fn apply<O: LocalOperator + ?Sized>(&self, op: &O, input: &[C64], out: &mut [C64]) {
        debug_assert_eq!(op.local_dim(), self.locals.len());
        let n = self.locals.len();
        let mut x = vec![ZERO; n];
        let mut y = vec![ZERO; n];
        for &base in &self.bases {
            for (xl, &off) in x.iter_mut().zip(&self.locals) {
                *xl = input[base + off];
            }
            op.matvec(&x, &mut y);
            for (&yl, &off) in y.iter().zip(&self.locals) {
                out[base + off] = yl;
            }
        }
    }
}

/// Applies a one- or two-mode operator to the designated modes, leaving all
/// other tensor axes untouched.
pub fn apply_gate(state: &FockState, gate: &OperatorMatrix, modes: ModeSelection) -> Result<FockState> {
    let layout = ModeLayout::new(state.num_modes, state.cutoff, modes)?;
    if gate.dim() != layout.local_dim() {
        return Err(Error::DimensionMismatch {
            expected: layout.local_dim(),
            found: gate.dim(),
        });
    }
    let mut out = vec![ZERO; state.amplitudes.len()];
    layout.apply(gate, &state.amplitudes, &mut out);
    Ok(FockState {
        num_modes: state.num_modes,
        cutoff: state.cutoff,
        amplitudes: out,
    })
}

/// Tolerance for accepting an observable as Hermitian.
const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance on the imaginary part of an expectation value.
const IMAG_TOL: f64 = 1e-12;

/// `⟨ψ|O_mode|ψ⟩` for a single-mode Hermitian observable.
pub fn expectation(state: &FockState, observable: &OperatorMatrix, mode: usize) -> Result<f64> {
    if observable.dim() != state.cutoff {
        return Err(Error::DimensionMismatch {
            expected: state.cutoff,
            found: observable.dim(),
        });
    }
    let defect = observable.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NonHermitian(defect));
    }
    let layout = ModeLayout::new(state.num_modes, state.cutoff, ModeSelection::One(mode))?;
    let mut o_psi = vec![ZERO; state.amplitudes.len()];
    layout.apply(observable, &state.amplitudes, &mut o_psi);
    let value = inner(&state.amplitudes, &o_psi);
    debug_assert!(value.im.abs() <= IMAG_TOL * (1.0 + value.re.abs()));
    Ok(value.re)
}

/// `⟨u|v⟩`, conjugating the left argument.
pub(crate) fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}

/// `Re⟨u|v⟩`.
pub(crate) fn inner_re(u: &[C64], v: &[C64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}
