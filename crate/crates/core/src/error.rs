use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid cutoff {0}: at least 2 Fock levels are required")]
    InvalidCutoff(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("mode index {mode} out of range for {num_modes} modes")]
    ModeOutOfRange { mode: usize, num_modes: usize },
    #[error("a two-mode gate needs two distinct modes, got {0} twice")]
    DuplicateModes(usize),
    #[error("observable is not Hermitian (max deviation {0:e})")]
    NonHermitian(f64),
    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("circuit is not Gaussian: Kerr parameter {index} is {value}")]
    NonGaussian { index: usize, value: f64 },
    #[error("non-finite network output at x = {x}")]
    NonFiniteOutput { x: f64 },
    #[error("non-finite gradient component {index}")]
    NonFiniteGradient { index: usize },
    #[error("integration blew up at x = {x}")]
    BlowUp { x: f64 },
}
