//! Hardware wall-clock estimate in units of the per-measurement time `T_m`.
//!
//! A training step evaluates `y`, `∂ₓy`, `∂_θ y` and `∂ₓ∂_θ y` at every grid
//! point, each from `M_mu` measurements of an expectation value, giving
//!
//! ```text
//! T_step = 4 · n² · (n + 4) · L · M_mu · N   [T_m]
//! ```

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardwareEstimate {
    pub num_modes: u64,
    pub num_layers: u64,
    pub grid_points: u64,
    pub shots: u64,
    pub steps: u64,
    pub t_step_in_tm: u64,
    pub t_total_in_tm: u64,
}

impl HardwareEstimate {
    pub fn new(num_modes: u64, num_layers: u64, grid_points: u64, shots: u64, steps: u64) -> Result<Self> {
        let t_step_in_tm = estimate_step(num_modes, num_layers, grid_points, shots)?;
        let t_total_in_tm = estimate_total(num_modes, num_layers, grid_points, shots, steps)?;
        Ok(Self {
            num_modes,
            num_layers,
            grid_points,
            shots,
            steps,
            t_step_in_tm,
            t_total_in_tm,
        })
    }

    /// Total time for a given `T_m` in seconds.
    pub fn total_seconds(&self, t_m: f64) -> f64 {
        self.t_total_in_tm as f64 * t_m
    }
}

fn positive(value: u64, what: &'static str) -> Result<u64> {
    if value == 0 {
        Err(Error::InvalidConfig(what))
    } else {
        Ok(value)
    }
}

const OVERFLOW: Error = Error::InvalidConfig("cost estimate overflows u64");

/// Time for one optimizer step.
pub fn estimate_step(num_modes: u64, num_layers: u64, grid_points: u64, shots: u64) -> Result<u64> {
    let n = positive(num_modes, "number of modes must be positive")?;
    let l = positive(num_layers, "number of layers must be positive")?;
    let g = positive(grid_points, "number of grid points must be positive")?;
    let m = positive(shots, "measurements per expectation must be positive")?;
    [n, n, n.checked_add(4).ok_or(OVERFLOW)?, l, m, g]
        .iter()
        .try_fold(4u64, |acc, &f| acc.checked_mul(f))
        .ok_or(OVERFLOW)
}

/// Time for `steps` optimizer steps.
pub fn estimate_total(num_modes: u64, num_layers: u64, grid_points: u64, shots: u64, steps: u64) -> Result<u64> {
    let steps = positive(steps, "number of steps must be positive")?;
    estimate_step(num_modes, num_layers, grid_points, shots)?
        .checked_mul(steps)
        .ok_or(OVERFLOW)
}
