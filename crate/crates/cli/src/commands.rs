//! Subcommand bodies. Each writes its report to `out` and returns the
//! process exit code.

use std::io::Write;
use std::path::Path;

use cvqode_core::cost::HardwareEstimate;
use cvqode_core::cvqnn::{Circuit, NetworkParams};
use cvqode_core::selftest::{self, CheckResult};

use crate::config::RunConfig;
use crate::record::RunRecord;
use crate::run::run_training;
use crate::{CliError, EXIT_NUMERICAL, EXIT_OK};

fn io_out(e: std::io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

pub fn cmd_train(
    config_path: &Path,
    output_dir: Option<&Path>,
    quiet: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let config = RunConfig::load(config_path)?;
    let dir = config.output_dir(output_dir);
    let every = if quiet { 0 } else { config.output.log_every };
    let outcome = run_training(&config, &dir, |step, loss| {
        if every > 0 && step % every == 0 {
            eprintln!("step {step:>6}  loss {loss:.6e}");
        }
    })?;
    let r = &outcome.record;
    writeln!(out, "problem      {}", r.config.problem.name).map_err(io_out)?;
    writeln!(out, "steps        {}", r.steps_completed).map_err(io_out)?;
    if let Some(&first) = r.loss_history.first() {
        writeln!(out, "initial loss {first:.6e}").map_err(io_out)?;
    }
    if let Some(f) = &r.final_ {
        writeln!(
            out,
            "final loss   {:.6e}  max error {:.6e}",
            f.loss.unwrap_or(f64::NAN),
            f.max_abs_error.unwrap_or(f64::NAN)
        )
        .map_err(io_out)?;
    }
    if let Some(b) = &r.best {
        writeln!(
            out,
            "best loss    {:.6e}  max error {:.6e}  at step {}",
            b.loss.unwrap_or(f64::NAN),
            b.max_abs_error.unwrap_or(f64::NAN),
            b.step
        )
        .map_err(io_out)?;
    }
    writeln!(out, "wall clock   {:.2} s", r.wall_clock_seconds).map_err(io_out)?;
    writeln!(out, "output       {}", outcome.dir.display()).map_err(io_out)?;
    if let Some(m) = &r.message {
        writeln!(out, "error        {m}").map_err(io_out)?;
    }
    Ok(if outcome.diverged() { EXIT_NUMERICAL } else { EXIT_OK })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostArgs {
    pub modes: u64,
    pub layers: u64,
    pub points: u64,
    pub shots: u64,
    pub steps: u64,
    /// Hypothetical per-measurement times in seconds.
    pub tm: Vec<f64>,
}

impl Default for CostArgs {
    fn default() -> Self {
        Self {
            modes: 2,
            layers: 1,
            points: 20,
            shots: 100,
            steps: 400,
            tm: Vec::new(),
        }
    }
}

pub fn cmd_estimate_cost(args: &CostArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let e = HardwareEstimate::new(args.modes, args.layers, args.points, args.shots, args.steps)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(t) = args.tm.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(CliError::Config(format!("--tm must be positive, got {t}")));
    }
    writeln!(
        out,
        "modes {}  layers {}  points {}  shots {}  steps {}",
        e.num_modes, e.num_layers, e.grid_points, e.shots, e.steps
    )
    .map_err(io_out)?;
    writeln!(out, "T_step = {} T_m", e.t_step_in_tm).map_err(io_out)?;
    writeln!(out, "T_c    = {} T_m", e.t_total_in_tm).map_err(io_out)?;
    for &tm in &args.tm {
        let step = e.t_step_in_tm as f64 * tm;
        let total = e.total_seconds(tm);
        writeln!(
            out,
            "T_m = {tm:e} s: T_step = {step:.6e} s, T_c = {total:.6e} s ({:.3} h)",
            total / 3600.0
        )
        .map_err(io_out)?;
    }
    Ok(EXIT_OK)
}

pub fn write_check_table(results: &[CheckResult], out: &mut dyn Write) -> Result<(), CliError> {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in results {
        writeln!(
            out,
            "{}  {:<width$}  worst {:.3e}  tol {:.1e}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.worst,
            r.tolerance
        )
        .map_err(io_out)?;
    }
    Ok(())
}

pub fn cmd_selftest(out: &mut dyn Write) -> Result<i32, CliError> {
    let results = selftest::run_all().map_err(|e| CliError::Numerical(e.to_string()))?;
    write_check_table(&results, out)?;
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(out, "{} checks, {failed} failed", results.len()).map_err(io_out)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_NUMERICAL })
}

/// Network output and input derivative of a saved run.
pub fn cmd_evaluate(run_path: &Path, xs: &[f64], use_best: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let record = RunRecord::load(run_path)?;
    let net = record.config.network_config()?;
    let saved = if use_best { &record.best } else { &record.final_ };
    let saved = saved
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("{} has no saved parameters", run_path.display())))?;
    let params = NetworkParams::from_flat(&net, &saved.params).map_err(|e| CliError::Config(e.to_string()))?;
    let circuit = Circuit::new(&params, &net).map_err(|e| CliError::Config(e.to_string()))?;
    let exact = record.config.ivp()?.exact;
    writeln!(out, "x,y,dy_dx{}", if exact.is_some() { ",y_exact" } else { "" }).map_err(io_out)?;
    for &x in xs {
        let g = circuit.gradients(x).map_err(|e| CliError::Numerical(e.to_string()))?;
        let mut line = format!("{},{},{}", crate::fmt_num(x), crate::fmt_num(g.y), crate::fmt_num(g.dy_dx));
        if let Some(f) = exact {
            line.push(',');
            line.push_str(&crate::fmt_num(f(x)));
        }
        writeln!(out, "{line}").map_err(io_out)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cost(args: &CostArgs) -> (i32, String) {
        let mut buf = Vec::new();
        let code = cmd_estimate_cost(args, &mut buf).unwrap();
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn estimate_cost_reference_instance() {
        let (code, text) = run_cost(&CostArgs::default());
        assert_eq!(code, 0);
        assert!(text.contains("T_step = 192000 T_m"), "{text}");
        assert!(text.contains("T_c    = 76800000 T_m"), "{text}");
    }

    #[test]
    fn estimate_cost_minimal_and_conversions() {
        let args = CostArgs {
            modes: 1,
            layers: 1,
            points: 1,
            shots: 1,
            steps: 1,
            tm: vec![1e-3],
        };
        let (_, text) = run_cost(&args);
        assert!(text.contains("T_step = 20 T_m"));
        assert!(text.contains("T_c = 2.000000e-2 s"), "{text}");
    }

    #[test]
    fn estimate_cost_rejects_zero_counts() {
        let args = CostArgs {
            shots: 0,
            ..CostArgs::default()
        };
        let err = cmd_estimate_cost(&args, &mut Vec::new()).unwrap_err();
        assert_eq!(err.exit_code(), crate::EXIT_CONFIG);
        let args = CostArgs {
            tm: vec![-1.0],
            ..CostArgs::default()
        };
        assert!(cmd_estimate_cost(&args, &mut Vec::new()).is_err());
    }
}
