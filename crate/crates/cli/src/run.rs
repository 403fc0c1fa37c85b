//! One training run from a [`RunConfig`] to files on disk.

use std::path::{Path, PathBuf};
use std::time::Instant;

use cvqode_core::cvqnn::{Circuit, NetworkConfig, NetworkParams};
use cvqode_core::ode::{evaluate_loss, make_grid, train_with, CollocationGrid, IVProblem, TrainError, TrainState};
use cvqode_core::problems::{reference_solution, ReferenceMethod, ReferenceSolution};

use crate::config::RunConfig;
use crate::record::{
    write_loss_csv, write_solution_csv, ParamsRecord, ReferenceRecord, RunRecord, RunStatus, SnapshotRecord,
};
use crate::CliError;

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub record: RunRecord,
    /// Files written, in order.
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn diverged(&self) -> bool {
        self.record.status == RunStatus::Diverged
    }
}

/// Trains, then writes `loss.csv`, `solution_<step>.csv` per snapshot,
/// `solution_best.csv`, `solution_final.csv` and `run.json` into `dir`.
///
/// A diverged run still writes everything it has; the returned record says
/// so. `progress(step, loss)` is called after every loss evaluation.
pub fn run_training<F>(config: &RunConfig, dir: &Path, mut progress: F) -> Result<RunOutcome, CliError>
where
    F: FnMut(usize, f64),
{
    config.validate()?;
    let problem = config.ivp()?;
    let net = config.network_config()?;
    let tc = config.train_config();
    let grid = make_grid(problem.domain, tc.grid_size).map_err(|e| CliError::Config(e.to_string()))?;
    let reference = reference_solution(&problem, &grid, config.output.reference_substeps)
        .map_err(|e| CliError::Numerical(format!("reference solution: {e}")))?;

    let started = Instant::now();
    let result = train_with(&problem, &net, &tc, |state, loss| progress(state.step, loss));
    let wall_clock_seconds = started.elapsed().as_secs_f64();
    let (state, status, message) = match result {
        Ok(state) => (state, RunStatus::Completed, None),
        Err(TrainError::Invalid(e)) => return Err(CliError::Config(e.to_string())),
        Err(e @ TrainError::Diverged { .. }) => {
            let message = e.to_string();
            let TrainError::Diverged { state, .. } = e else { unreachable!() };
            (*state, RunStatus::Diverged, Some(message))
        }
    };

    let record = build_record(config, &problem, &net, &grid, &reference, state, status, message, wall_clock_seconds);
    let files = write_artifacts(dir, &record)?;
    Ok(RunOutcome {
        dir: dir.to_path_buf(),
        record,
        files,
    })
}

fn evaluate(params: &NetworkParams, net: &NetworkConfig, problem: &IVProblem, grid: &CollocationGrid) -> Option<(f64, Vec<f64>)> {
    let circuit = Circuit::new(params, net).ok()?;
    let e = evaluate_loss(&circuit, problem, grid).ok()?;
    Some((e.loss, e.grid_values))
}

#[allow(clippy::too_many_arguments)]
fn build_record(
    config: &RunConfig,
    problem: &IVProblem,
    net: &NetworkConfig,
    grid: &CollocationGrid,
    reference: &ReferenceSolution,
    state: TrainState,
    status: RunStatus,
    message: Option<String>,
    wall_clock_seconds: f64,
) -> RunRecord {
    let best = state.best.as_ref().map(|b| ParamsRecord {
        step: b.step,
        loss: Some(b.loss),
        max_abs_error: Some(reference.max_abs_error(&b.ys)),
        ys: b.ys.clone(),
        params: b.params.flatten(),
    });
    let final_ = evaluate(&state.params, net, problem, grid).map(|(loss, ys)| ParamsRecord {
        step: state.step,
        loss: Some(loss),
        max_abs_error: Some(reference.max_abs_error(&ys)),
        ys,
        params: state.params.flatten(),
    });
    RunRecord {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        status,
        message,
        domain: [problem.domain.0, problem.domain.1],
        x0: problem.x0,
        y0: problem.y0,
        steps_completed: state.step,
        grid: grid.points().to_vec(),
        reference: ReferenceRecord {
            method: match reference.method {
                ReferenceMethod::Analytic => "analytic",
                ReferenceMethod::Rk4 => "rk4",
            }
            .to_string(),
            ys: reference.ys.clone(),
        },
        snapshots: state
            .snapshots
            .iter()
            .map(|s| SnapshotRecord {
                step: s.step,
                max_abs_error: reference.max_abs_error(&s.ys),
                ys: s.ys.clone(),
            })
            .collect(),
        loss_history: state.loss_history,
        best,
        final_,
        wall_clock_seconds,
    }
}

fn write_artifacts(dir: &Path, record: &RunRecord) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let mut files = Vec::new();
    let path = dir.join("loss.csv");
    write_loss_csv(&path, &record.loss_history)?;
    files.push(path);

    let mut solutions: Vec<(String, &[f64])> = record
        .snapshots
        .iter()
        .map(|s| (format!("solution_{}.csv", s.step), s.ys.as_slice()))
        .collect();
    if let Some(b) = &record.best {
        solutions.push(("solution_best.csv".into(), &b.ys));
    }
    if let Some(f) = &record.final_ {
        solutions.push(("solution_final.csv".into(), &f.ys));
    }
    for (name, ys) in solutions {
        let path = dir.join(name);
        write_solution_csv(&path, &record.grid, ys, &record.reference.ys)?;
        files.push(path);
    }

    let path = dir.join("run.json");
    record.write_json(&path)?;
    files.push(path);
    Ok(files)
}
