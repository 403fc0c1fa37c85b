//! `run.json` and the CSV artifacts of a training run.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::{fmt_num, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRecord {
    /// `analytic` or `rk4`.
    pub method: String,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub step: usize,
    pub max_abs_error: f64,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    /// Step whose parameters these are (`steps_completed` for the final ones).
    pub step: usize,
    pub loss: Option<f64>,
    pub max_abs_error: Option<f64>,
    pub ys: Vec<f64>,
    /// Flattened: per layer α, φ₁, θ₁, r, φ₂, θ₂, κ.
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub config: RunConfig,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub domain: [f64; 2],
    pub x0: f64,
    pub y0: f64,
    pub steps_completed: usize,
    pub grid: Vec<f64>,
    pub reference: ReferenceRecord,
    pub loss_history: Vec<f64>,
    pub snapshots: Vec<SnapshotRecord>,
    pub best: Option<ParamsRecord>,
    #[serde(rename = "final")]
    pub final_: Option<ParamsRecord>,
    pub wall_clock_seconds: f64,
}

impl RunRecord {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn write_json(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text).map_err(CliError::io(path))
    }
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Config(format!("{}: {other:?}", path.display())),
    }
}

/// `step,loss`.
pub fn write_loss_csv(path: &Path, losses: &[f64]) -> Result<(), CliError> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut w = csv::Writer::from_writer(file);
    let err = csv_error(path);
    w.write_record(["step", "loss"]).map_err(&err)?;
    for (step, &loss) in losses.iter().enumerate() {
        w.write_record([step.to_string(), fmt_num(loss)]).map_err(&err)?;
    }
    w.flush().map_err(CliError::io(path))
}

/// `x,y_pred,y_ref`.
pub fn write_solution_csv(path: &Path, xs: &[f64], ys: &[f64], reference: &[f64]) -> Result<(), CliError> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut w = csv::Writer::from_writer(file);
    let err = csv_error(path);
    w.write_record(["x", "y_pred", "y_ref"]).map_err(&err)?;
    for ((x, y), r) in xs.iter().zip(ys).zip(reference) {
        w.write_record([fmt_num(*x), fmt_num(*y), fmt_num(*r)]).map_err(&err)?;
    }
    let mut file = w.into_inner().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.into_error(),
    })?;
    file.flush().map_err(CliError::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let xs = [-1.0, 0.1, 1.0 / 3.0];
        let ys = [std::f64::consts::PI, -2.5e-17, 1e300];
        write_solution_csv(&path, &xs, &ys, &[0.0, 1.0, 2.0]).unwrap();
        let mut r = csv::Reader::from_path(&path).unwrap();
        assert_eq!(r.headers().unwrap(), vec!["x", "y_pred", "y_ref"]);
        let rows: Vec<Vec<f64>> = r
            .records()
            .map(|rec| rec.unwrap().iter().map(|f| f.parse().unwrap()).collect())
            .collect();
        for (i, row) in rows.iter().enumerate() {
            assert!((row[0] - xs[i]).abs() <= 1e-15 * xs[i].abs());
            assert!((row[1] - ys[i]).abs() <= 1e-15 * ys[i].abs());
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("3.141592653589793e0"));
    }

    #[test]
    fn loss_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("loss.csv");
        write_loss_csv(&path, &[2.0, 0.5]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "step,loss\n0,2.000000000000000e0\n1,5.000000000000000e-1\n");
    }
}
