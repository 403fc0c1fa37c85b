//! Acceptance criteria. Every test prints one `criterion N: PASS|FAIL ...`
//! line (visible with `--nocapture`) and then asserts.

use std::path::Path;
use std::time::Instant;

use cvqode::record::RunRecord;
use cvqode::{run_training, RunConfig};
use cvqode_core::cost::{estimate_step, estimate_total};
use cvqode_core::cvqnn::{param_count, NetworkConfig};
use cvqode_core::ode::make_grid;
use cvqode_core::problems::{linear_problem, riccati_problem, rk4_solve, stiff_problem, ReferenceSolution};
use cvqode_core::selftest::{
    all_passed, gate_algebra_suite, gradient_suite, heisenberg_checks, CheckResult, GateSet, Projection,
    HEISENBERG_CUTOFF,
};

fn report(criterion: u32, passed: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
}

fn summarize(results: &[CheckResult]) -> String {
    results
        .iter()
        .map(|r| format!("{}={}({:.1e})", r.name, if r.passed { "ok" } else { "FAIL" }, r.worst))
        .collect::<Vec<_>>()
        .join(", ")
}

fn train_preset(name: &str) -> RunRecord {
    let config = RunConfig::preset(name).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_training(&config, dir.path(), |_, _| {}).unwrap();
    assert!(dir.path().join("run.json").exists());
    assert!(dir.path().join("solution_best.csv").exists());
    assert_eq!(RunRecord::load(&dir.path().join("run.json")).unwrap(), outcome.record);
    outcome.record
}

#[test]
fn criterion_1_gate_algebra() {
    let started = Instant::now();
    let gates = GateSet::default();
    let mut results: Vec<CheckResult> = gate_algebra_suite(&gates)
        .unwrap()
        .into_iter()
        .filter(|r| r.name.starts_with("unitarity") || r.name == "kerr diagonal")
        .collect();
    results.extend(heisenberg_checks(&gates, HEISENBERG_CUTOFF, Projection::edge_margin(HEISENBERG_CUTOFF)).unwrap());
    let seconds = started.elapsed().as_secs_f64();
    let passed = all_passed(&results) && seconds <= 10.0;
    report(1, passed, &format!("[{}] in {seconds:.2} s", summarize(&results)));
    assert!(passed);
}

#[test]
fn criterion_2_gradient_oracle() {
    let started = Instant::now();
    let results = gradient_suite(20).unwrap();
    let seconds = started.elapsed().as_secs_f64();
    let passed = all_passed(&results) && seconds <= 60.0;
    report(2, passed, &format!("[{}] in {seconds:.2} s", summarize(&results)));
    assert!(passed);
}

#[test]
fn criterion_3_parameter_count_and_cost() {
    let mp = param_count(&NetworkConfig::new(2, 1, 10).unwrap());
    let step = estimate_step(2, 1, 20, 100).unwrap();
    let total = estimate_total(2, 1, 20, 100, 400).unwrap();
    let passed = mp == 12 && step == 192_000 && total == 76_800_000;
    report(3, passed, &format!("M_p={mp} T_step={step} T_c={total}"));
    assert!(passed);
}

#[test]
fn criterion_4_linear_experiment() {
    let r = train_preset("linear");
    let initial = r.loss_history[0];
    let f = r.final_.as_ref().unwrap();
    let (loss, err) = (f.loss.unwrap(), f.max_abs_error.unwrap());
    let passed = r.steps_completed <= 1000 && loss <= 1e-2 && loss <= initial / 100.0 && err <= 0.1;
    report(
        4,
        passed,
        &format!("initial loss {initial:.4e}, final loss {loss:.4e}, max error {err:.4e} after {} steps", r.steps_completed),
    );
    assert!(passed);
}

#[test]
fn criterion_5_stiff_experiment() {
    let r = train_preset("stiff");
    let f = r.final_.as_ref().unwrap();
    let b = r.best.as_ref().unwrap();
    let err = f.max_abs_error.unwrap();
    let passed = r.steps_completed <= 500 && err <= 0.1;
    report(
        5,
        passed,
        &format!(
            "final loss {:.4e}, max error {err:.4e} (best-loss step {} error {:.4e}) after {} steps",
            f.loss.unwrap(),
            b.step,
            b.max_abs_error.unwrap(),
            r.steps_completed
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_6_riccati_experiment() {
    let r = train_preset("riccati");
    // the run's reference against an independent, ten times finer RK4
    let problem = riccati_problem();
    let grid = make_grid(problem.domain, 20).unwrap();
    let fine = rk4_solve(&problem, &grid, 10_000).unwrap();
    let reference_drift = fine.max_abs_error(&r.reference.ys);
    let f = r.final_.as_ref().unwrap();
    let b = r.best.as_ref().unwrap();
    let err = f.max_abs_error.unwrap();
    let max_steps = r.config.training.max_steps;
    let passed = r.reference.method == "rk4"
        && reference_drift <= 1e-9
        && err <= 0.1
        && b.step < max_steps
        && r.steps_completed <= 600;
    report(
        6,
        passed,
        &format!(
            "final loss {:.4e}, max error {err:.4e}; best loss {:.4e} at step {} (error {:.4e}); reference drift {reference_drift:.1e}",
            f.loss.unwrap(),
            b.loss.unwrap(),
            b.step,
            b.max_abs_error.unwrap()
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_7_rk4_oracle() {
    let p = linear_problem();
    let grid = make_grid(p.domain, 5).unwrap();
    let exact = ReferenceSolution::analytic(&p, &grid).unwrap();
    let errors: Vec<f64> = [10, 20, 40, 80]
        .iter()
        .map(|&s| exact.max_abs_error(&rk4_solve(&p, &grid, s).unwrap().ys))
        .collect();
    let slopes: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let mut agreement = 0.0f64;
    for p in [linear_problem(), stiff_problem()] {
        let grid = make_grid(p.domain, 20).unwrap();
        let exact = ReferenceSolution::analytic(&p, &grid).unwrap();
        agreement = agreement.max(exact.max_abs_error(&rk4_solve(&p, &grid, 100).unwrap().ys));
    }
    let passed = slopes.iter().all(|s| (s - 4.0).abs() <= 0.2) && agreement <= 1e-10;
    report(7, passed, &format!("slopes {slopes:.3?}, max error at 100 substeps {agreement:.2e}"));
    assert!(passed);
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_8_determinism() {
    let config = RunConfig::preset("riccati").unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_training(&config, a.path(), |_, _| {}).unwrap();
    run_training(&config, b.path(), |_, _| {}).unwrap();
    let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
    let passed = fa.len() >= 7 && fa == fb;
    report(8, passed, &format!("{} CSV files compared byte for byte", fa.len()));
    assert!(passed);
}
