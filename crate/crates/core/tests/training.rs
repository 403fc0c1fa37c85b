use cvqode_core::cvqnn::{Circuit, NetworkConfig};
use cvqode_core::ode::{evaluate_loss, make_grid, train, TrainConfig};
use cvqode_core::problems::linear_problem;

#[test]
fn converged_linear_network_generalizes_to_finer_grid() {
    let problem = linear_problem();
    let net = NetworkConfig::new(2, 2, 10).unwrap();
    let tc = TrainConfig::default();
    let state = train(&problem, &net, &tc).unwrap();
    assert_eq!(state.step, 1000);
    assert_eq!(state.loss_history.len(), 1000);
    let steps: Vec<usize> = state.snapshots.iter().map(|s| s.step).collect();
    assert_eq!(steps, [0, 20, 100, 999]);

    let best = state.best.as_ref().unwrap();
    let min = state.loss_history.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(best.loss, min);
    assert_eq!(state.loss_history[best.step], best.loss);

    let circuit = Circuit::new(&best.params, &net).unwrap();
    let coarse = evaluate_loss(&circuit, &problem, &make_grid(problem.domain, 20).unwrap()).unwrap();
    let fine = evaluate_loss(&circuit, &problem, &make_grid(problem.domain, 40).unwrap()).unwrap();
    assert_eq!(coarse.loss, best.loss);
    let ratio = fine.loss / coarse.loss;
    assert!((1.0 / 3.0..=3.0).contains(&ratio), "coarse {} fine {}", coarse.loss, fine.loss);
}
