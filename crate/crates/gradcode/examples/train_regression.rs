//! Coded training end to end: gradient descent on least squares where every
//! aggregation round goes through encode -> straggle -> decode. In exact
//! mode the trajectory reproduces centralized descent bit for bit.

use gradcode::exact::SchemeParams;
use gradcode::placement::Placement;
use gradcode::scalar::{Arithmetic, Rat};
use gradcode::simulator::{
    centralized_gd, synthetic_regression, train_gd, CorruptionStrategy, DecodeMode, LatencyModel,
    TrainConfig, WorkerProfile,
};

fn main() {
    let p = Placement::five_worker_example();
    let params = SchemeParams::optimal(&p, 1, 0, 4).expect("feasible");

    let cfg = TrainConfig {
        dataset: synthetic_regression(20, 4, 0.125, 3),
        k_partitions: 5,
        eta: 0.05,
        iterations: 30,
        mode: DecodeMode::Exact,
        cutoff: None,
    };

    // Random latencies: a different worker straggles almost every round.
    let profiles: Vec<WorkerProfile> = (1..=5)
        .map(|w| {
            WorkerProfile::honest(LatencyModel::ShiftedExponential {
                shift: 0.1 * w as f64,
                rate: 2.0,
            })
        })
        .collect();

    let log = train_gd(
        &cfg,
        &p,
        &params,
        Arithmetic::Rational,
        &profiles,
        &CorruptionStrategy::SignFlipScale { c: -2.0 },
        42,
    )
    .expect("training runs");

    println!("iter  loss          responders");
    for r in log.records.iter().step_by(5) {
        println!("{:<5} {:<13.6} {}", r.iter, r.loss, r.responders);
    }

    let (central, central_losses) = centralized_gd::<Rat>(&cfg).expect("centralized");
    assert_eq!(log.weights_rational.as_ref(), Some(&central));
    println!(
        "\ncoded trajectory is bit-identical to centralized descent ({} iterations)",
        cfg.iterations
    );
    println!(
        "final loss {:.6} (centralized {:.6})",
        log.records.last().unwrap().loss,
        central_losses.last().unwrap()
    );
}
