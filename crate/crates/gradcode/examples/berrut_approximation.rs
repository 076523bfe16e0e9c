//! Approximate decoding when more workers straggle than the scheme was sized
//! for: Berrut's rational interpolant estimates the aggregate from whatever
//! arrived, and the smoothness bound prices the error.

use gradcode::approx::{approx_decode, berrut_error_bound, max_norm_derivatives};
use gradcode::exact::{encode_all_shares, slice_gradients, universal_poly, EvaluationGrid, SchemeParams};
use gradcode::placement::Placement;
use gradcode::verify::oracle_aggregate;
use std::collections::BTreeSet;

fn main() {
    // Twenty workers; partition k is missing only from worker k, so the
    // coded polynomial stays at the data scale.
    let n = 20usize;
    let gamma: Vec<BTreeSet<usize>> = (1..=n)
        .map(|w| (1..=5usize).filter(|&k| k != w).collect())
        .collect();
    let p = Placement::new(n, 5, gamma).expect("valid placement");

    // Designed for one straggler; m = 2 halves the communication.
    let params = SchemeParams::with_m(&p, 1, 0, 8, 2).expect("feasible");
    let grid = EvaluationGrid::<f64>::chebyshev_default(n, params.m).expect("distinct nodes");

    let gradients: Vec<Vec<f64>> = (0..5)
        .map(|k| (0..8).map(|t| ((k * 8 + t) as f64 * 0.37).sin()).collect())
        .collect();
    let sliced = slice_gradients(&gradients, params.m);
    let shares = encode_all_shares(&p, &grid, &sliced).expect("local encode");
    let oracle = oracle_aggregate(&gradients).expect("sum");

    println!("designed for s = {} stragglers; sweeping the realized count:", params.s);
    println!("s1  responders  max abs error   smoothness bound");
    let f = universal_poly(&p, &grid, &sliced);
    let (n1, n2) = max_norm_derivatives(&f);
    for s1 in [0usize, 1, 3, 5, 7] {
        // The s1 slowest workers miss the round.
        let keep: Vec<(f64, Vec<f64>)> = shares[..n - s1]
            .iter()
            .map(|sh| (sh.alpha, sh.payload.clone()))
            .collect();
        let approx = approx_decode(&keep, grid.betas(), 8).expect("two or more shares");
        let err = approx
            .iter()
            .zip(oracle.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let bound = berrut_error_bound(n, s1, n1, n2)
            .map(|r| format!("{:.3}", r.bound))
            .unwrap_or_else(|_| "out of regime".into());
        println!("{s1:<3} {:<11} {err:<15.6} {bound}", n - s1);
    }
    println!("\nno minimum responder count: even deep straggling still yields an estimate");
}
