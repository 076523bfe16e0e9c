//! Exact round trip: slice gradients, encode one share per worker, lose a
//! straggler, interpolate, and read the aggregate back bit-exactly.

use gradcode::exact::{
    encode_all_shares, interpolate_exact, recover_aggregate, slice_gradients, EvaluationGrid,
    SchemeParams,
};
use gradcode::placement::Placement;
use gradcode::scalar::{format_rat, ratio, Rat};
use gradcode::verify::oracle_aggregate;

fn main() {
    let p = Placement::five_worker_example();
    let params = SchemeParams::optimal(&p, 1, 0, 4).expect("feasible");
    println!(
        "scheme: s={}, a={}, m={}, share length {}",
        params.s,
        params.a,
        params.m,
        params.part_len()
    );
    let grid = EvaluationGrid::integer_default(p.n_workers(), params.m).expect("distinct nodes");

    // One small gradient per partition, exact rationals.
    let gradients: Vec<Vec<Rat>> = (1..=5)
        .map(|k| (0..4).map(|t| ratio(k * 7 - t * 3, 2)).collect())
        .collect();
    let sliced = slice_gradients(&gradients, params.m);
    let shares = encode_all_shares(&p, &grid, &sliced).expect("local encode");
    for share in &shares {
        let payload: Vec<String> = share.payload.iter().map(format_rat).collect();
        println!("worker {} sends {:?}", share.worker, payload);
    }

    // Worker 1 straggles; any four shares determine the polynomial.
    let degree = params.poly_degree(&p);
    let points: Vec<(Rat, Vec<Rat>)> = shares[1..]
        .iter()
        .map(|s| (s.alpha.clone(), s.payload.clone()))
        .collect();
    let f = interpolate_exact(&points, degree).expect("enough shares");
    let aggregate = recover_aggregate(&f, &grid, 4);

    let expect = oracle_aggregate(&gradients).expect("equal lengths");
    println!(
        "\nrecovered aggregate: {:?}",
        aggregate.iter().map(format_rat).collect::<Vec<_>>()
    );
    assert_eq!(aggregate, expect);
    println!("matches the direct sum exactly");
}
