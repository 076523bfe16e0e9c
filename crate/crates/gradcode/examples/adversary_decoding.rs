//! Decoding through corruption: a worker returns garbage, the error-locator
//! decoder recovers the exact aggregate anyway and names the culprit.

use gradcode::exact::{
    decode_with_errors, encode_all_shares, recover_aggregate, slice_gradients, EvaluationGrid,
    SchemeParams,
};
use gradcode::placement::{generate_placement, PlacementKind};
use gradcode::scalar::{format_rat, rat, Rat};
use gradcode::simulator::{corrupt_share, CorruptionStrategy};
use gradcode::verify::oracle_aggregate;

fn main() {
    // Six workers, every partition on at least four of them: room for one
    // straggler and one adversary (r > 2a + s).
    let p = generate_placement(6, 4, 4, PlacementKind::Uniform, 11).expect("valid placement");
    let params = SchemeParams::optimal(&p, 1, 1, 5).expect("feasible");
    println!(
        "r = {}, tolerating s={} straggler and a={} adversary at {} symbols/worker",
        p.replication(),
        params.s,
        params.a,
        params.part_len()
    );
    let grid = EvaluationGrid::integer_default(6, params.m).expect("distinct nodes");

    let gradients: Vec<Vec<Rat>> = (0..4)
        .map(|k| (0..5).map(|t| rat(3 * k as i64 - t as i64 + 1)).collect())
        .collect();
    let sliced = slice_gradients(&gradients, params.m);
    let shares = encode_all_shares(&p, &grid, &sliced).expect("local encode");

    // Worker 2 never answers; worker 5 lies.
    let mut delivered: Vec<_> = shares.into_iter().filter(|s| s.worker != 2).collect();
    for share in delivered.iter_mut() {
        if share.worker == 5 {
            share.payload = corrupt_share(
                &share.payload,
                &CorruptionStrategy::GaussianNoise { sigma: 4.0 },
                7,
                share.worker,
            );
            println!("worker 5 delivers a corrupted share");
        }
    }

    let outcome =
        decode_with_errors(&delivered, params.a, params.poly_degree(&p)).expect("decodable");
    let aggregate = recover_aggregate(&outcome.poly, &grid, 5);
    println!(
        "recovered aggregate: {:?}",
        aggregate.iter().map(format_rat).collect::<Vec<_>>()
    );
    println!("flagged workers: {:?}", outcome.flagged);

    assert_eq!(aggregate, oracle_aggregate(&gradients).expect("sum"));
    assert!(outcome.flagged.contains(&5));
    println!("exact recovery despite the lie; the culprit is identified");
}
