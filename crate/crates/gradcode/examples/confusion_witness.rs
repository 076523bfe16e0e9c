//! Why the replication bound is tight: for a partition replicated only
//! 2a + s times, two runs with different aggregates deliver byte-identical
//! share stacks, so no decoder of any kind can recover the sum.

use gradcode::placement::Placement;
use gradcode::verify::{converse_search, converse_witness};

fn main() {
    // Partition 1 lives on workers 1 and 2 only; with one adversary (a = 1,
    // s = 0) that is exactly the threshold 2a + s = 2.
    let p = Placement::from_sets(3, 2, &[&[1, 2], &[1, 2], &[2]]).expect("valid placement");
    println!("partition 1 on workers {{1, 2}}, budget a=1, s=0");

    let w = converse_witness(&p, 0, 1, 2).expect("threshold placement admits a witness");
    println!("\nscenario construction:");
    println!("  hidden partition: {}", w.partition);
    println!("  stragglers:       {:?}", w.stragglers);
    println!("  adversaries (1):  {:?}", w.adversaries_one);
    println!("  adversaries (2):  {:?}", w.adversaries_two);
    println!("  aggregate (1):    {:?}", w.aggregate_one);
    println!("  aggregate (2):    {:?}", w.aggregate_two);
    println!("  delivered stacks byte-identical: {}", w.stacks_identical);
    for (worker, payload) in &w.delivered {
        println!("    worker {worker} delivers {payload:?}");
    }
    assert!(w.stacks_identical);
    assert_ne!(w.aggregate_one, w.aggregate_two);

    // One more replica breaks the construction: the exhaustive search over
    // the same scenario family comes up empty.
    let p = Placement::from_sets(3, 2, &[&[1, 2], &[1, 2], &[1, 2]]).expect("valid placement");
    println!("\nwith partition 1 on all three workers (r = 3 > 2):");
    match converse_search(&p, 0, 1, 2) {
        None => println!("  no witness exists in the scenario family — decoding is safe"),
        Some(_) => unreachable!("r > 2a + s admits no witness"),
    }
}
