//! Plan a coded aggregation scheme for a heterogeneous placement: optimal
//! communication cost, feasibility, and the fallback when only a suffix of
//! the partitions can be saved.

use gradcode::placement::{
    feasibility_check, optimal_cost, partial_sum_plan, CostQuery, Placement,
};
use gradcode::scalar::format_rat;

fn main() {
    // Five workers with very different storage: worker 1 holds everything,
    // worker 3 holds a single partition.
    let p = Placement::five_worker_example();
    println!("placement: {} workers, {} partitions", p.n_workers(), p.n_partitions());
    for n in 1..=p.n_workers() {
        println!("  worker {n} holds {:?}", p.worker_partitions(n));
    }
    let sets = p.assignment_sets();
    for (k, workers) in sets.iter().enumerate() {
        println!("  partition {} on workers {:?}", k + 1, workers);
    }
    println!("minimum replication r = {}", p.replication());

    // One straggler, no adversaries, gradients of dimension 10.
    let q = CostQuery::new(1, 0, 10);
    let report = optimal_cost(&p, &q).expect("feasible");
    println!(
        "\ns={}, a={}, d={}: optimal cost {} symbols/worker (m={}, share length {})",
        q.s,
        q.a,
        q.d,
        format_rat(&report.cost),
        report.m,
        report.per_share_len
    );

    // Tolerating an adversary on top would need r > 2a + s = 3.
    println!("\nwith one adversary on top:");
    match optimal_cost(&p, &CostQuery::new(1, 1, 10)) {
        Ok(r) => println!("  cost {}", format_rat(&r.cost)),
        Err(e) => println!("  {e}"),
    }
    println!("  verdict: {:?}", feasibility_check(&p, 1, 1));

    // A tight per-worker budget forces dropping the weakest partitions.
    let plan = partial_sum_plan(&p, 1, 1, 10, 10);
    match plan {
        Ok(plan) => println!(
            "  budget fallback: aggregate partitions {:?} at {} symbols/worker",
            plan.partitions, plan.per_share_len
        ),
        Err(e) => println!("  budget fallback: {e}"),
    }
}
