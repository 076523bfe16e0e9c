//! The wire formats: placements and shares as JSON, in both arithmetic
//! modes. Rationals travel as exact "p/q" strings, floats as IEEE numbers.

use gradcode::exact::{encode_share, slice_gradients, CodedShare, EvaluationGrid, SchemeParams};
use gradcode::placement::Placement;
use gradcode::scalar::{ratio, Rat};

fn main() {
    let p = Placement::five_worker_example();
    println!("placement document:");
    println!("{}", serde_json::to_string_pretty(&p).expect("serializes"));

    let params = SchemeParams::optimal(&p, 1, 0, 4).expect("feasible");
    let grid = EvaluationGrid::integer_default(5, params.m).expect("distinct nodes");
    let gradients: Vec<Vec<Rat>> = (1..=5)
        .map(|k| (0..4).map(|t| ratio(k * 2 + t, 3)).collect())
        .collect();
    let sliced = slice_gradients(&gradients, params.m);

    let share = encode_share(&p, &grid, &sliced.restrict_to(&p, 3)).expect("local encode");
    let text = share.to_json();
    println!("\nexact-mode share from worker 3:");
    println!("{text}");
    let parsed = CodedShare::<Rat>::from_json(&text).expect("round trip");
    assert_eq!(parsed, share);

    // Same scheme in float mode.
    let fgrid = EvaluationGrid::<f64>::chebyshev_default(5, params.m).expect("distinct nodes");
    let fgrads: Vec<Vec<f64>> = gradients
        .iter()
        .map(|g| g.iter().map(gradcode::scalar::rat_to_f64).collect())
        .collect();
    let fsliced = slice_gradients(&fgrads, params.m);
    let fshare = encode_share(&p, &fgrid, &fsliced.restrict_to(&p, 3)).expect("local encode");
    println!("\nfloat-mode share from worker 3:");
    println!("{}", fshare.to_json());
}
