//! Evaluate a polynomial of the aggregated gradient matrix without ever
//! materializing the aggregate: workers ship h(coded combination), the
//! master interpolates h∘f and reads h(sum G_k) off the reserved node.

use gradcode::matrix::{
    eval_matrix_poly, matrix_decode, matrix_encode_all, matrix_feasible, matrix_recover,
    MatrixPoly, SquareMat,
};
use gradcode::placement::{generate_placement, PlacementKind};
use gradcode::scalar::{format_rat, rat, ratio, Rat};

fn main() {
    let n = 6;
    let (s, a, deg_h) = (1usize, 0usize, 2usize);
    let r_min = matrix_feasible(n, s, a, deg_h).expect("margin nonnegative");
    println!("N={n}, s={s}, a={a}, deg h={deg_h}: need replication >= {r_min}");

    let p = generate_placement(n, 3, r_min, PlacementKind::Uniform, 5).expect("valid placement");

    // h(X) = X^2 - 2X + (1/2) I
    let h = MatrixPoly::new(vec![ratio(1, 2), rat(-2), rat(1)]).expect("degree 2");
    let d = 3;
    let matrices: Vec<SquareMat<Rat>> = (0..3)
        .map(|k| {
            SquareMat::from_flat(
                d,
                (0..d * d).map(|t| rat((k * t) as i64 % 5 - 2)).collect(),
            )
            .expect("square")
        })
        .collect();

    let alphas: Vec<Rat> = (1..=n as i64).map(rat).collect();
    let beta = rat(0);
    let shares = matrix_encode_all(&p, &alphas, &beta, &h, &matrices).expect("local encode");
    println!("each worker ships one {d}x{d} matrix ({} symbols)", d * d);

    // The slowest worker misses the round.
    let delivered: Vec<_> = shares.into_iter().filter(|sh| sh.worker != 3).collect();
    let degree = (n - p.replication()) * deg_h;
    let (hf, flagged) = matrix_decode(&delivered, a, degree).expect("decodable");
    let recovered = matrix_recover(&hf, &beta);

    let mut total = SquareMat::zeros(d);
    for g in &matrices {
        total = total.add(g);
    }
    let expect = eval_matrix_poly(&h, &total);
    assert_eq!(recovered, expect);
    assert!(flagged.is_empty());

    println!("h(sum G_k) recovered exactly:");
    for i in 0..d {
        let row: Vec<String> = (0..d).map(|j| format_rat(recovered.get(i, j))).collect();
        println!("  {row:?}");
    }
}
