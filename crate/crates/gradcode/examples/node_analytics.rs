//! Node-quality analytics behind the approximate decoder: Lebesgue-constant
//! growth on Chebyshev subsets, the gap-ratio certificate, and why plain
//! polynomial interpolation on equispaced nodes is numerically doomed.

use gradcode::approx::{chebyshev_second_kind, lebesgue_constant_estimate, well_spaced_constants};
use gradcode::verify::vandermonde_condition;

fn main() {
    println!("Lebesgue constants for Chebyshev node families (with 3 deletions):");
    println!("n    full       deleted    certified bound");
    for n in [8usize, 16, 32, 64] {
        let full = chebyshev_second_kind(n);
        let lam_full = lebesgue_constant_estimate(&full, 50);
        let mut deleted = full.clone();
        // Drop three interior nodes.
        deleted.remove(n / 2);
        deleted.remove(n / 3);
        deleted.remove(n / 4);
        let report = well_spaced_constants(&deleted).expect("enough nodes");
        println!(
            "{n:<4} {lam_full:<10.4} {:<10.4} {:.2}  (rho={:.2}, nu={:.2})",
            report.lebesgue_estimate, report.lebesgue_bound, report.rho, report.nu
        );
    }

    println!("\ncondition number of the interpolation system:");
    println!("n    equispaced 1..n    chebyshev");
    for n in [4usize, 8, 12] {
        let equi: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let cheb = chebyshev_second_kind(n - 1);
        println!(
            "{n:<4} {:<18.3e} {:.3e}",
            vandermonde_condition(&equi).expect("distinct"),
            vandermonde_condition(&cheb).expect("distinct"),
        );
    }
    println!("\nequispaced conditioning explodes; rational decoding sidesteps the solve entirely");
}
