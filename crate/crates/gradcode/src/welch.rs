//! Error-tolerant interpolation over the rationals.
//!
//! Recovers a vector-valued polynomial `f` of declared degree `D` from `R`
//! evaluations of which at most `a` are corrupted, in the classic
//! locator/quotient formulation: find a monic locator `E` of degree `e` and
//! per-component `Q_c` of degree `<= D + e` with `Q_c(x_i) = y_ic * E(x_i)`
//! for every received point, then divide exactly. Corruption is per response
//! (a corrupt worker mangles its whole vector), so one locator is shared by
//! all components: each component contributes its leftover constraints after
//! eliminating its own `Q_c` unknowns, and the pooled system pins down `E`.
//!
//! The locator degree is scanned upward from zero and the first consistent,
//! exactly-divisible solution is returned. With `R >= D + 2a + 1` any such
//! solution agrees with the true polynomial on more than `D` points, so the
//! answer is unique regardless of which `e` accepts.

use crate::exact::CodingError;
use crate::poly::{Poly, VectorPoly};
use crate::scalar::{Rat, Scalar};
use num::Zero;

/// Row-echelon elimination of the first `prefix` columns. Rows that end up
/// with a zero prefix are returned restricted to the remaining columns.
fn residual_after_prefix_elimination(
    mut rows: Vec<Vec<Rat>>,
    prefix: usize,
) -> Vec<Vec<Rat>> {
    let n_rows = rows.len();
    let mut rank = 0;
    for col in 0..prefix {
        let Some(pivot) = (rank..n_rows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_val = rows[rank][col].clone();
        for r in (rank + 1)..n_rows {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone() / pivot_val.clone();
            for c in col..rows[r].len() {
                let delta = factor.clone() * rows[rank][c].clone();
                rows[r][c] = rows[r][c].clone() - delta;
            }
        }
        rank += 1;
        if rank == n_rows {
            break;
        }
    }
    rows.drain(..rank);
    rows.into_iter().map(|row| row[prefix..].to_vec()).collect()
}

/// Solves an augmented system (last column is the right-hand side) exactly.
/// Returns `None` when inconsistent; free variables are set to zero.
#[allow(clippy::needless_range_loop)] // pivot row and target row are live at once
fn solve_augmented(mut rows: Vec<Vec<Rat>>, n_unknowns: usize) -> Option<Vec<Rat>> {
    let n_rows = rows.len();
    let mut rank = 0;
    let mut pivot_cols = Vec::new();
    for col in 0..n_unknowns {
        let Some(pivot) = (rank..n_rows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_val = rows[rank][col].clone();
        for r in (rank + 1)..n_rows {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone() / pivot_val.clone();
            for c in col..=n_unknowns {
                let delta = factor.clone() * rows[rank][c].clone();
                rows[r][c] = rows[r][c].clone() - delta;
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == n_rows {
            break;
        }
    }
    for row in &rows[rank..] {
        if !row[n_unknowns].is_zero() {
            return None;
        }
    }
    let mut solution = vec![Rat::zero(); n_unknowns];
    for row_idx in (0..rank).rev() {
        let col = pivot_cols[row_idx];
        let mut acc = rows[row_idx][n_unknowns].clone();
        for c in (col + 1)..n_unknowns {
            if !rows[row_idx][c].is_zero() {
                acc -= rows[row_idx][c].clone() * solution[c].clone();
            }
        }
        solution[col] = acc / rows[row_idx][col].clone();
    }
    Some(solution)
}

/// Attempts recovery with a locator of exact degree `e`. Returns the decoded
/// polynomial when the pooled system is consistent and division is exact.
fn try_locator_degree(
    alphas: &[Rat],
    values: &[Vec<Rat>],
    declared_degree: usize,
    e: usize,
) -> Option<VectorPoly<Rat>> {
    let n_points = alphas.len();
    let width = values[0].len();
    let q_len = declared_degree + e + 1;

    // Shared prefix: Vandermonde columns for the Q_c unknowns. Suffix: per
    // component, e locator columns and the augmented right-hand side.
    let mut rows = Vec::with_capacity(n_points);
    for (i, alpha) in alphas.iter().enumerate() {
        let mut powers = Vec::with_capacity(q_len.max(e + 1));
        let mut acc = Rat::from_int(1);
        for _ in 0..q_len.max(e + 1) {
            powers.push(acc.clone());
            acc *= alpha.clone();
        }
        let mut row = Vec::with_capacity(q_len + width * (e + 1));
        row.extend_from_slice(&powers[..q_len]);
        for y in &values[i] {
            for p in &powers[..e] {
                row.push(-(y.clone() * p.clone()));
            }
            row.push(y.clone() * powers[e].clone());
        }
        rows.push(row);
    }
    let residual = residual_after_prefix_elimination(rows, q_len);

    // Pool each component's residual constraints on the locator unknowns.
    let mut eps_rows = Vec::new();
    for row in &residual {
        for c in 0..width {
            let chunk = &row[c * (e + 1)..(c + 1) * (e + 1)];
            if chunk.iter().all(|v| v.is_zero()) {
                continue;
            }
            eps_rows.push(chunk.to_vec());
        }
    }
    let eps = if e == 0 {
        if eps_rows.iter().any(|r| !r[0].is_zero()) {
            return None;
        }
        Vec::new()
    } else {
        solve_augmented(eps_rows, e)?
    };

    let mut locator_coeffs = eps;
    locator_coeffs.push(Rat::from_int(1));
    let locator = Poly::from_coeffs(locator_coeffs);

    // Reconstruct each component against the now-known locator and check all
    // points, then divide exactly.
    let locator_at: Vec<Rat> = alphas.iter().map(|x| locator.eval(x)).collect();
    let mut components = Vec::with_capacity(width);
    for c in 0..width {
        let points: Vec<(Rat, Rat)> = alphas
            .iter()
            .zip(values.iter())
            .zip(locator_at.iter())
            .map(|((x, y), ev)| (x.clone(), y[c].clone() * ev.clone()))
            .collect();
        let q = Poly::newton_interpolate(&points[..q_len]);
        for (x, z) in &points[q_len..] {
            if q.eval(x) != *z {
                return None;
            }
        }
        let (f_c, rem) = q.div_rem(&locator);
        if !rem.is_zero() || f_c.degree() > declared_degree {
            return None;
        }
        components.push(f_c);
    }
    Some(VectorPoly::from_components(&components))
}

/// Decodes vector shares with up to `a` arbitrarily corrupted responses.
/// Returns the recovered polynomial and the positions (indices into the
/// input) whose payloads disagree with it.
pub fn decode_vector_shares(
    alphas: &[Rat],
    values: &[Vec<Rat>],
    declared_degree: usize,
    a: usize,
) -> Result<(VectorPoly<Rat>, Vec<usize>), CodingError> {
    let needed = declared_degree + 2 * a + 1;
    if alphas.len() < needed {
        return Err(CodingError::InsufficientShares {
            needed,
            got: alphas.len(),
        });
    }
    assert_eq!(alphas.len(), values.len());
    for i in 0..alphas.len() {
        for j in (i + 1)..alphas.len() {
            if alphas[i] == alphas[j] {
                return Err(CodingError::DuplicateNode);
            }
        }
    }
    let width = values[0].len();
    for v in values {
        if v.len() != width {
            return Err(CodingError::DimensionMismatch {
                expected: width,
                got: v.len(),
            });
        }
    }

    for e in 0..=a {
        let Some(poly) = try_locator_degree(alphas, values, declared_degree, e) else {
            continue;
        };
        let flagged: Vec<usize> = (0..alphas.len())
            .filter(|&i| poly.eval(&alphas[i]) != values[i])
            .collect();
        if flagged.len() > a {
            continue;
        }
        return Ok((poly, flagged));
    }
    Err(CodingError::TooManyErrors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ratio};
    use rand::Rng;

    fn eval_points(poly: &VectorPoly<Rat>, n: usize) -> (Vec<Rat>, Vec<Vec<Rat>>) {
        let alphas: Vec<Rat> = (1..=n as i64).map(rat).collect();
        let values = alphas.iter().map(|x| poly.eval(x)).collect();
        (alphas, values)
    }

    #[test]
    fn clean_shares_decode_with_zero_locator() {
        // f(x) = (2x + 1, x^2) at nodes 1..5, a = 1.
        let f = VectorPoly::from_coeffs(
            vec![
                vec![rat(1), rat(0)],
                vec![rat(2), rat(0)],
                vec![rat(0), rat(1)],
            ],
            2,
        );
        let (alphas, values) = eval_points(&f, 5);
        let (rec, flagged) = decode_vector_shares(&alphas, &values, 2, 1).unwrap();
        assert_eq!(rec.component(0), f.component(0));
        assert_eq!(rec.component(1), f.component(1));
        assert!(flagged.is_empty());
    }

    #[test]
    fn single_error_is_corrected_and_flagged() {
        // Degree-1 scalar f(x) = 2x + 1 at nodes 1..4, node 3 replaced.
        let f = VectorPoly::from_coeffs(vec![vec![rat(1)], vec![rat(2)]], 1);
        let (alphas, mut values) = eval_points(&f, 4);
        values[2] = vec![rat(100)];
        let (rec, flagged) = decode_vector_shares(&alphas, &values, 1, 1).unwrap();
        assert_eq!(rec.component(0).coeffs(), &[rat(1), rat(2)]);
        assert_eq!(flagged, vec![2]);
    }

    #[test]
    fn corruption_in_one_component_only() {
        // The locator is shared: a worker corrupt in just one component must
        // still be found even though the other component looks clean.
        let f = VectorPoly::from_coeffs(
            vec![vec![rat(3), rat(-1)], vec![rat(0), rat(5)]],
            2,
        );
        let (alphas, mut values) = eval_points(&f, 5);
        values[1][1] = values[1][1].clone() + rat(7);
        let (rec, flagged) = decode_vector_shares(&alphas, &values, 1, 1).unwrap();
        assert_eq!(rec.eval(&rat(0)), vec![rat(3), rat(-1)]);
        assert_eq!(flagged, vec![1]);
    }

    #[test]
    fn exhaustive_small_instances() {
        // Every (straggler, adversary) pattern at small sizes, cross-checked
        // against brute force over all single-error hypotheses.
        let mut rng = crate::streams::substream(5, "welch-exhaustive", 0);
        for _ in 0..25 {
            let degree = rng.gen_range(0..=2usize);
            let a = rng.gen_range(0..=2usize);
            let n = degree + 2 * a + 1 + rng.gen_range(0..=1usize);
            let width = rng.gen_range(1..=2usize);
            let coeffs: Vec<Vec<Rat>> = (0..=degree)
                .map(|_| (0..width).map(|_| ratio(rng.gen_range(-9..=9), 1)).collect())
                .collect();
            let f = VectorPoly::from_coeffs(coeffs, width);
            let (alphas, clean) = eval_points(&f, n);

            // Choose up to `a` corrupt positions.
            let n_bad = rng.gen_range(0..=a.min(n));
            let mut bad: Vec<usize> = (0..n).collect();
            use rand::seq::SliceRandom;
            bad.shuffle(&mut rng);
            bad.truncate(n_bad);

            let mut values = clean.clone();
            for &b in &bad {
                for v in values[b].iter_mut() {
                    *v = v.clone() * rat(-2) + rat(1);
                }
            }
            let (rec, flagged) =
                decode_vector_shares(&alphas, &values, degree, a).unwrap();
            for i in 0..n {
                assert_eq!(rec.eval(&alphas[i]), clean[i]);
            }
            let mut bad_sorted = bad.clone();
            bad_sorted.sort_unstable();
            for pos in &flagged {
                assert!(bad_sorted.contains(pos), "flagged honest worker {pos}");
            }
        }
    }

    #[test]
    fn too_many_errors_detected() {
        let f = VectorPoly::from_coeffs(vec![vec![rat(1)], vec![rat(1)]], 1);
        let (alphas, mut values) = eval_points(&f, 4);
        // Two corruptions but budget one: 4 points cannot localize them.
        values[0] = vec![rat(50)];
        values[2] = vec![rat(-50)];
        assert_eq!(
            decode_vector_shares(&alphas, &values, 1, 1).unwrap_err(),
            CodingError::TooManyErrors
        );
    }

    #[test]
    fn insufficient_and_duplicate_inputs() {
        let alphas = vec![rat(1), rat(2)];
        let values = vec![vec![rat(1)], vec![rat(2)]];
        assert_eq!(
            decode_vector_shares(&alphas, &values, 1, 1).unwrap_err(),
            CodingError::InsufficientShares { needed: 4, got: 2 }
        );
        let alphas = vec![rat(1), rat(1), rat(2), rat(3)];
        let values = vec![vec![rat(1)]; 4];
        assert_eq!(
            decode_vector_shares(&alphas, &values, 1, 1).unwrap_err(),
            CodingError::DuplicateNode
        );
    }

    #[test]
    fn rank_deficient_uses_smallest_locator() {
        // Fewer actual errors than the budget: the e=0 pass already accepts,
        // so nothing is flagged and the recovery is exact.
        let f = VectorPoly::from_coeffs(vec![vec![rat(4)], vec![rat(-3)]], 1);
        let (alphas, values) = eval_points(&f, 6);
        let (rec, flagged) = decode_vector_shares(&alphas, &values, 1, 2).unwrap();
        assert_eq!(rec.component(0).coeffs(), &[rat(4), rat(-3)]);
        assert!(flagged.is_empty());
    }
}
