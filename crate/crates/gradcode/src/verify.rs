//! Independent oracles and adversarial constructions.
//!
//! `oracle_aggregate` is the ground truth the coded pipeline is always
//! checked against. `converse_witness` makes the impossibility side of the
//! replication bound executable: when some partition is replicated at most
//! `2a + s` times, it constructs two runs with different aggregates whose
//! delivered share stacks are byte-identical, so no decoder whatsoever can
//! tell them apart. `roundtrip_check` drives the achievability side over
//! random or exhaustive straggler/adversary realizations.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{
    self, encoding_matrix, stack_slices, CodedShare, EvaluationGrid, SchemeParams,
};
use crate::placement::Placement;
use crate::scalar::{format_rat, Rat, Scalar};
use crate::simulator::{corrupt_share, CorruptionStrategy};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("not applicable: replication {replication} exceeds the threshold {threshold}")]
    NotApplicable { replication: usize, threshold: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("singular interpolation matrix (duplicate nodes?)")]
    SingularMatrix,
}

/// Ground truth: the componentwise sum of all partial gradients.
pub fn oracle_aggregate<T: Scalar>(gradients: &[Vec<T>]) -> Result<Vec<T>, VerifyError> {
    let Some(first) = gradients.first() else {
        return Err(VerifyError::DimensionMismatch { expected: 1, got: 0 });
    };
    let d = first.len();
    let mut sum = vec![T::zero(); d];
    for g in gradients {
        if g.len() != d {
            return Err(VerifyError::DimensionMismatch {
                expected: d,
                got: g.len(),
            });
        }
        for (acc, v) in sum.iter_mut().zip(g.iter()) {
            *acc = acc.clone() + v.clone();
        }
    }
    Ok(sum)
}

/// Two complete runs that a decoder cannot distinguish: same stragglers, same
/// delivered bytes, different aggregates.
#[derive(Clone, Debug, Serialize)]
pub struct ConverseWitness {
    /// The under-replicated partition whose gradient is being hidden.
    pub partition: usize,
    pub stragglers: BTreeSet<usize>,
    pub adversaries_one: BTreeSet<usize>,
    pub adversaries_two: BTreeSet<usize>,
    /// Delivered stack common to both scenarios, serialized per worker.
    pub delivered: Vec<(usize, Vec<String>)>,
    pub aggregate_one: Vec<String>,
    pub aggregate_two: Vec<String>,
    /// Byte equality of the two delivered stacks (always true on success).
    pub stacks_identical: bool,
}

fn delivered_stack(
    image: &[Rat],
    part_len: usize,
    stragglers: &BTreeSet<usize>,
    epsilons: &[(usize, Vec<Rat>)],
    n_workers: usize,
) -> Vec<(usize, Vec<Rat>)> {
    (1..=n_workers)
        .filter(|w| !stragglers.contains(w))
        .map(|w| {
            let mut payload = image[(w - 1) * part_len..w * part_len].to_vec();
            if let Some((_, eps)) = epsilons.iter().find(|(n, _)| *n == w) {
                for (p, e) in payload.iter_mut().zip(eps.iter()) {
                    *p = p.clone() + e.clone();
                }
            }
            (w, payload)
        })
        .collect()
}

fn serialize_stack(stack: &[(usize, Vec<Rat>)]) -> Vec<(usize, Vec<String>)> {
    stack
        .iter()
        .map(|(w, payload)| (*w, payload.iter().map(format_rat).collect()))
        .collect()
}

/// Constructs the confusion witness for a placement where some partition is
/// replicated at most `2a + s` times. The two runs share every gradient
/// except partition `j`'s, straggle `s` of `j`'s holders, and split the
/// remaining holders between the two adversary sets, each patching its
/// shares to the other run's values. Returns `NotApplicable` when
/// `r > 2a + s` (the decodable regime).
pub fn converse_witness(
    p: &Placement,
    s: usize,
    a: usize,
    d: usize,
) -> Result<ConverseWitness, VerifyError> {
    let threshold = 2 * a + s;
    let r = p.replication();
    if r > threshold {
        return Err(VerifyError::NotApplicable {
            replication: r,
            threshold,
        });
    }
    let j = p.limiting_partition();
    let holders: Vec<usize> = p.assignment_sets()[j - 1].iter().copied().collect();
    let n_straggle = s.min(holders.len());
    let stragglers: BTreeSet<usize> = holders[..n_straggle].iter().copied().collect();
    let exposed: Vec<usize> = holders[n_straggle..].to_vec();
    build_witness(p, a, d, j, &stragglers, &exposed)
        .ok_or(VerifyError::NotApplicable {
            replication: r,
            threshold,
        })
}

/// Core construction shared by [`converse_witness`] and [`converse_search`].
/// Returns `None` when the differing shares cannot all be covered by two
/// adversary sets of size `a`.
fn build_witness(
    p: &Placement,
    a: usize,
    d: usize,
    partition: usize,
    stragglers: &BTreeSet<usize>,
    _exposed_hint: &[usize],
) -> Option<ConverseWitness> {
    let n = p.n_workers();
    let k = p.n_partitions();
    // The demonstration uses this crate's own linear code with m = 1; the
    // construction only needs locality and the adversary's freedom, so any
    // concrete linear encoder would do.
    let params = SchemeParams { s: stragglers.len(), a, m: 1, d };
    let grid = EvaluationGrid::integer_default(n, 1).ok()?;
    let mat = encoding_matrix(p, &grid, &params);

    // Shared gradients for every partition except `partition`, which flips
    // between zero and the first unit vector.
    let make_gradients = |flip: bool| -> Vec<Vec<Rat>> {
        (1..=k)
            .map(|kk| {
                if kk == partition {
                    let mut g = vec![Rat::from_int(0); d];
                    if flip {
                        g[0] = Rat::from_int(1);
                    }
                    g
                } else {
                    (0..d).map(|t| Rat::from_int((kk + t) as i64)).collect()
                }
            })
            .collect()
    };
    let grads_one = make_gradients(false);
    let grads_two = make_gradients(true);
    let image_one = mat.apply(&stack_slices(&exact::slice_gradients(&grads_one, 1)));
    let image_two = mat.apply(&stack_slices(&exact::slice_gradients(&grads_two, 1)));
    let part_len = params.part_len();

    // Workers whose honest shares differ between the runs.
    let differing: Vec<usize> = (1..=n)
        .filter(|w| !stragglers.contains(w))
        .filter(|&w| image_one[(w - 1) * part_len..w * part_len] != image_two[(w - 1) * part_len..w * part_len])
        .collect();
    if differing.len() > 2 * a {
        return None;
    }
    let split = differing.len().min(a);
    let adversaries_one: BTreeSet<usize> = differing[..split].iter().copied().collect();
    let adversaries_two: BTreeSet<usize> = differing[split..].iter().copied().collect();

    // Scenario one patches its first group to look like run two; scenario two
    // patches the second group to look like run one. Both deliveries agree.
    let eps_one: Vec<(usize, Vec<Rat>)> = adversaries_one
        .iter()
        .map(|&w| {
            let row = (w - 1) * part_len..w * part_len;
            let eps = image_two[row.clone()]
                .iter()
                .zip(image_one[row].iter())
                .map(|(b, a)| b.clone() - a.clone())
                .collect();
            (w, eps)
        })
        .collect();
    let eps_two: Vec<(usize, Vec<Rat>)> = adversaries_two
        .iter()
        .map(|&w| {
            let row = (w - 1) * part_len..w * part_len;
            let eps = image_one[row.clone()]
                .iter()
                .zip(image_two[row].iter())
                .map(|(a, b)| a.clone() - b.clone())
                .collect();
            (w, eps)
        })
        .collect();

    let stack_one = delivered_stack(&image_one, part_len, stragglers, &eps_one, n);
    let stack_two = delivered_stack(&image_two, part_len, stragglers, &eps_two, n);
    let ser_one = serialize_stack(&stack_one);
    let ser_two = serialize_stack(&stack_two);
    let identical = serde_json::to_vec(&ser_one).unwrap() == serde_json::to_vec(&ser_two).unwrap();
    if !identical {
        return None;
    }
    let agg_one = oracle_aggregate(&grads_one).unwrap();
    let agg_two = oracle_aggregate(&grads_two).unwrap();
    Some(ConverseWitness {
        partition,
        stragglers: stragglers.clone(),
        adversaries_one,
        adversaries_two,
        delivered: ser_one,
        aggregate_one: agg_one.iter().map(format_rat).collect(),
        aggregate_two: agg_two.iter().map(format_rat).collect(),
        stacks_identical: identical,
    })
}

fn subsets_of_size(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    if size > items.len() {
        return Vec::new();
    }
    if size == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in subsets_of_size(&items[i + 1..], size - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Exhaustive search over the confusion family: every partition, every
/// straggler subset of its holders, canonical adversary split. Returns the
/// first witness found, or `None` — which, for `r > 2a + s`, is the
/// executable statement that the family cannot fool the decoder.
pub fn converse_search(p: &Placement, s: usize, a: usize, d: usize) -> Option<ConverseWitness> {
    for j in 1..=p.n_partitions() {
        let holders: Vec<usize> = p.assignment_sets()[j - 1].iter().copied().collect();
        let n_straggle = s.min(holders.len());
        for straggler_set in subsets_of_size(&holders, n_straggle) {
            let stragglers: BTreeSet<usize> = straggler_set.iter().copied().collect();
            let exposed: Vec<usize> = holders
                .iter()
                .copied()
                .filter(|w| !stragglers.contains(w))
                .collect();
            if let Some(w) = build_witness(p, a, d, j, &stragglers, &exposed) {
                return Some(w);
            }
        }
    }
    None
}

/// One failed round-trip case.
#[derive(Clone, Debug, Serialize)]
pub struct RoundtripFailure {
    pub stragglers: BTreeSet<usize>,
    pub adversaries: BTreeSet<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundtripReport {
    pub cases_run: usize,
    pub failures: Vec<RoundtripFailure>,
}

impl RoundtripReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Drives encode -> straggle -> corrupt -> decode -> compare against the
/// summation oracle. With `exhaustive` set and a small cluster, every
/// straggler subset of size <= s crossed with every adversary subset of size
/// <= a is exercised (sign-flip corruption); otherwise 20 sampled pairs.
/// Failures are reported, not panicked, so the caller can render them.
pub fn roundtrip_check(
    p: &Placement,
    s: usize,
    a: usize,
    d: usize,
    seed: u64,
    exhaustive: bool,
) -> RoundtripReport {
    let params = match SchemeParams::optimal(p, s, a, d) {
        Ok(ps) => ps,
        Err(e) => {
            return RoundtripReport {
                cases_run: 0,
                failures: vec![RoundtripFailure {
                    stragglers: BTreeSet::new(),
                    adversaries: BTreeSet::new(),
                    detail: e.to_string(),
                }],
            }
        }
    };
    let n = p.n_workers();
    let grid = EvaluationGrid::integer_default(n, params.m).expect("integer grid");
    let mut rng = crate::streams::substream(seed, "roundtrip-data", 0);
    let gradients: Vec<Vec<Rat>> = (0..p.n_partitions())
        .map(|_| {
            (0..d)
                .map(|_| {
                    Rat::new(
                        rand::Rng::gen_range(&mut rng, -99i64..=99).into(),
                        rand::Rng::gen_range(&mut rng, 1i64..=9).into(),
                    )
                })
                .collect()
        })
        .collect();
    let expect = oracle_aggregate(&gradients).unwrap();
    let sliced = exact::slice_gradients(&gradients, params.m);
    let shares = exact::encode_all_shares(p, &grid, &sliced).expect("encode");

    let workers: Vec<usize> = (1..=n).collect();
    let mut cases: Vec<(BTreeSet<usize>, BTreeSet<usize>)> = Vec::new();
    if exhaustive && n <= 10 {
        for s_size in 0..=s {
            for straggler_set in subsets_of_size(&workers, s_size) {
                let stragglers: BTreeSet<usize> = straggler_set.iter().copied().collect();
                let rest: Vec<usize> = workers
                    .iter()
                    .copied()
                    .filter(|w| !stragglers.contains(w))
                    .collect();
                for a_size in 0..=a {
                    for adv in subsets_of_size(&rest, a_size) {
                        cases.push((stragglers.clone(), adv.into_iter().collect()));
                    }
                }
            }
        }
    } else {
        for _ in 0..20 {
            let mut pool = workers.clone();
            rand::seq::SliceRandom::shuffle(&mut pool[..], &mut rng);
            let stragglers: BTreeSet<usize> =
                pool[..rand::Rng::gen_range(&mut rng, 0..=s)].iter().copied().collect();
            let rest: Vec<usize> = workers
                .iter()
                .copied()
                .filter(|w| !stragglers.contains(w))
                .collect();
            let mut rest_pool = rest.clone();
            rand::seq::SliceRandom::shuffle(&mut rest_pool[..], &mut rng);
            let adversaries: BTreeSet<usize> = rest_pool
                [..rand::Rng::gen_range(&mut rng, 0..=a.min(rest_pool.len()))]
                .iter()
                .copied()
                .collect();
            cases.push((stragglers, adversaries));
        }
    }

    let degree = params.poly_degree(p);
    let failures: Vec<RoundtripFailure> = cases
        .par_iter()
        .filter_map(|(stragglers, adversaries)| {
            let delivered: Vec<CodedShare<Rat>> = shares
                .iter()
                .filter(|sh| !stragglers.contains(&sh.worker))
                .map(|sh| {
                    let mut sh = sh.clone();
                    if adversaries.contains(&sh.worker) {
                        sh.payload = corrupt_share(
                            &sh.payload,
                            &CorruptionStrategy::SignFlipScale { c: -2.0 },
                            seed,
                            sh.worker,
                        );
                    }
                    sh
                })
                .collect();
            let fail = |detail: String| RoundtripFailure {
                stragglers: stragglers.clone(),
                adversaries: adversaries.clone(),
                detail,
            };
            match exact::decode_with_errors(&delivered, a, degree) {
                Err(e) => Some(fail(format!("decode error: {e}"))),
                Ok(outcome) => {
                    let agg = exact::recover_aggregate(&outcome.poly, &grid, d);
                    if agg != expect {
                        Some(fail("recovered aggregate differs from oracle".into()))
                    } else if !outcome.flagged.is_subset(adversaries) {
                        Some(fail(format!(
                            "flagged honest workers: {:?}",
                            outcome.flagged
                        )))
                    } else {
                        None
                    }
                }
            }
        })
        .collect();

    RoundtripReport {
        cases_run: cases.len(),
        failures,
    }
}

/// 2-norm condition number estimate of the interpolation system on the given
/// nodes: power iteration on the Gram matrix for the top singular value, and
/// on its inverse action (via LU solves) for the bottom one.
pub fn vandermonde_condition(nodes: &[f64]) -> Result<f64, VerifyError> {
    let n = nodes.len();
    if n < 2 {
        return Err(VerifyError::DimensionMismatch { expected: 2, got: n });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if nodes[i] == nodes[j] {
                return Err(VerifyError::SingularMatrix);
            }
        }
    }
    let mut v = vec![0.0f64; n * n];
    for (i, &x) in nodes.iter().enumerate() {
        let mut p = 1.0;
        for j in 0..n {
            v[i * n + j] = p;
            p *= x;
        }
    }
    let vt = transpose(&v, n);
    let lu_v = LuFactors::new(&v, n)?;
    let lu_vt = LuFactors::new(&vt, n)?;

    // Largest eigenvalue of V^T V.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * i as f64).collect();
    let mut lambda_max = 0.0;
    for _ in 0..200 {
        let y = matvec(&v, n, &x);
        let z = matvec(&vt, n, &y);
        let norm = z.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(VerifyError::SingularMatrix);
        }
        lambda_max = norm;
        x = z.iter().map(|a| a / norm).collect();
    }

    // Largest eigenvalue of (V^T V)^{-1} via solves with V^T and V.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * i as f64).collect();
    let mut lambda_inv = 0.0;
    for _ in 0..200 {
        let y = lu_vt.solve(&x);
        let z = lu_v.solve(&y);
        let norm = z.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(VerifyError::SingularMatrix);
        }
        lambda_inv = norm;
        x = z.iter().map(|a| a / norm).collect();
    }
    Ok((lambda_max * lambda_inv).sqrt())
}

fn transpose(m: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = m[i * n + j];
        }
    }
    t
}

fn matvec(m: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|j| m[i * n + j] * x[j]).sum())
        .collect()
}

/// LU factorization with partial pivoting, for repeated solves.
struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    fn new(m: &[f64], n: usize) -> Result<Self, VerifyError> {
        let mut lu = m.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut best = col;
            let mut best_val = lu[col * n + col].abs();
            for row in (col + 1)..n {
                let v = lu[row * n + col].abs();
                if v > best_val {
                    best_val = v;
                    best = row;
                }
            }
            if best_val == 0.0 {
                return Err(VerifyError::SingularMatrix);
            }
            if best != col {
                for j in 0..n {
                    lu.swap(col * n + j, best * n + j);
                }
                perm.swap(col, best);
            }
            let pivot = lu[col * n + col];
            for row in (col + 1)..n {
                let factor = lu[row * n + col] / pivot;
                lu[row * n + col] = factor;
                for j in (col + 1)..n {
                    lu[row * n + j] -= factor * lu[col * n + j];
                }
            }
        }
        Ok(LuFactors { n, lu, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                y[i] -= self.lu[i * n + j] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                y[i] -= self.lu[i * n + j] * y[j];
            }
            y[i] /= self.lu[i * n + i];
        }
        y
    }
}
