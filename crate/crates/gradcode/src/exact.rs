//! Exact coded gradient aggregation.
//!
//! Each gradient is cut into `m` slices. A single vector-valued polynomial
//! `f` ties the scheme together:
//!
//! ```text
//! f(alpha_n) = worker n's transmitted share   (only local gradients appear)
//! f(beta_l)  = slice l of the aggregate sum_k g_k
//! ```
//!
//! Workers evaluate `f` at their own node implicitly by taking a fixed linear
//! combination of their local gradient slices; the master interpolates `f`
//! from any sufficiently many responses (error-correcting against corrupted
//! ones) and reads the aggregate off the beta nodes. With minimum replication
//! `r`, any `m <= r - 2a - s` keeps the interpolation degree low enough to
//! survive `s` stragglers and `a` adversaries, at `ceil(d/m)` symbols per
//! worker.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::placement::Placement;
use crate::poly::{Poly, VectorPoly};
use crate::scalar::{Rat, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodingError {
    #[error("scheme infeasible: partition {limiting_partition} replicated {replication} times, needs more than {threshold}")]
    Infeasible {
        limiting_partition: usize,
        replication: usize,
        threshold: usize,
    },
    #[error("requested m={m} exceeds the feasible maximum {max_m}")]
    SliceCountTooLarge { m: usize, max_m: usize },
    #[error("could not build a collision-free evaluation grid")]
    GridCollision,
    #[error("worker {worker} was handed a gradient for partition {partition} outside its placement")]
    NonLocalAccess { worker: usize, partition: usize },
    #[error("worker {worker} is missing the gradient for local partition {partition}")]
    MissingLocalGradient { worker: usize, partition: usize },
    #[error("need at least {needed} shares, got {got}")]
    InsufficientShares { needed: usize, got: usize },
    #[error("duplicate evaluation node among shares")]
    DuplicateNode,
    #[error("no polynomial is consistent with the shares under the adversary budget")]
    TooManyErrors,
    #[error("adversary-tolerant decoding requires exact rational arithmetic")]
    FloatModeUnsupported,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Scheme parameters: straggler budget `s`, adversary budget `a`, slice count
/// `m` and gradient dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub s: usize,
    pub a: usize,
    pub m: usize,
    pub d: usize,
}

impl SchemeParams {
    /// Communication-optimal parameters for a placement: `m = r - 2a - s`.
    pub fn optimal(p: &Placement, s: usize, a: usize, d: usize) -> Result<Self, CodingError> {
        let r = p.replication();
        let threshold = 2 * a + s;
        if r <= threshold {
            return Err(CodingError::Infeasible {
                limiting_partition: p.limiting_partition(),
                replication: r,
                threshold,
            });
        }
        Ok(SchemeParams {
            s,
            a,
            m: r - threshold,
            d,
        })
    }

    /// Parameters with an explicit slice count `m <= r - 2a - s`; smaller `m`
    /// trades communication for decoding slack.
    pub fn with_m(
        p: &Placement,
        s: usize,
        a: usize,
        d: usize,
        m: usize,
    ) -> Result<Self, CodingError> {
        let base = Self::optimal(p, s, a, d)?;
        if m == 0 || m > base.m {
            return Err(CodingError::SliceCountTooLarge { m, max_m: base.m });
        }
        Ok(SchemeParams { s, a, m, d })
    }

    /// Transmitted symbols per worker.
    pub fn part_len(&self) -> usize {
        self.d.div_ceil(self.m)
    }

    /// Degree bound of the universal polynomial: `N - r + m - 1`.
    pub fn poly_degree(&self, p: &Placement) -> usize {
        p.n_workers() - p.replication() + self.m - 1
    }

    /// Responses needed by the error-tolerant decoder: `deg + 2a + 1`.
    pub fn min_responses(&self, p: &Placement) -> usize {
        self.poly_degree(p) + 2 * self.a + 1
    }
}

/// Evaluation nodes: one `alpha` per worker plus one `beta` per slice, all
/// pairwise distinct.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationGrid<T> {
    alphas: Vec<T>,
    betas: Vec<T>,
}

impl<T: Scalar> EvaluationGrid<T> {
    pub fn new(alphas: Vec<T>, betas: Vec<T>) -> Result<Self, CodingError> {
        let grid = EvaluationGrid { alphas, betas };
        if grid.has_collision() {
            return Err(CodingError::GridCollision);
        }
        Ok(grid)
    }

    fn has_collision(&self) -> bool {
        let all: Vec<&T> = self.alphas.iter().chain(self.betas.iter()).collect();
        for i in 0..all.len() {
            for j in (i + 1)..all.len() {
                if all[i] == all[j] {
                    return true;
                }
            }
        }
        false
    }

    pub fn n_workers(&self) -> usize {
        self.alphas.len()
    }

    pub fn m(&self) -> usize {
        self.betas.len()
    }

    /// Node of worker `n` (1-based).
    pub fn alpha(&self, n: usize) -> &T {
        &self.alphas[n - 1]
    }

    /// Node of slice `l` (1-based).
    pub fn beta(&self, l: usize) -> &T {
        &self.betas[l - 1]
    }

    pub fn alphas(&self) -> &[T] {
        &self.alphas
    }

    pub fn betas(&self) -> &[T] {
        &self.betas
    }
}

impl EvaluationGrid<Rat> {
    /// Integer grid: `alpha_n = n`, `beta_l = 1 - l` (0, -1, -2, ...). Keeps
    /// intermediate rationals small and the two node families disjoint.
    pub fn integer_default(n_workers: usize, m: usize) -> Result<Self, CodingError> {
        let alphas = (1..=n_workers as i64).map(Rat::from_int).collect();
        let betas = (1..=m as i64).map(|l| Rat::from_int(1 - l)).collect();
        Self::new(alphas, betas)
    }
}

impl EvaluationGrid<f64> {
    /// Chebyshev grid for floating-point runs: `alpha_n = cos(n*pi/N)` for
    /// `n in 1..=N` (a subset of the second-kind points on `[-1, 1]`), betas
    /// at angle-space midpoints of the central alpha gaps. The midpoints
    /// maximize the distance to every alpha, which keeps the encoding
    /// factors `1/(beta - alpha_j)` small: a beta that crowds an alpha
    /// inflates the interpolated polynomial far above the data scale and
    /// ruins float recovery. If a beta still collides, the betas are nudged
    /// toward their gap centers and rechecked.
    pub fn chebyshev_default(n_workers: usize, m: usize) -> Result<Self, CodingError> {
        let n = n_workers as f64;
        let pi = std::f64::consts::PI;
        let alphas: Vec<f64> = (1..=n_workers)
            .map(|k| (k as f64 * pi / n).cos())
            .collect();
        // Midpoint angles (k + 1/2) * pi / N for k = 1..N-1 sit between
        // consecutive alphas. Spread the betas across the central band of
        // midpoints: crowding them into adjacent gaps puts a factor
        // `1/(beta_l - beta_u)` of order N into the slice combination, which
        // is as damaging as crowding an alpha.
        let mut betas = Vec::with_capacity(m);
        if n_workers >= 2 {
            let gaps = n_workers - 1;
            let lo = (n_workers / 6).max(1);
            let hi = (5 * n_workers / 6).min(gaps);
            let band = (hi - lo) as f64;
            let take = m.min(gaps);
            let mut chosen = std::collections::BTreeSet::new();
            for j in 0..take {
                let target = lo as f64 + (j as f64 + 0.5) * band / take as f64;
                let mut k = target.round() as usize;
                k = k.clamp(1, gaps);
                while chosen.contains(&k) {
                    k = if k < gaps { k + 1 } else { k - 1 };
                }
                chosen.insert(k);
            }
            for k in chosen {
                betas.push(((k as f64 + 0.5) * pi / n).cos());
            }
        }
        // More slices than gaps (tiny clusters): fall back to first-kind
        // points pulled into the hull.
        let mut extra = 1usize;
        while betas.len() < m {
            betas.push(((extra as f64 - 0.5) * pi / (2.0 * m as f64 * n)).cos());
            extra += 1;
        }
        for _ in 0..64 {
            if let Ok(grid) = Self::new(alphas.clone(), betas.clone()) {
                return Ok(grid);
            }
            for b in betas.iter_mut() {
                *b *= 255.0 / 256.0;
            }
        }
        Err(CodingError::GridCollision)
    }
}

/// Gradients cut into `m` zero-padded slices of equal length.
#[derive(Clone, Debug, PartialEq)]
pub struct SlicedGradients<T> {
    /// `parts[k][l]` is slice `l` of partition `k+1`, length `part_len`.
    parts: Vec<Vec<Vec<T>>>,
    original_d: usize,
    part_len: usize,
}

impl<T: Scalar> SlicedGradients<T> {
    pub fn n_partitions(&self) -> usize {
        self.parts.len()
    }

    pub fn m(&self) -> usize {
        self.parts[0].len()
    }

    pub fn part_len(&self) -> usize {
        self.part_len
    }

    pub fn original_d(&self) -> usize {
        self.original_d
    }

    /// Slice `l` (1-based) of partition `k` (1-based).
    pub fn part(&self, k: usize, l: usize) -> &[T] {
        &self.parts[k - 1][l - 1]
    }

    /// The slices a single worker may see under the placement.
    pub fn restrict_to(&self, p: &Placement, worker: usize) -> LocalSlices<T> {
        let partitions = p
            .worker_partitions(worker)
            .iter()
            .map(|&k| (k, self.parts[k - 1].clone()))
            .collect();
        LocalSlices {
            worker,
            partitions,
            part_len: self.part_len,
        }
    }
}

/// Cuts each gradient into `m` contiguous slices of length `ceil(d/m)`,
/// zero-padding the tail.
pub fn slice_gradients<T: Scalar>(gradients: &[Vec<T>], m: usize) -> SlicedGradients<T> {
    assert!(m >= 1, "m must be at least 1");
    assert!(!gradients.is_empty(), "need at least one gradient");
    let d = gradients[0].len();
    assert!(d >= 1, "gradients must be non-empty");
    for g in gradients {
        assert_eq!(g.len(), d, "all gradients must have equal length");
    }
    let part_len = d.div_ceil(m);
    let parts = gradients
        .iter()
        .map(|g| {
            let mut padded = g.clone();
            padded.resize(part_len * m, T::zero());
            padded
                .chunks(part_len)
                .map(|c| c.to_vec())
                .collect::<Vec<_>>()
        })
        .collect();
    SlicedGradients {
        parts,
        original_d: d,
        part_len,
    }
}

/// Inverse of [`slice_gradients`]: concatenates and drops the padding.
pub fn unslice_gradients<T: Scalar>(sliced: &SlicedGradients<T>) -> Vec<Vec<T>> {
    sliced
        .parts
        .iter()
        .map(|slices| {
            let mut g: Vec<T> = slices.iter().flatten().cloned().collect();
            g.truncate(sliced.original_d);
            g
        })
        .collect()
}

/// The gradient slices visible to one worker. Construction goes through
/// [`SlicedGradients::restrict_to`] or explicit insertion, so an encoder can
/// never read a non-local gradient by accident.
#[derive(Clone, Debug)]
pub struct LocalSlices<T> {
    worker: usize,
    partitions: BTreeMap<usize, Vec<Vec<T>>>,
    part_len: usize,
}

impl<T: Scalar> LocalSlices<T> {
    pub fn new(worker: usize, part_len: usize) -> Self {
        LocalSlices {
            worker,
            partitions: BTreeMap::new(),
            part_len,
        }
    }

    pub fn insert(&mut self, partition: usize, slices: Vec<Vec<T>>) {
        self.partitions.insert(partition, slices);
    }

    pub fn worker(&self) -> usize {
        self.worker
    }
}

/// One worker's transmitted coded vector, `ceil(d/m)` symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct CodedShare<T> {
    pub worker: usize,
    pub alpha: T,
    pub payload: Vec<T>,
}

/// Vector-valued polynomial recovered by the decoder; evaluating it at a
/// worker node reproduces that worker's share, evaluating at a beta node
/// gives one aggregate slice.
pub type UniversalPoly<T> = VectorPoly<T>;

/// Scalar weight applied to slice `l` of partition `i` in the share of the
/// worker sitting at node `x = alpha_n`:
/// `prod_{j: i not on j} (x - alpha_j)/(beta_l - alpha_j)`.
fn placement_factor_at<T: Scalar>(
    p: &Placement,
    grid: &EvaluationGrid<T>,
    partition: usize,
    beta_index: usize,
    x: &T,
) -> T {
    let beta = grid.beta(beta_index);
    let mut acc = T::one();
    for j in 1..=p.n_workers() {
        if !p.holds(j, partition) {
            let alpha_j = grid.alpha(j);
            acc = acc * ((x.clone() - alpha_j.clone()) / (beta.clone() - alpha_j.clone()));
        }
    }
    acc
}

/// Lagrange weight over the beta nodes:
/// `prod_{u != l} (x - beta_u)/(beta_l - beta_u)`.
fn beta_basis_at<T: Scalar>(grid: &EvaluationGrid<T>, beta_index: usize, x: &T) -> T {
    let beta = grid.beta(beta_index);
    let mut acc = T::one();
    for u in 1..=grid.m() {
        if u != beta_index {
            let other = grid.beta(u);
            acc = acc * ((x.clone() - other.clone()) / (beta.clone() - other.clone()));
        }
    }
    acc
}

/// Coefficient of slice `l` of partition `i` in worker `n`'s share. Zero for
/// non-local partitions by construction.
pub fn share_coefficient<T: Scalar>(
    p: &Placement,
    grid: &EvaluationGrid<T>,
    worker: usize,
    partition: usize,
    beta_index: usize,
) -> T {
    if !p.holds(worker, partition) {
        return T::zero();
    }
    let alpha = grid.alpha(worker);
    let c = placement_factor_at(p, grid, partition, beta_index, alpha);
    c * beta_basis_at(grid, beta_index, alpha)
}

/// Encodes worker `n`'s share from its local gradient slices only.
pub fn encode_share<T: Scalar>(
    p: &Placement,
    grid: &EvaluationGrid<T>,
    local: &LocalSlices<T>,
) -> Result<CodedShare<T>, CodingError> {
    let worker = local.worker;
    for &k in local.partitions.keys() {
        if !p.holds(worker, k) {
            return Err(CodingError::NonLocalAccess {
                worker,
                partition: k,
            });
        }
    }
    for &k in p.worker_partitions(worker) {
        if !local.partitions.contains_key(&k) {
            return Err(CodingError::MissingLocalGradient {
                worker,
                partition: k,
            });
        }
    }
    let part_len = local.part_len;
    let mut payload = vec![T::zero(); part_len];
    for l in 1..=grid.m() {
        for (&k, slices) in &local.partitions {
            if slices.len() != grid.m() {
                return Err(CodingError::DimensionMismatch {
                    expected: grid.m(),
                    got: slices.len(),
                });
            }
            let slice = &slices[l - 1];
            if slice.len() != part_len {
                return Err(CodingError::DimensionMismatch {
                    expected: part_len,
                    got: slice.len(),
                });
            }
            let w = share_coefficient(p, grid, worker, k, l);
            if w.is_zero() {
                continue;
            }
            for (acc, v) in payload.iter_mut().zip(slice.iter()) {
                *acc = acc.clone() + v.clone() * w.clone();
            }
        }
    }
    Ok(CodedShare {
        worker,
        alpha: grid.alpha(worker).clone(),
        payload,
    })
}

/// Encodes every worker's share. Each worker sees only its restriction of the
/// sliced gradients.
pub fn encode_all_shares<T: Scalar>(
    p: &Placement,
    grid: &EvaluationGrid<T>,
    sliced: &SlicedGradients<T>,
) -> Result<Vec<CodedShare<T>>, CodingError> {
    (1..=p.n_workers())
        .map(|n| encode_share(p, grid, &sliced.restrict_to(p, n)))
        .collect()
}

/// Builds the universal polynomial symbolically from full knowledge of all
/// gradients. Oracle/test use: a real master never has these inputs.
pub fn universal_poly<T: Scalar>(
    p: &Placement,
    grid: &EvaluationGrid<T>,
    sliced: &SlicedGradients<T>,
) -> UniversalPoly<T> {
    let part_len = sliced.part_len();
    let mut f = VectorPoly::zero(part_len);
    for l in 1..=grid.m() {
        let beta = grid.beta(l);
        // p_l(x) = sum_i g_i[l] * prod_{j: i not on j} (x - a_j)/(beta_l - a_j)
        let mut p_l = VectorPoly::zero(part_len);
        for k in 1..=p.n_partitions() {
            let mut prod = Poly::constant(T::one());
            for j in 1..=p.n_workers() {
                if !p.holds(j, k) {
                    let alpha_j = grid.alpha(j);
                    let denom = beta.clone() - alpha_j.clone();
                    prod = prod.mul(&Poly::linear(alpha_j)).scale(&(T::one() / denom));
                }
            }
            p_l.add_outer(sliced.part(k, l), &prod);
        }
        // Lagrange basis over the beta nodes.
        let mut basis = Poly::constant(T::one());
        for u in 1..=grid.m() {
            if u != l {
                let other = grid.beta(u);
                let denom = beta.clone() - other.clone();
                basis = basis.mul(&Poly::linear(other)).scale(&(T::one() / denom));
            }
        }
        f.add_assign(&p_l.mul_scalar_poly(&basis));
    }
    f
}

/// Interpolates the universal polynomial from clean shares (no corruption).
/// Needs at least `declared_degree + 1` shares at distinct nodes; extra
/// shares are interpolated through as well, which keeps the exact mode honest
/// and the float mode well conditioned.
pub fn interpolate_exact<T: Scalar>(
    shares: &[(T, Vec<T>)],
    declared_degree: usize,
) -> Result<UniversalPoly<T>, CodingError> {
    if shares.len() < declared_degree + 1 {
        return Err(CodingError::InsufficientShares {
            needed: declared_degree + 1,
            got: shares.len(),
        });
    }
    for i in 0..shares.len() {
        for j in (i + 1)..shares.len() {
            if shares[i].0 == shares[j].0 {
                return Err(CodingError::DuplicateNode);
            }
        }
    }
    let width = shares[0].1.len();
    for (_, payload) in shares {
        if payload.len() != width {
            return Err(CodingError::DimensionMismatch {
                expected: width,
                got: payload.len(),
            });
        }
    }
    Ok(VectorPoly::newton_interpolate(shares))
}

/// Outcome of error-tolerant decoding: the recovered polynomial and the
/// workers whose delivered shares disagree with it.
#[derive(Clone, Debug)]
pub struct DecodeOutcome {
    pub poly: UniversalPoly<Rat>,
    pub flagged: BTreeSet<usize>,
}

/// Recovers the universal polynomial from `N - s` responses of which at most
/// `a` are corrupted arbitrarily. Exact rational arithmetic only: the
/// error-locator algebra is meaningless in floating point, so float callers
/// with `a > 0` must be refused upstream.
pub fn decode_with_errors(
    shares: &[CodedShare<Rat>],
    a: usize,
    declared_degree: usize,
) -> Result<DecodeOutcome, CodingError> {
    let alphas: Vec<Rat> = shares.iter().map(|s| s.alpha.clone()).collect();
    let values: Vec<Vec<Rat>> = shares.iter().map(|s| s.payload.clone()).collect();
    let (poly, bad_positions) = crate::welch::decode_vector_shares(&alphas, &values, declared_degree, a)?;
    let flagged = bad_positions
        .into_iter()
        .map(|i| shares[i].worker)
        .collect();
    Ok(DecodeOutcome { poly, flagged })
}

/// Reads the aggregate gradient off the recovered polynomial: concatenates
/// `f(beta_1) .. f(beta_m)` and drops the padding.
pub fn recover_aggregate<T: Scalar>(
    f: &UniversalPoly<T>,
    grid: &EvaluationGrid<T>,
    original_d: usize,
) -> Vec<T> {
    let mut out = Vec::with_capacity(grid.m() * f.width());
    for l in 1..=grid.m() {
        out.extend(f.eval(grid.beta(l)));
    }
    out.truncate(original_d);
    out
}

/// The scheme's linear code materialized: stacked honest payloads equal this
/// map applied to the stacked gradient slices. Block `(n; i, l)` is
/// `coefficient * I_L`, and is structurally zero when worker `n` does not
/// hold partition `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodingMatrix<T> {
    n_workers: usize,
    n_partitions: usize,
    m: usize,
    part_len: usize,
    /// `coeff[(n-1) * K * m + (i-1) * m + (l-1)]`
    coeff: Vec<T>,
}

impl<T: Scalar> EncodingMatrix<T> {
    pub fn rows(&self) -> usize {
        self.n_workers * self.part_len
    }

    pub fn cols(&self) -> usize {
        self.n_partitions * self.m * self.part_len
    }

    /// Scalar coefficient of the `(worker; partition, slice)` block.
    pub fn block_coefficient(&self, worker: usize, partition: usize, slice: usize) -> &T {
        &self.coeff
            [(worker - 1) * self.n_partitions * self.m + (partition - 1) * self.m + (slice - 1)]
    }

    /// Applies the map to stacked slices laid out partition-major:
    /// `input[((i-1) * m + (l-1)) * L + t]`. Output is worker-major:
    /// `output[(n-1) * L + t]`.
    pub fn apply(&self, stacked: &[T]) -> Vec<T> {
        assert_eq!(stacked.len(), self.cols());
        let l_len = self.part_len;
        let mut out = vec![T::zero(); self.rows()];
        for n in 1..=self.n_workers {
            for i in 1..=self.n_partitions {
                for l in 1..=self.m {
                    let c = self.block_coefficient(n, i, l);
                    if c.is_zero() {
                        continue;
                    }
                    let col0 = ((i - 1) * self.m + (l - 1)) * l_len;
                    let row0 = (n - 1) * l_len;
                    for t in 0..l_len {
                        out[row0 + t] =
                            out[row0 + t].clone() + c.clone() * stacked[col0 + t].clone();
                    }
                }
            }
        }
        out
    }
}

/// Materializes the linear code for tests and adversarial constructions.
pub fn encoding_matrix<T: Scalar>(
    p: &Placement,
    grid: &EvaluationGrid<T>,
    params: &SchemeParams,
) -> EncodingMatrix<T> {
    assert_eq!(grid.m(), params.m);
    assert_eq!(grid.n_workers(), p.n_workers());
    let mut coeff =
        Vec::with_capacity(p.n_workers() * p.n_partitions() * params.m);
    for n in 1..=p.n_workers() {
        for i in 1..=p.n_partitions() {
            for l in 1..=params.m {
                coeff.push(share_coefficient(p, grid, n, i, l));
            }
        }
    }
    EncodingMatrix {
        n_workers: p.n_workers(),
        n_partitions: p.n_partitions(),
        m: params.m,
        part_len: params.part_len(),
        coeff,
    }
}

/// Stacks sliced gradients in the column layout of [`EncodingMatrix::apply`].
pub fn stack_slices<T: Scalar>(sliced: &SlicedGradients<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(sliced.n_partitions() * sliced.m() * sliced.part_len());
    for k in 1..=sliced.n_partitions() {
        for l in 1..=sliced.m() {
            out.extend_from_slice(sliced.part(k, l));
        }
    }
    out
}

/// Wire form of a share in exact mode: rationals as `"p/q"` strings.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RationalShareRepr {
    worker: usize,
    #[serde(with = "crate::scalar::serde_rat")]
    alpha: Rat,
    #[serde(with = "crate::scalar::serde_rat::vec")]
    payload: Vec<Rat>,
}

impl CodedShare<Rat> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&RationalShareRepr {
            worker: self.worker,
            alpha: self.alpha.clone(),
            payload: self.payload.clone(),
        })
        .expect("share serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let repr: RationalShareRepr = serde_json::from_str(text)?;
        Ok(CodedShare {
            worker: repr.worker,
            alpha: repr.alpha,
            payload: repr.payload,
        })
    }
}

/// Wire form of a share in float mode: plain IEEE-754 numbers.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FloatShareRepr {
    worker: usize,
    alpha: f64,
    payload: Vec<f64>,
}

impl CodedShare<f64> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&FloatShareRepr {
            worker: self.worker,
            alpha: self.alpha,
            payload: self.payload.clone(),
        })
        .expect("share serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let repr: FloatShareRepr = serde_json::from_str(text)?;
        Ok(CodedShare {
            worker: repr.worker,
            alpha: repr.alpha,
            payload: repr.payload,
        })
    }
}
