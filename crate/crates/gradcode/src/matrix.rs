//! Distributed evaluation of a polynomial `h` of the aggregated gradient
//! matrix `sum_k G_k`.
//!
//! Each worker applies `h` to a coded combination of its local matrices and
//! ships the full d x d result; the master interpolates the matrix-valued
//! polynomial `h(f(x))` of degree `(N - r) * deg h` and evaluates it at the
//! reserved node `beta`. Higher `deg h` demands more replication:
//! `r >= N - floor((N - 2a - s - 1) / deg h)`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::placement::Placement;
use crate::poly::VectorPoly;
use crate::scalar::{Rat, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixCodingError {
    #[error("infeasible: N - 2a - s - 1 = {margin} is negative")]
    Infeasible { margin: i64 },
    #[error("replication {actual} below the required minimum {required}")]
    ReplicationTooLow { required: usize, actual: usize },
    #[error("matrix polynomial needs degree >= 1 and a nonzero leading coefficient")]
    InvalidPolynomial,
    #[error("invalid matrix document: {0}")]
    InvalidDocument(String),
    #[error("beta must differ from every worker node")]
    GridCollision,
    #[error("worker {worker} was handed a matrix for partition {partition} outside its placement")]
    NonLocalAccess { worker: usize, partition: usize },
    #[error("worker {worker} is missing the matrix for local partition {partition}")]
    MissingLocalGradient { worker: usize, partition: usize },
    #[error("need at least {needed} shares, got {got}")]
    InsufficientShares { needed: usize, got: usize },
    #[error("duplicate evaluation node among shares")]
    DuplicateNode,
    #[error("no matrix polynomial is consistent with the shares under the adversary budget")]
    TooManyErrors,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl From<crate::exact::CodingError> for MatrixCodingError {
    fn from(e: crate::exact::CodingError) -> Self {
        use crate::exact::CodingError as C;
        match e {
            C::InsufficientShares { needed, got } => {
                MatrixCodingError::InsufficientShares { needed, got }
            }
            C::DuplicateNode => MatrixCodingError::DuplicateNode,
            C::TooManyErrors => MatrixCodingError::TooManyErrors,
            C::DimensionMismatch { expected, got } => {
                MatrixCodingError::DimensionMismatch { expected, got }
            }
            // The vector decoder emits no other variants.
            other => unreachable!("unexpected decode error: {other}"),
        }
    }
}

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMat<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMat<T> {
    pub fn zeros(dim: usize) -> Self {
        SquareMat {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, MatrixCodingError> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(MatrixCodingError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(SquareMat { dim, data })
    }

    pub fn from_flat(dim: usize, data: Vec<T>) -> Result<Self, MatrixCodingError> {
        if data.len() != dim * dim {
            return Err(MatrixCodingError::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(SquareMat { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.dim + j] = v;
    }

    pub fn flat(&self) -> &[T] {
        &self.data
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        SquareMat {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn scale(&self, factor: &T) -> Self {
        SquareMat {
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|v| v.clone() * factor.clone())
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let prod = a.clone() * other.get(k, j).clone();
                    out.data[i * d + j] = out.data[i * d + j].clone() + prod;
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }
}

/// Wire form of a matrix: dimension plus row-major entries, rationals as
/// `"p/q"` strings.
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RationalMatrixRepr {
    d: usize,
    #[serde(with = "crate::scalar::serde_rat::vec")]
    entries: Vec<Rat>,
}

impl SquareMat<Rat> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&RationalMatrixRepr {
            d: self.dim,
            entries: self.data.clone(),
        })
        .expect("matrix serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MatrixCodingError> {
        let repr: RationalMatrixRepr = serde_json::from_str(text)
            .map_err(|e| MatrixCodingError::InvalidDocument(e.to_string()))?;
        Self::from_flat(repr.d, repr.entries)
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FloatMatrixRepr {
    d: usize,
    entries: Vec<f64>,
}

impl SquareMat<f64> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&FloatMatrixRepr {
            d: self.dim,
            entries: self.data.clone(),
        })
        .expect("matrix serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MatrixCodingError> {
        let repr: FloatMatrixRepr = serde_json::from_str(text)
            .map_err(|e| MatrixCodingError::InvalidDocument(e.to_string()))?;
        Self::from_flat(repr.d, repr.entries)
    }
}

/// Scalar-coefficient polynomial applied to square matrices:
/// `h(X) = c_0 I + c_1 X + ... + c_deg X^deg`, degree at least one.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> MatrixPoly<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self, MatrixCodingError> {
        if coeffs.len() < 2 || coeffs.last().map(|c| c.is_zero()).unwrap_or(true) {
            return Err(MatrixCodingError::InvalidPolynomial);
        }
        Ok(MatrixPoly { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }
}

/// Horner evaluation of `h` at a square matrix; `c_0` contributes `c_0 * I`.
pub fn eval_matrix_poly<T: Scalar>(h: &MatrixPoly<T>, x: &SquareMat<T>) -> SquareMat<T> {
    let d = x.dim();
    let mut acc = SquareMat::identity(d).scale(h.coeffs.last().expect("degree >= 1"));
    for c in h.coeffs.iter().rev().skip(1) {
        acc = acc.matmul(x);
        for i in 0..d {
            let v = acc.get(i, i).clone() + c.clone();
            acc.set(i, i, v);
        }
    }
    acc
}

/// Minimum replication required to evaluate a degree-`deg_h` polynomial with
/// `s` stragglers and `a` adversaries on `N` workers:
/// `r_min = N - floor((N - 2a - s - 1) / deg_h)`.
pub fn matrix_feasible(
    n_workers: usize,
    s: usize,
    a: usize,
    deg_h: usize,
) -> Result<usize, MatrixCodingError> {
    assert!(deg_h >= 1, "deg_h must be at least 1");
    let margin = n_workers as i64 - 2 * a as i64 - s as i64 - 1;
    if margin < 0 {
        return Err(MatrixCodingError::Infeasible { margin });
    }
    Ok(n_workers - (margin as usize) / deg_h)
}

/// Checks a placement against [`matrix_feasible`].
pub fn placement_supports(
    p: &Placement,
    s: usize,
    a: usize,
    deg_h: usize,
) -> Result<usize, MatrixCodingError> {
    let required = matrix_feasible(p.n_workers(), s, a, deg_h)?;
    let actual = p.replication();
    if actual < required {
        return Err(MatrixCodingError::ReplicationTooLow { required, actual });
    }
    Ok(required)
}

/// One worker's transmitted coded matrix: exactly d^2 symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixShare<T> {
    pub worker: usize,
    pub alpha: T,
    pub payload: SquareMat<T>,
}

/// Coded-combination weight of partition `i` at node `x`:
/// `prod_{j: i not on j} (x - alpha_j) / (beta - alpha_j)`.
fn placement_factor_at<T: Scalar>(
    p: &Placement,
    alphas: &[T],
    beta: &T,
    partition: usize,
    x: &T,
) -> T {
    let mut acc = T::one();
    for j in 1..=p.n_workers() {
        if !p.holds(j, partition) {
            let alpha_j = &alphas[j - 1];
            acc = acc * ((x.clone() - alpha_j.clone()) / (beta.clone() - alpha_j.clone()));
        }
    }
    acc
}

/// Encodes worker `n`'s matrix share: `h` applied to the coded combination of
/// its local partial gradient matrices.
pub fn matrix_encode_share<T: Scalar>(
    worker: usize,
    p: &Placement,
    alphas: &[T],
    beta: &T,
    h: &MatrixPoly<T>,
    local: &BTreeMap<usize, SquareMat<T>>,
) -> Result<MatrixShare<T>, MatrixCodingError> {
    if alphas.len() != p.n_workers() {
        return Err(MatrixCodingError::DimensionMismatch {
            expected: p.n_workers(),
            got: alphas.len(),
        });
    }
    if alphas.iter().any(|alpha| alpha == beta) {
        return Err(MatrixCodingError::GridCollision);
    }
    for &k in local.keys() {
        if !p.holds(worker, k) {
            return Err(MatrixCodingError::NonLocalAccess {
                worker,
                partition: k,
            });
        }
    }
    for &k in p.worker_partitions(worker) {
        if !local.contains_key(&k) {
            return Err(MatrixCodingError::MissingLocalGradient {
                worker,
                partition: k,
            });
        }
    }
    let dim = local.values().next().map(|m| m.dim()).unwrap_or(0);
    let alpha_n = &alphas[worker - 1];
    let mut combined = SquareMat::zeros(dim);
    for (&k, g) in local {
        if g.dim() != dim {
            return Err(MatrixCodingError::DimensionMismatch {
                expected: dim,
                got: g.dim(),
            });
        }
        let w = placement_factor_at(p, alphas, beta, k, alpha_n);
        combined = combined.add(&g.scale(&w));
    }
    Ok(MatrixShare {
        worker,
        alpha: alpha_n.clone(),
        payload: eval_matrix_poly(h, &combined),
    })
}

/// Encodes all workers, restricting each to its local matrices.
pub fn matrix_encode_all<T: Scalar>(
    p: &Placement,
    alphas: &[T],
    beta: &T,
    h: &MatrixPoly<T>,
    matrices: &[SquareMat<T>],
) -> Result<Vec<MatrixShare<T>>, MatrixCodingError> {
    (1..=p.n_workers())
        .map(|n| {
            let local: BTreeMap<usize, SquareMat<T>> = p
                .worker_partitions(n)
                .iter()
                .map(|&k| (k, matrices[k - 1].clone()))
                .collect();
            matrix_encode_share(n, p, alphas, beta, h, &local)
        })
        .collect()
}

/// Matrix-valued polynomial in a scalar variable; what the master decodes.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixValuedPoly<T> {
    dim: usize,
    inner: VectorPoly<T>,
}

impl<T: Scalar> MatrixValuedPoly<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.inner.degree()
    }

    pub fn eval(&self, x: &T) -> SquareMat<T> {
        SquareMat::from_flat(self.dim, self.inner.eval(x)).expect("widths agree")
    }
}

/// The oracle polynomial `f(x) = sum_i G_i * factor_i(x)` whose value at any
/// worker node is the coded combination that worker applies `h` to.
pub fn matrix_combination_poly<T: Scalar>(
    p: &Placement,
    alphas: &[T],
    beta: &T,
    matrices: &[SquareMat<T>],
) -> MatrixValuedPoly<T> {
    let dim = matrices[0].dim();
    let mut inner = VectorPoly::zero(dim * dim);
    for k in 1..=p.n_partitions() {
        let mut prod = crate::poly::Poly::constant(T::one());
        for j in 1..=p.n_workers() {
            if !p.holds(j, k) {
                let alpha_j = &alphas[j - 1];
                let denom = beta.clone() - alpha_j.clone();
                prod = prod
                    .mul(&crate::poly::Poly::linear(alpha_j))
                    .scale(&(T::one() / denom));
            }
        }
        inner.add_outer(matrices[k - 1].flat(), &prod);
    }
    MatrixValuedPoly { dim, inner }
}

/// Decodes `h(f(x))` from matrix shares, tolerating up to `a` corrupted
/// matrices with one error locator shared across all entries. Exact
/// arithmetic; float callers must decode with `a = 0` via
/// [`matrix_interpolate`].
pub fn matrix_decode(
    shares: &[MatrixShare<Rat>],
    a: usize,
    declared_degree: usize,
) -> Result<(MatrixValuedPoly<Rat>, BTreeSet<usize>), MatrixCodingError> {
    let dim = check_share_dims(shares)?;
    let alphas: Vec<Rat> = shares.iter().map(|s| s.alpha.clone()).collect();
    let values: Vec<Vec<Rat>> = shares.iter().map(|s| s.payload.flat().to_vec()).collect();
    let (inner, bad) =
        crate::welch::decode_vector_shares(&alphas, &values, declared_degree, a)?;
    let flagged = bad.into_iter().map(|i| shares[i].worker).collect();
    Ok((MatrixValuedPoly { dim, inner }, flagged))
}

/// Straight interpolation of `h(f(x))` from clean shares (no adversaries).
/// Works in either arithmetic mode.
pub fn matrix_interpolate<T: Scalar>(
    shares: &[MatrixShare<T>],
    declared_degree: usize,
) -> Result<MatrixValuedPoly<T>, MatrixCodingError> {
    let dim = check_share_dims(shares)?;
    if shares.len() < declared_degree + 1 {
        return Err(MatrixCodingError::InsufficientShares {
            needed: declared_degree + 1,
            got: shares.len(),
        });
    }
    let points: Vec<(T, Vec<T>)> = shares
        .iter()
        .map(|s| (s.alpha.clone(), s.payload.flat().to_vec()))
        .collect();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if points[i].0 == points[j].0 {
                return Err(MatrixCodingError::DuplicateNode);
            }
        }
    }
    Ok(MatrixValuedPoly {
        dim,
        inner: VectorPoly::newton_interpolate(&points),
    })
}

fn check_share_dims<T: Scalar>(shares: &[MatrixShare<T>]) -> Result<usize, MatrixCodingError> {
    let Some(first) = shares.first() else {
        return Err(MatrixCodingError::InsufficientShares { needed: 1, got: 0 });
    };
    let dim = first.payload.dim();
    for s in shares {
        if s.payload.dim() != dim {
            return Err(MatrixCodingError::DimensionMismatch {
                expected: dim,
                got: s.payload.dim(),
            });
        }
    }
    Ok(dim)
}

/// Final readout: evaluates the decoded polynomial at `beta`, giving
/// `h(sum_k G_k)`.
pub fn matrix_recover<T: Scalar>(hf: &MatrixValuedPoly<T>, beta: &T) -> SquareMat<T> {
    hf.eval(beta)
}
