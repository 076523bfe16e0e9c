//! Approximate decoding via Berrut's rational interpolant, with node-quality
//! analytics.
//!
//! When replication is too thin for exact recovery, or more workers straggle
//! than the scheme was sized for, the master can still form a numerically
//! stable estimate: interpolate the received share values with the
//! barycentric rational
//!
//! ```text
//! f~(x) = sum_i [ w_i / (x - x_i) ] f_i  /  sum_j [ w_j / (x - x_j) ],
//! w_i = (-1)^i  (positional sign over the sorted received nodes)
//! ```
//!
//! and read the aggregate slices off the beta nodes. Any number of responses
//! >= 2 decodes; more responses sharpen the estimate. The quality knobs are
//! > the Lebesgue constant of the received node set and the gap-ratio
//! > constants (rho, nu) that certify well-spaced families.

use serde::Serialize;
use thiserror::Error;

use crate::poly::{Poly, VectorPoly};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ApproxError {
    #[error("rational decoding needs at least 2 responses, got {got}")]
    TooFewShares { got: usize },
    #[error("need at least {needed} nodes, got {got}")]
    TooFewNodes { needed: usize, got: usize },
    #[error("duplicate interpolation node")]
    DuplicateNode,
    #[error("error bound requires s1 < N - 2 (s1 = {s1}, N = {n_workers})")]
    OutOfRegime { s1: usize, n_workers: usize },
}

/// Chebyshev points of the second kind: the `n + 1` values `cos(k*pi/n)` for
/// `k = 0..=n`, in descending order. Callers pick `n` of them as worker
/// nodes.
pub fn chebyshev_second_kind(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    (0..=n)
        .map(|k| (k as f64 * std::f64::consts::PI / n as f64).cos())
        .collect()
}

/// Berrut rational interpolant over sorted distinct nodes with vector values.
#[derive(Clone, Debug)]
pub struct BerrutInterpolant {
    nodes: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl BerrutInterpolant {
    /// Sorts the points ascending by node; the alternating signs follow the
    /// sorted positional order, which is what the well-spaced analysis
    /// presumes once stragglers have been deleted.
    pub fn new(mut points: Vec<(f64, Vec<f64>)>) -> Result<Self, ApproxError> {
        if points.len() < 2 {
            return Err(ApproxError::TooFewShares { got: points.len() });
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
        for pair in points.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(ApproxError::DuplicateNode);
            }
        }
        let (nodes, values) = points.into_iter().unzip();
        Ok(BerrutInterpolant { nodes, values })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn width(&self) -> usize {
        self.values[0].len()
    }

    /// Evaluates the interpolant. A query exactly on a node returns that
    /// node's stored value (the formula's removable singularity).
    pub fn eval(&self, x: f64) -> Vec<f64> {
        if let Some(i) = self.nodes.iter().position(|&n| n == x) {
            return self.values[i].clone();
        }
        let width = self.width();
        let mut numer = vec![0.0; width];
        let mut denom = 0.0;
        let mut sign = 1.0;
        for (node, value) in self.nodes.iter().zip(self.values.iter()) {
            let w = sign / (x - node);
            denom += w;
            for (acc, v) in numer.iter_mut().zip(value.iter()) {
                *acc += w * v;
            }
            sign = -sign;
        }
        numer.iter().map(|v| v / denom).collect()
    }

    /// `sum_i |phi_i(x)|`, the Lebesgue function of the basis.
    pub fn basis_abs_sum(&self, x: f64) -> f64 {
        if self.nodes.contains(&x) {
            return 1.0;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        let mut sign = 1.0;
        for node in &self.nodes {
            let w = sign / (x - node);
            num += w.abs();
            den += w;
            sign = -sign;
        }
        num / den.abs()
    }
}

/// Decodes an approximate aggregate from whatever share subset arrived.
/// Shares are `(node, payload)` pairs from the exact encoder run in float
/// mode; slices are read off the beta nodes and padding is dropped.
pub fn approx_decode(
    received: &[(f64, Vec<f64>)],
    betas: &[f64],
    original_d: usize,
) -> Result<Vec<f64>, ApproxError> {
    let interp = BerrutInterpolant::new(received.to_vec())?;
    let mut out = Vec::with_capacity(betas.len() * interp.width());
    for beta in betas {
        out.extend(interp.eval(*beta));
    }
    out.truncate(original_d);
    Ok(out)
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = fc.max(fd);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
        best = best.max(fc.max(fd));
    }
    best
}

/// Grid-based lower estimate of the Lebesgue constant
/// `max_x sum_i |phi_i(x)|` over the node hull: a dense scan
/// (`grid_per_interval` samples per inter-node interval) plus golden-section
/// refinement around the best sample.
pub fn lebesgue_constant_estimate(nodes: &[f64], grid_per_interval: usize) -> f64 {
    assert!(nodes.len() >= 2, "need at least 2 nodes");
    let interp = BerrutInterpolant::new(
        nodes.iter().map(|&n| (n, vec![0.0])).collect(),
    )
    .expect("distinct nodes");
    let sorted = interp.nodes();
    let grid = grid_per_interval.max(2);
    let mut best_x = sorted[0];
    let mut best = 1.0f64;
    for pair in sorted.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        for i in 1..=grid {
            let x = lo + (hi - lo) * i as f64 / (grid + 1) as f64;
            let v = interp.basis_abs_sum(x);
            if v > best {
                best = v;
                best_x = x;
            }
        }
    }
    // Refine inside the bracketing sample neighborhood.
    let span = sorted[sorted.len() - 1] - sorted[0];
    let h = span / ((grid + 1) as f64 * (sorted.len() - 1) as f64);
    let lo = (best_x - h).max(sorted[0]);
    let hi = (best_x + h).min(sorted[sorted.len() - 1]);
    let refined = golden_section_max(|x| interp.basis_abs_sum(x), lo, hi, 48);
    best.max(refined).max(1.0)
}

/// Gap-ratio constants of a node family and the Lebesgue growth bound they
/// certify.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NodeQualityReport {
    /// Minimal constant for the two span-ratio conditions.
    pub rho: f64,
    /// Minimal constant bounding consecutive gap ratios both ways.
    pub nu: f64,
    /// Grid-based lower estimate of the Lebesgue constant.
    pub lebesgue_estimate: f64,
    /// Certified growth bound `(nu + 1) * (1 + 2 * rho * ln n)`.
    pub lebesgue_bound: f64,
}

/// Computes the minimal `(rho, nu)` satisfying the well-spaced conditions by
/// direct enumeration over all index pairs, and evaluates the Lebesgue bound
/// they imply. Nodes must be distinct; they are sorted ascending first.
pub fn well_spaced_constants(nodes: &[f64]) -> Result<NodeQualityReport, ApproxError> {
    if nodes.len() < 3 {
        return Err(ApproxError::TooFewNodes {
            needed: 3,
            got: nodes.len(),
        });
    }
    let mut x = nodes.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
    for pair in x.windows(2) {
        if pair[0] == pair[1] {
            return Err(ApproxError::DuplicateNode);
        }
    }
    let n = x.len() - 1;
    let mut rho = 1.0f64;
    for k in 0..n {
        let gap = x[k + 1] - x[k];
        for j in 0..=k {
            // (x_{k+1} - x_k) / (x_{k+1} - x_j) <= rho / (k + 1 - j)
            rho = rho.max((k + 1 - j) as f64 * gap / (x[k + 1] - x[j]));
        }
        for j in (k + 1)..=n {
            // (x_{k+1} - x_k) / (x_j - x_k) <= rho / (j - k)
            rho = rho.max((j - k) as f64 * gap / (x[j] - x[k]));
        }
    }
    let mut nu = 1.0f64;
    for k in 1..n {
        let ratio = (x[k + 1] - x[k]) / (x[k] - x[k - 1]);
        nu = nu.max(ratio).max(1.0 / ratio);
    }
    let lebesgue_estimate = lebesgue_constant_estimate(&x, 50);
    let lebesgue_bound = (nu + 1.0) * (1.0 + 2.0 * rho * (n as f64).ln());
    Ok(NodeQualityReport {
        rho,
        nu,
        lebesgue_estimate,
        lebesgue_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

/// A-priori error bound for decoding with `s1` realized stragglers out of
/// `N` Chebyshev-placed workers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorBoundReport {
    pub s1: usize,
    /// Parity of `N - s1`, which decides whether the first-derivative norm
    /// enters the bound.
    pub parity: Parity,
    /// `(s1 + 1) * (s1 + 3) * pi^2 / 4`.
    pub nu: f64,
    pub norm_f1: f64,
    pub norm_f2: f64,
    pub bound: f64,
}

/// Evaluates the straggler error bound
/// `2 (1 + nu) sin((s1+1) pi / (2N)) * ||f''||` for odd `N - s1`, with an
/// extra `||f'||` term when `N - s1` is even. Requires `s1 < N - 2`.
pub fn berrut_error_bound(
    n_workers: usize,
    s1: usize,
    norm_f1: f64,
    norm_f2: f64,
) -> Result<ErrorBoundReport, ApproxError> {
    if n_workers < 3 || s1 >= n_workers - 2 {
        return Err(ApproxError::OutOfRegime { s1, n_workers });
    }
    let pi = std::f64::consts::PI;
    let nu = (s1 + 1) as f64 * (s1 + 3) as f64 * pi * pi / 4.0;
    let factor = 2.0 * (1.0 + nu) * ((s1 + 1) as f64 * pi / (2.0 * n_workers as f64)).sin();
    let (parity, bound) = if (n_workers - s1) % 2 == 1 {
        (Parity::Odd, factor * norm_f2)
    } else {
        (Parity::Even, factor * (norm_f2 + norm_f1))
    };
    Ok(ErrorBoundReport {
        s1,
        parity,
        nu,
        norm_f1,
        norm_f2,
        bound,
    })
}

fn max_abs_on_unit_interval(p: &Poly<f64>, grid: usize) -> f64 {
    let mut best = 0.0f64;
    let mut best_x = -1.0;
    for i in 0..=grid {
        let x = -1.0 + 2.0 * i as f64 / grid as f64;
        let v = p.eval(&x).abs();
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let h = 2.0 / grid as f64;
    let lo = (best_x - h).max(-1.0);
    let hi = (best_x + h).min(1.0);
    golden_section_max(|x| p.eval(&x).abs(), lo, hi, 48).max(best)
}

/// Max-norms of the first and second derivative of a vector polynomial over
/// `[-1, 1]`: symbolic differentiation, dense 1000-point scan per component
/// with golden-section refinement, reduced by max across components.
pub fn max_norm_derivatives(poly: &VectorPoly<f64>) -> (f64, f64) {
    let mut norm1 = 0.0f64;
    let mut norm2 = 0.0f64;
    for c in 0..poly.width() {
        let d1 = poly.component(c).derivative();
        let d2 = d1.derivative();
        norm1 = norm1.max(max_abs_on_unit_interval(&d1, 1000));
        norm2 = norm2.max(max_abs_on_unit_interval(&d2, 1000));
    }
    (norm1, norm2)
}
