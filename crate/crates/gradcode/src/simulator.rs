//! Master/worker round simulation and a toy least-squares training loop.
//!
//! Time is logical: each worker draws a latency from its profile, arrivals
//! are sorted, a cutoff picks the responder set, and adversarial responders
//! corrupt their payloads. Everything is driven by named substreams of one
//! root seed, so identical configurations replay byte-for-byte.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx;
use crate::exact::{
    self, encode_share, slice_gradients, CodedShare, EvaluationGrid, SchemeParams,
};
use crate::placement::Placement;
use crate::scalar::{Arithmetic, Rat, Scalar};
use crate::streams;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("adversary-tolerant decoding requires exact rational arithmetic")]
    FloatModeUnsupported,
    #[error("decode failure at iteration {iteration}: {reason}")]
    DecodeFailure { iteration: usize, reason: String },
}

/// Latency distribution of one worker.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LatencyModel {
    Deterministic { t: f64 },
    ShiftedExponential { shift: f64, rate: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkerProfile {
    pub latency: LatencyModel,
    #[serde(default)]
    pub adversarial: bool,
}

impl WorkerProfile {
    pub fn honest(latency: LatencyModel) -> Self {
        WorkerProfile {
            latency,
            adversarial: false,
        }
    }
}

/// When the master stops waiting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    /// Wait for the fastest `n` responses.
    Count(usize),
    /// Wait until logical time `t`.
    Deadline(f64),
    /// Wait for everyone.
    All,
}

/// How an adversarial worker mangles its share.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorruptionStrategy {
    GaussianNoise { sigma: f64 },
    SignFlipScale { c: f64 },
    Replace { vector: Vec<f64> },
}

/// Draws worker `n`'s latency. Deterministic given `(seed, worker)`;
/// shifted-exponential draws use the inverse CDF on a seeded stream.
pub fn straggler_sample(model: &LatencyModel, seed: u64, worker: usize) -> f64 {
    match model {
        LatencyModel::Deterministic { t } => *t,
        LatencyModel::ShiftedExponential { shift, rate } => {
            assert!(*shift >= 0.0 && *rate > 0.0, "invalid latency model");
            let mut rng = streams::substream(seed, "latency", worker as u64);
            let u: f64 = rand::Rng::gen(&mut rng);
            shift + (-(1.0 - u).ln()) / rate
        }
    }
}

/// Applies a corruption strategy. The perturbation is never the zero vector:
/// the degenerate draws (noise that rounds to zero, replacing a payload with
/// itself, scaling a zero payload) fall back to bumping the first symbol.
pub fn corrupt_share<T: Scalar>(
    payload: &[T],
    strategy: &CorruptionStrategy,
    seed: u64,
    worker: usize,
) -> Vec<T> {
    let mut out: Vec<T> = match strategy {
        CorruptionStrategy::GaussianNoise { sigma } => {
            let mut rng = streams::substream(seed, "adversary", worker as u64);
            payload
                .iter()
                .map(|v| v.clone() + T::from_f64(sigma * streams::standard_normal(&mut rng)))
                .collect()
        }
        CorruptionStrategy::SignFlipScale { c } => {
            let factor = T::from_f64(*c);
            payload.iter().map(|v| v.clone() * factor.clone()).collect()
        }
        CorruptionStrategy::Replace { vector } => {
            let mut v: Vec<T> = vector.iter().map(|&x| T::from_f64(x)).collect();
            v.resize(payload.len(), T::zero());
            v
        }
    };
    if out == payload {
        out[0] = out[0].clone() + T::one();
    }
    out
}

/// One simulated round: who answered, in what order, and with what payloads.
#[derive(Clone, Debug)]
pub struct RoundOutcome<T> {
    /// Workers in arrival order, after the cutoff.
    pub responded: Vec<usize>,
    /// Delivered shares in arrival order; adversarial entries are corrupted.
    pub shares: Vec<CodedShare<T>>,
    /// Latency drawn for every worker (indexed by worker - 1).
    pub latencies: Vec<f64>,
    /// Responding workers whose payloads were corrupted.
    pub corrupted: BTreeSet<usize>,
    pub cutoff: Cutoff,
}

/// Runs one encode/transmit round. Deterministic given the seed.
#[allow(clippy::too_many_arguments)]
pub fn simulate_round<T: Scalar>(
    p: &Placement,
    params: &SchemeParams,
    grid: &EvaluationGrid<T>,
    gradients: &[Vec<T>],
    profiles: &[WorkerProfile],
    strategy: &CorruptionStrategy,
    cutoff: &Cutoff,
    seed: u64,
) -> Result<RoundOutcome<T>, SimError> {
    let n = p.n_workers();
    if profiles.len() != n {
        return Err(SimError::ConfigMismatch(format!(
            "{} worker profiles for {} workers",
            profiles.len(),
            n
        )));
    }
    if grid.n_workers() != n || grid.m() != params.m {
        return Err(SimError::ConfigMismatch(
            "evaluation grid does not match scheme".into(),
        ));
    }
    if gradients.len() != p.n_partitions() {
        return Err(SimError::ConfigMismatch(format!(
            "{} gradients for {} partitions",
            gradients.len(),
            p.n_partitions()
        )));
    }
    let adversaries = profiles.iter().filter(|w| w.adversarial).count();
    if adversaries > params.a {
        return Err(SimError::ConfigMismatch(format!(
            "{} adversarial profiles exceed the budget a = {}",
            adversaries, params.a
        )));
    }
    for g in gradients {
        if g.len() != params.d {
            return Err(SimError::DimensionMismatch {
                expected: params.d,
                got: g.len(),
            });
        }
    }

    let sliced = slice_gradients(gradients, params.m);
    let latencies: Vec<f64> = (1..=n)
        .map(|w| straggler_sample(&profiles[w - 1].latency, seed, w))
        .collect();
    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by(|&a, &b| {
        latencies[a - 1]
            .partial_cmp(&latencies[b - 1])
            .expect("finite latencies")
            .then(a.cmp(&b))
    });
    let responded: Vec<usize> = match cutoff {
        Cutoff::Count(c) => order.iter().copied().take(*c).collect(),
        Cutoff::Deadline(t) => order
            .iter()
            .copied()
            .filter(|&w| latencies[w - 1] <= *t)
            .collect(),
        Cutoff::All => order,
    };

    let mut corrupted = BTreeSet::new();
    let mut shares = Vec::with_capacity(responded.len());
    for &w in &responded {
        let mut share = encode_share(p, grid, &sliced.restrict_to(p, w))
            .map_err(|e| SimError::ConfigMismatch(e.to_string()))?;
        if profiles[w - 1].adversarial {
            share.payload = corrupt_share(&share.payload, strategy, seed, w);
            corrupted.insert(w);
        }
        shares.push(share);
    }
    Ok(RoundOutcome {
        responded,
        shares,
        latencies,
        corrupted,
        cutoff: cutoff.clone(),
    })
}

/// Regression samples: feature rows and labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dataset {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.xs.first().map(|x| x.len()).unwrap_or(0)
    }
}

/// Synthetic least-squares data on a dyadic grid, so exact-rational training
/// keeps small denominators. Labels come from a planted weight vector plus
/// optional quantized noise.
pub fn synthetic_regression(
    n_samples: usize,
    n_features: usize,
    noise: f64,
    seed: u64,
) -> Dataset {
    let mut rng = streams::substream(seed, "dataset", 0);
    let planted: Vec<f64> = (0..n_features)
        .map(|_| rand::Rng::gen_range(&mut rng, -16i32..=16) as f64 / 8.0)
        .collect();
    let mut xs = Vec::with_capacity(n_samples);
    let mut ys = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let x: Vec<f64> = (0..n_features)
            .map(|_| rand::Rng::gen_range(&mut rng, -32i32..=32) as f64 / 16.0)
            .collect();
        let mut y: f64 = x.iter().zip(planted.iter()).map(|(a, b)| a * b).sum();
        if noise > 0.0 {
            y += (noise * streams::standard_normal(&mut rng) * 256.0).round() / 256.0;
        }
        xs.push(x);
        ys.push(y);
    }
    Dataset { xs, ys }
}

/// Per-partition contribution to the full-dataset least-squares gradient:
/// `sum_{(x,y) in partition} 2 (w.x - y) x / total_samples`, normalized by
/// the whole dataset size so partition contributions sum to the centralized
/// gradient.
pub fn partial_gradient<T: Scalar>(
    xs: &[Vec<T>],
    ys: &[T],
    weights: &[T],
    total_samples: usize,
) -> Result<Vec<T>, SimError> {
    let d = weights.len();
    let mut g = vec![T::zero(); d];
    let scale = T::from_int(2) / T::from_int(total_samples as i64);
    for (x, y) in xs.iter().zip(ys.iter()) {
        if x.len() != d {
            return Err(SimError::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
        let mut residual = -y.clone();
        for (w, xi) in weights.iter().zip(x.iter()) {
            residual = residual + w.clone() * xi.clone();
        }
        let factor = residual * scale.clone();
        for (gi, xi) in g.iter_mut().zip(x.iter()) {
            *gi = gi.clone() + factor.clone() * xi.clone();
        }
    }
    Ok(g)
}

fn full_loss<T: Scalar>(xs: &[Vec<T>], ys: &[T], weights: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in xs.iter().zip(ys.iter()) {
        let mut residual = -y.clone();
        for (w, xi) in weights.iter().zip(x.iter()) {
            residual = residual + w.clone() * xi.clone();
        }
        acc = acc + residual.clone() * residual;
    }
    acc / T::from_int(xs.len() as i64)
}

/// Which decoder the training loop uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    Exact,
    Approx,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub dataset: Dataset,
    pub k_partitions: usize,
    pub eta: f64,
    pub iterations: usize,
    pub mode: DecodeMode,
    /// Responder cutoff per round; defaults to `Count(N - s)`.
    #[serde(default)]
    pub cutoff: Option<Cutoff>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub loss: f64,
    pub responders: usize,
    pub decoder: &'static str,
    /// Straggler error bound for the round (approx mode, when in regime).
    pub bound: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainLog {
    pub records: Vec<IterRecord>,
    /// Weight history as floats, starting with the initial weights.
    pub weights: Vec<Vec<f64>>,
    /// Exact weight history in rational mode.
    pub weights_rational: Option<Vec<Vec<Rat>>>,
}

struct QuantizedData<T> {
    xs: Vec<Vec<T>>,
    ys: Vec<T>,
    chunk: usize,
}

fn quantize_dataset<T: Scalar>(cfg: &TrainConfig, d: usize) -> Result<QuantizedData<T>, SimError> {
    let m_samples = cfg.dataset.len();
    if m_samples == 0 || cfg.k_partitions == 0 {
        return Err(SimError::ConfigMismatch("empty dataset or no partitions".into()));
    }
    if !m_samples.is_multiple_of(cfg.k_partitions) {
        return Err(SimError::ConfigMismatch(format!(
            "{} samples do not split into {} equal partitions",
            m_samples, cfg.k_partitions
        )));
    }
    if cfg.dataset.n_features() != d {
        return Err(SimError::DimensionMismatch {
            expected: d,
            got: cfg.dataset.n_features(),
        });
    }
    if cfg.dataset.ys.len() != m_samples {
        return Err(SimError::DimensionMismatch {
            expected: m_samples,
            got: cfg.dataset.ys.len(),
        });
    }
    Ok(QuantizedData {
        xs: cfg
            .dataset
            .xs
            .iter()
            .map(|x| x.iter().map(|&v| T::from_f64(v)).collect())
            .collect(),
        ys: cfg.dataset.ys.iter().map(|&v| T::from_f64(v)).collect(),
        chunk: m_samples / cfg.k_partitions,
    })
}

/// Centralized gradient descent on the same quantized data; the reference
/// trajectory the coded loop must match.
pub fn centralized_gd<T: Scalar>(cfg: &TrainConfig) -> Result<(Vec<Vec<T>>, Vec<f64>), SimError> {
    let d = cfg.dataset.n_features();
    let data = quantize_dataset::<T>(cfg, d)?;
    let eta = T::from_f64(cfg.eta);
    let mut w = vec![T::zero(); d];
    let mut history = vec![w.clone()];
    let mut losses = Vec::with_capacity(cfg.iterations);
    for _ in 0..cfg.iterations {
        let g = partial_gradient(&data.xs, &data.ys, &w, data.xs.len())?;
        for (wi, gi) in w.iter_mut().zip(g.iter()) {
            *wi = wi.clone() - eta.clone() * gi.clone();
        }
        history.push(w.clone());
        losses.push(full_loss(&data.xs, &data.ys, &w).to_f64_lossy());
    }
    Ok((history, losses))
}

/// Coded training loop: each iteration computes per-partition gradients,
/// simulates a round, decodes the aggregate with the configured decoder and
/// takes a gradient step. In exact mode the decoded aggregate is the true
/// gradient whatever the straggler/adversary realization, so the trajectory
/// reproduces centralized descent.
#[allow(clippy::too_many_arguments)]
pub fn train_gd(
    cfg: &TrainConfig,
    p: &Placement,
    params: &SchemeParams,
    arithmetic: Arithmetic,
    profiles: &[WorkerProfile],
    strategy: &CorruptionStrategy,
    seed: u64,
) -> Result<TrainLog, SimError> {
    if cfg.k_partitions != p.n_partitions() {
        return Err(SimError::ConfigMismatch(format!(
            "{} data partitions for a placement of {}",
            cfg.k_partitions,
            p.n_partitions()
        )));
    }
    match (cfg.mode, arithmetic) {
        (DecodeMode::Exact, Arithmetic::Rational) => train_exact_rational(cfg, p, params, profiles, strategy, seed),
        (DecodeMode::Exact, Arithmetic::Float64) => {
            if params.a > 0 {
                return Err(SimError::FloatModeUnsupported);
            }
            train_float(cfg, p, params, profiles, strategy, seed, false)
        }
        (DecodeMode::Approx, Arithmetic::Float64) => {
            if params.a > 0 || profiles.iter().any(|w| w.adversarial) {
                return Err(SimError::ConfigMismatch(
                    "approximate decoding assumes no adversarial workers".into(),
                ));
            }
            train_float(cfg, p, params, profiles, strategy, seed, true)
        }
        (DecodeMode::Approx, Arithmetic::Rational) => Err(SimError::ConfigMismatch(
            "approximate decoding runs in Float64".into(),
        )),
    }
}

fn round_seed(seed: u64, iter: usize) -> u64 {
    rand::Rng::gen(&mut streams::substream(seed, "round", iter as u64))
}

fn train_exact_rational(
    cfg: &TrainConfig,
    p: &Placement,
    params: &SchemeParams,
    profiles: &[WorkerProfile],
    strategy: &CorruptionStrategy,
    seed: u64,
) -> Result<TrainLog, SimError> {
    let d = params.d;
    let data = quantize_dataset::<Rat>(cfg, d)?;
    let grid = EvaluationGrid::integer_default(p.n_workers(), params.m)
        .map_err(|e| SimError::ConfigMismatch(e.to_string()))?;
    let cutoff = cfg
        .cutoff
        .clone()
        .unwrap_or(Cutoff::Count(p.n_workers() - params.s));
    let degree = params.poly_degree(p);
    let eta = Rat::from_f64(cfg.eta);

    let mut w = vec![Rat::from_int(0); d];
    let mut history = vec![w.clone()];
    let mut records = Vec::with_capacity(cfg.iterations);
    for it in 0..cfg.iterations {
        let gradients = partition_gradients(&data, &w)?;
        let round = simulate_round(
            p,
            params,
            &grid,
            &gradients,
            profiles,
            strategy,
            &cutoff,
            round_seed(seed, it),
        )?;
        let outcome = exact::decode_with_errors(&round.shares, params.a, degree).map_err(|e| {
            SimError::DecodeFailure {
                iteration: it,
                reason: e.to_string(),
            }
        })?;
        let agg = exact::recover_aggregate(&outcome.poly, &grid, d);
        for (wi, gi) in w.iter_mut().zip(agg.iter()) {
            *wi = wi.clone() - eta.clone() * gi.clone();
        }
        history.push(w.clone());
        records.push(IterRecord {
            iter: it,
            loss: full_loss(&data.xs, &data.ys, &w).to_f64_lossy(),
            responders: round.responded.len(),
            decoder: "exact-rational",
            bound: None,
        });
    }
    Ok(TrainLog {
        records,
        weights: history
            .iter()
            .map(|ws| ws.iter().map(|v| v.to_f64_lossy()).collect())
            .collect(),
        weights_rational: Some(history),
    })
}

fn train_float(
    cfg: &TrainConfig,
    p: &Placement,
    params: &SchemeParams,
    profiles: &[WorkerProfile],
    strategy: &CorruptionStrategy,
    seed: u64,
    approx_mode: bool,
) -> Result<TrainLog, SimError> {
    let d = params.d;
    let data = quantize_dataset::<f64>(cfg, d)?;
    let grid = EvaluationGrid::<f64>::chebyshev_default(p.n_workers(), params.m)
        .map_err(|e| SimError::ConfigMismatch(e.to_string()))?;
    let cutoff = cfg
        .cutoff
        .clone()
        .unwrap_or(Cutoff::Count(p.n_workers() - params.s));
    let degree = params.poly_degree(p);

    let mut w = vec![0.0f64; d];
    let mut history = vec![w.clone()];
    let mut records = Vec::with_capacity(cfg.iterations);
    for it in 0..cfg.iterations {
        let gradients = partition_gradients(&data, &w)?;
        let round = simulate_round(
            p,
            params,
            &grid,
            &gradients,
            profiles,
            strategy,
            &cutoff,
            round_seed(seed, it),
        )?;
        let points: Vec<(f64, Vec<f64>)> = round
            .shares
            .iter()
            .map(|s| (s.alpha, s.payload.clone()))
            .collect();
        let (agg, bound, decoder) = if approx_mode {
            let agg = approx::approx_decode(&points, grid.betas(), d).map_err(|e| {
                SimError::DecodeFailure {
                    iteration: it,
                    reason: e.to_string(),
                }
            })?;
            // The oracle polynomial is available in simulation, so log the
            // straggler bound for the round alongside the step.
            let sliced = slice_gradients(&gradients, params.m);
            let f = exact::universal_poly(p, &grid, &sliced);
            let (n1, n2) = approx::max_norm_derivatives(&f);
            let s1 = p.n_workers() - round.responded.len();
            let bound = approx::berrut_error_bound(p.n_workers(), s1, n1, n2)
                .ok()
                .map(|r| r.bound);
            (agg, bound, "berrut")
        } else {
            let f = exact::interpolate_exact(&points, degree).map_err(|e| {
                SimError::DecodeFailure {
                    iteration: it,
                    reason: e.to_string(),
                }
            })?;
            (exact::recover_aggregate(&f, &grid, d), None, "exact-float")
        };
        for (wi, gi) in w.iter_mut().zip(agg.iter()) {
            *wi -= cfg.eta * gi;
        }
        history.push(w.clone());
        records.push(IterRecord {
            iter: it,
            loss: full_loss(&data.xs, &data.ys, &w),
            responders: round.responded.len(),
            decoder,
            bound,
        });
    }
    Ok(TrainLog {
        records,
        weights: history,
        weights_rational: None,
    })
}

fn partition_gradients<T: Scalar>(
    data: &QuantizedData<T>,
    weights: &[T],
) -> Result<Vec<Vec<T>>, SimError> {
    let total = data.xs.len();
    (0..total / data.chunk)
        .map(|k| {
            let range = k * data.chunk..(k + 1) * data.chunk;
            partial_gradient(&data.xs[range.clone()], &data.ys[range], weights, total)
        })
        .collect()
}
