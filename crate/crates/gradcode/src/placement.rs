//! Data placement across workers: which partitions live where, and what the
//! replication structure allows.
//!
//! Worker and partition indices are 1-based in every public interface. The
//! single quantity that matters for the achievable communication cost is the
//! minimum replication `r = min_k |A_k|`, where `A_k` is the set of workers
//! holding partition `k`; the structure of the sets beyond that is irrelevant.

use std::collections::BTreeSet;

use num::bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlacementError {
    #[error("worker {worker} holds no partitions")]
    EmptyWorker { worker: usize },
    #[error("partition {partition} is not assigned to any worker")]
    UncoveredPartition { partition: usize },
    #[error("partition index {partition} out of range 1..={max}")]
    PartitionOutOfRange { partition: usize, max: usize },
    #[error("placement must have at least one worker and one partition")]
    EmptyPlacement,
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
}

/// Which partitions each worker holds. `gamma[n-1]` is the partition set of
/// worker `n`, values in `1..=n_partitions`, serialized sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "PlacementRepr", into = "PlacementRepr")]
pub struct Placement {
    n_workers: usize,
    n_partitions: usize,
    gamma: Vec<BTreeSet<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacementRepr {
    n_workers: usize,
    n_partitions: usize,
    gamma: Vec<Vec<usize>>,
}

impl TryFrom<PlacementRepr> for Placement {
    type Error = PlacementError;
    fn try_from(repr: PlacementRepr) -> Result<Self, Self::Error> {
        Placement::new(
            repr.n_workers,
            repr.n_partitions,
            repr.gamma.iter().map(|g| g.iter().copied().collect()),
        )
    }
}

impl From<Placement> for PlacementRepr {
    fn from(p: Placement) -> Self {
        PlacementRepr {
            n_workers: p.n_workers,
            n_partitions: p.n_partitions,
            gamma: p
                .gamma
                .iter()
                .map(|g| g.iter().copied().collect())
                .collect(),
        }
    }
}

impl Placement {
    /// Validates and builds a placement. Every worker must hold at least one
    /// partition and every partition must be held by at least one worker.
    pub fn new<I>(n_workers: usize, n_partitions: usize, gamma: I) -> Result<Self, PlacementError>
    where
        I: IntoIterator<Item = BTreeSet<usize>>,
    {
        if n_workers == 0 || n_partitions == 0 {
            return Err(PlacementError::EmptyPlacement);
        }
        let gamma: Vec<BTreeSet<usize>> = gamma.into_iter().collect();
        if gamma.len() != n_workers {
            return Err(PlacementError::InvalidArgs(format!(
                "expected {} worker sets, got {}",
                n_workers,
                gamma.len()
            )));
        }
        let mut covered = vec![false; n_partitions];
        for (i, set) in gamma.iter().enumerate() {
            if set.is_empty() {
                return Err(PlacementError::EmptyWorker { worker: i + 1 });
            }
            for &k in set {
                if k == 0 || k > n_partitions {
                    return Err(PlacementError::PartitionOutOfRange {
                        partition: k,
                        max: n_partitions,
                    });
                }
                covered[k - 1] = true;
            }
        }
        if let Some(k) = covered.iter().position(|c| !c) {
            return Err(PlacementError::UncoveredPartition { partition: k + 1 });
        }
        Ok(Placement {
            n_workers,
            n_partitions,
            gamma,
        })
    }

    /// Convenience constructor from slices of 1-based partition indices.
    pub fn from_sets(n_workers: usize, n_partitions: usize, sets: &[&[usize]]) -> Result<Self, PlacementError> {
        Self::new(
            n_workers,
            n_partitions,
            sets.iter().map(|s| s.iter().copied().collect()),
        )
    }

    /// Placement with every partition on every worker.
    pub fn full_replication(n_workers: usize, n_partitions: usize) -> Result<Self, PlacementError> {
        let all: BTreeSet<usize> = (1..=n_partitions).collect();
        Self::new(n_workers, n_partitions, std::iter::repeat_n(all, n_workers))
    }

    /// The worked five-worker instance used throughout the docs and tests:
    /// `Γ1={1..5}, Γ2={1,2,3}, Γ3={1}, Γ4={2,3,4,5}, Γ5={1,4,5}`.
    pub fn five_worker_example() -> Self {
        Self::from_sets(
            5,
            5,
            &[&[1, 2, 3, 4, 5], &[1, 2, 3], &[1], &[2, 3, 4, 5], &[1, 4, 5]],
        )
        .expect("static placement is valid")
    }

    pub fn n_workers(&self) -> usize {
        self.n_workers
    }

    pub fn n_partitions(&self) -> usize {
        self.n_partitions
    }

    /// Partition set of worker `n` (1-based).
    pub fn worker_partitions(&self, n: usize) -> &BTreeSet<usize> {
        &self.gamma[n - 1]
    }

    pub fn holds(&self, worker: usize, partition: usize) -> bool {
        self.gamma[worker - 1].contains(&partition)
    }

    /// The assignment sets `A_1..A_K`: for each partition, the workers holding
    /// it. Inverse of the gamma map.
    pub fn assignment_sets(&self) -> Vec<BTreeSet<usize>> {
        let mut sets = vec![BTreeSet::new(); self.n_partitions];
        for (i, partitions) in self.gamma.iter().enumerate() {
            for &k in partitions {
                sets[k - 1].insert(i + 1);
            }
        }
        sets
    }

    /// Minimum replication `r = min_k |A_k|`.
    pub fn replication(&self) -> usize {
        self.assignment_sets()
            .iter()
            .map(|s| s.len())
            .min()
            .expect("placement has at least one partition")
    }

    /// A partition attaining the minimum replication (smallest index on ties).
    pub fn limiting_partition(&self) -> usize {
        let sets = self.assignment_sets();
        let mut best = 1;
        for (k, s) in sets.iter().enumerate() {
            if s.len() < sets[best - 1].len() {
                best = k + 1;
            }
        }
        best
    }

    /// Partition indices sorted by ascending `|A_k|`, ties by ascending index.
    pub fn partitions_by_replication(&self) -> Vec<(usize, usize)> {
        let mut order: Vec<(usize, usize)> = self
            .assignment_sets()
            .iter()
            .enumerate()
            .map(|(k, s)| (k + 1, s.len()))
            .collect();
        order.sort_by_key(|&(k, len)| (len, k));
        order
    }
}

/// Straggler/adversary budget plus gradient dimension for a cost query.
///
/// Budgets with `s + a >= N` leave no honest responsive worker; they imply
/// `2a + s >= r` and every query below reports them infeasible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostQuery {
    pub s: usize,
    pub a: usize,
    pub d: usize,
}

impl CostQuery {
    pub fn new(s: usize, a: usize, d: usize) -> Self {
        CostQuery { s, a, d }
    }

    /// Tolerance threshold `2a + s`: a partition is recoverable only if it is
    /// replicated on strictly more workers than this.
    pub fn threshold(&self) -> usize {
        2 * self.a + self.s
    }
}

/// Result of a cost query on a feasible placement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    /// Exact per-worker cost `d / (r - 2a - s)` in symbols.
    #[serde(serialize_with = "crate::scalar::serde_rat::serialize")]
    pub cost: Rat,
    /// Number of slices each gradient is cut into, `m = r - 2a - s`.
    pub m: usize,
    /// Integer per-share vector length `ceil(d / m)` actually transmitted.
    pub per_share_len: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CostError {
    #[error("infeasible: partition {limiting_partition} is replicated {replication} times, needs more than {threshold}")]
    Infeasible {
        limiting_partition: usize,
        replication: usize,
        threshold: usize,
    },
}

/// Minimum per-worker communication cost for tolerating `s` stragglers and
/// `a` adversaries: `d / (r - 2a - s)` symbols, together with the slice count
/// and the integer share length.
pub fn optimal_cost(p: &Placement, q: &CostQuery) -> Result<CostReport, CostError> {
    let r = p.replication();
    let threshold = q.threshold();
    if r <= threshold {
        return Err(CostError::Infeasible {
            limiting_partition: p.limiting_partition(),
            replication: r,
            threshold,
        });
    }
    let m = r - threshold;
    Ok(CostReport {
        cost: Rat::new(BigInt::from(q.d), BigInt::from(m)),
        m,
        per_share_len: q.d.div_ceil(m),
    })
}

/// Feasibility verdict for a `(s, a)` budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Feasibility {
    /// Every partition clears the threshold; the full aggregate is recoverable.
    Full,
    /// Only a suffix of the replication-sorted partitions clears it; their sum
    /// is recoverable, the rest are lost.
    Partial {
        /// 1-based position in the sorted-by-replication order of the first
        /// recoverable partition.
        first_index: usize,
        /// Original indices of the recoverable partitions.
        recoverable: Vec<usize>,
    },
    /// No partition clears the threshold.
    Infeasible,
}

pub fn feasibility_check(p: &Placement, s: usize, a: usize) -> Feasibility {
    let threshold = 2 * a + s;
    let order = p.partitions_by_replication();
    let first = order.iter().position(|&(_, len)| len > threshold);
    match first {
        None => Feasibility::Infeasible,
        Some(0) => Feasibility::Full,
        Some(i) => Feasibility::Partial {
            first_index: i + 1,
            recoverable: order[i..].iter().map(|&(k, _)| k).collect(),
        },
    }
}

/// Fallback plan when the communication budget `R` is below the optimum:
/// drop the poorly replicated partitions and aggregate only a suffix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartialSumPlan {
    /// 1-based position `j` in the sorted-by-replication order: partitions at
    /// positions `j..=K` are aggregated.
    pub first_index: usize,
    /// Original indices of the partitions whose sum will be recovered.
    pub partitions: Vec<usize>,
    /// Slice count usable for that suffix.
    pub m: usize,
    /// Integer share length under the plan.
    pub per_share_len: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("budget must be at least 1 symbol")]
    ZeroBudget,
    #[error("no plan: even the best-replicated partition needs more than {budget} symbols per share")]
    NoPlan { budget: usize },
}

/// Smallest sorted position `j` with `R >= d / (|A_(j)| - 2a - s)`, plus the
/// partition suffix to aggregate. Ties in the sort are broken by ascending
/// partition index so plans are reproducible.
pub fn partial_sum_plan(
    p: &Placement,
    s: usize,
    a: usize,
    budget: usize,
    d: usize,
) -> Result<PartialSumPlan, PlanError> {
    if budget == 0 {
        return Err(PlanError::ZeroBudget);
    }
    let threshold = 2 * a + s;
    let order = p.partitions_by_replication();
    for (i, &(_, len)) in order.iter().enumerate() {
        if len <= threshold {
            continue;
        }
        let m = len - threshold;
        // R >= d/m without rounding: compare R*m >= d in integers.
        if budget * m >= d {
            return Ok(PartialSumPlan {
                first_index: i + 1,
                partitions: order[i..].iter().map(|&(k, _)| k).collect(),
                m,
                per_share_len: d.div_ceil(m),
            });
        }
    }
    Err(PlanError::NoPlan { budget })
}

/// Shape of generated placements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementKind {
    /// Every partition replicated exactly `r_target` times.
    Uniform,
    /// Replication drawn per partition in `[r_target, N]`, with workers
    /// weighted so the per-worker loads come out unequal.
    Skewed,
}

/// Deterministic random placement with minimum replication at least
/// `r_target`. Same arguments and seed always produce the same placement.
pub fn generate_placement(
    n_workers: usize,
    n_partitions: usize,
    r_target: usize,
    kind: PlacementKind,
    seed: u64,
) -> Result<Placement, PlacementError> {
    if r_target == 0 || r_target > n_workers {
        return Err(PlacementError::InvalidArgs(format!(
            "r_target {} must be in 1..={}",
            r_target, n_workers
        )));
    }
    if n_partitions == 0 {
        return Err(PlacementError::EmptyPlacement);
    }
    if kind == PlacementKind::Uniform && n_partitions * r_target < n_workers {
        return Err(PlacementError::InvalidArgs(format!(
            "cannot keep every worker non-empty: {} partitions x {} replicas < {} workers",
            n_partitions, r_target, n_workers
        )));
    }
    let mut rng = crate::streams::substream(seed, "placement", 0);
    let mut members: Vec<BTreeSet<usize>> = Vec::with_capacity(n_partitions);
    let workers: Vec<usize> = (1..=n_workers).collect();
    for _ in 0..n_partitions {
        let size = match kind {
            PlacementKind::Uniform => r_target,
            PlacementKind::Skewed => rng.gen_range(r_target..=n_workers),
        };
        let mut pool = workers.clone();
        match kind {
            PlacementKind::Uniform => pool.shuffle(&mut rng),
            PlacementKind::Skewed => {
                // Low-index workers get picked more often, skewing |Γ_n|.
                pool.sort_by_cached_key(|&w| {
                    let jitter: f64 = rng.gen::<f64>();
                    ((w as f64 * jitter) * 1e12) as i64
                });
            }
        }
        members.push(pool[..size].iter().copied().collect());
    }
    // Re-house memberships so no worker ends up empty. Moving a member keeps
    // each |A_k| intact.
    let mut gamma: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_workers];
    for (k, set) in members.iter().enumerate() {
        for &w in set {
            gamma[w - 1].insert(k + 1);
        }
    }
    for empty in 1..=n_workers {
        if !gamma[empty - 1].is_empty() {
            continue;
        }
        let donor = (1..=n_workers)
            .filter(|&w| gamma[w - 1].len() > 1)
            .max_by_key(|&w| gamma[w - 1].len())
            .ok_or_else(|| {
                PlacementError::InvalidArgs("not enough memberships to cover all workers".into())
            })?;
        let &k = gamma[donor - 1]
            .iter()
            .find(|&&k| !gamma[empty - 1].contains(&k))
            .expect("donor has a partition the empty worker lacks");
        gamma[donor - 1].remove(&k);
        gamma[empty - 1].insert(k);
    }
    Placement::new(n_workers, n_partitions, gamma)
}
