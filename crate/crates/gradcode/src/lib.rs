//! Coded gradient aggregation for heterogeneous worker clusters.
//!
//! A master node recovers the sum of partial gradients from a subset of
//! worker responses, tolerating `s` stragglers and `a` adversarial workers,
//! at the minimum per-worker communication cost `d / (r - 2a - s)` where `r`
//! is the minimum replication across data partitions. The same machinery
//! extends to evaluating a matrix polynomial of the aggregated gradient
//! matrix, and to a numerically stable approximate decoder (Berrut rational
//! interpolation) for rounds where replication or responses fall short.
//!
//! Module map:
//!
//! - [`placement`]: data placement, feasibility, optimal cost, fallback plans
//! - [`exact`]: slicing, encoding, universal polynomial, exact recovery
//! - [`welch`]: error-locator decoding over the rationals
//! - [`matrix`]: matrix-polynomial evaluation of the aggregate
//! - [`approx`]: Berrut decoding, Lebesgue constants, error bounds
//! - [`simulator`]: latency/adversary round simulation, toy training loop
//! - [`verify`]: summation oracle, confusion witnesses, conditioning probes
//! - [`cli`]: config-driven planning, runs, analysis tables, run manifests
//!
//! The `examples/` directory has one runnable walkthrough per capability;
//! the `gradcode` binary front-ends the [`cli`] module.

pub mod approx;
pub mod cli;
pub mod exact;
pub mod matrix;
pub mod placement;
pub mod poly;
pub mod scalar;
pub mod simulator;
pub mod streams;
pub mod verify;
pub mod welch;
