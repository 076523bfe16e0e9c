//! Config-driven front end: planning, single rounds, training runs, analysis
//! tables and run manifests.
//!
//! The configuration is one JSON document with sections `placement`,
//! `scheme`, `workers` and `train`; unknown keys are rejected. Every run
//! writes a manifest carrying the full resolved config plus the seed, and
//! feeding a manifest back in reproduces the output files byte-for-byte
//! (the manifest's own timestamp is reused on replay; fresh runs honor
//! `SOURCE_DATE_EPOCH` for reproducible stamps).

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx;
use crate::exact::{self, EvaluationGrid, SchemeParams};
use crate::matrix::{self, MatrixPoly, SquareMat};
use crate::placement::{self, CostQuery, Placement, PlacementKind};
use crate::scalar::{format_rat, Arithmetic, Rat, Scalar};
use crate::simulator::{
    self, CorruptionStrategy, Cutoff, Dataset, DecodeMode, LatencyModel, TrainConfig,
    WorkerProfile,
};
use crate::verify;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("decode failure: {0}")]
    Decode(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("self-test failed with {0} failing cases")]
    SelftestFailed(usize),
}

impl CliError {
    /// Process exit code: 2 for config problems, 3 for decode failures,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Decode(_) => 3,
            _ => 1,
        }
    }
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PlacementSection {
    Explicit(Placement),
    Generated {
        generate: GenerateSpec,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSpec {
    pub n_workers: usize,
    pub n_partitions: usize,
    pub r_target: usize,
    pub kind: PlacementKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub s: usize,
    pub a: usize,
    pub d: usize,
    /// Slice count; defaults to the optimal `r - 2a - s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default = "default_arithmetic")]
    pub arithmetic: Arithmetic,
    /// Degree of the matrix polynomial for `--mode matrix` and the plan table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deg_h: Option<usize>,
    /// Per-worker symbol budget for the partial-sum fallback plan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// Adversary corruption model for simulated rounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corruption: Option<CorruptionStrategy>,
    /// Responder cutoff; defaults to `count = N - s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<Cutoff>,
    /// Partial gradients for `run`, inline or from a file; defaults to
    /// synthetic values drawn from the seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradients: Option<GradientSpec>,
}

/// Gradient input: a JSON array of arrays (numbers or exact `"p/q"`/decimal
/// strings), or a path to a `.csv` (one row per partition) or `.json` file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GradientSpec {
    File { file: String },
    Inline(Vec<Vec<serde_json::Value>>),
}

/// Parses CSV gradient input, one row per partition, into raw value tokens.
pub fn parse_gradients_csv(text: &str) -> Result<Vec<Vec<String>>, CliError> {
    let rows: Vec<Vec<String>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|v| v.trim().to_string()).collect())
        .collect();
    if rows.is_empty() {
        return Err(CliError::Config("empty gradient CSV".into()));
    }
    let width = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(CliError::Config(format!(
                "gradient CSV row {} has {} values, expected {width}",
                i + 1,
                r.len()
            )));
        }
    }
    Ok(rows)
}

fn json_value_token(v: &serde_json::Value) -> Result<String, CliError> {
    match v {
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::String(s) => Ok(s.clone()),
        other => Err(CliError::Config(format!(
            "gradient entries must be numbers or strings, got {other}"
        ))),
    }
}

impl GradientSpec {
    /// Resolves to raw value tokens; exact mode parses them as decimal
    /// strings or `p/q` fractions, float mode as IEEE doubles.
    pub fn load(&self) -> Result<Vec<Vec<String>>, CliError> {
        match self {
            GradientSpec::Inline(values) => values
                .iter()
                .map(|row| row.iter().map(json_value_token).collect())
                .collect(),
            GradientSpec::File { file } => {
                let text = fs::read_to_string(file)
                    .map_err(|e| CliError::Config(format!("{file}: {e}")))?;
                if file.ends_with(".json") {
                    let values: Vec<Vec<serde_json::Value>> = serde_json::from_str(&text)
                        .map_err(|e| CliError::Config(format!("{file}: {e}")))?;
                    values
                        .iter()
                        .map(|row| row.iter().map(json_value_token).collect())
                        .collect()
                } else {
                    parse_gradients_csv(&text)
                }
            }
        }
    }
}

fn tokens_to_scalars<T: Scalar>(
    raw: &[Vec<String>],
    k: usize,
    d: usize,
) -> Result<Vec<Vec<T>>, CliError> {
    if raw.len() != k {
        return Err(CliError::Config(format!(
            "{} gradient rows for {k} partitions",
            raw.len()
        )));
    }
    raw.iter()
        .map(|row| {
            if row.len() != d {
                return Err(CliError::Config(format!(
                    "gradient row has {} values, expected d = {d}",
                    row.len()
                )));
            }
            row.iter()
                .map(|tok| {
                    T::parse_text(tok)
                        .ok_or_else(|| CliError::Config(format!("bad gradient value `{tok}`")))
                })
                .collect()
        })
        .collect()
}

fn default_arithmetic() -> Arithmetic {
    Arithmetic::Rational
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    /// Exactly one of `synthetic` / `dataset` must be present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<Dataset>,
    pub k_partitions: usize,
    pub eta: f64,
    pub iterations: usize,
    pub mode: DecodeMode,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub n_features: usize,
    #[serde(default)]
    pub noise: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub placement: PlacementSection,
    pub scheme: SchemeSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<Vec<WorkerProfile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainSection>,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        // A manifest is accepted wherever a config is: replaying one
        // reproduces the original run.
        if let Ok(manifest) = serde_json::from_str::<RunManifest>(text) {
            return Ok(manifest.config);
        }
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn resolve_placement(&self, seed: u64) -> Result<Placement, CliError> {
        match &self.placement {
            PlacementSection::Explicit(p) => Ok(p.clone()),
            PlacementSection::Generated { generate } => placement::generate_placement(
                generate.n_workers,
                generate.n_partitions,
                generate.r_target,
                generate.kind,
                seed,
            )
            .map_err(|e| CliError::Config(e.to_string())),
        }
    }

    fn scheme_params(&self, p: &Placement) -> Result<SchemeParams, CliError> {
        let s = &self.scheme;
        match s.m {
            Some(m) => SchemeParams::with_m(p, s.s, s.a, s.d, m),
            None => SchemeParams::optimal(p, s.s, s.a, s.d),
        }
        .map_err(|e| CliError::Config(e.to_string()))
    }

    fn profiles(&self, n: usize) -> Result<Vec<WorkerProfile>, CliError> {
        match &self.workers {
            Some(ws) => {
                if ws.len() != n {
                    return Err(CliError::Config(format!(
                        "{} worker profiles for {} workers",
                        ws.len(),
                        n
                    )));
                }
                Ok(ws.clone())
            }
            None => Ok((1..=n)
                .map(|w| WorkerProfile::honest(LatencyModel::Deterministic { t: w as f64 }))
                .collect()),
        }
    }

    fn corruption(&self) -> CorruptionStrategy {
        self.scheme
            .corruption
            .clone()
            .unwrap_or(CorruptionStrategy::SignFlipScale { c: -2.0 })
    }

    fn cutoff(&self, n: usize) -> Cutoff {
        self.scheme
            .cutoff
            .clone()
            .unwrap_or(Cutoff::Count(n - self.scheme.s))
    }
}

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

/// Everything needed to replay a run byte-for-byte.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub mode: Option<String>,
    pub seed: u64,
    pub timestamp: String,
    pub config: Config,
}

fn fresh_timestamp() -> String {
    // SOURCE_DATE_EPOCH makes fresh runs reproducible; replays reuse the
    // manifest's stamp instead.
    let epoch = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse::<i64>().ok());
    let when = match epoch {
        Some(secs) => chrono::DateTime::<chrono::Utc>::from_timestamp(secs, 0)
            .unwrap_or_else(chrono::Utc::now),
        None => chrono::Utc::now(),
    };
    when.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Timestamp for a run: reuse the manifest's when replaying.
fn run_timestamp(config_text: Option<&str>) -> String {
    if let Some(text) = config_text {
        if let Ok(manifest) = serde_json::from_str::<RunManifest>(text) {
            return manifest.timestamp;
        }
    }
    fresh_timestamp()
}

/// Atomic file write: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// plan
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct PlanReport {
    pub n_workers: usize,
    pub n_partitions: usize,
    pub replication: usize,
    pub s: usize,
    pub a: usize,
    pub d: usize,
    pub feasible: String,
    /// Optimal cost `d/m` as an exact fraction, when feasible.
    pub cost: Option<String>,
    pub m: Option<usize>,
    pub per_share_len: Option<usize>,
    /// Recoverable partition suffix when only partially feasible.
    pub recoverable: Option<Vec<usize>>,
    /// Partial-sum fallback under the configured budget.
    pub budget_plan: Option<PlanBudget>,
    /// Matrix-scheme replication requirement for the configured `deg_h`.
    pub matrix_r_min: Option<usize>,
    pub matrix_supported: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct PlanBudget {
    pub budget: usize,
    pub first_index: Option<usize>,
    pub partitions: Option<Vec<usize>>,
    pub per_share_len: Option<usize>,
}

pub fn plan_report(cfg: &Config, seed: u64) -> Result<PlanReport, CliError> {
    let p = cfg.resolve_placement(seed)?;
    let q = CostQuery::new(cfg.scheme.s, cfg.scheme.a, cfg.scheme.d);
    let cost = placement::optimal_cost(&p, &q);
    let feasibility = placement::feasibility_check(&p, q.s, q.a);
    let (feasible, recoverable) = match &feasibility {
        placement::Feasibility::Full => ("yes".to_string(), None),
        placement::Feasibility::Partial { recoverable, .. } => {
            ("partial".to_string(), Some(recoverable.clone()))
        }
        placement::Feasibility::Infeasible => ("no".to_string(), None),
    };
    let budget_plan = cfg.scheme.budget.map(|budget| {
        match placement::partial_sum_plan(&p, q.s, q.a, budget, q.d) {
            Ok(plan) => PlanBudget {
                budget,
                first_index: Some(plan.first_index),
                partitions: Some(plan.partitions),
                per_share_len: Some(plan.per_share_len),
            },
            Err(_) => PlanBudget {
                budget,
                first_index: None,
                partitions: None,
                per_share_len: None,
            },
        }
    });
    let deg_h = cfg.scheme.deg_h.unwrap_or(2);
    let (matrix_r_min, matrix_supported) =
        match matrix::matrix_feasible(p.n_workers(), q.s, q.a, deg_h) {
            Ok(r_min) => (Some(r_min), Some(p.replication() >= r_min)),
            Err(_) => (None, Some(false)),
        };
    Ok(PlanReport {
        n_workers: p.n_workers(),
        n_partitions: p.n_partitions(),
        replication: p.replication(),
        s: q.s,
        a: q.a,
        d: q.d,
        feasible,
        cost: cost.as_ref().ok().map(|c| format_rat(&c.cost)),
        m: cost.as_ref().ok().map(|c| c.m),
        per_share_len: cost.as_ref().ok().map(|c| c.per_share_len),
        recoverable,
        budget_plan,
        matrix_r_min,
        matrix_supported,
    })
}

pub fn render_plan(report: &PlanReport, json: bool) -> String {
    if json {
        return serde_json::to_string_pretty(report).expect("report serializes");
    }
    let mut out = String::new();
    let mut row = |k: &str, v: String| out.push_str(&format!("{k:<18} {v}\n"));
    row("workers", report.n_workers.to_string());
    row("partitions", report.n_partitions.to_string());
    row("replication r", report.replication.to_string());
    row("budget (s, a)", format!("({}, {})", report.s, report.a));
    row("feasible", report.feasible.clone());
    match (&report.cost, report.m, report.per_share_len) {
        (Some(c), Some(m), Some(len)) => {
            row("cost C*", format!("{c} symbols/worker"));
            row("slices m", m.to_string());
            row("share length", len.to_string());
        }
        _ => row("cost C*", "-".into()),
    }
    if let Some(rec) = &report.recoverable {
        row("recoverable", format!("{rec:?}"));
    }
    if let Some(plan) = &report.budget_plan {
        match (&plan.first_index, &plan.partitions) {
            (Some(j), Some(parts)) => row(
                "budget plan",
                format!("R={} -> suffix j={j}, partitions {parts:?}", plan.budget),
            ),
            _ => row("budget plan", format!("R={}: no plan", plan.budget)),
        }
    }
    match (report.matrix_r_min, report.matrix_supported) {
        (Some(r_min), Some(ok)) => row(
            "matrix r_min",
            format!("{r_min} ({})", if ok { "supported" } else { "unsupported" }),
        ),
        _ => row("matrix r_min", "infeasible".into()),
    }
    out
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Exact,
    Approx,
    Matrix,
}

impl RunMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunMode::Exact => "exact",
            RunMode::Approx => "approx",
            RunMode::Matrix => "matrix",
        }
    }
}

#[derive(Debug, Serialize)]
struct RunResult {
    mode: String,
    arithmetic: Arithmetic,
    responders: Vec<usize>,
    flagged: Vec<usize>,
    aggregate: serde_json::Value,
    matches_oracle: bool,
    max_abs_error: Option<f64>,
}

/// Executes one coded round end to end and writes `result.json`,
/// `round.csv` and `manifest.json` into `out_dir`.
pub fn cmd_run(
    cfg: &Config,
    seed: u64,
    mode: RunMode,
    out_dir: &Path,
    original_text: Option<&str>,
) -> Result<String, CliError> {
    let p = cfg.resolve_placement(seed)?;
    let n = p.n_workers();
    let profiles = cfg.profiles(n)?;
    let strategy = cfg.corruption();
    let cutoff = cfg.cutoff(n);

    let (result, round_rows) = match (mode, cfg.scheme.arithmetic) {
        (RunMode::Matrix, _) => run_matrix(cfg, &p, &profiles, &strategy, seed)?,
        (RunMode::Exact, Arithmetic::Rational) => {
            run_exact_rational(cfg, &p, &profiles, &strategy, &cutoff, seed)?
        }
        (RunMode::Exact, Arithmetic::Float64) => {
            if cfg.scheme.a > 0 {
                return Err(CliError::Config(
                    "exact decoding with adversaries requires rational arithmetic".into(),
                ));
            }
            run_float(cfg, &p, &profiles, &strategy, &cutoff, seed, false)?
        }
        (RunMode::Approx, Arithmetic::Float64) => {
            run_float(cfg, &p, &profiles, &strategy, &cutoff, seed, true)?
        }
        (RunMode::Approx, Arithmetic::Rational) => {
            return Err(CliError::Config(
                "approximate decoding runs in Float64; set scheme.arithmetic to \"float64\"".into(),
            ))
        }
    };

    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "run".into(),
        mode: Some(mode.as_str().to_string()),
        seed,
        timestamp: run_timestamp(original_text),
        config: cfg.clone(),
    };
    let result_text = serde_json::to_string_pretty(&result).expect("result serializes");
    write_atomic(&out_dir.join("result.json"), &result_text)?;
    write_atomic(&out_dir.join("round.csv"), &round_rows)?;
    write_atomic(
        &out_dir.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(result_text)
}

fn round_csv(
    n: usize,
    latencies: &[f64],
    responded: &[usize],
    corrupted: &BTreeSet<usize>,
    flagged: &BTreeSet<usize>,
) -> String {
    let mut csv = String::from("worker,latency,responded,corrupted,flagged\n");
    for w in 1..=n {
        csv.push_str(&format!(
            "{w},{},{},{},{}\n",
            latencies[w - 1],
            responded.contains(&w),
            corrupted.contains(&w),
            flagged.contains(&w),
        ));
    }
    csv
}

fn synthetic_round_gradients<T: Scalar>(k: usize, d: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = crate::streams::substream(seed, "data", 0);
    (0..k)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let v = rand::Rng::gen_range(&mut rng, -64i32..=64) as f64 / 16.0;
                    T::from_f64(v)
                })
                .collect()
        })
        .collect()
}

/// Supplied gradients when configured, synthetic otherwise.
fn round_gradients<T: Scalar>(
    cfg: &Config,
    k: usize,
    d: usize,
    seed: u64,
) -> Result<Vec<Vec<T>>, CliError> {
    match &cfg.scheme.gradients {
        Some(spec) => tokens_to_scalars(&spec.load()?, k, d),
        None => Ok(synthetic_round_gradients(k, d, seed)),
    }
}

fn run_exact_rational(
    cfg: &Config,
    p: &Placement,
    profiles: &[WorkerProfile],
    strategy: &CorruptionStrategy,
    cutoff: &Cutoff,
    seed: u64,
) -> Result<(RunResult, String), CliError> {
    let params = cfg.scheme_params(p)?;
    let grid = EvaluationGrid::integer_default(p.n_workers(), params.m)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let gradients = round_gradients::<Rat>(cfg, p.n_partitions(), params.d, seed)?;
    let round = simulator::simulate_round(
        p, &params, &grid, &gradients, profiles, strategy, cutoff, seed,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let outcome = exact::decode_with_errors(&round.shares, params.a, params.poly_degree(p))
        .map_err(|e| CliError::Decode(e.to_string()))?;
    let aggregate = exact::recover_aggregate(&outcome.poly, &grid, params.d);
    let oracle = verify::oracle_aggregate(&gradients).expect("equal lengths");
    let result = RunResult {
        mode: "exact".into(),
        arithmetic: Arithmetic::Rational,
        responders: round.responded.clone(),
        flagged: outcome.flagged.iter().copied().collect(),
        aggregate: serde_json::Value::Array(
            aggregate
                .iter()
                .map(|v| serde_json::Value::String(format_rat(v)))
                .collect(),
        ),
        matches_oracle: aggregate == oracle,
        max_abs_error: None,
    };
    let csv = round_csv(
        p.n_workers(),
        &round.latencies,
        &round.responded,
        &round.corrupted,
        &outcome.flagged,
    );
    Ok((result, csv))
}

fn run_float(
    cfg: &Config,
    p: &Placement,
    profiles: &[WorkerProfile],
    strategy: &CorruptionStrategy,
    cutoff: &Cutoff,
    seed: u64,
    approx_mode: bool,
) -> Result<(RunResult, String), CliError> {
    let params = cfg.scheme_params(p)?;
    let grid = EvaluationGrid::<f64>::chebyshev_default(p.n_workers(), params.m)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let gradients = round_gradients::<f64>(cfg, p.n_partitions(), params.d, seed)?;
    let round = simulator::simulate_round(
        p, &params, &grid, &gradients, profiles, strategy, cutoff, seed,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let points: Vec<(f64, Vec<f64>)> = round
        .shares
        .iter()
        .map(|s| (s.alpha, s.payload.clone()))
        .collect();
    let aggregate = if approx_mode {
        approx::approx_decode(&points, grid.betas(), params.d)
            .map_err(|e| CliError::Decode(e.to_string()))?
    } else {
        let f = exact::interpolate_exact(&points, params.poly_degree(p))
            .map_err(|e| CliError::Decode(e.to_string()))?;
        exact::recover_aggregate(&f, &grid, params.d)
    };
    let oracle = verify::oracle_aggregate(&gradients).expect("equal lengths");
    let max_err = aggregate
        .iter()
        .zip(oracle.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let result = RunResult {
        mode: if approx_mode { "approx" } else { "exact" }.into(),
        arithmetic: Arithmetic::Float64,
        responders: round.responded.clone(),
        flagged: Vec::new(),
        aggregate: serde_json::to_value(&aggregate).expect("floats serialize"),
        matches_oracle: max_err <= 1e-8,
        max_abs_error: Some(max_err),
    };
    let csv = round_csv(
        p.n_workers(),
        &round.latencies,
        &round.responded,
        &round.corrupted,
        &BTreeSet::new(),
    );
    Ok((result, csv))
}

fn run_matrix(
    cfg: &Config,
    p: &Placement,
    profiles: &[WorkerProfile],
    strategy: &CorruptionStrategy,
    seed: u64,
) -> Result<(RunResult, String), CliError> {
    let n = p.n_workers();
    let s = cfg.scheme.s;
    let a = cfg.scheme.a;
    let d = cfg.scheme.d;
    let deg_h = cfg.scheme.deg_h.unwrap_or(2);
    matrix::placement_supports(p, s, a, deg_h).map_err(|e| CliError::Config(e.to_string()))?;

    // Random rational coefficients and matrices from the data substream.
    let mut rng = crate::streams::substream(seed, "data", 0);
    let mut coeffs: Vec<Rat> = (0..=deg_h)
        .map(|_| Rat::from_int(rand::Rng::gen_range(&mut rng, -5i64..=5)))
        .collect();
    if num::Zero::is_zero(coeffs.last().unwrap()) {
        *coeffs.last_mut().unwrap() = Rat::from_int(1);
    }
    let h = MatrixPoly::new(coeffs).map_err(|e| CliError::Config(e.to_string()))?;
    // Supplied matrices arrive as K rows of d*d row-major entries.
    let matrices: Vec<SquareMat<Rat>> = match &cfg.scheme.gradients {
        Some(spec) => tokens_to_scalars::<Rat>(&spec.load()?, p.n_partitions(), d * d)?
            .into_iter()
            .map(|flat| SquareMat::from_flat(d, flat).expect("length checked"))
            .collect(),
        None => (0..p.n_partitions())
            .map(|_| {
                SquareMat::from_flat(
                    d,
                    (0..d * d)
                        .map(|_| Rat::from_int(rand::Rng::gen_range(&mut rng, -9i64..=9)))
                        .collect(),
                )
                .expect("square data")
            })
            .collect(),
    };
    let alphas: Vec<Rat> = (1..=n as i64).map(Rat::from_int).collect();
    let beta = Rat::from_int(0);
    let shares = matrix::matrix_encode_all(p, &alphas, &beta, &h, &matrices)
        .map_err(|e| CliError::Config(e.to_string()))?;

    // Latency, cutoff and corruption, mirroring the vector rounds.
    let latencies: Vec<f64> = (1..=n)
        .map(|w| simulator::straggler_sample(&profiles[w - 1].latency, seed, w))
        .collect();
    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by(|&x, &y| {
        latencies[x - 1]
            .partial_cmp(&latencies[y - 1])
            .expect("finite latencies")
            .then(x.cmp(&y))
    });
    let responded: Vec<usize> = order.into_iter().take(n - s).collect();
    let mut corrupted = BTreeSet::new();
    let delivered: Vec<matrix::MatrixShare<Rat>> = responded
        .iter()
        .map(|&w| {
            let mut share = shares[w - 1].clone();
            if profiles[w - 1].adversarial {
                let flat =
                    simulator::corrupt_share(share.payload.flat(), strategy, seed, w);
                share.payload = SquareMat::from_flat(d, flat).expect("square payload");
                corrupted.insert(w);
            }
            share
        })
        .collect();
    if corrupted.len() > a {
        return Err(CliError::Config(format!(
            "{} adversarial responders exceed the budget a = {a}",
            corrupted.len()
        )));
    }

    let degree = (n - p.replication()) * deg_h;
    let (hf, flagged) =
        matrix::matrix_decode(&delivered, a, degree).map_err(|e| CliError::Decode(e.to_string()))?;
    let recovered = matrix::matrix_recover(&hf, &beta);

    let mut total = SquareMat::zeros(d);
    for g in &matrices {
        total = total.add(g);
    }
    let expect = matrix::eval_matrix_poly(&h, &total);

    let result = RunResult {
        mode: "matrix".into(),
        arithmetic: Arithmetic::Rational,
        responders: responded.clone(),
        flagged: flagged.iter().copied().collect(),
        aggregate: serde_json::json!({
            "d": d,
            "entries": recovered.flat().iter().map(format_rat).collect::<Vec<_>>(),
        }),
        matches_oracle: recovered == expect,
        max_abs_error: None,
    };
    let csv = round_csv(n, &latencies, &responded, &corrupted, &flagged);
    Ok((result, csv))
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct TrainResult {
    iterations: usize,
    final_loss: f64,
    final_weights: Vec<f64>,
    responders_min: usize,
    responders_max: usize,
}

/// Runs the training loop and writes `train.csv` (iter,loss,responders,
/// decoder,bound), `result.json` and `manifest.json`.
pub fn cmd_train(
    cfg: &Config,
    seed: u64,
    out_dir: &Path,
    original_text: Option<&str>,
) -> Result<String, CliError> {
    let section = cfg
        .train
        .as_ref()
        .ok_or_else(|| CliError::Config("missing train section".into()))?;
    let p = cfg.resolve_placement(seed)?;
    let params = cfg.scheme_params(&p)?;
    let profiles = cfg.profiles(p.n_workers())?;
    let dataset = match (&section.dataset, &section.synthetic) {
        (Some(dataset), None) => dataset.clone(),
        (None, Some(synthetic)) => simulator::synthetic_regression(
            synthetic.n_samples,
            synthetic.n_features,
            synthetic.noise,
            seed,
        ),
        _ => {
            return Err(CliError::Config(
                "train section needs exactly one of `synthetic` or `dataset`".into(),
            ))
        }
    };
    let train_cfg = TrainConfig {
        dataset,
        k_partitions: section.k_partitions,
        eta: section.eta,
        iterations: section.iterations,
        mode: section.mode,
        cutoff: cfg.scheme.cutoff.clone(),
    };
    let log = simulator::train_gd(
        &train_cfg,
        &p,
        &params,
        cfg.scheme.arithmetic,
        &profiles,
        &cfg.corruption(),
        seed,
    )
    .map_err(|e| match e {
        simulator::SimError::DecodeFailure { .. } => CliError::Decode(e.to_string()),
        other => CliError::Config(other.to_string()),
    })?;

    let mut csv = String::from("iter,loss,responders,decoder,bound\n");
    for r in &log.records {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.iter,
            r.loss,
            r.responders,
            r.decoder,
            r.bound.map(|b| b.to_string()).unwrap_or_default(),
        ));
    }
    let result = TrainResult {
        iterations: log.records.len(),
        final_loss: log.records.last().map(|r| r.loss).unwrap_or(f64::NAN),
        final_weights: log.weights.last().cloned().unwrap_or_default(),
        responders_min: log.records.iter().map(|r| r.responders).min().unwrap_or(0),
        responders_max: log.records.iter().map(|r| r.responders).max().unwrap_or(0),
    };
    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "train".into(),
        mode: None,
        seed,
        timestamp: run_timestamp(original_text),
        config: cfg.clone(),
    };
    let result_text = serde_json::to_string_pretty(&result).expect("result serializes");
    write_atomic(&out_dir.join("train.csv"), &csv)?;
    write_atomic(&out_dir.join("result.json"), &result_text)?;
    write_atomic(
        &out_dir.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(result_text)
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnalyzeKind {
    Lebesgue,
    Condition,
    Bounds,
}

/// Re-encodes an analysis CSV as JSON records keyed by the header row.
pub fn csv_to_json(csv: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let rows: Vec<serde_json::Value> = lines
        .map(|line| {
            let mut obj = serde_json::Map::new();
            for (key, value) in header.iter().zip(line.split(',')) {
                let parsed = value
                    .parse::<f64>()
                    .map(|v| serde_json::json!(v))
                    .unwrap_or_else(|_| serde_json::json!(value));
                obj.insert((*key).to_string(), parsed);
            }
            serde_json::Value::Object(obj)
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("rows serialize")
}

/// Emits one of the analysis sweeps as CSV.
pub fn cmd_analyze(kind: AnalyzeKind, sizes: &[usize], s1: usize, seed: u64) -> String {
    match kind {
        AnalyzeKind::Lebesgue => {
            let mut csv = String::from("n,s1,lambda_estimate,lambda_bound\n");
            for &n in sizes {
                let nodes = deleted_chebyshev(n, s1.min(n.saturating_sub(3)), seed);
                let report = approx::well_spaced_constants(&nodes).expect("enough nodes");
                csv.push_str(&format!(
                    "{n},{},{},{}\n",
                    s1.min(n.saturating_sub(3)),
                    report.lebesgue_estimate,
                    report.lebesgue_bound
                ));
            }
            csv
        }
        AnalyzeKind::Condition => {
            let mut csv = String::from("n,equispaced_cond,chebyshev_cond\n");
            for &n in sizes {
                let equi: Vec<f64> = (1..=n).map(|i| i as f64).collect();
                let cheb = approx::chebyshev_second_kind(n.max(2) - 1);
                let ke = verify::vandermonde_condition(&equi).unwrap_or(f64::INFINITY);
                let kc = verify::vandermonde_condition(&cheb).unwrap_or(f64::INFINITY);
                csv.push_str(&format!("{n},{ke},{kc}\n"));
            }
            csv
        }
        AnalyzeKind::Bounds => {
            let mut csv = String::from("n,s1,lambda_estimate,lambda_bound,emp_error,bound\n");
            for &n in sizes {
                let row = bounds_row(n, s1.min(n.saturating_sub(3)), seed);
                csv.push_str(&row);
            }
            csv
        }
    }
}

fn deleted_chebyshev(n: usize, s1: usize, seed: u64) -> Vec<f64> {
    let mut nodes = approx::chebyshev_second_kind(n.max(2));
    let mut rng = crate::streams::substream(seed, "node-deletion", n as u64);
    for _ in 0..s1 {
        if nodes.len() <= 3 {
            break;
        }
        let idx = rand::Rng::gen_range(&mut rng, 0..nodes.len());
        nodes.remove(idx);
    }
    nodes
}

/// One row of the bound-vs-empirical sweep: a random float-mode instance on
/// `n` workers, `s1` extra stragglers, Berrut decode against the oracle
/// polynomial.
fn bounds_row(n: usize, s1: usize, seed: u64) -> String {
    let mut rng = crate::streams::substream(seed, "bounds-analyze", n as u64);
    let k = rand::Rng::gen_range(&mut rng, 2..=4usize);
    let r = rand::Rng::gen_range(&mut rng, 1..=(n.max(3) - 2).min(4));
    let p = placement::generate_placement(n, k, r, PlacementKind::Uniform, rand::Rng::gen(&mut rng))
        .unwrap_or_else(|_| Placement::full_replication(n, 1).expect("fallback"));
    let m = 2usize;
    let params = SchemeParams { s: 0, a: 0, m, d: 2 * m };
    let grid = EvaluationGrid::<f64>::chebyshev_default(n, m).expect("grid");
    let gradients: Vec<Vec<f64>> = (0..p.n_partitions())
        .map(|_| {
            (0..params.d)
                .map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0))
                .collect()
        })
        .collect();
    let sliced = exact::slice_gradients(&gradients, m);
    let f = exact::universal_poly(&p, &grid, &sliced);
    let shares = exact::encode_all_shares(&p, &grid, &sliced).expect("encode");
    let mut keep: Vec<(f64, Vec<f64>)> = shares
        .iter()
        .map(|s| (s.alpha, s.payload.clone()))
        .collect();
    for _ in 0..s1 {
        if keep.len() <= 2 {
            break;
        }
        let idx = rand::Rng::gen_range(&mut rng, 0..keep.len());
        keep.remove(idx);
    }
    let s1_real = n - keep.len();
    let interp = approx::BerrutInterpolant::new(keep).expect("enough shares");
    let mut emp = 0.0f64;
    let nodes = interp.nodes();
    let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
    for i in 0..=2000 {
        let x = lo + (hi - lo) * i as f64 / 2000.0;
        for (a, b) in interp.eval(x).iter().zip(f.eval(&x).iter()) {
            emp = emp.max((a - b).abs());
        }
    }
    let (n1, n2) = approx::max_norm_derivatives(&f);
    let bound = approx::berrut_error_bound(n, s1_real, n1, n2)
        .map(|r| r.bound)
        .unwrap_or(f64::NAN);
    let quality = approx::well_spaced_constants(interp.nodes()).expect("nodes");
    format!(
        "{n},{s1_real},{},{},{emp},{bound}\n",
        quality.lebesgue_estimate, quality.lebesgue_bound
    )
}

// ---------------------------------------------------------------------------
// witness / selftest
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct WitnessReport {
    applicable: bool,
    replication: usize,
    threshold: usize,
    witness: Option<verify::ConverseWitness>,
}

pub fn cmd_witness(cfg: &Config, seed: u64, json: bool) -> Result<String, CliError> {
    let p = cfg.resolve_placement(seed)?;
    let threshold = 2 * cfg.scheme.a + cfg.scheme.s;
    let report = match verify::converse_witness(&p, cfg.scheme.s, cfg.scheme.a, cfg.scheme.d) {
        Ok(w) => WitnessReport {
            applicable: true,
            replication: p.replication(),
            threshold,
            witness: Some(w),
        },
        Err(verify::VerifyError::NotApplicable { replication, threshold }) => WitnessReport {
            applicable: false,
            replication,
            threshold,
            witness: None,
        },
        Err(e) => return Err(CliError::Config(e.to_string())),
    };
    if json {
        return Ok(serde_json::to_string_pretty(&report).expect("report serializes"));
    }
    Ok(match &report.witness {
        Some(w) => format!(
            "confusion witness: partition {} hidden by stragglers {:?}, adversary sets {:?} / {:?}; stacks identical = {}, aggregates differ = {}",
            w.partition,
            w.stragglers,
            w.adversaries_one,
            w.adversaries_two,
            w.stacks_identical,
            w.aggregate_one != w.aggregate_two,
        ),
        None => format!(
            "not applicable: replication {} exceeds threshold {} — no witness exists in this regime",
            report.replication, report.threshold
        ),
    })
}

pub fn cmd_selftest(cfg: Option<&Config>, seed: u64, json: bool) -> Result<String, CliError> {
    let mut reports = Vec::new();
    match cfg {
        Some(cfg) => {
            let p = cfg.resolve_placement(seed)?;
            reports.push(verify::roundtrip_check(
                &p,
                cfg.scheme.s,
                cfg.scheme.a,
                cfg.scheme.d,
                seed,
                true,
            ));
        }
        None => {
            // Default battery over generated placements.
            for (n, k, r, s, a) in [
                (5usize, 5usize, 3usize, 1usize, 0usize),
                (6, 4, 4, 1, 1),
                (8, 5, 5, 2, 1),
                (7, 3, 7, 2, 2),
            ] {
                let p = placement::generate_placement(n, k, r, PlacementKind::Uniform, seed)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                reports.push(verify::roundtrip_check(&p, s, a, 6, seed, true));
            }
        }
    }
    let cases: usize = reports.iter().map(|r| r.cases_run).sum();
    let failures: usize = reports.iter().map(|r| r.failures.len()).sum();
    if json {
        let out = serde_json::json!({
            "cases_run": cases,
            "failures": failures,
            "reports": reports,
        });
        if failures > 0 {
            eprintln!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
            return Err(CliError::SelftestFailed(failures));
        }
        return Ok(serde_json::to_string_pretty(&out).expect("serializes"));
    }
    if failures > 0 {
        for r in &reports {
            for f in &r.failures {
                eprintln!(
                    "FAIL stragglers={:?} adversaries={:?}: {}",
                    f.stragglers, f.adversaries, f.detail
                );
            }
        }
        return Err(CliError::SelftestFailed(failures));
    }
    Ok(format!("self-test passed: {cases} cases, 0 failures"))
}
