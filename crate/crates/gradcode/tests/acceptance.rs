//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS/FAIL line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines; tolerances are pinned in the assertions.

use std::collections::BTreeSet;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use gradcode::approx::{
    berrut_error_bound, chebyshev_second_kind, max_norm_derivatives, well_spaced_constants,
    BerrutInterpolant,
};
use gradcode::exact::{self, encode_all_shares, slice_gradients, EvaluationGrid, SchemeParams};
use gradcode::matrix::{
    self, eval_matrix_poly, matrix_feasible, MatrixPoly, MatrixShare, SquareMat,
};
use gradcode::placement::{generate_placement, optimal_cost, CostQuery, Placement, PlacementKind};
use gradcode::scalar::{parse_rat, Arithmetic, Rat, Scalar};
use gradcode::simulator::{
    centralized_gd, synthetic_regression, train_gd, CorruptionStrategy, Cutoff, DecodeMode,
    LatencyModel, TrainConfig, WorkerProfile,
};
use gradcode::verify::{self, converse_search, converse_witness, roundtrip_check};
use rand::seq::SliceRandom;
use rand::Rng;

fn criterion(number: usize, name: &str, budget: Duration, body: impl FnOnce() -> Result<(), String>) {
    let start = Instant::now();
    match body() {
        Ok(()) => {
            let elapsed = start.elapsed();
            println!(
                "criterion {number} ({name}): PASS [{:.2}s]",
                elapsed.as_secs_f64()
            );
            assert!(
                elapsed <= budget,
                "criterion {number} exceeded its {budget:?} runtime budget: {elapsed:?}"
            );
        }
        Err(msg) => {
            println!("criterion {number} ({name}): FAIL - {msg}");
            panic!("criterion {number} ({name}) failed: {msg}");
        }
    }
}

fn ensure(cond: bool, msg: impl Fn() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// 1. Worked-example golden vectors
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_golden_share_vectors() {
    criterion(1, "golden share vectors", Duration::from_secs(1), || {
        let p = Placement::five_worker_example();
        let grid = EvaluationGrid::integer_default(5, 2).map_err(|e| e.to_string())?;
        // Published coefficient of g_k[l] in each worker's share; everything
        // not listed must be exactly zero.
        let table: &[(usize, usize, usize, &str)] = &[
            (1, 1, 1, "3/2"),
            (1, 2, 1, "16/15"),
            (1, 3, 1, "16/15"),
            (1, 4, 1, "2/3"),
            (1, 5, 1, "2/3"),
            (1, 1, 2, "-3/5"),
            (1, 2, 2, "-1/3"),
            (1, 3, 2, "-1/3"),
            (1, 4, 2, "-1/6"),
            (1, 5, 2, "-1/6"),
            (2, 1, 1, "3/2"),
            (2, 2, 1, "3/5"),
            (2, 3, 1, "3/5"),
            (2, 1, 2, "-4/5"),
            (2, 2, 2, "-1/4"),
            (2, 3, 2, "-1/4"),
            (3, 1, 1, "1"),
            (3, 1, 2, "-3/5"),
            (4, 2, 1, "-1/3"),
            (4, 3, 1, "-1/3"),
            (4, 4, 1, "5/3"),
            (4, 5, 1, "5/3"),
            (4, 2, 2, "1/6"),
            (4, 3, 2, "1/6"),
            (4, 4, 2, "-2/3"),
            (4, 5, 2, "-2/3"),
            (5, 1, 1, "-3/2"),
            (5, 4, 1, "6"),
            (5, 5, 1, "6"),
            (5, 1, 2, "1"),
            (5, 4, 2, "-5/2"),
            (5, 5, 2, "-5/2"),
        ];
        let expected = |n: usize, k: usize, l: usize| -> Rat {
            table
                .iter()
                .find(|&&(tn, tk, tl, _)| (tn, tk, tl) == (n, k, l))
                .map(|&(_, _, _, v)| parse_rat(v).expect("table literal"))
                .unwrap_or_else(|| Rat::from_int(0))
        };
        for n in 1..=5 {
            for k in 1..=5 {
                for l in 1..=2 {
                    // Route 1: the closed-form coefficient.
                    let direct = exact::share_coefficient(&p, &grid, n, k, l);
                    // Route 2: encode an indicator gradient and read it off.
                    let mut gradients = vec![vec![Rat::from_int(0); 2]; 5];
                    gradients[k - 1][l - 1] = Rat::from_int(1);
                    let sliced = slice_gradients(&gradients, 2);
                    let share = exact::encode_share(&p, &grid, &sliced.restrict_to(&p, n))
                        .map_err(|e| e.to_string())?;
                    let want = expected(n, k, l);
                    ensure(direct == want, || {
                        format!("coefficient ({n},{k},{l}): got {direct}, want {want}")
                    })?;
                    ensure(share.payload[0] == want, || {
                        format!("encoded ({n},{k},{l}): got {}, want {want}", share.payload[0])
                    })?;
                }
            }
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// 2. Optimal cost formula
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_optimal_cost() {
    criterion(2, "optimal cost", Duration::from_secs(1), || {
        let p = Placement::five_worker_example();
        for d in [2usize, 10, 24] {
            let report = optimal_cost(&p, &CostQuery::new(1, 0, d)).map_err(|e| e.to_string())?;
            let want = Rat::new((d as i64).into(), 2.into());
            ensure(report.cost == want, || {
                format!("five-worker cost for d={d}: got {}, want {want}", report.cost)
            })?;
        }
        for r in 1..=10usize {
            let p = Placement::full_replication(r, 3).map_err(|e| e.to_string())?;
            for s in 1..=10usize {
                for a in 1..=10usize {
                    if r <= 2 * a + s {
                        ensure(
                            optimal_cost(&p, &CostQuery::new(s, a, 7)).is_err(),
                            || format!("(r,s,a)=({r},{s},{a}) should be infeasible"),
                        )?;
                        continue;
                    }
                    for d in [7usize, 12] {
                        let report = optimal_cost(&p, &CostQuery::new(s, a, d))
                            .map_err(|e| e.to_string())?;
                        let m = r - 2 * a - s;
                        let want = Rat::new((d as i64).into(), (m as i64).into());
                        ensure(report.cost == want && report.m == m, || {
                            format!("(r,s,a,d)=({r},{s},{a},{d}): got {}", report.cost)
                        })?;
                        ensure(report.per_share_len == d.div_ceil(m), || {
                            format!("share length mismatch at (r,s,a,d)=({r},{s},{a},{d})")
                        })?;
                    }
                }
            }
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// 3 + 4. Round-trip exactness and adversary identification
// ---------------------------------------------------------------------------

struct RoundtripSummary {
    configs: usize,
    exhaustive_configs: usize,
    cases: usize,
    decode_failures: Vec<String>,
    flag_failures: Vec<String>,
    float_max_rel_err: f64,
}

fn roundtrip_summary() -> &'static RoundtripSummary {
    static SUMMARY: OnceLock<RoundtripSummary> = OnceLock::new();
    SUMMARY.get_or_init(|| {
        let mut rng = gradcode::streams::substream(20240, "acceptance-roundtrip", 0);
        let mut summary = RoundtripSummary {
            configs: 0,
            exhaustive_configs: 0,
            cases: 0,
            decode_failures: Vec::new(),
            flag_failures: Vec::new(),
            float_max_rel_err: 0.0,
        };
        while summary.configs < 200 {
            let n = rng.gen_range(2..=12usize);
            let k = rng.gen_range(1..=10usize);
            let r_target = rng.gen_range(1..=n);
            let Ok(p) = generate_placement(n, k, r_target, PlacementKind::Skewed, rng.gen())
            else {
                continue;
            };
            let r = p.replication();
            // Feasible budget: 2a + s < r, s <= 3, a <= 2.
            let feasible: Vec<(usize, usize)> = (0..=3usize)
                .flat_map(|s| (0..=2usize).map(move |a| (s, a)))
                .filter(|&(s, a)| 2 * a + s < r && s + a < n)
                .collect();
            let Some(&(s, a)) = feasible.as_slice().choose(&mut rng) else {
                continue;
            };
            // Exhaustive enumeration runs on every small cluster; the payload
            // dimension is drawn smaller there to hold the runtime budget.
            let exhaustive = n <= 8;
            let d = if exhaustive {
                rng.gen_range(2..=10usize)
            } else {
                rng.gen_range(2..=24usize)
            };
            summary.configs += 1;
            if exhaustive {
                summary.exhaustive_configs += 1;
            }
            let report = roundtrip_check(&p, s, a, d, rng.gen(), exhaustive);
            summary.cases += report.cases_run;
            for f in &report.failures {
                let line = format!(
                    "N={n} K={k} r={r} s={s} a={a} d={d} stragglers={:?} adversaries={:?}: {}",
                    f.stragglers, f.adversaries, f.detail
                );
                if f.detail.contains("flagged") {
                    summary.flag_failures.push(line);
                } else {
                    summary.decode_failures.push(line);
                }
            }
        }

        // Float64 side: no adversaries, random straggler subsets, relative
        // error within 1e-8.
        for _ in 0..40 {
            let n = rng.gen_range(2..=12usize);
            let k = rng.gen_range(1..=6usize);
            let r_target = rng.gen_range(1..=n);
            let Ok(p) = generate_placement(n, k, r_target, PlacementKind::Uniform, rng.gen())
            else {
                continue;
            };
            let r = p.replication();
            let s = rng.gen_range(0..r.min(4));
            let d = rng.gen_range(2..=24usize);
            let Ok(params) = SchemeParams::optimal(&p, s, 0, d) else {
                continue;
            };
            let grid = EvaluationGrid::<f64>::chebyshev_default(n, params.m).expect("grid");
            let gradients: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let sliced = slice_gradients(&gradients, params.m);
            let shares = encode_all_shares(&p, &grid, &sliced).expect("encode");
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let keep: Vec<(f64, Vec<f64>)> = order[s..]
                .iter()
                .map(|&i| (shares[i].alpha, shares[i].payload.clone()))
                .collect();
            let f = exact::interpolate_exact(&keep, params.poly_degree(&p)).expect("interpolate");
            let agg = exact::recover_aggregate(&f, &grid, d);
            let oracle = verify::oracle_aggregate(&gradients).expect("oracle");
            for (got, want) in agg.iter().zip(oracle.iter()) {
                let rel = (got - want).abs() / want.abs().max(1.0);
                summary.float_max_rel_err = summary.float_max_rel_err.max(rel);
            }
        }
        summary
    })
}

#[test]
fn criterion_3_roundtrip_exactness() {
    criterion(3, "round-trip exactness", Duration::from_secs(120), || {
        let summary = roundtrip_summary();
        ensure(summary.configs == 200, || {
            format!("expected 200 configs, ran {}", summary.configs)
        })?;
        ensure(summary.exhaustive_configs >= 50, || {
            format!(
                "too few exhaustive small-cluster configs: {}",
                summary.exhaustive_configs
            )
        })?;
        ensure(summary.decode_failures.is_empty(), || {
            format!(
                "{} decode failures, first: {}",
                summary.decode_failures.len(),
                summary.decode_failures[0]
            )
        })?;
        ensure(summary.float_max_rel_err <= 1e-8, || {
            format!("float relative error {}", summary.float_max_rel_err)
        })?;
        Ok(())
    });
}

#[test]
fn criterion_4_adversary_identification() {
    criterion(4, "adversary identification", Duration::from_secs(120), || {
        let summary = roundtrip_summary();
        ensure(summary.cases > 5_000, || {
            format!("exhaustive battery too small: {} cases", summary.cases)
        })?;
        ensure(summary.flag_failures.is_empty(), || {
            format!(
                "{} flagging violations, first: {}",
                summary.flag_failures.len(),
                summary.flag_failures[0]
            )
        })?;
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// 5. Matrix polynomial scheme
// ---------------------------------------------------------------------------

fn subsets_up_to(items: &[usize], max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for size in 1..=max.min(items.len()) {
        fn rec(items: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == size {
                out.push(cur.clone());
                return;
            }
            for i in start..items.len() {
                cur.push(items[i]);
                rec(items, size, i + 1, cur, out);
                cur.pop();
            }
        }
        rec(items, size, 0, &mut Vec::new(), &mut out);
    }
    out
}

#[test]
fn criterion_5_matrix_scheme() {
    criterion(5, "matrix polynomial scheme", Duration::from_secs(60), || {
        let mut rng = gradcode::streams::substream(515, "acceptance-matrix", 0);
        let deg_h = 2usize;
        for (n, s, a, d) in [
            (5usize, 1usize, 0usize, 3usize),
            (6, 1, 1, 4),
            (7, 0, 2, 2),
            (8, 2, 1, 6),
            (8, 3, 0, 5),
        ] {
            let r_min = matrix_feasible(n, s, a, deg_h).map_err(|e| e.to_string())?;
            let k = rng.gen_range(2..=3usize);
            let p = generate_placement(n, k, r_min, PlacementKind::Uniform, rng.gen())
                .map_err(|e| e.to_string())?;
            matrix::placement_supports(&p, s, a, deg_h).map_err(|e| e.to_string())?;

            // Random rational quadratic with nonzero leading coefficient.
            let coeffs: Vec<Rat> = (0..=deg_h)
                .map(|j| {
                    let numer = if j == deg_h {
                        *[-3i64, -1, 1, 2, 3].choose(&mut rng).unwrap()
                    } else {
                        rng.gen_range(-4i64..=4)
                    };
                    Rat::new(numer.into(), rng.gen_range(1i64..=3).into())
                })
                .collect();
            let h = MatrixPoly::new(coeffs).map_err(|e| e.to_string())?;
            let matrices: Vec<SquareMat<Rat>> = (0..k)
                .map(|_| {
                    SquareMat::from_flat(
                        d,
                        (0..d * d)
                            .map(|_| Rat::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=4).into()))
                            .collect(),
                    )
                    .expect("square")
                })
                .collect();
            let alphas: Vec<Rat> = (1..=n as i64).map(Rat::from_int).collect();
            let beta = Rat::from_int(0);
            let shares = matrix::matrix_encode_all(&p, &alphas, &beta, &h, &matrices)
                .map_err(|e| e.to_string())?;
            let mut total = SquareMat::zeros(d);
            for g in &matrices {
                total = total.add(g);
            }
            let expect = eval_matrix_poly(&h, &total);
            let degree = (n - p.replication()) * deg_h;

            let workers: Vec<usize> = (1..=n).collect();
            for straggler_set in subsets_up_to(&workers, s) {
                let stragglers: BTreeSet<usize> = straggler_set.iter().copied().collect();
                let rest: Vec<usize> = workers
                    .iter()
                    .copied()
                    .filter(|w| !stragglers.contains(w))
                    .collect();
                for adversary_set in subsets_up_to(&rest, a) {
                    let adversaries: BTreeSet<usize> = adversary_set.iter().copied().collect();
                    let delivered: Vec<MatrixShare<Rat>> = rest
                        .iter()
                        .map(|&w| {
                            let mut share = shares[w - 1].clone();
                            if adversaries.contains(&w) {
                                share.payload = share.payload.scale(&Rat::from_int(-2));
                            }
                            share
                        })
                        .collect();
                    let (hf, flagged) = matrix::matrix_decode(&delivered, a, degree)
                        .map_err(|e| format!("N={n} s={s} a={a}: {e}"))?;
                    let got = matrix::matrix_recover(&hf, &beta);
                    ensure(got == expect, || {
                        format!(
                            "N={n} stragglers={stragglers:?} adversaries={adversaries:?}: matrix mismatch"
                        )
                    })?;
                    ensure(flagged.is_subset(&adversaries), || {
                        format!("flagged honest workers {flagged:?} vs {adversaries:?}")
                    })?;
                }
            }
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// 6. Berrut bound soundness
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_berrut_bound_soundness() {
    criterion(6, "rational-decoder error bound", Duration::from_secs(60), || {
        let mut rng = gradcode::streams::substream(606, "acceptance-bounds", 0);
        let mut checked = 0usize;
        while checked < 50 {
            let n = rng.gen_range(8..=64usize);
            let k = rng.gen_range(1..=4usize);
            // Under-replicated regime: keeps the interpolated polynomial at
            // degree >= 2, where the smoothness bound is informative.
            let r_target = rng.gen_range(1..=(n - 2).min(6));
            let Ok(p) = generate_placement(n, k, r_target, PlacementKind::Uniform, rng.gen())
            else {
                continue;
            };
            let m = rng.gen_range(1..=3usize);
            let d = m * rng.gen_range(1..=3usize);
            let params = SchemeParams { s: 0, a: 0, m, d };
            let grid = EvaluationGrid::<f64>::chebyshev_default(n, m).expect("grid");
            let gradients: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let sliced = slice_gradients(&gradients, params.m);
            let f = exact::universal_poly(&p, &grid, &sliced);
            let shares = encode_all_shares(&p, &grid, &sliced).expect("encode");

            let s1 = rng.gen_range(0..=(n - 3).min(n / 2));
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let keep: Vec<(f64, Vec<f64>)> = order[s1..]
                .iter()
                .map(|&i| (shares[i].alpha, shares[i].payload.clone()))
                .collect();
            let interp = BerrutInterpolant::new(keep).expect("at least two shares");

            let (n1, n2) = max_norm_derivatives(&f);
            let bound = berrut_error_bound(n, s1, n1, n2)
                .map_err(|e| e.to_string())?
                .bound;
            let nodes = interp.nodes();
            let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
            let mut emp: f64 = 0.0;
            for i in 0..=2000 {
                let x = lo + (hi - lo) * i as f64 / 2000.0;
                for (a, b) in interp.eval(x).iter().zip(f.eval(&x).iter()) {
                    emp = emp.max((a - b).abs());
                }
            }
            ensure(emp <= bound, || {
                format!("N={n} s1={s1} deg={}: empirical {emp} above bound {bound}", f.degree())
            })?;
            checked += 1;
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// 7. Lebesgue growth bound
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_lebesgue_growth() {
    criterion(7, "Lebesgue growth bound", Duration::from_secs(60), || {
        let mut rng = gradcode::streams::substream(707, "acceptance-lebesgue", 0);
        for n in [8usize, 16, 32, 64] {
            let full = chebyshev_second_kind(n);
            for deletions in [0usize, 1, 2, 3] {
                for _ in 0..3 {
                    let mut nodes = full.clone();
                    for _ in 0..deletions {
                        let idx = rng.gen_range(0..nodes.len());
                        nodes.remove(idx);
                    }
                    let report = well_spaced_constants(&nodes).map_err(|e| e.to_string())?;
                    ensure(report.lebesgue_estimate <= report.lebesgue_bound, || {
                        format!(
                            "n={n} deletions={deletions}: estimate {} above bound {} (rho={}, nu={})",
                            report.lebesgue_estimate, report.lebesgue_bound, report.rho, report.nu
                        )
                    })?;
                }
            }
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// 8. Converse witness
// ---------------------------------------------------------------------------

fn nonempty_subsets(n: usize) -> Vec<BTreeSet<usize>> {
    (1..(1u32 << n))
        .map(|mask| {
            (1..=n)
                .filter(|&w| mask & (1 << (w - 1)) != 0)
                .collect::<BTreeSet<usize>>()
        })
        .collect()
}

fn placements_by_assignment(n: usize, k: usize) -> Vec<Placement> {
    // Enumerate over assignment sets (one nonempty worker subset per
    // partition); keep those where every worker holds something.
    let choices = nonempty_subsets(n);
    let mut out = Vec::new();
    let mut stack = vec![0usize; k];
    loop {
        let assignment: Vec<&BTreeSet<usize>> = stack.iter().map(|&i| &choices[i]).collect();
        let mut gamma = vec![BTreeSet::new(); n];
        for (kk, workers) in assignment.iter().enumerate() {
            for &w in workers.iter() {
                gamma[w - 1].insert(kk + 1);
            }
        }
        if gamma.iter().all(|g| !g.is_empty()) {
            out.push(Placement::new(n, k, gamma).expect("valid by construction"));
        }
        // Next combination.
        let mut pos = 0;
        loop {
            stack[pos] += 1;
            if stack[pos] < choices.len() {
                break;
            }
            stack[pos] = 0;
            pos += 1;
            if pos == k {
                return out;
            }
        }
    }
}

#[test]
fn criterion_8_converse_witness() {
    criterion(8, "converse witness", Duration::from_secs(120), || {
        let mut at_threshold = 0usize;
        let mut above_threshold = 0usize;
        for n in 2..=5usize {
            let k_max = if n == 5 { 2 } else { 3 };
            for k in 1..=k_max {
                for p in placements_by_assignment(n, k) {
                    let r = p.replication();
                    for s in 0..=3usize.min(n - 1) {
                        for a in 0..=2usize {
                            if s + a >= n {
                                continue;
                            }
                            if 2 * a + s == r {
                                let w = converse_witness(&p, s, a, 2)
                                    .map_err(|e| format!("missing witness at r={r} s={s} a={a}: {e}"))?;
                                ensure(w.stacks_identical, || {
                                    format!("stacks differ at r={r} s={s} a={a}")
                                })?;
                                ensure(w.aggregate_one != w.aggregate_two, || {
                                    format!("aggregates agree at r={r} s={s} a={a}")
                                })?;
                                at_threshold += 1;
                            } else if 2 * a + s < r {
                                ensure(converse_search(&p, s, a, 2).is_none(), || {
                                    format!("spurious witness at r={r} s={s} a={a}")
                                })?;
                                above_threshold += 1;
                            }
                        }
                    }
                }
            }
        }
        ensure(at_threshold > 100 && above_threshold > 100, || {
            format!("enumeration too small: {at_threshold} / {above_threshold}")
        })?;
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// 9. End-to-end training
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_end_to_end_training() {
    criterion(9, "end-to-end training", Duration::from_secs(120), || {
        // Exact rational: trajectory is bit-identical to centralized descent
        // under stragglers and an adversary, with latencies resampled every
        // round.
        let p = generate_placement(6, 3, 5, PlacementKind::Uniform, 909).unwrap();
        let params = SchemeParams::optimal(&p, 1, 1, 6).map_err(|e| e.to_string())?;
        let cfg = TrainConfig {
            dataset: synthetic_regression(24, 6, 0.125, 99),
            k_partitions: 3,
            eta: 0.0625,
            iterations: 15,
            mode: DecodeMode::Exact,
            cutoff: None,
        };
        let mut profiles: Vec<WorkerProfile> = (1..=6)
            .map(|w| {
                WorkerProfile::honest(LatencyModel::ShiftedExponential {
                    shift: 0.05 * w as f64,
                    rate: 1.5,
                })
            })
            .collect();
        profiles[3].adversarial = true;
        let (central, _) = centralized_gd::<Rat>(&cfg).map_err(|e| e.to_string())?;
        for seed in [1u64, 2, 3] {
            let log = train_gd(
                &cfg,
                &p,
                &params,
                Arithmetic::Rational,
                &profiles,
                &CorruptionStrategy::GaussianNoise { sigma: 3.0 },
                seed,
            )
            .map_err(|e| e.to_string())?;
            ensure(log.weights_rational.as_ref() == Some(&central), || {
                format!("rational trajectory diverged from centralized at seed {seed}")
            })?;
        }

        // Exact float: within 1e-10 of centralized over 100 iterations.
        let p = Placement::five_worker_example();
        let params = SchemeParams::optimal(&p, 1, 0, 4).map_err(|e| e.to_string())?;
        let cfg = TrainConfig {
            dataset: synthetic_regression(20, 4, 0.125, 7),
            k_partitions: 5,
            eta: 0.05,
            iterations: 100,
            mode: DecodeMode::Exact,
            cutoff: None,
        };
        let profiles: Vec<WorkerProfile> = (1..=5)
            .map(|w| {
                WorkerProfile::honest(LatencyModel::ShiftedExponential {
                    shift: 0.1 * w as f64,
                    rate: 2.0,
                })
            })
            .collect();
        let (central, _) = centralized_gd::<f64>(&cfg).map_err(|e| e.to_string())?;
        let log = train_gd(
            &cfg,
            &p,
            &params,
            Arithmetic::Float64,
            &profiles,
            &CorruptionStrategy::SignFlipScale { c: -2.0 },
            5,
        )
        .map_err(|e| e.to_string())?;
        for (it, (got, want)) in log.weights.iter().zip(central.iter()).enumerate() {
            for (a, b) in got.iter().zip(want.iter()) {
                ensure((a - b).abs() <= 1e-10, || {
                    format!("float trajectory off at iteration {it}: |{a} - {b}|")
                })?;
            }
        }

        // Approximate decoding with two extra stragglers realized every
        // round: per seed the straggler pattern is fixed (drawn from the
        // seed) while the dataset varies; the seed-averaged loss must never
        // increase over any 20-iteration window and the mean final loss must
        // land within 1.1x of centralized descent. The placement keeps each
        // partition off one edge-node worker only, so the coded polynomial
        // stays at the data scale and rational decoding is accurate for any
        // responder subset.
        let n = 24usize;
        let gamma: Vec<std::collections::BTreeSet<usize>> = (1..=n)
            .map(|w| (1..=5usize).filter(|&kk| kk != w).collect())
            .collect();
        let p = Placement::new(n, 5, gamma).map_err(|e| e.to_string())?;
        let params = SchemeParams::with_m(&p, 1, 0, 8, 2).map_err(|e| e.to_string())?;
        let iterations = 200;
        let seeds = 10u64;
        let mut mean_losses = vec![0.0f64; iterations];
        let mut mean_final = 0.0f64;
        let mut mean_central_final = 0.0f64;
        for seed in 0..seeds {
            let cfg = TrainConfig {
                dataset: synthetic_regression(40, 8, 0.25, 1000 + seed),
                k_partitions: 5,
                eta: 0.02,
                iterations,
                mode: DecodeMode::Approx,
                cutoff: Some(Cutoff::Count(n - 3)),
            };
            let mut order: Vec<usize> = (1..=n).collect();
            order.shuffle(&mut gradcode::streams::substream(seed, "acceptance-latency", 0));
            let profiles: Vec<WorkerProfile> = (1..=n)
                .map(|w| {
                    let rank = order.iter().position(|&x| x == w).unwrap();
                    WorkerProfile::honest(LatencyModel::Deterministic {
                        t: 0.1 * (rank + 1) as f64,
                    })
                })
                .collect();
            let log = train_gd(
                &cfg,
                &p,
                &params,
                Arithmetic::Float64,
                &profiles,
                &CorruptionStrategy::SignFlipScale { c: -2.0 },
                seed,
            )
            .map_err(|e| e.to_string())?;
            ensure(log.records.iter().all(|r| r.responders == n - 3), || {
                "cutoff did not realize s + 2 stragglers".to_string()
            })?;
            for (acc, r) in mean_losses.iter_mut().zip(log.records.iter()) {
                *acc += r.loss / seeds as f64;
            }
            mean_final += log.records.last().unwrap().loss / seeds as f64;
            let (_, central_losses) = centralized_gd::<f64>(&cfg).map_err(|e| e.to_string())?;
            mean_central_final += central_losses.last().unwrap() / seeds as f64;
        }
        for t in 0..mean_losses.len().saturating_sub(20) {
            ensure(mean_losses[t + 20] <= mean_losses[t], || {
                format!(
                    "mean loss increased over window [{t}, {}]: {} -> {}",
                    t + 20,
                    mean_losses[t],
                    mean_losses[t + 20]
                )
            })?;
        }
        ensure(mean_final <= 1.1 * mean_central_final, || {
            format!("approx final loss {mean_final} vs centralized {mean_central_final}")
        })?;
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// 10. Manifest replay determinism
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_replay_determinism() {
    criterion(10, "manifest replay determinism", Duration::from_secs(60), || {
        use gradcode::cli::{cmd_run, cmd_train, Config, RunMode};
        let config_text = r#"{
          "placement": {"n_workers":5,"n_partitions":5,
            "gamma":[[1,2,3,4,5],[1,2,3],[1],[2,3,4,5],[1,4,5]]},
          "scheme": {"s":1,"a":0,"d":4,"arithmetic":"rational"},
          "workers": [
            {"latency":{"kind":"shifted_exponential","shift":0.1,"rate":1.0}},
            {"latency":{"kind":"shifted_exponential","shift":0.2,"rate":1.0}},
            {"latency":{"kind":"deterministic","t":0.5}},
            {"latency":{"kind":"deterministic","t":0.7}},
            {"latency":{"kind":"deterministic","t":0.9}}
          ],
          "train": {"synthetic":{"n_samples":20,"n_features":4,"noise":0.125},
                    "k_partitions":5,"eta":0.05,"iterations":8,"mode":"exact"}
        }"#;
        let cfg = Config::from_json(config_text).map_err(|e| e.to_string())?;

        fn compare_replay(
            label: &str,
            dir1: &std::path::Path,
            dir2: &std::path::Path,
        ) -> Result<(), String> {
            let mut names: Vec<String> = std::fs::read_dir(dir1)
                .map_err(|e| e.to_string())?
                .map(|entry| entry.unwrap().file_name().into_string().unwrap())
                .collect();
            names.sort();
            ensure(names.len() == 3, || format!("{label}: expected 3 output files"))?;
            for name in &names {
                let a = std::fs::read(dir1.join(name)).map_err(|e| e.to_string())?;
                let b = std::fs::read(dir2.join(name)).map_err(|e| e.to_string())?;
                ensure(a == b, || format!("{label}: {name} differs under replay"))?;
            }
            Ok(())
        }

        // Round run.
        let dir1 = tempfile::tempdir().map_err(|e| e.to_string())?;
        cmd_run(&cfg, 17, RunMode::Exact, dir1.path(), None).map_err(|e| e.to_string())?;
        let manifest_text = std::fs::read_to_string(dir1.path().join("manifest.json"))
            .map_err(|e| e.to_string())?;
        let replay_cfg = Config::from_json(&manifest_text).map_err(|e| e.to_string())?;
        let dir2 = tempfile::tempdir().map_err(|e| e.to_string())?;
        cmd_run(&replay_cfg, 17, RunMode::Exact, dir2.path(), Some(&manifest_text))
            .map_err(|e| e.to_string())?;
        compare_replay("run", dir1.path(), dir2.path())?;

        // Training run.
        let dir1 = tempfile::tempdir().map_err(|e| e.to_string())?;
        cmd_train(&cfg, 17, dir1.path(), None).map_err(|e| e.to_string())?;
        let manifest_text = std::fs::read_to_string(dir1.path().join("manifest.json"))
            .map_err(|e| e.to_string())?;
        let replay_cfg = Config::from_json(&manifest_text).map_err(|e| e.to_string())?;
        let dir2 = tempfile::tempdir().map_err(|e| e.to_string())?;
        cmd_train(&replay_cfg, 17, dir2.path(), Some(&manifest_text))
            .map_err(|e| e.to_string())?;
        compare_replay("train", dir1.path(), dir2.path())?;
        Ok(())
    });
}

