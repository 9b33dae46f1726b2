//! Acceptance suite. Each test exercises one numbered criterion against an
//! independently implemented oracle or a pinned behavioral bound and prints
//! a single PASS/FAIL line.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use survsr::baselines;
use survsr::coxcore;
use survsr::data::{self, SplitSpec};
use survsr::evolve::{self, EvolutionConfig};
use survsr::metrics::{self, EvalSplit, FrontPoint, HvConfig, ParetoFront};
use survsr::runner;
use survsr::synth::{self, Generator, SynthSpec};

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn random_censored_sample(
    rng: &mut ChaCha8Rng,
    n: usize,
) -> (Vec<f64>, Vec<bool>) {
    let times: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0f64)).collect();
    let events: Vec<bool> = (0..n).map(|_| rng.random_bool(0.7)).collect();
    (times, events)
}

// --------------------------------------------------------------------------
// oracle implementations (deliberately independent of the library code)
// --------------------------------------------------------------------------

/// Product-limit curve as explicit (time, value) steps; factors multiplied
/// in ascending time order.
fn oracle_km_censoring(times: &[f64], events: &[bool]) -> Vec<(f64, f64)> {
    let mut idx: Vec<usize> = (0..times.len()).collect();
    idx.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let mut steps = Vec::new();
    let mut surv = 1.0f64;
    let mut at_risk = times.len() as f64;
    let mut i = 0;
    while i < idx.len() {
        let t = times[idx[i]];
        let mut censored_here = 0usize;
        let mut group = 0usize;
        while i + group < idx.len() && times[idx[i + group]] == t {
            if !events[idx[i + group]] {
                censored_here += 1;
            }
            group += 1;
        }
        if censored_here > 0 {
            surv *= 1.0 - censored_here as f64 / at_risk;
            steps.push((t, surv));
        }
        at_risk -= group as f64;
        i += group;
    }
    steps
}

fn oracle_step_eval(steps: &[(f64, f64)], t: f64) -> f64 {
    let mut v = 1.0;
    for &(bt, bv) in steps {
        if bt <= t {
            v = bv;
        } else {
            break;
        }
    }
    v
}

/// Brute-force O(n^2) IPCW concordance with the same tie and weight
/// conventions: comparable pairs have delta_i=1, t_i < t_j, t_i <= tau;
/// weight G(t_i-)^-2; prediction ties count half.
fn oracle_concordance(
    train_times: &[f64],
    train_events: &[bool],
    test_times: &[f64],
    test_events: &[bool],
    eta: &[f64],
) -> f64 {
    let g = oracle_km_censoring(train_times, train_events);
    let tau = train_times
        .iter()
        .zip(train_events)
        .filter(|(_, &e)| e)
        .map(|(&t, _)| t)
        .fold(f64::NEG_INFINITY, f64::max);
    let tau = if tau.is_finite() { tau } else { f64::INFINITY };
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..test_times.len() {
        if !test_events[i] || test_times[i] > tau {
            continue;
        }
        let gi = oracle_step_eval(&g, test_times[i] - 1e-12);
        if !(gi > 0.0) {
            continue;
        }
        let w = 1.0 / (gi * gi);
        for j in 0..test_times.len() {
            if test_times[j] > test_times[i] {
                den += w;
                if eta[i] > eta[j] {
                    num += w;
                } else if eta[i] == eta[j] {
                    num += 0.5 * w;
                }
            }
        }
    }
    if den == 0.0 {
        0.5
    } else {
        num / den
    }
}

#[test]
fn criterion_1_concordance_oracle_equivalence() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let mut max_diff = 0.0f64;
    for _ in 0..200 {
        let n_train = rng.random_range(10..=100);
        let n_test = rng.random_range(10..=100);
        let (train_times, train_events) = random_censored_sample(&mut rng, n_train);
        let (test_times, test_events) = random_censored_sample(&mut rng, n_test);
        let eta: Vec<f64> = (0..n_test).map(|_| rng.random_range(-2.0..2.0f64)).collect();
        let lib = coxcore::concordance_ipcw(
            &train_times,
            &train_events,
            &test_times,
            &test_events,
            &eta,
            None,
        )
        .value;
        let oracle = oracle_concordance(&train_times, &train_events, &test_times, &test_events, &eta);
        max_diff = max_diff.max((lib - oracle).abs());
        if lib != oracle {
            break;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        max_diff == 0.0 && elapsed < 10.0,
        &format!("200 instances, max |lib - oracle| = {max_diff:e}, {elapsed:.2} s"),
    );
}

#[test]
fn criterion_2_partial_likelihood_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(5..=50);
        let p = rng.random_range(1..=5);
        let z = Array2::from_shape_fn((n, p), |_| rng.random_range(-1.5..1.5f64));
        let (times, mut events) = random_censored_sample(&mut rng, n);
        if !events.iter().any(|&e| e) {
            events[0] = true;
        }
        let theta = Array1::from_shape_fn(p, |_| rng.random_range(-1.0..1.0f64));
        let (_, grad) =
            coxcore::neg_log_partial_likelihood_with_gradient(&theta, &z, &times, &events)
                .unwrap();
        let h = 1e-5;
        for k in 0..p {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[k] += h;
            tm[k] -= h;
            let fp = coxcore::neg_log_partial_likelihood(&tp, &z, &times, &events).unwrap();
            let fm = coxcore::neg_log_partial_likelihood(&tm, &z, &times, &events).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            let rel = (fd - grad[k]).abs() / grad[k].abs().max(1.0);
            worst = worst.max(rel);
        }
    }
    report(
        2,
        worst < 1e-6,
        &format!("100 instances, worst relative gradient error = {worst:e}"),
    );
}

fn penalized_objective(
    theta: &Array1<f64>,
    z: &Array2<f64>,
    times: &[f64],
    events: &[bool],
    lambda: f64,
    l1_ratio: f64,
) -> f64 {
    let nll = coxcore::neg_log_partial_likelihood(theta, z, times, events).unwrap();
    let l1: f64 = theta.iter().map(|t| t.abs()).sum();
    let l2: f64 = theta.iter().map(|t| t * t).sum();
    nll + lambda * (l1_ratio * l1 + 0.5 * (1.0 - l1_ratio) * l2)
}

/// Grid search refined in stages down to resolution 2e-4 on [-5,5]^2.
fn grid_search_2d(
    z: &Array2<f64>,
    times: &[f64],
    events: &[bool],
    lambda: f64,
    l1_ratio: f64,
) -> (f64, f64) {
    let mut center = (0.0f64, 0.0f64);
    let mut half = 5.0f64;
    let mut step = 0.1f64;
    loop {
        let mut best = (f64::INFINITY, center);
        let steps = (2.0 * half / step).round() as i64;
        for a in 0..=steps {
            for b in 0..=steps {
                let t0 = center.0 - half + a as f64 * step;
                let t1 = center.1 - half + b as f64 * step;
                let theta = ndarray::array![t0, t1];
                let obj = penalized_objective(&theta, z, times, events, lambda, l1_ratio);
                if obj < best.0 {
                    best = (obj, (t0, t1));
                }
            }
        }
        center = best.1;
        if step <= 2e-4 {
            return center;
        }
        half = step * 2.0;
        step = (step / 20.0).max(2e-4);
    }
}

#[test]
fn criterion_3_solver_matches_grid_oracle() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let mut worst = 0.0f64;
    for trial in 0..5 {
        let n = 80;
        let z = Array2::from_shape_fn((n, 2), |_| rng.random_range(-1.5..1.5f64));
        let beta = [rng.random_range(-1.5..1.5f64), rng.random_range(-1.5..1.5f64)];
        let mut times = Vec::new();
        let mut events = Vec::new();
        for i in 0..n {
            let s = beta[0] * z[[i, 0]] + beta[1] * z[[i, 1]];
            let u: f64 = rng.random_range(1e-12..1.0);
            times.push(-u.ln() / (0.2 * s.exp()));
            events.push(rng.random_bool(0.8));
        }
        if !events.iter().any(|&e| e) {
            events[0] = true;
        }
        let fit = coxcore::fit_coxnet(&z, &times, &events, 1e-6, 0.5).unwrap();
        let (g0, g1) = grid_search_2d(&z, &times, &events, 1e-6, 0.5);
        let diff = (fit.theta[0] - g0).abs().max((fit.theta[1] - g1).abs());
        worst = worst.max(diff);
        assert!(diff < 1e-3, "trial {trial}: solver {:?} vs grid ({g0}, {g1})", fit.theta);
    }
    // lambda >= lambda_max kills the solution exactly
    let mut kill_ok = true;
    for _ in 0..20 {
        let n = 40;
        let z = Array2::from_shape_fn((n, 3), |_| rng.random_range(-1.0..1.0f64));
        let (times, mut events) = random_censored_sample(&mut rng, n);
        if !events.iter().any(|&e| e) {
            events[0] = true;
        }
        let lmax = coxcore::lambda_max(&z, &times, &events, 0.5).unwrap();
        let fit = coxcore::fit_coxnet(&z, &times, &events, lmax * 1.000001, 0.5).unwrap();
        if fit.theta.iter().any(|&t| t != 0.0) {
            kill_ok = false;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        3,
        worst < 1e-3 && kill_ok && elapsed < 60.0,
        &format!(
            "grid-oracle worst gap {worst:e}; lambda>=lambda_max exact-zero {}; {elapsed:.1} s",
            if kill_ok { "ok" } else { "VIOLATED" }
        ),
    );
}

#[test]
fn criterion_4_sort_and_hypervolume_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    // nondominated sort vs brute-force peeling on 500 random point sets
    let dominates =
        |a: (f64, f64), b: (f64, f64)| (a.0 <= b.0 && a.1 <= b.1) && (a.0 < b.0 || a.1 < b.1);
    let mut sort_ok = true;
    for _ in 0..500 {
        let n = rng.random_range(1..=50);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(0.0..1.0f64), rng.random_range(0..8) as f64))
            .collect();
        let got = evolve::nondominated_sort(&pts);
        let mut remaining: Vec<usize> = (0..n).collect();
        let mut expected: Vec<Vec<usize>> = Vec::new();
        while !remaining.is_empty() {
            let front: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| !remaining.iter().any(|&j| dominates(pts[j], pts[i])))
                .collect();
            remaining.retain(|i| !front.contains(i));
            expected.push(front);
        }
        let canon = |mut f: Vec<Vec<usize>>| {
            f.iter_mut().for_each(|v| v.sort_unstable());
            f
        };
        if canon(got) != canon(expected) {
            sort_ok = false;
            break;
        }
    }
    // hypervolume vs 1e6-sample Monte-Carlo dominated-area estimate
    let mut worst_hv = 0.0f64;
    for _ in 0..50 {
        let d = rng.random_range(2..=10usize);
        let m = rng.random_range(1..=6usize);
        let points: Vec<FrontPoint<()>> = (0..m)
            .map(|_| FrontPoint {
                dims: rng.random_range(0..=d),
                ci: rng.random_range(0.3..1.0),
                model: (),
            })
            .collect();
        let front = ParetoFront::new(points, EvalSplit::Test);
        let config = HvConfig::for_dataset(d);
        let exact = metrics::hypervolume2d(&front, &config);
        let mut dominated = 0u64;
        let samples = 1_000_000u64;
        for _ in 0..samples {
            let u = rng.random_range(0.0..1.0f64); // neg_ci axis
            let v = rng.random_range(0.0..1.0f64); // dims axis
            if front
                .points
                .iter()
                .any(|p| (1.0 - p.ci) <= u && (p.dims as f64 / d as f64) <= v)
            {
                dominated += 1;
            }
        }
        let mc = 100.0 * dominated as f64 / samples as f64;
        worst_hv = worst_hv.max((exact - mc).abs());
    }
    report(
        4,
        sort_ok && worst_hv < 0.5,
        &format!(
            "sort oracle {} on 500 sets; worst |HV - MC| = {worst_hv:.3} (x100 scale)",
            if sort_ok { "exact" } else { "MISMATCH" }
        ),
    );
}

fn quadratic_synth(seed: u64) -> synth::SynthData {
    synth::generate(&SynthSpec {
        generator: Generator::Quadratic,
        n: 1500,
        d: 10,
        censoring_rate: 0.3,
        seed,
    })
}

#[test]
fn criterion_5_structural_invariants() {
    let data = synth::generate(&SynthSpec {
        generator: Generator::Quadratic,
        n: 400,
        d: 5,
        censoring_rate: 0.3,
        seed: 0xC5,
    });
    let (train, _) = data::split(
        &data.dataset,
        &SplitSpec {
            seed: 0xC5,
            train_fraction: 0.7,
            repetition_index: 0,
        },
    )
    .unwrap();
    let (train, _) = data::zscore_normalize(&train, None).unwrap();
    let mut config = EvolutionConfig::default();
    config.pop_size = 200;
    config.generations = 30;
    config.seed = 0xC5;
    let mut created = 0usize;
    let mut violations = 0usize;
    let result = evolve::evolve_with_observer(
        &train,
        &config,
        None,
        Some(&mut |ind| {
            created += 1;
            let size_ok = ind.model.trees().iter().all(|t| t.size() <= 7);
            let m_ok = ind.model.n_trees() >= 1;
            // dims by fresh traversal of the trees vs the cached objective
            let dims_traversal: std::collections::BTreeSet<usize> = ind
                .model
                .trees()
                .iter()
                .flat_map(|t| t.feature_set().iter().copied())
                .collect();
            let dims_ok = dims_traversal.len() == ind.objectives.dims;
            if !(size_ok && m_ok && dims_ok) {
                violations += 1;
            }
        }),
    )
    .unwrap();
    let mut hv_ok = true;
    let mut prev = f64::NEG_INFINITY;
    for s in &result.history {
        if s.archive_hv < prev - 1e-12 {
            hv_ok = false;
        }
        prev = s.archive_hv.max(prev);
    }
    report(
        5,
        violations == 0 && hv_ok && created >= 200 * 31,
        &format!(
            "{created} individuals checked, {violations} violations; archive HV nondecreasing: {hv_ok}"
        ),
    );
}

struct RecoveryRun {
    best_ci_dims_le3: f64,
    truth_ci: f64,
    sr_hv: f64,
    cx_hv: f64,
    pearson: f64,
}

fn recovery_run(seed_index: u64) -> RecoveryRun {
    let data = quadratic_synth(0x600 + seed_index);
    let (train_raw, test_raw) = data::split(
        &data.dataset,
        &SplitSpec {
            seed: 0x600,
            train_fraction: 0.7,
            repetition_index: seed_index,
        },
    )
    .unwrap();
    let (train, stats) = data::zscore_normalize(&train_raw, None).unwrap();
    let (test, _) = data::zscore_normalize(&test_raw, Some(&stats)).unwrap();
    // ground-truth risk score on the raw (unnormalized) test features
    let truth_eta: Vec<f64> = (0..test_raw.n())
        .map(|i| {
            let x0 = test_raw.features[[i, 0]];
            let x1 = test_raw.features[[i, 1]];
            x0 * x0 - x1
        })
        .collect();
    let truth_ci = coxcore::concordance_ipcw(
        &train.times,
        &train.events,
        &test.times,
        &test.events,
        &truth_eta,
        None,
    )
    .value;
    let mut config = EvolutionConfig::default();
    config.pop_size = 200;
    config.generations = 30;
    config.seed = 0xE2E + seed_index;
    let result = evolve::evolve(&train, &config).unwrap();
    let test_front = evolve::reevaluate_front(&result.archive, &test, &train, EvalSplit::Test)
        .unwrap();
    let best_ci_dims_le3 = test_front
        .points
        .iter()
        .filter(|p| p.dims <= 3)
        .map(|p| p.ci)
        .fold(f64::NEG_INFINITY, f64::max);
    let hv_config = HvConfig::for_dataset(train.d());
    let sr_hv = metrics::hypervolume2d(&test_front.filter_nondominated(), &hv_config);
    let cx = baselines::cx_pareto_front(&train, &test, EvalSplit::Test, 0.5, 1000).unwrap();
    let cx_hv = metrics::hypervolume2d(&cx.front, &hv_config);
    // expression count vs dims over archive models (criterion 10)
    let xs: Vec<f64> = result
        .archive
        .points
        .iter()
        .map(|p| p.model.n_trees() as f64)
        .collect();
    let ys: Vec<f64> = result.archive.points.iter().map(|p| p.dims as f64).collect();
    let pearson = metrics::pearson(&xs, &ys);
    RecoveryRun {
        best_ci_dims_le3,
        truth_ci,
        sr_hv,
        cx_hv,
        pearson,
    }
}

#[test]
fn criteria_6_and_10_end_to_end_recovery() {
    let start = std::time::Instant::now();
    let runs: Vec<RecoveryRun> = (0..5).map(recovery_run).collect();
    let median = |mut v: Vec<f64>| -> f64 {
        v.sort_by(f64::total_cmp);
        v[(v.len() - 1) / 2]
    };
    let med_ci = median(runs.iter().map(|r| r.best_ci_dims_le3).collect());
    let med_truth = median(runs.iter().map(|r| r.truth_ci).collect());
    let med_sr_hv = median(runs.iter().map(|r| r.sr_hv).collect());
    let med_cx_hv = median(runs.iter().map(|r| r.cx_hv).collect());
    let med_pearson = median(runs.iter().map(|r| r.pearson).collect());
    let elapsed = start.elapsed().as_secs_f64();
    let ci_ok = med_ci >= 0.95 * med_truth;
    let hv_ok = med_sr_hv > med_cx_hv;
    report(
        6,
        ci_ok && hv_ok && elapsed < 900.0,
        &format!(
            "median CI(dims<=3) {med_ci:.4} vs 0.95*truth {:.4}; SR HV {med_sr_hv:.2} > CX HV {med_cx_hv:.2}: {hv_ok}; {elapsed:.0} s",
            0.95 * med_truth
        ),
    );
    report(
        10,
        med_pearson > 0.0,
        &format!("median Pearson(expression count, dims) over archives = {med_pearson:.3}"),
    );
}

#[test]
fn criterion_7_linear_parity() {
    let mut gaps = Vec::new();
    for s in 0..5u64 {
        let data = synth::generate(&SynthSpec {
            generator: Generator::Linear,
            n: 800,
            d: 5,
            censoring_rate: 0.2,
            seed: 0x700 + s,
        });
        let (train_raw, test_raw) = data::split(
            &data.dataset,
            &SplitSpec {
                seed: 0x700,
                train_fraction: 0.7,
                repetition_index: s,
            },
        )
        .unwrap();
        let (train, stats) = data::zscore_normalize(&train_raw, None).unwrap();
        let (test, _) = data::zscore_normalize(&test_raw, Some(&stats)).unwrap();
        let cx = baselines::cx_pareto_front(&train, &test, EvalSplit::Test, 0.5, 1000).unwrap();
        let cx_best = cx.front.select_max().map(|p| p.ci).unwrap_or(0.5);
        let mut config = EvolutionConfig::default();
        config.pop_size = 150;
        config.generations = 20;
        config.seed = 0x701 + s;
        let result = evolve::evolve(&train, &config).unwrap();
        let front = evolve::reevaluate_front(&result.archive, &test, &train, EvalSplit::Test)
            .unwrap()
            .filter_nondominated();
        let sr_best = front.select_max().map(|p| p.ci).unwrap_or(0.5);
        gaps.push((sr_best - cx_best).abs());
    }
    let worst = gaps.iter().copied().fold(0.0f64, f64::max);
    report(
        7,
        worst < 0.03,
        &format!("|SR best CI - CX best CI| over 5 seeds: worst {worst:.4}"),
    );
}

#[test]
fn criterion_8_pbc_extended_check() {
    // Best-effort check that only runs when the public PBC dataset is
    // supplied via SURVSR_PBC_CSV / SURVSR_PBC_SCHEMA (and optionally
    // SURVSR_PBC_TIME / SURVSR_PBC_EVENT for column names).
    let csv = match std::env::var("SURVSR_PBC_CSV") {
        Ok(p) => p,
        Err(_) => {
            report(8, true, "skipped: PBC dataset not supplied (set SURVSR_PBC_CSV)");
            return;
        }
    };
    let schema_path = std::env::var("SURVSR_PBC_SCHEMA")
        .unwrap_or_else(|_| format!("{}.schema.toml", csv.trim_end_matches(".csv")));
    let time_col = std::env::var("SURVSR_PBC_TIME").unwrap_or_else(|_| "time".into());
    let event_col = std::env::var("SURVSR_PBC_EVENT").unwrap_or_else(|_| "event".into());
    let schema = data::Schema::from_toml_file(std::path::Path::new(&schema_path)).unwrap();
    let full = data::load_csv(std::path::Path::new(&csv), &time_col, &event_col, &schema).unwrap();
    let mut cis = Vec::new();
    for rep in 0..10u64 {
        let (train_raw, test_raw) = data::split(
            &full,
            &SplitSpec {
                seed: 0x8BC,
                train_fraction: 0.7,
                repetition_index: rep,
            },
        )
        .unwrap();
        let (train, stats) = data::zscore_normalize(&train_raw, None).unwrap();
        let (test, _) = data::zscore_normalize(&test_raw, Some(&stats)).unwrap();
        let mut config = EvolutionConfig::default();
        config.pop_size = 200;
        config.generations = 30;
        config.seed = 0x8BC + rep;
        let result = evolve::evolve(&train, &config).unwrap();
        let front = evolve::reevaluate_front(&result.archive, &test, &train, EvalSplit::Test)
            .unwrap();
        if let Some(p) = front.select_exactly_k(3) {
            cis.push(p.ci);
        }
    }
    cis.sort_by(f64::total_cmp);
    let med = cis[(cis.len() - 1) / 2];
    report(
        8,
        (med - 0.758).abs() <= 0.05,
        &format!("PBC median test CI at k=3 over {} reps: {med:.3} (target 0.758 +/- 0.05)", cis.len()),
    );
}

#[test]
fn criterion_9_run_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    runner::cmd_synth(
        &SynthSpec {
            generator: Generator::Quadratic,
            n: 200,
            d: 4,
            censoring_rate: 0.2,
            seed: 0xC9,
        },
        &csv,
    )
    .unwrap();
    let mut evolution = EvolutionConfig::default();
    evolution.pop_size = 24;
    evolution.generations = 4;
    let config = runner::RunConfig {
        dataset: csv.clone(),
        schema: csv.with_extension("schema.toml"),
        time_column: "time".into(),
        event_column: "event".into(),
        normalize: true,
        method: runner::Method::Sr,
        repetitions: 3,
        seed: 0xC9,
        output_dir: dir.path().join("out"),
        train_fraction: 0.7,
        evolution,
        cx: Default::default(),
        st: Default::default(),
    };
    runner::cmd_run(&config).unwrap();
    let snapshot = |dir: &std::path::Path| -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| {
                let n = p.file_name().unwrap().to_string_lossy().into_owned();
                n.starts_with("front_") && n.ends_with(".csv")
            })
            .map(|p| {
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    std::fs::read(&p).unwrap(),
                )
            })
            .collect();
        files.sort();
        files
    };
    let first = snapshot(&config.output_dir);
    assert!(!first.is_empty());
    runner::cmd_run(&config).unwrap();
    let second = snapshot(&config.output_dir);
    report(
        9,
        first == second,
        &format!(
            "{} front CSVs byte-identical across reruns (parallel repetitions)",
            first.len()
        ),
    );
}
