//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Criteria 5-7 share one batch of seeded pipeline runs, and criteria 8-10
//! share one batch of loss-scaling runs; both batches are built once.

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use robust_csp::algebra::{classify_01all, dual_discriminator};
use robust_csp::consistency::{propagate, Pattern, PatternEdge};
use robust_csp::csp::generate::{
    generate_planted, implicational_language, two_sat_language, unique_games_language,
};
use robust_csp::csp::{Assignment, Domain, Relation};
use robust_csp::experiment::trial_seed;
use robust_csp::sdp::{self, SdpSolution};
use robust_csp::{dd, nu, stats, Instance};

const FEAS_TOL: f64 = 1e-6;

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    use robust_csp::csp::Constraint;
    let d = rng.gen_range(2..=3);
    let nv = rng.gen_range(2..=6);
    let m = rng.gen_range(3..=10);
    let mut constraints = Vec::new();
    for _ in 0..m {
        let arity = if rng.gen_bool(0.2) { 1 } else { 2 };
        if arity == 1 {
            let x = rng.gen_range(0..nv);
            let values: Vec<usize> = (0..d).filter(|_| rng.gen_bool(0.6)).collect();
            let values = if values.is_empty() { vec![0] } else { values };
            constraints.push(Constraint::new(
                vec![x],
                Arc::new(Relation::unary(d, &values).unwrap()),
                rng.gen_range(0.1..1.0),
            ));
        } else {
            let x = rng.gen_range(0..nv);
            let mut y = rng.gen_range(0..nv.max(2) - 1);
            if y >= x {
                y += 1;
            }
            let mut pairs = Vec::new();
            for a in 0..d {
                for b in 0..d {
                    if rng.gen_bool(0.55) {
                        pairs.push((a, b));
                    }
                }
            }
            if pairs.is_empty() {
                pairs.push((0, 0));
            }
            constraints.push(Constraint::new(
                vec![x, y],
                Arc::new(Relation::binary(d, &pairs).unwrap()),
                rng.gen_range(0.1..1.0),
            ));
        }
    }
    Instance::new(Domain::new(d).unwrap(), nv, constraints)
        .unwrap()
        .normalize_weights()
        .unwrap()
}

/// Criterion 1: relaxation value sandwiched between 0 and the integral
/// optimum, with feasibility identities within tolerance.
#[test]
fn criterion_01_sdp_sandwich() {
    let start = Instant::now();
    let cases: Vec<Instance> = {
        let mut rng = ChaCha8Rng::seed_from_u64(1001);
        (0..100).map(|_| random_instance(&mut rng)).collect()
    };
    let failures: Vec<String> = cases
        .par_iter()
        .enumerate()
        .filter_map(|(i, inst)| {
            let m = inst.num_constraints() as f64;
            let delta = 1.0 / (m * m);
            let (opt, _) = inst.opt_bruteforce().unwrap();
            let problem = sdp::build_relaxation(inst).unwrap();
            let sol = match sdp::solve(&problem, delta) {
                Ok(s) => s,
                Err(e) => return Some(format!("case {i}: solver failed: {e}")),
            };
            let report = sdp::validate_feasibility(&sol, FEAS_TOL);
            if !report.within_tol() {
                return Some(format!(
                    "case {i}: residual {:.2e} above {FEAS_TOL:.0e}",
                    report.max_residual()
                ));
            }
            if sol.objective < -FEAS_TOL || sol.objective > 1.0 - opt + delta + 1e-9 {
                return Some(format!(
                    "case {i}: objective {} outside [0, {}]",
                    sol.objective,
                    1.0 - opt + delta
                ));
            }
            None
        })
        .collect();
    let elapsed = start.elapsed();
    assert!(
        failures.is_empty(),
        "criterion 1: FAIL — {} of 100 cases: {:?}",
        failures.len(),
        &failures[..failures.len().min(3)]
    );
    assert!(
        elapsed.as_secs() < 300,
        "criterion 1: FAIL — runtime {elapsed:?} exceeds 5 minutes"
    );
    println!("criterion 1: PASS — 100 random instances sandwiched, residuals <= 1e-6 ({elapsed:?})");
}

/// Criterion 2: both pipelines return fully satisfying assignments on
/// satisfiable instances.
#[test]
fn criterion_02_perfect_completeness() {
    let configs: Vec<(Vec<Arc<Relation>>, usize, usize)> = vec![
        (two_sat_language(), 8, 30),
        (implicational_language(3), 6, 24),
    ];
    let mut nu_failures = 0usize;
    let mut dd_failures = 0usize;
    for trial in 0..50 {
        let (lang, nv, m) = &configs[trial % configs.len()];
        let seed = trial_seed(2002, 0, trial);
        let (inst, _) = generate_planted::<f64>(lang, *nv, *m, 0.0, seed).unwrap();
        let norm = inst.clone().normalize_weights().unwrap();
        let (s, _) = nu::run_nu(&inst, seed).unwrap();
        if (norm.evaluate(&s).unwrap() - 1.0).abs() > 1e-12 {
            nu_failures += 1;
        }
    }
    let dd_configs: Vec<(Vec<Arc<Relation>>, usize, usize)> = vec![
        (two_sat_language(), 8, 30),
        (unique_games_language(4), 6, 24),
    ];
    for trial in 0..50 {
        let (lang, nv, m) = &dd_configs[trial % dd_configs.len()];
        let seed = trial_seed(2003, 0, trial);
        let (inst, _) = generate_planted::<f64>(lang, *nv, *m, 0.0, seed).unwrap();
        let norm = inst.clone().normalize_weights().unwrap();
        let (s, _) = dd::run_dd(&inst, seed).unwrap();
        if (norm.evaluate(&s).unwrap() - 1.0).abs() > 1e-12 {
            dd_failures += 1;
        }
    }
    assert!(
        nu_failures == 0 && dd_failures == 0,
        "criterion 2: FAIL — {nu_failures} nu / {dd_failures} dd non-satisfying returns"
    );
    println!("criterion 2: PASS — 50 satisfiable instances per pipeline, zero failures");
}

/// Criterion 3: template classification coincides with preservation by the
/// dual discriminator, exhaustively.
#[test]
fn criterion_03_classifier_equivalence() {
    let mut checked = 0usize;
    for d in [2usize, 3] {
        let dd_op = dual_discriminator(Domain::new(d).unwrap());
        let n_pairs = d * d;
        for bits in 0u32..(1 << n_pairs) {
            let pairs: Vec<(usize, usize)> = (0..n_pairs)
                .filter(|i| bits & (1 << i) != 0)
                .map(|i| (i / d, i % d))
                .collect();
            let rel = Relation::binary(d, &pairs).unwrap();
            let classified = !classify_01all(&rel).is_none();
            let preserved = dd_op.preserves(&rel);
            assert_eq!(
                classified, preserved,
                "criterion 3: FAIL — mismatch at d={d}, pairs={pairs:?}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 16 + 512);
    println!("criterion 3: PASS — all 528 binary relations agree (|D| = 2, 3)");
}

/// Criterion 4: tree propagation equals naive realization enumeration.
#[test]
fn criterion_04_propagation_oracle() {
    // independent oracle: enumerate all vertex valuations directly
    fn naive(p: &Pattern, a: u64, d: usize) -> u64 {
        let n = p.labels.len();
        let mut out = 0u64;
        let mut vals = vec![0usize; n];
        loop {
            let begin_ok = a & (1 << vals[p.begin]) != 0;
            let edges_ok = p
                .edges
                .iter()
                .all(|e| e.relation.contains(&[vals[e.from], vals[e.to]]));
            if begin_ok && edges_ok {
                out |= 1 << vals[p.end];
            }
            let mut i = 0;
            loop {
                if i == n {
                    return out;
                }
                vals[i] += 1;
                if vals[i] < d {
                    break;
                }
                vals[i] = 0;
                i += 1;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    let mut checked = 0usize;
    for case in 0..1000 {
        let d = rng.gen_range(2..=3usize);
        let n = rng.gen_range(2..=8usize);
        let mut labels = vec![rng.gen_range(0..5usize)];
        let mut edges = Vec::new();
        for v in 1..n {
            labels.push(rng.gen_range(0..5));
            let parent = rng.gen_range(0..v);
            let mut pairs = Vec::new();
            for a in 0..d {
                for b in 0..d {
                    if rng.gen_bool(0.6) {
                        pairs.push((a, b));
                    }
                }
            }
            let (from, to) = if rng.gen_bool(0.5) {
                (parent, v)
            } else {
                (v, parent)
            };
            edges.push(PatternEdge {
                from,
                to,
                relation: Arc::new(Relation::binary(d, &pairs).unwrap()),
            });
        }
        let pattern = Pattern {
            labels,
            edges,
            begin: rng.gen_range(0..n),
            end: rng.gen_range(0..n),
        };
        let a = rng.gen_range(0..(1u64 << d));
        let fast = propagate(&pattern, a, d).unwrap();
        let slow = naive(&pattern, a, d);
        assert_eq!(fast, slow, "criterion 4: FAIL — case {case}");
        checked += 1;
    }
    assert_eq!(checked, 1000);
    println!("criterion 4: PASS — 1000 random tree patterns match the enumeration oracle");
}

// ---------------------------------------------------------------------------
// shared batch of seeded nu runs (criteria 5, 6, 7)

struct NuRun {
    instance: Instance,
    seed: u64,
    report: nu::RemovalReport<f64>,
}

fn nu_runs() -> &'static Vec<NuRun> {
    static RUNS: OnceLock<Vec<NuRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let eps_grid = [0.01, 0.02, 0.03, 0.04, 0.05];
        let configs: Vec<(Vec<Arc<Relation>>, usize, usize, u64)> = vec![
            (two_sat_language(), 10, 120, 57_000),
            (implicational_language(3), 8, 80, 58_000),
        ];
        let mut jobs = Vec::new();
        for (ci, (lang, nv, m, base)) in configs.iter().enumerate() {
            for t in 0..100usize {
                let eps = eps_grid[t % eps_grid.len()];
                jobs.push((lang.clone(), *nv, *m, trial_seed(*base, ci, t), eps));
            }
        }
        jobs.into_par_iter()
            .map(|(lang, nv, m, seed, eps)| {
                let (instance, _) = generate_planted::<f64>(&lang, nv, m, eps, seed).unwrap();
                let (_, report) = nu::run_nu(&instance, seed)
                    .unwrap_or_else(|e| panic!("nu run seed {seed} failed: {e}"));
                NuRun {
                    instance,
                    seed,
                    report,
                }
            })
            .collect()
    })
}

/// Criterion 5: step-0 removed weight never exceeds alpha^kappa.
#[test]
fn criterion_05_step0_bound() {
    let runs = nu_runs();
    let mut full_runs = 0usize;
    for run in runs {
        if run.report.early_exit != nu::EarlyExit::None {
            continue;
        }
        full_runs += 1;
        let bound = run.report.alpha.powf(run.report.kappa) + 1e-12;
        assert!(
            run.report.removed_weight[0] <= bound,
            "criterion 5: FAIL — seed {}: step-0 weight {} > {}",
            run.seed,
            run.report.removed_weight[0],
            bound
        );
    }
    assert!(full_runs > 0, "criterion 5: FAIL — no run reached step 0");
    println!("criterion 5: PASS — step-0 weight <= alpha^kappa on {full_runs} runs");
}

/// Criterion 6: every constraint surviving step 1 still passes the step-1
/// grid predicate on re-scan.
#[test]
fn criterion_06_step1_fixpoint() {
    let runs = nu_runs();
    let mut scanned = 0usize;
    for run in runs.iter().filter(|r| r.report.early_exit == nu::EarlyExit::None) {
        if scanned >= 25 {
            break;
        }
        scanned += 1;
        let artifacts = nu::rebuild_artifacts(&run.instance, run.seed, &nu::NuOptions::default())
            .expect("deterministic rebuild");
        let m = artifacts.binary.num_constraints();
        let after_step1: Vec<usize> = (0..m)
            .filter(|ci| {
                !run.report.removed[0].contains(ci) && !run.report.removed[1].contains(ci)
            })
            .collect();
        assert!(
            nu::verify_step1_fixpoint(
                &run.instance,
                &artifacts.sol,
                &artifacts.levels,
                &artifacts.params,
                &after_step1,
            ),
            "criterion 6: FAIL — survivor violates the step-1 predicate (seed {})",
            run.seed
        );
    }
    assert!(scanned > 0, "criterion 6: FAIL — nothing to scan");
    println!("criterion 6: PASS — step-1 predicate holds on re-scan for {scanned} runs");
}

/// Criterion 7: the survivor after steps 0-5 is satisfiable in every run
/// (the exact solver never reports UNSAT there).
#[test]
fn criterion_07_survivor_satisfiability() {
    let runs = nu_runs();
    assert_eq!(runs.len(), 200);
    // run_nu already errors on an unsatisfiable survivor, so reaching here
    // means all runs succeeded; account for how many exercised the full path
    let reached: usize = runs
        .iter()
        .filter(|r| r.report.early_exit == nu::EarlyExit::None)
        .count();
    let heavy: usize = runs
        .iter()
        .filter(|r| r.report.early_exit == nu::EarlyExit::HeavyPrefix)
        .count();
    let large: usize = runs
        .iter()
        .filter(|r| r.report.early_exit == nu::EarlyExit::LargeEpsRegime)
        .count();
    assert!(
        reached * 2 >= runs.len(),
        "criterion 7: FAIL — only {reached}/200 runs reached the removal steps \
         (heavy-prefix {heavy}, large-eps {large}); the property was barely exercised"
    );
    println!(
        "criterion 7: PASS — 200/200 runs solved; {reached} ran steps 0-5 \
         (heavy-prefix {heavy}, large-eps {large}), survivor satisfiable in all"
    );
}

// ---------------------------------------------------------------------------
// shared batch of dd loss-scaling runs (criteria 8, 9, 10)

struct DdTrial {
    eps: f64,
    family: &'static str,
    report: dd::DdReport<f64>,
}

type FamilySpec = (&'static str, Vec<Arc<Relation>>, usize, usize, u64);

fn dd_trials() -> &'static Vec<DdTrial> {
    static RUNS: OnceLock<Vec<DdTrial>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let eps_grid = [0.0025f64, 0.01, 0.04];
        let trials = 50usize;
        let families: Vec<FamilySpec> = vec![
            ("2sat", two_sat_language(), 12, 400, 88_000),
            ("ug4", unique_games_language(4), 10, 400, 89_000),
            // the flip symmetry keeps mass split between the two values, so
            // these runs exercise the two-valued group, the hyperplane
            // labeling, and the transformed relaxation
            ("minuncut", unique_games_language(2), 16, 400, 90_000),
        ];
        let mut jobs = Vec::new();
        for (name, lang, nv, m, base) in &families {
            for (ei, &eps) in eps_grid.iter().enumerate() {
                for t in 0..trials {
                    jobs.push((*name, lang.clone(), *nv, *m, eps, trial_seed(*base, ei, t)));
                }
            }
        }
        jobs.into_par_iter()
            .map(|(family, lang, nv, m, eps, seed)| {
                let (instance, _) = generate_planted::<f64>(&lang, nv, m, eps, seed).unwrap();
                let (_, report) = dd::run_dd(&instance, seed)
                    .unwrap_or_else(|e| panic!("dd run seed {seed} failed: {e}"));
                DdTrial {
                    eps,
                    family,
                    report,
                }
            })
            .collect()
    })
}

/// Criterion 8: loss scaling of the dual-discriminator pipeline.
///
/// The slope-window assertion is implemented exactly as specified and is
/// expected to fail on this implementation: the pipeline recovers the
/// planted assignment on these families, so the achieved loss equals the
/// corrupted weight and the log-log slope is ~1.0 (strictly better than the
/// O(sqrt(eps)) guarantee, but outside the stated [0.3, 0.7] window).
#[test]
fn criterion_08_dd_loss_scaling() {
    let start = Instant::now();
    let trials = dd_trials();
    let eps_grid = [0.0025f64, 0.01, 0.04];
    let mut all_pass = true;
    let mut summary = Vec::new();
    for family in ["2sat", "ug4"] {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut median_at_top = f64::NAN;
        for &eps in &eps_grid {
            let losses: Vec<f64> = trials
                .iter()
                .filter(|t| t.family == family && t.eps == eps)
                .map(|t| 1.0 - t.report.satisfied_weight)
                .collect();
            assert!(losses.len() >= 50, "need >= 50 trials per point");
            let median = stats::median(&losses);
            if eps == 0.04 {
                median_at_top = median;
            }
            if median > 0.0 {
                xs.push(eps.ln());
                ys.push(median.ln());
            }
        }
        let (slope, _, r2) = stats::linear_fit(&xs, &ys);
        let slope_ok = (0.3..=0.7).contains(&slope);
        let median_ok = median_at_top < 0.5;
        summary.push(format!(
            "{family}: slope {slope:.3} (r^2 {r2:.3}), median loss at eps=0.04 is {median_at_top:.4}"
        ));
        if !slope_ok || !median_ok {
            all_pass = false;
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 1800,
        "criterion 8: FAIL — runtime {elapsed:?} exceeds 30 minutes"
    );
    if all_pass {
        println!("criterion 8: PASS — {}", summary.join("; "));
    } else {
        println!(
            "criterion 8: FAIL — {} (measured slope ~1.0: the achieved loss tracks the \
             corrupted weight, beating the sqrt guarantee; see the repository notes)",
            summary.join("; ")
        );
    }
    assert!(
        all_pass,
        "criterion 8: slope outside [0.3, 0.7] — {}",
        summary.join("; ")
    );
}

/// Criterion 9: conservative-violation and bad-labeling weights stay
/// proportionally bounded with no growth trend in eps.
///
/// The boundedness of the mean ratios is checked over every family. The
/// trend test runs on the two named loss-scaling families; the min-uncut
/// family is excluded from it deliberately, since there `w(C_bad)` tracks
/// the corrupted weight (~eps), which satisfies the O(sqrt(eps)) bound while
/// its *ratio* to sqrt(eps) grows by construction.
#[test]
fn criterion_09_triage_expectations() {
    let trials = dd_trials();
    let cv_ratio_all: Vec<f64> = trials
        .iter()
        .map(|t| t.report.weight_conservatively_violated / t.eps)
        .collect();
    let bad_ratio_all: Vec<f64> = trials
        .iter()
        .map(|t| t.report.weight_bad_labeling / t.eps.sqrt())
        .collect();
    let mean_cv = cv_ratio_all.iter().sum::<f64>() / cv_ratio_all.len() as f64;
    let mean_bad = bad_ratio_all.iter().sum::<f64>() / bad_ratio_all.len() as f64;
    // generous absolute bounds on the proportionality constants
    assert!(
        mean_cv < 50.0,
        "criterion 9: FAIL — mean w(C_v)/eps {mean_cv} unbounded"
    );
    assert!(
        mean_bad < 50.0,
        "criterion 9: FAIL — mean w(C_bad)/sqrt(eps) {mean_bad} unbounded"
    );
    let named: Vec<&DdTrial> = trials
        .iter()
        .filter(|t| t.family == "2sat" || t.family == "ug4")
        .collect();
    let eps_values: Vec<f64> = named.iter().map(|t| t.eps).collect();
    let cv_ratio: Vec<f64> = named
        .iter()
        .map(|t| t.report.weight_conservatively_violated / t.eps)
        .collect();
    let bad_ratio: Vec<f64> = named
        .iter()
        .map(|t| t.report.weight_bad_labeling / t.eps.sqrt())
        .collect();
    let p_cv = stats::spearman_trend_p_value(&eps_values, &cv_ratio);
    let p_bad = stats::spearman_trend_p_value(&eps_values, &bad_ratio);
    assert!(
        p_cv > 0.01,
        "criterion 9: FAIL — w(C_v)/eps grows with eps (p = {p_cv:.4})"
    );
    assert!(
        p_bad > 0.01,
        "criterion 9: FAIL — w(C_bad)/sqrt(eps) grows with eps (p = {p_bad:.4})"
    );
    println!(
        "criterion 9: PASS — mean w(C_v)/eps {mean_cv:.3}, mean w(C_bad)/sqrt(eps) \
         {mean_bad:.3}; trend p-values {p_cv:.3} / {p_bad:.3} on the named families"
    );
}

/// Criterion 10: the transformed relaxation never costs more per disjunction,
/// nor more than twice per kept unique-game piece.
#[test]
fn criterion_10_transform_dominance() {
    let trials = dd_trials();
    let mut checked = 0usize;
    let mut two_valued_runs = 0usize;
    for t in trials {
        if t.report.group_sizes[1] > 0 {
            two_valued_runs += 1;
        }
        if t.report.disjunction_dominance_gap.is_finite() {
            assert!(
                t.report.disjunction_dominance_gap <= 1e-9,
                "criterion 10: FAIL — disjunction gap {}",
                t.report.disjunction_dominance_gap
            );
            checked += 1;
        }
        if t.report.unique_game_dominance_gap.is_finite() {
            assert!(
                t.report.unique_game_dominance_gap <= 1e-9,
                "criterion 10: FAIL — unique-game gap {}",
                t.report.unique_game_dominance_gap
            );
            checked += 1;
        }
    }
    assert!(
        checked > 0 && two_valued_runs > 0,
        "criterion 10: FAIL — no run produced a two-valued sub-instance; nothing was checked"
    );
    println!(
        "criterion 10: PASS — dominance inequalities hold ({checked} finite gaps over {two_valued_runs} runs with two-valued variables)"
    );
}

/// Criterion 11: the single-vector cut probability matches theta/pi, with
/// 1 - cos(theta) = 2 ||y_B - x_A||^2, within +/- 0.01 at 1e5 samples.
#[test]
fn criterion_11_cut_probability_bracket() {
    let mut rng = ChaCha8Rng::seed_from_u64(11_011);
    let dim = 8;
    let samples = 100_000usize;
    for pair in 0..20 {
        let theta = (pair as f64 + 0.5) / 20.0 * std::f64::consts::PI;
        // orthonormal frame: v0, e1, e2
        let mut v0 = vec![0.0f64; dim];
        v0[0] = 1.0;
        let mut w1 = vec![0.0f64; dim];
        w1[1] = 1.0;
        let mut w2 = vec![0.0f64; dim];
        w2[1] = theta.cos();
        w2[2] = theta.sin();
        // two-variable solution over d = 2 with difference vectors w1, w2
        let half = |w: &[f64], sign: f64| -> Vec<f64> {
            v0.iter()
                .zip(w)
                .map(|(&v, &wi)| 0.5 * (v + sign * wi))
                .collect()
        };
        let vectors = vec![half(&w1, 1.0), half(&w1, -1.0), half(&w2, 1.0), half(&w2, -1.0)];
        let sol = SdpSolution::from_vectors(2, 2, v0.clone(), vectors);
        // the stated identity: 1 - cos(theta) = 2 ||y_B - x_A||^2
        let diff: f64 = sol
            .subset_vector(1, 0b01)
            .iter()
            .zip(&sol.subset_vector(0, 0b01))
            .map(|(&b, &a)| (b - a) * (b - a))
            .sum();
        assert!(
            ((1.0 - theta.cos()) - 2.0 * diff).abs() < 1e-12,
            "identity violated: 1-cos {} vs 2 d^2 {}",
            1.0 - theta.cos(),
            2.0 * diff
        );
        let mut cuts = 0usize;
        for _ in 0..samples {
            let u: Vec<f64> = (0..dim)
                .map(|_| rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng))
                .collect();
            if nu::cut_by(&u, &sol, 0, 0b01, 1, 0b01) {
                cuts += 1;
            }
        }
        let freq = cuts as f64 / samples as f64;
        let expected = theta / std::f64::consts::PI;
        assert!(
            (freq - expected).abs() <= 0.01,
            "criterion 11: FAIL — pair {pair}: frequency {freq:.4} vs theta/pi {expected:.4}"
        );
    }
    println!("criterion 11: PASS — 20 planted pairs within +/- 0.01 of theta/pi");
}

/// A propagated assignment check used across criteria: the pipelines must
/// never return out-of-domain values.
#[test]
fn assignments_are_well_formed() {
    for run in nu_runs().iter().take(5) {
        let norm = run.instance.clone().normalize_weights().unwrap();
        let (s, _) = nu::run_nu(&run.instance, run.seed).unwrap();
        assert_eq!(s.values.len(), run.instance.num_vars);
        assert!(norm.evaluate(&s).is_ok());
    }
    let _ = Assignment::new(vec![]);
}
