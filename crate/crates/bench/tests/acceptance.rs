//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;
mod support;

use std::panic;
use std::process::ExitCode;
use std::sync::Arc;
use std::thread;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tartarus_bench::spectrum::am15g;
use tartarus_bench::{
    run_benchmark, BenchmarkConfig, Budget, CountMode, Evaluator, OptimizerKind, RecordStatus, TaskScorer,
};
use tartarus_core::descriptors::{diversity, morgan_fingerprint};
use tartarus_core::mol::{canonical_key, Molecule};
use tartarus_core::objectives::{
    calibrate, evaluate_task, fit_outlier_envelope, open_circuit_voltage, scharber_pce, task_by_name, DeviceMode,
    FrontierEnergies, ScharberConfig, Spectrum, PENALTY_FITNESS,
};
use tartarus_core::optimizers::{run_ga, run_markov_hc, FnOracle, GaConfig, MarkovHcConfig, ScoreShaper};
use tartarus_core::pattern::has_match;
use tartarus_core::selfies::{decode, default_alphabet, encode, SelfiesSequence};

/// Outcome of one criterion: whether it holds and a one-line summary.
struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(checks: &[(&str, bool)], extra: String) -> Verdict {
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = if failed.is_empty() {
        extra
    } else {
        format!("failed: {}; {extra}", failed.join(", "))
    };
    Verdict { pass: failed.is_empty(), detail }
}

const PLANCK: f64 = 6.626_070_15e-34;
const LIGHT: f64 = 2.997_924_58e8;
const CHARGE: f64 = 1.602_176_634e-19;

/// Short-circuit current in mA/cm² for a step absorber with unit EQE above
/// `gap_ev`, by the trapezoidal rule over the tabulated spectrum.
fn jsc_oracle(s: &Spectrum, gap_ev: f64, eqe: f64) -> f64 {
    let edge = PLANCK * LIGHT / (gap_ev * CHARGE) * 1e9;
    let pts: Vec<(f64, f64)> = s
        .wavelengths()
        .iter()
        .zip(s.irradiance())
        .filter(|(w, _)| **w <= edge)
        .map(|(&w, &e)| (w, e * w * 1e-9 / (PLANCK * LIGHT)))
        .collect();
    let photons: f64 = pts.windows(2).map(|p| 0.5 * (p[1].0 - p[0].0) * (p[0].1 + p[1].1)).sum();
    CHARGE * eqe * photons / 10.0
}

fn scharber_pipeline() -> Verdict {
    let start = Instant::now();
    let spectrum = am15g();
    let (cfg, _) = ScharberConfig::from_spectrum(&spectrum).unwrap();

    let donor = FrontierEnergies::new(-5.5, -3.0, 0.0);
    let voc = open_circuit_voltage(&donor, DeviceMode::DonorPcbm, &cfg);
    let voc_ok = (voc - 0.9).abs() <= 1e-12 && cfg.acceptor_lumo_ev == -4.3;

    // Offset clamp: donor LUMO within the overpotential of the acceptor's.
    let offset = FrontierEnergies::new(-5.5, -4.1, 0.0);
    // Sign clamp: the voltage expression itself goes negative.
    let negative = FrontierEnergies::new(-3.9, -2.0, 0.0);
    let acceptor_negative = FrontierEnergies::new(-7.0, -5.4, 0.0);
    let clamps_ok = scharber_pce(&offset, DeviceMode::DonorPcbm, &cfg) == 0.0
        && scharber_pce(&negative, DeviceMode::DonorPcbm, &cfg) == 0.0
        && scharber_pce(&acceptor_negative, DeviceMode::AcceptorPcdtbt, &cfg) == 0.0
        && cfg.acceptor_lumo_ev - negative.homo_ev - cfg.overpotential_ev < 0.0;

    let mut worst: (f64, f64) = (0.0, 0.0);
    for i in 0..=300 {
        let e = 1.0 + 0.01 * i as f64;
        let truth = jsc_oracle(&spectrum, e, cfg.eqe);
        let err = (cfg.jsc(e) - truth).abs() / truth;
        if err > worst.0 {
            worst = (err, e);
        }
    }
    let jsc_ok = worst.0 <= 0.05;

    let zero = calibrate(&FrontierEnergies::new(0.0, 0.0, 0.0), &cfg);
    let calib_ok = (zero.homo_ev - 2.5377).abs() <= 1e-12 && (zero.lumo_ev - 3.7913).abs() <= 1e-12;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        &[
            ("V_OC = 0.9 V", voc_ok),
            ("clamps give PCE = 0", clamps_ok),
            ("J_SC surrogate within 5%", jsc_ok),
            ("calibration intercepts", calib_ok),
            ("runtime < 10 s", secs < 10.0),
        ],
        format!(
            "V_OC {voc:.15}, J_SC fit A = {:.3} B = {:.4}, max relative error {:.1}% at {:.2} eV, {secs:.2} s",
            cfg.a,
            cfg.b,
            100.0 * worst.0,
            worst.1
        ),
    )
}

fn score_shaping() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut anchors, mut monotone, mut tested) = (true, true, 0);
    while tested < 1000 {
        let n = rng.gen_range(2..=100);
        let scale = 10f64.powi(rng.gen_range(-2..=3));
        let known: Vec<f64> = (0..n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
        let Ok(s) = ScoreShaper::fit(&known, 0.8) else { continue };
        tested += 1;
        let mean = known.iter().sum::<f64>() / n as f64;
        let max = known.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = known.iter().copied().fold(f64::INFINITY, f64::min);
        anchors &= s.shape(mean).abs() <= 1e-12 && (s.shape(max) - 0.8).abs() <= 1e-12;
        let grid: Vec<f64> = (0..=64).map(|k| min + (max - min) * k as f64 / 64.0).collect();
        monotone &= grid.windows(2).all(|w| s.shape(w[1]) > s.shape(w[0]));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        &[("anchors to 1e-12", anchors), ("strictly increasing", monotone), ("runtime < 5 s", secs < 5.0)],
        format!("{tested} fitness sets, {secs:.2} s"),
    )
}

fn diversity_oracle_match() -> Verdict {
    let corpus = common::corpus();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(2..=20);
        let pop: Vec<Molecule> = (0..n).map(|_| corpus[rng.gen_range(0..corpus.len())].clone()).collect();
        let fps: Vec<_> = pop.iter().map(morgan_fingerprint).collect();
        worst = worst.max((diversity(&pop).unwrap() - common::diversity_oracle(&fps)).abs());
    }
    let same = vec![corpus[17].clone(); 12];
    let identical = diversity(&same).unwrap();
    verdict(
        &[("oracle agreement to 1e-12", worst <= 1e-12), ("identical population is 0", identical == 0.0)],
        format!("200 populations, max deviation {worst:e}, identical population {identical}"),
    )
}

fn selfies_totality() -> Verdict {
    let start = Instant::now();
    let alphabet = default_alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut failures, mut violations) = (0, 0);
    for _ in 0..100_000 {
        let len = rng.gen_range(1..=40);
        let s = SelfiesSequence::new((0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect());
        match panic::catch_unwind(|| decode(&s)) {
            Ok(m) => violations += !common::within_valence(&m) as usize,
            Err(_) => failures += 1,
        }
    }
    let corpus = common::corpus();
    let round_trips = corpus
        .iter()
        .filter(|m| encode(m).is_ok_and(|s| canonical_key(&decode(&s)) == canonical_key(m)))
        .count();
    let secs = start.elapsed().as_secs_f64();
    verdict(
        &[
            ("no decode failures", failures == 0),
            ("no valence violations", violations == 0),
            ("corpus round trip", round_trips == corpus.len()),
            ("runtime < 60 s", secs < 60.0),
        ],
        format!(
            "10^5 sequences, {failures} failures, {violations} violations, {round_trips}/{} round trips, {secs:.1} s",
            corpus.len()
        ),
    )
}

fn matcher_oracle() -> Verdict {
    let alerts = common::all_alerts();
    let mols = common::small();
    let small_enough = mols.len() == 200 && mols.iter().all(|m| m.heavy_atom_count() <= 15);
    let mut agree = 0;
    for m in mols {
        for p in &alerts {
            agree += (has_match(m, p) == common::brute_force_has_match(m, p)) as usize;
        }
    }
    let total = mols.len() * alerts.len();
    verdict(
        &[("molecules have at most 15 heavy atoms", small_enough), ("full agreement", agree == total)],
        format!("{} molecules x {} alerts, {agree}/{total} agree", mols.len(), alerts.len()),
    )
}

fn outlier_envelope() -> Verdict {
    // Correlated Gaussian cloud.
    let pts: Vec<[f64; 2]> = common::gaussian_points(10_000, 77)
        .into_iter()
        .map(|[x, y]| [3.0 + 2.0 * x, -1.0 + 0.6 * x + 0.8 * y])
        .collect();
    let env = fit_outlier_envelope(&pts, 0.01).unwrap();
    let rate = pts.iter().filter(|&&p| env.is_outlier(p)).count() as f64 / pts.len() as f64;
    let on_boundary: Vec<_> = pts.iter().filter(|&&p| env.squared_distance(p) == env.threshold).collect();
    let boundary_ok = !on_boundary.is_empty() && on_boundary.iter().all(|&&p| !env.is_outlier(p));
    verdict(
        &[("flag rate within 0.5 pp of 1%", (rate - 0.01).abs() <= 0.005), ("boundary points are inliers", boundary_ok)],
        format!("flag rate {:.3}%, {} training points on the boundary", 100.0 * rate, on_boundary.len()),
    )
}

/// Deterministic pseudo-random objective keyed by canonical SMILES.
fn toy(salt: u64) -> impl FnMut(&Molecule) -> f64 {
    move |m| {
        let mut h = salt ^ 0xcbf2_9ce4_8422_2325;
        for b in canonical_key(m).bytes() {
            h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
        }
        (h >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn budget_protocol() -> Verdict {
    let d = support::fixture();
    let scorer = TaskScorer::new(task_by_name("reactivity_activation").unwrap(), support::reactivity_context(&d));

    // Direct contention on one budget from 16 threads.
    let budget = Budget::new(5000, CountMode::AllProposals);
    let granted: usize = thread::scope(|s| {
        let handles: Vec<_> = (0..16)
            .map(|t| {
                let budget = &budget;
                s.spawn(move || (0..1000).filter(|i| budget.try_consume(&format!("{t}/{i}")).is_ok()).count())
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).sum()
    });
    // A 16-worker evaluator draining a budget smaller than the batch.
    let evaluator = Evaluator::new(Arc::new(support::fixture_provider(&d)), 16);
    let batch: Vec<Molecule> = d.molecules().into_iter().cycle().take(700).collect();
    let run_budget = Budget::new(613, CountMode::AllProposals);
    let out = evaluator.evaluate("stress", &batch, &scorer, &run_budget).unwrap();
    let stress_ok = granted == 5000
        && budget.consumed() == 5000
        && out.records.len() == 613
        && run_budget.consumed() == 613;

    // Whole benchmark runs, twice each, with different worker counts.
    let mut reproducible = true;
    for opt in OptimizerKind::ALL {
        let mut cfg = BenchmarkConfig::new(opt);
        cfg.repetitions = 2;
        cfg.max_proposals = 200;
        cfg.population = Some(25);
        cfg.iterations = Some(10);
        let a = run_benchmark(&scorer, &d, &Evaluator::new(Arc::new(support::fixture_provider(&d)), 1), &cfg).unwrap();
        let b = run_benchmark(&scorer, &d, &Evaluator::new(Arc::new(support::fixture_provider(&d)), 8), &cfg).unwrap();
        reproducible &= a.traces == b.traces && a.report.to_json_line() == b.report.to_json_line();
    }

    let mols = common::small();
    let mut monotone = 0;
    for k in 0..50u64 {
        let seeds: Vec<Molecule> = common::random_order(mols.len(), k).into_iter().take(12).map(|i| mols[i].clone()).collect();
        let run = || {
            if k % 2 == 0 {
                let cfg = GaConfig { population_size: 16, iterations: 5, rng_seed: k, ..GaConfig::default() };
                run_ga(&seeds, &seeds, &mut FnOracle::new(150, toy(k)), &cfg)
            } else {
                let cfg = MarkovHcConfig { batch_size: 20, iterations: 5, rng_seed: k, ..MarkovHcConfig::default() };
                run_markov_hc(&seeds, &seeds[..2], &mut FnOracle::new(150, toy(k)), &cfg).unwrap()
            }
        };
        let trace = run();
        reproducible &= run() == trace;
        monotone += trace.best_so_far.windows(2).all(|w| w[1] >= w[0]) as usize;
    }
    verdict(
        &[
            ("16-worker stress consumes exactly the maximum", stress_ok),
            ("traces reproducible", reproducible),
            ("best-so-far non-decreasing", monotone == 50),
        ],
        format!("{granted}/5000 granted, {}/613 evaluated, {monotone}/50 monotone toy runs", out.records.len()),
    )
}

fn end_to_end() -> Verdict {
    let start = Instant::now();
    let d = support::fixture();
    let task = task_by_name("reactivity_activation").unwrap();
    let ctx = support::reactivity_context(&d);

    // Exhaustive optimum straight from the fixture rows.
    let direct: Vec<f64> = (0..d.len())
        .map(|i| evaluate_task(&d.entries[i].molecule, &task, &d.property_map(i), &ctx).unwrap_or(PENALTY_FITNESS))
        .collect();
    let optimum = direct.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let scorer = TaskScorer::new(task.clone(), ctx.clone());
    let evaluator = Evaluator::new(Arc::new(support::fixture_provider(&d)), 4);
    let mut cfg = BenchmarkConfig::new(OptimizerKind::Ga);
    cfg.repetitions = 3;
    cfg.max_proposals = 300;
    cfg.iterations = Some(5);
    let out = run_benchmark(&scorer, &d, &evaluator, &cfg).unwrap();
    let exact = out.report.reps.iter().all(|r| r.best_fitness == optimum) && out.report.mean_best == optimum;

    let violating: Vec<&str> = d
        .entries
        .iter()
        .zip(&direct)
        .filter(|(_, &f)| f == PENALTY_FITNESS)
        .map(|(e, _)| e.canonical_key.as_str())
        .collect();
    let records: Vec<_> = out.records.iter().flatten().collect();
    let mut penalised = 0;
    for key in &violating {
        let rs: Vec<_> = records.iter().filter(|r| r.canonical_key == *key).collect();
        penalised += (!rs.is_empty()
            && rs.iter().all(|r| r.fitness == PENALTY_FITNESS && r.status == RecordStatus::ConstraintFail))
            as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        &[
            ("budget covers the fixture", cfg.max_proposals as usize >= d.len()),
            ("best equals exhaustive optimum", exact),
            ("violating fixtures get the penalty", !violating.is_empty() && penalised == violating.len()),
        ],
        format!(
            "optimum {optimum}, reported {}, {penalised}/{} violating fixtures penalised, {secs:.2} s",
            out.report.mean_best,
            violating.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("scharber_pipeline", scharber_pipeline),
        ("score_shaping", score_shaping),
        ("diversity", diversity_oracle_match),
        ("selfies_totality", selfies_totality),
        ("matcher_oracle", matcher_oracle),
        ("outlier_envelope", outlier_envelope),
        ("budget_protocol", budget_protocol),
        ("end_to_end", end_to_end),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let v = panic::catch_unwind(check).unwrap_or_else(|e| Verdict {
            pass: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>().map(String::as_str).or(e.downcast_ref::<&str>().copied()).unwrap_or("?")
            ),
        });
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += !v.pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
