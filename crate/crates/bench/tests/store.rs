mod support;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use tartarus_bench::run::BenchmarkOutcome;
use tartarus_bench::store::STORE_FILE_NAME;
use tartarus_bench::{run_benchmark, BenchmarkConfig, Evaluator, EvaluationRecord, OptimizerKind, Store, TaskScorer};
use tartarus_core::objectives::task_by_name;

use support::{fixture, fixture_provider, reactivity_context, Counting};

struct Stats {
    hits: u64,
    misses: u64,
    provider_calls: usize,
}

fn run_with_store(path: &Path) -> (BenchmarkOutcome, Vec<EvaluationRecord>, Stats) {
    let d = fixture();
    let scorer = TaskScorer::new(task_by_name("reactivity_activation").unwrap(), reactivity_context(&d));
    let provider = Arc::new(Counting::new(fixture_provider(&d)));
    let (evaluator, old) = Evaluator::new(provider.clone(), 4).with_store(path).unwrap();
    let mut cfg = BenchmarkConfig::new(OptimizerKind::Ga);
    cfg.repetitions = 2;
    cfg.max_proposals = 150;
    cfg.iterations = Some(10);
    cfg.population = Some(20);
    let out = run_benchmark(&scorer, &d, &evaluator, &cfg).unwrap();
    let stats = Stats {
        hits: evaluator.cache_hits(),
        misses: evaluator.cache_misses(),
        provider_calls: provider.calls(),
    };
    (out, old, stats)
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

fn without_wall(mut r: EvaluationRecord) -> EvaluationRecord {
    r.wall_seconds = 0.0;
    r
}

#[test]
fn torn_tail_is_truncated_on_open() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested").join(STORE_FILE_NAME);
    run_with_store(&path);
    let intact = fs::read(&path).unwrap();
    let n = lines(&path).len();
    assert_eq!(n, 150 * 2);

    fs::OpenOptions::new().append(true).open(&path).unwrap().write_all(b"{\"seq\": 300, \"run\": \"tr").unwrap();
    let (_, records) = Store::open(&path).unwrap();
    assert_eq!(records.len(), n);
    assert_eq!(fs::read(&path).unwrap(), intact);
    assert!(records.iter().enumerate().all(|(i, r)| r.seq == i as u64));
}

#[test]
fn corrupt_line_drops_it_and_everything_after() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(STORE_FILE_NAME);
    run_with_store(&path);
    let mut all = lines(&path);
    all[10] = "not json".into();
    fs::write(&path, all.join("\n") + "\n").unwrap();
    let (mut store, records) = Store::open(&path).unwrap();
    assert_eq!(records.len(), 10);
    let mut next = records[0].clone();
    store.append(&mut next).unwrap();
    assert_eq!(next.seq, 10);
    assert_eq!(lines(&path).len(), 11);
}

#[test]
fn interrupted_run_resumes_to_the_same_store() {
    let dir = tempfile::tempdir().unwrap();
    let reference = dir.path().join("reference.jsonl");
    let (full, _, stats) = run_with_store(&reference);
    assert!(stats.misses > 0 && stats.provider_calls > 0);

    for cut in [0, 1, 75, 150, 151, 299] {
        let path = dir.path().join(format!("cut{cut}.jsonl"));
        let mut kept = lines(&reference)[..cut].join("\n");
        if cut > 0 {
            kept.push('\n');
        }
        kept.push_str("{\"seq\":");
        fs::write(&path, kept).unwrap();

        let (resumed, old, resumed_stats) = run_with_store(&path);
        assert_eq!(old.len(), cut);
        assert_eq!((resumed_stats.hits, resumed_stats.misses), (stats.hits, stats.misses));
        assert_eq!(resumed.report, full.report, "cut at {cut}");
        let a: Vec<_> = Store::open(&reference).unwrap().1.into_iter().map(without_wall).collect();
        let b: Vec<_> = Store::open(&path).unwrap().1.into_iter().map(without_wall).collect();
        assert_eq!(a, b, "cut at {cut}");
    }
}

#[test]
fn complete_store_replays_without_provider_calls() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(STORE_FILE_NAME);
    let (first, _, a) = run_with_store(&path);
    let before = fs::read(&path).unwrap();
    let (second, old, b) = run_with_store(&path);
    assert_eq!(old.len(), 300);
    assert_eq!(b.provider_calls, 0);
    assert_eq!((a.hits, a.misses), (b.hits, b.misses));
    assert_eq!(first.report, second.report);
    assert_eq!(fs::read(&path).unwrap(), before);
    let used: Vec<u64> = second.report.reps.iter().map(|r| r.budget_used).collect();
    assert_eq!(used, [150, 150]);
}
