//! Cache-first, budgeted, parallel evaluation of proposal batches.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::Path;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use std::thread;

use tartarus_core::mol::{canonical_key, Molecule};
use tartarus_core::objectives::PropertyMap;

use crate::budget::Budget;
use crate::protocol::TaggedValue;
use crate::provider::{Provider, ProviderFailure};
use crate::store::{tag_values, EvaluationRecord, RecordStatus, Store, StoreError};

/// Outcome of scoring one molecule.
#[derive(Debug, Clone, PartialEq)]
pub struct Scoring {
    pub status: RecordStatus,
    pub fitness: f64,
    pub passes_filters: bool,
    pub error: Option<String>,
}

/// Turns provider values into a fitness. Everything that influences the
/// result besides the molecule must be reflected in `fingerprint`, since
/// results are cached under (canonical key, fingerprint).
pub trait Scorer: Sync {
    fn fingerprint(&self) -> String;
    fn properties(&self) -> Vec<String>;
    /// Decides without the provider, e.g. a structural constraint failure.
    fn precheck(&self, m: &Molecule) -> Option<Scoring>;
    fn score(&self, m: &Molecule, values: &PropertyMap) -> Scoring;
    fn on_failure(&self, m: &Molecule, failure: &ProviderFailure) -> Scoring;
}

#[derive(Debug, Clone, PartialEq)]
struct CachedResult {
    values: BTreeMap<String, TaggedValue>,
    scoring: Scoring,
    wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    /// One record per admitted proposal, in proposal order.
    pub records: Vec<EvaluationRecord>,
    /// Set when the budget refused part (or all) of the batch.
    pub exhausted: bool,
}

type CacheCell = Arc<OnceLock<CachedResult>>;

pub struct Evaluator {
    provider: Arc<dyn Provider>,
    workers: usize,
    cache: Mutex<HashMap<(String, String), CacheCell>>,
    store: Option<Mutex<Store>>,
    replay: Mutex<HashMap<String, VecDeque<EvaluationRecord>>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl Evaluator {
    pub fn new(provider: Arc<dyn Provider>, workers: usize) -> Evaluator {
        Evaluator {
            provider,
            workers: workers.max(1),
            cache: Mutex::new(HashMap::new()),
            store: None,
            replay: Mutex::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    /// Same provider and worker count, fresh empty cache, no store.
    pub fn isolated(&self) -> Evaluator {
        Evaluator::new(self.provider.clone(), self.workers)
    }

    /// Attaches a persistent store, warming the cache from its records.
    /// Returns the records that were already on disk.
    ///
    /// Stored records also form a replay log per run: when a run with the
    /// same id proposes the same molecules again (a restart after a crash),
    /// the logged records are returned as they are instead of new ones, so
    /// the store ends up as if the run had never been interrupted.
    pub fn with_store(mut self, path: impl AsRef<Path>) -> Result<(Evaluator, Vec<EvaluationRecord>), StoreError> {
        let (store, records) = Store::open(path)?;
        {
            let mut cache = self.cache.lock().expect("cache poisoned");
            for r in &records {
                let cell = cache
                    .entry((r.canonical_key.clone(), r.fingerprint.clone()))
                    .or_default();
                let _ = cell.set(CachedResult {
                    values: r.values.clone(),
                    scoring: Scoring {
                        status: r.status,
                        fitness: r.fitness,
                        passes_filters: r.passes_filters,
                        error: r.error.clone(),
                    },
                    wall_seconds: r.wall_seconds,
                });
            }
        }
        {
            let mut replay = self.replay.lock().expect("replay poisoned");
            for r in &records {
                replay.entry(r.run.clone()).or_default().push_back(r.clone());
            }
        }
        self.store = Some(Mutex::new(store));
        Ok((self, records))
    }

    pub fn cache_hits(&self) -> u64 {
        self.hits.load(Ordering::SeqCst)
    }

    pub fn cache_misses(&self) -> u64 {
        self.misses.load(Ordering::SeqCst)
    }

    pub fn cached_entries(&self) -> usize {
        self.cache.lock().expect("cache poisoned").len()
    }

    /// Evaluates `batch` for `run`. Budget is charged in proposal order, so
    /// the admitted proposals are always a prefix of the batch; they are then
    /// computed in parallel and appended to the store before returning.
    pub fn evaluate(
        &self,
        run: &str,
        batch: &[Molecule],
        scorer: &dyn Scorer,
        budget: &Budget,
    ) -> Result<BatchOutcome, StoreError> {
        let fingerprint = scorer.fingerprint();
        let props = scorer.properties();
        let mut admitted: Vec<(String, u64)> = Vec::new();
        let mut exhausted = budget.wall_exceeded();
        if !exhausted {
            for m in batch {
                let key = canonical_key(m);
                match budget.try_consume(&key) {
                    Ok(total) => admitted.push((key, total)),
                    Err(_) => {
                        exhausted = true;
                        break;
                    }
                }
            }
        }

        let mut replayed: Vec<Option<EvaluationRecord>> = vec![None; admitted.len()];
        {
            let mut replay = self.replay.lock().expect("replay poisoned");
            if let Some(log) = replay.get_mut(run) {
                for (i, (key, _)) in admitted.iter().enumerate() {
                    match log.front() {
                        Some(r) if &r.canonical_key == key && r.fingerprint == fingerprint => {
                            replayed[i] = log.pop_front();
                        }
                        Some(_) => {
                            log::warn!("run {run} diverged from its stored log; continuing without replay");
                            log.clear();
                            break;
                        }
                        None => break,
                    }
                }
            }
        }

        let slots: Vec<OnceLock<(CachedResult, bool)>> = (0..admitted.len()).map(|_| OnceLock::new()).collect();
        let cursor = AtomicUsize::new(0);
        let work = || loop {
            let i = cursor.fetch_add(1, Ordering::SeqCst);
            if i >= admitted.len() {
                break;
            }
            if replayed[i].is_some() {
                continue;
            }
            let cell = {
                let mut cache = self.cache.lock().expect("cache poisoned");
                cache
                    .entry((admitted[i].0.clone(), fingerprint.clone()))
                    .or_default()
                    .clone()
            };
            let mut hit = true;
            let result = cell
                .get_or_init(|| {
                    hit = false;
                    self.compute(&batch[i], &admitted[i].0, &props, scorer)
                })
                .clone();
            let _ = slots[i].set((result, hit));
        };
        let n_threads = self.workers.min(admitted.len());
        if n_threads <= 1 {
            work();
        } else {
            thread::scope(|s| {
                for _ in 0..n_threads {
                    s.spawn(work);
                }
            });
        }

        let mut records = Vec::with_capacity(admitted.len());
        let mut fresh = Vec::with_capacity(admitted.len());
        for (((key, total), slot), old) in admitted.into_iter().zip(slots).zip(replayed) {
            if let Some(old) = old {
                let counter = if old.cache_hit { &self.hits } else { &self.misses };
                counter.fetch_add(1, Ordering::SeqCst);
                records.push(old);
                fresh.push(false);
                continue;
            }
            let (result, hit) = slot.into_inner().expect("every admitted slot is filled");
            if hit {
                self.hits.fetch_add(1, Ordering::SeqCst);
            } else {
                self.misses.fetch_add(1, Ordering::SeqCst);
            }
            records.push(EvaluationRecord {
                seq: 0,
                run: run.to_string(),
                canonical_key: key,
                fingerprint: fingerprint.clone(),
                values: result.values,
                status: result.scoring.status,
                fitness: result.scoring.fitness,
                passes_filters: result.scoring.passes_filters,
                error: result.scoring.error,
                wall_seconds: if hit { 0.0 } else { result.wall_seconds },
                cache_hit: hit,
                budget_after: total,
            });
            fresh.push(true);
        }
        if let Some(store) = &self.store {
            let mut store = store.lock().expect("store poisoned");
            for (r, _) in records.iter_mut().zip(&fresh).filter(|(_, &f)| f) {
                store.append(r)?;
            }
        }
        Ok(BatchOutcome { records, exhausted })
    }

    fn compute(&self, m: &Molecule, key: &str, props: &[String], scorer: &dyn Scorer) -> CachedResult {
        if let Some(scoring) = scorer.precheck(m) {
            return CachedResult {
                values: BTreeMap::new(),
                scoring,
                wall_seconds: 0.0,
            };
        }
        let out = self.provider.compute(key, props);
        match out.result {
            Ok(values) => CachedResult {
                scoring: scorer.score(m, &values),
                values: tag_values(&values),
                wall_seconds: out.wall_seconds,
            },
            Err(failure) => CachedResult {
                values: BTreeMap::new(),
                scoring: scorer.on_failure(m, &failure),
                wall_seconds: out.wall_seconds,
            },
        }
    }
}
