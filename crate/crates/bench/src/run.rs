//! Repeated optimizer runs on one task, aggregated into a report row.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use tartarus_core::descriptors::{diversity_of_fingerprints, morgan_fingerprint};
use tartarus_core::mol::{parse_smiles, Molecule};
use tartarus_core::optimizers::{
    run_ga, run_markov_hc, GaConfig, MarkovHcConfig, OptimizerError, RunTrace, StopReason,
};

use crate::budget::{Budget, CountMode};
use crate::dataset::Dataset;
use crate::evaluator::Evaluator;
use crate::oracle::{TaskOracle, TaskScorer};
use crate::store::EvaluationRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    Ga,
    MarkovHc,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 2] = [OptimizerKind::Ga, OptimizerKind::MarkovHc];

    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Ga => "ga",
            OptimizerKind::MarkovHc => "markov-hc",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ga" => Ok(OptimizerKind::Ga),
            "markov-hc" | "markov" => Ok(OptimizerKind::MarkovHc),
            _ => Err(format!("unknown optimizer '{s}' (expected ga or markov-hc)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub optimizer: OptimizerKind,
    pub repetitions: usize,
    /// Repetition `r` runs with seed `base_seed + r`.
    pub base_seed: u64,
    pub max_proposals: u64,
    pub max_wall: Option<Duration>,
    pub count_mode: CountMode,
    /// Overrides the task's population (GA) or batch size (Markov-HC).
    pub population: Option<usize>,
    pub iterations: Option<usize>,
    pub ga: GaConfig,
    pub markov: MarkovHcConfig,
    /// Run repetitions concurrently with isolated caches instead of
    /// sequentially through the shared one.
    pub parallel_reps: bool,
}

impl BenchmarkConfig {
    pub fn new(optimizer: OptimizerKind) -> BenchmarkConfig {
        BenchmarkConfig {
            optimizer,
            repetitions: 5,
            base_seed: 0,
            max_proposals: 5000,
            max_wall: None,
            count_mode: CountMode::AllProposals,
            population: None,
            iterations: None,
            ga: GaConfig::default(),
            markov: MarkovHcConfig::default(),
            parallel_reps: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error("evaluation store failed: {0}")]
    Store(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepResult {
    pub seed: u64,
    pub best_fitness: f64,
    pub best_smiles: String,
    pub proposals: usize,
    pub budget_used: u64,
    pub stop: String,
    pub degenerate: bool,
}

/// Deterministic summary of all repetitions. Wall-clock figures are kept
/// out of it so that equal seeds give byte-identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub task: String,
    pub optimizer: OptimizerKind,
    pub repetitions: usize,
    pub reps: Vec<RepResult>,
    pub mean_best: f64,
    pub sd_best: f64,
    /// Fraction of all proposals passing the task's filter bank.
    pub success_rate: f64,
    /// Mean pairwise Tanimoto distance over the distinct proposals.
    pub diversity: f64,
    pub proposals: usize,
}

pub struct BenchmarkOutcome {
    pub report: RunReport,
    pub traces: Vec<RunTrace>,
    pub records: Vec<Vec<EvaluationRecord>>,
    pub wall_seconds: Vec<f64>,
}

pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn run_id(task: &str, optimizer: OptimizerKind, seed: u64) -> String {
    format!("{task}/{optimizer}/seed{seed}")
}

struct RepOutcome {
    result: RepResult,
    trace: RunTrace,
    records: Vec<EvaluationRecord>,
    wall: f64,
}

fn run_rep(
    scorer: &TaskScorer,
    dataset: &Dataset,
    train: &[Molecule],
    evaluator: &Evaluator,
    cfg: &BenchmarkConfig,
    seed: u64,
) -> Result<RepOutcome, RunError> {
    let task = scorer.task();
    let population = cfg.population.unwrap_or(task.population);
    let iterations = cfg.iterations.unwrap_or(task.iterations);
    let mut budget = Budget::new(cfg.max_proposals, cfg.count_mode);
    if let Some(w) = cfg.max_wall {
        budget = budget.with_wall_limit(w);
    }
    let run = run_id(task.name, cfg.optimizer, seed);
    let mut oracle = TaskOracle::new(evaluator, scorer, &budget, run.clone());
    let start = Instant::now();
    let trace = match cfg.optimizer {
        OptimizerKind::Ga => {
            let seeds = dataset.seeds_for(task, scorer.context(), population);
            let ga = GaConfig {
                population_size: population,
                iterations,
                rng_seed: seed,
                ..cfg.ga.clone()
            };
            run_ga(&seeds, train, &mut oracle, &ga)
        }
        OptimizerKind::MarkovHc => {
            let seeds = dataset.seeds_for(task, scorer.context(), cfg.markov.top_k.max(1));
            let hc = MarkovHcConfig {
                batch_size: population,
                iterations,
                rng_seed: seed,
                ..cfg.markov.clone()
            };
            run_markov_hc(train, &seeds, &mut oracle, &hc)?
        }
    };
    let wall = start.elapsed().as_secs_f64();
    if let Some(e) = oracle.store_error() {
        return Err(RunError::Store(e.to_string()));
    }
    let best = trace.best();
    log::info!("{run}: {} proposals, best {:?}", trace.proposals(), best.map(|b| b.fitness));
    let result = RepResult {
        seed,
        best_fitness: best.map_or(task.penalty_fitness, |b| b.fitness),
        best_smiles: best.map(|b| b.canonical_key.clone()).unwrap_or_default(),
        proposals: trace.proposals(),
        budget_used: budget.consumed(),
        stop: match trace.stop {
            StopReason::IterationsDone => "iterations_done".into(),
            StopReason::BudgetExhausted => "budget_exhausted".into(),
        },
        degenerate: trace.degenerate,
    };
    Ok(RepOutcome {
        result,
        trace,
        records: oracle.into_records(),
        wall,
    })
}

/// Runs `cfg.repetitions` repetitions with seeds `base_seed..` and
/// aggregates them. Sequential repetitions share `evaluator`'s cache, so
/// later ones may be cheaper.
pub fn run_benchmark(
    scorer: &TaskScorer,
    dataset: &Dataset,
    evaluator: &Evaluator,
    cfg: &BenchmarkConfig,
) -> Result<BenchmarkOutcome, RunError> {
    let train = dataset.train_molecules();
    let seeds: Vec<u64> = (0..cfg.repetitions).map(|r| cfg.base_seed + r as u64).collect();
    let outcomes: Vec<RepOutcome> = if cfg.parallel_reps {
        thread::scope(|s| {
            let handles: Vec<_> = seeds
                .iter()
                .map(|&seed| {
                    let train = &train;
                    s.spawn(move || run_rep(scorer, dataset, train, &evaluator.isolated(), cfg, seed))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("repetition panicked"))
                .collect::<Result<_, _>>()
        })?
    } else {
        seeds
            .iter()
            .map(|&seed| run_rep(scorer, dataset, &train, evaluator, cfg, seed))
            .collect::<Result<_, _>>()?
    };

    let mut reps = Vec::new();
    let mut traces = Vec::new();
    let mut records = Vec::new();
    let mut wall = Vec::new();
    for o in outcomes {
        reps.push(o.result);
        traces.push(o.trace);
        records.push(o.records);
        wall.push(o.wall);
    }
    let bests: Vec<f64> = reps.iter().map(|r| r.best_fitness).collect();
    let (mean_best, sd_best) = mean_sd(&bests);
    let all: Vec<&EvaluationRecord> = records.iter().flatten().collect();
    let passing = all.iter().filter(|r| r.passes_filters).count();
    let success_rate = if all.is_empty() {
        0.0
    } else {
        passing as f64 / all.len() as f64
    };
    let distinct: BTreeSet<&str> = all.iter().map(|r| r.canonical_key.as_str()).collect();
    let diversity = proposal_diversity(distinct.into_iter());
    Ok(BenchmarkOutcome {
        report: RunReport {
            task: scorer.task().name.to_string(),
            optimizer: cfg.optimizer,
            repetitions: cfg.repetitions,
            reps,
            mean_best,
            sd_best,
            success_rate,
            diversity,
            proposals: all.len(),
        },
        traces,
        records,
        wall_seconds: wall,
    })
}

/// Diversity of a set of SMILES; unparseable entries are skipped.
pub fn proposal_diversity<'a>(smiles: impl Iterator<Item = &'a str>) -> f64 {
    let fps: Vec<_> = smiles
        .filter_map(|s| parse_smiles(s).ok())
        .map(|m| morgan_fingerprint(&m))
        .collect();
    diversity_of_fingerprints(&fps).unwrap_or(0.0)
}

impl RunReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

pub const CSV_HEADER: &str = "task,optimizer,repetitions,mean_best,sd_best,success_rate,diversity,proposals";

pub fn to_csv_row(r: &RunReport) -> String {
    format!(
        "{},{},{},{:.6},{:.6},{:.6},{:.6},{}",
        r.task, r.optimizer, r.repetitions, r.mean_best, r.sd_best, r.success_rate, r.diversity, r.proposals
    )
}

/// Human-readable table, one row per report.
pub fn format_table(reports: &[RunReport]) -> String {
    let mut out = format!(
        "{:<26} {:<10} {:>22} {:>8} {:>9}\n",
        "task", "optimizer", "best (mean ± sd)", "SR", "diversity"
    );
    for r in reports {
        out += &format!(
            "{:<26} {:<10} {:>22} {:>8.3} {:>9.3}\n",
            r.task,
            r.optimizer.as_str(),
            format!("{:.3} ± {:.3}", r.mean_best, r.sd_best),
            r.success_rate,
            r.diversity
        );
    }
    out
}
