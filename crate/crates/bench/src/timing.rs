//! Preconditioning and sampling cost of the reference generators.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use tartarus_core::optimizers::{ga_sample_unique, markov_sample_unique, GaOperators, MarkovHcConfig, MarkovModel};
use tartarus_core::selfies::encode;

use crate::dataset::Dataset;
use crate::run::{mean_sd, OptimizerKind};

#[derive(Debug, Clone, PartialEq)]
pub struct TimingConfig {
    pub repetitions: usize,
    /// Molecules used for preconditioning, taken from the training split.
    pub precondition_size: usize,
    /// Unique molecules requested per repetition.
    pub samples: usize,
    /// Draw limit, as a multiple of `samples`.
    pub attempt_factor: usize,
    pub base_seed: u64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            repetitions: 5,
            precondition_size: 1000,
            samples: 10_000,
            attempt_factor: 20,
            base_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub optimizer: OptimizerKind,
    pub precondition_seconds: Vec<f64>,
    pub sample_seconds: Vec<f64>,
    pub unique: Vec<usize>,
}

impl TimingRow {
    pub fn precondition_stats(&self) -> (f64, f64) {
        mean_sd(&self.precondition_seconds)
    }

    pub fn sample_stats(&self) -> (f64, f64) {
        mean_sd(&self.sample_seconds)
    }
}

pub fn run_timing(dataset: &Dataset, optimizer: OptimizerKind, cfg: &TimingConfig) -> TimingRow {
    let mut train = dataset.train_molecules();
    train.truncate(cfg.precondition_size);
    let max_attempts = cfg.samples.saturating_mul(cfg.attempt_factor.max(1));
    let mut row = TimingRow {
        optimizer,
        precondition_seconds: Vec::new(),
        sample_seconds: Vec::new(),
        unique: Vec::new(),
    };
    for r in 0..cfg.repetitions {
        let seed = cfg.base_seed + r as u64;
        let t0 = Instant::now();
        let keys = match optimizer {
            OptimizerKind::Ga => {
                let ops = GaOperators::precondition(&train);
                row.precondition_seconds.push(t0.elapsed().as_secs_f64());
                let t1 = Instant::now();
                let keys = ga_sample_unique(&ops, &train, cfg.samples, max_attempts, seed);
                row.sample_seconds.push(t1.elapsed().as_secs_f64());
                keys
            }
            OptimizerKind::MarkovHc => {
                let defaults = MarkovHcConfig::default();
                let encoded: Vec<_> = train.iter().filter_map(|m| encode(m).ok()).collect();
                let model = MarkovModel::train(defaults.order, defaults.smoothing, &encoded);
                row.precondition_seconds.push(t0.elapsed().as_secs_f64());
                let t1 = Instant::now();
                let keys = markov_sample_unique(&model, cfg.samples, max_attempts, seed);
                row.sample_seconds.push(t1.elapsed().as_secs_f64());
                keys
            }
        };
        row.unique.push(keys.len());
    }
    row
}

pub fn format_timing(rows: &[TimingRow]) -> String {
    let mut out = format!(
        "{:<10} {:>24} {:>24} {:>10}\n",
        "optimizer", "precondition s (mean±sd)", "sampling s (mean±sd)", "unique"
    );
    for r in rows {
        let (pm, ps) = r.precondition_stats();
        let (sm, ss) = r.sample_stats();
        let unique = r.unique.iter().min().copied().unwrap_or(0);
        out += &format!(
            "{:<10} {:>24} {:>24} {:>10}\n",
            r.optimizer.as_str(),
            format!("{pm:.4} ± {ps:.4}"),
            format!("{sm:.4} ± {ss:.4}"),
            unique
        );
    }
    out
}
