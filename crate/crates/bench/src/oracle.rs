//! Binds a benchmark task to the evaluator so optimizers can use it as an
//! [`Oracle`].

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};
use tartarus_core::mol::Molecule;
use tartarus_core::objectives::{
    evaluate_task, passes_bank, required_properties, PropertyMap, TaskContext, TaskDefinition,
};
use tartarus_core::optimizers::{Oracle, Scored};
use tartarus_core::pattern::apply_filter_bank;

use crate::budget::Budget;
use crate::evaluator::{Evaluator, Scorer, Scoring};
use crate::provider::ProviderFailure;
use crate::store::{EvaluationRecord, RecordStatus};

pub struct TaskScorer {
    task: TaskDefinition,
    ctx: TaskContext,
    fingerprint: String,
}

impl TaskScorer {
    pub fn new(task: TaskDefinition, ctx: TaskContext) -> TaskScorer {
        let mut h = Sha256::new();
        h.update(task.name.as_bytes());
        for p in required_properties(&task) {
            h.update(b"\0");
            h.update(p.as_bytes());
        }
        h.update(format!("{:?}", ctx).as_bytes());
        let digest = h.finalize();
        let fingerprint = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        TaskScorer {
            task,
            ctx,
            fingerprint,
        }
    }

    pub fn task(&self) -> &TaskDefinition {
        &self.task
    }

    pub fn context(&self) -> &TaskContext {
        &self.ctx
    }

    /// Filter verdict from structure alone, if the bank needs nothing else.
    fn structural_verdict(&self, m: &Molecule) -> Option<bool> {
        let bank = self.ctx.bank(self.task.bank);
        if !bank.external_descriptors().is_empty() {
            return None;
        }
        apply_filter_bank(m, bank, &BTreeMap::new()).ok().map(|v| v.pass)
    }
}

impl Scorer for TaskScorer {
    fn fingerprint(&self) -> String {
        self.fingerprint.clone()
    }

    fn properties(&self) -> Vec<String> {
        required_properties(&self.task).into_iter().map(String::from).collect()
    }

    fn precheck(&self, m: &Molecule) -> Option<Scoring> {
        // A structural constraint failure aborts before any simulation.
        if self.task.bank_gates && self.structural_verdict(m) == Some(false) {
            return Some(Scoring {
                status: RecordStatus::ConstraintFail,
                fitness: self.task.penalty_fitness,
                passes_filters: false,
                error: None,
            });
        }
        None
    }

    fn score(&self, m: &Molecule, values: &PropertyMap) -> Scoring {
        let failed = |e: String| Scoring {
            status: RecordStatus::ProviderError,
            fitness: self.task.penalty_fitness,
            passes_filters: false,
            error: Some(e),
        };
        let passes_filters = match passes_bank(m, &self.task, values, &self.ctx) {
            Ok(p) => p,
            Err(e) => return failed(e.to_string()),
        };
        match evaluate_task(m, &self.task, values, &self.ctx) {
            Ok(f) if f == self.task.penalty_fitness => Scoring {
                status: RecordStatus::ConstraintFail,
                fitness: f,
                passes_filters,
                error: None,
            },
            Ok(f) => Scoring {
                status: RecordStatus::Ok,
                fitness: f,
                passes_filters,
                error: None,
            },
            Err(e) => failed(e.to_string()),
        }
    }

    fn on_failure(&self, m: &Molecule, failure: &ProviderFailure) -> Scoring {
        Scoring {
            status: match failure {
                ProviderFailure::Timeout(_) => RecordStatus::Timeout,
                ProviderFailure::Error(_) => RecordStatus::ProviderError,
            },
            fitness: self.task.penalty_fitness,
            passes_filters: self.structural_verdict(m).unwrap_or(false),
            error: Some(failure.to_string()),
        }
    }
}

/// [`Oracle`] for one optimizer run. Keeps every record it produced.
pub struct TaskOracle<'a> {
    evaluator: &'a Evaluator,
    scorer: &'a TaskScorer,
    budget: &'a Budget,
    run: String,
    records: Vec<EvaluationRecord>,
    error: Option<String>,
}

impl<'a> TaskOracle<'a> {
    pub fn new(evaluator: &'a Evaluator, scorer: &'a TaskScorer, budget: &'a Budget, run: impl Into<String>) -> Self {
        TaskOracle {
            evaluator,
            scorer,
            budget,
            run: run.into(),
            records: Vec::new(),
            error: None,
        }
    }

    pub fn records(&self) -> &[EvaluationRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<EvaluationRecord> {
        self.records
    }

    /// First store failure, after which the oracle refuses further work.
    pub fn store_error(&self) -> Option<&str> {
        self.error.as_deref()
    }
}

impl Oracle for TaskOracle<'_> {
    fn evaluate(&mut self, batch: &[Molecule]) -> Vec<Scored> {
        if self.error.is_some() {
            return Vec::new();
        }
        match self.evaluator.evaluate(&self.run, batch, self.scorer, self.budget) {
            Ok(outcome) => {
                let scored = outcome
                    .records
                    .iter()
                    .map(|r| Scored {
                        fitness: r.fitness,
                        cumulative_budget: r.budget_after,
                    })
                    .collect();
                self.records.extend(outcome.records);
                scored
            }
            Err(e) => {
                log::error!("{e}");
                self.error = Some(e.to_string());
                Vec::new()
            }
        }
    }
}
