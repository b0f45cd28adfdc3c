//! The fitness boundary seen by optimizers.

use alloc::string::String;
use alloc::vec::Vec;

use crate::mol::{canonical_key, Molecule};

/// Result of evaluating one proposal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub fitness: f64,
    /// Budget consumed so far, including this proposal.
    pub cumulative_budget: u64,
}

/// Scores batches of proposals in order. When the budget runs out part way
/// the returned vector is a prefix of the batch.
pub trait Oracle {
    fn evaluate(&mut self, batch: &[Molecule]) -> Vec<Scored>;
}

/// Oracle backed by a function, with a hard proposal budget.
pub struct FnOracle<F> {
    f: F,
    max_proposals: u64,
    consumed: u64,
}

impl<F: FnMut(&Molecule) -> f64> FnOracle<F> {
    pub fn new(max_proposals: u64, f: F) -> Self {
        FnOracle {
            f,
            max_proposals,
            consumed: 0,
        }
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }
}

impl<F: FnMut(&Molecule) -> f64> Oracle for FnOracle<F> {
    fn evaluate(&mut self, batch: &[Molecule]) -> Vec<Scored> {
        let mut out = Vec::with_capacity(batch.len());
        for m in batch {
            if self.consumed >= self.max_proposals {
                break;
            }
            self.consumed += 1;
            out.push(Scored {
                fitness: (self.f)(m),
                cumulative_budget: self.consumed,
            });
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub proposal_index: usize,
    pub canonical_key: String,
    pub fitness: f64,
    pub cumulative_budget: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    IterationsDone,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub entries: Vec<TraceEntry>,
    /// Best fitness seen up to the end of each iteration (index 0 is the
    /// seed evaluation).
    pub best_so_far: Vec<f64>,
    pub stop: StopReason,
    /// Set when the configuration cannot produce new structures.
    pub degenerate: bool,
}

impl RunTrace {
    pub(crate) fn new() -> RunTrace {
        RunTrace {
            entries: Vec::new(),
            best_so_far: Vec::new(),
            stop: StopReason::IterationsDone,
            degenerate: false,
        }
    }

    pub fn best(&self) -> Option<&TraceEntry> {
        self.entries.iter().fold(None, |best: Option<&TraceEntry>, e| match best {
            Some(b) if b.fitness >= e.fitness => Some(b),
            _ => Some(e),
        })
    }

    pub fn proposals(&self) -> usize {
        self.entries.len()
    }

    /// Records scores for `batch` under `iteration`; returns the scored
    /// molecules with their keys.
    pub(crate) fn record(
        &mut self,
        iteration: usize,
        batch: &[Molecule],
        scores: &[Scored],
    ) -> Vec<(String, f64)> {
        let mut best = self.best_so_far.last().copied().unwrap_or(f64::NEG_INFINITY);
        let mut out = Vec::with_capacity(scores.len());
        for (m, s) in batch.iter().zip(scores) {
            let key = canonical_key(m);
            self.entries.push(TraceEntry {
                iteration,
                proposal_index: self.entries.len(),
                canonical_key: key.clone(),
                fitness: s.fitness,
                cumulative_budget: s.cumulative_budget,
            });
            if s.fitness > best {
                best = s.fitness;
            }
            out.push((key, s.fitness));
        }
        self.best_so_far.push(best);
        if scores.len() < batch.len() {
            self.stop = StopReason::BudgetExhausted;
        }
        out
    }
}
