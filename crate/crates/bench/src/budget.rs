//! Shared evaluation budget.

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountMode {
    /// Every proposal costs one unit, repeats and cache hits included.
    #[default]
    AllProposals,
    /// Only the first proposal of each canonical molecule costs a unit.
    UniqueOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("evaluation budget exhausted")]
pub struct BudgetExhausted;

#[derive(Debug)]
pub struct Budget {
    max_proposals: u64,
    max_wall: Option<Duration>,
    mode: CountMode,
    consumed: AtomicU64,
    seen: Mutex<HashSet<String>>,
    started: Instant,
}

impl Budget {
    pub fn new(max_proposals: u64, mode: CountMode) -> Budget {
        Budget {
            max_proposals,
            max_wall: None,
            mode,
            consumed: AtomicU64::new(0),
            seen: Mutex::new(HashSet::new()),
            started: Instant::now(),
        }
    }

    /// Adds a wall-clock limit. It is checked between batches, so a batch
    /// already admitted always completes.
    pub fn with_wall_limit(mut self, limit: Duration) -> Budget {
        self.max_wall = Some(limit);
        self
    }

    /// Rebuilds the state a run had after proposing `keys` in order.
    pub fn replayed<'a>(max_proposals: u64, mode: CountMode, keys: impl IntoIterator<Item = &'a str>) -> Budget {
        let b = Budget::new(max_proposals, mode);
        for k in keys {
            let _ = b.try_consume(k);
        }
        b
    }

    pub fn max_proposals(&self) -> u64 {
        self.max_proposals
    }

    pub fn mode(&self) -> CountMode {
        self.mode
    }

    pub fn consumed(&self) -> u64 {
        self.consumed.load(Ordering::SeqCst)
    }

    pub fn remaining(&self) -> u64 {
        self.max_proposals.saturating_sub(self.consumed())
    }

    pub fn wall_exceeded(&self) -> bool {
        self.max_wall.is_some_and(|w| self.started.elapsed() >= w)
    }

    pub fn is_exhausted(&self) -> bool {
        self.remaining() == 0 || self.wall_exceeded()
    }

    /// Charges one proposal of `key` and returns the consumed total.
    pub fn try_consume(&self, key: &str) -> Result<u64, BudgetExhausted> {
        match self.mode {
            CountMode::AllProposals => self.take_unit(),
            CountMode::UniqueOnly => {
                let mut seen = self.seen.lock().expect("budget poisoned");
                if seen.contains(key) {
                    return Ok(self.consumed());
                }
                let total = self.take_unit()?;
                seen.insert(key.to_string());
                Ok(total)
            }
        }
    }

    fn take_unit(&self) -> Result<u64, BudgetExhausted> {
        self.consumed
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |c| {
                (c < self.max_proposals).then_some(c + 1)
            })
            .map(|prev| prev + 1)
            .map_err(|_| BudgetExhausted)
    }
}
