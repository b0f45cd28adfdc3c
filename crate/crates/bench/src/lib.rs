//! Runtime side of the Tartarus harness: property providers and their wire
//! protocol, the evaluation cache and store, budgets, datasets, benchmark
//! runs and reports. The command-line front end is the `bench` binary.

pub mod budget;
pub mod dataset;
pub mod evaluator;
pub mod oracle;
pub mod params;
pub mod protocol;
pub mod provider;
pub mod run;
pub mod spectrum;
pub mod store;
pub mod subprocess;
pub mod timing;

pub use budget::{Budget, BudgetExhausted, CountMode};
pub use dataset::{load_dataset, parse_dataset, Dataset, DatasetError};
pub use evaluator::{BatchOutcome, Evaluator, Scorer, Scoring};
pub use oracle::{TaskOracle, TaskScorer};
pub use params::Params;
pub use provider::{NullProvider, Provider, ProviderFailure, ProviderOutput};
pub use run::{run_benchmark, BenchmarkConfig, OptimizerKind, RunReport};
pub use store::{EvaluationRecord, RecordStatus, Store};
pub use subprocess::{SubprocessConfig, SubprocessProvider};
pub use timing::{run_timing, TimingConfig, TimingRow};
