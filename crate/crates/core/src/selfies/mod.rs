//! SELFIES: a molecular string in which every token sequence decodes to a
//! valid molecule.
//!
//! Tokens are bracketed symbols concatenated without separators, e.g.
//! `[C][=C][Branch1][C][F][O]`. Decoding follows the derivation rules of the
//! published grammar (atom, branch and ring states, base-16 length tokens,
//! rings formed after the main derivation). Capacities come from the shared
//! [`ValenceTable`](crate::mol::ValenceTable).

mod decode;
mod encode;
mod ops;
mod token;

use alloc::string::String;

pub use decode::{decode, decode_with_table};
pub use encode::encode;
pub use ops::{
    crossover, crossover_at, expand_dataset, mutate, mutate_with, randomized_smiles,
    ExpandConfig, MutationConfig, MutationMode,
};
pub use token::{default_alphabet, SelfiesSequence, Token};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SelfiesError {
    #[error("unknown SELFIES token '{0}'")]
    UnknownToken(String),
    #[error("unsupported element for SELFIES: {0}")]
    UnsupportedElement(String),
    #[error("branch or ring span {0} exceeds the three-token length encoding")]
    SpanTooLong(usize),
    #[error("no mutant satisfied the keep predicate")]
    PredicateNeverSatisfied,
}
