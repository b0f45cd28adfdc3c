//! Substructure queries: a SMARTS subset, a subgraph matcher, and filter
//! banks that combine patterns with scalar descriptor rules.

mod bank;
mod matcher;
mod query;

pub use bank::{
    apply_filter_bank, docking_bank, emitter_bank, reactivity_bank, Comparator, FilterBank,
    FilterError, FilterVerdict, Rule, ScalarRule, TpsaMode,
};
pub use query::{compile_pattern, AtomPrim, BondPrim, Expr, PatternGraph, QueryBond};

use alloc::string::String;
use alloc::vec::Vec;

use crate::mol::Molecule;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("pattern syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unsupported pattern feature: {0}")]
    Unsupported(String),
}

/// True iff some injective map of query atoms onto atoms of `m` satisfies
/// every atom and bond predicate. Patterns naming hydrogen atoms are
/// matched against the molecule with all hydrogens made explicit; there a
/// wildcard may also land on a hydrogen.
pub fn has_match(m: &Molecule, p: &PatternGraph) -> bool {
    find_match(m, p).is_some()
}

/// First embedding found, as target atom per query atom. Indices beyond
/// `m.atom_count()` refer to hydrogens added for explicit-hydrogen queries.
pub fn find_match(m: &Molecule, p: &PatternGraph) -> Option<Vec<usize>> {
    let target = matcher::Target::new(m, p.mentions_hydrogen_atoms());
    matcher::find_first(p, &target)
}

/// Number of distinct target atom sets covered by embeddings.
pub fn count_unique_matches(m: &Molecule, p: &PatternGraph) -> usize {
    let target = matcher::Target::new(m, p.mentions_hydrogen_atoms());
    let mut seen = alloc::collections::BTreeSet::new();
    matcher::search_all(p, &target, &mut |map| {
        let mut key = map.to_vec();
        key.sort_unstable();
        seen.insert(key);
        true
    });
    seen.len()
}
