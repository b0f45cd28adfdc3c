//! Molecular graphs: SMILES in and out, valence model, rings, aromaticity
//! and the canonical key.

mod aromatic;
mod canon;
mod element;
mod kekule;
mod molecule;
mod perceive;
mod rings;
mod smiles;
mod valence;

use alloc::string::String;

pub use canon::{canonical_key, canonical_ranks};
pub use element::Element;
pub use molecule::{
    Atom, AtomSpec, Bond, BondOrder, BondSpec, BondStereo, Chirality, Molecule, MoleculeBuilder,
    Neighbor, SpecOrder,
};
pub use perceive::{bridgehead_atoms, is_conjugated, perceive, spiro_atoms, PerceptionReport};
pub use rings::{Ring, RingInfo};
pub use smiles::{parse_smiles, write_smiles, write_with_ranks};
pub use valence::{allowed_valences, implicit_hydrogens, max_valence, ValenceTable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MolError {
    #[error("SMILES syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("valence error at atom {atom}: {reason}")]
    Valence { atom: usize, reason: String },
    #[error("unsupported element '{0}'")]
    UnsupportedElement(String),
    #[error("cannot kekulize: {0}")]
    Kekulize(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}
