//! Core of the Tartarus benchmarking harness.
//!
//! Everything here is `no_std` (with `alloc`): molecular graphs and SMILES,
//! the SELFIES codec and its mutation operators, substructure filter banks,
//! fingerprints and descriptors, the benchmark objective functions, and the
//! reference optimizers. File formats, processes and the CLI live in the
//! `tartarus-bench` crate.

#![no_std]
// `!(x > y)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod mol;
pub mod selfies;
pub mod descriptors;
pub mod pattern;
pub mod objectives;
pub mod optimizers;
