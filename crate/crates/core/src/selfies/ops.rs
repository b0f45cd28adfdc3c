//! Randomized operators: single-token mutation, single-point crossover,
//! randomized SMILES and the mutate-and-filter dataset expansion.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::token::{default_alphabet, SelfiesSequence, Token};
use super::{decode, encode, SelfiesError};
use crate::mol::{canonical_key, write_with_ranks, Molecule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationMode {
    /// Insertion, deletion or replacement, chosen uniformly among the ones
    /// applicable.
    Any,
    Insert,
    Delete,
    Replace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MutationConfig {
    pub mode: MutationMode,
    pub alphabet: Vec<Token>,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig {
            mode: MutationMode::Any,
            alphabet: default_alphabet(),
        }
    }
}

/// One random token edit with the default configuration.
pub fn mutate(s: &SelfiesSequence, rng_seed: u64) -> SelfiesSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    mutate_with(s, &MutationConfig::default(), &mut rng)
}

/// One token insertion, deletion or replacement at a uniformly chosen
/// position. Deleting from or replacing in an empty sequence falls back to
/// insertion. Replacement draws a token different from the current one
/// whenever the alphabet allows it.
pub fn mutate_with<R: Rng + ?Sized>(
    s: &SelfiesSequence,
    cfg: &MutationConfig,
    rng: &mut R,
) -> SelfiesSequence {
    let mut tokens: Vec<Token> = s.tokens().to_vec();
    let alphabet = &cfg.alphabet;
    if alphabet.is_empty() {
        return s.clone();
    }
    let mode = match cfg.mode {
        _ if tokens.is_empty() => MutationMode::Insert,
        MutationMode::Any => match rng.gen_range(0..3) {
            0 => MutationMode::Insert,
            1 => MutationMode::Delete,
            _ => MutationMode::Replace,
        },
        m => m,
    };
    match mode {
        MutationMode::Insert | MutationMode::Any => {
            let pos = rng.gen_range(0..=tokens.len());
            let t = alphabet[rng.gen_range(0..alphabet.len())];
            tokens.insert(pos, t);
        }
        MutationMode::Delete => {
            let pos = rng.gen_range(0..tokens.len());
            tokens.remove(pos);
        }
        MutationMode::Replace => {
            let pos = rng.gen_range(0..tokens.len());
            let current = tokens[pos];
            let choices: Vec<Token> = alphabet.iter().copied().filter(|t| *t != current).collect();
            if let Some(&t) = choices.choose(rng) {
                tokens[pos] = t;
            }
        }
    }
    SelfiesSequence::new(tokens)
}

/// Single-point crossover at a uniform cut in `0..=min(|a|, |b|)`.
pub fn crossover(a: &SelfiesSequence, b: &SelfiesSequence, rng_seed: u64) -> SelfiesSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let k = rng.gen_range(0..=a.len().min(b.len()));
    crossover_at(a, b, k)
}

/// Prefix `a[..k]` followed by suffix `b[k..]`; `k` is clamped to both
/// lengths.
pub fn crossover_at(a: &SelfiesSequence, b: &SelfiesSequence, k: usize) -> SelfiesSequence {
    let k = k.min(a.len()).min(b.len());
    let mut tokens: Vec<Token> = a.tokens()[..k].to_vec();
    tokens.extend_from_slice(&b.tokens()[k..]);
    SelfiesSequence::new(tokens)
}

/// `n` SMILES strings written from random atom orders.
pub fn randomized_smiles(m: &Molecule, n: usize, rng_seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    (0..n)
        .map(|_| {
            let ranks = random_order(m.atom_count(), &mut rng);
            write_with_ranks(m, &ranks)
        })
        .collect()
}

fn random_order<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandConfig {
    /// Random reorderings of every parent per cycle.
    pub reorderings: usize,
    /// Mutations of every reordering.
    pub mutations_per: usize,
    /// Stop once this many molecules are retained.
    pub target_size: usize,
    /// Hard bound on breadth-first cycles.
    pub max_cycles: usize,
}

impl Default for ExpandConfig {
    fn default() -> Self {
        ExpandConfig {
            reorderings: 20,
            mutations_per: 20,
            target_size: 1000,
            max_cycles: 100,
        }
    }
}

/// Breadth-first expansion around `seed`: every cycle reorders each parent
/// `reorderings` times, applies `mutations_per` single-token mutations to
/// each reordering, and keeps the unique (by canonical key) non-empty
/// mutants passing `keep`. Survivors become the next cycle's parents. The
/// seed itself is never part of the output.
///
/// Stops at `target_size`, after `max_cycles`, or when a cycle retains
/// nothing. Fails with [`SelfiesError::PredicateNeverSatisfied`] when that
/// happens before anything was retained.
pub fn expand_dataset<F>(
    seed: &Molecule,
    keep: F,
    cfg: &ExpandConfig,
    rng_seed: u64,
) -> Result<Vec<Molecule>, SelfiesError>
where
    F: Fn(&Molecule) -> bool,
{
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mutation = MutationConfig::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    seen.insert(canonical_key(seed));
    let mut out: Vec<Molecule> = Vec::new();
    if cfg.target_size == 0 {
        return Ok(out);
    }
    let mut frontier: Vec<Molecule> = alloc::vec![seed.clone()];
    for _ in 0..cfg.max_cycles {
        let mut next = Vec::new();
        for parent in &frontier {
            for _ in 0..cfg.reorderings {
                let order = random_order(parent.atom_count(), &mut rng);
                let reordered = parent.permuted(&order);
                let Ok(sequence) = encode(&reordered) else {
                    continue;
                };
                for _ in 0..cfg.mutations_per {
                    let child = decode(&mutate_with(&sequence, &mutation, &mut rng));
                    if child.is_empty() {
                        continue;
                    }
                    let key = canonical_key(&child);
                    if seen.contains(&key) || !keep(&child) {
                        continue;
                    }
                    seen.insert(key);
                    out.push(child.clone());
                    next.push(child);
                    if out.len() >= cfg.target_size {
                        return Ok(out);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    if out.is_empty() {
        Err(SelfiesError::PredicateNeverSatisfied)
    } else {
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use crate::mol::{parse_smiles, Element};

    fn seq(s: &str) -> SelfiesSequence {
        s.parse().unwrap()
    }

    #[test]
    fn replacement_on_single_atom() {
        let atoms: Vec<Token> = [Element::C, Element::N, Element::O, Element::F]
            .iter()
            .map(|&e| Token::atom(1, e))
            .collect();
        let cfg = MutationConfig {
            mode: MutationMode::Replace,
            alphabet: atoms,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let out = mutate_with(&seq("[C]"), &cfg, &mut rng);
            assert_eq!(out.len(), 1);
            let m = decode(&out);
            assert_eq!(m.heavy_atom_count(), 1);
            assert_ne!(m.atom(0).element, Element::C);
        }
    }

    #[test]
    fn mutation_is_deterministic_and_single_edit() {
        let s = seq("[C][C][=C][Branch1][C][O][N]");
        assert_eq!(mutate(&s, 7), mutate(&s, 7));
        for seed in 0..200 {
            let out = mutate(&s, seed);
            let d = out.len() as i64 - s.len() as i64;
            assert!(d.abs() <= 1);
            if d == 0 {
                let diffs = out.tokens().iter().zip(s.tokens()).filter(|(a, b)| a != b).count();
                assert_eq!(diffs, 1);
            }
        }
    }

    #[test]
    fn crossover_boundaries() {
        let a = seq("[C][C][C]");
        let b = seq("[O][N][F][Cl]");
        assert_eq!(crossover_at(&a, &b, 0), b);
        assert_eq!(crossover_at(&a, &b, 2).to_string(), "[C][C][F][Cl]");
        assert_eq!(crossover(&a, &b, 3), crossover(&a, &b, 3));
    }

    #[test]
    fn randomized_smiles_reparse() {
        assert_eq!(randomized_smiles(&parse_smiles("C").unwrap(), 1, 0), ["C"]);
        let m = parse_smiles("c1ccc2ccccc2c1O").unwrap();
        let key = canonical_key(&m);
        let out = randomized_smiles(&m, 5, 3);
        assert_eq!(out, randomized_smiles(&m, 5, 3));
        for s in out {
            assert_eq!(canonical_key(&parse_smiles(&s).unwrap()), key);
        }
    }

    #[test]
    fn expansion_bounds() {
        let seed = parse_smiles("CCO").unwrap();
        let one = ExpandConfig {
            reorderings: 1,
            mutations_per: 1,
            target_size: 100,
            max_cycles: 1,
        };
        let out = expand_dataset(&seed, |_| true, &one, 5).unwrap_or_default();
        assert!(out.len() <= 1);
        let never = expand_dataset(&seed, |_| false, &ExpandConfig { max_cycles: 2, ..ExpandConfig::default() }, 5);
        assert_eq!(never, Err(SelfiesError::PredicateNeverSatisfied));
        let cfg = ExpandConfig {
            target_size: 1,
            ..ExpandConfig::default()
        };
        assert_eq!(expand_dataset(&seed, |_| true, &cfg, 1).unwrap().len(), 1);
    }
}
