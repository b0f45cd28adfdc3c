//! Canonical atom ranking and the canonical string key.
//!
//! Ranks come from iterative refinement of atom invariants over neighbour
//! ranks. Remaining ties are broken by trying every member of the first tied
//! class and keeping the lexicographically smallest SMILES, which makes the
//! key independent of input atom order. The key is internal and is not meant
//! to agree with any other toolkit.

use alloc::string::String;
use alloc::vec::Vec;

use super::molecule::{BondOrder, Molecule};
use super::smiles::write_with_ranks;

/// Leaf budget for tie-break exploration. Highly symmetric graphs beyond it
/// fall back to the first explored leaf.
const MAX_LEAVES: usize = 4096;

pub fn canonical_key(m: &Molecule) -> String {
    canonical_form(m).1
}

/// Canonical rank per atom (0-based, all distinct).
pub fn canonical_ranks(m: &Molecule) -> Vec<usize> {
    canonical_form(m).0
}

fn canonical_form(m: &Molecule) -> (Vec<usize>, String) {
    let n = m.atom_count();
    if n == 0 {
        return (Vec::new(), String::new());
    }
    let initial: Vec<(u8, usize, u8, i8, bool)> = m
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            (
                a.element.atomic_number(),
                m.degree(i),
                a.total_h(),
                a.formal_charge,
                a.aromatic,
            )
        })
        .collect();
    let ranks = refine(m, dense_ranks(&initial));
    let mut best: Option<(Vec<usize>, String)> = None;
    let mut leaves = 0usize;
    search(m, ranks, &mut best, &mut leaves);
    best.expect("at least one leaf")
}

fn search(
    m: &Molecule,
    ranks: Vec<usize>,
    best: &mut Option<(Vec<usize>, String)>,
    leaves: &mut usize,
) {
    let n = ranks.len();
    let tied = first_tied_class(&ranks);
    let Some(class) = tied else {
        *leaves += 1;
        let s = write_with_ranks(m, &ranks);
        if best.as_ref().is_none_or(|(_, b)| s < *b) {
            *best = Some((ranks, s));
        }
        return;
    };
    for v in 0..n {
        if ranks[v] != class {
            continue;
        }
        if *leaves >= MAX_LEAVES && best.is_some() {
            return;
        }
        let split: Vec<usize> = (0..n)
            .map(|i| 2 * ranks[i] + usize::from(i != v && ranks[i] == class))
            .collect();
        let refined = refine(m, dense_ranks(&split));
        search(m, refined, best, leaves);
    }
}

fn first_tied_class(ranks: &[usize]) -> Option<usize> {
    let mut counts = alloc::vec![0usize; ranks.len()];
    for &r in ranks {
        counts[r] += 1;
    }
    counts.iter().position(|&c| c > 1)
}

fn dense_ranks<T: Ord + Clone>(keys: &[T]) -> Vec<usize> {
    let mut sorted: Vec<T> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("present"))
        .collect()
}

fn bond_code(order: BondOrder) -> u8 {
    match order {
        BondOrder::Single => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
    }
}

fn refine(m: &Molecule, mut ranks: Vec<usize>) -> Vec<usize> {
    let mut classes = count_classes(&ranks);
    loop {
        let signatures: Vec<(usize, Vec<(usize, u8)>)> = (0..ranks.len())
            .map(|i| {
                let mut nbs: Vec<(usize, u8)> = m
                    .neighbors(i)
                    .iter()
                    .map(|nb| (ranks[nb.atom], bond_code(m.bond(nb.bond).order)))
                    .collect();
                nbs.sort_unstable();
                (ranks[i], nbs)
            })
            .collect();
        let next = dense_ranks(&signatures);
        let next_classes = count_classes(&next);
        ranks = next;
        if next_classes == classes {
            return ranks;
        }
        classes = next_classes;
    }
}

fn count_classes(ranks: &[usize]) -> usize {
    let mut seen = alloc::vec![false; ranks.len()];
    let mut c = 0;
    for &r in ranks {
        if !seen[r] {
            seen[r] = true;
            c += 1;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mol::parse_smiles;

    fn key(s: &str) -> String {
        canonical_key(&parse_smiles(s).unwrap())
    }

    #[test]
    fn order_invariance() {
        assert_eq!(key("OCC"), key("CCO"));
        assert_eq!(key("c1ccccc1"), key("C1=CC=CC=C1"));
        assert_eq!(key("CC(=O)O"), key("OC(C)=O"));
        assert_ne!(key("CCO"), key("COC"));
    }

    #[test]
    fn ranks_are_permutation() {
        let m = parse_smiles("C1CC2CCC1CC2").unwrap();
        let mut r = canonical_ranks(&m);
        r.sort_unstable();
        assert_eq!(r, (0..m.atom_count()).collect::<Vec<_>>());
    }
}
