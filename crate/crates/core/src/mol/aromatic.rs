//! Huckel aromaticity over SSSR rings.
//!
//! Each ring atom contributes pi electrons from its Kekule environment:
//! one for a double bond that lies on a ring, zero for an exocyclic double
//! bond to N/O/S or an empty p orbital (B, C+), two for a lone pair (N, O, S,
//! P with only single bonds, C-). Atoms fitting none of these are not
//! sp2-capable and disqualify the ring. A ring with 4n+2 electrons is
//! aromatic. Fused pairs that fail individually are retried as a single
//! envelope (azulene-type systems).

use alloc::vec::Vec;

use super::element::Element;
use super::molecule::{Atom, Bond, BondOrder, Neighbor};
use super::rings::RingInfo;

pub(crate) fn perceive_aromaticity(
    atoms: &mut [Atom],
    bonds: &mut [Bond],
    adjacency: &[Vec<Neighbor>],
    rings: &RingInfo,
) {
    let ring_list = rings.rings();
    if ring_list.is_empty() {
        return;
    }
    let contributions: Vec<Option<u8>> = (0..atoms.len())
        .map(|i| pi_electrons(i, atoms, bonds, adjacency))
        .collect();

    let mut aromatic_ring = alloc::vec![false; ring_list.len()];
    for (r, ring) in ring_list.iter().enumerate() {
        aromatic_ring[r] = huckel(ring.atoms.iter().copied(), &contributions);
    }
    // Envelope check for fused pairs that are not aromatic on their own.
    let mut envelope_pairs = Vec::new();
    for r1 in 0..ring_list.len() {
        for r2 in (r1 + 1)..ring_list.len() {
            if aromatic_ring[r1] && aromatic_ring[r2] {
                continue;
            }
            let shared_bonds = ring_list[r1]
                .bonds
                .iter()
                .filter(|b| ring_list[r2].bonds.contains(b))
                .count();
            if shared_bonds != 1 {
                continue;
            }
            let mut union: Vec<usize> = ring_list[r1].atoms.clone();
            for &a in &ring_list[r2].atoms {
                if !union.contains(&a) {
                    union.push(a);
                }
            }
            if huckel(union.into_iter(), &contributions) {
                envelope_pairs.push((r1, r2));
            }
        }
    }
    for (r1, r2) in envelope_pairs {
        aromatic_ring[r1] = true;
        aromatic_ring[r2] = true;
    }

    for (r, ring) in ring_list.iter().enumerate() {
        if !aromatic_ring[r] {
            continue;
        }
        for &a in &ring.atoms {
            atoms[a].aromatic = true;
        }
        for &b in &ring.bonds {
            bonds[b].order = BondOrder::Aromatic;
        }
    }
}

fn huckel(atoms: impl Iterator<Item = usize>, contributions: &[Option<u8>]) -> bool {
    let mut total = 0u32;
    for a in atoms {
        match contributions[a] {
            Some(e) => total += e as u32,
            None => return false,
        }
    }
    total >= 2 && (total - 2).is_multiple_of(4)
}

fn pi_electrons(
    atom: usize,
    atoms: &[Atom],
    bonds: &[Bond],
    adjacency: &[Vec<Neighbor>],
) -> Option<u8> {
    let a = &atoms[atom];
    if !a.in_ring || !a.element.can_be_aromatic() {
        return None;
    }
    let connections = adjacency[atom].len() + a.total_h() as usize;
    let mut ring_double = false;
    let mut exo_double_to_heteroatom = false;
    for nb in &adjacency[atom] {
        let bond = &bonds[nb.bond];
        match bond.kekule {
            BondOrder::Triple => return None,
            BondOrder::Double => {
                if bond.in_ring {
                    ring_double = true;
                } else if matches!(atoms[nb.atom].element, Element::O | Element::N | Element::S) {
                    exo_double_to_heteroatom = true;
                } else {
                    return None;
                }
            }
            _ => {}
        }
    }
    if ring_double {
        return if connections <= 3 { Some(1) } else { None };
    }
    if exo_double_to_heteroatom {
        return if a.element == Element::C && connections <= 3 {
            Some(0)
        } else {
            None
        };
    }
    match (a.element, a.formal_charge) {
        (Element::N, 0) | (Element::P, 0) if connections <= 3 => Some(2),
        (Element::O, 0) | (Element::S, 0) if connections <= 2 => Some(2),
        (Element::C, -1) if connections <= 3 => Some(2),
        (Element::C, 1) if connections <= 3 => Some(0),
        (Element::B, 0) if connections <= 3 => Some(0),
        _ => None,
    }
}
