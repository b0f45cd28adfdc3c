//! Ring statistics, bridgehead/spiro atoms and conjugation.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::element::Element;
use super::molecule::Molecule;

#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionReport {
    pub n_rings: usize,
    pub max_ring_size: usize,
    /// 0 for acyclic molecules.
    pub min_ring_size: usize,
    pub n_bridgehead: usize,
    pub n_spiro: usize,
    /// Aromatic heavy atoms over heavy atoms.
    pub aromatic_fraction: f64,
    /// Conjugated heavy-heavy bonds over heavy-heavy bonds.
    pub conjugated_bond_fraction: f64,
}

pub fn perceive(m: &Molecule) -> PerceptionReport {
    let rings = m.rings().rings();
    let heavy = m.heavy_atom_count();
    let aromatic = m.atoms().iter().filter(|a| a.is_heavy() && a.aromatic).count();
    let heavy_bonds: Vec<usize> = (0..m.bonds().len())
        .filter(|&k| {
            let b = m.bond(k);
            m.atom(b.begin).is_heavy() && m.atom(b.end).is_heavy()
        })
        .collect();
    let conjugated = heavy_bonds.iter().filter(|&&k| is_conjugated(m, k)).count();
    PerceptionReport {
        n_rings: rings.len(),
        max_ring_size: rings.iter().map(|r| r.len()).max().unwrap_or(0),
        min_ring_size: rings.iter().map(|r| r.len()).min().unwrap_or(0),
        n_bridgehead: bridgehead_atoms(m).len(),
        n_spiro: spiro_atoms(m).len(),
        aromatic_fraction: ratio(aromatic, heavy),
        conjugated_bond_fraction: ratio(conjugated, heavy_bonds.len()),
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Atoms terminating a bridge: for every pair of SSSR rings that share a
/// path of two or more bonds, the two ends of the shared path. Ortho-fused
/// systems (one shared bond, as in naphthalene) have none.
pub fn bridgehead_atoms(m: &Molecule) -> BTreeSet<usize> {
    let rings = m.rings().rings();
    let mut out = BTreeSet::new();
    for i in 0..rings.len() {
        for j in (i + 1)..rings.len() {
            let shared: Vec<usize> = rings[i]
                .bonds
                .iter()
                .copied()
                .filter(|b| rings[j].bonds.contains(b))
                .collect();
            if shared.len() < 2 {
                continue;
            }
            // Path ends appear in exactly one shared bond.
            let mut seen: Vec<(usize, u8)> = Vec::new();
            for &k in &shared {
                let b = m.bond(k);
                for a in [b.begin, b.end] {
                    match seen.iter_mut().find(|(x, _)| *x == a) {
                        Some(entry) => entry.1 += 1,
                        None => seen.push((a, 1)),
                    }
                }
            }
            out.extend(seen.into_iter().filter(|&(_, c)| c == 1).map(|(a, _)| a));
        }
    }
    out
}

/// Atoms that are the only atom shared by some pair of SSSR rings.
pub fn spiro_atoms(m: &Molecule) -> BTreeSet<usize> {
    let rings = m.rings().rings();
    let mut out = BTreeSet::new();
    for i in 0..rings.len() {
        for j in (i + 1)..rings.len() {
            let mut shared = rings[i].atoms.iter().filter(|a| rings[j].atoms.contains(a));
            if let (Some(&a), None) = (shared.next(), shared.next()) {
                out.insert(a);
            }
        }
    }
    out
}

/// Aromatic bonds, multiple bonds, and single bonds whose two ends both
/// carry a multiple bond, aromatic ring membership or a lone pair (N, O, S).
pub fn is_conjugated(m: &Molecule, bond: usize) -> bool {
    let b = m.bond(bond);
    if b.order == super::BondOrder::Aromatic || b.kekule.is_multiple() {
        return true;
    }
    pi_capable(m, b.begin) && pi_capable(m, b.end)
}

fn pi_capable(m: &Molecule, atom: usize) -> bool {
    let a = m.atom(atom);
    if a.aromatic {
        return true;
    }
    if matches!(a.element, Element::N | Element::O | Element::S) && a.formal_charge <= 0 {
        return true;
    }
    m.neighbors(atom)
        .iter()
        .any(|nb| m.bond(nb.bond).kekule.is_multiple())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mol::parse_smiles;

    fn report(s: &str) -> PerceptionReport {
        perceive(&parse_smiles(s).unwrap())
    }

    #[test]
    fn benzene() {
        let r = report("c1ccccc1");
        assert_eq!(r.aromatic_fraction, 1.0);
        assert_eq!(r.max_ring_size, 6);
        assert_eq!(r.n_rings, 1);
        assert_eq!(r.n_bridgehead, 0);
    }

    #[test]
    fn bicyclooctane_bridgeheads() {
        assert_eq!(report("C1CC2CCC1CC2").n_bridgehead, 2);
        assert_eq!(report("C1CC2CCC1C2").n_bridgehead, 2);
        assert_eq!(report("C1C2CC3CC1CC(C2)C3").n_bridgehead, 4);
        assert_eq!(report("c1ccc2ccccc2c1").n_bridgehead, 0);
    }

    #[test]
    fn spiro() {
        let r = report("C1CCC2(C1)CCCC2");
        assert_eq!(r.n_spiro, 1);
        assert_eq!(r.n_bridgehead, 0);
        assert_eq!(report("c1ccc2ccccc2c1").n_spiro, 0);
    }

    #[test]
    fn conjugation() {
        assert_eq!(report("C=CC=C").conjugated_bond_fraction, 1.0);
        assert_eq!(report("CCCC").conjugated_bond_fraction, 0.0);
        let r = report("C=CCC=C");
        assert!((r.conjugated_bond_fraction - 0.5).abs() < 1e-12);
    }

    #[test]
    fn acyclic() {
        let r = report("CC(C)CO");
        assert_eq!((r.n_rings, r.n_bridgehead, r.n_spiro, r.min_ring_size), (0, 0, 0, 0));
    }
}
