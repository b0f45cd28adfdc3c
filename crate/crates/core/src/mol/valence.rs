//! Default valence model shared by SMILES hydrogen inference and the SELFIES
//! codec.
//!
//! Allowed valences follow the isoelectronic rule: an atom with `e` valence
//! electrons after removing its formal charge forms `e` bonds when `e <= 4`
//! and `8 - e` bonds otherwise. Phosphorus and sulfur may additionally expand
//! their octet in steps of two.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::element::Element;

/// Allowed total valences (bond order sum plus hydrogens), ascending.
pub fn allowed_valences(element: Element, charge: i8) -> Vec<u8> {
    if element == Element::H {
        return if charge == 0 { alloc::vec![1] } else { alloc::vec![0] };
    }
    let electrons = element.valence_electrons() - charge;
    if !(0..=8).contains(&electrons) {
        return alloc::vec![0];
    }
    let base = if electrons <= 4 { electrons } else { 8 - electrons };
    let mut out = alloc::vec![base as u8];
    if matches!(element, Element::P | Element::S) {
        let mut v = base + 2;
        while v <= electrons {
            out.push(v as u8);
            v += 2;
        }
    }
    out
}

/// Largest bonding capacity (bonds plus hydrogens) of an atom.
pub fn max_valence(element: Element, charge: i8) -> u8 {
    allowed_valences(element, charge)
        .last()
        .copied()
        .unwrap_or(0)
}

/// Implicit hydrogen count for an unbracketed atom whose heavy bonds sum to
/// `bond_sum`, or `None` when no allowed valence can accommodate the bonds.
pub fn implicit_hydrogens(element: Element, charge: i8, bond_sum: u8) -> Option<u8> {
    allowed_valences(element, charge)
        .into_iter()
        .find(|&v| v >= bond_sum)
        .map(|v| v - bond_sum)
}

/// Element/charge to bonding capacity map consumed by the SELFIES decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValenceTable {
    capacities: BTreeMap<(Element, i8), u8>,
}

impl ValenceTable {
    /// Table for every supported element at charges -1, 0 and +1.
    pub fn standard() -> ValenceTable {
        let mut capacities = BTreeMap::new();
        for &el in Element::ALL.iter() {
            for charge in -1..=1 {
                let cap = max_valence(el, charge);
                if cap > 0 {
                    capacities.insert((el, charge), cap);
                }
            }
        }
        ValenceTable { capacities }
    }

    /// Bonding capacity for an element/charge pair. Pairs outside the table
    /// fall back to the isoelectronic rule.
    pub fn capacity(&self, element: Element, charge: i8) -> u8 {
        self.capacities
            .get(&(element, charge))
            .copied()
            .unwrap_or_else(|| max_valence(element, charge))
    }

    pub fn entries(&self) -> impl Iterator<Item = (Element, i8, u8)> + '_ {
        self.capacities.iter().map(|(&(e, c), &cap)| (e, c, cap))
    }
}

impl Default for ValenceTable {
    fn default() -> Self {
        ValenceTable::standard()
    }
}
