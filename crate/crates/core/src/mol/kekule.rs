//! Localization of aromatic bonds into alternating single/double bonds.

use alloc::string::ToString;
use alloc::vec::Vec;

use super::element::Element;
use super::molecule::BondOrder;
use super::valence;
use super::MolError;

const STEP_LIMIT: usize = 1_000_000;

/// Rewrites every `Aromatic` entry of `orders` into `Single` or `Double` so
/// that each aromatic atom with one unit of free valence receives exactly one
/// double bond.
pub(crate) fn kekulize(
    elements: &[(Element, i8)],
    total_h: &[u8],
    edges: &[(usize, usize)],
    orders: &mut [BondOrder],
) -> Result<(), MolError> {
    let n = elements.len();
    let mut needs = alloc::vec![false; n];
    let mut has_aromatic = alloc::vec![false; n];
    let mut fixed_sum = alloc::vec![0u8; n];
    for (k, &(a, b)) in edges.iter().enumerate() {
        let v = orders[k].valence();
        fixed_sum[a] += v;
        fixed_sum[b] += v;
        if orders[k] == BondOrder::Aromatic {
            has_aromatic[a] = true;
            has_aromatic[b] = true;
        }
    }
    for i in 0..n {
        if !has_aromatic[i] {
            continue;
        }
        let (el, charge) = elements[i];
        let occupied = fixed_sum[i] + total_h[i];
        let target = valence::allowed_valences(el, charge)
            .into_iter()
            .find(|&v| v >= occupied)
            .unwrap_or(occupied);
        needs[i] = target > occupied;
    }

    // Candidate bonds: aromatic bonds between two atoms that both need a
    // double bond.
    let mut candidates: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); n];
    for (k, &(a, b)) in edges.iter().enumerate() {
        if orders[k] == BondOrder::Aromatic && needs[a] && needs[b] {
            candidates[a].push((b, k));
            candidates[b].push((a, k));
        }
    }
    let mut matched = alloc::vec![None::<usize>; n];
    let mut steps = 0usize;
    if !search(&needs, &candidates, &mut matched, &mut steps) {
        return Err(MolError::Kekulize(
            "no alternating assignment of aromatic bonds".to_string(),
        ));
    }
    for (k, order) in orders.iter_mut().enumerate() {
        if *order == BondOrder::Aromatic {
            let (a, _) = edges[k];
            *order = if matched[a] == Some(k) {
                BondOrder::Double
            } else {
                BondOrder::Single
            };
        }
    }
    Ok(())
}

fn search(
    needs: &[bool],
    candidates: &[Vec<(usize, usize)>],
    matched: &mut [Option<usize>],
    steps: &mut usize,
) -> bool {
    *steps += 1;
    if *steps > STEP_LIMIT {
        return false;
    }
    // Most constrained unmatched atom first.
    let mut best: Option<(usize, usize)> = None;
    for i in 0..needs.len() {
        if !needs[i] || matched[i].is_some() {
            continue;
        }
        let options = candidates[i]
            .iter()
            .filter(|&&(j, _)| matched[j].is_none())
            .count();
        if options == 0 {
            return false;
        }
        if best.is_none_or(|(_, o)| options < o) {
            best = Some((i, options));
        }
    }
    let Some((atom, _)) = best else {
        return true;
    };
    for &(other, bond) in &candidates[atom] {
        if matched[other].is_some() {
            continue;
        }
        matched[atom] = Some(bond);
        matched[other] = Some(bond);
        if search(needs, candidates, matched, steps) {
            return true;
        }
        matched[atom] = None;
        matched[other] = None;
    }
    false
}
