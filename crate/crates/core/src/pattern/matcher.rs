//! Backtracking subgraph matching of query patterns against molecules.

use alloc::vec::Vec;

use super::query::{AtomPrim, BondPrim, PatternGraph};
use crate::mol::{BondOrder, Element, Molecule};

/// Per-atom and per-bond properties a query can ask about. Built either
/// from the hydrogen-suppressed graph or with every hydrogen as an atom.
pub(crate) struct Target {
    element: Vec<Element>,
    aromatic: Vec<bool>,
    charge: Vec<i8>,
    total_h: Vec<u8>,
    implicit_h: Vec<u8>,
    ring_count: Vec<u8>,
    smallest_ring: Vec<u8>,
    adjacency: Vec<Vec<(usize, BondOrder, bool)>>,
}

impl Target {
    pub(crate) fn new(m: &Molecule, explicit_h: bool) -> Target {
        let n = m.atom_count();
        let rings = m.rings();
        let mut t = Target {
            element: m.atoms().iter().map(|a| a.element).collect(),
            aromatic: m.atoms().iter().map(|a| a.aromatic).collect(),
            charge: m.atoms().iter().map(|a| a.formal_charge).collect(),
            total_h: m.atoms().iter().map(|a| a.total_h()).collect(),
            implicit_h: m.atoms().iter().map(|a| a.total_h()).collect(),
            ring_count: (0..n).map(|i| rings.atom_ring_count(i)).collect(),
            smallest_ring: (0..n)
                .map(|i| rings.smallest_ring_containing(i).unwrap_or(0).min(255) as u8)
                .collect(),
            adjacency: (0..n)
                .map(|i| {
                    m.neighbors(i)
                        .iter()
                        .map(|nb| {
                            let b = m.bond(nb.bond);
                            (nb.atom, b.order, b.in_ring)
                        })
                        .collect()
                })
                .collect(),
        };
        // Hydrogen atoms present in the graph count towards their neighbour.
        for i in 0..n {
            if t.element[i] == Element::H {
                for &(j, _, _) in &t.adjacency[i] {
                    if t.element[j] != Element::H {
                        t.total_h[j] += 1;
                    }
                }
            }
        }
        if explicit_h {
            for i in 0..n {
                let h = t.implicit_h[i];
                t.implicit_h[i] = 0;
                for _ in 0..h {
                    let k = t.element.len();
                    t.element.push(Element::H);
                    t.aromatic.push(false);
                    t.charge.push(0);
                    t.total_h.push(0);
                    t.implicit_h.push(0);
                    t.ring_count.push(0);
                    t.smallest_ring.push(0);
                    t.adjacency.push(alloc::vec![(i, BondOrder::Single, false)]);
                    t.adjacency[i].push((k, BondOrder::Single, false));
                }
            }
        }
        t
    }

    fn len(&self) -> usize {
        self.element.len()
    }

    fn atom_matches(&self, i: usize, p: &AtomPrim) -> bool {
        match *p {
            AtomPrim::Any => true,
            AtomPrim::Element(el, aromatic) => {
                self.element[i] == el && aromatic.is_none_or(|a| a == self.aromatic[i])
            }
            AtomPrim::Aromatic(a) => self.aromatic[i] == a,
            AtomPrim::RingCount(None) => self.ring_count[i] > 0,
            AtomPrim::RingCount(Some(n)) => self.ring_count[i] == n,
            AtomPrim::SmallestRing(n) => self.smallest_ring[i] == n,
            AtomPrim::TotalConnections(n) => {
                self.adjacency[i].len() + self.implicit_h[i] as usize == n as usize
            }
            AtomPrim::ExplicitDegree(n) => self.adjacency[i].len() == n as usize,
            AtomPrim::TotalHydrogens(n) => self.total_h[i] == n,
            AtomPrim::Charge(c) => self.charge[i] == c,
        }
    }

    fn bond_between(&self, a: usize, b: usize) -> Option<(BondOrder, bool)> {
        self.adjacency[a]
            .iter()
            .find(|&&(j, _, _)| j == b)
            .map(|&(_, o, r)| (o, r))
    }
}

fn bond_matches(order: BondOrder, in_ring: bool, p: &BondPrim) -> bool {
    match *p {
        BondPrim::Any => true,
        BondPrim::Ring => in_ring,
        BondPrim::Order(o) => o == order,
    }
}

/// Matching plan: query atoms in an order where each atom after the first
/// is bonded to an earlier one.
struct Plan {
    order: Vec<usize>,
    /// For each position, the query bonds back to already placed atoms as
    /// (earlier query atom, bond index).
    back: Vec<Vec<(usize, usize)>>,
}

fn plan(p: &PatternGraph) -> Plan {
    let n = p.atoms.len();
    let mut placed = alloc::vec![false; n];
    let mut order = Vec::with_capacity(n);
    // Start from the most specific atom: fewest `Any` primitives is a cheap
    // proxy, ties broken by index.
    let start = (0..n)
        .min_by_key(|&i| matches!(p.atoms[i], super::query::Expr::Prim(AtomPrim::Any)) as u8)
        .unwrap_or(0);
    order.push(start);
    placed[start] = true;
    while order.len() < n {
        let next = p
            .bonds
            .iter()
            .find_map(|b| match (placed[b.a], placed[b.b]) {
                (true, false) => Some(b.b),
                (false, true) => Some(b.a),
                _ => None,
            })
            .expect("pattern is connected");
        placed[next] = true;
        order.push(next);
    }
    let position: Vec<usize> = {
        let mut pos = alloc::vec![0; n];
        for (k, &a) in order.iter().enumerate() {
            pos[a] = k;
        }
        pos
    };
    let mut back = alloc::vec![Vec::new(); n];
    for (bi, b) in p.bonds.iter().enumerate() {
        let (early, late) = if position[b.a] < position[b.b] {
            (b.a, b.b)
        } else {
            (b.b, b.a)
        };
        back[position[late]].push((early, bi));
    }
    Plan { order, back }
}

pub(crate) fn find_first(p: &PatternGraph, t: &Target) -> Option<Vec<usize>> {
    let mut found = None;
    search_all(p, t, &mut |m| {
        found = Some(m.to_vec());
        false
    });
    found
}

/// Calls `visit` with every embedding (query atom -> target atom) until it
/// returns false.
pub(crate) fn search_all(p: &PatternGraph, t: &Target, visit: &mut dyn FnMut(&[usize]) -> bool) {
    if p.atoms.len() > t.len() {
        return;
    }
    let plan = plan(p);
    let mut map = alloc::vec![usize::MAX; p.atoms.len()];
    let mut used = alloc::vec![false; t.len()];
    extend(p, t, &plan, 0, &mut map, &mut used, visit);
}

fn extend(
    p: &PatternGraph,
    t: &Target,
    plan: &Plan,
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if depth == plan.order.len() {
        return visit(map);
    }
    let q = plan.order[depth];
    let back = &plan.back[depth];
    let candidates: Vec<usize> = match back.first() {
        Some(&(anchor, _)) => t.adjacency[map[anchor]].iter().map(|&(j, _, _)| j).collect(),
        None => (0..t.len()).collect(),
    };
    for c in candidates {
        if used[c] || !p.atoms[q].eval(&|prim| t.atom_matches(c, prim)) {
            continue;
        }
        let bonds_ok = back.iter().all(|&(early, bi)| {
            t.bond_between(map[early], c).is_some_and(|(order, ring)| {
                p.bonds[bi].expr.eval(&|prim| bond_matches(order, ring, prim))
            })
        });
        if !bonds_ok {
            continue;
        }
        map[q] = c;
        used[c] = true;
        let keep_going = extend(p, t, plan, depth + 1, map, used, visit);
        used[c] = false;
        map[q] = usize::MAX;
        if !keep_going {
            return false;
        }
    }
    true
}
