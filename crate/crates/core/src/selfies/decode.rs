use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::token::{SelfiesSequence, Token};
use crate::mol::{AtomSpec, BondOrder, Element, Molecule, MoleculeBuilder, SpecOrder, ValenceTable};

/// Decodes with the standard valence table. Total: every sequence yields a
/// molecule (the empty sequence yields the empty molecule).
pub fn decode(s: &SelfiesSequence) -> Molecule {
    decode_with_table(s, &ValenceTable::standard())
}

pub fn decode_with_table(s: &SelfiesSequence, table: &ValenceTable) -> Molecule {
    let mut graph = Graph::default();
    for fragment in s.tokens().split(|t| *t == Token::Dot) {
        let mut cursor = Cursor {
            tokens: fragment,
            pos: 0,
        };
        derive(&mut cursor, &mut graph, table, usize::MAX, 0, None);
    }
    graph.close_rings();
    graph.into_molecule()
}

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl Cursor<'_> {
    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).copied();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    /// Reads `n` index tokens as a base-16 number; missing tokens read as 0.
    fn read_index(&mut self, n: u8) -> usize {
        let mut q = 0usize;
        for _ in 0..n {
            let digit = self.next().map_or(0, |t| t.index_value());
            q = q * 16 + digit;
        }
        q
    }
}

struct DecodedAtom {
    element: Element,
    charge: i8,
    h: Option<u8>,
    plain: bool,
    capacity: u8,
}

#[derive(Default)]
struct Graph {
    atoms: Vec<DecodedAtom>,
    bonds: BTreeMap<(usize, usize), u8>,
    bond_count: Vec<u8>,
    rings: Vec<(usize, usize, u8)>,
}

impl Graph {
    fn add_atom(&mut self, token: Token, capacity: u8) -> usize {
        let Token::Atom {
            element, h, charge, ..
        } = token
        else {
            unreachable!("only atom tokens become atoms")
        };
        self.atoms.push(DecodedAtom {
            element,
            charge,
            h,
            plain: token.is_plain_atom(),
            capacity,
        });
        self.bond_count.push(0);
        self.atoms.len() - 1
    }

    fn add_bond(&mut self, a: usize, b: usize, order: u8) {
        self.bonds.insert((a.min(b), a.max(b)), order);
        self.bond_count[a] += order;
        self.bond_count[b] += order;
    }

    fn close_rings(&mut self) {
        let rings = core::mem::take(&mut self.rings);
        for (l, r, order) in rings {
            if l == r {
                continue;
            }
            let lfree = self.atoms[l].capacity as i16 - self.bond_count[l] as i16;
            let rfree = self.atoms[r].capacity as i16 - self.bond_count[r] as i16;
            if lfree <= 0 || rfree <= 0 {
                continue;
            }
            let order = (order as i16).min(lfree).min(rfree) as u8;
            let key = (l.min(r), l.max(r));
            match self.bonds.get(&key).copied() {
                Some(existing) => {
                    let new_order = (existing + order).min(3);
                    self.bonds.insert(key, new_order);
                    let delta = new_order - existing;
                    self.bond_count[l] += delta;
                    self.bond_count[r] += delta;
                }
                None => self.add_bond(l, r, order),
            }
        }
    }

    fn into_molecule(self) -> Molecule {
        let mut b = MoleculeBuilder::new();
        for a in &self.atoms {
            let mut spec = AtomSpec::new(a.element);
            spec.charge = a.charge;
            spec.hydrogens = if a.plain { None } else { Some(a.h.unwrap_or(0)) };
            b.add_atom(spec);
        }
        for (&(x, y), &order) in &self.bonds {
            let order = BondOrder::from_valence(order).expect("orders are 1..=3");
            b.add_bond(x, y, SpecOrder::Explicit(order));
        }
        b.build()
            .expect("decoded graphs respect the valence table by construction")
    }
}

/// One derivation pass. Returns the number of tokens consumed.
fn derive(
    cursor: &mut Cursor<'_>,
    graph: &mut Graph,
    table: &ValenceTable,
    max_derive: usize,
    init_state: u8,
    root: Option<usize>,
) -> usize {
    let mut n_derived = 0usize;
    let mut state = init_state;
    let mut prev = root;
    while n_derived < max_derive {
        let Some(token) = cursor.next() else { break };
        n_derived += 1;
        let next_state: Option<u8> = match token {
            Token::Branch { order, length } => {
                if state <= 1 {
                    Some(state)
                } else {
                    let binit = (state - 1).min(order);
                    let q = cursor.read_index(length);
                    n_derived += length as usize;
                    n_derived += derive(cursor, graph, table, q + 1, binit, prev);
                    Some(state - binit)
                }
            }
            Token::Ring { order, length } => {
                if state == 0 {
                    Some(state)
                } else {
                    let ring_order = order.min(state);
                    let left = state - ring_order;
                    let q = cursor.read_index(length);
                    n_derived += length as usize;
                    let here = prev.expect("positive state implies a previous atom");
                    let target = here.saturating_sub(q + 1);
                    graph.rings.push((target, here, ring_order));
                    if left == 0 {
                        None
                    } else {
                        Some(left)
                    }
                }
            }
            Token::Dot => {
                // Fragments are split before derivation; a stray dot ends
                // the chain.
                None
            }
            Token::Atom { bond, .. } => {
                let cap = token.capacity(table).unwrap_or(0).max(0) as u8;
                let order = if state == 0 { 0 } else { bond.min(state).min(cap) };
                let left = cap - order;
                if order == 0 {
                    if state == 0 {
                        prev = Some(graph.add_atom(token, cap));
                    }
                } else {
                    let idx = graph.add_atom(token, cap);
                    graph.add_bond(prev.expect("bonded atom has a predecessor"), idx, order);
                    prev = Some(idx);
                }
                if left == 0 {
                    None
                } else {
                    Some(left)
                }
            }
        };
        match next_state {
            Some(s) => state = s,
            None => break,
        }
    }
    // Tokens of an exhausted chain are consumed but ignored.
    while n_derived < max_derive {
        if cursor.next().is_none() {
            break;
        }
        n_derived += 1;
    }
    n_derived
}
