//! SMILES reading and writing.
//!
//! Supported: organic-subset and bracket atoms (isotope, `@`/`@@`, H count,
//! charge, atom class), bonds `- = # : / \`, branches, ring closures (`0-9`,
//! `%nn`) and `.` separated components. Stereo marks are kept as annotations
//! and never written back.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use super::element::Element;
use super::molecule::{
    AtomSpec, BondOrder, BondStereo, Chirality, Molecule, MoleculeBuilder, SpecOrder,
};
use super::valence;
use super::MolError;

pub fn parse_smiles(text: &str) -> Result<Molecule, MolError> {
    Parser::new(text).parse()?.build()
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

struct PendingBond {
    order: SpecOrder,
    stereo: Option<BondStereo>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, message: &str) -> MolError {
        MolError::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<MoleculeBuilder, MolError> {
        if self.text.trim().is_empty() {
            return Err(self.err("empty SMILES"));
        }
        let mut builder = MoleculeBuilder::new();
        let mut prev: Option<usize> = None;
        let mut branches: Vec<usize> = Vec::new();
        let mut pending: Option<PendingBond> = None;
        let mut rings: BTreeMap<u32, (usize, Option<PendingBond>)> = BTreeMap::new();

        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    let Some(p) = prev else {
                        return Err(self.err("branch without a preceding atom"));
                    };
                    if pending.is_some() {
                        return Err(self.err("bond before branch"));
                    }
                    branches.push(p);
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return Err(self.err("dangling bond at branch end"));
                    }
                    let Some(p) = branches.pop() else {
                        return Err(self.err("unbalanced ')'"));
                    };
                    prev = Some(p);
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() {
                        return Err(self.err("dangling bond before '.'"));
                    }
                    if !branches.is_empty() {
                        return Err(self.err("'.' inside a branch"));
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' | b'$' => {
                    if pending.is_some() {
                        return Err(self.err("two consecutive bond symbols"));
                    }
                    if prev.is_none() {
                        return Err(self.err("bond without a preceding atom"));
                    }
                    let (order, stereo) = match c {
                        b'-' => (BondOrder::Single, None),
                        b'=' => (BondOrder::Double, None),
                        b'#' => (BondOrder::Triple, None),
                        b':' => (BondOrder::Aromatic, None),
                        b'/' => (BondOrder::Single, Some(BondStereo::Up)),
                        b'\\' => (BondOrder::Single, Some(BondStereo::Down)),
                        _ => return Err(self.err("quadruple bonds are not supported")),
                    };
                    pending = Some(PendingBond {
                        order: SpecOrder::Explicit(order),
                        stereo,
                    });
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(p) = prev else {
                        return Err(self.err("ring closure without a preceding atom"));
                    };
                    let label = self.ring_label()?;
                    match rings.remove(&label) {
                        Some((open_atom, open_bond)) => {
                            if open_atom == p {
                                return Err(self.err("ring closure to the same atom"));
                            }
                            let bond = merge_ring_bond(open_bond, pending.take())
                                .ok_or_else(|| self.err("conflicting ring closure bonds"))?;
                            if builder
                                .bonds
                                .iter()
                                .any(|b| (b.a == p && b.b == open_atom) || (b.a == open_atom && b.b == p))
                            {
                                return Err(self.err("ring closure duplicates an existing bond"));
                            }
                            builder.add_bond_with_stereo(open_atom, p, bond.order, bond.stereo);
                        }
                        None => {
                            rings.insert(label, (p, pending.take()));
                        }
                    }
                }
                _ => {
                    let spec = self.atom()?;
                    let idx = builder.add_atom(spec);
                    if let Some(p) = prev {
                        let bond = pending.take().unwrap_or(PendingBond {
                            order: SpecOrder::Implicit,
                            stereo: None,
                        });
                        builder.add_bond_with_stereo(p, idx, bond.order, bond.stereo);
                    } else if pending.is_some() {
                        return Err(self.err("bond without a preceding atom"));
                    }
                    prev = Some(idx);
                }
            }
        }
        if pending.is_some() {
            return Err(self.err("dangling bond at end of input"));
        }
        if !branches.is_empty() {
            return Err(self.err("unclosed branch"));
        }
        if let Some((label, _)) = rings.iter().next() {
            return Err(self.err(&alloc::format!("unclosed ring {}", label)));
        }
        Ok(builder)
    }

    fn ring_label(&mut self) -> Result<u32, MolError> {
        let c = self.peek().unwrap();
        if c == b'%' {
            self.pos += 1;
            let digits = self.bytes.get(self.pos..self.pos + 2);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 2;
                    Ok(((d[0] - b'0') * 10 + (d[1] - b'0')) as u32)
                }
                _ => Err(self.err("'%' must be followed by two digits")),
            }
        } else {
            self.pos += 1;
            Ok((c - b'0') as u32)
        }
    }

    fn atom(&mut self) -> Result<AtomSpec, MolError> {
        let c = self.peek().unwrap();
        if c == b'[' {
            return self.bracket_atom();
        }
        let rest = &self.text[self.pos..];
        let (symbol, aromatic, len) = if rest.starts_with("Cl") {
            ("Cl", false, 2)
        } else if rest.starts_with("Br") {
            ("Br", false, 2)
        } else {
            match c {
                b'B' => ("B", false, 1),
                b'C' => ("C", false, 1),
                b'N' => ("N", false, 1),
                b'O' => ("O", false, 1),
                b'P' => ("P", false, 1),
                b'S' => ("S", false, 1),
                b'F' => ("F", false, 1),
                b'I' => ("I", false, 1),
                b'b' => ("B", true, 1),
                b'c' => ("C", true, 1),
                b'n' => ("N", true, 1),
                b'o' => ("O", true, 1),
                b'p' => ("P", true, 1),
                b's' => ("S", true, 1),
                b'*' => {
                    return Err(MolError::UnsupportedElement("*".to_string()));
                }
                _ if c.is_ascii_alphabetic() => {
                    let end = rest
                        .char_indices()
                        .skip(1)
                        .find(|(_, ch)| !ch.is_ascii_lowercase())
                        .map(|(i, _)| i)
                        .unwrap_or(rest.len());
                    return Err(MolError::UnsupportedElement(rest[..end.min(2)].to_string()));
                }
                _ => return Err(self.err("unexpected character")),
            }
        };
        self.pos += len;
        let mut spec = AtomSpec::new(Element::from_symbol(symbol).unwrap());
        spec.aromatic = aromatic;
        Ok(spec)
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            self.text[start..self.pos].parse().ok()
        }
    }

    fn bracket_atom(&mut self) -> Result<AtomSpec, MolError> {
        self.pos += 1;
        let isotope = self.number().map(|n| n as u16);
        let rest = &self.text[self.pos..];
        let two: String = rest.chars().take(2).collect();
        let (element, aromatic, len) = if let Some(e) = ["Cl", "Br", "Si", "Sn"]
            .iter()
            .find(|s| two == **s)
            .and_then(|s| Element::from_symbol(s))
        {
            (e, false, 2)
        } else {
            let Some(c) = self.peek() else {
                return Err(self.err("unterminated bracket atom"));
            };
            match c {
                b'b' | b'c' | b'n' | b'o' | b'p' | b's' => {
                    let upper = (c as char).to_ascii_uppercase().to_string();
                    (Element::from_symbol(&upper).unwrap(), true, 1)
                }
                b'A'..=b'Z' => {
                    // Nothing after a bracket element symbol starts with a
                    // lowercase letter, so one here belongs to the symbol.
                    let mut sym = String::new();
                    sym.push(c as char);
                    if let Some(&n) = self.bytes.get(self.pos + 1) {
                        if n.is_ascii_lowercase() {
                            sym.push(n as char);
                        }
                    }
                    match Element::from_symbol(&sym) {
                        Some(e) => (e, false, sym.len()),
                        None => return Err(MolError::UnsupportedElement(sym)),
                    }
                }
                b'*' => return Err(MolError::UnsupportedElement("*".to_string())),
                _ => return Err(self.err("expected element symbol in bracket atom")),
            }
        };
        self.pos += len;
        let mut spec = AtomSpec::new(element);
        spec.aromatic = aromatic;
        spec.isotope = isotope;
        if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
                spec.chirality = Some(Chirality::Clockwise);
            } else {
                spec.chirality = Some(Chirality::Anticlockwise);
            }
        }
        let mut hydrogens = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hydrogens = self.number().unwrap_or(1) as u8;
        }
        spec.hydrogens = Some(hydrogens);
        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let s = if sign == b'+' { 1 } else { -1 };
            if let Some(n) = self.number() {
                charge = s * n as i32;
            } else {
                charge = s;
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    charge += s;
                }
            }
        }
        if !(-4..=4).contains(&charge) {
            return Err(self.err("formal charge outside [-4, +4]"));
        }
        spec.charge = charge as i8;
        if self.peek() == Some(b':') {
            self.pos += 1;
            if self.number().is_none() {
                return Err(self.err("atom class must be numeric"));
            }
        }
        if self.peek() != Some(b']') {
            return Err(self.err("expected ']'"));
        }
        self.pos += 1;
        Ok(spec)
    }
}

fn merge_ring_bond(open: Option<PendingBond>, close: Option<PendingBond>) -> Option<PendingBond> {
    match (open, close) {
        (None, None) => Some(PendingBond {
            order: SpecOrder::Implicit,
            stereo: None,
        }),
        (Some(b), None) | (None, Some(b)) => Some(b),
        (Some(a), Some(b)) => {
            if a.order == b.order {
                Some(a)
            } else {
                None
            }
        }
    }
}

/// SMILES in the molecule's own atom order (depth first from atom 0,
/// neighbours in index order).
pub fn write_smiles(m: &Molecule) -> String {
    let ranks: Vec<usize> = (0..m.atom_count()).collect();
    write_with_ranks(m, &ranks)
}

/// SMILES following a traversal priority: each component starts at its
/// lowest-ranked atom and neighbours are visited in ascending rank.
pub fn write_with_ranks(m: &Molecule, ranks: &[usize]) -> String {
    let n = m.atom_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (ranks[i], i));
    let mut visited = alloc::vec![false; n];
    let mut out = String::new();
    for &start in &order {
        if visited[start] {
            continue;
        }
        if !out.is_empty() {
            out.push('.');
        }
        write_component(m, ranks, start, &mut visited, &mut out);
    }
    out
}

struct Closure {
    bond: usize,
}

/// Writer DFS frame: atom, neighbour cursor, (neighbour, bond) pairs.
type Frame = (usize, usize, Vec<(usize, usize)>);

fn write_component(
    m: &Molecule,
    ranks: &[usize],
    start: usize,
    visited: &mut [bool],
    out: &mut String,
) {
    let n = m.atom_count();
    // Pass 1: depth-first tree with ring closures.
    let mut children: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); n];
    let mut openings: Vec<Vec<Closure>> = (0..n).map(|_| Vec::new()).collect();
    let mut closings: Vec<Vec<Closure>> = (0..n).map(|_| Vec::new()).collect();
    let mut discovered = alloc::vec![false; n];
    let mut tree_bond = alloc::vec![usize::MAX; n];
    let mut closure_bonds = alloc::collections::BTreeSet::new();

    let sorted_neighbors = |v: usize| {
        let mut nbs: Vec<(usize, usize)> = m
            .neighbors(v)
            .iter()
            .map(|nb| (nb.atom, nb.bond))
            .collect();
        nb_sort(&mut nbs, ranks);
        nbs
    };

    // Explicit stack emulating recursion: (atom, cursor, sorted neighbours).
    let mut stack: Vec<Frame> = Vec::new();
    discovered[start] = true;
    stack.push((start, 0, sorted_neighbors(start)));
    while let Some(top) = stack.len().checked_sub(1) {
        let v = stack[top].0;
        let cursor = stack[top].1;
        if cursor >= stack[top].2.len() {
            stack.pop();
            continue;
        }
        stack[top].1 += 1;
        let (w, bond) = stack[top].2[cursor];
        if bond == tree_bond[v] || closure_bonds.contains(&bond) {
            continue;
        }
        if discovered[w] {
            // Back edge: w is an ancestor still on the stack.
            closure_bonds.insert(bond);
            openings[w].push(Closure { bond });
            closings[v].push(Closure { bond });
        } else {
            discovered[w] = true;
            tree_bond[w] = bond;
            children[v].push((w, bond));
            stack.push((w, 0, sorted_neighbors(w)));
        }
    }

    // Pass 2: emit text.
    let mut digits_in_use: BTreeMap<usize, u32> = BTreeMap::new();
    let mut free_digits: Vec<bool> = alloc::vec![true; 100];
    emit(
        m,
        start,
        &children,
        &openings,
        &closings,
        &mut digits_in_use,
        &mut free_digits,
        visited,
        out,
    );
}

fn nb_sort(nbs: &mut [(usize, usize)], ranks: &[usize]) {
    nbs.sort_by_key(|&(a, _)| (ranks[a], a));
}

#[allow(clippy::too_many_arguments)]
fn emit(
    m: &Molecule,
    start: usize,
    children: &[Vec<(usize, usize)>],
    openings: &[Vec<Closure>],
    closings: &[Vec<Closure>],
    digits_in_use: &mut BTreeMap<usize, u32>,
    free_digits: &mut [bool],
    visited: &mut [bool],
    out: &mut String,
) {
    enum Step {
        Atom(usize),
        Text(&'static str),
        Bond(usize),
    }
    let mut work: Vec<Step> = alloc::vec![Step::Atom(start)];
    while let Some(step) = work.pop() {
        let v = match step {
            Step::Text(t) => {
                out.push_str(t);
                continue;
            }
            Step::Bond(b) => {
                out.push_str(bond_symbol(m, b));
                continue;
            }
            Step::Atom(v) => v,
        };
        visited[v] = true;
        out.push_str(&atom_text(m, v));
        for c in &closings[v] {
            let d = digits_in_use.remove(&c.bond).expect("closure opened");
            free_digits[d as usize] = true;
            push_digit(out, d);
        }
        for c in &openings[v] {
            let d = free_digits
                .iter()
                .skip(1)
                .position(|&f| f)
                .map(|p| p + 1)
                .expect("fewer than 100 open rings");
            free_digits[d] = false;
            digits_in_use.insert(c.bond, d as u32);
            out.push_str(bond_symbol(m, c.bond));
            push_digit(out, d as u32);
        }
        let kids = &children[v];
        // Pushed in reverse so the first child is emitted first.
        for (i, &(w, bond)) in kids.iter().enumerate().rev() {
            let last = i + 1 == kids.len();
            if !last {
                work.push(Step::Text(")"));
            }
            work.push(Step::Atom(w));
            work.push(Step::Bond(bond));
            if !last {
                work.push(Step::Text("("));
            }
        }
    }
}

fn push_digit(out: &mut String, d: u32) {
    if d < 10 {
        let _ = write!(out, "{}", d);
    } else {
        let _ = write!(out, "%{:02}", d);
    }
}

fn bond_symbol(m: &Molecule, bond: usize) -> &'static str {
    let b = m.bond(bond);
    let both_aromatic = m.atom(b.begin).aromatic && m.atom(b.end).aromatic;
    match b.order {
        BondOrder::Aromatic => "",
        BondOrder::Single => {
            if both_aromatic {
                "-"
            } else {
                ""
            }
        }
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
    }
}

fn atom_text(m: &Molecule, v: usize) -> String {
    let a = m.atom(v);
    let sym = a.element.symbol();
    let symbol: String = if a.aromatic {
        sym.to_ascii_lowercase()
    } else {
        sym.to_string()
    };
    if a.formal_charge == 0 && a.element.in_organic_subset() && implied_h(m, v) == Some(a.total_h()) {
        return symbol;
    }
    let mut s = String::from("[");
    s.push_str(&symbol);
    match a.total_h() {
        0 => {}
        1 => s.push('H'),
        h => {
            let _ = write!(s, "H{}", h);
        }
    }
    match a.formal_charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        c => {
            let _ = write!(s, "{:+}", c);
        }
    }
    s.push(']');
    s
}

/// Hydrogen count the parser would infer for the atom written bare.
fn implied_h(m: &Molecule, v: usize) -> Option<u8> {
    let a = m.atom(v);
    let sum: u8 = m
        .neighbors(v)
        .iter()
        .map(|nb| m.bond(nb.bond).order.valence())
        .sum();
    if a.aromatic {
        let lowest = valence::allowed_valences(a.element, 0)[0];
        if sum < lowest {
            Some(lowest - sum - 1)
        } else if sum == lowest {
            Some(0)
        } else {
            valence::implicit_hydrogens(a.element, 0, sum)
        }
    } else {
        valence::implicit_hydrogens(a.element, 0, sum)
    }
}
