//! Compiled query patterns and the SMARTS subset that produces them.
//!
//! Atom primitives: `*`, element symbols (uppercase aliphatic, lowercase
//! aromatic), `#n`, `a`, `A`, `R`/`Rn` (number of SSSR rings), `rn`
//! (smallest ring size), `Xn` (total connections), `Dn` (explicit
//! connections), `Hn` (total hydrogens) and charges. Operators `!`, `&`,
//! `,` and `;` with the usual precedence. Bond primitives `-`, `=`, `#`,
//! `:`, `~` and `@` (ring bond) with the same operators; an omitted bond
//! means single or aromatic.
//!
//! Not supported: stereo (`@` in atoms, `/`, `\`), recursive `$()`,
//! component grouping and `.`, isotopes, atom maps, and `v`, `x`, `^`.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::PatternError;
use crate::mol::{BondOrder, Element};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr<P> {
    Prim(P),
    Not(Box<Expr<P>>),
    And(Vec<Expr<P>>),
    Or(Vec<Expr<P>>),
}

impl<P> Expr<P> {
    pub fn eval(&self, f: &impl Fn(&P) -> bool) -> bool {
        match self {
            Expr::Prim(p) => f(p),
            Expr::Not(e) => !e.eval(f),
            Expr::And(es) => es.iter().all(|e| e.eval(f)),
            Expr::Or(es) => es.iter().any(|e| e.eval(f)),
        }
    }

    fn any(&self, f: &impl Fn(&P) -> bool) -> bool {
        match self {
            Expr::Prim(p) => f(p),
            Expr::Not(e) => e.any(f),
            Expr::And(es) | Expr::Or(es) => es.iter().any(|e| e.any(f)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomPrim {
    Any,
    /// Element with required aromaticity (`None` for `#n`).
    Element(Element, Option<bool>),
    Aromatic(bool),
    /// `R`: in at least one ring. `Rn`: in exactly `n` SSSR rings.
    RingCount(Option<u8>),
    /// `rn`: smallest SSSR ring containing the atom has size `n`.
    SmallestRing(u8),
    TotalConnections(u8),
    ExplicitDegree(u8),
    TotalHydrogens(u8),
    Charge(i8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondPrim {
    Order(BondOrder),
    Any,
    Ring,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryBond {
    pub a: usize,
    pub b: usize,
    pub expr: Expr<BondPrim>,
}

/// A connected query graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternGraph {
    pub(crate) source: String,
    pub(crate) atoms: Vec<Expr<AtomPrim>>,
    pub(crate) bonds: Vec<QueryBond>,
}

impl PatternGraph {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> &[Expr<AtomPrim>] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[QueryBond] {
        &self.bonds
    }

    /// True when some query atom can only be satisfied by a hydrogen atom,
    /// in which case targets are matched with explicit hydrogens.
    pub fn mentions_hydrogen_atoms(&self) -> bool {
        self.atoms
            .iter()
            .any(|a| a.any(&|p| matches!(p, AtomPrim::Element(Element::H, _))))
    }
}

pub fn compile_pattern(text: &str) -> Result<PatternGraph, PatternError> {
    let mut p = Parser {
        text,
        bytes: text.as_bytes(),
        pos: 0,
    };
    let (atoms, bonds) = p.parse()?;
    let graph = PatternGraph {
        source: text.to_string(),
        atoms,
        bonds,
    };
    if !connected(&graph) {
        return Err(PatternError::Unsupported(
            "disconnected pattern".to_string(),
        ));
    }
    Ok(graph)
}

fn connected(g: &PatternGraph) -> bool {
    let n = g.atoms.len();
    let mut seen = alloc::vec![false; n];
    let mut stack = alloc::vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for b in &g.bonds {
            let w = if b.a == v {
                b.b
            } else if b.b == v {
                b.a
            } else {
                continue;
            };
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.iter().all(|&s| s)
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

type Parsed = (Vec<Expr<AtomPrim>>, Vec<QueryBond>);

impl Parser<'_> {
    fn syntax(&self, message: &str) -> PatternError {
        PatternError::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn unsupported(&self, what: &str) -> PatternError {
        PatternError::Unsupported(alloc::format!("{} at position {}", what, self.pos))
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn parse(&mut self) -> Result<Parsed, PatternError> {
        if self.text.trim().is_empty() {
            return Err(self.syntax("empty pattern"));
        }
        let mut atoms: Vec<Expr<AtomPrim>> = Vec::new();
        let mut bonds: Vec<QueryBond> = Vec::new();
        let mut prev: Option<usize> = None;
        let mut branches: Vec<usize> = Vec::new();
        let mut pending: Option<Expr<BondPrim>> = None;
        let mut rings: BTreeMap<u32, (usize, Option<Expr<BondPrim>>)> = BTreeMap::new();

        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(self.syntax("misplaced '('"));
                    }
                    branches.push(prev.unwrap());
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return Err(self.syntax("dangling bond"));
                    }
                    prev = Some(branches.pop().ok_or_else(|| self.syntax("unbalanced ')'"))?);
                    self.pos += 1;
                }
                b'.' => return Err(self.unsupported("component separator '.'")),
                b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'!' | b'/' | b'\\' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(self.syntax("misplaced bond"));
                    }
                    pending = Some(self.bond_expr()?);
                }
                b'0'..=b'9' | b'%' => {
                    let Some(p) = prev else {
                        return Err(self.syntax("ring closure without atom"));
                    };
                    let label = self.ring_label()?;
                    match rings.remove(&label) {
                        Some((open, open_bond)) => {
                            let expr = match (open_bond, pending.take()) {
                                (Some(a), Some(b)) if a != b => {
                                    return Err(self.syntax("conflicting ring closure bonds"))
                                }
                                (Some(a), _) | (None, Some(a)) => a,
                                (None, None) => default_bond(),
                            };
                            if open == p {
                                return Err(self.syntax("ring closure to the same atom"));
                            }
                            bonds.push(QueryBond { a: open, b: p, expr });
                        }
                        None => {
                            rings.insert(label, (p, pending.take()));
                        }
                    }
                }
                _ => {
                    let atom = self.atom()?;
                    atoms.push(atom);
                    let idx = atoms.len() - 1;
                    if let Some(p) = prev {
                        let expr = pending.take().unwrap_or_else(default_bond);
                        bonds.push(QueryBond { a: p, b: idx, expr });
                    }
                    prev = Some(idx);
                }
            }
        }
        if pending.is_some() {
            return Err(self.syntax("dangling bond at end"));
        }
        if !branches.is_empty() {
            return Err(self.syntax("unclosed branch"));
        }
        if !rings.is_empty() {
            return Err(self.syntax("unclosed ring"));
        }
        Ok((atoms, bonds))
    }

    fn ring_label(&mut self) -> Result<u32, PatternError> {
        let c = self.peek().unwrap();
        self.pos += 1;
        if c == b'%' {
            let d = self
                .bytes
                .get(self.pos..self.pos + 2)
                .filter(|d| d.iter().all(u8::is_ascii_digit))
                .ok_or_else(|| self.syntax("'%' needs two digits"))?;
            self.pos += 2;
            Ok(((d[0] - b'0') * 10 + (d[1] - b'0')) as u32)
        } else {
            Ok((c - b'0') as u32)
        }
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.text[start..self.pos].parse().unwrap_or(u32::MAX))
    }

    fn atom(&mut self) -> Result<Expr<AtomPrim>, PatternError> {
        let c = self.peek().unwrap();
        if c == b'[' {
            self.pos += 1;
            let e = self.atom_expr_low()?;
            if self.peek() != Some(b']') {
                return Err(self.syntax("expected ']'"));
            }
            self.pos += 1;
            return Ok(e);
        }
        if c == b'*' {
            self.pos += 1;
            return Ok(Expr::Prim(AtomPrim::Any));
        }
        let rest = &self.text[self.pos..];
        for (sym, el) in [("Cl", Element::Cl), ("Br", Element::Br)] {
            if rest.starts_with(sym) {
                self.pos += 2;
                return Ok(Expr::Prim(AtomPrim::Element(el, Some(false))));
            }
        }
        let (el, aromatic) = match c {
            b'B' => (Element::B, false),
            b'C' => (Element::C, false),
            b'N' => (Element::N, false),
            b'O' => (Element::O, false),
            b'P' => (Element::P, false),
            b'S' => (Element::S, false),
            b'F' => (Element::F, false),
            b'I' => (Element::I, false),
            b'b' => (Element::B, true),
            b'c' => (Element::C, true),
            b'n' => (Element::N, true),
            b'o' => (Element::O, true),
            b'p' => (Element::P, true),
            b's' => (Element::S, true),
            _ => return Err(self.syntax("unexpected character")),
        };
        self.pos += 1;
        Ok(Expr::Prim(AtomPrim::Element(el, Some(aromatic))))
    }

    // `;` (lowest)
    fn atom_expr_low(&mut self) -> Result<Expr<AtomPrim>, PatternError> {
        let mut parts = alloc::vec![self.atom_expr_or()?];
        while self.peek() == Some(b';') {
            self.pos += 1;
            parts.push(self.atom_expr_or()?);
        }
        Ok(flatten_and(parts))
    }

    fn atom_expr_or(&mut self) -> Result<Expr<AtomPrim>, PatternError> {
        let mut parts = alloc::vec![self.atom_expr_and()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            parts.push(self.atom_expr_and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::Or(parts)
        })
    }

    // `&` and implicit conjunction of adjacent primitives.
    fn atom_expr_and(&mut self) -> Result<Expr<AtomPrim>, PatternError> {
        let mut parts = Vec::new();
        let mut first = true;
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.pos += 1;
                }
                Some(b']' | b',' | b';') | None => break,
                _ => {}
            }
            parts.push(self.atom_unary(first)?);
            first = false;
        }
        if parts.is_empty() {
            return Err(self.syntax("empty atom expression"));
        }
        Ok(flatten_and(parts))
    }

    fn atom_unary(&mut self, first: bool) -> Result<Expr<AtomPrim>, PatternError> {
        if self.peek() == Some(b'!') {
            self.pos += 1;
            return Ok(Expr::Not(Box::new(self.atom_unary(false)?)));
        }
        self.atom_primitive(first).map(Expr::Prim)
    }

    // Single-letter primitives are matched before the element-symbol arm.
    #[allow(clippy::match_overlapping_arm)]
    fn atom_primitive(&mut self, first: bool) -> Result<AtomPrim, PatternError> {
        let Some(c) = self.peek() else {
            return Err(self.syntax("unterminated atom"));
        };
        let count = |p: &mut Self, default: u32| -> u8 { p.number().unwrap_or(default).min(255) as u8 };
        match c {
            b'*' => {
                self.pos += 1;
                Ok(AtomPrim::Any)
            }
            b'#' => {
                self.pos += 1;
                let z = self.number().ok_or_else(|| self.syntax("'#' needs a number"))?;
                let el = Element::from_atomic_number(z.min(255) as u8)
                    .ok_or_else(|| self.unsupported("atomic number outside the supported elements"))?;
                Ok(AtomPrim::Element(el, None))
            }
            b'+' | b'-' => {
                self.pos += 1;
                let sign: i32 = if c == b'+' { 1 } else { -1 };
                let magnitude = match self.number() {
                    Some(n) => n as i32,
                    None => {
                        let mut m = 1;
                        while self.peek() == Some(c) {
                            self.pos += 1;
                            m += 1;
                        }
                        m
                    }
                };
                Ok(AtomPrim::Charge((sign * magnitude).clamp(-8, 8) as i8))
            }
            b'a' => {
                self.pos += 1;
                Ok(AtomPrim::Aromatic(true))
            }
            b'A' => {
                self.pos += 1;
                Ok(AtomPrim::Aromatic(false))
            }
            b'R' => {
                self.pos += 1;
                Ok(AtomPrim::RingCount(self.number().map(|n| n.min(255) as u8)))
            }
            b'r' => {
                self.pos += 1;
                match self.number() {
                    Some(n) => Ok(AtomPrim::SmallestRing(n.min(255) as u8)),
                    None => Ok(AtomPrim::RingCount(None)),
                }
            }
            b'X' => {
                self.pos += 1;
                Ok(AtomPrim::TotalConnections(count(self, 1)))
            }
            b'D' => {
                self.pos += 1;
                Ok(AtomPrim::ExplicitDegree(count(self, 1)))
            }
            b'H' => {
                // A leading H not followed by a count-style continuation
                // is the hydrogen element.
                let next = self.bytes.get(self.pos + 1).copied();
                if first && matches!(next, Some(b']' | b'+' | b'-' | b';' | b',' | b'&')) {
                    self.pos += 1;
                    return Ok(AtomPrim::Element(Element::H, Some(false)));
                }
                self.pos += 1;
                Ok(AtomPrim::TotalHydrogens(count(self, 1)))
            }
            b'@' => Err(self.unsupported("stereo mark '@'")),
            b'$' => Err(self.unsupported("recursive pattern '$('")),
            b'0'..=b'9' => Err(self.unsupported("isotope")),
            b':' => Err(self.unsupported("atom map")),
            b'b' | b'c' | b'n' | b'o' | b'p' | b's' => {
                self.pos += 1;
                let el = match c {
                    b'b' => Element::B,
                    b'c' => Element::C,
                    b'n' => Element::N,
                    b'o' => Element::O,
                    b'p' => Element::P,
                    _ => Element::S,
                };
                Ok(AtomPrim::Element(el, Some(true)))
            }
            b'A'..=b'Z' => {
                let rest = &self.text[self.pos..];
                for sym in ["Cl", "Br", "Si", "Sn"] {
                    if rest.starts_with(sym) {
                        self.pos += 2;
                        return Ok(AtomPrim::Element(Element::from_symbol(sym).unwrap(), Some(false)));
                    }
                }
                let sym = &rest[..1];
                match Element::from_symbol(sym) {
                    Some(el) => {
                        self.pos += 1;
                        Ok(AtomPrim::Element(el, Some(false)))
                    }
                    None => Err(self.unsupported("element")),
                }
            }
            _ => Err(self.unsupported(&alloc::format!("atom primitive '{}'", c as char))),
        }
    }

    fn bond_expr(&mut self) -> Result<Expr<BondPrim>, PatternError> {
        let mut or_groups = Vec::new();
        let mut low = Vec::new();
        let mut and = Vec::new();
        loop {
            match self.peek() {
                Some(b'!') => {
                    self.pos += 1;
                    let p = self.bond_primitive()?;
                    and.push(Expr::Not(Box::new(Expr::Prim(p))));
                }
                Some(b'&') => self.pos += 1,
                Some(b',') => {
                    self.pos += 1;
                    or_groups.push(flatten_and(core::mem::take(&mut and)));
                }
                Some(b';') => {
                    self.pos += 1;
                    or_groups.push(flatten_and(core::mem::take(&mut and)));
                    low.push(make_or(core::mem::take(&mut or_groups)));
                }
                Some(b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'/' | b'\\') => {
                    and.push(Expr::Prim(self.bond_primitive()?));
                }
                _ => break,
            }
        }
        if and.is_empty() {
            return Err(self.syntax("incomplete bond expression"));
        }
        or_groups.push(flatten_and(and));
        low.push(make_or(or_groups));
        Ok(flatten_and(low))
    }

    fn bond_primitive(&mut self) -> Result<BondPrim, PatternError> {
        let c = self.peek().ok_or_else(|| self.syntax("missing bond"))?;
        let p = match c {
            b'-' => BondPrim::Order(BondOrder::Single),
            b'=' => BondPrim::Order(BondOrder::Double),
            b'#' => BondPrim::Order(BondOrder::Triple),
            b':' => BondPrim::Order(BondOrder::Aromatic),
            b'~' => BondPrim::Any,
            b'@' => BondPrim::Ring,
            b'/' | b'\\' => return Err(self.unsupported("directional bond")),
            _ => return Err(self.syntax("expected bond primitive")),
        };
        self.pos += 1;
        Ok(p)
    }
}

fn default_bond() -> Expr<BondPrim> {
    Expr::Or(alloc::vec![
        Expr::Prim(BondPrim::Order(BondOrder::Single)),
        Expr::Prim(BondPrim::Order(BondOrder::Aromatic)),
    ])
}

fn flatten_and<P>(mut parts: Vec<Expr<P>>) -> Expr<P> {
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Expr::And(parts)
    }
}

fn make_or<P>(mut parts: Vec<Expr<P>>) -> Expr<P> {
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Expr::Or(parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compiles_shapes() {
        let p = compile_pattern("[Cl,Br,I]").unwrap();
        assert_eq!(p.atom_count(), 1);
        let p = compile_pattern("*1=**=*1").unwrap();
        assert_eq!((p.atom_count(), p.bonds().len()), (4, 4));
        let p = compile_pattern("[#6](=[#8])=[#6](-[#8])-[#6](=[#8])~[#8]").unwrap();
        assert_eq!(p.atom_count(), 7);
        assert!(compile_pattern("[H]C").unwrap().mentions_hydrogen_atoms());
        assert!(!compile_pattern("[CH1]").unwrap().mentions_hydrogen_atoms());
    }

    #[test]
    fn unsupported_features() {
        for s in ["[C@@H](F)Cl", "[$(CC)]", "C.C", "F/C=C/F", "[13C]", "[C:1]"] {
            assert!(matches!(compile_pattern(s), Err(PatternError::Unsupported(_))), "{s}");
        }
        for s in ["", "C(", "C1CC", "[C", "C=", "[#6](=#8])"] {
            assert!(compile_pattern(s).is_err(), "{s}");
        }
    }
}
