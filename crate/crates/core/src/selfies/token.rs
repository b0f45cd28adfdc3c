use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::SelfiesError;
use crate::mol::{max_valence, Element, ValenceTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    /// Atom joined to the previous one by a bond of (up to) `bond`.
    /// Neutral organic-subset atoms without `h` infer their hydrogens;
    /// every other atom has exactly `h` (default 0) hydrogens.
    Atom {
        bond: u8,
        element: Element,
        h: Option<u8>,
        charge: i8,
    },
    /// Branch of `order`, whose token span is encoded by the next `length`
    /// tokens.
    Branch { order: u8, length: u8 },
    /// Ring closure of `order` back `Q + 1` atoms, `Q` in the next `length`
    /// tokens.
    Ring { order: u8, length: u8 },
    Dot,
}

/// The sixteen index symbols, in digit order.
const INDEX_ALPHABET: [&str; 16] = [
    "[C]", "[Ring1]", "[Ring2]", "[Branch1]", "[=Branch1]", "[#Branch1]", "[Branch2]",
    "[=Branch2]", "[#Branch2]", "[O]", "[N]", "[=N]", "[=C]", "[#C]", "[S]", "[P]",
];

impl Token {
    pub fn atom(bond: u8, element: Element) -> Token {
        Token::Atom {
            bond,
            element,
            h: None,
            charge: 0,
        }
    }

    /// Bracket-free atoms: neutral, no stated hydrogens, organic subset.
    pub fn is_plain_atom(&self) -> bool {
        matches!(self, Token::Atom { h: None, charge: 0, element, .. } if element.in_organic_subset())
    }

    /// Bonding capacity of an atom token, `None` for other tokens.
    pub fn capacity(&self, table: &ValenceTable) -> Option<i16> {
        match *self {
            Token::Atom {
                element, h, charge, ..
            } => Some(table.capacity(element, charge) as i16 - h.unwrap_or(0) as i16),
            _ => None,
        }
    }

    /// Digit value when read as part of a length index. Anything outside
    /// the index alphabet counts as zero.
    pub fn index_value(&self) -> usize {
        let text = self.to_string();
        INDEX_ALPHABET.iter().position(|s| *s == text).unwrap_or(0)
    }

    pub(crate) fn index_digit(d: usize) -> Token {
        INDEX_ALPHABET[d].parse().expect("index alphabet parses")
    }
}

fn bond_char(order: u8) -> &'static str {
    match order {
        2 => "=",
        3 => "#",
        _ => "",
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Token::Atom {
                bond,
                element,
                h,
                charge,
            } => {
                write!(f, "[{}{}", bond_char(bond), element.symbol())?;
                if let Some(h) = h {
                    write!(f, "H{}", h)?;
                }
                if charge != 0 {
                    write!(f, "{:+}", charge)?;
                }
                f.write_str("]")
            }
            Token::Branch { order, length } => write!(f, "[{}Branch{}]", bond_char(order), length),
            Token::Ring { order, length } => write!(f, "[{}Ring{}]", bond_char(order), length),
            Token::Dot => f.write_str("."),
        }
    }
}

impl FromStr for Token {
    type Err = SelfiesError;

    fn from_str(s: &str) -> Result<Token, SelfiesError> {
        let unknown = || SelfiesError::UnknownToken(s.to_string());
        if s == "." {
            return Ok(Token::Dot);
        }
        let inner = s
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(unknown)?;
        let (order, body) = match inner.as_bytes().first() {
            Some(b'=') => (2, &inner[1..]),
            Some(b'#') => (3, &inner[1..]),
            _ => (1, inner),
        };
        for (prefix, ring) in [("Branch", false), ("Ring", true)] {
            if let Some(rest) = body.strip_prefix(prefix) {
                let length = match rest {
                    "1" => 1,
                    "2" => 2,
                    "3" => 3,
                    _ => return Err(unknown()),
                };
                return Ok(if ring {
                    Token::Ring { order, length }
                } else {
                    Token::Branch { order, length }
                });
            }
        }
        // Element symbol, then optional H<n>, then optional charge.
        let bytes = body.as_bytes();
        let mut i = 1;
        if bytes.len() > 1 && bytes[1].is_ascii_lowercase() {
            i = 2;
        }
        let element = body
            .get(..i)
            .and_then(Element::from_symbol)
            .ok_or_else(unknown)?;
        let mut rest = &body[i..];
        let mut h = None;
        if let Some(r) = rest.strip_prefix('H') {
            let end = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
            h = Some(r[..end].parse().map_err(|_| unknown())?);
            rest = &r[end..];
        }
        let charge: i8 = if rest.is_empty() {
            0
        } else {
            let (sign, digits) = rest.split_at(1);
            let magnitude: i8 = digits.parse().map_err(|_| unknown())?;
            match sign {
                "+" => magnitude,
                "-" => -magnitude,
                _ => return Err(unknown()),
            }
        };
        if !(-4..=4).contains(&charge) {
            return Err(unknown());
        }
        if (max_valence(element, charge) as i16) < h.unwrap_or(0) as i16 {
            return Err(unknown());
        }
        Ok(Token::Atom {
            bond: order,
            element,
            h,
            charge,
        })
    }
}

/// A token sequence. Text form is the concatenated token symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SelfiesSequence {
    tokens: Vec<Token>,
}

impl SelfiesSequence {
    pub fn new(tokens: Vec<Token>) -> Self {
        SelfiesSequence { tokens }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<Token> {
        self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl From<Vec<Token>> for SelfiesSequence {
    fn from(tokens: Vec<Token>) -> Self {
        SelfiesSequence { tokens }
    }
}

impl fmt::Display for SelfiesSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.tokens {
            write!(f, "{}", t)?;
        }
        Ok(())
    }
}

impl FromStr for SelfiesSequence {
    type Err = SelfiesError;

    fn from_str(s: &str) -> Result<Self, SelfiesError> {
        let mut tokens = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            if let Some(r) = rest.strip_prefix('.') {
                tokens.push(Token::Dot);
                rest = r;
                continue;
            }
            if !rest.starts_with('[') {
                return Err(SelfiesError::UnknownToken(String::from(rest)));
            }
            let end = rest
                .find(']')
                .ok_or_else(|| SelfiesError::UnknownToken(String::from(rest)))?;
            tokens.push(rest[..=end].parse()?);
            rest = &rest[end + 1..];
        }
        Ok(SelfiesSequence { tokens })
    }
}

/// Tokens used for random generation and mutation: neutral and singly
/// charged atoms of B, C, N, O, F, P, S, Cl, Br and I with every bond prefix
/// their capacity allows, plus branch and ring tokens of all orders and
/// lengths.
pub fn default_alphabet() -> Vec<Token> {
    let table = ValenceTable::standard();
    let mut out = Vec::new();
    let elements = [
        Element::B,
        Element::C,
        Element::N,
        Element::O,
        Element::F,
        Element::P,
        Element::S,
        Element::Cl,
        Element::Br,
        Element::I,
    ];
    for &element in &elements {
        for charge in [0i8, 1, -1] {
            let cap = table.capacity(element, charge);
            if cap == 0 || (charge != 0 && !matches!(element, Element::B | Element::C | Element::N | Element::O | Element::P | Element::S)) {
                continue;
            }
            for bond in 1..=cap.min(3) {
                out.push(Token::Atom {
                    bond,
                    element,
                    h: None,
                    charge,
                });
            }
        }
    }
    for length in 1..=3 {
        for order in 1..=3 {
            out.push(Token::Branch { order, length });
            out.push(Token::Ring { order, length });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_text_round_trip() {
        for t in default_alphabet() {
            let s = t.to_string();
            assert_eq!(s.parse::<Token>().unwrap(), t, "{s}");
        }
        for s in ["[NH1+1]", "[O-1]", "[SiH4]", "[=N+1]", "[H]", "[SH0]", "."] {
            assert_eq!(s.parse::<Token>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn rejects_unknown() {
        for s in ["[Xe]", "[Branch4]", "C", "[CH9]", "[C+9]"] {
            assert!(s.parse::<Token>().is_err(), "{s}");
        }
    }

    #[test]
    fn index_values() {
        assert_eq!(Token::atom(1, Element::C).index_value(), 0);
        assert_eq!(Token::atom(1, Element::P).index_value(), 15);
        assert_eq!(Token::atom(1, Element::F).index_value(), 0);
        for d in 0..16 {
            assert_eq!(Token::index_digit(d).index_value(), d);
        }
    }

    #[test]
    fn sequence_text() {
        let s: SelfiesSequence = "[C][=C][Branch1][C][F][O].[Na]".parse().unwrap_or_default();
        assert!(s.is_empty());
        let s: SelfiesSequence = "[C][=C][Branch1][C][F][O].[C]".parse().unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.to_string(), "[C][=C][Branch1][C][F][O].[C]");
    }
}
