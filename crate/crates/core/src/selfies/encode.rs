use alloc::vec::Vec;

use super::token::{SelfiesSequence, Token};
use super::SelfiesError;
use crate::mol::{implicit_hydrogens, Molecule};

/// Encodes the Kekule structure depth first in the molecule's own atom
/// order. Ring closures are written after the later atom; every child but
/// the last becomes a branch.
pub fn encode(m: &Molecule) -> Result<SelfiesSequence, SelfiesError> {
    let n = m.atom_count();
    let mut pre = alloc::vec![usize::MAX; n];
    let mut children: Vec<Vec<(usize, u8)>> = alloc::vec![Vec::new(); n];
    let mut closures: Vec<Vec<(usize, u8)>> = alloc::vec![Vec::new(); n];
    let mut roots = Vec::new();
    let mut counter = 0usize;

    for start in 0..n {
        if pre[start] != usize::MAX {
            continue;
        }
        roots.push(start);
        pre[start] = counter;
        counter += 1;
        // (atom, incoming bond, cursor)
        let mut stack: Vec<(usize, usize, usize)> = alloc::vec![(start, usize::MAX, 0)];
        let mut done_bonds = alloc::collections::BTreeSet::new();
        while let Some(top) = stack.len().checked_sub(1) {
            let (v, incoming, cursor) = stack[top];
            let nbs = m.neighbors(v);
            if cursor >= nbs.len() {
                stack.pop();
                continue;
            }
            stack[top].2 += 1;
            let mut sorted: Vec<_> = nbs.to_vec();
            sorted.sort_by_key(|nb| nb.atom);
            let nb = sorted[cursor];
            if nb.bond == incoming || done_bonds.contains(&nb.bond) {
                continue;
            }
            done_bonds.insert(nb.bond);
            let order = m.bond(nb.bond).kekule.valence();
            if pre[nb.atom] == usize::MAX {
                pre[nb.atom] = counter;
                counter += 1;
                children[v].push((nb.atom, order));
                stack.push((nb.atom, nb.bond, 0));
            } else {
                closures[v].push((nb.atom, order));
            }
        }
    }

    let mut tokens = Vec::new();
    for (i, &root) in roots.iter().enumerate() {
        if i > 0 {
            tokens.push(Token::Dot);
        }
        emit(m, root, 1, &pre, &children, &closures, &mut tokens)?;
    }
    Ok(SelfiesSequence::new(tokens))
}

fn atom_token(m: &Molecule, v: usize, bond: u8) -> Token {
    let a = m.atom(v);
    let sum = m.bond_order_sum(v);
    let plain = a.formal_charge == 0
        && a.element.in_organic_subset()
        && implicit_hydrogens(a.element, 0, sum) == Some(a.total_h());
    if plain {
        Token::atom(bond, a.element)
    } else {
        let stated = a.total_h() > 0 || (a.formal_charge == 0 && a.element.in_organic_subset());
        Token::Atom {
            bond,
            element: a.element,
            h: stated.then_some(a.total_h()),
            charge: a.formal_charge,
        }
    }
}

fn index_tokens(q: usize) -> Result<Vec<Token>, SelfiesError> {
    let mut digits = Vec::new();
    let mut rest = q;
    loop {
        digits.push(Token::index_digit(rest % 16));
        rest /= 16;
        if rest == 0 {
            break;
        }
    }
    if digits.len() > 3 {
        return Err(SelfiesError::SpanTooLong(q + 1));
    }
    digits.reverse();
    Ok(digits)
}

fn emit(
    m: &Molecule,
    v: usize,
    bond: u8,
    pre: &[usize],
    children: &[Vec<(usize, u8)>],
    closures: &[Vec<(usize, u8)>],
    out: &mut Vec<Token>,
) -> Result<(), SelfiesError> {
    out.push(atom_token(m, v, bond));
    for &(u, order) in &closures[v] {
        let idx = index_tokens(pre[v] - pre[u] - 1)?;
        out.push(Token::Ring {
            order,
            length: idx.len() as u8,
        });
        out.extend(idx);
    }
    let kids = &children[v];
    for (i, &(w, order)) in kids.iter().enumerate() {
        if i + 1 == kids.len() {
            emit(m, w, order, pre, children, closures, out)?;
        } else {
            let mut branch = Vec::new();
            emit(m, w, order, pre, children, closures, &mut branch)?;
            let idx = index_tokens(branch.len() - 1)?;
            out.push(Token::Branch {
                order,
                length: idx.len() as u8,
            });
            out.extend(idx);
            out.extend(branch);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use crate::mol::{canonical_key, parse_smiles};
    use crate::selfies::decode;

    fn round_trip(smiles: &str) {
        let m = parse_smiles(smiles).unwrap();
        let s = encode(&m).unwrap();
        let back = decode(&s);
        assert_eq!(canonical_key(&back), canonical_key(&m), "{smiles} -> {s}");
    }

    #[test]
    fn examples() {
        assert_eq!(encode(&parse_smiles("C").unwrap()).unwrap().to_string(), "[C]");
        for s in [
            "C",
            "CCO",
            "c1ccccc1",
            "CC(=O)Oc1ccccc1C(=O)O",
            "C1CC2CCC1CC2",
            "C1CCC2(C1)CCCC2",
            "[NH4+].[O-]C=O",
            "C#N",
            "O=S(=O)(O)c1ccc2ccccc2c1",
            "[CH3]",
            "CC[S](=O)=O",
            "c1ccc2c(c1)[nH]c1ccccc12",
            "FC(F)(F)C1=CC=CC=C1",
            "[SiH3]C[SnH3]",
            "C1C2C34C5C=CC(C5)C3(C4)C(C2)C1",
        ] {
            round_trip(s);
        }
    }
}
