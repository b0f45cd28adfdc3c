//! Circular fingerprints, similarity, population diversity and the scalar
//! descriptors that can be computed from the graph alone.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::mol::{perceive, BondOrder, Element, Molecule};

pub const FINGERPRINT_BITS: usize = 2048;
pub const FINGERPRINT_RADIUS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DescriptorError {
    #[error("fingerprint lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("diversity needs at least two molecules, got {0}")]
    PopulationTooSmall(usize),
    #[error("malformed fingerprint hex")]
    MalformedHex,
}

/// Fixed-length bit vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    n_bits: usize,
    words: Vec<u64>,
}

impl Fingerprint {
    pub fn zeros(n_bits: usize) -> Fingerprint {
        Fingerprint {
            n_bits,
            words: alloc::vec![0; n_bits.div_ceil(64)],
        }
    }

    pub fn from_indices(n_bits: usize, on: impl IntoIterator<Item = usize>) -> Fingerprint {
        let mut fp = Fingerprint::zeros(n_bits);
        for i in on {
            fp.set(i % n_bits);
        }
        fp
    }

    pub fn len(&self) -> usize {
        self.n_bits
    }

    pub fn is_empty(&self) -> bool {
        self.n_bits == 0
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn on_bits(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_bits).filter(|&i| self.get(i))
    }

    /// Lowercase hex, most significant nibble of bit 0's word last.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.words.len() * 16);
        for w in &self.words {
            let _ = write!(s, "{:016x}", w);
        }
        s
    }

    pub fn from_hex(n_bits: usize, hex: &str) -> Result<Fingerprint, DescriptorError> {
        let n_words = n_bits.div_ceil(64);
        if hex.len() != n_words * 16 || !hex.is_ascii() {
            return Err(DescriptorError::MalformedHex);
        }
        let words = (0..n_words)
            .map(|i| u64::from_str_radix(&hex[i * 16..i * 16 + 16], 16))
            .collect::<Result<Vec<u64>, _>>()
            .map_err(|_| DescriptorError::MalformedHex)?;
        Ok(Fingerprint { n_bits, words })
    }
}

// splitmix64 finalizer, used as a stable mixing function.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn combine(seed: u64, value: u64) -> u64 {
    mix(seed ^ value.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(seed << 6))
}

fn bond_code(order: BondOrder) -> u64 {
    match order {
        BondOrder::Single => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
    }
}

/// Morgan fingerprint with radius 3 folded into 2048 bits.
pub fn morgan_fingerprint(m: &Molecule) -> Fingerprint {
    morgan_fingerprint_with(m, FINGERPRINT_RADIUS, FINGERPRINT_BITS)
}

/// Iterative neighbourhood hashing. Radius 0 identifiers come from
/// (element, degree, charge, hydrogens, ring flag, aromatic flag); each
/// round hashes an atom's identifier with the sorted (bond, neighbour)
/// identifiers of the previous round. Every identifier of every round sets
/// one bit modulo `n_bits`.
pub fn morgan_fingerprint_with(m: &Molecule, radius: usize, n_bits: usize) -> Fingerprint {
    let mut fp = Fingerprint::zeros(n_bits);
    if n_bits == 0 {
        return fp;
    }
    let heavy: Vec<usize> = (0..m.atom_count()).filter(|&i| m.atom(i).is_heavy()).collect();
    let mut ids = alloc::vec![0u64; m.atom_count()];
    for &i in &heavy {
        let a = m.atom(i);
        let degree = m.neighbors(i).iter().filter(|nb| m.atom(nb.atom).is_heavy()).count();
        let h = a.total_h() as usize + m.degree(i) - degree;
        let mut id = combine(0, a.element.atomic_number() as u64);
        id = combine(id, degree as u64);
        id = combine(id, (a.formal_charge as i64 + 128) as u64);
        id = combine(id, h as u64);
        id = combine(id, a.in_ring as u64);
        id = combine(id, a.aromatic as u64);
        ids[i] = id;
        fp.set((id % n_bits as u64) as usize);
    }
    for round in 1..=radius {
        let mut next = ids.clone();
        for &i in &heavy {
            let mut env: Vec<(u64, u64)> = m
                .neighbors(i)
                .iter()
                .filter(|nb| m.atom(nb.atom).is_heavy())
                .map(|nb| (bond_code(m.bond(nb.bond).order), ids[nb.atom]))
                .collect();
            env.sort_unstable();
            let mut id = combine(round as u64, ids[i]);
            for (b, n) in env {
                id = combine(combine(id, b), n);
            }
            next[i] = id;
            fp.set((id % n_bits as u64) as usize);
        }
        ids = next;
    }
    fp
}

/// |a ∧ b| / |a ∨ b|, and 1.0 when both are empty.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, DescriptorError> {
    if a.n_bits != b.n_bits {
        return Err(DescriptorError::LengthMismatch(a.n_bits, b.n_bits));
    }
    let (mut both, mut either) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        both += (x & y).count_ones();
        either += (x | y).count_ones();
    }
    Ok(if either == 0 {
        1.0
    } else {
        both as f64 / either as f64
    })
}

/// One minus the mean pairwise Tanimoto similarity of Morgan fingerprints.
pub fn diversity(pop: &[Molecule]) -> Result<f64, DescriptorError> {
    let fps: Vec<Fingerprint> = pop.iter().map(morgan_fingerprint).collect();
    diversity_of_fingerprints(&fps)
}

/// Pairs are summed in (i, j) lexicographic order so the result is
/// bit-reproducible.
pub fn diversity_of_fingerprints(fps: &[Fingerprint]) -> Result<f64, DescriptorError> {
    let n = fps.len();
    if n < 2 {
        return Err(DescriptorError::PopulationTooSmall(n));
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += tanimoto(&fps[i], &fps[j])?;
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(1.0 - sum / pairs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarDescriptors {
    pub molecular_weight: f64,
    /// N and O atoms carrying at least one hydrogen.
    pub h_bond_donors: u32,
    /// N and O atoms.
    pub h_bond_acceptors: u32,
    pub heavy_atom_count: u32,
}

pub fn scalar_descriptors(m: &Molecule) -> ScalarDescriptors {
    let mut d = ScalarDescriptors {
        molecular_weight: 0.0,
        h_bond_donors: 0,
        h_bond_acceptors: 0,
        heavy_atom_count: 0,
    };
    for a in m.atoms() {
        d.molecular_weight += a.element.atomic_weight() + a.total_h() as f64 * Element::H.atomic_weight();
        if a.is_heavy() {
            d.heavy_atom_count += 1;
        }
        if matches!(a.element, Element::N | Element::O) {
            d.h_bond_acceptors += 1;
            if a.total_h() > 0 {
                d.h_bond_donors += 1;
            }
        }
    }
    d
}

/// Names understood by [`local_descriptor`].
pub const LOCAL_DESCRIPTORS: &[&str] = &[
    "molecular_weight",
    "h_bond_donors",
    "h_bond_acceptors",
    "heavy_atom_count",
    "net_charge",
    "n_charged_atoms",
    "radical_electrons",
    "n_rings",
    "max_ring_size",
    "min_ring_size",
    "n_bridgehead",
    "n_spiro",
    "aromatic_fraction",
    "conjugated_fraction",
    "n_si_sn",
];

pub fn is_local_descriptor(name: &str) -> bool {
    LOCAL_DESCRIPTORS.contains(&name)
}

/// Value of a graph-computable descriptor, or `None` for unknown names.
pub fn local_descriptor(m: &Molecule, name: &str) -> Option<f64> {
    let atoms = m.atoms();
    let v = match name {
        "molecular_weight" => scalar_descriptors(m).molecular_weight,
        "h_bond_donors" => scalar_descriptors(m).h_bond_donors as f64,
        "h_bond_acceptors" => scalar_descriptors(m).h_bond_acceptors as f64,
        "heavy_atom_count" => m.heavy_atom_count() as f64,
        "net_charge" => m.net_charge() as f64,
        "n_charged_atoms" => atoms.iter().filter(|a| a.formal_charge != 0).count() as f64,
        "radical_electrons" => (0..m.atom_count()).map(|i| m.radical_electrons(i) as f64).sum(),
        "n_rings" => perceive(m).n_rings as f64,
        "max_ring_size" => perceive(m).max_ring_size as f64,
        "min_ring_size" => perceive(m).min_ring_size as f64,
        "n_bridgehead" => perceive(m).n_bridgehead as f64,
        "n_spiro" => perceive(m).n_spiro as f64,
        "aromatic_fraction" => perceive(m).aromatic_fraction,
        "conjugated_fraction" => perceive(m).conjugated_bond_fraction,
        "n_si_sn" => atoms
            .iter()
            .filter(|a| matches!(a.element, Element::Si | Element::Sn))
            .count() as f64,
        _ => return None,
    };
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mol::parse_smiles;

    fn mol(s: &str) -> Molecule {
        parse_smiles(s).unwrap()
    }

    #[test]
    fn tanimoto_arithmetic() {
        let a = Fingerprint::from_indices(8, [0, 1, 2]);
        let b = Fingerprint::from_indices(8, [1, 2, 3]);
        assert_eq!(tanimoto(&a, &b).unwrap(), 0.5);
        assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
        let c = Fingerprint::from_indices(8, [5]);
        assert_eq!(tanimoto(&a, &c).unwrap(), 0.0);
        let z = Fingerprint::zeros(8);
        assert_eq!(tanimoto(&z, &z).unwrap(), 1.0);
        assert_eq!(
            tanimoto(&a, &Fingerprint::zeros(16)),
            Err(DescriptorError::LengthMismatch(8, 16))
        );
    }

    #[test]
    fn fingerprint_ordering() {
        let ethanol = morgan_fingerprint(&mol("CCO"));
        let dup = morgan_fingerprint(&mol("OCC"));
        let benzene = morgan_fingerprint(&mol("c1ccccc1"));
        assert_eq!(ethanol.len(), 2048);
        assert_eq!(tanimoto(&ethanol, &dup).unwrap(), 1.0);
        assert!(tanimoto(&ethanol, &benzene).unwrap() < 1.0);
        assert_eq!(morgan_fingerprint(&mol("C")), morgan_fingerprint(&mol("C")));
    }

    #[test]
    fn hex_round_trip() {
        let fp = morgan_fingerprint(&mol("c1ccccc1O"));
        let hex = fp.to_hex();
        assert_eq!(hex.len(), 512);
        assert_eq!(Fingerprint::from_hex(2048, &hex).unwrap(), fp);
        assert!(Fingerprint::from_hex(2048, "zz").is_err());
    }

    #[test]
    fn diversity_edges() {
        let x = mol("CCO");
        assert_eq!(diversity(&[x.clone(), x.clone(), x.clone()]).unwrap(), 0.0);
        assert_eq!(diversity(&[x]), Err(DescriptorError::PopulationTooSmall(1)));
        let a = Fingerprint::from_indices(8, [0, 1, 2]);
        let b = Fingerprint::from_indices(8, [1, 2, 3]);
        assert_eq!(diversity_of_fingerprints(&[a, b]).unwrap(), 0.5);
    }

    #[test]
    fn scalars() {
        let w = scalar_descriptors(&mol("O"));
        assert!((w.molecular_weight - 18.015).abs() < 1e-9);
        assert_eq!((w.h_bond_donors, w.h_bond_acceptors), (1, 1));
        let m = scalar_descriptors(&mol("C"));
        assert_eq!((m.h_bond_donors, m.h_bond_acceptors), (0, 0));
        let e = scalar_descriptors(&mol("CCO"));
        assert!((e.molecular_weight - 46.069).abs() < 1e-9);
        assert_eq!((e.h_bond_donors, e.h_bond_acceptors, e.heavy_atom_count), (1, 1, 3));
        for name in LOCAL_DESCRIPTORS {
            assert!(local_descriptor(&mol("c1ccccc1"), name).is_some(), "{name}");
        }
        assert_eq!(local_descriptor(&mol("C"), "qed"), None);
        assert_eq!(local_descriptor(&mol("C[Si](C)(C)C"), "n_si_sn"), Some(1.0));
    }
}
