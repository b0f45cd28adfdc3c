#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tartarus_core::descriptors::Fingerprint;
use tartarus_core::mol::{parse_smiles, BondOrder, Element, Molecule};
use tartarus_core::pattern::{AtomPrim, BondPrim, PatternGraph};

pub const CORPUS: &str = include_str!("../data/corpus.smi");
/// Corpus molecules with at most 15 heavy atoms.
pub const SMALL: &str = include_str!("../data/small.smi");

/// Parsed corpus, shared across test cases.
pub fn corpus() -> &'static [Molecule] {
    static CELL: std::sync::OnceLock<Vec<Molecule>> = std::sync::OnceLock::new();
    CELL.get_or_init(|| load(CORPUS))
}

pub fn load(text: &str) -> Vec<Molecule> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_smiles(l.split_whitespace().next().unwrap()).unwrap_or_else(|e| panic!("{l}: {e}")))
        .collect()
}

pub fn random_order(n: usize, seed: u64) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    v
}

/// Tanimoto straight from the definition, over sets of on-bit indices.
pub fn tanimoto_oracle(a: &Fingerprint, b: &Fingerprint) -> f64 {
    let sa: std::collections::BTreeSet<usize> = a.on_bits().collect();
    let sb: std::collections::BTreeSet<usize> = b.on_bits().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

/// Mean pairwise distance, accumulated over (i, j) with i < j in
/// lexicographic order.
pub fn diversity_oracle(fps: &[Fingerprint]) -> f64 {
    let n = fps.len();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += 1.0 - tanimoto_oracle(&fps[i], &fps[j]);
            pairs += 1;
        }
    }
    sum / pairs as f64
}

/// Plain per-atom view of a molecule used by the brute-force matcher,
/// optionally with every hydrogen promoted to a node.
struct View {
    element: Vec<Element>,
    aromatic: Vec<bool>,
    charge: Vec<i8>,
    hydrogens: Vec<u8>,
    hidden_h: Vec<u8>,
    ring_count: Vec<u8>,
    smallest_ring: Vec<u8>,
    /// bonds[a][b] = Some((order, in_ring))
    bonds: Vec<Vec<Option<(BondOrder, bool)>>>,
}

impl View {
    fn new(m: &Molecule, explicit_h: bool) -> View {
        let heavy = m.atom_count();
        let extra: usize = if explicit_h {
            m.atoms().iter().map(|a| a.total_h() as usize).sum()
        } else {
            0
        };
        let n = heavy + extra;
        let mut v = View {
            element: Vec::with_capacity(n),
            aromatic: Vec::with_capacity(n),
            charge: Vec::with_capacity(n),
            hydrogens: Vec::with_capacity(n),
            hidden_h: Vec::with_capacity(n),
            ring_count: Vec::with_capacity(n),
            smallest_ring: Vec::with_capacity(n),
            bonds: vec![vec![None; n]; n],
        };
        for (i, a) in m.atoms().iter().enumerate() {
            let graph_h = m
                .neighbors(i)
                .iter()
                .filter(|nb| m.atom(nb.atom).element == Element::H)
                .count() as u8;
            v.element.push(a.element);
            v.aromatic.push(a.aromatic);
            v.charge.push(a.formal_charge);
            v.hydrogens.push(if a.element == Element::H { 0 } else { a.total_h() + graph_h });
            v.hidden_h.push(if explicit_h { 0 } else { a.total_h() });
            let rings: Vec<usize> = m
                .rings()
                .rings()
                .iter()
                .filter(|r| r.atoms.contains(&i))
                .map(|r| r.atoms.len())
                .collect();
            v.ring_count.push(rings.len() as u8);
            v.smallest_ring.push(rings.iter().min().copied().unwrap_or(0) as u8);
        }
        for b in m.bonds() {
            v.bonds[b.begin][b.end] = Some((b.order, b.in_ring));
            v.bonds[b.end][b.begin] = Some((b.order, b.in_ring));
        }
        if explicit_h {
            let mut k = heavy;
            for (i, a) in m.atoms().iter().enumerate() {
                for _ in 0..a.total_h() {
                    v.element.push(Element::H);
                    v.aromatic.push(false);
                    v.charge.push(0);
                    v.hydrogens.push(0);
                    v.hidden_h.push(0);
                    v.ring_count.push(0);
                    v.smallest_ring.push(0);
                    v.bonds[i][k] = Some((BondOrder::Single, false));
                    v.bonds[k][i] = Some((BondOrder::Single, false));
                    k += 1;
                }
            }
        }
        v
    }

    fn degree(&self, i: usize) -> usize {
        self.bonds[i].iter().filter(|b| b.is_some()).count()
    }

    fn atom_ok(&self, i: usize, p: &AtomPrim) -> bool {
        match *p {
            AtomPrim::Any => true,
            AtomPrim::Element(el, arom) => self.element[i] == el && arom.is_none_or(|x| x == self.aromatic[i]),
            AtomPrim::Aromatic(x) => self.aromatic[i] == x,
            AtomPrim::RingCount(None) => self.ring_count[i] > 0,
            AtomPrim::RingCount(Some(k)) => self.ring_count[i] == k,
            AtomPrim::SmallestRing(k) => self.smallest_ring[i] == k,
            AtomPrim::TotalConnections(k) => self.degree(i) + self.hidden_h[i] as usize == k as usize,
            AtomPrim::ExplicitDegree(k) => self.degree(i) == k as usize,
            AtomPrim::TotalHydrogens(k) => self.hydrogens[i] == k,
            AtomPrim::Charge(c) => self.charge[i] == c,
        }
    }
}

fn bond_ok(order: BondOrder, ring: bool, p: &BondPrim) -> bool {
    match *p {
        BondPrim::Any => true,
        BondPrim::Ring => ring,
        BondPrim::Order(o) => o == order,
    }
}

/// Exhaustive search over injective assignments of pattern atoms, taken in
/// index order, to molecule atoms. Returns true at the first assignment
/// satisfying every atom and bond predicate.
pub fn brute_force_has_match(m: &Molecule, p: &PatternGraph) -> bool {
    let v = View::new(m, p.mentions_hydrogen_atoms());
    let n = v.element.len();
    let pa = p.atoms();
    let mut assign: Vec<usize> = Vec::with_capacity(pa.len());
    let mut used = vec![false; n];

    fn go(v: &View, p: &PatternGraph, assign: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let k = assign.len();
        if k == p.atoms().len() {
            return true;
        }
        for t in 0..used.len() {
            if used[t] || !p.atoms()[k].eval(&|prim| v.atom_ok(t, prim)) {
                continue;
            }
            let bonds_ok = p.bonds().iter().all(|qb| {
                let (x, y) = (qb.a, qb.b);
                let other = if x == k && y < k {
                    y
                } else if y == k && x < k {
                    x
                } else {
                    return true;
                };
                match v.bonds[t][assign[other]] {
                    Some((order, ring)) => qb.expr.eval(&|prim| bond_ok(order, ring, prim)),
                    None => false,
                }
            });
            if !bonds_ok {
                continue;
            }
            used[t] = true;
            assign.push(t);
            if go(v, p, assign, used) {
                return true;
            }
            assign.pop();
            used[t] = false;
        }
        false
    }
    go(&v, p, &mut assign, &mut used)
}

/// Every atom within the bonding capacity of its element and charge.
pub fn within_valence(m: &Molecule) -> bool {
    let table = tartarus_core::mol::ValenceTable::standard();
    (0..m.atom_count()).all(|i| {
        let a = m.atom(i);
        m.valence(i) <= table.capacity(a.element, a.formal_charge)
    })
}

/// Every forbidden and required pattern of the three shipped banks.
pub fn all_alerts() -> Vec<PatternGraph> {
    use tartarus_core::pattern::{docking_bank, emitter_bank, reactivity_bank, TpsaMode};
    let mut out = Vec::new();
    for bank in [docking_bank(TpsaMode::AsWritten), emitter_bank(), reactivity_bank()] {
        out.extend(bank.forbidden_patterns().cloned());
        out.extend(bank.required_patterns().cloned());
    }
    out
}

pub fn small() -> &'static [Molecule] {
    static CELL: std::sync::OnceLock<Vec<Molecule>> = std::sync::OnceLock::new();
    CELL.get_or_init(|| load(SMALL))
}

/// Standard normal pairs via Box-Muller.
pub fn gaussian_points(n: usize, seed: u64) -> Vec<[f64; 2]> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            let r = (-2.0 * u1.ln()).sqrt();
            let t = 2.0 * std::f64::consts::PI * u2;
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}
