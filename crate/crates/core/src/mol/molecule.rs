use alloc::string::ToString;
use alloc::vec::Vec;

use super::aromatic;
use super::element::Element;
use super::kekule;
use super::rings::{self, RingInfo};
use super::valence;
use super::MolError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to the valence sum. Aromatic bonds only occur in the
    /// perceived view and count as one here; valence bookkeeping always uses
    /// the Kekule orders.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub fn from_valence(order: u8) -> Option<BondOrder> {
        match order {
            1 => Some(BondOrder::Single),
            2 => Some(BondOrder::Double),
            3 => Some(BondOrder::Triple),
            _ => None,
        }
    }

    pub fn is_multiple(self) -> bool {
        matches!(self, BondOrder::Double | BondOrder::Triple)
    }
}

/// Tetrahedral mark as written in the input. Annotation only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chirality {
    Anticlockwise,
    Clockwise,
}

/// Directional single bond mark (`/` or `\`). Annotation only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondStereo {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    /// Hydrogens stated explicitly (bracket count or folded `[H]` atoms).
    pub explicit_h: u8,
    /// Hydrogens inferred from the default valence model.
    pub implicit_h: u8,
    pub aromatic: bool,
    pub in_ring: bool,
    pub isotope: Option<u16>,
    pub chirality: Option<Chirality>,
    /// True when the hydrogen count is fixed (bracket atom); false when it
    /// follows the valence model.
    pub fixed_h: bool,
}

impl Atom {
    pub fn total_h(&self) -> u8 {
        self.explicit_h + self.implicit_h
    }

    pub fn is_heavy(&self) -> bool {
        !self.element.is_hydrogen()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bond {
    pub begin: usize,
    pub end: usize,
    /// Perceived order; `Aromatic` inside aromatic rings.
    pub order: BondOrder,
    /// Localized order, never `Aromatic`.
    pub kekule: BondOrder,
    pub in_ring: bool,
    pub stereo: Option<BondStereo>,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.begin == atom {
            self.end
        } else {
            self.begin
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub atom: usize,
    pub bond: usize,
}

/// Attributed molecular graph. Immutable once built.
#[derive(Debug, Clone)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<Neighbor>>,
    rings: RingInfo,
}

impl Molecule {
    pub fn empty() -> Molecule {
        Molecule {
            atoms: Vec::new(),
            bonds: Vec::new(),
            adjacency: Vec::new(),
            rings: RingInfo::default(),
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, index: usize) -> &Atom {
        &self.atoms[index]
    }

    pub fn bond(&self, index: usize) -> &Bond {
        &self.bonds[index]
    }

    pub fn neighbors(&self, atom: usize) -> &[Neighbor] {
        &self.adjacency[atom]
    }

    pub fn rings(&self) -> &RingInfo {
        &self.rings
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.is_heavy()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|n| n.atom == b)
            .map(|n| n.bond)
    }

    /// Number of graph neighbours (hydrogens excluded unless present as atoms).
    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    /// Kekule bond order sum of an atom.
    pub fn bond_order_sum(&self, atom: usize) -> u8 {
        self.adjacency[atom]
            .iter()
            .map(|n| self.bonds[n.bond].kekule.valence())
            .sum()
    }

    /// Occupied valence: Kekule bond orders plus attached hydrogens.
    pub fn valence(&self, atom: usize) -> u8 {
        self.bond_order_sum(atom) + self.atoms[atom].total_h()
    }

    pub fn radical_electrons(&self, atom: usize) -> u8 {
        let a = &self.atoms[atom];
        let occupied = self.valence(atom);
        let default = valence::allowed_valences(a.element, a.formal_charge)
            .into_iter()
            .find(|&v| v >= occupied)
            .unwrap_or(occupied);
        default.saturating_sub(occupied)
    }

    pub fn net_charge(&self) -> i32 {
        self.atoms.iter().map(|a| a.formal_charge as i32).sum()
    }

    /// Connected components as sorted atom index lists, ordered by their
    /// smallest atom index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = alloc::vec![false; self.atoms.len()];
        let mut out = Vec::new();
        for start in 0..self.atoms.len() {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = alloc::vec![start];
            seen[start] = true;
            while let Some(a) = stack.pop() {
                comp.push(a);
                for n in &self.adjacency[a] {
                    if !seen[n.atom] {
                        seen[n.atom] = true;
                        stack.push(n.atom);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Builder specs reproducing this molecule with fixed hydrogens and
    /// Kekule bonds, optionally in a new atom order (`order[new] = old`).
    pub fn to_builder(&self, order: Option<&[usize]>) -> MoleculeBuilder {
        let identity: Vec<usize>;
        let order = match order {
            Some(o) => o,
            None => {
                identity = (0..self.atoms.len()).collect();
                &identity
            }
        };
        let mut position = alloc::vec![usize::MAX; self.atoms.len()];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        let mut b = MoleculeBuilder::new();
        for &old in order {
            let a = &self.atoms[old];
            b.add_atom(AtomSpec {
                element: a.element,
                charge: a.formal_charge,
                hydrogens: Some(a.total_h()),
                aromatic: false,
                isotope: a.isotope,
                chirality: a.chirality,
            });
        }
        let mut bonds: Vec<(usize, usize, &Bond)> = self
            .bonds
            .iter()
            .map(|bd| {
                let (x, y) = (position[bd.begin], position[bd.end]);
                (x.min(y), x.max(y), bd)
            })
            .collect();
        bonds.sort_by_key(|&(x, y, _)| (x, y));
        for (x, y, bd) in bonds {
            b.add_bond_with_stereo(x, y, SpecOrder::Explicit(bd.kekule), bd.stereo);
        }
        b
    }

    /// Copy of the molecule with atoms renumbered so that new atom `i` is old
    /// atom `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Molecule {
        assert_eq!(order.len(), self.atoms.len(), "permutation length");
        self.to_builder(Some(order))
            .build()
            .expect("permutation of a valid molecule is valid")
    }
}

/// Bond order as stated by a producer. `Implicit` is resolved to aromatic
/// (ring bond between two aromatic atoms) or single.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecOrder {
    Implicit,
    Explicit(BondOrder),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomSpec {
    pub element: Element,
    pub charge: i8,
    /// `Some` fixes the hydrogen count; `None` infers it.
    pub hydrogens: Option<u8>,
    pub aromatic: bool,
    pub isotope: Option<u16>,
    pub chirality: Option<Chirality>,
}

impl AtomSpec {
    pub fn new(element: Element) -> AtomSpec {
        AtomSpec {
            element,
            charge: 0,
            hydrogens: None,
            aromatic: false,
            isotope: None,
            chirality: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BondSpec {
    pub a: usize,
    pub b: usize,
    pub order: SpecOrder,
    pub stereo: Option<BondStereo>,
}

/// Collects atoms and bonds, then resolves hydrogens, Kekule structure, rings
/// and aromaticity into a [`Molecule`].
#[derive(Debug, Clone, Default)]
pub struct MoleculeBuilder {
    pub atoms: Vec<AtomSpec>,
    pub bonds: Vec<BondSpec>,
}

impl MoleculeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_atom(&mut self, spec: AtomSpec) -> usize {
        self.atoms.push(spec);
        self.atoms.len() - 1
    }

    pub fn add_bond(&mut self, a: usize, b: usize, order: SpecOrder) {
        self.add_bond_with_stereo(a, b, order, None);
    }

    pub fn add_bond_with_stereo(
        &mut self,
        a: usize,
        b: usize,
        order: SpecOrder,
        stereo: Option<BondStereo>,
    ) {
        self.bonds.push(BondSpec { a, b, order, stereo });
    }

    pub fn build(self) -> Result<Molecule, MolError> {
        let MoleculeBuilder { atoms: specs, bonds: bond_specs } = self;
        let n = specs.len();
        for (i, s) in specs.iter().enumerate() {
            if !(-4..=4).contains(&s.charge) {
                return Err(MolError::Valence {
                    atom: i,
                    reason: "formal charge outside [-4, +4]".to_string(),
                });
            }
            if s.aromatic && !s.element.can_be_aromatic() {
                return Err(MolError::Valence {
                    atom: i,
                    reason: "element cannot be aromatic".to_string(),
                });
            }
        }
        let mut seen_pairs = alloc::collections::BTreeSet::new();
        for bs in &bond_specs {
            if bs.a >= n || bs.b >= n {
                return Err(MolError::InvalidGraph("bond endpoint out of range".to_string()));
            }
            if bs.a == bs.b {
                return Err(MolError::InvalidGraph("bond to self".to_string()));
            }
            if !seen_pairs.insert((bs.a.min(bs.b), bs.a.max(bs.b))) {
                return Err(MolError::InvalidGraph("duplicate bond".to_string()));
            }
        }

        // Fold terminal hydrogen atoms into their heavy neighbour.
        let mut degree = alloc::vec![0usize; n];
        for bs in &bond_specs {
            degree[bs.a] += 1;
            degree[bs.b] += 1;
        }
        let mut folded = alloc::vec![false; n];
        let mut extra_h = alloc::vec![0u8; n];
        for bs in &bond_specs {
            let single = matches!(
                bs.order,
                SpecOrder::Implicit | SpecOrder::Explicit(BondOrder::Single)
            );
            for (h, heavy) in [(bs.a, bs.b), (bs.b, bs.a)] {
                let hs = &specs[h];
                if hs.element == Element::H
                    && hs.charge == 0
                    && degree[h] == 1
                    && hs.hydrogens.unwrap_or(0) == 0
                    && specs[heavy].element != Element::H
                    && single
                {
                    folded[h] = true;
                    extra_h[heavy] += 1;
                }
            }
        }
        let mut new_index = alloc::vec![usize::MAX; n];
        let mut kept = 0usize;
        for i in 0..n {
            if !folded[i] {
                new_index[i] = kept;
                kept += 1;
            }
        }

        // Resolve bond orders: implicit bonds between aromatic atoms are
        // aromatic only when they close a cycle.
        let mut edges: Vec<(usize, usize, SpecOrder, Option<BondStereo>)> = Vec::new();
        for bs in &bond_specs {
            if folded[bs.a] || folded[bs.b] {
                continue;
            }
            edges.push((new_index[bs.a], new_index[bs.b], bs.order, bs.stereo));
        }
        let mut kept_specs: Vec<AtomSpec> = Vec::with_capacity(kept);
        let mut kept_extra_h: Vec<u8> = Vec::with_capacity(kept);
        for i in 0..n {
            if !folded[i] {
                kept_specs.push(specs[i].clone());
                kept_extra_h.push(extra_h[i]);
            }
        }
        let n = kept;
        let plain_edges: Vec<(usize, usize)> = edges.iter().map(|e| (e.0, e.1)).collect();
        let cyclic = rings::cyclic_edges(n, &plain_edges);
        let mut orders: Vec<BondOrder> = edges
            .iter()
            .enumerate()
            .map(|(k, &(a, b, order, _))| match order {
                SpecOrder::Explicit(o) => o,
                SpecOrder::Implicit => {
                    if kept_specs[a].aromatic && kept_specs[b].aromatic && cyclic[k] {
                        BondOrder::Aromatic
                    } else {
                        BondOrder::Single
                    }
                }
            })
            .collect();

        // Hydrogens.
        let mut hydrogens = alloc::vec![0u8; n];
        let mut arom_bonds = alloc::vec![0u8; n];
        let mut bond_sum = alloc::vec![0u8; n];
        for (k, &(a, b, _, _)) in edges.iter().enumerate() {
            let v = orders[k].valence();
            bond_sum[a] += v;
            bond_sum[b] += v;
            if orders[k] == BondOrder::Aromatic {
                arom_bonds[a] += 1;
                arom_bonds[b] += 1;
            }
        }
        for i in 0..n {
            let s = &kept_specs[i];
            hydrogens[i] = match s.hydrogens {
                Some(h) => h,
                None => {
                    let sum = bond_sum[i] + kept_extra_h[i];
                    let inferred = if s.aromatic && arom_bonds[i] > 0 {
                        aromatic_implicit_h(s.element, s.charge, sum)
                    } else {
                        valence::implicit_hydrogens(s.element, s.charge, sum)
                    };
                    match inferred {
                        Some(h) => h,
                        None => {
                            return Err(MolError::Valence {
                                atom: i,
                                reason: alloc::format!(
                                    "{} with bond order sum {} exceeds every allowed valence",
                                    s.element,
                                    sum
                                ),
                            })
                        }
                    }
                }
            };
        }
        // Folded hydrogens count towards the atom's hydrogen total. For
        // unbracketed atoms the valence model already saw them as bonds.
        let mut explicit_h = alloc::vec![0u8; n];
        let mut implicit_h = alloc::vec![0u8; n];
        for i in 0..n {
            if kept_specs[i].hydrogens.is_some() {
                explicit_h[i] = hydrogens[i] + kept_extra_h[i];
            } else {
                explicit_h[i] = kept_extra_h[i];
                implicit_h[i] = hydrogens[i];
            }
        }

        // Localize aromatic bonds.
        if orders.contains(&BondOrder::Aromatic) {
            let total_h: Vec<u8> = (0..n).map(|i| explicit_h[i] + implicit_h[i]).collect();
            let elements: Vec<(Element, i8)> =
                kept_specs.iter().map(|s| (s.element, s.charge)).collect();
            let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e.0, e.1)).collect();
            kekule::kekulize(&elements, &total_h, &pairs, &mut orders)?;
        }

        let mut adjacency: Vec<Vec<Neighbor>> = alloc::vec![Vec::new(); n];
        let mut bonds: Vec<Bond> = Vec::with_capacity(edges.len());
        for (k, &(a, b, _, stereo)) in edges.iter().enumerate() {
            adjacency[a].push(Neighbor { atom: b, bond: k });
            adjacency[b].push(Neighbor { atom: a, bond: k });
            bonds.push(Bond {
                begin: a,
                end: b,
                order: orders[k],
                kekule: orders[k],
                in_ring: false,
                stereo,
            });
        }
        let mut atoms: Vec<Atom> = kept_specs
            .iter()
            .enumerate()
            .map(|(i, s)| Atom {
                element: s.element,
                formal_charge: s.charge,
                explicit_h: explicit_h[i],
                implicit_h: implicit_h[i],
                aromatic: false,
                in_ring: false,
                isotope: s.isotope,
                chirality: s.chirality,
                fixed_h: s.hydrogens.is_some(),
            })
            .collect();

        for i in 0..n {
            let sum: u8 = adjacency[i].iter().map(|nb| bonds[nb.bond].kekule.valence()).sum();
            let occupied = sum + atoms[i].total_h();
            let cap = valence::max_valence(atoms[i].element, atoms[i].formal_charge);
            if occupied > cap {
                return Err(MolError::Valence {
                    atom: i,
                    reason: alloc::format!(
                        "{}{:+} has valence {} above capacity {}",
                        atoms[i].element,
                        atoms[i].formal_charge,
                        occupied,
                        cap
                    ),
                });
            }
        }

        let rings = rings::perceive_rings(n, &bonds, &adjacency);
        for (k, bond) in bonds.iter_mut().enumerate() {
            bond.in_ring = rings.bond_ring_count(k) > 0;
        }
        for (i, atom) in atoms.iter_mut().enumerate() {
            atom.in_ring = rings.atom_ring_count(i) > 0;
        }
        let mut mol = Molecule {
            atoms,
            bonds,
            adjacency,
            rings,
        };
        aromatic::perceive_aromaticity(&mut mol.atoms, &mut mol.bonds, &mol.adjacency, &mol.rings);
        Ok(mol)
    }
}

/// Hydrogen inference for a lowercase atom: the lowest normal valence is
/// assumed, with one unit reserved for the pi bond when it fits.
fn aromatic_implicit_h(element: Element, charge: i8, bond_sum: u8) -> Option<u8> {
    let allowed = valence::allowed_valences(element, charge);
    let lowest = allowed[0];
    if bond_sum < lowest {
        Some(lowest - bond_sum - 1)
    } else if bond_sum == lowest {
        Some(0)
    } else {
        valence::implicit_hydrogens(element, charge, bond_sum)
    }
}

impl PartialEq for Molecule {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms && self.bonds == other.bonds
    }
}

impl core::fmt::Display for Molecule {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&super::smiles::write_smiles(self))
    }
}
