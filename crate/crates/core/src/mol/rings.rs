//! Smallest set of smallest rings.
//!
//! Candidate cycles are generated Horton-style (shortest paths from every
//! root joined by one edge) and a minimum cycle basis is extracted greedily
//! by Gaussian elimination over GF(2) on bond incidence vectors.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;

use super::molecule::{Bond, Neighbor};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ring {
    /// Atoms in cyclic order.
    pub atoms: Vec<usize>,
    /// Bond indices of the ring.
    pub bonds: Vec<usize>,
}

impl Ring {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn contains_atom(&self, atom: usize) -> bool {
        self.atoms.contains(&atom)
    }

    pub fn contains_bond(&self, bond: usize) -> bool {
        self.bonds.contains(&bond)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RingInfo {
    rings: Vec<Ring>,
    atom_counts: Vec<u8>,
    bond_counts: Vec<u8>,
}

impl RingInfo {
    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    pub fn len(&self) -> usize {
        self.rings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rings.is_empty()
    }

    /// Number of SSSR rings containing the atom.
    pub fn atom_ring_count(&self, atom: usize) -> u8 {
        self.atom_counts.get(atom).copied().unwrap_or(0)
    }

    pub fn bond_ring_count(&self, bond: usize) -> u8 {
        self.bond_counts.get(bond).copied().unwrap_or(0)
    }

    pub fn atom_in_ring_of_size(&self, atom: usize, size: usize) -> bool {
        self.rings
            .iter()
            .any(|r| r.len() == size && r.contains_atom(atom))
    }

    pub fn smallest_ring_containing(&self, atom: usize) -> Option<usize> {
        self.rings
            .iter()
            .filter(|r| r.contains_atom(atom))
            .map(Ring::len)
            .min()
    }
}

/// Flags for edges that lie on at least one cycle.
pub(crate) fn cyclic_edges(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    // Bridges via iterative lowlink DFS; every non-bridge edge is cyclic.
    let mut adj: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); n];
    for (k, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, k));
        adj[b].push((a, k));
    }
    let mut disc = alloc::vec![usize::MAX; n];
    let mut low = alloc::vec![0usize; n];
    let mut cyclic = alloc::vec![true; edges.len()];
    let mut time = 0usize;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (vertex, parent edge, next neighbour cursor)
        let mut stack: Vec<(usize, usize, usize)> = alloc::vec![(root, usize::MAX, 0)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(top) = stack.len().checked_sub(1) {
            let (v, parent_edge, cursor) = stack[top];
            if cursor < adj[v].len() {
                let (w, k) = adj[v][cursor];
                stack[top].2 += 1;
                if k == parent_edge {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, k, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    // v was entered through parent_edge from u.
                    low[u] = low[u].min(low[v]);
                    if low[v] > disc[u] {
                        cyclic[parent_edge] = false;
                    }
                }
            }
        }
    }
    cyclic
}

pub(crate) fn perceive_rings(n: usize, bonds: &[Bond], adjacency: &[Vec<Neighbor>]) -> RingInfo {
    let edges: Vec<(usize, usize)> = bonds.iter().map(|b| (b.begin, b.end)).collect();
    let cyclic = cyclic_edges(n, &edges);
    let n_cyclic_edges = cyclic.iter().filter(|&&c| c).count();
    let mut info = RingInfo {
        rings: Vec::new(),
        atom_counts: alloc::vec![0; n],
        bond_counts: alloc::vec![0; bonds.len()],
    };
    if n_cyclic_edges == 0 {
        return info;
    }

    // Cycle rank restricted to the cyclic subgraph.
    let mut cyclic_atoms = alloc::vec![false; n];
    for (k, &(a, b)) in edges.iter().enumerate() {
        if cyclic[k] {
            cyclic_atoms[a] = true;
            cyclic_atoms[b] = true;
        }
    }
    let n_cyclic_atoms = cyclic_atoms.iter().filter(|&&c| c).count();
    let components = count_components(n, &edges, &cyclic, &cyclic_atoms);
    let rank = n_cyclic_edges + components - n_cyclic_atoms;

    let words = bonds.len().div_ceil(64);
    let mut candidates: BTreeSet<(usize, Vec<u64>)> = BTreeSet::new();
    let mut dist = alloc::vec![usize::MAX; n];
    let mut parent = alloc::vec![(usize::MAX, usize::MAX); n];
    for root in 0..n {
        if !cyclic_atoms[root] {
            continue;
        }
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        parent.iter_mut().for_each(|p| *p = (usize::MAX, usize::MAX));
        dist[root] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            for nb in &adjacency[v] {
                if !cyclic[nb.bond] || dist[nb.atom] != usize::MAX {
                    continue;
                }
                dist[nb.atom] = dist[v] + 1;
                parent[nb.atom] = (v, nb.bond);
                queue.push_back(nb.atom);
            }
        }
        for (k, &(x, y)) in edges.iter().enumerate() {
            if !cyclic[k] || dist[x] == usize::MAX || dist[y] == usize::MAX {
                continue;
            }
            if parent[x].1 == k || parent[y].1 == k {
                continue;
            }
            let (px_atoms, px_bonds) = path_to_root(x, &parent);
            let (py_atoms, py_bonds) = path_to_root(y, &parent);
            let shared = px_atoms.iter().filter(|a| py_atoms.contains(a)).count();
            if shared != 1 {
                continue;
            }
            let mut bits = alloc::vec![0u64; words];
            for &b in px_bonds.iter().chain(py_bonds.iter()) {
                bits[b / 64] |= 1 << (b % 64);
            }
            bits[k / 64] |= 1 << (k % 64);
            let len = px_bonds.len() + py_bonds.len() + 1;
            candidates.insert((len, bits));
        }
    }

    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    for (_, bits) in candidates {
        if basis.len() == rank {
            break;
        }
        let mut reduced = bits.clone();
        for (pivot, row) in &basis {
            if reduced[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (r, w) in reduced.iter_mut().zip(row.iter()) {
                    *r ^= *w;
                }
            }
        }
        if let Some(pivot) = first_bit(&reduced) {
            basis.push((pivot, reduced));
            info.rings.push(ring_from_bits(&bits, &edges));
        }
    }

    for ring in &info.rings {
        for &a in &ring.atoms {
            info.atom_counts[a] += 1;
        }
        for &b in &ring.bonds {
            info.bond_counts[b] += 1;
        }
    }
    info
}

fn count_components(
    n: usize,
    edges: &[(usize, usize)],
    cyclic: &[bool],
    include: &[bool],
) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (k, &(a, b)) in edges.iter().enumerate() {
        if cyclic[k] {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
    }
    (0..n)
        .filter(|&i| include[i] && find(&mut parent, i) == i)
        .count()
}

fn path_to_root(mut v: usize, parent: &[(usize, usize)]) -> (Vec<usize>, Vec<usize>) {
    let mut atoms = alloc::vec![v];
    let mut bonds = Vec::new();
    while parent[v].0 != usize::MAX {
        bonds.push(parent[v].1);
        v = parent[v].0;
        atoms.push(v);
    }
    (atoms, bonds)
}

fn first_bit(bits: &[u64]) -> Option<usize> {
    bits.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

fn ring_from_bits(bits: &[u64], edges: &[(usize, usize)]) -> Ring {
    let bond_list: Vec<usize> = (0..edges.len())
        .filter(|&k| bits[k / 64] >> (k % 64) & 1 == 1)
        .collect();
    // Walk the cycle starting from the lowest atom index.
    let start = bond_list
        .iter()
        .map(|&k| edges[k].0.min(edges[k].1))
        .min()
        .unwrap_or(0);
    let mut atoms = alloc::vec![start];
    let mut used = alloc::vec![false; bond_list.len()];
    let mut current = start;
    loop {
        let next = bond_list.iter().enumerate().find(|(i, &k)| {
            !used[*i] && (edges[k].0 == current || edges[k].1 == current)
        });
        let Some((i, &k)) = next else { break };
        used[i] = true;
        let other = if edges[k].0 == current {
            edges[k].1
        } else {
            edges[k].0
        };
        if other == start {
            break;
        }
        atoms.push(other);
        current = other;
    }
    Ring {
        atoms,
        bonds: bond_list,
    }
}
