//! Reverse Cuthill-McKee node reordering and bandwidth measurement.

use std::io::Write;

use crate::graph::Graph;
use crate::mesh::{Mesh, MeshError};

/// Bijection on `0..n`; `new_of_old[i]` is the new label of old node `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    new_of_old: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { new_of_old: (0..n).collect() }
    }

    /// Validates bijectivity.
    pub fn new(new_of_old: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; new_of_old.len()];
        for &v in &new_of_old {
            if v >= seen.len() || std::mem::replace(&mut seen[v], true) {
                return None;
            }
        }
        Some(Permutation { new_of_old })
    }

    /// Builds the permutation that places `order[k]` at position `k`.
    pub fn from_order(order: &[usize]) -> Option<Self> {
        let mut new_of_old = vec![usize::MAX; order.len()];
        for (k, &old) in order.iter().enumerate() {
            if old >= order.len() || new_of_old[old] != usize::MAX {
                return None;
            }
            new_of_old[old] = k;
        }
        Some(Permutation { new_of_old })
    }

    pub fn len(&self) -> usize {
        self.new_of_old.len()
    }

    pub fn is_empty(&self) -> bool {
        self.new_of_old.is_empty()
    }

    pub fn new_of_old(&self) -> &[usize] {
        &self.new_of_old
    }

    pub fn inverse(&self) -> Permutation {
        let mut old_of_new = vec![0; self.len()];
        for (old, &new) in self.new_of_old.iter().enumerate() {
            old_of_new[new] = old;
        }
        Permutation { new_of_old: old_of_new }
    }

    /// Moves old-indexed values into new positions.
    pub fn apply<T: Clone>(&self, values: &[T]) -> Vec<T> {
        let mut out = values.to_vec();
        for (old, &new) in self.new_of_old.iter().enumerate() {
            out[new] = values[old].clone();
        }
        out
    }
}

/// Level-structure eccentricity and last level of a BFS from `root`.
fn bfs_levels(g: &Graph, root: usize, dist: &mut [usize], touched: &mut Vec<usize>) -> (usize, Vec<usize>) {
    for &v in touched.iter() {
        dist[v] = usize::MAX;
    }
    touched.clear();
    dist[root] = 0;
    touched.push(root);
    let mut head = 0;
    while head < touched.len() {
        let u = touched[head];
        head += 1;
        for &v in g.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                touched.push(v);
            }
        }
    }
    let ecc = touched.iter().map(|&v| dist[v]).max().unwrap_or(0);
    let last = touched.iter().copied().filter(|&v| dist[v] == ecc).collect();
    (ecc, last)
}

/// George-Liu pseudo-peripheral node search starting from `start`.
pub fn pseudo_peripheral_node(g: &Graph, start: usize) -> usize {
    let mut dist = vec![usize::MAX; g.vertex_count()];
    let mut touched = Vec::new();
    let mut root = start;
    let (mut ecc, mut last) = bfs_levels(g, root, &mut dist, &mut touched);
    loop {
        let candidate = last.iter().copied().min_by_key(|&v| (g.degree(v), v)).expect("non-empty level");
        let (cand_ecc, cand_last) = bfs_levels(g, candidate, &mut dist, &mut touched);
        if cand_ecc > ecc {
            root = candidate;
            ecc = cand_ecc;
            last = cand_last;
        } else {
            return root;
        }
    }
}

/// Reverse Cuthill-McKee permutation.
///
/// Components are visited in order of their smallest old index. Each starts
/// at `seed` if it lies in that component, otherwise at a pseudo-peripheral
/// node. Within the BFS, neighbours are enqueued by ascending degree, ties by
/// ascending old index. The concatenated order is then reversed.
pub fn rcm_permutation(g: &Graph, seed: Option<usize>) -> Permutation {
    let n = g.vertex_count();
    let (_, comp) = g.components();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut nbrs = Vec::new();
    for v in 0..n {
        if visited[v] {
            continue;
        }
        let start = match seed {
            Some(s) if s < n && comp[s] == comp[v] => s,
            _ => pseudo_peripheral_node(g, v),
        };
        visited[start] = true;
        let mut head = order.len();
        order.push(start);
        while head < order.len() {
            let u = order[head];
            head += 1;
            nbrs.clear();
            nbrs.extend(g.neighbors(u).iter().copied().filter(|&w| !visited[w]));
            nbrs.sort_unstable_by_key(|&w| (g.degree(w), w));
            for &w in &nbrs {
                visited[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    Permutation::from_order(&order).expect("BFS order covers every node once")
}

/// `max |new(u) - new(v)|` over all edges.
pub fn bandwidth(g: &Graph, perm: &Permutation) -> usize {
    let p = perm.new_of_old();
    g.edges().map(|(u, v)| p[u].abs_diff(p[v])).max().unwrap_or(0)
}

/// Relabels the mesh nodes. Element and facet order are unchanged.
pub fn permute_mesh(mesh: &Mesh, perm: &Permutation) -> Result<Mesh, MeshError> {
    mesh.renumber_nodes(perm.new_of_old())
}

/// Writes the nonzero pattern of the conductance matrix under `perm` as
/// `row col` coordinate pairs, one per line (diagonal included).
pub fn write_sparsity(g: &Graph, perm: &Permutation, mut w: impl Write) -> std::io::Result<()> {
    let p = perm.new_of_old();
    for u in 0..g.vertex_count() {
        writeln!(w, "{} {}", p[u], p[u])?;
        for &v in g.neighbors(u) {
            writeln!(w, "{} {}", p[u], p[v])?;
        }
    }
    Ok(())
}
