//! Element-based non-overlapped domain decomposition.
//!
//! Every element belongs to exactly one part; parts meet only at nodes.
//! Decoupled regions (cast and mold) are glued together for partitioning by
//! virtual contact elements that live only in the partitioning graph.

mod augment;
mod grow;
mod map;
mod nodes;

pub use augment::{augment_virtual_elements, AugmentedGraph, VirtualElement};
pub use grow::{partition_elements, DEFAULT_BALANCE_TOL};
pub use map::PartMap;
pub use nodes::{classify_nodes, NodeClassification, PartNodes};

use thiserror::Error;

use crate::graph::Graph;
use crate::mesh::{InterfacePair, Mesh};

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("cannot split {elements} elements into {parts} parts")]
    TooManyParts { parts: usize, elements: usize },
    #[error("part count must be at least 1")]
    NoParts,
    #[error("part {0} is empty")]
    EmptyPart(usize),
    #[error("part map has {got} entries, mesh has {expected} elements")]
    Size { expected: usize, got: usize },
    #[error("weights have {got} entries, graph has {expected} vertices")]
    WeightSize { expected: usize, got: usize },
    #[error("mesh declares contacts but no sister pairing was supplied")]
    MissingPairing,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Edge cut, balance and adjacency of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionQuality {
    /// Physical dual-graph edges whose ends lie in different parts.
    pub edge_cut: usize,
    /// Largest part size over mean part size.
    pub imbalance: f64,
    pub part_sizes: Vec<usize>,
    /// Number of distinct adjacent parts, per part.
    pub neighbor_counts: Vec<usize>,
}

/// Quality of `map` over the physical dual graph.
pub fn partition_metrics(dual: &Graph, map: &PartMap) -> PartitionQuality {
    let part = map.part_of_element();
    let k = map.part_count();
    let mut edge_cut = 0;
    let mut adjacent = vec![Vec::new(); k];
    for (u, v) in dual.edges() {
        if part[u] != part[v] {
            edge_cut += 1;
            adjacent[part[u]].push(part[v]);
            adjacent[part[v]].push(part[u]);
        }
    }
    let neighbor_counts = adjacent
        .into_iter()
        .map(|mut a| {
            a.sort_unstable();
            a.dedup();
            a.len()
        })
        .collect();
    let part_sizes = map.part_sizes();
    let mean = part.len() as f64 / k as f64;
    let imbalance = part_sizes.iter().copied().max().unwrap_or(0) as f64 / mean;
    PartitionQuality { edge_cut, imbalance, part_sizes, neighbor_counts }
}

/// Interface pairs whose facet owner and sister element sit in different parts.
pub fn split_interface_pairs(mesh: &Mesh, pairs: &[InterfacePair], map: &PartMap) -> usize {
    let part = map.part_of_element();
    pairs.iter().filter(|p| part[mesh.facets()[p.facet].owner] != part[p.sister]).count()
}

/// Partitions the mesh into `k` parts, optionally with virtual contact
/// elements on the primary side of each contact.
pub fn partition_mesh(
    mesh: &Mesh,
    pairs: &[InterfacePair],
    k: usize,
    augment: bool,
    balance_tol: f64,
) -> Result<PartMap, PartitionError> {
    let graph = if augment {
        augment_virtual_elements(mesh, pairs, true)?
    } else {
        AugmentedGraph::plain(mesh)
    };
    graph.partition(k, balance_tol)
}

/// First-level worker partition plus an independent block partition of each
/// worker's elements.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevel {
    pub workers: PartMap,
    /// Elements of each worker, ascending.
    pub worker_elements: Vec<Vec<usize>>,
    /// Block map of each worker over `worker_elements[w]` (local order).
    pub blocks: Vec<PartMap>,
}

impl TwoLevel {
    /// Global element lists of each block of worker `w`.
    pub fn block_elements(&self, w: usize) -> Vec<Vec<usize>> {
        self.blocks[w]
            .members()
            .into_iter()
            .map(|local| local.into_iter().map(|i| self.worker_elements[w][i]).collect())
            .collect()
    }
}

pub fn two_level_decompose(
    mesh: &Mesh,
    pairs: &[InterfacePair],
    workers: usize,
    blocks_per_worker: usize,
    augment: bool,
) -> Result<TwoLevel, PartitionError> {
    let first = partition_mesh(mesh, pairs, workers, augment, DEFAULT_BALANCE_TOL)?;
    let dual = mesh.dual_graph();
    let worker_elements = first.members();
    let blocks = worker_elements
        .iter()
        .map(|elements| block_partition(&dual, elements, blocks_per_worker))
        .collect::<Result<_, _>>()?;
    Ok(TwoLevel { workers: first, worker_elements, blocks })
}

/// Partitions the subgraph induced by `elements` into `blocks` parts.
pub fn block_partition(dual: &Graph, elements: &[usize], blocks: usize) -> Result<PartMap, PartitionError> {
    let sub = dual.induced(elements);
    let assignment = partition_elements(&sub, &vec![1; elements.len()], blocks, DEFAULT_BALANCE_TOL)?;
    PartMap::new(assignment, blocks)
}
