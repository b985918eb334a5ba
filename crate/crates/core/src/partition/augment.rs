use crate::graph::Graph;
use crate::mesh::{InterfacePair, InterfaceSide, Mesh};

use super::grow::partition_elements;
use super::{PartMap, PartitionError};

/// Fictitious tetrahedron spanning an interface: the facet's three nodes plus
/// one node of the sister element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VirtualElement {
    pub nodes: [usize; 4],
    /// Index of the originating interface pair.
    pub pair: usize,
    pub owner: usize,
    pub sister: usize,
}

/// Dual graph of the physical elements followed by any virtual elements.
/// Physical elements keep their indices; virtual element `i` is vertex
/// `physical + i`.
#[derive(Debug, Clone)]
pub struct AugmentedGraph {
    graph: Graph,
    physical: usize,
    virtual_elements: Vec<VirtualElement>,
}

impl AugmentedGraph {
    /// The physical dual graph with nothing added.
    pub fn plain(mesh: &Mesh) -> Self {
        AugmentedGraph { graph: mesh.dual_graph(), physical: mesh.element_count(), virtual_elements: Vec::new() }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn physical_count(&self) -> usize {
        self.physical
    }

    pub fn virtual_elements(&self) -> &[VirtualElement] {
        &self.virtual_elements
    }

    /// Weight 1 for physical elements, 0 for virtual ones.
    pub fn weights(&self) -> Vec<u32> {
        let mut w = vec![1; self.physical];
        w.resize(self.graph.vertex_count(), 0);
        w
    }

    /// Partitions the augmented graph and drops the virtual elements.
    pub fn partition(&self, k: usize, balance_tol: f64) -> Result<PartMap, PartitionError> {
        if !self.graph.is_connected() {
            log::warn!("partitioning graph is not connected");
        }
        let assignment = partition_elements(&self.graph, &self.weights(), k, balance_tol)?;
        PartMap::new(assignment[..self.physical].to_vec(), k)
    }
}

/// Appends a virtual element for every interface facet (only primary-side
/// facets when `one_side` is set). The fourth node is the sister element's
/// node nearest the facet centroid, lowest index on ties.
pub fn augment_virtual_elements(
    mesh: &Mesh,
    pairs: &[InterfacePair],
    one_side: bool,
) -> Result<AugmentedGraph, PartitionError> {
    if pairs.is_empty() && !mesh.contacts().is_empty() {
        return Err(PartitionError::MissingPairing);
    }
    let physical = mesh.element_count();
    let base = mesh.dual_graph();
    let mut edges: Vec<(usize, usize)> = base.edges().collect();
    let mut virtual_elements = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        if one_side && p.side != InterfaceSide::Primary {
            continue;
        }
        let facet = &mesh.facets()[p.facet];
        let c = mesh.facet_centroid(p.facet);
        let m = mesh.tets()[p.sister]
            .nodes
            .iter()
            .copied()
            .map(|a| {
                let x = mesh.nodes()[a];
                ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2), a)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, a)| a)
            .expect("tetrahedron has nodes");
        let v = physical + virtual_elements.len();
        edges.push((v, facet.owner));
        edges.push((v, p.sister));
        virtual_elements.push(VirtualElement {
            nodes: [facet.nodes[0], facet.nodes[1], facet.nodes[2], m],
            pair: i,
            owner: facet.owner,
            sister: p.sister,
        });
    }
    let graph = Graph::from_edges(physical + virtual_elements.len(), edges);
    Ok(AugmentedGraph { graph, physical, virtual_elements })
}
