//! Unstructured tetrahedral meshes with multiple decoupled regions.
//!
//! A [`Mesh`] is immutable after construction. Construction validates every
//! structural invariant and fixes element orientation so that all signed
//! volumes are positive.

mod geometry;
mod io;
mod sister;

pub use geometry::{facet_area, signed_volume, tet_geometry, TetGeometry};
pub use io::{parse_mesh, read_mesh_file, write_mesh, write_mesh_file};
pub use sister::{pair_sister_facets, InterfacePair, InterfaceSide};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::Graph;

pub type Point = [f64; 3];

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("element {element} references missing node {node}")]
    DanglingNode { element: usize, node: usize },
    #[error("facet {facet} references missing node {node}")]
    DanglingFacetNode { facet: usize, node: usize },
    #[error("element {element} repeats a node")]
    RepeatedNode { element: usize },
    #[error("element {element} is degenerate (volume {volume:e})")]
    Degenerate { element: usize, volume: f64 },
    #[error("node {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("node {0} is not referenced by any element")]
    OrphanNode(usize),
    #[error("node {node} is shared by regions {first} and {second}")]
    RegionsShareNode { node: usize, first: u32, second: u32 },
    #[error("facet {facet} is not a face of any element")]
    FacetNotOnElement { facet: usize },
    #[error("facet {facet} is an interior face shared by two elements")]
    InteriorFacet { facet: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("permutation has length {got}, mesh has {expected} nodes")]
    PermutationSize { expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tetrahedron {
    pub nodes: [usize; 4],
    pub region: u32,
}

/// A tagged triangular face on the boundary of its owner element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryFacet {
    pub nodes: [usize; 3],
    pub owner: usize,
    pub tag: String,
}

/// A declared contact between two facet tags. The first tag is the primary
/// (cast) side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contact {
    pub primary: String,
    pub secondary: String,
}

/// Facet input before its owner element is resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetSpec {
    pub nodes: [usize; 3],
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    tets: Vec<Tetrahedron>,
    facets: Vec<BoundaryFacet>,
    contacts: Vec<Contact>,
    regions: Vec<u32>,
}

fn sorted3(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

/// The four faces of a tetrahedron, each opposite one vertex.
pub(crate) fn tet_faces(t: &[usize; 4]) -> [[usize; 3]; 4] {
    [
        [t[1], t[2], t[3]],
        [t[0], t[2], t[3]],
        [t[0], t[1], t[3]],
        [t[0], t[1], t[2]],
    ]
}

/// Sorted `(face key, element)` list covering every element face.
fn face_table(tets: &[Tetrahedron]) -> Vec<([usize; 3], usize)> {
    let mut faces = Vec::with_capacity(tets.len() * 4);
    for (e, t) in tets.iter().enumerate() {
        for f in tet_faces(&t.nodes) {
            faces.push((sorted3(f), e));
        }
    }
    faces.sort_unstable();
    faces
}

impl Mesh {
    /// Validates the raw arrays and builds a mesh. Element orientation is
    /// fixed (nodes 1 and 2 swapped) wherever the signed volume is negative.
    pub fn new(
        nodes: Vec<Point>,
        mut tets: Vec<Tetrahedron>,
        facets: Vec<FacetSpec>,
        contacts: Vec<Contact>,
    ) -> Result<Self, MeshError> {
        let n = nodes.len();
        for (i, p) in nodes.iter().enumerate() {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(MeshError::NonFinite(i));
            }
        }
        let mut node_region: Vec<Option<u32>> = vec![None; n];
        for (e, t) in tets.iter_mut().enumerate() {
            for &a in &t.nodes {
                if a >= n {
                    return Err(MeshError::DanglingNode { element: e, node: a });
                }
            }
            let distinct: BTreeSet<usize> = t.nodes.iter().copied().collect();
            if distinct.len() != 4 {
                return Err(MeshError::RepeatedNode { element: e });
            }
            let pts = t.nodes.map(|a| nodes[a]);
            let vol = signed_volume(&pts);
            let longest = geometry::edge_lengths(&pts).into_iter().fold(0.0, f64::max);
            if vol.abs() < geometry::DEGENERACY_EPS * longest.powi(3) {
                return Err(MeshError::Degenerate { element: e, volume: vol });
            }
            if vol < 0.0 {
                t.nodes.swap(1, 2);
            }
            for &a in &t.nodes {
                match node_region[a] {
                    None => node_region[a] = Some(t.region),
                    Some(r) if r != t.region => {
                        return Err(MeshError::RegionsShareNode { node: a, first: r, second: t.region })
                    }
                    _ => {}
                }
            }
        }
        if let Some(orphan) = node_region.iter().position(Option::is_none) {
            return Err(MeshError::OrphanNode(orphan));
        }

        let faces = face_table(&tets);
        let mut resolved = Vec::with_capacity(facets.len());
        for (i, f) in facets.into_iter().enumerate() {
            if let Some(&a) = f.nodes.iter().find(|&&a| a >= n) {
                return Err(MeshError::DanglingFacetNode { facet: i, node: a });
            }
            let key = sorted3(f.nodes);
            let start = faces.partition_point(|(k, _)| *k < key);
            let owners: Vec<usize> = faces[start..].iter().take_while(|(k, _)| *k == key).map(|&(_, e)| e).collect();
            match owners.len() {
                0 => return Err(MeshError::FacetNotOnElement { facet: i }),
                1 => resolved.push(BoundaryFacet { nodes: f.nodes, owner: owners[0], tag: f.tag }),
                _ => return Err(MeshError::InteriorFacet { facet: i }),
            }
        }

        let regions: BTreeSet<u32> = tets.iter().map(|t| t.region).collect();
        Ok(Mesh { nodes, tets, facets: resolved, contacts, regions: regions.into_iter().collect() })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn tets(&self) -> &[Tetrahedron] {
        &self.tets
    }

    pub fn facets(&self) -> &[BoundaryFacet] {
        &self.facets
    }

    pub fn contacts(&self) -> &[Contact] {
        &self.contacts
    }

    /// Distinct region ids, ascending.
    pub fn regions(&self) -> &[u32] {
        &self.regions
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.tets.len()
    }

    pub fn element_points(&self, e: usize) -> [Point; 4] {
        self.tets[e].nodes.map(|a| self.nodes[a])
    }

    pub fn element_geometry(&self, e: usize) -> TetGeometry {
        tet_geometry(&self.element_points(e)).expect("validated mesh has no degenerate elements")
    }

    pub fn element_centroid(&self, e: usize) -> Point {
        centroid(&self.element_points(e))
    }

    pub fn facet_centroid(&self, f: usize) -> Point {
        centroid(&self.facets[f].nodes.map(|a| self.nodes[a]))
    }

    /// Region of every node. Regions are node-disjoint, so this is well defined.
    pub fn node_regions(&self) -> Vec<u32> {
        let mut region = vec![0; self.nodes.len()];
        for t in &self.tets {
            for &a in &t.nodes {
                region[a] = t.region;
            }
        }
        region
    }

    /// Element adjacency graph: an edge joins two elements sharing a
    /// triangular face.
    pub fn dual_graph(&self) -> Graph {
        let faces = face_table(&self.tets);
        let mut edges = Vec::new();
        for w in faces.windows(2) {
            if w[0].0 == w[1].0 {
                edges.push((w[0].1, w[1].1));
            }
        }
        Graph::from_edges(self.tets.len(), edges)
    }

    /// Node adjacency graph: an edge joins two nodes sharing an element edge.
    /// This is the sparsity pattern of the global conductance matrix.
    pub fn node_graph(&self) -> Graph {
        let mut edges = Vec::with_capacity(self.tets.len() * 6);
        for t in &self.tets {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    edges.push((t.nodes[i], t.nodes[j]));
                }
            }
        }
        Graph::from_edges(self.nodes.len(), edges)
    }

    /// Relabels nodes; `new_of_old[i]` is the new index of old node `i`.
    pub fn renumber_nodes(&self, new_of_old: &[usize]) -> Result<Mesh, MeshError> {
        if new_of_old.len() != self.nodes.len() {
            return Err(MeshError::PermutationSize { expected: self.nodes.len(), got: new_of_old.len() });
        }
        let mut nodes = vec![[0.0; 3]; self.nodes.len()];
        for (old, &new) in new_of_old.iter().enumerate() {
            nodes[new] = self.nodes[old];
        }
        let tets = self
            .tets
            .iter()
            .map(|t| Tetrahedron { nodes: t.nodes.map(|a| new_of_old[a]), region: t.region })
            .collect();
        let facets = self
            .facets
            .iter()
            .map(|f| BoundaryFacet { nodes: f.nodes.map(|a| new_of_old[a]), owner: f.owner, tag: f.tag.clone() })
            .collect();
        Ok(Mesh { nodes, tets, facets, contacts: self.contacts.clone(), regions: self.regions.clone() })
    }
}

pub(crate) fn centroid<const K: usize>(pts: &[Point; K]) -> Point {
    let mut c = [0.0; 3];
    for p in pts {
        for d in 0..3 {
            c[d] += p[d];
        }
    }
    c.map(|x| x / K as f64)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn unit_tet() -> Mesh {
        Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            vec![Tetrahedron { nodes: [0, 1, 2, 3], region: 0 }],
            vec![],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn unit_tetrahedron_volume() {
        let m = unit_tet();
        assert_eq!(m.node_count(), 4);
        assert_eq!(m.element_count(), 1);
        assert!((m.element_geometry(0).volume - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn inverted_element_is_reoriented() {
        let m = Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            vec![Tetrahedron { nodes: [0, 2, 1, 3], region: 0 }],
            vec![],
            vec![],
        )
        .unwrap();
        assert_eq!(m.tets()[0].nodes, [0, 1, 2, 3]);
        assert!(m.element_geometry(0).volume > 0.0);
    }

    #[test]
    fn degenerate_and_dangling_elements_are_rejected() {
        let flat = Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
            vec![Tetrahedron { nodes: [0, 1, 2, 3], region: 0 }],
            vec![],
            vec![],
        );
        assert!(matches!(flat, Err(MeshError::Degenerate { .. })));
        let dangling = Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            vec![Tetrahedron { nodes: [0, 1, 2, 99], region: 0 }],
            vec![],
            vec![],
        );
        assert!(matches!(dangling, Err(MeshError::DanglingNode { node: 99, .. })));
    }

    #[test]
    fn regions_must_be_node_disjoint() {
        let r = Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]],
            vec![
                Tetrahedron { nodes: [0, 1, 2, 3], region: 0 },
                Tetrahedron { nodes: [1, 2, 3, 4], region: 1 },
            ],
            vec![],
            vec![],
        );
        assert!(matches!(r, Err(MeshError::RegionsShareNode { .. })));
    }

    fn two_tets() -> Mesh {
        Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]],
            vec![
                Tetrahedron { nodes: [0, 1, 2, 3], region: 0 },
                Tetrahedron { nodes: [1, 2, 3, 4], region: 0 },
            ],
            vec![FacetSpec { nodes: [0, 1, 2], tag: "bottom".into() }],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn dual_graph_of_small_meshes() {
        assert_eq!(unit_tet().dual_graph().edge_count(), 0);
        let m = two_tets();
        let g = m.dual_graph();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(m.facets()[0].owner, 0);
    }

    #[test]
    fn interior_facets_are_rejected() {
        let r = Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]],
            vec![
                Tetrahedron { nodes: [0, 1, 2, 3], region: 0 },
                Tetrahedron { nodes: [1, 2, 3, 4], region: 0 },
            ],
            vec![FacetSpec { nodes: [3, 2, 1], tag: "inner".into() }],
            vec![],
        );
        assert!(matches!(r, Err(MeshError::InteriorFacet { .. })));
    }

    #[test]
    fn node_graph_of_single_tet_is_complete() {
        let g = unit_tet().node_graph();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.max_degree(), 3);
    }
}
