use crate::mesh::{InterfacePair, Mesh};

use super::PartMap;

/// Node classes of one part.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartNodes {
    /// Nodes touched only by this part's elements, ascending.
    pub private: Vec<usize>,
    /// Nodes also touched by other parts, ascending, with those parts.
    pub shared: Vec<(usize, Vec<usize>)>,
    /// Nodes of sister elements owned elsewhere that this part does not
    /// touch, ascending, each with the part that supplies its temperature
    /// (the lowest-numbered owner of a sister element containing it).
    pub external: Vec<(usize, usize)>,
}

impl PartNodes {
    /// Private and shared nodes merged, ascending.
    pub fn local_nodes(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.private.iter().copied().chain(self.shared.iter().map(|s| s.0)).collect();
        all.sort_unstable();
        all
    }

    /// Shared nodes common with part `q`, ascending.
    pub fn shared_with(&self, q: usize) -> Vec<usize> {
        self.shared.iter().filter(|(_, ps)| ps.contains(&q)).map(|s| s.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeClassification {
    pub parts: Vec<PartNodes>,
}

impl NodeClassification {
    /// Parts that `p` exchanges with: those sharing a node with it, those
    /// supplying its external nodes and those it supplies. Ascending.
    pub fn neighbors(&self, p: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.parts[p].shared.iter().flat_map(|s| s.1.iter().copied()).collect();
        out.extend(self.parts[p].external.iter().map(|e| e.1));
        for (q, other) in self.parts.iter().enumerate() {
            if q != p && other.external.iter().any(|e| e.1 == p) {
                out.push(q);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Nodes whose temperature `p` must send to `q` for `q`'s external set.
    pub fn externals_supplied(&self, p: usize, q: usize) -> Vec<usize> {
        self.parts[q].external.iter().filter(|e| e.1 == p).map(|e| e.0).collect()
    }
}

/// Classifies the nodes of every part as private, shared or external.
pub fn classify_nodes(mesh: &Mesh, map: &PartMap, pairs: &[InterfacePair]) -> NodeClassification {
    let part = map.part_of_element();
    let k = map.part_count();
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); mesh.node_count()];
    for (e, t) in mesh.tets().iter().enumerate() {
        for &a in &t.nodes {
            if !touching[a].contains(&part[e]) {
                touching[a].push(part[e]);
            }
        }
    }
    let mut parts = vec![PartNodes::default(); k];
    for (node, ps) in touching.iter_mut().enumerate() {
        ps.sort_unstable();
        if ps.len() == 1 {
            parts[ps[0]].private.push(node);
        } else {
            for &p in ps.iter() {
                let others = ps.iter().copied().filter(|&q| q != p).collect();
                parts[p].shared.push((node, others));
            }
        }
    }
    for pair in pairs {
        let p = part[mesh.facets()[pair.facet].owner];
        let q = part[pair.sister];
        if p == q {
            continue;
        }
        for &a in &mesh.tets()[pair.sister].nodes {
            if !touching[a].contains(&p) {
                parts[p].external.push((a, q));
            }
        }
    }
    for pn in &mut parts {
        pn.external.sort_unstable();
        pn.external.dedup_by_key(|e| e.0);
    }
    NodeClassification { parts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{FacetSpec, Tetrahedron};

    fn two_tets() -> Mesh {
        Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]],
            vec![Tetrahedron { nodes: [0, 1, 2, 3], region: 0 }, Tetrahedron { nodes: [1, 2, 3, 4], region: 0 }],
            Vec::<FacetSpec>::new(),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn shared_face_gives_three_shared_nodes() {
        let c = classify_nodes(&two_tets(), &PartMap::new(vec![0, 1], 2).unwrap(), &[]);
        assert_eq!(c.parts[0].private, vec![0]);
        assert_eq!(c.parts[1].private, vec![4]);
        assert_eq!(c.parts[0].shared, vec![(1, vec![1]), (2, vec![1]), (3, vec![1])]);
        assert_eq!(c.parts[0].shared_with(1), vec![1, 2, 3]);
        assert_eq!(c.neighbors(0), vec![1]);
    }

    #[test]
    fn single_part_is_all_private() {
        let c = classify_nodes(&two_tets(), &PartMap::single(2), &[]);
        assert_eq!(c.parts[0].private, vec![0, 1, 2, 3, 4]);
        assert!(c.parts[0].shared.is_empty());
        assert!(c.neighbors(0).is_empty());
    }
}
