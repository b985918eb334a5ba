use crate::fem::{element_dt_bound, element_load, explicit_update, interface_ambient, FemError, FixedNode, Model};
use crate::mesh::{Mesh, TetGeometry};
use crate::partition::{block_partition, PartMap};

use super::BlockedError;

const NONE: usize = usize::MAX;

/// A set of elements with its own node numbering: the nodes its elements
/// touch (ascending global index) followed by external nodes whose values
/// are supplied from outside.
#[derive(Debug, Clone)]
pub struct Subdomain {
    elements: Vec<usize>,
    nodes: Vec<usize>,
    owned: usize,
    local_of: Vec<usize>,
}

impl Subdomain {
    /// Every element, identity node numbering.
    pub fn whole(mesh: &Mesh) -> Self {
        let n = mesh.node_count();
        Subdomain { elements: (0..mesh.element_count()).collect(), nodes: (0..n).collect(), owned: n, local_of: (0..n).collect() }
    }

    /// `elements` must be ascending.
    pub fn new(mesh: &Mesh, elements: Vec<usize>, externals: &[usize]) -> Self {
        let mut touched: Vec<usize> = elements.iter().flat_map(|&e| mesh.tets()[e].nodes).collect();
        touched.sort_unstable();
        touched.dedup();
        let owned = touched.len();
        let mut local_of = vec![NONE; mesh.node_count()];
        for (i, &g) in touched.iter().enumerate() {
            local_of[g] = i;
        }
        let mut nodes = touched;
        for &g in externals {
            if local_of[g] == NONE {
                local_of[g] = nodes.len();
                nodes.push(g);
            }
        }
        Subdomain { elements, nodes, owned, local_of }
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    /// Global index of every subdomain node.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Nodes `0..owned_count()` are touched by the subdomain's elements.
    pub fn owned_count(&self) -> usize {
        self.owned
    }

    pub fn local(&self, global: usize) -> Option<usize> {
        self.local_of.get(global).copied().filter(|&l| l != NONE)
    }

    pub fn gather(&self, global: &[f64]) -> Vec<f64> {
        self.nodes.iter().map(|&g| global[g]).collect()
    }
}

#[derive(Debug, Clone)]
struct BlockFacet {
    load: usize,
    slots: [u32; 3],
    /// Subdomain indices of the sister element's nodes (interface facets).
    sister: Option<[usize; 4]>,
}

#[derive(Debug, Clone)]
struct Block {
    elements: Vec<usize>,
    /// Subdomain node of each block-local slot, in first-touch order.
    nodes: Vec<usize>,
    conn: Vec<[u32; 4]>,
    geometry: Vec<TetGeometry>,
    material: Vec<u32>,
    /// Facets of element `i` are `facets[facet_start[i]..facet_start[i + 1]]`.
    facet_start: Vec<u32>,
    facets: Vec<BlockFacet>,
}

/// Per-block scratch plus the merged subdomain accumulators.
#[derive(Debug, Clone)]
pub struct Workspace {
    scratch: Vec<[Vec<f64>; 4]>,
    /// Merged lumped capacitance of each owned subdomain node.
    pub capacity: Vec<f64>,
    /// Merged residual of each owned subdomain node.
    pub residual: Vec<f64>,
}

/// Immutable block decomposition of a subdomain with contiguous per-block
/// element data.
#[derive(Debug, Clone)]
pub struct BlockPlan<'m> {
    model: &'m Model,
    sub: Subdomain,
    map: PartMap,
    blocks: Vec<Block>,
    fixed: Vec<(usize, FixedNode)>,
}

impl<'m> BlockPlan<'m> {
    /// Partitions the subdomain's elements into `blocks` blocks.
    pub fn partitioned(model: &'m Model, sub: Subdomain, blocks: usize) -> Result<Self, BlockedError> {
        let map = if blocks == 1 {
            PartMap::single(sub.elements.len())
        } else {
            block_partition(&model.mesh().dual_graph(), &sub.elements, blocks)?
        };
        BlockPlan::new(model, sub, map)
    }

    /// `map` assigns a block to each subdomain element (in subdomain order).
    pub fn new(model: &'m Model, sub: Subdomain, map: PartMap) -> Result<Self, BlockedError> {
        let mesh = model.mesh();
        let mut blocks = Vec::with_capacity(map.part_count());
        let mut slot_of = vec![NONE; sub.owned];
        for members in map.members() {
            let elements: Vec<usize> = members.iter().map(|&i| sub.elements[i]).collect();
            let mut nodes = Vec::new();
            let mut slot = |n: usize, nodes: &mut Vec<usize>| -> u32 {
                if slot_of[n] == NONE {
                    slot_of[n] = nodes.len();
                    nodes.push(n);
                }
                slot_of[n] as u32
            };
            let mut conn = Vec::with_capacity(elements.len());
            let mut facets = Vec::new();
            let mut facet_start = vec![0u32];
            for &e in &elements {
                let local = mesh.tets()[e].nodes.map(|g| sub.local_of[g]);
                conn.push(local.map(|n| slot(n, &mut nodes)));
                for &li in model.loads_of_element(e) {
                    let load = &model.facet_loads()[li];
                    let sister = match load.pair {
                        Some(p) => {
                            let sister_nodes = mesh.tets()[model.pairs()[p].sister].nodes;
                            let local = sister_nodes.map(|g| sub.local(g));
                            if local.iter().any(Option::is_none) {
                                return Err(FemError::MissingAmbient { facet: load.facet }.into());
                            }
                            Some(local.map(Option::unwrap))
                        }
                        None => None,
                    };
                    let slots = load.nodes.map(|g| slot(sub.local_of[g], &mut nodes));
                    facets.push(BlockFacet { load: li, slots, sister });
                }
                facet_start.push(facets.len() as u32);
            }
            for &n in &nodes {
                slot_of[n] = NONE;
            }
            blocks.push(Block {
                geometry: elements.iter().map(|&e| *model.geometry(e)).collect(),
                material: elements.iter().map(|&e| model.element_material_index(e) as u32).collect(),
                elements,
                nodes,
                conn,
                facet_start,
                facets,
            });
        }
        let fixed = model
            .fixed_nodes()
            .iter()
            .filter_map(|f| sub.local(f.node).filter(|&l| l < sub.owned).map(|l| (l, *f)))
            .collect();
        Ok(BlockPlan { model, sub, map, blocks, fixed })
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn subdomain(&self) -> &Subdomain {
        &self.sub
    }

    pub fn block_map(&self) -> &PartMap {
        &self.map
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Global element indices of block `b` in sweep order.
    pub fn block_elements(&self, b: usize) -> &[usize] {
        &self.blocks[b].elements
    }

    /// Global node of each local slot of block `b`.
    pub fn block_nodes(&self, b: usize) -> Vec<usize> {
        self.blocks[b].nodes.iter().map(|&n| self.sub.nodes[n]).collect()
    }

    /// Sum of local slots over all blocks; shared nodes count once per block.
    pub fn total_slots(&self) -> usize {
        self.blocks.iter().map(|b| b.nodes.len()).sum()
    }

    /// Nodes touched by more than one block, as `(global node, blocks)`
    /// ordered by node, blocks ascending. This is the order in which the
    /// merge sums contributions.
    pub fn merge_list(&self) -> Vec<(usize, Vec<usize>)> {
        let mut touching: Vec<Vec<usize>> = vec![Vec::new(); self.sub.owned];
        for (b, block) in self.blocks.iter().enumerate() {
            for &n in &block.nodes {
                touching[n].push(b);
            }
        }
        touching
            .into_iter()
            .enumerate()
            .filter(|(_, bs)| bs.len() > 1)
            .map(|(n, bs)| (self.sub.nodes[n], bs))
            .collect()
    }

    /// Resident bytes of block `b`: nodal T, H, C, r and slot map plus
    /// element connectivity, geometry and material index.
    pub fn block_bytes(&self, b: usize) -> usize {
        let block = &self.blocks[b];
        let per_slot = 4 * size_of::<f64>() + size_of::<usize>();
        let per_element = size_of::<[u32; 4]>() + size_of::<TetGeometry>() + size_of::<u32>();
        block.nodes.len() * per_slot + block.elements.len() * per_element
    }

    pub fn mean_block_bytes(&self) -> f64 {
        (0..self.blocks.len()).map(|b| self.block_bytes(b)).sum::<usize>() as f64 / self.blocks.len() as f64
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            scratch: self.blocks.iter().map(|b| std::array::from_fn(|_| vec![0.0; b.nodes.len()])).collect(),
            capacity: vec![0.0; self.sub.owned],
            residual: vec![0.0; self.sub.owned],
        }
    }

    /// Phases 1 and 2: per-block assembly from subdomain-indexed `t` and `h`,
    /// then accumulation into `ws.capacity` and `ws.residual` in ascending
    /// block order. Returns the minimum element stability bound (without
    /// the safety factor) over the subdomain.
    pub fn assemble(&self, ws: &mut Workspace, t: &[f64], h: &[f64], time: f64) -> Result<f64, FemError> {
        let model = self.model;
        let materials = model.materials();
        ws.capacity.fill(0.0);
        ws.residual.fill(0.0);
        let mut bound = f64::INFINITY;
        for (block, scratch) in self.blocks.iter().zip(&mut ws.scratch) {
            let [bt, bh, bc, br] = scratch;
            for (slot, &n) in block.nodes.iter().enumerate() {
                bt[slot] = t[n];
                bh[slot] = h[n];
            }
            bc.fill(0.0);
            br.fill(0.0);
            for (i, (conn, geom)) in block.conn.iter().zip(&block.geometry).enumerate() {
                let material = &materials[block.material[i] as usize];
                let te = conn.map(|s| bt[s as usize]);
                let he = conn.map(|s| bh[s as usize]);
                let (c, r) = element_load(material, geom, &te, &he);
                let tbar = 0.25 * (te[0] + te[1] + te[2] + te[3]);
                bound = bound.min(element_dt_bound(material, geom, tbar));
                for a in 0..4 {
                    let s = conn[a] as usize;
                    bc[s] += c;
                    br[s] += r[a];
                }
                for f in &block.facets[block.facet_start[i] as usize..block.facet_start[i + 1] as usize] {
                    let load = &model.facet_loads()[f.load];
                    let ambient = f.sister.map(|s| interface_ambient(&s.map(|n| t[n])));
                    let ts = f.slots.map(|s| bt[s as usize]);
                    let q = model.facet_load(load, &ts, ambient, time)?;
                    for k in 0..3 {
                        br[f.slots[k] as usize] += q[k];
                    }
                }
            }
            for (slot, &n) in block.nodes.iter().enumerate() {
                ws.capacity[n] += bc[slot];
                ws.residual[n] += br[slot];
            }
        }
        Ok(bound)
    }

    /// Phase 3 on owned nodes: explicit update, fixed temperatures at
    /// `t_next`, enthalpy refresh. Returns the number of clamped enthalpies.
    pub fn update(&self, ws: &Workspace, t: &mut [f64], h: &mut [f64], dt: f64, t_next: f64) -> Result<usize, FemError> {
        self.update_counting(ws, t, h, dt, t_next, None)
    }

    /// [`update`](Self::update) counting clamps only at owned nodes where
    /// `count` is set.
    pub fn update_counting(
        &self,
        ws: &Workspace,
        t: &mut [f64],
        h: &mut [f64],
        dt: f64,
        t_next: f64,
        count: Option<&[bool]>,
    ) -> Result<usize, FemError> {
        let owned = self.sub.owned;
        explicit_update(&mut t[..owned], &ws.capacity, &ws.residual, dt)
            .map_err(|e| match e {
                FemError::ZeroCapacity { node } => FemError::ZeroCapacity { node: self.sub.nodes[node] },
                e => e,
            })?;
        for (l, f) in &self.fixed {
            t[*l] = self.model.fixed_value(f, t_next, t[*l]);
        }
        let mut clamped = 0;
        for l in 0..owned {
            let (value, c) = self.model.node_material(self.sub.nodes[l]).enthalpy(t[l]);
            h[l] = value;
            clamped += (c && count.is_none_or(|m| m[l])) as usize;
        }
        Ok(clamped)
    }
}
