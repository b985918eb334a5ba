use std::collections::BTreeMap;

use crate::mesh::{facet_area, pair_sister_facets, InterfacePair, Mesh, TetGeometry};

use super::conditions::{convective_facet_load, Condition};
use super::config::{ModelConfig, SolverConfig};
use super::kernel::{element_dt_bound, element_load, interface_ambient};
use super::material::Material;
use super::state::SolverState;
use super::FemError;

/// A facet contributing a boundary flux (convective or interface).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetLoad {
    pub facet: usize,
    pub nodes: [usize; 3],
    pub owner: usize,
    pub area: f64,
    pub condition: usize,
    /// Index into [`Model::pairs`] for interface facets.
    pub pair: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedNode {
    pub node: usize,
    pub condition: usize,
}

/// Node-indexed capacitance diagonal and residual `F - K T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub capacity: Vec<f64>,
    pub residual: Vec<f64>,
}

/// Mesh plus resolved materials, boundary conditions, sister pairs and
/// cached element geometry. Immutable once built.
#[derive(Debug, Clone)]
pub struct Model {
    mesh: Mesh,
    materials: Vec<Material>,
    element_material: Vec<u32>,
    node_material: Vec<u32>,
    conditions: Vec<(String, Condition)>,
    facet_loads: Vec<FacetLoad>,
    element_loads: Vec<Vec<usize>>,
    pairs: Vec<InterfacePair>,
    geometry: Vec<TetGeometry>,
    fixed_nodes: Vec<FixedNode>,
    config: SolverConfig,
}

impl Model {
    pub fn from_config(mesh: Mesh, config: &ModelConfig) -> Result<Self, FemError> {
        Model::new(mesh, config.materials()?, config.conditions()?, config.solver.clone())
    }

    pub fn new(
        mesh: Mesh,
        materials: BTreeMap<u32, Material>,
        conditions: BTreeMap<String, Condition>,
        config: SolverConfig,
    ) -> Result<Self, FemError> {
        config.validate()?;
        let mut material_list = Vec::new();
        let mut material_of_region = BTreeMap::new();
        for &region in mesh.regions() {
            let m = materials.get(&region).ok_or(FemError::MissingMaterial(region))?;
            material_of_region.insert(region, material_list.len() as u32);
            material_list.push(m.clone());
        }
        let element_material: Vec<u32> = mesh.tets().iter().map(|t| material_of_region[&t.region]).collect();
        let node_material: Vec<u32> = mesh.node_regions().iter().map(|r| material_of_region[r]).collect();

        let conditions: Vec<(String, Condition)> = conditions.into_iter().collect();
        let condition_of = |tag: &str| conditions.iter().position(|(t, _)| t == tag);

        let pairs = pair_sister_facets(&mesh)?;
        let mut pair_of_facet: Vec<Option<usize>> = vec![None; mesh.facets().len()];
        for (i, p) in pairs.iter().enumerate() {
            if pair_of_facet[p.facet].replace(i).is_some() {
                return Err(FemError::Config(format!("facet {} belongs to two contacts", p.facet)));
            }
        }

        let mut facet_loads = Vec::new();
        let mut fixed: BTreeMap<usize, usize> = BTreeMap::new();
        for (fi, f) in mesh.facets().iter().enumerate() {
            let ci = condition_of(&f.tag).ok_or_else(|| FemError::UnknownTag(f.tag.clone()))?;
            let condition = &conditions[ci].1;
            match (condition, pair_of_facet[fi]) {
                (Condition::Interface { .. }, None) => {
                    return Err(FemError::Config(format!("tag {} has an interface condition but no contact", f.tag)))
                }
                (Condition::Interface { .. }, pair) | (Condition::Convective { .. }, pair @ None) => {
                    let pts = f.nodes.map(|a| mesh.nodes()[a]);
                    facet_loads.push(FacetLoad {
                        facet: fi,
                        nodes: f.nodes,
                        owner: f.owner,
                        area: facet_area(&pts),
                        condition: ci,
                        pair,
                    });
                }
                (Condition::FixedTemperature { .. }, None) => {
                    for &a in &f.nodes {
                        let entry = fixed.entry(a).or_insert(ci);
                        *entry = (*entry).min(ci);
                    }
                }
                (_, Some(_)) => {
                    return Err(FemError::Config(format!("contact tag {} needs an interface condition", f.tag)))
                }
            }
        }
        let mut element_loads = vec![Vec::new(); mesh.element_count()];
        for (i, l) in facet_loads.iter().enumerate() {
            element_loads[l.owner].push(i);
        }
        let geometry = (0..mesh.element_count()).map(|e| mesh.element_geometry(e)).collect();
        Ok(Model {
            mesh,
            materials: material_list,
            element_material,
            node_material,
            conditions,
            facet_loads,
            element_loads,
            pairs,
            geometry,
            fixed_nodes: fixed.into_iter().map(|(node, condition)| FixedNode { node, condition }).collect(),
            config,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn set_config(&mut self, config: SolverConfig) -> Result<(), FemError> {
        config.validate()?;
        self.config = config;
        Ok(())
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    pub fn element_material(&self, e: usize) -> &Material {
        &self.materials[self.element_material[e] as usize]
    }

    /// Index into [`Model::materials`] of element `e`.
    pub fn element_material_index(&self, e: usize) -> usize {
        self.element_material[e] as usize
    }

    pub fn node_material(&self, n: usize) -> &Material {
        &self.materials[self.node_material[n] as usize]
    }

    pub fn condition(&self, i: usize) -> &Condition {
        &self.conditions[i].1
    }

    pub fn geometry(&self, e: usize) -> &TetGeometry {
        &self.geometry[e]
    }

    pub fn facet_loads(&self) -> &[FacetLoad] {
        &self.facet_loads
    }

    /// Facet loads owned by element `e`.
    pub fn loads_of_element(&self, e: usize) -> &[usize] {
        &self.element_loads[e]
    }

    pub fn pairs(&self) -> &[InterfacePair] {
        &self.pairs
    }

    pub fn fixed_nodes(&self) -> &[FixedNode] {
        &self.fixed_nodes
    }

    /// Initial state: `T = T0` of each node's region, fixed-temperature nodes
    /// at their boundary value for `t = 0`.
    pub fn initial_state(&self) -> SolverState {
        let t: Vec<f64> = (0..self.mesh.node_count()).map(|n| self.node_material(n).initial_temperature).collect();
        self.state_from_temperatures(t, 0.0)
    }

    /// Builds a consistent state (enthalpies from the curves, fixed nodes
    /// imposed) from arbitrary nodal temperatures.
    pub fn state_from_temperatures(&self, mut temperature: Vec<f64>, time: f64) -> SolverState {
        assert_eq!(temperature.len(), self.mesh.node_count());
        self.apply_fixed(&mut temperature, time);
        let mut enthalpy = vec![0.0; temperature.len()];
        let clamped = self.update_enthalpy(&temperature, &mut enthalpy);
        let mut state = SolverState { temperature, enthalpy, time, dt: 0.0, step: 0, clamped: clamped as u64 };
        state.dt = self.stable_timestep(&state.temperature).unwrap_or(0.0);
        state
    }

    /// Overwrites fixed-temperature nodes with their value at `time`.
    pub fn apply_fixed(&self, temperature: &mut [f64], time: f64) {
        for f in &self.fixed_nodes {
            temperature[f.node] = self.fixed_value(f, time, temperature[f.node]);
        }
    }

    /// Prescribed temperature of a fixed node at `time`.
    pub fn fixed_value(&self, f: &FixedNode, time: f64, current: f64) -> f64 {
        match &self.conditions[f.condition].1 {
            Condition::FixedTemperature { value } => value.eval(time, current),
            _ => current,
        }
    }

    /// Recomputes nodal enthalpies; returns the number of clamped nodes.
    pub fn update_enthalpy(&self, temperature: &[f64], enthalpy: &mut [f64]) -> usize {
        let mut clamped = 0;
        for (n, (h, &t)) in enthalpy.iter_mut().zip(temperature).enumerate() {
            let (value, c) = self.node_material(n).enthalpy(t);
            *h = value;
            clamped += c as usize;
        }
        clamped
    }

    /// Ambient temperature of every interface pair.
    pub fn ambient_temperatures(&self, temperature: &[f64]) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|p| interface_ambient(&self.mesh.tets()[p.sister].nodes.map(|a| temperature[a])))
            .collect()
    }

    /// Stability bound `safety · min_e ρ c(T̄) l_e² / k(T̄)` over all elements.
    pub fn stable_timestep(&self, temperature: &[f64]) -> Result<f64, FemError> {
        self.stable_timestep_over(0..self.mesh.element_count(), temperature, self.config.safety)
    }

    pub fn stable_timestep_over(
        &self,
        elements: impl IntoIterator<Item = usize>,
        temperature: &[f64],
        safety: f64,
    ) -> Result<f64, FemError> {
        let mut bound = f64::INFINITY;
        for e in elements {
            let t = self.mesh.tets()[e].nodes.map(|a| temperature[a]);
            let tbar = 0.25 * (t[0] + t[1] + t[2] + t[3]);
            bound = bound.min(element_dt_bound(self.element_material(e), &self.geometry[e], tbar));
        }
        let dt = safety * bound;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(FemError::NonPositiveTimestep(dt));
        }
        Ok(dt)
    }

    /// Flux contributions of one facet load. `ambient` is the sister mean
    /// temperature for interface facets.
    pub fn facet_load(&self, load: &FacetLoad, t: &[f64; 3], ambient: Option<f64>, time: f64) -> Result<[f64; 3], FemError> {
        let surface = (t[0] + t[1] + t[2]) / 3.0;
        Ok(match &self.conditions[load.condition].1 {
            Condition::Convective { flux, h, ambient: t_inf } => {
                convective_facet_load(load.area, *flux, h.eval(time, surface), t_inf.eval(time, surface), t)
            }
            Condition::Interface { h } => {
                let amb = ambient.filter(|a| a.is_finite()).ok_or(FemError::MissingAmbient { facet: load.facet })?;
                convective_facet_load(load.area, 0.0, h.eval(time, surface), amb, t)
            }
            Condition::FixedTemperature { .. } => [0.0; 3],
        })
    }

    /// Element-by-element assembly over `elements` in global numbering; the
    /// facet loads owned by those elements are included. `ambient` is indexed
    /// by interface pair.
    pub fn assemble_local(
        &self,
        elements: &[usize],
        temperature: &[f64],
        enthalpy: &[f64],
        ambient: &[f64],
        time: f64,
    ) -> Result<Assembly, FemError> {
        let n = self.mesh.node_count();
        let mut capacity = vec![0.0; n];
        let mut residual = vec![0.0; n];
        for &e in elements {
            let nodes = self.mesh.tets()[e].nodes;
            let t = nodes.map(|a| temperature[a]);
            let h = nodes.map(|a| enthalpy[a]);
            let (c, r) = element_load(self.element_material(e), &self.geometry[e], &t, &h);
            for a in 0..4 {
                capacity[nodes[a]] += c;
                residual[nodes[a]] += r[a];
            }
            for &li in &self.element_loads[e] {
                let load = &self.facet_loads[li];
                let amb = load.pair.map(|p| ambient.get(p).copied().unwrap_or(f64::NAN));
                let f = self.facet_load(load, &load.nodes.map(|a| temperature[a]), amb, time)?;
                for k in 0..3 {
                    residual[load.nodes[k]] += f[k];
                }
            }
        }
        Ok(Assembly { capacity, residual })
    }
}
