//! Synthetic structured tetrahedral meshes.
//!
//! Every generator splits hexahedral cells into six tetrahedra sharing the
//! cell's main diagonal (Kuhn subdivision), which is conforming across cells.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fem::{
    CoefficientConfig, ConditionConfig, FemError, Model, ModelConfig, RegionConfig, SolverConfig, TableConfig,
};
use crate::mesh::{Contact, FacetSpec, Mesh, MeshError, Point, Tetrahedron};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("fixture parameter out of range: {0}")]
    Parameter(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

const KUHN_PATHS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Accumulates nodes and tetrahedra of one region on a regular lattice.
struct Lattice {
    origin: Point,
    h: [f64; 3],
    dims: [usize; 3],
}

impl Lattice {
    fn cells(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let [nx, ny, nz] = self.dims;
        (0..nz).flat_map(move |k| (0..ny).flat_map(move |j| (0..nx).map(move |i| [i, j, k])))
    }

    /// Appends the cells accepted by `keep` to `nodes`/`tets` as `region`.
    fn fill(&self, region: u32, keep: impl Fn([usize; 3]) -> bool, nodes: &mut Vec<Point>, tets: &mut Vec<Tetrahedron>) {
        let [nx, ny, _] = self.dims;
        let mut index: HashMap<usize, usize> = HashMap::new();
        let mut node = |p: [usize; 3], nodes: &mut Vec<Point>| -> usize {
            let key = p[0] + (nx + 1) * (p[1] + (ny + 1) * p[2]);
            *index.entry(key).or_insert_with(|| {
                nodes.push([
                    self.origin[0] + p[0] as f64 * self.h[0],
                    self.origin[1] + p[1] as f64 * self.h[1],
                    self.origin[2] + p[2] as f64 * self.h[2],
                ]);
                nodes.len() - 1
            })
        };
        for cell in self.cells() {
            if !keep(cell) {
                continue;
            }
            for path in KUHN_PATHS {
                let mut corner = cell;
                let mut t = [node(corner, nodes), 0, 0, 0];
                for (s, &axis) in path.iter().enumerate() {
                    corner[axis] += 1;
                    t[s + 1] = node(corner, nodes);
                }
                tets.push(Tetrahedron { nodes: t, region });
            }
        }
    }
}

/// Faces of `region` owned by exactly one of its elements, tagged by `tag`
/// from the face centroid. `None` leaves the face untagged (adiabatic).
fn boundary_facets(
    nodes: &[Point],
    tets: &[Tetrahedron],
    region: u32,
    tag: impl Fn(Point) -> Option<&'static str>,
) -> Vec<FacetSpec> {
    let mut count: BTreeMap<[usize; 3], ([usize; 3], usize)> = BTreeMap::new();
    for t in tets.iter().filter(|t| t.region == region) {
        let n = t.nodes;
        for f in [[n[1], n[2], n[3]], [n[0], n[2], n[3]], [n[0], n[1], n[3]], [n[0], n[1], n[2]]] {
            let mut key = f;
            key.sort_unstable();
            count.entry(key).or_insert((f, 0)).1 += 1;
        }
    }
    count
        .into_values()
        .filter(|&(_, c)| c == 1)
        .filter_map(|(f, _)| {
            let mut c = [0.0; 3];
            for &a in &f {
                for d in 0..3 {
                    c[d] += nodes[a][d] / 3.0;
                }
            }
            tag(c).map(|t| FacetSpec { nodes: f, tag: t.to_string() })
        })
        .collect()
}

/// Randomly relabels nodes and reorders elements, as an unstructured mesh
/// generator would.
fn shuffle(
    nodes: Vec<Point>,
    mut tets: Vec<Tetrahedron>,
    mut facets: Vec<FacetSpec>,
    seed: u64,
) -> (Vec<Point>, Vec<Tetrahedron>, Vec<FacetSpec>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut new_of_old: Vec<usize> = (0..nodes.len()).collect();
    new_of_old.shuffle(&mut rng);
    let mut shuffled = vec![[0.0; 3]; nodes.len()];
    for (old, &new) in new_of_old.iter().enumerate() {
        shuffled[new] = nodes[old];
    }
    for t in &mut tets {
        t.nodes = t.nodes.map(|a| new_of_old[a]);
    }
    tets.shuffle(&mut rng);
    for f in &mut facets {
        f.nodes = f.nodes.map(|a| new_of_old[a]);
    }
    (shuffled, tets, facets)
}

fn positive(name: &str, v: usize) -> Result<(), FixtureError> {
    if v == 0 {
        return Err(FixtureError::Parameter(format!("{name} must be at least 1")));
    }
    Ok(())
}

/// Unit cube of `n³` cells (`6n³` tetrahedra), all boundary faces tagged
/// `surface`.
pub fn cube(n: usize) -> Result<Mesh, FixtureError> {
    positive("n", n)?;
    let lat = Lattice { origin: [0.0; 3], h: [1.0 / n as f64; 3], dims: [n; 3] };
    let (mut nodes, mut tets) = (Vec::new(), Vec::new());
    lat.fill(0, |_| true, &mut nodes, &mut tets);
    let facets = boundary_facets(&nodes, &tets, 0, |_| Some("surface"));
    Ok(Mesh::new(nodes, tets, facets, vec![])?)
}

/// Straight bar `[0, length] × [0, w]²` of `cells` cubic cells along x
/// (`w = length / cells`). Faces at `x = 0` are tagged `left`, at
/// `x = length` `right`; the sides are untagged.
pub fn bar(cells: usize, length: f64) -> Result<Mesh, FixtureError> {
    positive("cells", cells)?;
    if !(length > 0.0) {
        return Err(FixtureError::Parameter("length must be positive".into()));
    }
    let h = length / cells as f64;
    let lat = Lattice { origin: [0.0; 3], h: [h; 3], dims: [cells, 1, 1] };
    let (mut nodes, mut tets) = (Vec::new(), Vec::new());
    lat.fill(0, |_| true, &mut nodes, &mut tets);
    let eps = 1e-9 * length;
    let facets = boundary_facets(&nodes, &tets, 0, |c| {
        if c[0] < eps {
            Some("left")
        } else if c[0] > length - eps {
            Some("right")
        } else {
            None
        }
    });
    Ok(Mesh::new(nodes, tets, facets, vec![])?)
}

/// Edge length (m) of the cast cube in [`cast_in_mold`].
pub const CAST_SIZE: f64 = 0.1;

/// Cast cube `[0,a]³` (region 0, `cast_cells` cells per edge) inside a mold
/// shell `[-a,2a]³ \ [0,a]³` (region 1, `mold_cells` cells per `a`), with
/// `a` = [`CAST_SIZE`]. The regions have separate coincident nodes on the
/// interface. Tags: `cast_if` (whole cast boundary), `mold_if` (inner mold
/// boundary), `mold_out` (outer mold boundary), with contact
/// `cast_if`/`mold_if`. Different cell counts give a non-matching
/// interface. Node and element order are scrambled with `seed`.
pub fn cast_in_mold(cast_cells: usize, mold_cells: usize, seed: u64) -> Result<Mesh, FixtureError> {
    positive("cast_cells", cast_cells)?;
    positive("mold_cells", mold_cells)?;
    let a = CAST_SIZE;
    let (mut nodes, mut tets) = (Vec::new(), Vec::new());
    let cast = Lattice { origin: [0.0; 3], h: [a / cast_cells as f64; 3], dims: [cast_cells; 3] };
    cast.fill(0, |_| true, &mut nodes, &mut tets);
    let m = mold_cells;
    let mold = Lattice { origin: [-a; 3], h: [a / m as f64; 3], dims: [3 * m; 3] };
    let inside = |c: [usize; 3]| c.iter().all(|&i| (m..2 * m).contains(&i));
    mold.fill(1, |c| !inside(c), &mut nodes, &mut tets);
    let eps = 1e-9 * a;
    let mut facets = boundary_facets(&nodes, &tets, 0, |_| Some("cast_if"));
    facets.extend(boundary_facets(&nodes, &tets, 1, |c| {
        if c.iter().all(|&x| (-eps..=a + eps).contains(&x)) {
            Some("mold_if")
        } else {
            Some("mold_out")
        }
    }));
    let (nodes, tets, facets) = shuffle(nodes, tets, facets, seed);
    let contacts = vec![Contact { primary: "cast_if".into(), secondary: "mold_if".into() }];
    Ok(Mesh::new(nodes, tets, facets, contacts)?)
}

/// Mesh plus the model configuration that goes with it.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub mesh: Mesh,
    pub config: ModelConfig,
}

impl Fixture {
    pub fn model(&self) -> Result<Model, FemError> {
        Model::from_config(self.mesh.clone(), &self.config)
    }
}

fn constant(v: f64) -> CoefficientConfig {
    CoefficientConfig::Constant(v)
}

/// Aluminium-like cast with a freezing range in a steel-like permanent mold.
pub fn cast_in_mold_config(t_end: f64) -> ModelConfig {
    let cast = RegionConfig {
        rho: 2700.0,
        c: TableConfig::Points(vec![[300.0, 900.0], [950.0, 1100.0]]),
        k: TableConfig::Points(vec![[300.0, 200.0], [950.0, 100.0]]),
        latent_heat: 3.9e5,
        solidus: Some(850.0),
        liquidus: Some(915.0),
        t0: 950.0,
        t_min: 250.0,
        t_max: 1200.0,
    };
    let mold = RegionConfig {
        rho: 7800.0,
        c: TableConfig::Constant(500.0),
        k: TableConfig::Constant(35.0),
        latent_heat: 0.0,
        solidus: None,
        liquidus: None,
        t0: 500.0,
        t_min: 250.0,
        t_max: 1200.0,
    };
    let interface = ConditionConfig::Interface {
        h: CoefficientConfig::Temperature { temperature: vec![[500.0, 1000.0], [950.0, 3000.0]] },
    };
    ModelConfig {
        solver: SolverConfig::new(t_end),
        region: BTreeMap::from([("0".into(), cast), ("1".into(), mold)]),
        bc: BTreeMap::from([
            ("cast_if".into(), interface.clone()),
            ("mold_if".into(), interface),
            ("mold_out".into(), ConditionConfig::Convective { q: 0.0, h: constant(20.0), ambient: constant(300.0) }),
        ]),
    }
}

pub fn cast_in_mold_fixture(cast_cells: usize, mold_cells: usize, seed: u64) -> Result<Fixture, FixtureError> {
    Ok(Fixture {
        name: format!("cast{cast_cells}_mold{mold_cells}"),
        mesh: cast_in_mold(cast_cells, mold_cells, seed)?,
        config: cast_in_mold_config(600.0),
    })
}

/// About 10³ elements (1410).
pub fn small_cast_in_mold() -> Fixture {
    cast_in_mold_fixture(3, 2, 1).expect("valid parameters")
}

/// About 10⁵ elements (90240).
pub fn large_cast_in_mold() -> Fixture {
    cast_in_mold_fixture(12, 8, 2).expect("valid parameters")
}

/// Single-region constant-property material with no latent heat.
pub fn simple_region(rho: f64, c: f64, k: f64, t0: f64, t_min: f64, t_max: f64) -> RegionConfig {
    RegionConfig {
        rho,
        c: TableConfig::Constant(c),
        k: TableConfig::Constant(k),
        latent_heat: 0.0,
        solidus: None,
        liquidus: None,
        t0,
        t_min,
        t_max,
    }
}

/// Cube with an adiabatic (zero-coefficient) surface and constant properties.
pub fn adiabatic_cube(n: usize) -> Result<Fixture, FixtureError> {
    Ok(Fixture {
        name: format!("cube{n}"),
        mesh: cube(n)?,
        config: ModelConfig {
            solver: SolverConfig::new(1.0e6),
            region: BTreeMap::from([("0".into(), simple_region(2.0, 3.0, 5.0, 0.0, -1.0e3, 1.0e3))]),
            bc: BTreeMap::from([(
                "surface".into(),
                ConditionConfig::Convective { q: 0.0, h: constant(0.0), ambient: constant(0.0) },
            )]),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::pair_sister_facets;

    #[test]
    fn unit_cube_has_six_tets_and_eight_nodes() {
        let m = cube(1).unwrap();
        assert_eq!(m.element_count(), 6);
        assert_eq!(m.node_count(), 8);
        assert_eq!(m.facets().len(), 12);
        let vol: f64 = (0..6).map(|e| m.element_geometry(e).volume).sum();
        assert!((vol - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cube_scales_as_six_n_cubed() {
        for n in 1..5 {
            let m = cube(n).unwrap();
            assert_eq!(m.element_count(), 6 * n * n * n);
            assert_eq!(m.node_count(), (n + 1).pow(3));
            assert_eq!(m.facets().len(), 12 * n * n);
            assert!(m.dual_graph().is_connected());
        }
    }

    #[test]
    fn cast_in_mold_regions_are_node_disjoint_and_paired() {
        let m = cast_in_mold(4, 4, 7).unwrap();
        assert_eq!(m.regions(), &[0, 1]);
        assert_eq!(m.element_count(), 6 * 64 + 6 * (12usize.pow(3) - 64));
        let region = m.node_regions();
        for t in m.tets() {
            assert!(t.nodes.iter().all(|&a| region[a] == t.region));
        }
        let count = |tag: &str| m.facets().iter().filter(|f| f.tag == tag).count();
        assert_eq!(count("cast_if"), 6 * 2 * 16);
        assert_eq!(count("mold_if"), 6 * 2 * 16);
        assert_eq!(count("mold_out"), 6 * 2 * 144);
        let pairs = pair_sister_facets(&m).unwrap();
        assert_eq!(pairs.len(), count("cast_if") + count("mold_if"));
        // matching interface: every facet has a coincident sister facet
        assert!(pairs.iter().all(|p| p.distance < 1e-12));
        let total: f64 = (0..m.element_count()).map(|e| m.element_geometry(e).volume).sum();
        assert!((total - 27.0 * CAST_SIZE.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn fixture_sizes() {
        assert_eq!(small_cast_in_mold().mesh.element_count(), 1410);
        assert!(cast_in_mold(1, 2, 0).is_ok());
        assert!(cube(0).is_err());
    }

    #[test]
    fn bar_tags_only_the_ends() {
        let m = bar(10, 2.0).unwrap();
        assert_eq!(m.element_count(), 60);
        assert_eq!(m.facets().iter().filter(|f| f.tag == "left").count(), 2);
        assert_eq!(m.facets().iter().filter(|f| f.tag == "right").count(), 2);
        assert_eq!(m.facets().len(), 4);
    }
}
