//! Sister-element pairing across cast/mold contacts.
//!
//! Each interface facet is paired once, at setup, with the owner element of
//! the nearest facet (by facet centroid) carrying the opposite contact tag.
//! The sister's mean temperature is the ambient of that facet during the run.

use super::{Mesh, MeshError, Point};

/// Above this many candidate facets the search uses a uniform grid.
const GRID_THRESHOLD: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceSide {
    /// Facet carries the first tag of its contact (the cast side).
    Primary,
    Secondary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePair {
    /// Index into [`Mesh::facets`].
    pub facet: usize,
    /// Element of the other region supplying the ambient temperature.
    pub sister: usize,
    pub contact: usize,
    pub side: InterfaceSide,
    /// Facet-centroid distance to the matched candidate facet.
    pub distance: f64,
}

fn dist2(a: &Point, b: &Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// `(squared distance, owner)` is the ordering key; ties go to the lower
/// element index.
fn better(cand: (f64, usize), best: Option<(f64, usize)>) -> bool {
    match best {
        None => true,
        Some(b) => cand.0 < b.0 || (cand.0 == b.0 && cand.1 < b.1),
    }
}

struct Candidates {
    centroids: Vec<Point>,
    owners: Vec<usize>,
    grid: Option<Grid>,
}

struct Grid {
    origin: Point,
    cell: Point,
    dims: [usize; 3],
    cells: Vec<Vec<usize>>,
}

impl Grid {
    fn build(points: &[Point]) -> Grid {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for d in 0..3 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let per_axis = ((points.len() as f64 / 2.0).cbrt().ceil() as usize).max(1);
        let extent = (0..3).map(|d| hi[d] - lo[d]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut dims = [1usize; 3];
        let mut cell = [0.0; 3];
        for d in 0..3 {
            let span = hi[d] - lo[d];
            dims[d] = if span > 1e-12 * extent { per_axis } else { 1 };
            cell[d] = if span > 0.0 { span / dims[d] as f64 } else { extent };
        }
        let mut grid = Grid { origin: lo, cell, dims, cells: vec![Vec::new(); dims[0] * dims[1] * dims[2]] };
        for (i, p) in points.iter().enumerate() {
            let c = grid.cell_of(p);
            let idx = grid.index(c);
            grid.cells[idx].push(i);
        }
        grid
    }

    fn cell_of(&self, p: &Point) -> [usize; 3] {
        let mut c = [0usize; 3];
        for d in 0..3 {
            let x = ((p[d] - self.origin[d]) / self.cell[d]).floor();
            c[d] = if x <= 0.0 { 0 } else { (x as usize).min(self.dims[d] - 1) };
        }
        c
    }

    fn index(&self, c: [usize; 3]) -> usize {
        (c[2] * self.dims[1] + c[1]) * self.dims[0] + c[0]
    }
}

impl Candidates {
    fn new(centroids: Vec<Point>, owners: Vec<usize>) -> Self {
        let grid = (centroids.len() > GRID_THRESHOLD).then(|| Grid::build(&centroids));
        Candidates { centroids, owners, grid }
    }

    fn nearest(&self, q: &Point) -> (usize, f64) {
        let best = match &self.grid {
            None => self.nearest_brute(q),
            Some(g) => self.nearest_grid(g, q),
        };
        let (d2, owner) = best.expect("candidate set is non-empty");
        (owner, d2.sqrt())
    }

    fn nearest_brute(&self, q: &Point) -> Option<(f64, usize)> {
        let mut best = None;
        for (c, &owner) in self.centroids.iter().zip(&self.owners) {
            let cand = (dist2(q, c), owner);
            if better(cand, best) {
                best = Some(cand);
            }
        }
        best
    }

    fn nearest_grid(&self, g: &Grid, q: &Point) -> Option<(f64, usize)> {
        let home = g.cell_of(q);
        let min_cell = g.cell.iter().copied().fold(f64::INFINITY, f64::min);
        let max_ring = g.dims.iter().copied().max().unwrap_or(1);
        let mut best: Option<(f64, usize)> = None;
        for ring in 0..=max_ring {
            let r = ring as isize;
            for dz in -r..=r {
                for dy in -r..=r {
                    for dx in -r..=r {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != r {
                            continue;
                        }
                        let c = [home[0] as isize + dx, home[1] as isize + dy, home[2] as isize + dz];
                        if (0..3).any(|d| c[d] < 0 || c[d] >= g.dims[d] as isize) {
                            continue;
                        }
                        let idx = g.index([c[0] as usize, c[1] as usize, c[2] as usize]);
                        for &i in &g.cells[idx] {
                            let cand = (dist2(q, &self.centroids[i]), self.owners[i]);
                            if better(cand, best) {
                                best = Some(cand);
                            }
                        }
                    }
                }
            }
            // Anything outside this ring is at least `ring * min_cell` away.
            if let Some((d2, _)) = best {
                let bound = ring as f64 * min_cell;
                if d2 < bound * bound {
                    break;
                }
            }
        }
        best
    }
}

/// Pairs every facet on both sides of every declared contact with its sister
/// element in the other region. Pairs are ordered by contact, then primary
/// side facets ascending, then secondary side facets ascending.
pub fn pair_sister_facets(mesh: &Mesh) -> Result<Vec<InterfacePair>, MeshError> {
    let mut pairs = Vec::new();
    for (ci, contact) in mesh.contacts().iter().enumerate() {
        let side_facets = |tag: &str| -> Vec<usize> {
            mesh.facets().iter().enumerate().filter(|(_, f)| f.tag == tag).map(|(i, _)| i).collect()
        };
        let primary = side_facets(&contact.primary);
        let secondary = side_facets(&contact.secondary);
        if primary.is_empty() || secondary.is_empty() {
            return Err(MeshError::Config(format!(
                "contact {} {} needs tagged facets on both sides",
                contact.primary, contact.secondary
            )));
        }
        for (side, from, to) in
            [(InterfaceSide::Primary, &primary, &secondary), (InterfaceSide::Secondary, &secondary, &primary)]
        {
            let candidates = Candidates::new(
                to.iter().map(|&f| mesh.facet_centroid(f)).collect(),
                to.iter().map(|&f| mesh.facets()[f].owner).collect(),
            );
            for &f in from.iter() {
                let (sister, distance) = candidates.nearest(&mesh.facet_centroid(f));
                let own_region = mesh.tets()[mesh.facets()[f].owner].region;
                if mesh.tets()[sister].region == own_region {
                    return Err(MeshError::Config(format!(
                        "contact {} {} joins facets of the same region {own_region}",
                        contact.primary, contact.secondary
                    )));
                }
                pairs.push(InterfacePair { facet: f, sister, contact: ci, side, distance });
            }
        }
    }
    Ok(pairs)
}
