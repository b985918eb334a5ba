use super::{MeshError, Point};

/// Elements with `|V| < DEGENERACY_EPS * longest_edge^3` are degenerate.
pub(crate) const DEGENERACY_EPS: f64 = 1e-12;

/// Volume and constant shape-function gradients of a linear tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TetGeometry {
    pub volume: f64,
    pub gradients: [[f64; 3]; 4],
    pub min_edge: f64,
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Point, b: Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn signed_volume(p: &[Point; 4]) -> f64 {
    let e1 = sub(p[1], p[0]);
    let e2 = sub(p[2], p[0]);
    let e3 = sub(p[3], p[0]);
    dot(e1, cross(e2, e3)) / 6.0
}

pub(crate) fn edge_lengths(p: &[Point; 4]) -> [f64; 6] {
    let mut out = [0.0; 6];
    let mut k = 0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let d = sub(p[j], p[i]);
            out[k] = dot(d, d).sqrt();
            k += 1;
        }
    }
    out
}

pub fn facet_area(p: &[Point; 3]) -> f64 {
    let n = cross(sub(p[1], p[0]), sub(p[2], p[0]));
    0.5 * dot(n, n).sqrt()
}

/// Volume and shape gradients of a positively oriented tetrahedron.
///
/// The gradients are the rows of the inverse Jacobian of the affine map from
/// the reference element; `∇N_0` closes the partition of unity.
pub fn tet_geometry(p: &[Point; 4]) -> Result<TetGeometry, MeshError> {
    let e1 = sub(p[1], p[0]);
    let e2 = sub(p[2], p[0]);
    let e3 = sub(p[3], p[0]);
    let det = dot(e1, cross(e2, e3));
    let volume = det / 6.0;
    let edges = edge_lengths(p);
    let longest = edges.iter().copied().fold(0.0, f64::max);
    if !(volume >= DEGENERACY_EPS * longest.powi(3)) || volume == 0.0 {
        return Err(MeshError::Degenerate { element: usize::MAX, volume });
    }
    let g1 = cross(e2, e3).map(|x| x / det);
    let g2 = cross(e3, e1).map(|x| x / det);
    let g3 = cross(e1, e2).map(|x| x / det);
    let g0 = [-(g1[0] + g2[0] + g3[0]), -(g1[1] + g2[1] + g3[1]), -(g1[2] + g2[2] + g3[2])];
    Ok(TetGeometry {
        volume,
        gradients: [g0, g1, g2, g3],
        min_edge: edges.iter().copied().fold(f64::INFINITY, f64::min),
    })
}
