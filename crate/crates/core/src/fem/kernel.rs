//! Element-level kernels. Everything here is pure and works on the four (or
//! three) nodal values of one element (or facet).

use crate::mesh::TetGeometry;

use super::material::Material;
use super::FemError;

/// Relative nodal temperature range below which an element is treated as
/// isothermal.
const RANGE_EPS: f64 = 1e-12;
/// Threshold on `|∇T|²` relative to `(ΔT / l_min)²` below which the gradient
/// ratio is replaced by the secant.
pub const LEMMON_EPS: f64 = 1e-14;

fn gradient(values: &[f64; 4], geom: &TetGeometry) -> [f64; 3] {
    let mut g = [0.0; 3];
    for (v, grad) in values.iter().zip(&geom.gradients) {
        for d in 0..3 {
            g[d] += v * grad[d];
        }
    }
    g
}

fn norm2(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// Apparent heat capacity `sqrt(|∇H|² / |∇T|²)` from the element's linear
/// interpolants of nodal enthalpy and temperature.
///
/// Falls back to the secant `ΔH/ΔT` across the element's hottest and coldest
/// nodes when `|∇T|` is negligible, and to the curve slope at the mean
/// temperature when the element is isothermal.
pub fn apparent_heat_capacity(material: &Material, t: &[f64; 4], h: &[f64; 4], geom: &TetGeometry) -> f64 {
    let tbar = 0.25 * (t[0] + t[1] + t[2] + t[3]);
    let (mut lo, mut hi) = (0, 0);
    for a in 1..4 {
        if t[a] < t[lo] {
            lo = a;
        }
        if t[a] > t[hi] {
            hi = a;
        }
    }
    let range = t[hi] - t[lo];
    if !(range > RANGE_EPS * tbar.abs().max(1.0)) {
        return material.curve_slope(tbar);
    }
    let gt2 = norm2(gradient(t, geom));
    let scale = (range / geom.min_edge).powi(2);
    let value = if gt2 <= LEMMON_EPS * scale {
        (h[hi] - h[lo]) / range
    } else {
        (norm2(gradient(h, geom)) / gt2).sqrt()
    };
    if value > 0.0 && value.is_finite() {
        value
    } else {
        material.curve_slope(tbar)
    }
}

/// Lumped capacitance share (J/K, identical for the four nodes) and the
/// conduction residual `-K^e T^e` (W) of one element. Properties are taken at
/// the element mean temperature.
pub fn element_load(material: &Material, geom: &TetGeometry, t: &[f64; 4], h: &[f64; 4]) -> (f64, [f64; 4]) {
    let tbar = 0.25 * (t[0] + t[1] + t[2] + t[3]);
    let capacity = material.density * apparent_heat_capacity(material, t, h, geom) * geom.volume * 0.25;
    let kv = material.k(tbar) * geom.volume;
    let g = gradient(t, geom);
    let mut r = [0.0; 4];
    for a in 0..4 {
        let ga = &geom.gradients[a];
        r[a] = -kv * (ga[0] * g[0] + ga[1] * g[1] + ga[2] * g[2]);
    }
    (capacity, r)
}

/// Ambient temperature of an interface facet: the mean of its sister
/// element's nodal temperatures.
pub fn interface_ambient(sister_temperatures: &[f64; 4]) -> f64 {
    0.25 * (sister_temperatures[0] + sister_temperatures[1] + sister_temperatures[2] + sister_temperatures[3])
}

/// `ρ c(T̄) l² / k(T̄)` for one element, `l` its shortest edge.
pub fn element_dt_bound(material: &Material, geom: &TetGeometry, tbar: f64) -> f64 {
    material.density * material.c(tbar) * geom.min_edge * geom.min_edge / material.k(tbar)
}

/// `T ← T + dt · r / C` node by node.
pub fn explicit_update(t: &mut [f64], capacity: &[f64], residual: &[f64], dt: f64) -> Result<(), FemError> {
    for (i, ((ti, &c), &r)) in t.iter_mut().zip(capacity).zip(residual).enumerate() {
        if !(c > 0.0) {
            return Err(FemError::ZeroCapacity { node: i });
        }
        *ti += dt * r / c;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::material::{MaterialSpec, Table};
    use crate::mesh::tet_geometry;

    fn unit_geom() -> TetGeometry {
        tet_geometry(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap()
    }

    fn latent() -> Material {
        Material::new(MaterialSpec {
            density: 1.0,
            specific_heat: Table::constant(1.0),
            conductivity: Table::constant(1.0),
            latent_heat: 100.0,
            solidus: 0.0,
            liquidus: 1.0,
            initial_temperature: 0.0,
            t_min: -1.0,
            t_max: 2.0,
        })
        .unwrap()
    }

    #[test]
    fn proportional_fields_give_the_ratio() {
        let m = Material::simple(1.0, 7.0, 1.0, 0.0, -100.0, 100.0);
        let t = [1.0, 4.0, -2.0, 3.0];
        let h = t.map(|x| 2.0 * x + 5.0);
        assert!((apparent_heat_capacity(&m, &t, &h, &unit_geom()) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn isothermal_element_uses_curve_slope() {
        let m = Material::simple(1.0, 7.0, 1.0, 0.0, -100.0, 100.0);
        assert_eq!(apparent_heat_capacity(&m, &[3.0; 4], &[21.0; 4], &unit_geom()), 7.0);
        // inside the mushy range the slope includes the latent rate
        assert_eq!(apparent_heat_capacity(&latent(), &[0.5; 4], &[0.0; 4], &unit_geom()), 101.0);
    }

    #[test]
    fn lemmon_matches_direct_gradient_evaluation() {
        let m = latent();
        let g = unit_geom();
        let t = [0.0, 1.0, 0.0, 0.0];
        let h = t.map(|x| m.enthalpy(x).0);
        // ∇T and ∇H evaluated directly from the analytic shape functions of
        // the reference element: ∇N = (-1,-1,-1), e_x, e_y, e_z.
        let shape = [[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let grad = |v: [f64; 4]| -> [f64; 3] {
            let mut out = [0.0; 3];
            for a in 0..4 {
                for d in 0..3 {
                    out[d] += v[a] * shape[a][d];
                }
            }
            out
        };
        let (gt, gh) = (grad(t), grad(h));
        let expected = ((gh[0] * gh[0] + gh[1] * gh[1] + gh[2] * gh[2]) / (gt[0] * gt[0] + gt[1] * gt[1] + gt[2] * gt[2])).sqrt();
        assert!((apparent_heat_capacity(&m, &t, &h, &g) - expected).abs() < 1e-12);
        assert!((expected - 101.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_temperature_has_zero_residual() {
        let m = Material::simple(2.0, 3.0, 5.0, 0.0, -100.0, 100.0);
        let (c, r) = element_load(&m, &unit_geom(), &[42.0; 4], &[126.0; 4]);
        assert_eq!(r, [0.0; 4]);
        assert!((c - 2.0 * 3.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn unit_capacity_lumps_volume_quarter() {
        let m = Material::simple(1.0, 1.0, 1.0, 0.0, -100.0, 100.0);
        let (c, _) = element_load(&m, &unit_geom(), &[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]);
        assert!((c - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn conduction_residual_sums_to_zero() {
        let m = Material::simple(1.0, 1.0, 3.0, 0.0, -100.0, 100.0);
        let (_, r) = element_load(&m, &unit_geom(), &[1.0, 5.0, -2.0, 0.5], &[1.0, 5.0, -2.0, 0.5]);
        assert!(r.iter().sum::<f64>().abs() < 1e-13);
    }

    #[test]
    fn ambient_is_sister_mean() {
        assert_eq!(interface_ambient(&[10.0, 20.0, 30.0, 40.0]), 25.0);
        assert_eq!(interface_ambient(&[300.0; 4]), 300.0);
    }

    #[test]
    fn explicit_update_arithmetic() {
        let mut t = vec![1.0];
        explicit_update(&mut t, &[2.0], &[-4.0], 0.5).unwrap();
        assert_eq!(t, vec![0.0]);
        let mut t = vec![3.0, 4.0];
        explicit_update(&mut t, &[1.0, 1.0], &[0.0, 0.0], 0.5).unwrap();
        assert_eq!(t, vec![3.0, 4.0]);
        assert!(matches!(explicit_update(&mut t, &[1.0, 0.0], &[0.0, 0.0], 0.5), Err(FemError::ZeroCapacity { node: 1 })));
    }

    #[test]
    fn dt_bound_arithmetic() {
        let m = Material::simple(1.0, 1.0, 1.0, 0.0, -1.0, 1.0);
        let mut g = unit_geom();
        g.min_edge = 0.1;
        assert!((element_dt_bound(&m, &g, 0.0) - 0.01).abs() < 1e-15);
    }
}
