use super::FemError;

/// Piecewise-linear function of one variable, constant beyond its ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Table {
    pub fn constant(y: f64) -> Self {
        Table { xs: vec![0.0], ys: vec![y] }
    }

    pub fn new(points: &[[f64; 2]]) -> Result<Self, FemError> {
        if points.is_empty() {
            return Err(FemError::Config("empty table".into()));
        }
        if points.windows(2).any(|w| !(w[1][0] > w[0][0])) {
            return Err(FemError::Config("table abscissae must be strictly increasing".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(FemError::Config("table values must be finite".into()));
        }
        Ok(Table { xs: points.iter().map(|p| p[0]).collect(), ys: points.iter().map(|p| p[1]).collect() })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 1 || x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let s = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ys[i] + s * (self.ys[i + 1] - self.ys[i])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn min_value(&self) -> f64 {
        self.ys.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Specific enthalpy H(T) in J/kg: the exact integral of `c(T)` plus latent
/// heat released linearly between solidus and liquidus. `H(t_min) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnthalpyCurve {
    temps: Vec<f64>,
    values: Vec<f64>,
    c_at: Vec<f64>,
    latent_rate: Vec<f64>,
}

impl EnthalpyCurve {
    fn build(c: &Table, latent: f64, solidus: f64, liquidus: f64, t_min: f64, t_max: f64) -> Self {
        let mut temps = vec![t_min, t_max];
        temps.extend(c.breakpoints().iter().copied().filter(|&t| t > t_min && t < t_max));
        if latent > 0.0 {
            temps.extend([solidus, liquidus].into_iter().filter(|&t| t > t_min && t < t_max));
        }
        temps.sort_by(f64::total_cmp);
        temps.dedup();
        let rate = if latent > 0.0 { latent / (liquidus - solidus) } else { 0.0 };
        let c_at: Vec<f64> = temps.iter().map(|&t| c.eval(t)).collect();
        let mut values = vec![0.0; temps.len()];
        let mut latent_rate = vec![0.0; temps.len()];
        for i in 0..temps.len() - 1 {
            let (a, b) = (temps[i], temps[i + 1]);
            let mid = 0.5 * (a + b);
            latent_rate[i] = if mid > solidus && mid < liquidus { rate } else { 0.0 };
            values[i + 1] = values[i] + 0.5 * (c_at[i] + c_at[i + 1]) * (b - a) + latent_rate[i] * (b - a);
        }
        EnthalpyCurve { temps, values, c_at, latent_rate }
    }

    /// H(T), clamping `T` into the table range. The flag reports clamping.
    pub fn eval(&self, t: f64) -> (f64, bool) {
        let n = self.temps.len();
        if t.is_nan() {
            return (f64::NAN, true);
        }
        if t < self.temps[0] {
            return (self.values[0], true);
        }
        if t > self.temps[n - 1] {
            return (self.values[n - 1], true);
        }
        let i = (self.temps.partition_point(|&v| v <= t) - 1).min(n - 2);
        let width = self.temps[i + 1] - self.temps[i];
        let s = t - self.temps[i];
        let slope_c = (self.c_at[i + 1] - self.c_at[i]) / width;
        (self.values[i] + (self.c_at[i] + 0.5 * slope_c * s) * s + self.latent_rate[i] * s, false)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.temps[0], self.temps[self.temps.len() - 1])
    }
}

/// Input description of one region's material.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSpec {
    pub density: f64,
    pub specific_heat: Table,
    pub conductivity: Table,
    pub latent_heat: f64,
    pub solidus: f64,
    pub liquidus: f64,
    pub initial_temperature: f64,
    pub t_min: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub density: f64,
    pub specific_heat: Table,
    pub conductivity: Table,
    pub latent_heat: f64,
    pub solidus: f64,
    pub liquidus: f64,
    pub initial_temperature: f64,
    curve: EnthalpyCurve,
}

impl Material {
    pub fn new(spec: MaterialSpec) -> Result<Self, FemError> {
        let bad = |m: &str| Err(FemError::Config(m.to_string()));
        if !(spec.density > 0.0) {
            return bad("density must be positive");
        }
        if !(spec.specific_heat.min_value() > 0.0) || !(spec.conductivity.min_value() > 0.0) {
            return bad("specific heat and conductivity must be positive");
        }
        if !(spec.t_max > spec.t_min) {
            return bad("t_max must exceed t_min");
        }
        if spec.latent_heat < 0.0 {
            return bad("latent heat must be non-negative");
        }
        if spec.latent_heat > 0.0 && !(spec.liquidus > spec.solidus) {
            return bad("latent heat needs liquidus above solidus");
        }
        let curve = EnthalpyCurve::build(
            &spec.specific_heat,
            spec.latent_heat,
            spec.solidus,
            spec.liquidus,
            spec.t_min,
            spec.t_max,
        );
        Ok(Material {
            density: spec.density,
            specific_heat: spec.specific_heat,
            conductivity: spec.conductivity,
            latent_heat: spec.latent_heat,
            solidus: spec.solidus,
            liquidus: spec.liquidus,
            initial_temperature: spec.initial_temperature,
            curve,
        })
    }

    /// Constant properties without phase change over `[t_min, t_max]`.
    pub fn simple(density: f64, c: f64, k: f64, t0: f64, t_min: f64, t_max: f64) -> Self {
        Material::new(MaterialSpec {
            density,
            specific_heat: Table::constant(c),
            conductivity: Table::constant(k),
            latent_heat: 0.0,
            solidus: t_min,
            liquidus: t_max,
            initial_temperature: t0,
            t_min,
            t_max,
        })
        .expect("valid constant material")
    }

    pub fn c(&self, t: f64) -> f64 {
        self.specific_heat.eval(t)
    }

    pub fn k(&self, t: f64) -> f64 {
        self.conductivity.eval(t)
    }

    /// Nodal enthalpy; out-of-range temperatures are clamped and flagged.
    pub fn enthalpy(&self, t: f64) -> (f64, bool) {
        self.curve.eval(t)
    }

    /// dH/dT of the curve at `t`: sensible heat plus the latent release rate
    /// inside the mushy range.
    pub fn curve_slope(&self, t: f64) -> f64 {
        let latent = if self.latent_heat > 0.0 && t > self.solidus && t < self.liquidus {
            self.latent_heat / (self.liquidus - self.solidus)
        } else {
            0.0
        };
        self.c(t) + latent
    }

    pub fn enthalpy_range(&self) -> (f64, f64) {
        self.curve.range()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn latent_material() -> Material {
        Material::new(MaterialSpec {
            density: 1.0,
            specific_heat: Table::constant(1.0),
            conductivity: Table::constant(1.0),
            latent_heat: 100.0,
            solidus: 0.0,
            liquidus: 1.0,
            initial_temperature: 2.0,
            t_min: 0.0,
            t_max: 5.0,
        })
        .unwrap()
    }

    #[test]
    fn table_interpolates_and_clamps() {
        let t = Table::new(&[[0.0, 1.0], [2.0, 3.0]]).unwrap();
        assert_eq!(t.eval(-1.0), 1.0);
        assert_eq!(t.eval(1.0), 2.0);
        assert_eq!(t.eval(9.0), 3.0);
        assert!(Table::new(&[[1.0, 0.0], [1.0, 2.0]]).is_err());
    }

    #[test]
    fn constant_specific_heat_integrates_linearly() {
        let m = Material::simple(1.0, 2.0, 1.0, 0.0, 0.0, 10.0);
        assert_eq!(m.enthalpy(3.0), (6.0, false));
    }

    #[test]
    fn latent_heat_adds_across_mushy_range() {
        let m = latent_material();
        // piecewise integral of c + L/(T_liq - T_sol) over [0, 1]
        let n = 1000;
        let oracle: f64 = (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) / n as f64;
                let rate = if t > 0.0 && t < 1.0 { 100.0 } else { 0.0 };
                (1.0 + rate) / n as f64
            })
            .sum();
        let (h, clamped) = m.enthalpy(1.0);
        assert!(!clamped);
        assert!((h - 101.0).abs() < 1e-12);
        assert!((h - oracle).abs() < 1e-9);
        assert!((m.enthalpy(0.5).0 - 50.5).abs() < 1e-12);
        assert!((m.enthalpy(3.0).0 - 103.0).abs() < 1e-12);
    }

    #[test]
    fn linear_specific_heat_integrates_quadratically() {
        let m = Material::new(MaterialSpec {
            density: 1.0,
            specific_heat: Table::new(&[[0.0, 1.0], [10.0, 3.0]]).unwrap(),
            conductivity: Table::constant(1.0),
            latent_heat: 0.0,
            solidus: 0.0,
            liquidus: 0.0,
            initial_temperature: 0.0,
            t_min: 0.0,
            t_max: 20.0,
        })
        .unwrap();
        // ∫0^T (1 + 0.2 s) ds = T + 0.1 T²
        assert!((m.enthalpy(4.0).0 - 5.6).abs() < 1e-12);
        // beyond the table c is constant 3
        assert!((m.enthalpy(15.0).0 - (20.0 + 15.0)).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_is_clamped() {
        let m = latent_material();
        assert_eq!(m.enthalpy(-1.0), (0.0, true));
        assert_eq!(m.enthalpy(9.0), (m.enthalpy(5.0).0, true));
    }

    #[test]
    fn enthalpy_is_monotone() {
        let m = Material::new(MaterialSpec {
            density: 7000.0,
            specific_heat: Table::new(&[[300.0, 450.0], [1000.0, 700.0], [1800.0, 800.0]]).unwrap(),
            conductivity: Table::constant(30.0),
            latent_heat: 2.7e5,
            solidus: 1690.0,
            liquidus: 1760.0,
            initial_temperature: 1850.0,
            t_min: 250.0,
            t_max: 2000.0,
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = rng.gen_range(250.0..2000.0);
            let b = rng.gen_range(250.0..2000.0);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            assert!(m.enthalpy(hi).0 >= m.enthalpy(lo).0);
        }
    }
}
