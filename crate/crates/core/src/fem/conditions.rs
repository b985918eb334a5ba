use super::material::Table;

/// Boundary coefficient that may vary with time or with surface temperature.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    OfTime(Table),
    OfTemperature(Table),
}

impl Coefficient {
    pub fn eval(&self, time: f64, temperature: f64) -> f64 {
        match self {
            Coefficient::Constant(v) => *v,
            Coefficient::OfTime(t) => t.eval(time),
            Coefficient::OfTemperature(t) => t.eval(temperature),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(v: f64) -> Self {
        Coefficient::Constant(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    /// `T = f(t)` on the tagged facets' nodes.
    FixedTemperature { value: Coefficient },
    /// `-k ∂T/∂n = q + h (T - T∞)`.
    Convective { flux: f64, h: Coefficient, ambient: Coefficient },
    /// Convective coupling to the sister element's mean temperature.
    Interface { h: Coefficient },
}

/// Lumped facet load: each of the three nodes receives a third of the facet
/// flux evaluated with its own temperature.
pub fn convective_facet_load(area: f64, flux: f64, h: f64, ambient: f64, t: &[f64; 3]) -> [f64; 3] {
    t.map(|ta| (-flux + h * (ambient - ta)) * area / 3.0)
}
