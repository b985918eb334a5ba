//! TOML model configuration: per-region materials, boundary conditions keyed
//! by facet tag, and solver settings.
//!
//! ```toml
//! [solver]
//! safety = 0.1
//! t_end = 60.0
//! output_every = 100
//!
//! [region.0]
//! rho = 7000.0
//! c = [[300.0, 450.0], [1800.0, 800.0]]
//! k = 30.0
//! latent_heat = 2.7e5
//! solidus = 1690.0
//! liquidus = 1760.0
//! T0 = 1850.0
//! t_min = 250.0
//! t_max = 2000.0
//!
//! [bc.mold_out]
//! kind = "convective"
//! h = 10.0
//! T_inf = 300.0
//!
//! [bc.cast_if]
//! kind = "interface"
//! h = { temperature = [[300.0, 500.0], [1800.0, 1500.0]] }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::conditions::{Coefficient, Condition};
use super::material::{Material, MaterialSpec, Table};
use super::FemError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableConfig {
    Constant(f64),
    Points(Vec<[f64; 2]>),
}

impl TableConfig {
    fn build(&self) -> Result<Table, FemError> {
        match self {
            TableConfig::Constant(v) => Ok(Table::constant(*v)),
            TableConfig::Points(p) => Table::new(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientConfig {
    Constant(f64),
    Time { time: Vec<[f64; 2]> },
    Temperature { temperature: Vec<[f64; 2]> },
}

impl CoefficientConfig {
    fn build(&self) -> Result<Coefficient, FemError> {
        Ok(match self {
            CoefficientConfig::Constant(v) => Coefficient::Constant(*v),
            CoefficientConfig::Time { time } => Coefficient::OfTime(Table::new(time)?),
            CoefficientConfig::Temperature { temperature } => Coefficient::OfTemperature(Table::new(temperature)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub rho: f64,
    pub c: TableConfig,
    pub k: TableConfig,
    #[serde(default)]
    pub latent_heat: f64,
    #[serde(default)]
    pub solidus: Option<f64>,
    #[serde(default)]
    pub liquidus: Option<f64>,
    #[serde(rename = "T0")]
    pub t0: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl RegionConfig {
    pub fn build(&self) -> Result<Material, FemError> {
        let (solidus, liquidus) = match (self.solidus, self.liquidus) {
            (Some(s), Some(l)) => (s, l),
            (None, None) if self.latent_heat == 0.0 => (self.t_min, self.t_max),
            _ => return Err(FemError::Config("solidus and liquidus must be given together".into())),
        };
        Material::new(MaterialSpec {
            density: self.rho,
            specific_heat: self.c.build()?,
            conductivity: self.k.build()?,
            latent_heat: self.latent_heat,
            solidus,
            liquidus,
            initial_temperature: self.t0,
            t_min: self.t_min,
            t_max: self.t_max,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConditionConfig {
    Fixed {
        #[serde(rename = "T")]
        value: CoefficientConfig,
    },
    Convective {
        #[serde(default)]
        q: f64,
        h: CoefficientConfig,
        #[serde(rename = "T_inf")]
        ambient: CoefficientConfig,
    },
    Interface {
        h: CoefficientConfig,
    },
}

impl ConditionConfig {
    pub fn build(&self) -> Result<Condition, FemError> {
        Ok(match self {
            ConditionConfig::Fixed { value } => Condition::FixedTemperature { value: value.build()? },
            ConditionConfig::Convective { q, h, ambient } => {
                Condition::Convective { flux: *q, h: h.build()?, ambient: ambient.build()? }
            }
            ConditionConfig::Interface { h } => Condition::Interface { h: h.build()? },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtPolicy {
    /// Stability bound re-evaluated from the current temperatures every step.
    #[default]
    PerStep,
    /// Bound evaluated once from the initial state.
    Fixed,
}

fn default_safety() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Time-integration blending factor; only the explicit scheme (0) exists.
    #[serde(default)]
    pub theta: f64,
    #[serde(default = "default_safety")]
    pub safety: f64,
    pub t_end: f64,
    /// Record a time-series sample every this many steps (0 disables).
    #[serde(default)]
    pub output_every: u64,
    #[serde(default)]
    pub dt_policy: DtPolicy,
}

impl SolverConfig {
    pub fn new(t_end: f64) -> Self {
        SolverConfig { theta: 0.0, safety: default_safety(), t_end, output_every: 0, dt_policy: DtPolicy::PerStep }
    }

    pub fn validate(&self) -> Result<(), FemError> {
        if self.theta != 0.0 {
            return Err(FemError::Config("only the explicit scheme (theta = 0) is implemented".into()));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(FemError::Config(format!("safety {} outside (0, 1]", self.safety)));
        }
        if !(self.t_end >= 0.0) {
            return Err(FemError::Config("t_end must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub solver: SolverConfig,
    /// Keyed by region id.
    pub region: BTreeMap<String, RegionConfig>,
    /// Keyed by facet tag.
    #[serde(default)]
    pub bc: BTreeMap<String, ConditionConfig>,
}

impl ModelConfig {
    pub fn from_toml(text: &str) -> Result<Self, FemError> {
        let cfg: ModelConfig = toml::from_str(text).map_err(|e| FemError::Config(e.to_string()))?;
        cfg.solver.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, FemError> {
        let text = std::fs::read_to_string(path).map_err(|e| FemError::Config(e.to_string()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Materials keyed by numeric region id.
    pub fn materials(&self) -> Result<BTreeMap<u32, Material>, FemError> {
        self.region
            .iter()
            .map(|(id, r)| {
                let id: u32 = id.parse().map_err(|_| FemError::Config(format!("region key `{id}` is not an integer")))?;
                Ok((id, r.build()?))
            })
            .collect()
    }

    pub fn conditions(&self) -> Result<BTreeMap<String, Condition>, FemError> {
        self.bc.iter().map(|(tag, c)| Ok((tag.clone(), c.build()?))).collect()
    }
}
