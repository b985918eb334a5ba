//! Element physics and the explicit update.
//!
//! Capacitance is row-sum lumped, so the update is diagonal and never forms
//! a global matrix: `T^{n+1} = T^n + dt · (F - K T^n) / C`. Phase change
//! enters through the apparent heat capacity evaluated from element gradients
//! of nodal enthalpy and temperature.

mod conditions;
mod config;
mod kernel;
mod material;
mod model;
mod state;

pub use conditions::{convective_facet_load, Coefficient, Condition};
pub use config::{
    CoefficientConfig, ConditionConfig, DtPolicy, ModelConfig, RegionConfig, SolverConfig, TableConfig,
};
pub use kernel::{apparent_heat_capacity, element_dt_bound, element_load, explicit_update, interface_ambient, LEMMON_EPS};
pub use material::{EnthalpyCurve, Material, MaterialSpec, Table};
pub use model::{Assembly, FacetLoad, FixedNode, Model};
pub use state::{max_relative_deviation, next_dt, ReferenceSolver, Sample, SolverState, Stepper};

use thiserror::Error;

use crate::mesh::MeshError;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no material for region {0}")]
    MissingMaterial(u32),
    #[error("no boundary condition for facet tag `{0}`")]
    UnknownTag(String),
    #[error("no ambient temperature for interface facet {facet}")]
    MissingAmbient { facet: usize },
    #[error("zero lumped capacitance at node {node}")]
    ZeroCapacity { node: usize },
    #[error("non-positive stable time step {0}")]
    NonPositiveTimestep(f64),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}
