//! Cache-blocked explicit finite element solver for transient nonlinear heat
//! conduction with solidification on unstructured tetrahedral meshes.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] reads, validates and queries cast/mold tetrahedral meshes.
//! * [`reorder`] computes reverse Cuthill-McKee orderings and bandwidths.
//! * [`partition`] performs element-based non-overlapped decomposition,
//!   including virtual contact elements that glue decoupled regions.
//! * [`fem`] holds the element physics and the explicit update.
//! * [`blocked`] is the serial cache-blocked driver.
//! * [`comm`] is the parallel runtime: edge-coloured exchange schedules,
//!   transports and the distributed driver.
//! * [`bench`] generates synthetic fixtures and runs the benchmark sweeps.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod blocked;
pub mod comm;
pub mod fem;
pub mod graph;
pub mod mesh;
pub mod partition;
pub mod reorder;

pub use fem::{Model, SolverConfig, SolverState};
pub use mesh::Mesh;
