//! Cache-blocked serial driver.
//!
//! The element set is split into blocks small enough to keep their working
//! set in cache. Each step gathers a block's nodal values into block-local
//! arrays, assembles capacitance and residual there, and adds them into the
//! subdomain accumulators in ascending block order. The update then runs
//! on the merged values, so the result does not depend on the block count.

mod plan;
mod tune;

pub use plan::{BlockPlan, Subdomain, Workspace};
pub use tune::{autotune_block_count, default_candidates, improvement_factor, TuneReport};

use thiserror::Error;

use crate::fem::{next_dt, DtPolicy, FemError, Model, SolverState, Stepper};
use crate::partition::PartitionError;

#[derive(Debug, Error)]
pub enum BlockedError {
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("no candidate block counts")]
    NoCandidates,
    #[error("timings must be positive, got {0} and {1}")]
    NonPositiveTime(f64, f64),
}

/// Whole-mesh solver sweeping one block at a time.
pub struct BlockedSolver<'m> {
    plan: BlockPlan<'m>,
    ws: Workspace,
}

impl<'m> BlockedSolver<'m> {
    pub fn new(model: &'m Model, blocks: usize) -> Result<Self, BlockedError> {
        let plan = BlockPlan::partitioned(model, Subdomain::whole(model.mesh()), blocks)?;
        let ws = plan.workspace();
        Ok(BlockedSolver { plan, ws })
    }

    pub fn from_plan(plan: BlockPlan<'m>) -> Self {
        let ws = plan.workspace();
        BlockedSolver { plan, ws }
    }

    pub fn plan(&self) -> &BlockPlan<'m> {
        &self.plan
    }
}

impl Stepper for BlockedSolver<'_> {
    fn step(&mut self, state: &mut SolverState) -> Result<(), FemError> {
        let cfg = self.plan.model().config();
        let bound = self.plan.assemble(&mut self.ws, &state.temperature, &state.enthalpy, state.time)?;
        let bound = match cfg.dt_policy {
            DtPolicy::PerStep => checked_dt(cfg.safety * bound)?,
            DtPolicy::Fixed => state.dt,
        };
        let dt = next_dt(cfg.dt_policy, bound, state.dt, state.time, cfg.t_end);
        let t_next = state.time + dt;
        state.clamped += self.plan.update(&self.ws, &mut state.temperature, &mut state.enthalpy, dt, t_next)? as u64;
        state.time = t_next;
        state.dt = dt;
        state.step += 1;
        Ok(())
    }
}

pub(crate) fn checked_dt(dt: f64) -> Result<f64, FemError> {
    if dt > 0.0 && dt.is_finite() {
        Ok(dt)
    } else {
        Err(FemError::NonPositiveTimestep(dt))
    }
}
