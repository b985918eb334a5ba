//! Parallel runtime.
//!
//! Workers own disjoint element sets. Every exchange follows a schedule of
//! stages; in each stage a worker swaps data with at most one partner, and
//! the stages are the color classes of an edge coloring of the
//! communication graph.

mod parallel;
mod schedule;
mod transport;

pub use parallel::{exchange, parallel_solve, BlockChoice, ParallelConfig, ParallelRun, TransportKind};
pub use schedule::{edge_color_schedule, vizing_schedule, CommGraph, CommSchedule};
pub use transport::{
    decode_payload, encode_payload, inproc_network, tcp_network, InProcTransport, TcpTransport, Transport,
    HEADER_BYTES,
};

use thiserror::Error;

use crate::blocked::BlockedError;
use crate::fem::FemError;
use crate::partition::PartitionError;

#[derive(Debug, Error)]
pub enum CommError {
    #[error("stage {stage}: exchange between workers {a} and {b} failed: {message}")]
    Transport { stage: u64, a: usize, b: usize, message: String },
    #[error("step {step} stage {stage}: {message}")]
    Protocol { step: u64, stage: u64, message: String },
    #[error("invalid parallel configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Blocked(#[from] BlockedError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("worker {0} panicked")]
    WorkerPanic(usize),
}
