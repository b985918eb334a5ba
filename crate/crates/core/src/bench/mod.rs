//! Fixtures and the benchmark harness.

pub mod fixtures;
mod harness;
mod plot;

pub use harness::{
    run_benchmark, run_suite, BenchError, BenchReport, BlockRow, MachineInfo, PartitionRow, ReorderRow, SpeedupRow,
    Suite, SuiteSpec, ORACLE_TOLERANCE,
};
