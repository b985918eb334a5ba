//! Block-count and worker-count sweeps with CSV reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::blocked::{improvement_factor, BlockedError, BlockedSolver};
use crate::comm::{parallel_solve, BlockChoice, CommError, ParallelConfig};
use crate::fem::{max_relative_deviation, FemError, ReferenceSolver, SolverState, Stepper};
use crate::partition::{partition_mesh, partition_metrics, split_interface_pairs, PartitionError, DEFAULT_BALANCE_TOL};
use crate::reorder::{bandwidth, permute_mesh, rcm_permutation, Permutation};
use crate::Model;

use super::fixtures::{cast_in_mold_fixture, Fixture, FixtureError};
use super::plot;

/// Largest relative deviation from the serial oracle a timed run may have.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Blocked(#[from] BlockedError),
    #[error(transparent)]
    Comm(#[from] CommError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Mesh(#[from] crate::mesh::MeshError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Quick,
    Full,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quick" => Ok(Suite::Quick),
            "full" => Ok(Suite::Full),
            _ => Err(format!("unknown suite `{s}` (expected quick or full)")),
        }
    }
}

/// What a suite runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSpec {
    /// `(cast cells, mold cells, seed)` of each cast-in-mold fixture.
    pub fixtures: Vec<(usize, usize, u64)>,
    pub block_counts: Vec<usize>,
    pub worker_counts: Vec<usize>,
    pub steps: u64,
    /// Timed repetitions per run; the fastest counts.
    pub repeats: usize,
    /// Part count for the augmentation comparison.
    pub parts: usize,
}

impl SuiteSpec {
    pub fn of(suite: Suite) -> Self {
        match suite {
            Suite::Quick => SuiteSpec {
                fixtures: vec![(3, 2, 1), (6, 4, 2)],
                block_counts: vec![1, 2, 4, 8, 16],
                worker_counts: vec![1, 2, 4],
                steps: 50,
                repeats: 1,
                parts: 6,
            },
            Suite::Full => SuiteSpec {
                fixtures: vec![(3, 2, 1), (6, 4, 2), (12, 8, 2), (16, 12, 3)],
                block_counts: vec![1, 2, 4, 8, 16, 32, 64, 128, 256, 512],
                worker_counts: vec![1, 2, 4, 8],
                steps: 100,
                repeats: 3,
                parts: 6,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockRow {
    pub fixture: String,
    /// `original` or `rcm`.
    pub variant: &'static str,
    pub blocks: usize,
    pub seconds: f64,
    pub improvement: f64,
    /// Block-local node slots summed over blocks.
    pub total_nodes: usize,
    pub mean_block_bytes: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupRow {
    pub fixture: String,
    pub workers: usize,
    pub seconds: f64,
    pub speedup: f64,
    pub cache_blocked: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReorderRow {
    pub fixture: String,
    pub nodes: usize,
    pub bandwidth_before: usize,
    pub bandwidth_after: usize,
    /// Unblocked serial time on the original and the reordered mesh.
    pub seconds_original: f64,
    pub seconds_rcm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionRow {
    pub fixture: String,
    pub parts: usize,
    pub augmented: bool,
    pub edge_cut: usize,
    pub imbalance: f64,
    pub split_pairs: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MachineInfo {
    pub cpu_model: String,
    pub logical_cpus: usize,
    /// `(level, type, size)` of the caches of CPU 0.
    pub caches: Vec<(String, String, String)>,
}

impl MachineInfo {
    /// Reads `/proc/cpuinfo` and sysfs where they exist.
    pub fn detect() -> Self {
        let cpuinfo = fs::read_to_string("/proc/cpuinfo").unwrap_or_default();
        let cpu_model = cpuinfo
            .lines()
            .find_map(|l| l.strip_prefix("model name").and_then(|r| r.split_once(':')).map(|(_, v)| v.trim().to_string()))
            .unwrap_or_else(|| "unknown".into());
        let logical_cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
        let mut caches = Vec::new();
        for i in 0.. {
            let dir = PathBuf::from(format!("/sys/devices/system/cpu/cpu0/cache/index{i}"));
            if !dir.exists() {
                break;
            }
            let read = |f: &str| fs::read_to_string(dir.join(f)).map(|s| s.trim().to_string()).unwrap_or_default();
            caches.push((read("level"), read("type"), read("size")));
        }
        MachineInfo { cpu_model, logical_cpus, caches }
    }

    pub fn describe(&self) -> String {
        let mut out = format!("cpu: {}\nlogical_cpus: {}\n", self.cpu_model, self.logical_cpus);
        for (level, kind, size) in &self.caches {
            writeln!(out, "cache L{level} {kind}: {size}").unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub machine: MachineInfo,
    pub steps: u64,
    pub blocks: Vec<BlockRow>,
    pub speedup: Vec<SpeedupRow>,
    pub reorder: Vec<ReorderRow>,
    pub partition: Vec<PartitionRow>,
    /// Runs dropped because they did not match the serial oracle.
    pub rejected: Vec<String>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io { path: path.to_path_buf(), source }
}

impl BenchReport {
    pub fn blocks_csv(&self) -> String {
        let mut out = String::from("fixture,variant,blocks,seconds,improvement,total_nodes,mean_block_bytes\n");
        for r in &self.blocks {
            writeln!(
                out,
                "{},{},{},{:.6e},{:.4},{},{:.1}",
                r.fixture, r.variant, r.blocks, r.seconds, r.improvement, r.total_nodes, r.mean_block_bytes
            )
            .unwrap();
        }
        out
    }

    pub fn speedup_csv(&self) -> String {
        let mut out = String::from("fixture,workers,seconds,speedup,cache_blocked\n");
        for r in &self.speedup {
            writeln!(out, "{},{},{:.6e},{:.4},{}", r.fixture, r.workers, r.seconds, r.speedup, r.cache_blocked).unwrap();
        }
        out
    }

    pub fn reorder_csv(&self) -> String {
        let mut out = String::from("fixture,nodes,bandwidth_before,bandwidth_after,seconds_original,seconds_rcm,gain\n");
        for r in &self.reorder {
            let gain = r.seconds_original / r.seconds_rcm - 1.0;
            writeln!(
                out,
                "{},{},{},{},{:.6e},{:.6e},{:.4}",
                r.fixture, r.nodes, r.bandwidth_before, r.bandwidth_after, r.seconds_original, r.seconds_rcm, gain
            )
            .unwrap();
        }
        out
    }

    pub fn partition_csv(&self) -> String {
        let mut out = String::from("fixture,parts,augmented,edge_cut,imbalance,split_pairs\n");
        for r in &self.partition {
            writeln!(out, "{},{},{},{},{:.4},{}", r.fixture, r.parts, r.augmented, r.edge_cut, r.imbalance, r.split_pairs)
                .unwrap();
        }
        out
    }

    /// Writes the CSV files and `machine.txt` into `dir`, plus SVG line
    /// plots if `plots` is set.
    pub fn write(&self, dir: &Path, plots: bool) -> Result<(), BenchError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut files = vec![
            ("blocks.csv", self.blocks_csv()),
            ("speedup.csv", self.speedup_csv()),
            ("reorder.csv", self.reorder_csv()),
            ("partition.csv", self.partition_csv()),
            ("machine.txt", format!("{}steps: {}\n", self.machine.describe(), self.steps)),
        ];
        if plots {
            files.push(("improvement.svg", plot::improvement_svg(&self.blocks)));
            files.push(("speedup.svg", plot::speedup_svg(&self.speedup)));
        }
        for (name, text) in files {
            let path = dir.join(name);
            fs::write(&path, text).map_err(io_err(&path))?;
        }
        Ok(())
    }
}

fn time_steps(stepper: &mut dyn Stepper, init: &SolverState, steps: u64, repeats: usize) -> Result<(f64, SolverState), FemError> {
    let mut best = f64::INFINITY;
    let mut last = init.clone();
    for _ in 0..repeats.max(1) {
        let mut s = init.clone();
        let clock = Instant::now();
        stepper.run_steps(&mut s, steps)?;
        best = best.min(clock.elapsed().as_secs_f64());
        last = s;
    }
    Ok((best, last))
}

fn block_sweep(
    report: &mut BenchReport,
    spec: &SuiteSpec,
    name: &str,
    variant: &'static str,
    model: &Model,
    oracle: &[f64],
    t_reference: f64,
) -> Result<(), BenchError> {
    let init = model.initial_state();
    for &b in &spec.block_counts {
        if b > model.mesh().element_count() {
            continue;
        }
        let mut solver = BlockedSolver::new(model, b)?;
        let (seconds, state) = time_steps(&mut solver, &init, spec.steps, spec.repeats)?;
        let dev = max_relative_deviation(&state.temperature, oracle);
        if dev > ORACLE_TOLERANCE {
            log::warn!("{name}/{variant} blocks {b}: deviation {dev:e} from the oracle, row dropped");
            report.rejected.push(format!("{name},{variant},blocks={b},deviation={dev:e}"));
            continue;
        }
        let plan = solver.plan();
        report.blocks.push(BlockRow {
            fixture: name.to_string(),
            variant,
            blocks: b,
            seconds,
            improvement: improvement_factor(t_reference, seconds)?,
            total_nodes: plan.total_slots(),
            mean_block_bytes: plan.mean_block_bytes(),
        });
        log::info!("{name}/{variant} blocks {b}: {seconds:.3e} s");
    }
    Ok(())
}

fn fixture_runs(report: &mut BenchReport, spec: &SuiteSpec, fixture: &Fixture) -> Result<(), BenchError> {
    let name = fixture.name.as_str();
    let mesh = &fixture.mesh;
    let model = fixture.model()?;
    let init = model.initial_state();
    log::info!("{name}: {} nodes, {} elements", mesh.node_count(), mesh.element_count());

    let (t_reference, oracle) = time_steps(&mut ReferenceSolver::new(&model), &init, spec.steps, spec.repeats)?;
    let oracle = oracle.temperature;

    // reordered variant
    let graph = mesh.node_graph();
    let perm = rcm_permutation(&graph, None);
    let rcm_fixture = Fixture { name: fixture.name.clone(), mesh: permute_mesh(mesh, &perm)?, config: fixture.config.clone() };
    let rcm_model = rcm_fixture.model()?;
    let rcm_init = rcm_model.initial_state();
    let (t_rcm, _) = time_steps(&mut ReferenceSolver::new(&rcm_model), &rcm_init, spec.steps, spec.repeats)?;
    let rcm_oracle = perm.apply(&oracle);
    report.reorder.push(ReorderRow {
        fixture: name.to_string(),
        nodes: mesh.node_count(),
        bandwidth_before: bandwidth(&graph, &Permutation::identity(graph.vertex_count())),
        bandwidth_after: bandwidth(&graph, &perm),
        seconds_original: t_reference,
        seconds_rcm: t_rcm,
    });

    block_sweep(report, spec, name, "original", &model, &oracle, t_reference)?;
    block_sweep(report, spec, name, "rcm", &rcm_model, &rcm_oracle, t_reference)?;

    for &w in &spec.worker_counts {
        if w > mesh.element_count() {
            continue;
        }
        for cache_blocked in [false, true] {
            let cfg = ParallelConfig {
                workers: w,
                blocks: if cache_blocked { BlockChoice::Auto } else { BlockChoice::Fixed(1) },
                ..Default::default()
            };
            let mut best = f64::INFINITY;
            for _ in 0..spec.repeats.max(1) {
                let run = parallel_solve(&model, &init, &cfg, Some(spec.steps))?;
                let dev = max_relative_deviation(&run.state.temperature, &oracle);
                if dev > ORACLE_TOLERANCE {
                    best = f64::NAN;
                    report.rejected.push(format!("{name},workers={w},blocked={cache_blocked},deviation={dev:e}"));
                    break;
                }
                best = best.min(run.elapsed.as_secs_f64());
            }
            if best.is_nan() {
                log::warn!("{name} workers {w}: parallel run does not match the oracle, row dropped");
                continue;
            }
            report.speedup.push(SpeedupRow {
                fixture: name.to_string(),
                workers: w,
                seconds: best,
                speedup: t_reference / best,
                cache_blocked,
            });
            log::info!("{name} workers {w} blocked {cache_blocked}: {best:.3e} s");
        }
    }

    for augmented in [false, true] {
        let map = partition_mesh(mesh, model.pairs(), spec.parts, augmented, DEFAULT_BALANCE_TOL)?;
        let q = partition_metrics(&mesh.dual_graph(), &map);
        report.partition.push(PartitionRow {
            fixture: name.to_string(),
            parts: spec.parts,
            augmented,
            edge_cut: q.edge_cut,
            imbalance: q.imbalance,
            split_pairs: split_interface_pairs(mesh, model.pairs(), &map),
        });
    }
    Ok(())
}

/// Runs every sweep of `spec`. Each timed run is checked against the
/// unblocked serial solution first; mismatching runs are reported in
/// `rejected` instead of producing a timing row.
pub fn run_suite(spec: &SuiteSpec) -> Result<BenchReport, BenchError> {
    let mut report = BenchReport { machine: MachineInfo::detect(), steps: spec.steps, ..Default::default() };
    for &(cast, mold, seed) in &spec.fixtures {
        let fixture = cast_in_mold_fixture(cast, mold, seed)?;
        fixture_runs(&mut report, spec, &fixture)?;
    }
    Ok(report)
}

/// Runs a predefined suite and writes its report into `out`.
pub fn run_benchmark(suite: Suite, out: &Path, plots: bool) -> Result<BenchReport, BenchError> {
    let report = run_suite(&SuiteSpec::of(suite))?;
    report.write(out, plots)?;
    Ok(report)
}
