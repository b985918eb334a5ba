use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use cachefem::bench::{self, fixtures, Suite};
use cachefem::blocked::{autotune_block_count, default_candidates, Subdomain};
use cachefem::comm::{parallel_solve, BlockChoice, ParallelConfig, TransportKind};
use cachefem::fem::ModelConfig;
use cachefem::mesh::{pair_sister_facets, read_mesh_file, write_mesh_file};
use cachefem::partition::{
    partition_mesh, partition_metrics, split_interface_pairs, two_level_decompose, DEFAULT_BALANCE_TOL,
};
use cachefem::reorder::{bandwidth, permute_mesh, rcm_permutation, write_sparsity, Permutation};
use cachefem::{Mesh, Model};

#[derive(Parser)]
#[command(name = "cachefem", version, about = "Cache-blocked explicit FEM heat conduction with solidification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureKind {
    Cube,
    Bar,
    CastInMold,
    AdiabaticCube,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransportArg {
    Inproc,
    Tcp,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic mesh (and its model config where one exists).
    Generate {
        #[arg(long, value_enum)]
        fixture: FixtureKind,
        /// Cells per edge (cube), along the axis (bar) or across the cast.
        #[arg(long, default_value_t = 4)]
        cells: usize,
        /// Mold cells per cast edge length (cast-in-mold only).
        #[arg(long, default_value_t = 2)]
        mold_cells: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        mesh_out: PathBuf,
        #[arg(long)]
        config_out: Option<PathBuf>,
    },
    /// Reverse Cuthill-McKee renumbering of a mesh.
    Reorder {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the reordered sparsity pattern as `row col` lines.
        #[arg(long)]
        sparsity: Option<PathBuf>,
    },
    /// Element partition of a mesh.
    Partition {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        parts: usize,
        /// Second-level blocks per part.
        #[arg(long, default_value_t = 1)]
        blocks: usize,
        /// Partition cast and mold without virtual contact elements.
        #[arg(long)]
        no_augment: bool,
        #[arg(long)]
        partmap_out: Option<PathBuf>,
        /// Print edge cut, imbalance and split interface pairs.
        #[arg(long)]
        metrics: bool,
    },
    /// Time candidate block counts and print `blocks,seconds`.
    Tune {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        trial_steps: u64,
        /// Comma-separated block counts; defaults to 1, 2, 4, ...
        #[arg(long, value_delimiter = ',')]
        candidates: Vec<usize>,
    },
    /// Run the solver.
    Solve {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Blocks per worker, or `auto`.
        #[arg(long, default_value = "1")]
        blocks: String,
        #[arg(long, value_enum, default_value_t = TransportArg::Inproc)]
        transport: TransportArg,
        #[arg(long)]
        no_augment: bool,
        /// Stop after this many steps even before the end time.
        #[arg(long)]
        steps: Option<u64>,
        /// Write the exchange schedule as `stage,workerA,workerB`.
        #[arg(long)]
        schedule_out: Option<PathBuf>,
        /// Write final nodal temperatures as `node,temperature`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the benchmark suite and write CSV reports.
    Bench {
        #[arg(long, value_enum, default_value_t = SuiteArg::Quick)]
        suite: SuiteArg,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        /// Also write SVG line plots.
        #[arg(long)]
        plots: bool,
    },
}

fn load_mesh(path: &PathBuf) -> Result<Mesh> {
    read_mesh_file(path).with_context(|| format!("reading mesh {}", path.display()))
}

fn load_model(mesh: &PathBuf, config: &PathBuf) -> Result<Model> {
    let cfg = ModelConfig::read(config).with_context(|| format!("reading config {}", config.display()))?;
    Ok(Model::from_config(load_mesh(mesh)?, &cfg)?)
}

fn generate(kind: FixtureKind, cells: usize, mold_cells: usize, seed: u64, mesh_out: PathBuf, config_out: Option<PathBuf>) -> Result<()> {
    let (mesh, config) = match kind {
        FixtureKind::Cube => (fixtures::cube(cells)?, None),
        FixtureKind::Bar => (fixtures::bar(cells, 1.0)?, None),
        FixtureKind::CastInMold => {
            let f = fixtures::cast_in_mold_fixture(cells, mold_cells, seed)?;
            (f.mesh, Some(f.config))
        }
        FixtureKind::AdiabaticCube => {
            let f = fixtures::adiabatic_cube(cells)?;
            (f.mesh, Some(f.config))
        }
    };
    write_mesh_file(&mesh, &mesh_out).with_context(|| format!("writing {}", mesh_out.display()))?;
    println!("nodes={} elements={} facets={}", mesh.node_count(), mesh.element_count(), mesh.facets().len());
    match (config_out, config) {
        (Some(path), Some(cfg)) => fs::write(&path, cfg.to_toml()).with_context(|| format!("writing {}", path.display()))?,
        (Some(_), None) => log::warn!("this fixture has no model config; none written"),
        _ => {}
    }
    Ok(())
}

fn reorder(mesh: PathBuf, out: PathBuf, sparsity: Option<PathBuf>) -> Result<()> {
    let mesh = load_mesh(&mesh)?;
    let graph = mesh.node_graph();
    let perm = rcm_permutation(&graph, None);
    let before = bandwidth(&graph, &Permutation::identity(graph.vertex_count()));
    let after = bandwidth(&graph, &perm);
    write_mesh_file(&permute_mesh(&mesh, &perm)?, &out).with_context(|| format!("writing {}", out.display()))?;
    if let Some(path) = sparsity {
        let w = std::io::BufWriter::new(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        write_sparsity(&graph, &perm, w)?;
    }
    println!("bandwidth before={before} after={after}");
    Ok(())
}

fn partition(mesh: PathBuf, parts: usize, blocks: usize, no_augment: bool, partmap_out: Option<PathBuf>, metrics: bool) -> Result<()> {
    let mesh = load_mesh(&mesh)?;
    let pairs = pair_sister_facets(&mesh)?;
    let augment = !no_augment;
    let map = partition_mesh(&mesh, &pairs, parts, augment, DEFAULT_BALANCE_TOL)?;
    if let Some(path) = &partmap_out {
        map.write_file(path).with_context(|| format!("writing {}", path.display()))?;
    }
    if metrics {
        let q = partition_metrics(&mesh.dual_graph(), &map);
        println!("edge_cut={}", q.edge_cut);
        println!("imbalance={:.4}", q.imbalance);
        println!("split_interface_pairs={}", split_interface_pairs(&mesh, &pairs, &map));
        println!("part_sizes={:?}", q.part_sizes);
        println!("neighbors={:?}", q.neighbor_counts);
    }
    if blocks > 1 {
        let two = two_level_decompose(&mesh, &pairs, parts, blocks, augment)?;
        for w in 0..parts {
            let sizes: Vec<usize> = two.block_elements(w).iter().map(Vec::len).collect();
            println!("part {w} block_sizes={sizes:?}");
        }
    }
    Ok(())
}

fn tune(mesh: PathBuf, config: PathBuf, trial_steps: u64, candidates: Vec<usize>) -> Result<()> {
    let model = load_model(&mesh, &config)?;
    let state = model.initial_state();
    let candidates = if candidates.is_empty() { default_candidates(model.mesh().element_count()) } else { candidates };
    let sub = Subdomain::whole(model.mesh());
    let report = autotune_block_count(&model, &sub, &state.temperature, &state.enthalpy, state.time, &candidates, trial_steps)?;
    print!("{}", report.to_csv());
    eprintln!("chosen={} tuning_seconds={:.3}", report.chosen, report.tuning_seconds);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve(
    mesh: PathBuf,
    config: PathBuf,
    workers: usize,
    blocks: String,
    transport: TransportArg,
    no_augment: bool,
    steps: Option<u64>,
    schedule_out: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<()> {
    let model = load_model(&mesh, &config)?;
    let blocks = match blocks.as_str() {
        "auto" => BlockChoice::Auto,
        n => BlockChoice::Fixed(n.parse().with_context(|| format!("--blocks expects a count or `auto`, got `{n}`"))?),
    };
    if workers == 0 {
        bail!("--workers must be at least 1");
    }
    let cfg = ParallelConfig {
        workers,
        blocks,
        transport: match transport {
            TransportArg::Inproc => TransportKind::InProc,
            TransportArg::Tcp => TransportKind::Tcp,
        },
        augment: !no_augment,
        ..Default::default()
    };
    let run = parallel_solve(&model, &model.initial_state(), &cfg, steps)?;
    if let Some(path) = schedule_out {
        fs::write(&path, run.schedule.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = out {
        let mut w = std::io::BufWriter::new(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        writeln!(w, "node,temperature")?;
        for (i, t) in run.state.temperature.iter().enumerate() {
            writeln!(w, "{i},{t}")?;
        }
    }
    println!("step,time,t_min,t_max");
    for s in &run.samples {
        println!("{},{:.6e},{:.6},{:.6}", s.step, s.time, s.t_min, s.t_max);
    }
    eprintln!(
        "steps={} time={:.6e} blocks={:?} stages={} clamped={} seconds={:.3}",
        run.state.step,
        run.state.time,
        run.block_counts,
        run.schedule.stage_count(),
        run.state.clamped,
        run.elapsed.as_secs_f64()
    );
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Generate { fixture, cells, mold_cells, seed, mesh_out, config_out } => {
            generate(fixture, cells, mold_cells, seed, mesh_out, config_out)
        }
        Command::Reorder { mesh, out, sparsity } => reorder(mesh, out, sparsity),
        Command::Partition { mesh, parts, blocks, no_augment, partmap_out, metrics } => {
            partition(mesh, parts, blocks, no_augment, partmap_out, metrics)
        }
        Command::Tune { mesh, config, trial_steps, candidates } => tune(mesh, config, trial_steps, candidates),
        Command::Solve { mesh, config, workers, blocks, transport, no_augment, steps, schedule_out, out } => {
            solve(mesh, config, workers, blocks, transport, no_augment, steps, schedule_out, out)
        }
        Command::Bench { suite, out, plots } => {
            let suite = match suite {
                SuiteArg::Quick => Suite::Quick,
                SuiteArg::Full => Suite::Full,
            };
            let report = bench::run_benchmark(suite, &out, plots)?;
            println!(
                "wrote {} block rows and {} speedup rows to {}",
                report.blocks.len(),
                report.speedup.len(),
                out.display()
            );
            if !report.rejected.is_empty() {
                bail!("{} runs did not match the serial oracle", report.rejected.len());
            }
            Ok(())
        }
    }
}
