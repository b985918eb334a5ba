//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use cachefem::bench::{fixtures, run_benchmark, Suite};
use cachefem::blocked::BlockedSolver;
use cachefem::comm::{edge_color_schedule, parallel_solve, BlockChoice, ParallelConfig};
use cachefem::fem::{max_relative_deviation, ReferenceSolver, Stepper};
use cachefem::graph::Graph;
use cachefem::partition::{partition_mesh, partition_metrics, split_interface_pairs, DEFAULT_BALANCE_TOL};
use cachefem::reorder::{bandwidth, rcm_permutation, Permutation};
use cachefem::Model;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEPS: u64 = 100;
const ORACLE_TOL: f64 = 1e-10;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_fixtures() -> Vec<(&'static str, Model)> {
    vec![
        ("1410 elements", fixtures::small_cast_in_mold().model().unwrap()),
        ("90240 elements", fixtures::large_cast_in_mold().model().unwrap()),
    ]
}

fn blocking_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, model) in oracle_fixtures() {
        let run = |b| {
            let mut s = model.initial_state();
            BlockedSolver::new(&model, b).unwrap().run_steps(&mut s, STEPS).unwrap();
            s.temperature
        };
        let base = run(1);
        let mut fixture_worst: f64 = 0.0;
        for b in [2, 4, 8, 16] {
            fixture_worst = fixture_worst.max(max_relative_deviation(&run(b), &base));
        }
        parts.push(format!("{name}: {fixture_worst:.2e}"));
        worst = worst.max(fixture_worst);
    }
    check(worst <= ORACLE_TOL, format!("max deviation over blocks 2..16, {}", parts.join(", ")))
}

fn parallel_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, model) in oracle_fixtures() {
        let init = model.initial_state();
        let mut serial = init.clone();
        ReferenceSolver::new(&model).run_steps(&mut serial, STEPS).unwrap();
        let mut fixture_worst: f64 = 0.0;
        for workers in [1, 2, 4] {
            for blocks in [BlockChoice::Fixed(1), BlockChoice::Fixed(8)] {
                let cfg = ParallelConfig { workers, blocks, ..Default::default() };
                let run = parallel_solve(&model, &init, &cfg, Some(STEPS)).unwrap();
                fixture_worst = fixture_worst.max(max_relative_deviation(&run.state.temperature, &serial.temperature));
            }
        }
        parts.push(format!("{name}: {fixture_worst:.2e}"));
        worst = worst.max(fixture_worst);
    }
    check(worst <= ORACLE_TOL, format!("max deviation over workers 1,2,4 with 1 and 8 blocks, {}", parts.join(", ")))
}

fn conservation() -> Outcome {
    let model = fixtures::adiabatic_cube(4).unwrap().model().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t0: Vec<f64> = (0..model.mesh().node_count()).map(|_| rng.gen_range(-100.0..100.0)).collect();
    let mut state = model.state_from_temperatures(t0, 0.0);
    let elements: Vec<usize> = (0..model.mesh().element_count()).collect();
    let ambient = vec![0.0; model.mesh().facets().len()];
    let cap = model.assemble_local(&elements, &state.temperature, &state.enthalpy, &ambient, 0.0).unwrap().capacity;
    let energy = |t: &[f64]| t.iter().zip(&cap).map(|(t, c)| t * c).sum::<f64>();
    let scale: f64 = state.temperature.iter().zip(&cap).map(|(t, c)| (t * c).abs()).sum();
    let e0 = energy(&state.temperature);
    ReferenceSolver::new(&model).run_steps(&mut state, 1000).unwrap();
    let drift = (energy(&state.temperature) - e0).abs() / scale;
    check(drift <= 1e-10, format!("|dSum C T| / Sum |C T| = {drift:.2e} after 1000 steps"))
}

fn analytic_transient() -> Outcome {
    // unit diffusivity and length: diffusion time 1
    let t_end = 0.1;
    let model = common::conduction_bar(50, t_end);
    let mut state = model.initial_state();
    ReferenceSolver::new(&model).run(&mut state, t_end, 0).unwrap();
    let err = model
        .mesh()
        .nodes()
        .iter()
        .zip(&state.temperature)
        .map(|(p, &t)| (t - common::slab_series(p[0], t_end, 1.0, 1.0, 1.0, 50)).abs())
        .fold(0.0, f64::max);
    check(err <= 0.01, format!("max nodal error {err:.2e} of the initial difference at t = 0.1 L^2/alpha"))
}

fn phase_change() -> Outcome {
    let cells = 400;
    let err = common::stefan_front_error(cells, 0.08);
    check(err <= 0.05, format!("max relative front error {err:.4} over the middle half, {cells} cells"))
}

fn schedule_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..200 {
        let n = rng.gen_range(2..=32);
        let p = rng.gen_range(0.05..0.6);
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).filter(|_| rng.gen_bool(p)).collect();
        let g = Graph::from_edges(n, edges);
        if let Err(e) = edge_color_schedule(&g).validate(&g) {
            return Err(format!("graph {i}: {e}"));
        }
    }
    let triangle = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]);
    let stages = edge_color_schedule(&triangle).stage_count();
    check(stages == 3, format!("200 random graphs valid within max degree + 1 stages; triangle uses {stages} stages"))
}

fn rcm_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut suite: Vec<Graph> = vec![
        Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]),
        Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]),
        fixtures::cube(4).unwrap().node_graph(),
        fixtures::bar(30, 1.0).unwrap().node_graph(),
        fixtures::small_cast_in_mold().mesh.node_graph(),
    ];
    for _ in 0..20 {
        let n = rng.gen_range(5..200);
        suite.push(Graph::from_edges(n, (0..2 * n).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))));
    }
    for (i, g) in suite.iter().enumerate() {
        let before = bandwidth(g, &Permutation::identity(g.vertex_count()));
        let after = bandwidth(g, &rcm_permutation(g, None));
        if after > before {
            return Err(format!("suite graph {i}: bandwidth {before} -> {after}"));
        }
    }
    let large = fixtures::large_cast_in_mold();
    let g = large.mesh.node_graph();
    let before = bandwidth(&g, &Permutation::identity(g.vertex_count()));
    let after = bandwidth(&g, &rcm_permutation(&g, None));
    let ratio = before as f64 / after as f64;
    check(
        g.vertex_count() >= 10_000 && ratio >= 2.0,
        format!("{} suite graphs not widened; cast/mold {} nodes: {before} -> {after} ({ratio:.1}x)", suite.len(), g.vertex_count()),
    )
}

fn augmentation() -> Outcome {
    let model = fixtures::large_cast_in_mold().model().unwrap();
    let mesh = model.mesh();
    let dual = mesh.dual_graph();
    let mut split = [0; 2];
    let mut parts = Vec::new();
    for (i, augmented) in [false, true].into_iter().enumerate() {
        let map = partition_mesh(mesh, model.pairs(), 6, augmented, DEFAULT_BALANCE_TOL).unwrap();
        let q = partition_metrics(&dual, &map);
        split[i] = split_interface_pairs(mesh, model.pairs(), &map);
        let label = if augmented { "augmented" } else { "plain" };
        parts.push(format!("{label}: split {} edge_cut {} imbalance {:.3}", split[i], q.edge_cut, q.imbalance));
    }
    check(split[1] <= split[0], format!("k=6, {}", parts.join("; ")))
}

fn bench_quick() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let clock = Instant::now();
    let report = run_benchmark(Suite::Quick, dir.path(), true).map_err(|e| e.to_string())?;
    let elapsed = clock.elapsed();
    let read = |f: &str| std::fs::read_to_string(dir.path().join(f)).unwrap_or_default();
    let blocks = read("blocks.csv");
    let speedup = read("speedup.csv");
    let ok = elapsed < Duration::from_secs(600)
        && blocks.starts_with("fixture,variant,blocks,seconds,improvement,total_nodes,mean_block_bytes\n")
        && speedup.starts_with("fixture,workers,seconds,speedup,cache_blocked\n")
        && blocks.lines().count() > 1
        && speedup.lines().count() > 1
        && report.rejected.is_empty();
    check(
        ok,
        format!(
            "{:.1} s, {} block rows, {} speedup rows, {} rejected runs",
            elapsed.as_secs_f64(),
            report.blocks.len(),
            report.speedup.len(),
            report.rejected.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence, blocking", blocking_equivalence),
        ("oracle equivalence, parallel", parallel_equivalence),
        ("conservation", conservation),
        ("analytic transient", analytic_transient),
        ("phase change", phase_change),
        ("schedule properties", schedule_properties),
        ("rcm bandwidth", rcm_reduction),
        ("virtual-element augmentation", augmentation),
        ("benchmark methodology", bench_quick),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let clock = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = clock.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n} ({name}): PASS ({detail}) [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL ({detail}) [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
