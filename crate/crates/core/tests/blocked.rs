use cachefem::bench::fixtures;
use cachefem::blocked::{autotune_block_count, default_candidates, BlockPlan, BlockedSolver, Subdomain};
use cachefem::fem::{max_relative_deviation, ReferenceSolver, Stepper};
use cachefem::mesh::{Mesh, Tetrahedron};
use cachefem::Model;

fn run_reference(model: &Model, steps: u64) -> Vec<f64> {
    let mut s = model.initial_state();
    ReferenceSolver::new(model).run_steps(&mut s, steps).unwrap();
    s.temperature
}

fn run_blocked(model: &Model, blocks: usize, steps: u64) -> Vec<f64> {
    let mut s = model.initial_state();
    BlockedSolver::new(model, blocks).unwrap().run_steps(&mut s, steps).unwrap();
    s.temperature
}

#[test]
fn one_block_is_bitwise_the_reference() {
    let model = fixtures::small_cast_in_mold().model().unwrap();
    assert_eq!(run_blocked(&model, 1, 30), run_reference(&model, 30));
}

#[test]
fn block_count_does_not_change_the_field() {
    let model = fixtures::small_cast_in_mold().model().unwrap();
    let base = run_blocked(&model, 1, 100);
    for b in [2, 4, 8] {
        let dev = max_relative_deviation(&run_blocked(&model, b, 100), &base);
        assert!(dev <= 1e-10, "blocks {b}: deviation {dev:e}");
    }
}

#[test]
fn blocked_runs_are_reproducible() {
    let model = fixtures::small_cast_in_mold().model().unwrap();
    assert_eq!(run_blocked(&model, 4, 20), run_blocked(&model, 4, 20));
}

/// Tetrahedra in a row, consecutive ones sharing a face.
fn chain(len: usize) -> Mesh {
    // points on a helix: any four consecutive ones span a tetrahedron
    let nodes = (0..len + 3).map(|k| [(k as f64).cos(), (k as f64).sin(), 0.5 * k as f64]).collect();
    let tets = (0..len).map(|i| Tetrahedron { nodes: [i, i + 1, i + 2, i + 3], region: 0 }).collect();
    Mesh::new(nodes, tets, vec![], vec![]).unwrap()
}

#[test]
fn chain_cut_face_is_in_both_blocks() {
    let mesh = chain(4);
    let dual = mesh.dual_graph();
    assert_eq!(dual.edge_count(), 3);
    let model = Model::new(
        mesh,
        [(0, cachefem::fem::Material::simple(1.0, 1.0, 1.0, 0.0, -1.0, 1.0))].into(),
        Default::default(),
        cachefem::SolverConfig::new(1.0),
    )
    .unwrap();
    let plan = BlockPlan::partitioned(&model, Subdomain::whole(model.mesh()), 2).unwrap();
    assert_eq!(plan.block_elements(0), &[0, 1]);
    assert_eq!(plan.block_elements(1), &[2, 3]);
    // element 1 = nodes 1..=4, element 2 = nodes 2..=5: common face {2,3,4}
    let merge = plan.merge_list();
    assert_eq!(merge, vec![(2, vec![0, 1]), (3, vec![0, 1]), (4, vec![0, 1])]);
    // brute force over block node sets
    let a = plan.block_nodes(0);
    let b = plan.block_nodes(1);
    let mut common: Vec<usize> = a.iter().copied().filter(|n| b.contains(n)).collect();
    common.sort_unstable();
    assert_eq!(common, vec![2, 3, 4]);
    assert_eq!(plan.total_slots(), model.mesh().node_count() + 3);
}

#[test]
fn two_blocks_on_chain_match_one_block() {
    let mesh = chain(4);
    let model = Model::new(
        mesh,
        [(0, cachefem::fem::Material::simple(1.0, 1.0, 1.0, 300.0, 250.0, 350.0))].into(),
        Default::default(),
        cachefem::SolverConfig { safety: 0.01, ..cachefem::SolverConfig::new(1.0) },
    )
    .unwrap();
    let t0: Vec<f64> = (0..model.mesh().node_count()).map(|i| 300.0 + i as f64).collect();
    let run = |blocks| {
        let mut s = model.state_from_temperatures(t0.clone(), 0.0);
        BlockedSolver::new(&model, blocks).unwrap().run_steps(&mut s, 50).unwrap();
        s.temperature
    };
    assert!(max_relative_deviation(&run(2), &run(1)) <= 1e-12);
}

#[test]
fn autotune_picks_a_candidate() {
    let model = fixtures::small_cast_in_mold().model().unwrap();
    let state = model.initial_state();
    let sub = Subdomain::whole(model.mesh());
    let cands = default_candidates(model.mesh().element_count());
    let report = autotune_block_count(&model, &sub, &state.temperature, &state.enthalpy, 0.0, &cands, 3).unwrap();
    assert_eq!(report.candidates, cands);
    assert!(cands.contains(&report.chosen));
    let i = cands.iter().position(|&c| c == report.chosen).unwrap();
    assert!(report.seconds.iter().all(|&s| s >= report.seconds[i]));
    let frac = report.overhead_fraction(3, 10_000);
    assert!((0.0..=1.0).contains(&frac));
}
