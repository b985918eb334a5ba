//! Analytic solutions and model builders shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use cachefem::bench::fixtures::{self, simple_region};
use cachefem::fem::{CoefficientConfig, ConditionConfig, ModelConfig, RegionConfig, SolverConfig, TableConfig};
use cachefem::Model;
use statrs::function::erf::erf;

/// Slab `0 < x < l` at uniform `t0` whose faces are held at 0 from `t = 0`.
/// Sum of the first `terms` nonzero Fourier modes.
pub fn slab_series(x: f64, t: f64, l: f64, alpha: f64, t0: f64, terms: usize) -> f64 {
    (0..terms)
        .map(|i| {
            let n = (2 * i + 1) as f64;
            4.0 * t0 / (n * PI) * (n * PI * x / l).sin() * (-(n * PI / l).powi(2) * alpha * t).exp()
        })
        .sum()
}

/// Root of `λ exp(λ²) erf(λ) = St / √π` by bisection.
pub fn neumann_lambda(stefan: f64) -> f64 {
    let f = |l: f64| l * (l * l).exp() * erf(l) - stefan / PI.sqrt();
    let (mut lo, mut hi) = (1e-9, 5.0);
    assert!(f(lo) < 0.0 && f(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn fixed(v: f64) -> ConditionConfig {
    ConditionConfig::Fixed { value: CoefficientConfig::Constant(v) }
}

pub fn insulated() -> ConditionConfig {
    ConditionConfig::Convective { q: 0.0, h: CoefficientConfig::Constant(0.0), ambient: CoefficientConfig::Constant(0.0) }
}

/// Bar `[0, length]` of `cells` cells with the given end conditions.
pub fn bar_model(cells: usize, length: f64, region: RegionConfig, left: ConditionConfig, right: ConditionConfig, t_end: f64) -> Model {
    let mesh = fixtures::bar(cells, length).unwrap();
    let config = ModelConfig {
        solver: SolverConfig::new(t_end),
        region: BTreeMap::from([("0".into(), region)]),
        bc: BTreeMap::from([("left".into(), left), ("right".into(), right)]),
    };
    Model::from_config(mesh, &config).unwrap()
}

/// Unit properties, initial temperature 1, both ends held at 0.
pub fn conduction_bar(cells: usize, t_end: f64) -> Model {
    bar_model(cells, 1.0, simple_region(1.0, 1.0, 1.0, 1.0, -1.0, 2.0), fixed(0.0), fixed(0.0), t_end)
}

/// Unit properties and latent heat, freezing range `[1, 1 + range]`, melt
/// initially at the liquidus, left end held at 0, right end insulated.
pub fn stefan_bar(cells: usize, range: f64, t_end: f64) -> Model {
    let region = RegionConfig {
        rho: 1.0,
        c: TableConfig::Constant(1.0),
        k: TableConfig::Constant(1.0),
        latent_heat: 1.0,
        solidus: Some(1.0),
        liquidus: Some(1.0 + range),
        t0: 1.0 + range,
        t_min: -1.0,
        t_max: 2.0,
    };
    bar_model(cells, 1.0, region, fixed(0.0), insulated(), t_end)
}

/// Position of the first crossing of `level` along the bar axis, from the
/// nodes on the edge `y = z = 0`, interpolated linearly.
pub fn isotherm_position(model: &Model, temperature: &[f64], level: f64) -> Option<f64> {
    let mut line: Vec<(f64, f64)> = model
        .mesh()
        .nodes()
        .iter()
        .zip(temperature)
        .filter(|(p, _)| p[1] == 0.0 && p[2] == 0.0)
        .map(|(p, &t)| (p[0], t))
        .collect();
    line.sort_by(|a, b| a.0.total_cmp(&b.0));
    line.windows(2).find_map(|w| {
        let ((x0, t0), (x1, t1)) = (w[0], w[1]);
        (t0 < level && t1 >= level).then(|| x0 + (level - t0) / (t1 - t0) * (x1 - x0))
    })
}

/// Largest relative deviation of the solidus isotherm from the Neumann
/// front `2λ√t` over the middle half of a run to `t_end` (unit Stefan
/// number, freezing range 0.01).
pub fn stefan_front_error(cells: usize, t_end: f64) -> f64 {
    use cachefem::fem::{ReferenceSolver, Stepper};
    let model = stefan_bar(cells, 0.01, t_end);
    let lambda = neumann_lambda(1.0);
    let mut state = model.initial_state();
    let mut solver = ReferenceSolver::new(&model);
    let mut worst: f64 = 0.0;
    while state.time < t_end {
        solver.step(&mut state).unwrap();
        if state.time >= 0.25 * t_end && state.time <= 0.75 * t_end {
            let exact = 2.0 * lambda * state.time.sqrt();
            let front = isotherm_position(&model, &state.temperature, 1.0).expect("front inside the bar");
            worst = worst.max((front - exact).abs() / exact);
        }
    }
    worst
}
