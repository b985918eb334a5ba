use super::config::DtPolicy;
use super::kernel::explicit_update;
use super::model::Model;
use super::FemError;

/// Nodal temperatures (K) and enthalpies (J/kg) at `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub temperature: Vec<f64>,
    pub enthalpy: Vec<f64>,
    pub time: f64,
    /// Step size used by the most recent step (initially the stable bound).
    pub dt: f64,
    pub step: u64,
    /// Number of enthalpy evaluations clamped to the material table range.
    pub clamped: u64,
}

/// One time-series sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub step: u64,
    pub time: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Sample {
    pub fn of(state: &SolverState) -> Self {
        Sample {
            step: state.step,
            time: state.time,
            t_min: state.temperature.iter().copied().fold(f64::INFINITY, f64::min),
            t_max: state.temperature.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Step size for the next step: the stability bound (current or initial,
/// per policy), shortened so the run ends exactly at `t_end`.
pub fn next_dt(policy: DtPolicy, bound_now: f64, previous: f64, time: f64, t_end: f64) -> f64 {
    let dt = match policy {
        DtPolicy::PerStep => bound_now,
        DtPolicy::Fixed => previous,
    };
    let remaining = t_end - time;
    if remaining > 0.0 && remaining < dt {
        remaining
    } else {
        dt
    }
}

/// Anything that advances a [`SolverState`] by one explicit step.
pub trait Stepper {
    fn step(&mut self, state: &mut SolverState) -> Result<(), FemError>;

    /// Steps until `t_end`, sampling every `output_every` steps.
    fn run(&mut self, state: &mut SolverState, t_end: f64, output_every: u64) -> Result<Vec<Sample>, FemError> {
        let mut samples = vec![Sample::of(state)];
        while state.time < t_end {
            self.step(state)?;
            if output_every > 0 && state.step.is_multiple_of(output_every) {
                samples.push(Sample::of(state));
            }
        }
        if samples.last().map(|s| s.step) != Some(state.step) {
            samples.push(Sample::of(state));
        }
        Ok(samples)
    }

    fn run_steps(&mut self, state: &mut SolverState, steps: u64) -> Result<(), FemError> {
        for _ in 0..steps {
            self.step(state)?;
        }
        Ok(())
    }
}

/// The traditional explicit procedure: one global element loop with global
/// node indexing, no blocking.
pub struct ReferenceSolver<'m> {
    model: &'m Model,
    elements: Vec<usize>,
}

impl<'m> ReferenceSolver<'m> {
    pub fn new(model: &'m Model) -> Self {
        ReferenceSolver { model, elements: (0..model.mesh().element_count()).collect() }
    }
}

impl Stepper for ReferenceSolver<'_> {
    fn step(&mut self, state: &mut SolverState) -> Result<(), FemError> {
        let model = self.model;
        let cfg = model.config();
        let bound = match cfg.dt_policy {
            DtPolicy::PerStep => model.stable_timestep(&state.temperature)?,
            DtPolicy::Fixed => state.dt,
        };
        let dt = next_dt(cfg.dt_policy, bound, state.dt, state.time, cfg.t_end);
        let ambient = model.ambient_temperatures(&state.temperature);
        let asm = model.assemble_local(&self.elements, &state.temperature, &state.enthalpy, &ambient, state.time)?;
        explicit_update(&mut state.temperature, &asm.capacity, &asm.residual, dt)?;
        let t_next = state.time + dt;
        model.apply_fixed(&mut state.temperature, t_next);
        state.clamped += model.update_enthalpy(&state.temperature, &mut state.enthalpy) as u64;
        state.time = t_next;
        state.dt = dt;
        state.step += 1;
        Ok(())
    }
}

/// Largest relative nodal deviation `|a - b| / |b|`. Any non-finite value
/// gives infinity.
pub fn max_relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).abs() / y.abs().max(f64::MIN_POSITIVE);
            if d.is_nan() || !x.is_finite() || !y.is_finite() {
                f64::INFINITY
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}
