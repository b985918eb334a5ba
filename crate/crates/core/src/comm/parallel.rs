//! Distributed explicit driver.
//!
//! One step of a worker:
//!
//! 1. receive the temperatures of its external nodes from their providers;
//! 2. assemble its blocks (cache-blocked, as in the serial driver);
//! 3. swap capacitance and residual of shared nodes with the other owners
//!    and sum every contribution in ascending worker order;
//! 4. agree on the global time step (minimum over workers);
//! 5. update owned nodes.
//!
//! All owners of a shared node sum the same numbers in the same order, so
//! they compute bitwise identical values for it.

use std::sync::Barrier;
use std::time::{Duration, Instant};

use crate::blocked::{autotune_block_count, default_candidates, BlockPlan, Subdomain, TuneReport};
use crate::fem::{next_dt, DtPolicy, FemError, Model, Sample, SolverState};
use crate::partition::{classify_nodes, partition_mesh, NodeClassification, PartMap, DEFAULT_BALANCE_TOL};

use super::schedule::{edge_color_schedule, CommGraph, CommSchedule};
use super::transport::{decode_payload, encode_payload, inproc_network, tcp_network, Transport};
use super::CommError;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportKind {
    InProc,
    Tcp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockChoice {
    Fixed(usize),
    /// Each worker times the default candidates on its own subdomain.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelConfig {
    pub workers: usize,
    pub blocks: BlockChoice,
    pub transport: TransportKind,
    /// Glue cast and mold with virtual contact elements when partitioning.
    pub augment: bool,
    /// Steps per candidate when tuning the block count.
    pub trial_steps: u64,
}

impl Default for ParallelConfig {
    fn default() -> Self {
        ParallelConfig { workers: 1, blocks: BlockChoice::Fixed(1), transport: TransportKind::InProc, augment: true, trial_steps: 10 }
    }
}

#[derive(Debug, Clone)]
pub struct ParallelRun {
    pub state: SolverState,
    /// Global minimum and maximum temperature at every output step.
    pub samples: Vec<Sample>,
    pub partition: PartMap,
    pub schedule: CommSchedule,
    pub block_counts: Vec<usize>,
    pub tune_reports: Vec<Option<TuneReport>>,
    /// Wall time of the stepping loop (slowest worker).
    pub elapsed: Duration,
}

/// Runs the stages of `schedule` for this transport's worker. In each stage
/// where the worker is paired it sends `outgoing(partner)` and receives
/// `expected(partner)` values. Returns what was received, by partner.
pub fn exchange(
    schedule: &CommSchedule,
    transport: &mut dyn Transport,
    step: u64,
    stage_offset: u64,
    outgoing: impl Fn(usize) -> Vec<f64>,
    expected: impl Fn(usize) -> usize,
) -> Result<Vec<(usize, Vec<f64>)>, CommError> {
    let me = transport.rank();
    let mut received = Vec::new();
    for s in 0..schedule.stage_count() {
        let Some(partner) = schedule.partner(me, s) else { continue };
        let stage = stage_offset + s as u64;
        let bytes = transport
            .sendrecv(partner, encode_payload(step, stage, &outgoing(partner)))
            .map_err(|e| CommError::Transport { stage, a: me, b: partner, message: e.to_string() })?;
        received.push((partner, decode_payload(&bytes, step, stage, expected(partner))?));
    }
    Ok(received)
}

/// Minimum of `value` over all workers, by pairwise swaps over a schedule
/// of the complete graph.
fn allreduce_min(schedule: &CommSchedule, transport: &mut dyn Transport, step: u64, stage_offset: u64, value: f64) -> Result<f64, CommError> {
    let me = transport.rank();
    let mut acc = value;
    for s in 0..schedule.stage_count() {
        let Some(partner) = schedule.partner(me, s) else { continue };
        let stage = stage_offset + s as u64;
        let bytes = transport
            .sendrecv(partner, encode_payload(step, stage, &[acc]))
            .map_err(|e| CommError::Transport { stage, a: me, b: partner, message: e.to_string() })?;
        acc = acc.min(decode_payload(&bytes, step, stage, 1)?[0]);
    }
    Ok(acc)
}

/// Subdomain-local exchange lists of one worker.
struct Links {
    /// Shared nodes with each worker (local indices, ascending global).
    shared: Vec<Vec<usize>>,
    send_ext: Vec<Vec<usize>>,
    recv_ext: Vec<Vec<usize>>,
    /// Each shared node with its contributors in ascending worker order:
    /// `(worker, position in that worker's shared list)`, own entry `NONE`.
    merge: Vec<(usize, Vec<(usize, usize)>)>,
    /// Owned nodes this worker reports clamps for (lowest owner only).
    primary: Vec<bool>,
}

fn links(class: &NodeClassification, w: usize, sub: &Subdomain) -> Links {
    let k = class.parts.len();
    let pn = &class.parts[w];
    let loc = |g: usize| sub.local(g).expect("classified node lies in the subdomain");
    let mut shared = vec![Vec::new(); k];
    let mut send_ext = vec![Vec::new(); k];
    let mut recv_ext = vec![Vec::new(); k];
    for q in class.neighbors(w) {
        shared[q] = pn.shared_with(q).into_iter().map(loc).collect();
        send_ext[q] = class.externals_supplied(w, q).into_iter().map(loc).collect();
    }
    for &(g, q) in &pn.external {
        recv_ext[q].push(loc(g));
    }
    let mut primary = vec![true; sub.owned_count()];
    let mut cursor = vec![0usize; k];
    let mut merge = Vec::with_capacity(pn.shared.len());
    for (g, others) in &pn.shared {
        let l = loc(*g);
        let mut sources: Vec<(usize, usize)> = others
            .iter()
            .map(|&q| {
                let pos = cursor[q];
                cursor[q] += 1;
                (q, pos)
            })
            .collect();
        sources.push((w, NONE));
        sources.sort_unstable();
        primary[l] = sources[0].0 == w;
        merge.push((l, sources));
    }
    Links { shared, send_ext, recv_ext, merge, primary }
}

struct WorkerOut {
    nodes: Vec<usize>,
    temperature: Vec<f64>,
    enthalpy: Vec<f64>,
    time: f64,
    dt: f64,
    step: u64,
    clamped: u64,
    samples: Vec<Sample>,
    blocks: usize,
    tune: Option<TuneReport>,
    elapsed: Duration,
}

struct Shared<'a> {
    model: &'a Model,
    class: &'a NodeClassification,
    elements: &'a [Vec<usize>],
    schedule: &'a CommSchedule,
    reduce: &'a CommSchedule,
    cfg: &'a ParallelConfig,
    initial: &'a SolverState,
    max_steps: Option<u64>,
    barrier: &'a Barrier,
}

fn local_sample(step: u64, time: f64, t: &[f64]) -> Sample {
    Sample {
        step,
        time,
        t_min: t.iter().copied().fold(f64::INFINITY, f64::min),
        t_max: t.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Plan, exchange lists, subdomain temperatures and enthalpies, tuning.
type Prepared<'m> = (BlockPlan<'m>, Links, Vec<f64>, Vec<f64>, Option<TuneReport>);

fn setup<'m>(env: &Shared<'m>, w: usize) -> Result<Prepared<'m>, CommError> {
    let model = env.model;
    let externals: Vec<usize> = env.class.parts[w].external.iter().map(|e| e.0).collect();
    let sub = Subdomain::new(model.mesh(), env.elements[w].clone(), &externals);
    let links = links(env.class, w, &sub);
    let t = sub.gather(&env.initial.temperature);
    let h = sub.gather(&env.initial.enthalpy);
    let (blocks, tune) = match env.cfg.blocks {
        BlockChoice::Fixed(b) => (b, None),
        BlockChoice::Auto => {
            let cands = default_candidates(sub.elements().len());
            let report = autotune_block_count(model, &sub, &t, &h, env.initial.time, &cands, env.cfg.trial_steps)?;
            (report.chosen, Some(report))
        }
    };
    let plan = BlockPlan::partitioned(model, sub, blocks)?;
    Ok((plan, links, t, h, tune))
}

fn worker(env: &Shared<'_>, transport: &mut dyn Transport) -> Result<WorkerOut, CommError> {
    let w = transport.rank();
    let prepared = setup(env, w);
    env.barrier.wait();
    let (plan, links, mut t, mut h, tune) = prepared?;
    let model = env.model;
    let solver = model.config();
    let owned = plan.subdomain().owned_count();
    let k = env.class.parts.len() as u64;
    let s_count = env.schedule.stage_count() as u64;
    let mut ws = plan.workspace();
    let (mut time, mut dt, mut step) = (env.initial.time, env.initial.dt, env.initial.step);
    let mut clamped = 0u64;
    let mut samples = vec![local_sample(step, time, &t[..owned])];
    let mut recv: Vec<Vec<f64>> = vec![Vec::new(); k as usize];

    let clock = Instant::now();
    while time < solver.t_end && env.max_steps.is_none_or(|m| step - env.initial.step < m) {
        for (q, values) in exchange(
            env.schedule,
            transport,
            step,
            0,
            |q| links.send_ext[q].iter().map(|&l| t[l]).collect(),
            |q| links.recv_ext[q].len(),
        )? {
            for (&l, v) in links.recv_ext[q].iter().zip(values) {
                t[l] = v;
            }
        }

        let bound = plan.assemble(&mut ws, &t, &h, time)?;

        for (q, values) in exchange(
            env.schedule,
            transport,
            step,
            s_count,
            |q| links.shared[q].iter().flat_map(|&l| [ws.capacity[l], ws.residual[l]]).collect(),
            |q| 2 * links.shared[q].len(),
        )? {
            recv[q] = values;
        }
        for (l, sources) in &links.merge {
            let (mut c, mut r) = (0.0, 0.0);
            for &(q, pos) in sources {
                if pos == NONE {
                    c += ws.capacity[*l];
                    r += ws.residual[*l];
                } else {
                    c += recv[q][2 * pos];
                    r += recv[q][2 * pos + 1];
                }
            }
            ws.capacity[*l] = c;
            ws.residual[*l] = r;
        }

        let bound = match solver.dt_policy {
            DtPolicy::PerStep => {
                let global = allreduce_min(env.reduce, transport, step, 2 * s_count, bound)?;
                let candidate = solver.safety * global;
                if !(candidate > 0.0 && candidate.is_finite()) {
                    return Err(FemError::NonPositiveTimestep(candidate).into());
                }
                candidate
            }
            DtPolicy::Fixed => dt,
        };
        dt = next_dt(solver.dt_policy, bound, dt, time, solver.t_end);
        let t_next = time + dt;
        clamped += plan.update_counting(&ws, &mut t, &mut h, dt, t_next, Some(&links.primary))? as u64;
        time = t_next;
        step += 1;
        if solver.output_every > 0 && step.is_multiple_of(solver.output_every) {
            samples.push(local_sample(step, time, &t[..owned]));
        }
    }
    let elapsed = clock.elapsed();
    if samples.last().map(|s| s.step) != Some(step) {
        samples.push(local_sample(step, time, &t[..owned]));
    }
    t.truncate(owned);
    h.truncate(owned);
    Ok(WorkerOut {
        nodes: plan.subdomain().nodes()[..owned].to_vec(),
        temperature: t,
        enthalpy: h,
        time,
        dt,
        step,
        clamped,
        samples,
        blocks: plan.block_count(),
        tune,
        elapsed,
    })
}

/// Solves on `cfg.workers` threads from `initial` until the configured end
/// time, or for at most `max_steps` steps.
pub fn parallel_solve(
    model: &Model,
    initial: &SolverState,
    cfg: &ParallelConfig,
    max_steps: Option<u64>,
) -> Result<ParallelRun, CommError> {
    let mesh = model.mesh();
    if cfg.workers == 0 || cfg.workers > mesh.element_count() {
        return Err(CommError::Config(format!(
            "{} workers for {} elements",
            cfg.workers,
            mesh.element_count()
        )));
    }
    if cfg.blocks == BlockChoice::Fixed(0) {
        return Err(CommError::Config("block count must be positive".into()));
    }
    let partition = if cfg.workers == 1 {
        PartMap::single(mesh.element_count())
    } else {
        partition_mesh(mesh, model.pairs(), cfg.workers, cfg.augment, DEFAULT_BALANCE_TOL)?
    };
    let class = classify_nodes(mesh, &partition, model.pairs());
    let graph = CommGraph::from_classification(&class);
    let schedule = edge_color_schedule(graph.graph());
    let reduce = CommSchedule::complete(cfg.workers);
    log::info!(
        "{} workers, {} exchange stages, {} communication edges",
        cfg.workers,
        schedule.stage_count(),
        graph.graph().edge_count()
    );
    let elements = partition.members();
    let mut transports: Vec<Box<dyn Transport>> = match cfg.transport {
        TransportKind::InProc => inproc_network(cfg.workers).into_iter().map(|t| Box::new(t) as Box<dyn Transport>).collect(),
        TransportKind::Tcp => tcp_network(cfg.workers)?.into_iter().map(|t| Box::new(t) as Box<dyn Transport>).collect(),
    };
    let barrier = Barrier::new(cfg.workers);
    let env = Shared {
        model,
        class: &class,
        elements: &elements,
        schedule: &schedule,
        reduce: &reduce,
        cfg,
        initial,
        max_steps,
        barrier: &barrier,
    };

    let results: Vec<Result<WorkerOut, CommError>> = std::thread::scope(|s| {
        let handles: Vec<_> = transports
            .iter_mut()
            .map(|tr| {
                let env = &env;
                s.spawn(move || worker(env, tr.as_mut()))
            })
            .collect();
        handles
            .into_iter()
            .enumerate()
            .map(|(w, h)| h.join().unwrap_or(Err(CommError::WorkerPanic(w))))
            .collect()
    });

    // a local failure makes the partners fail in transport; report the cause
    if results.iter().any(Result::is_err) {
        let mut errors: Vec<CommError> = results.into_iter().filter_map(Result::err).collect();
        let cause = errors.iter().position(|e| !matches!(e, CommError::Transport { .. })).unwrap_or(0);
        return Err(errors.swap_remove(cause));
    }
    let outs: Vec<WorkerOut> = results.into_iter().map(Result::unwrap).collect();

    let mut state = initial.clone();
    for out in &outs {
        for (i, &g) in out.nodes.iter().enumerate() {
            state.temperature[g] = out.temperature[i];
            state.enthalpy[g] = out.enthalpy[i];
        }
        state.clamped += out.clamped;
    }
    state.time = outs[0].time;
    state.dt = outs[0].dt;
    state.step = outs[0].step;
    let samples = (0..outs[0].samples.len())
        .map(|i| {
            let mut s = outs[0].samples[i];
            for out in &outs[1..] {
                s.t_min = s.t_min.min(out.samples[i].t_min);
                s.t_max = s.t_max.max(out.samples[i].t_max);
            }
            s
        })
        .collect();
    Ok(ParallelRun {
        state,
        samples,
        partition,
        schedule,
        block_counts: outs.iter().map(|o| o.blocks).collect(),
        elapsed: outs.iter().map(|o| o.elapsed).max().unwrap_or_default(),
        tune_reports: outs.into_iter().map(|o| o.tune).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::fixtures;
    use crate::fem::{max_relative_deviation, ReferenceSolver, Stepper};

    #[test]
    fn workers_match_serial() {
        let model = fixtures::small_cast_in_mold().model().unwrap();
        let init = model.initial_state();
        let mut serial = init.clone();
        ReferenceSolver::new(&model).run_steps(&mut serial, 40).unwrap();
        for workers in [1, 2, 3, 4] {
            let cfg = ParallelConfig { workers, blocks: BlockChoice::Fixed(2), ..Default::default() };
            let run = parallel_solve(&model, &init, &cfg, Some(40)).unwrap();
            assert_eq!(run.state.step, 40);
            let dev = max_relative_deviation(&run.state.temperature, &serial.temperature);
            assert!(dev <= 1e-10, "{workers} workers: {dev:e}");
            assert_eq!(run.state.time, serial.time);
            assert_eq!(run.state.clamped, serial.clamped);
        }
    }

    #[test]
    fn single_worker_single_block_is_bitwise_serial() {
        let model = fixtures::small_cast_in_mold().model().unwrap();
        let init = model.initial_state();
        let mut serial = init.clone();
        ReferenceSolver::new(&model).run_steps(&mut serial, 10).unwrap();
        let run = parallel_solve(&model, &init, &ParallelConfig::default(), Some(10)).unwrap();
        assert_eq!(run.state, serial);
    }

    #[test]
    fn tcp_matches_inproc_bitwise() {
        let model = fixtures::small_cast_in_mold().model().unwrap();
        let init = model.initial_state();
        let cfg = ParallelConfig { workers: 3, ..Default::default() };
        let a = parallel_solve(&model, &init, &cfg, Some(15)).unwrap();
        let b = parallel_solve(&model, &init, &ParallelConfig { transport: TransportKind::Tcp, ..cfg }, Some(15)).unwrap();
        assert_eq!(a.state, b.state);
    }

    #[test]
    fn too_many_workers_is_rejected() {
        let model = fixtures::adiabatic_cube(1).unwrap().model().unwrap();
        let init = model.initial_state();
        let cfg = ParallelConfig { workers: 1000, ..Default::default() };
        assert!(matches!(parallel_solve(&model, &init, &cfg, Some(1)), Err(CommError::Config(_))));
    }
}
