//! Builds the configured algorithm and adversary and runs the update loop.

use std::fs;
use std::path::Path;

use dynspan::adversary::{random_graph, Adversary, AdversaryError, UpdateStream};
use dynspan::buckets::ceil_sqrt;
use dynspan::det3::Det3State;
use dynspan::fully_dynamic::FullyDynamicGreedy;
use dynspan::greedy::GreedyState;
use dynspan::instrumentation::MetricsRow;
use dynspan::job_machine::{HyperInstance, JobMachine, MachineView};
use dynspan::oracle::{verify_stretch, CheckMode};
use dynspan::resample3::{default_phase_len, Resample3Spanner};
use dynspan::spanner::DynamicSpanner;
use dynspan::wrapper::WrappedResample3;
use dynspan::DynamicGraph;
use serde::Serialize;

use crate::args::{AdversaryArg, Algo, AlgoArgs, CheckArg, Fault, GraphArgs};
use crate::error::CliError;

const ADVERSARY_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const INIT_SALT: u64 = 0xd1b5_4a32_d192_ed03;
/// Steps between invariant audits in sampled mode.
const AUDIT_EVERY: u64 = 50;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_graph(path: &Path) -> Result<DynamicGraph, CliError> {
    DynamicGraph::from_canonical(&read_text(path)?).map_err(|source| CliError::StreamParse {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_stream(path: &Path) -> Result<UpdateStream, CliError> {
    UpdateStream::parse(&read_text(path)?).map_err(|source| CliError::StreamParse {
        path: path.to_path_buf(),
        source,
    })
}

/// How the stretch is checked after each update.
#[derive(Debug, Clone, Copy)]
pub struct CheckPolicy {
    pub mode: CheckArg,
    pub sample_count: usize,
    pub seed: u64,
}

/// The structure under test.
pub enum Subject {
    Graph(Box<dyn DynamicSpanner>),
    Jobs(Box<JobMachine>),
}

pub fn phase_len(args: &AlgoArgs, n: usize) -> u64 {
    args.phase_len.unwrap_or_else(|| default_phase_len(n))
}

pub fn build_spanner(
    algo: Algo,
    args: &AlgoArgs,
    g: DynamicGraph,
) -> Result<Box<dyn DynamicSpanner>, CliError> {
    if matches!(algo, Algo::Det3 | Algo::Resample3) && args.k != 2 {
        return Err(CliError::BadArgs(format!(
            "{} maintains a 3-spanner; --k must be 2",
            algo.name()
        )));
    }
    if args.inject_fault.is_some() && algo != Algo::Det3 {
        return Err(CliError::BadArgs("fault injection is only wired into det3".into()));
    }
    let n = g.n();
    Ok(match algo {
        Algo::Greedy => Box::new(GreedyState::build(g, args.k)?),
        Algo::FdGreedy => {
            let mut s = FullyDynamicGreedy::new(n, args.k)?;
            for e in g.edges() {
                s.insert(e)?;
            }
            Box::new(s)
        }
        Algo::Det3 => {
            let mut s = Det3State::build(g);
            if args.inject_fault == Some(Fault::SkipRepair) {
                s.set_skip_repair(true);
            }
            Box::new(s)
        }
        Algo::Resample3 if args.deamortize => {
            Box::new(WrappedResample3::new(&g, phase_len(args, n), args.seed)?)
        }
        Algo::Resample3 => Box::new(Resample3Spanner::new(&g, phase_len(args, n), args.seed)?),
        Algo::Jm => unreachable!("job-machine runs are built by build_jobs"),
    })
}

pub fn build_jobs(n: usize, steps: u64, seed: u64) -> Result<JobMachine, CliError> {
    let machines = 4 * n.max(1);
    let inst = HyperInstance::random(n, machines, 6, 2, ceil_sqrt(machines), 0.3, seed)?;
    Ok(JobMachine::init(inst, steps + 1, seed))
}

pub fn make_adversary(
    arg: &AdversaryArg,
    algo: Algo,
    p_insert: f64,
    seed: u64,
) -> Result<Adversary, CliError> {
    if !(0.0..=1.0).contains(&p_insert) {
        return Err(CliError::BadArgs("--p-insert must lie in [0, 1]".into()));
    }
    // The plain greedy spanner is decremental.
    let p = if algo == Algo::Greedy { 0.0 } else { p_insert };
    let seed = seed.wrapping_add(ADVERSARY_SALT);
    let adv = match arg {
        AdversaryArg::Random => Adversary::random(p, seed),
        AdversaryArg::SpannerTarget => Adversary::spanner_targeting(p, seed),
        AdversaryArg::WitnessHammer => Adversary::witness_hammer(p, seed),
        AdversaryArg::MaxLoad => Adversary::max_load(seed),
        AdversaryArg::Replay(path) => Adversary::replay(load_stream(path)?),
    };
    let ok = match (algo, arg) {
        (Algo::Jm, AdversaryArg::SpannerTarget | AdversaryArg::Replay(_)) => false,
        (Algo::Jm, _) => true,
        (_, AdversaryArg::MaxLoad) => false,
        _ => true,
    };
    if !ok {
        return Err(CliError::BadArgs(format!(
            "adversary {} cannot drive {}",
            arg.label(),
            algo.name()
        )));
    }
    Ok(adv)
}

/// Initial graph from `--init`, `--init-m` or the replay header.
pub fn initial_graph(graph: &GraphArgs, n: usize, seed: u64) -> Result<DynamicGraph, CliError> {
    if let Some(path) = &graph.init {
        let g = load_graph(path)?;
        if g.n() != n {
            return Err(CliError::BadArgs(format!(
                "initial graph has n = {} but the run uses n = {n}",
                g.n()
            )));
        }
        return Ok(g);
    }
    match graph.init_m {
        Some(m) => Ok(random_graph(n, m, seed ^ INIT_SALT)?),
        None => Ok(DynamicGraph::empty(n)),
    }
}

/// Aggregate facts about a finished run, written as `<out>.meta.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub algo: &'static str,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub adversary: String,
    pub p_insert: f64,
    pub phase_len: Option<u64>,
    pub deamortize: bool,
    pub check: &'static str,
    pub steps_requested: u64,
    pub steps_run: u64,
    pub stopped_early: bool,
    pub initial_edges: usize,
    pub final_edges: usize,
    pub final_size: u64,
    pub total_recourse_add: u64,
    pub total_recourse_del: u64,
    pub max_op_count: u64,
    pub total_resamples: u64,
}

pub struct Outcome {
    pub rows: Vec<MetricsRow>,
    pub stopped_early: bool,
    /// Set when a check failed; `rows` holds everything up to the failure.
    pub failure: Option<CliError>,
}

fn check_spanner(
    s: &dyn DynamicSpanner,
    step: u64,
    policy: CheckPolicy,
) -> Result<Option<bool>, CliError> {
    let mode = match policy.mode {
        CheckArg::None => return Ok(None),
        CheckArg::Exact => CheckMode::Exact,
        CheckArg::Sampled => CheckMode::Sampled {
            count: policy.sample_count,
            seed: policy.seed ^ step,
        },
    };
    let r = verify_stretch(s.graph(), s.spanner_edges(), s.stretch(), mode)
        .map_err(|e| CliError::InvariantFailed {
            step,
            reason: e.to_string(),
        })?;
    if !r.ok {
        let edge = r.worst_edge.expect("a failed check names an edge");
        return Err(CliError::CheckFailed {
            step,
            edge,
            dist: r.worst_dist,
            stretch: s.stretch(),
        });
    }
    Ok(Some(true))
}

fn ok_flag(checked: Option<bool>) -> String {
    match checked {
        Some(true) => "1".into(),
        Some(false) => "0".into(),
        None => String::new(),
    }
}

/// Runs `steps` updates. Stops early when the adversary has no legal move.
pub fn run_loop(
    subject: &mut Subject,
    adv: &mut Adversary,
    steps: u64,
    policy: CheckPolicy,
) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    let mut stopped_early = false;
    for step in 1..=steps {
        let row = match subject {
            Subject::Graph(s) => {
                let ev = match adv.adv_next(s.as_ref()) {
                    Ok(ev) => ev,
                    Err(AdversaryError::Exhausted) => {
                        stopped_early = true;
                        break;
                    }
                    Err(e) => return Err(e.into()),
                };
                let delta = s.apply(&ev)?;
                let checked = match check_spanner(s.as_ref(), step, policy) {
                    Ok(c) => c,
                    Err(failure) => {
                        return Ok(Outcome {
                            rows,
                            stopped_early,
                            failure: Some(failure),
                        })
                    }
                };
                MetricsRow {
                    step,
                    event: ev.to_string(),
                    recourse_add: delta.added.len() as u64,
                    recourse_del: delta.removed.len() as u64,
                    spanner_size: s.spanner_len() as u64,
                    op_count: s.last_ops(),
                    resamples: s.last_resamples(),
                    stretch_ok: ok_flag(checked),
                }
            }
            Subject::Jobs(jm) => {
                if jm.clock() + 1 >= jm.schedule().horizon() {
                    stopped_early = true;
                    break;
                }
                let x = match adv.adv_next_machine(jm.as_ref()) {
                    Ok(x) => x,
                    Err(AdversaryError::Exhausted) => {
                        stopped_early = true;
                        break;
                    }
                    Err(e) => return Err(e.into()),
                };
                let before = jm.reassignments();
                let report = jm.jm_delete_machine(x)?;
                let audit = match policy.mode {
                    CheckArg::None => false,
                    CheckArg::Exact => true,
                    CheckArg::Sampled => step % AUDIT_EVERY == 0,
                };
                let checked = if audit {
                    if let Err(reason) = jm.check_invariants() {
                        return Ok(Outcome {
                            rows,
                            stopped_early,
                            failure: Some(CliError::InvariantFailed { step, reason }),
                        });
                    }
                    Some(true)
                } else {
                    None
                };
                let assigned = (0..jm.instance().jobs())
                    .filter(|&u| jm.assigned(u).is_some())
                    .count();
                MetricsRow {
                    step,
                    event: format!("- m{x}"),
                    recourse_add: jm.reassignments() - before,
                    recourse_del: report.touched.len() as u64,
                    spanner_size: assigned as u64,
                    op_count: jm.ops().last_step(),
                    resamples: report.resamples,
                    stretch_ok: ok_flag(checked),
                }
            }
        };
        rows.push(row);
    }
    Ok(Outcome {
        rows,
        stopped_early,
        failure: None,
    })
}

/// Edges currently in the subject's graph, or live machines for jobs.
pub fn subject_size(subject: &Subject) -> (usize, u64) {
    match subject {
        Subject::Graph(s) => (s.graph().m(), s.spanner_len() as u64),
        Subject::Jobs(jm) => (jm.live_machines().len(), jm.max_load()),
    }
}

pub fn total_resamples(subject: &Subject, rows: &[MetricsRow]) -> u64 {
    match subject {
        Subject::Jobs(jm) => jm.total_resamples(),
        Subject::Graph(_) => rows.iter().map(|r| r.resamples).sum(),
    }
}
