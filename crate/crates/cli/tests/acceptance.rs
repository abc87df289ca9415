//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Asymptotic and high-probability bounds are checked against calibrated
//! constants. Each constant below was set from a calibration run of this
//! suite (the measured worst case is printed next to every verdict) and is
//! frozen here as a regression threshold.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::process::{Command, ExitCode};
use std::thread;
use std::time::Instant;

use dynspan::adversary::{random_graph, Adversary};
use dynspan::buckets::{ceil_log2, ceil_sqrt};
use dynspan::det3::Det3State;
use dynspan::fully_dynamic::FullyDynamicGreedy;
use dynspan::greedy::GreedyState;
use dynspan::instrumentation::{measure_overhead, LoadSample, SamplePolicy};
use dynspan::job_machine::{HyperInstance, JobMachine};
use dynspan::oracle::{girth_at_least, reference_greedy, verify_stretch, CheckMode};
use dynspan::resample3::Resample3Spanner;
use dynspan::spanner::{DynamicSpanner, SpannerView};
use dynspan::wrapper::{planned_budget, WrappedResample3};

/// Wall-clock limit for one full greedy deletion run.
const GREEDY_SECONDS: f64 = 60.0;
/// Op-count constant of the deterministic 3-spanner.
const DET3_C: u64 = 4;
/// Overhead multipliers: `alpha = C1 * log2 T`, `beta = C2 * log2 |M|`.
const OVERHEAD_C1: f64 = 8.0;
const OVERHEAD_C2: f64 = 40.0;
/// Largest tolerated fraction of overhead violations per seed.
const OVERHEAD_TOLERANCE: f64 = 0.01;
/// Per-step resamples `<= C * ceil(sqrt n) * (floor(log2 L) + 1)`.
const RESAMPLE_STEP_C: u64 = 2;
/// Phase-total resamples `<= C' * L * (log2 n)^3`.
const RESAMPLE_PHASE_C: f64 = 0.05;
/// Op-count constant of the de-amortized wrapper's budget.
const WRAPPER_C: u64 = 64;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn stretch_ok(s: &dyn SpannerView, t: usize) -> bool {
    verify_stretch(s.graph(), s.spanner_edges(), t, CheckMode::Exact)
        .map(|r| r.ok)
        .unwrap_or(false)
}

fn greedy_recourse() -> Verdict {
    let mut detail = String::new();
    let mut pass = true;
    for (k, seed) in [(2usize, 1u64), (3, 2)] {
        let started = Instant::now();
        let g = random_graph(150, 2000, seed).unwrap();
        let m = g.m() as u64;
        let mut s = GreedyState::build(g, k).unwrap();
        let mut adv = Adversary::random(0.0, seed);
        let mut bad = 0;
        let mut steps = 0;
        while let Ok(ev) = adv.adv_next(&s) {
            s.apply(&ev).unwrap();
            steps += 1;
            let h = s.spanner_set();
            if !stretch_ok(&s, 2 * k - 1) || !girth_at_least(150, h.iter().copied(), 2 * k + 1) {
                bad += 1;
            }
        }
        let total = s.total_recourse();
        let secs = started.elapsed().as_secs_f64();
        pass &= bad == 0 && total <= m && steps == m && secs < GREEDY_SECONDS;
        let _ = write!(
            detail,
            "k={k}: additions {total} <= m {m}, {bad} bad steps of {steps}, {secs:.1}s; "
        );
    }
    Verdict::new(pass, detail)
}

fn greedy_order_equivalence() -> Verdict {
    let g = random_graph(40, 300, 7).unwrap();
    let mut s = GreedyState::build(g, 2).unwrap();
    let mut adv = Adversary::random(0.0, 7);
    let (mut steps, mut mismatches) = (0, 0);
    while let Ok(ev) = adv.adv_next(&s) {
        s.apply(&ev).unwrap();
        steps += 1;
        let want = reference_greedy(s.graph(), 2, &s.equivalent_order()).unwrap();
        if s.spanner_sequence().collect::<Vec<_>>() != want {
            mismatches += 1;
        }
    }
    Verdict::new(
        steps >= 100 && mismatches == 0,
        format!("{steps} deletion steps, {mismatches} mismatches"),
    )
}

fn fully_dynamic() -> Verdict {
    let (n, u) = (32usize, 5000u64);
    let mut s = FullyDynamicGreedy::new(n, 2).unwrap();
    let mut adv = Adversary::spanner_targeting(0.6, 3);
    let (mut bad, mut max_size, mut recourse) = (0, 0, 0u64);
    for _ in 0..u {
        let ev = adv.adv_next(&s).unwrap();
        let d = s.apply(&ev).unwrap();
        recourse += d.changes() as u64;
        max_size = max_size.max(s.spanner_len());
        if !stretch_ok(&s, 3) {
            bad += 1;
        }
    }
    let nf = n as f64;
    let size_bound = 4.0 * nf.powf(1.5) * (nf.log2() + 2.0);
    let recourse_bound = 8.0 * u as f64 * (u as f64).log2();
    Verdict::new(
        bad == 0 && (max_size as f64) <= size_bound && (recourse as f64) <= recourse_bound,
        format!(
            "{bad} stretch failures; max size {max_size} <= {size_bound:.0}; \
             recourse {recourse} <= {recourse_bound:.0}"
        ),
    )
}

fn det3() -> Verdict {
    let n = 144;
    let root = ceil_sqrt(n);
    let log = u64::from(ceil_log2(n));
    let g = random_graph(n, 1000, 11).unwrap();
    let mut s = Det3State::build(g);
    let mut random = Adversary::random(0.5, 11);
    let mut targeted = Adversary::spanner_targeting(0.2, 12);
    let (mut bad_stretch, mut bad_change, mut bad_ops, mut bad_audit) = (0, 0, 0, 0);
    let mut worst_ratio = 0.0f64;
    for step in 0..11_000u64 {
        let delta_before = s.graph().max_degree();
        let ev = if step < 10_000 {
            random.adv_next(&s).unwrap()
        } else {
            targeted.adv_next(&s).unwrap()
        };
        let d = s.apply(&ev).unwrap();
        let delta = delta_before.max(s.graph().max_degree());
        if !stretch_ok(&s, 3) {
            bad_stretch += 1;
        }
        if d.added.len() > 2 * root + 2 || d.removed.len() > 2 * root + 2 {
            bad_change += 1;
        }
        let unit = (delta.min(root) as u64 + 1) * log;
        worst_ratio = worst_ratio.max(s.last_ops() as f64 / unit as f64);
        if s.last_ops() > DET3_C * unit {
            bad_ops += 1;
        }
        if step % 50 == 0 && s.check_invariants().is_err() {
            bad_audit += 1;
        }
    }
    Verdict::new(
        bad_stretch + bad_change + bad_ops + bad_audit == 0,
        format!(
            "stretch {bad_stretch}, change-bound {bad_change}, op-bound {bad_ops} \
             (worst ops/unit {worst_ratio:.2}, C = {DET3_C}), rebuild mismatches {bad_audit}"
        ),
    )
}

struct JmRun {
    rel_checked: usize,
    rel_violations: usize,
    overhead_fraction: f64,
    worst_residual: f64,
}

fn jm_run(seed: u64) -> JmRun {
    let deletions = 10_000u64;
    let machines = 12_000;
    let inst = HyperInstance::random(3000, machines, 8, 2, 110, 0.3, seed).unwrap();
    let mut jm = JobMachine::init(inst, deletions + 1, seed);
    let mut adv = Adversary::max_load(seed);
    let mut samples: Vec<LoadSample> = jm.sample_loads();
    for step in 1..=deletions {
        let x = adv.adv_next_machine(&jm).unwrap();
        jm.jm_delete_machine(x).unwrap();
        if step % 250 == 0 {
            samples.extend(jm.sample_loads());
        }
    }
    let entries = jm.entries_by_job();
    let routines = jm.instance().routines().len();
    let mut rel_checked = 0;
    let mut rel_violations = 0;
    // Sample (t, routine) pairs deterministically: every routine at a
    // handful of times, plus the times right after dense touch bursts.
    for r in (0..routines).step_by(7) {
        let job = jm.instance().routines()[r].job;
        let events = jm.resample_events(job);
        let mut times: BTreeSet<u64> = [1, 2, 3, 100, 1024, 5000, deletions].into();
        times.extend(events.iter().map(|&s| s + 1).filter(|&t| t <= deletions));
        for t in times {
            let rel = dynspan::job_machine::relevant_times(events, &entries[job], t).len();
            rel_checked += 1;
            if rel as u64 > u64::from(t.ilog2()) + 1 {
                rel_violations += 1;
            }
        }
    }
    let t_log = (deletions as f64).log2();
    let m_log = (machines as f64).log2();
    let report = measure_overhead(
        &samples,
        OVERHEAD_C1 * t_log,
        OVERHEAD_C2 * m_log,
        SamplePolicy::All,
    );
    JmRun {
        rel_checked,
        rel_violations,
        overhead_fraction: report.violation_fraction(),
        worst_residual: report.worst_residual,
    }
}

fn job_machine() -> (Verdict, Verdict) {
    let runs: Vec<JmRun> = thread::scope(|s| {
        let handles: Vec<_> = (0..10).map(|seed| s.spawn(move || jm_run(seed))).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let checked: usize = runs.iter().map(|r| r.rel_checked).sum();
    let violations: usize = runs.iter().map(|r| r.rel_violations).sum();
    let worst_fraction = runs.iter().map(|r| r.overhead_fraction).fold(0.0, f64::max);
    let worst_residual = runs.iter().map(|r| r.worst_residual).fold(f64::NEG_INFINITY, f64::max);
    let rel = Verdict::new(
        violations == 0,
        format!("{checked} (t, routine) samples over 10 seeds, {violations} violations"),
    );
    let overhead = Verdict::new(
        runs.iter().all(|r| r.overhead_fraction <= OVERHEAD_TOLERANCE),
        format!(
            "worst per-seed violation fraction {worst_fraction:.4} <= {OVERHEAD_TOLERANCE} \
             (c1 = {OVERHEAD_C1}, c2 = {OVERHEAD_C2}, worst residual {worst_residual:.1})"
        ),
    );
    (rel, overhead)
}

struct ResampleRun {
    bad_stretch: usize,
    worst_step: u64,
    worst_phase: u64,
    phases: usize,
}

fn resample_run(seed: u64, n: usize, phase_len: u64) -> ResampleRun {
    let g = random_graph(n, 1500, seed).unwrap();
    let mut s = Resample3Spanner::new(&g, phase_len, seed).unwrap();
    let mut adv = Adversary::witness_hammer(0.5, seed);
    let mut bad_stretch = 0;
    let mut worst_step = 0;
    for _ in 0..2 * phase_len + 1 {
        let ev = adv.adv_next(&s).unwrap();
        s.apply(&ev).unwrap();
        worst_step = worst_step.max(s.last_resamples());
        if !stretch_ok(&s, 3) {
            bad_stretch += 1;
        }
    }
    let totals = s.finished_phase_totals();
    ResampleRun {
        bad_stretch,
        worst_step,
        worst_phase: totals.iter().copied().max().unwrap_or(0),
        phases: totals.len(),
    }
}

fn resample3() -> Verdict {
    let (n, phase_len) = (100usize, 1000u64);
    let runs: Vec<ResampleRun> = thread::scope(|s| {
        let handles: Vec<_> = (0..10)
            .map(|seed| s.spawn(move || resample_run(seed, n, phase_len)))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let step_bound = RESAMPLE_STEP_C * ceil_sqrt(n) as u64 * (u64::from(phase_len.ilog2()) + 1);
    let phase_bound = RESAMPLE_PHASE_C * phase_len as f64 * (n as f64).log2().powi(3);
    let bad: usize = runs.iter().map(|r| r.bad_stretch).sum();
    let worst_step = runs.iter().map(|r| r.worst_step).max().unwrap();
    let worst_phase = runs.iter().map(|r| r.worst_phase).max().unwrap();
    let phases: usize = runs.iter().map(|r| r.phases).sum();
    Verdict::new(
        bad == 0 && worst_step <= step_bound && (worst_phase as f64) <= phase_bound && phases >= 20,
        format!(
            "{bad} stretch failures; worst step resamples {worst_step} <= {step_bound}; \
             worst phase total {worst_phase} <= {phase_bound:.0} over {phases} phases"
        ),
    )
}

fn deamortized() -> Verdict {
    let (n, phase_len) = (100usize, 1000u64);
    let budget = planned_budget(n, phase_len, WRAPPER_C);
    let g = random_graph(n, 1500, 21).unwrap();
    let mut w = WrappedResample3::new(&g, phase_len, 21).unwrap();
    let mut plain = Resample3Spanner::new(&g, phase_len, 21).unwrap();
    let mut adv = Adversary::witness_hammer(0.5, 21);
    let mut plain_adv = Adversary::witness_hammer(0.5, 21);
    let (mut bad_stretch, mut over, mut over_at_boundary) = (0, 0, 0);
    let (mut max_ops, mut max_boundary_ops, mut plain_max) = (0, 0, 0);
    for step in 0..3 * phase_len + 5 {
        let ev = adv.adv_next(&w).unwrap();
        w.apply(&ev).unwrap();
        let ops = w.last_ops();
        max_ops = max_ops.max(ops);
        let boundary = (step + 1) % phase_len <= 1;
        if boundary {
            max_boundary_ops = max_boundary_ops.max(ops);
        }
        if ops > budget {
            over += 1;
            over_at_boundary += usize::from(boundary);
        }
        if !stretch_ok(&w, 3) {
            bad_stretch += 1;
        }
        let ev = plain_adv.adv_next(&plain).unwrap();
        plain.apply(&ev).unwrap();
        plain_max = plain_max.max(plain.last_ops());
    }
    Verdict::new(
        bad_stretch == 0 && over == 0 && w.phases() >= 4 && w.forced_catchups() == 0,
        format!(
            "{} phases; max ops {max_ops} (at boundaries {max_boundary_ops}) <= budget {budget}; \
             {over} over budget ({over_at_boundary} at boundaries); {bad_stretch} stretch failures; \
             unwrapped max {plain_max}",
            w.phases()
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::TempDir::new().unwrap();
    let runs: [&[&str]; 6] = [
        &["--algo", "greedy", "--n", "40", "--init-m", "300", "--steps", "300"],
        &["--algo", "fd-greedy", "--n", "30", "--steps", "600", "--adversary", "spanner-target"],
        &["--algo", "det3", "--n", "64", "--init-m", "400", "--steps", "800"],
        &["--algo", "resample3", "--n", "49", "--init-m", "300", "--steps", "800", "--adversary", "witness-hammer", "--phase-len", "200"],
        &["--algo", "resample3", "--n", "49", "--init-m", "300", "--steps", "800", "--phase-len", "120", "--deamortize"],
        &["--algo", "jm", "--n", "200", "--steps", "500", "--adversary", "max-load"],
    ];
    let mut differing = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("run{i}_{rep}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_dynspan"))
                .arg("run")
                .args(*args)
                .args(["--seed", "5", "--check", "sampled", "--out", out.to_str().unwrap()])
                .status()
                .unwrap();
            assert!(status.success(), "run {i} failed");
            let meta = std::fs::read(format!("{}.meta.json", out.display())).unwrap();
            outputs.push((std::fs::read(&out).unwrap(), meta));
        }
        if outputs[0] != outputs[1] {
            differing.push(args[1]);
        }
    }
    Verdict::new(
        differing.is_empty(),
        format!("{} configurations run twice, differing: {differing:?}", runs.len()),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let names = [
        "greedy recourse",
        "greedy order equivalence",
        "fully dynamic reduction",
        "deterministic 3-spanner",
        "resampling schedule law",
        "load overhead",
        "randomized 3-spanner",
        "de-amortized rebuild",
        "determinism",
    ];
    let mut verdicts: Vec<Option<Verdict>> = (0..9).map(|_| None).collect();
    thread::scope(|s| {
        let c1 = s.spawn(greedy_recourse);
        let c2 = s.spawn(greedy_order_equivalence);
        let c3 = s.spawn(fully_dynamic);
        let c4 = s.spawn(det3);
        let c56 = s.spawn(job_machine);
        let c7 = s.spawn(resample3);
        let c8 = s.spawn(deamortized);
        let c9 = s.spawn(determinism);
        verdicts[0] = Some(c1.join().unwrap());
        verdicts[1] = Some(c2.join().unwrap());
        verdicts[2] = Some(c3.join().unwrap());
        verdicts[3] = Some(c4.join().unwrap());
        let (rel, overhead) = c56.join().unwrap();
        verdicts[4] = Some(rel);
        verdicts[5] = Some(overhead);
        verdicts[6] = Some(c7.join().unwrap());
        verdicts[7] = Some(c8.join().unwrap());
        verdicts[8] = Some(c9.join().unwrap());
    });
    let mut failed = 0;
    for (i, (name, v)) in names.iter().zip(verdicts).enumerate() {
        let v = v.unwrap();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!v.pass);
        println!("[{tag}] {} {name}: {}", i + 1, v.detail);
    }
    println!("acceptance: {} of 9 passed in {:.1?}", 9 - failed, start.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
