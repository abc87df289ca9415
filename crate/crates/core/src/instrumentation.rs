//! Recourse and elementary-operation accounting.
//!
//! Update time is measured in ordered-set operations rather than wall-clock
//! time: every lookup, insertion or removal on a balanced-tree set or map is
//! charged as one operation, attributed to the module that performed it.

use std::io::Write;

use serde::{Deserialize, Serialize};

/// Module an elementary operation is charged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Module {
    Graph,
    Greedy,
    FullyDynamic,
    Det3,
    JobMachine,
    Resample3,
    Wrapper,
}

impl Module {
    pub const ALL: [Module; 7] = [
        Module::Graph,
        Module::Greedy,
        Module::FullyDynamic,
        Module::Det3,
        Module::JobMachine,
        Module::Resample3,
        Module::Wrapper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Module::Graph => "graph",
            Module::Greedy => "greedy",
            Module::FullyDynamic => "fully_dynamic",
            Module::Det3 => "det3",
            Module::JobMachine => "job_machine",
            Module::Resample3 => "resample3",
            Module::Wrapper => "wrapper",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpCounter {
    by_module: [u64; 7],
    total: u64,
    current: u64,
    last: u64,
    max: u64,
    steps: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn charge(&mut self, module: Module, ops: u64) {
        self.by_module[module.index()] += ops;
        self.total += ops;
        self.current += ops;
    }

    /// Closes the current step and returns the operations charged to it.
    pub fn end_step(&mut self) -> u64 {
        let ops = std::mem::take(&mut self.current);
        self.last = ops;
        self.max = self.max.max(ops);
        self.steps += 1;
        ops
    }

    /// Drops whatever was charged since the last step boundary without
    /// recording a step (used for preprocessing).
    pub fn discard_pending(&mut self) -> u64 {
        std::mem::take(&mut self.current)
    }

    pub fn pending(&self) -> u64 {
        self.current
    }

    pub fn last_step(&self) -> u64 {
        self.last
    }

    pub fn max_step(&self) -> u64 {
        self.max
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn module_total(&self, module: Module) -> u64 {
        self.by_module[module.index()]
    }

    pub fn by_module(&self) -> impl Iterator<Item = (Module, u64)> + '_ {
        Module::ALL.iter().map(|&m| (m, self.by_module[m.index()]))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecourse {
    pub added: u64,
    pub removed: u64,
}

/// Per-step spanner edge additions (`|F^t \ F^{t-1}|`) and removals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecourseLog {
    steps: Vec<StepRecourse>,
    total_added: u64,
    total_removed: u64,
}

impl RecourseLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, added: u64, removed: u64) {
        self.steps.push(StepRecourse { added, removed });
        self.total_added += added;
        self.total_removed += removed;
    }

    pub fn steps(&self) -> &[StepRecourse] {
        &self.steps
    }

    pub fn last(&self) -> Option<StepRecourse> {
        self.steps.last().copied()
    }

    pub fn total_added(&self) -> u64 {
        self.total_added
    }

    pub fn total_removed(&self) -> u64 {
        self.total_removed
    }

    pub fn max_added(&self) -> u64 {
        self.steps.iter().map(|s| s.added).max().unwrap_or(0)
    }

    pub fn is_consistent(&self) -> bool {
        self.steps.iter().map(|s| s.added).sum::<u64>() == self.total_added
            && self.steps.iter().map(|s| s.removed).sum::<u64>() == self.total_removed
    }
}

/// One observation of a machine's load against its target load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadSample {
    pub step: u64,
    pub machine: usize,
    pub load: u64,
    pub target: f64,
}

impl LoadSample {
    pub fn residual(&self, alpha: f64, beta: f64) -> f64 {
        self.load as f64 - alpha * self.target - beta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverheadReport {
    pub alpha: f64,
    pub beta: f64,
    pub samples: usize,
    pub violations: usize,
    pub worst_residual: f64,
}

impl OverheadReport {
    pub fn violation_fraction(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.violations as f64 / self.samples as f64
        }
    }
}

/// Which of the recorded samples enter the measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplePolicy {
    All,
    /// Only samples whose step is a multiple of `every`.
    EveryNthStep(u64),
    /// Only samples from machines with a positive load.
    Loaded,
}

impl SamplePolicy {
    fn admits(&self, s: &LoadSample) -> bool {
        match *self {
            SamplePolicy::All => true,
            SamplePolicy::EveryNthStep(k) => k > 0 && s.step.is_multiple_of(k),
            SamplePolicy::Loaded => s.load > 0,
        }
    }
}

/// Fraction of admitted samples violating `load <= alpha * target + beta`.
pub fn measure_overhead(
    samples: &[LoadSample],
    alpha: f64,
    beta: f64,
    policy: SamplePolicy,
) -> OverheadReport {
    let mut report = OverheadReport {
        alpha,
        beta,
        samples: 0,
        violations: 0,
        worst_residual: f64::NEG_INFINITY,
    };
    for s in samples.iter().filter(|s| policy.admits(s)) {
        report.samples += 1;
        let r = s.residual(alpha, beta);
        if r > 0.0 {
            report.violations += 1;
        }
        report.worst_residual = report.worst_residual.max(r);
    }
    report
}

/// One CSV row of per-step metrics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub step: u64,
    pub event: String,
    pub recourse_add: u64,
    pub recourse_del: u64,
    pub spanner_size: u64,
    pub op_count: u64,
    pub resamples: u64,
    /// `1`/`0` when checked, empty when not.
    pub stretch_ok: String,
}

pub const CSV_HEADER: [&str; 8] = [
    "step",
    "event",
    "recourse_add",
    "recourse_del",
    "spanner_size",
    "op_count",
    "resamples",
    "stretch_ok",
];

pub fn write_metrics_csv<W: Write>(out: W, rows: &[MetricsRow]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics_csv(text: &str) -> csv::Result<Vec<MetricsRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect()
}

/// Nearest-rank percentile of an unsorted slice (`q` in `[0, 1]`).
pub fn percentile(values: &[u64], q: f64) -> u64 {
    if values.is_empty() {
        return 0;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let rank = (q * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}
