//! Proactive resampling over jobs, machines and routines.
//!
//! Each job is handled by one of its routines; a routine occupies a set of
//! machines. When the adversary deletes a machine, every job whose current
//! routine used it is *touched*: it is resampled at the next step and again
//! `2, 4, 8, ...` steps after the touch. The load of a machine is the number
//! of assigned routines using it.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use indexmap::IndexSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{parse_num, ParseError};
use crate::instrumentation::{LoadSample, Module, OpCounter};

pub type JobId = usize;
pub type MachineId = usize;
pub type RoutineId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JmError {
    #[error("job {job} has two routines sharing machine {machine}")]
    DisjointnessViolated { job: JobId, machine: MachineId },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("unknown job {0}")]
    UnknownJob(JobId),
    #[error("unknown routine {0}")]
    UnknownRoutine(RoutineId),
    #[error("machine {0} is not live")]
    MachineMissing(MachineId),
    #[error("clock reached the schedule horizon {0}")]
    HorizonExhausted(u64),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Routine {
    pub job: JobId,
    pub machines: Vec<MachineId>,
}

/// Jobs, machines and routines; routines of one job never share a machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperInstance {
    jobs: usize,
    machines: usize,
    routines: Vec<Routine>,
}

impl HyperInstance {
    pub fn new(jobs: usize, machines: usize, routines: Vec<Routine>) -> Result<Self, JmError> {
        let mut used: BTreeSet<(JobId, MachineId)> = BTreeSet::new();
        for (id, r) in routines.iter().enumerate() {
            if r.job >= jobs {
                return Err(JmError::InvalidInstance(format!(
                    "routine {id} names job {} of {jobs}",
                    r.job
                )));
            }
            if r.machines.is_empty() {
                return Err(JmError::InvalidInstance(format!("routine {id} uses no machine")));
            }
            let distinct: BTreeSet<MachineId> = r.machines.iter().copied().collect();
            if distinct.len() != r.machines.len() {
                return Err(JmError::InvalidInstance(format!(
                    "routine {id} lists a machine twice"
                )));
            }
            for &x in &distinct {
                if x >= machines {
                    return Err(JmError::InvalidInstance(format!(
                        "routine {id} names machine {x} of {machines}"
                    )));
                }
                if !used.insert((r.job, x)) {
                    return Err(JmError::DisjointnessViolated {
                        job: r.job,
                        machine: x,
                    });
                }
            }
        }
        Ok(Self {
            jobs,
            machines,
            routines,
        })
    }

    /// Random instance: every job gets between 1 and `max_degree` routines
    /// of `per_routine` machines each. With probability `hot_prob` a machine
    /// is drawn from the first `hot` machines, so a few machines carry many
    /// routines.
    pub fn random(
        jobs: usize,
        machines: usize,
        max_degree: usize,
        per_routine: usize,
        hot: usize,
        hot_prob: f64,
        seed: u64,
    ) -> Result<Self, JmError> {
        if max_degree == 0 || per_routine == 0 || per_routine * max_degree > machines {
            return Err(JmError::InvalidInstance(
                "degree times machines per routine exceeds the machine count".into(),
            ));
        }
        let hot = hot.min(machines);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut routines = Vec::new();
        for job in 0..jobs {
            let degree = rng.gen_range(1..=max_degree);
            let mut taken: BTreeSet<MachineId> = BTreeSet::new();
            for _ in 0..degree {
                let mut ms = Vec::with_capacity(per_routine);
                while ms.len() < per_routine {
                    let x = if hot > 0 && rng.gen_bool(hot_prob) {
                        rng.gen_range(0..hot)
                    } else {
                        rng.gen_range(0..machines)
                    };
                    if taken.insert(x) {
                        ms.push(x);
                    }
                }
                routines.push(Routine { job, machines: ms });
            }
        }
        Self::new(jobs, machines, routines)
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn routines(&self) -> &[Routine] {
        &self.routines
    }

    /// Largest number of routines of a single job.
    pub fn max_job_degree(&self) -> usize {
        let mut deg = vec![0usize; self.jobs];
        for r in &self.routines {
            deg[r.job] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// `J <count>`, `M <count>`, then one `R <job> <machine>...` per routine.
    pub fn to_text(&self) -> String {
        let mut out = format!("J {}\nM {}\n", self.jobs, self.machines);
        for r in &self.routines {
            let _ = write!(out, "R {}", r.job);
            for x in &r.machines {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, JmError> {
        let mut jobs = None;
        let mut machines = None;
        let mut routines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let mut it = l.split_whitespace();
            match it.next() {
                Some("J") if jobs.is_none() => {
                    jobs = Some(parse_count(line, &mut it)?);
                }
                Some("M") if machines.is_none() => {
                    machines = Some(parse_count(line, &mut it)?);
                }
                Some("R") if jobs.is_some() && machines.is_some() => {
                    let job = match it.next() {
                        Some(t) => parse_num(line, t)?,
                        None => return Err(ParseError::new(line, "expected `R <job> <machine>...`").into()),
                    };
                    let ms = it
                        .map(|t| parse_num(line, t))
                        .collect::<Result<Vec<MachineId>, _>>()?;
                    routines.push(Routine { job, machines: ms });
                }
                _ => {
                    return Err(ParseError::new(
                        line,
                        "expected `J <count>`, then `M <count>`, then `R` lines",
                    )
                    .into())
                }
            }
        }
        match (jobs, machines) {
            (Some(j), Some(m)) => Self::new(j, m, routines),
            _ => Err(ParseError::new(1, "missing `J` or `M` header").into()),
        }
    }
}

fn parse_count<'a>(
    line: usize,
    it: &mut impl Iterator<Item = &'a str>,
) -> Result<usize, ParseError> {
    match (it.next(), it.next()) {
        (Some(t), None) => parse_num(line, t),
        _ => Err(ParseError::new(line, "expected a single count")),
    }
}

/// One schedule insertion: `job` is due at `time`, inserted at `created`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleEntry<J> {
    pub job: J,
    pub time: u64,
    pub created: u64,
}

/// Future resample times per job plus the inverted per-time lists.
#[derive(Debug, Clone)]
pub struct Schedule<J> {
    horizon: u64,
    per_job: BTreeMap<J, BTreeSet<u64>>,
    list: BTreeMap<u64, BTreeSet<J>>,
    log: Vec<ScheduleEntry<J>>,
    keep_log: bool,
}

impl<J: Ord + Copy> Schedule<J> {
    pub fn new(horizon: u64, keep_log: bool) -> Self {
        Self {
            horizon,
            per_job: BTreeMap::new(),
            list: BTreeMap::new(),
            log: Vec::new(),
            keep_log,
        }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Adds `{now + 2^k : k >= 0, now + 2^k <= horizon}` for `job`.
    /// Returns the number of times inserted (already present ones included).
    pub fn touch(&mut self, job: J, now: u64) -> usize {
        let mut added = 0;
        let mut step = 1u64;
        while let Some(t) = now.checked_add(step).filter(|&t| t <= self.horizon) {
            self.per_job.entry(job).or_default().insert(t);
            self.list.entry(t).or_default().insert(job);
            if self.keep_log {
                self.log.push(ScheduleEntry {
                    job,
                    time: t,
                    created: now,
                });
            }
            added += 1;
            match step.checked_mul(2) {
                Some(s) => step = s,
                None => break,
            }
        }
        added
    }

    /// Removes and returns the jobs due at `t`, ascending.
    pub fn drain(&mut self, t: u64) -> Vec<J> {
        let jobs: Vec<J> = self.list.remove(&t).unwrap_or_default().into_iter().collect();
        for j in &jobs {
            if let Some(set) = self.per_job.get_mut(j) {
                set.remove(&t);
                if set.is_empty() {
                    self.per_job.remove(j);
                }
            }
        }
        jobs
    }

    /// Pending times of `job`, ascending.
    pub fn due(&self, job: J) -> impl Iterator<Item = u64> + '_ {
        self.per_job.get(&job).into_iter().flatten().copied()
    }

    pub fn pending_at(&self, t: u64) -> usize {
        self.list.get(&t).map_or(0, BTreeSet::len)
    }

    pub fn log(&self) -> &[ScheduleEntry<J>] {
        &self.log
    }

    /// Drops every pending time of `job`.
    pub fn forget(&mut self, job: J) {
        if let Some(times) = self.per_job.remove(&job) {
            for t in times {
                if let Some(set) = self.list.get_mut(&t) {
                    set.remove(&job);
                    if set.is_empty() {
                        self.list.remove(&t);
                    }
                }
            }
        }
    }
}

/// Steps `s < t` at which a resample could still explain the outcome at
/// `t`: no entry in `(s, t)` was already scheduled at step `s`.
///
/// `events` are the resample steps of one job, `entries` that job's
/// schedule insertions as `(time, created)` pairs.
pub fn relevant_times(events: &[u64], entries: &[(u64, u64)], t: u64) -> Vec<u64> {
    let mut by_creation: Vec<(u64, u64)> = entries.iter().map(|&(time, c)| (c, time)).collect();
    by_creation.sort_unstable();
    let mut events: Vec<u64> = events.iter().copied().filter(|&s| s < t).collect();
    events.sort_unstable();
    let mut known: BTreeSet<u64> = BTreeSet::new();
    let mut next = 0;
    let mut out = Vec::new();
    for s in events {
        while next < by_creation.len() && by_creation[next].0 <= s {
            known.insert(by_creation[next].1);
            next += 1;
        }
        if known.range(s + 1..t).next().is_none() {
            out.push(s);
        }
    }
    out
}

/// Outcome of one machine deletion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepReport {
    /// Clock value after the step.
    pub step: u64,
    pub touched: Vec<JobId>,
    pub resamples: u64,
    pub scheduled: u64,
}

/// Read-only view for adversaries choosing which machine to delete.
pub trait MachineView {
    fn live_machines(&self) -> Vec<MachineId>;
    fn load(&self, x: MachineId) -> Option<u64>;
    /// Live machine with the largest load, smallest id on ties.
    fn max_load_machine(&self) -> Option<MachineId>;
}

#[derive(Debug, Clone)]
pub struct JobMachine {
    instance: HyperInstance,
    live_routine: Vec<bool>,
    job_routines: Vec<IndexSet<RoutineId>>,
    machine_routines: Vec<BTreeSet<RoutineId>>,
    machine_live: Vec<bool>,
    live_machines: BTreeSet<MachineId>,
    assigned: Vec<Option<RoutineId>>,
    load: Vec<u64>,
    load_index: BTreeSet<(u64, Reverse<MachineId>)>,
    schedule: Schedule<JobId>,
    clock: u64,
    rng: ChaCha8Rng,
    events: Vec<Vec<u64>>,
    resample_calls: u64,
    reassignments: u64,
    last_resamples: u64,
    ops: OpCounter,
}

impl JobMachine {
    /// Assigns every job a uniformly random routine at step 0.
    pub fn init(instance: HyperInstance, horizon: u64, seed: u64) -> Self {
        let mut job_routines = vec![IndexSet::new(); instance.jobs()];
        let mut machine_routines = vec![BTreeSet::new(); instance.machines()];
        for (id, r) in instance.routines().iter().enumerate() {
            job_routines[r.job].insert(id);
            for &x in &r.machines {
                machine_routines[x].insert(id);
            }
        }
        let machines = instance.machines();
        let jobs = instance.jobs();
        let mut jm = Self {
            live_routine: vec![true; instance.routines().len()],
            job_routines,
            machine_routines,
            machine_live: vec![true; machines],
            live_machines: (0..machines).collect(),
            assigned: vec![None; jobs],
            load: vec![0; machines],
            load_index: (0..machines).map(|x| (0, Reverse(x))).collect(),
            schedule: Schedule::new(horizon, true),
            clock: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            events: vec![Vec::new(); jobs],
            resample_calls: 0,
            reassignments: 0,
            last_resamples: 0,
            ops: OpCounter::new(),
            instance,
        };
        for u in 0..jobs {
            jm.resample_inner(u);
        }
        jm.last_resamples = jm.resample_calls;
        jm.ops.end_step();
        jm
    }

    fn set_load(&mut self, x: MachineId, load: u64) {
        if self.machine_live[x] {
            self.load_index.remove(&(self.load[x], Reverse(x)));
            self.load_index.insert((load, Reverse(x)));
            self.ops.charge(Module::JobMachine, 2);
        }
        self.load[x] = load;
    }

    fn unassign(&mut self, u: JobId) {
        if let Some(r) = self.assigned[u].take() {
            let ms = self.instance.routines[r].machines.clone();
            for x in ms {
                self.set_load(x, self.load[x] - 1);
            }
        }
    }

    fn resample_inner(&mut self, u: JobId) -> Option<RoutineId> {
        self.unassign(u);
        self.resample_calls += 1;
        self.events[u].push(self.clock);
        let live = &self.job_routines[u];
        self.ops.charge(Module::JobMachine, 1);
        if live.is_empty() {
            return None;
        }
        let r = live[self.rng.gen_range(0..live.len())];
        self.assigned[u] = Some(r);
        self.reassignments += 1;
        let ms = self.instance.routines[r].machines.clone();
        for x in ms {
            self.set_load(x, self.load[x] + 1);
        }
        Some(r)
    }

    /// Reassigns `u` to a uniformly random live routine.
    pub fn jm_resample(&mut self, u: JobId) -> Result<Option<RoutineId>, JmError> {
        if u >= self.instance.jobs() {
            return Err(JmError::UnknownJob(u));
        }
        Ok(self.resample_inner(u))
    }

    /// Deletes machine `x`, schedules touched jobs, advances the clock and
    /// resamples the jobs due at the new time.
    pub fn jm_delete_machine(&mut self, x: MachineId) -> Result<StepReport, JmError> {
        if x >= self.machine_live.len() || !self.machine_live[x] {
            return Err(JmError::MachineMissing(x));
        }
        if self.clock >= self.schedule.horizon() {
            return Err(JmError::HorizonExhausted(self.schedule.horizon()));
        }
        self.load_index.remove(&(self.load[x], Reverse(x)));
        self.live_machines.remove(&x);
        self.machine_live[x] = false;
        let dead: Vec<RoutineId> = std::mem::take(&mut self.machine_routines[x])
            .into_iter()
            .collect();
        self.ops.charge(Module::JobMachine, 3 + dead.len() as u64);

        let mut report = StepReport::default();
        for r in dead {
            self.live_routine[r] = false;
            let routine = self.instance.routines[r].clone();
            self.job_routines[routine.job].swap_remove(&r);
            for &y in &routine.machines {
                if y != x {
                    self.machine_routines[y].remove(&r);
                }
            }
            self.ops.charge(Module::JobMachine, routine.machines.len() as u64);
            if self.assigned[routine.job] == Some(r) {
                self.unassign(routine.job);
                report.touched.push(routine.job);
                report.scheduled += self.schedule.touch(routine.job, self.clock) as u64;
            }
        }
        self.clock += 1;
        let due = self.schedule.drain(self.clock);
        self.ops.charge(Module::JobMachine, 1 + due.len() as u64);
        for &u in &due {
            self.resample_inner(u);
        }
        report.step = self.clock;
        report.resamples = due.len() as u64;
        report.touched.sort_unstable();
        self.last_resamples = report.resamples;
        self.ops.end_step();
        Ok(report)
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn instance(&self) -> &HyperInstance {
        &self.instance
    }

    pub fn assigned(&self, u: JobId) -> Option<RoutineId> {
        self.assigned[u]
    }

    pub fn live_routines(&self, u: JobId) -> &IndexSet<RoutineId> {
        &self.job_routines[u]
    }

    pub fn is_machine_live(&self, x: MachineId) -> bool {
        self.machine_live.get(x).copied().unwrap_or(false)
    }

    pub fn jm_load(&self, x: MachineId) -> Result<u64, JmError> {
        if !self.is_machine_live(x) {
            return Err(JmError::MachineMissing(x));
        }
        Ok(self.load[x])
    }

    /// `sum over live routines r at x of 1 / (live routines of job(r))`.
    pub fn jm_target(&self, x: MachineId) -> Result<f64, JmError> {
        if !self.is_machine_live(x) {
            return Err(JmError::MachineMissing(x));
        }
        Ok(self.machine_routines[x]
            .iter()
            .map(|&r| 1.0 / self.job_routines[self.instance.routines[r].job].len() as f64)
            .sum())
    }

    /// Load and target of every live machine at the current step.
    pub fn sample_loads(&self) -> Vec<LoadSample> {
        self.live_machines
            .iter()
            .map(|&x| LoadSample {
                step: self.clock,
                machine: x,
                load: self.load[x],
                target: self.jm_target(x).expect("live machine"),
            })
            .collect()
    }

    pub fn max_load(&self) -> u64 {
        self.load_index.last().map_or(0, |&(l, _)| l)
    }

    pub fn total_resamples(&self) -> u64 {
        self.resample_calls
    }

    /// Resample calls that found a live routine.
    pub fn reassignments(&self) -> u64 {
        self.reassignments
    }

    pub fn last_resamples(&self) -> u64 {
        self.last_resamples
    }

    pub fn ops(&self) -> &OpCounter {
        &self.ops
    }

    pub fn schedule(&self) -> &Schedule<JobId> {
        &self.schedule
    }

    /// Resample steps of job `u`, including the initial one at step 0.
    pub fn resample_events(&self, u: JobId) -> &[u64] {
        &self.events[u]
    }

    /// Steps whose resample of `job(r)` could still explain `r` at `t`.
    pub fn jm_relevant_times(&self, t: u64, r: RoutineId) -> Result<Vec<u64>, JmError> {
        let routine = self
            .instance
            .routines
            .get(r)
            .ok_or(JmError::UnknownRoutine(r))?;
        let entries: Vec<(u64, u64)> = self
            .schedule
            .log()
            .iter()
            .filter(|e| e.job == routine.job)
            .map(|e| (e.time, e.created))
            .collect();
        Ok(relevant_times(&self.events[routine.job], &entries, t))
    }

    pub fn jm_rel_count(&self, t: u64, r: RoutineId) -> Result<usize, JmError> {
        self.jm_relevant_times(t, r).map(|v| v.len())
    }

    /// Schedule entries grouped by job, for replaying many relevance
    /// queries without rescanning the log.
    pub fn entries_by_job(&self) -> Vec<Vec<(u64, u64)>> {
        let mut out = vec![Vec::new(); self.instance.jobs()];
        for e in self.schedule.log() {
            out[e.job].push((e.time, e.created));
        }
        out
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        let mut load = vec![0u64; self.instance.machines()];
        for u in 0..self.instance.jobs() {
            match self.assigned[u] {
                None if !self.job_routines[u].is_empty() => {
                    if self.schedule.due(u).next().is_none() {
                        return Err(format!("job {u} has routines but none assigned"));
                    }
                    // Touched jobs are repaired at the next step.
                }
                Some(r) => {
                    if !self.live_routine[r] || self.instance.routines[r].job != u {
                        return Err(format!("job {u} assigned dead or foreign routine {r}"));
                    }
                    for &x in &self.instance.routines[r].machines {
                        load[x] += 1;
                    }
                }
                None => {}
            }
        }
        for x in 0..load.len() {
            if self.machine_live[x] && load[x] != self.load[x] {
                return Err(format!("load of machine {x} is {} not {}", self.load[x], load[x]));
            }
        }
        let indexed: BTreeSet<(u64, Reverse<MachineId>)> = self
            .live_machines
            .iter()
            .map(|&x| (self.load[x], Reverse(x)))
            .collect();
        if indexed != self.load_index {
            return Err("load index out of date".into());
        }
        Ok(())
    }

    /// Shuffled copy of the live machines, for oblivious adversaries.
    pub fn shuffled_machines(&self, seed: u64) -> Vec<MachineId> {
        let mut v: Vec<MachineId> = self.live_machines.iter().copied().collect();
        v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        v
    }
}

impl MachineView for JobMachine {
    fn live_machines(&self) -> Vec<MachineId> {
        self.live_machines.iter().copied().collect()
    }

    fn load(&self, x: MachineId) -> Option<u64> {
        self.is_machine_live(x).then(|| self.load[x])
    }

    fn max_load_machine(&self) -> Option<MachineId> {
        self.load_index.last().map(|&(_, Reverse(x))| x)
    }
}
