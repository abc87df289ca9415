//! Update-stream generators, including adaptive ones.
//!
//! An adaptive strategy looks at the algorithm's current output through
//! [`SpannerView`] or [`MachineView`] before choosing its next update. It
//! never sees the algorithm's random state. Every strategy is driven by its
//! own seeded RNG, so a run is reproducible from its seeds.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{parse_header, parse_num, DynamicGraph, EdgeKey, ParseError, UpdateEvent, UpdateKind};
use crate::job_machine::{MachineId, MachineView};
use crate::spanner::SpannerView;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("no legal update remains")]
    Exhausted,
    #[error("strategy {strategy} cannot drive {what}")]
    NotApplicable {
        strategy: &'static str,
        what: &'static str,
    },
    #[error("stream line {line}: illegal update `{event}`: {reason}")]
    IllegalUpdate {
        line: usize,
        event: String,
        reason: String,
    },
    #[error("stream is for n = {stream} but the graph has n = {graph}")]
    SizeMismatch { stream: usize, graph: usize },
    #[error("{m} edges requested but a simple graph has at most {max}")]
    TooManyEdges { m: usize, max: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A parsed update stream: header `N <n>`, then `+ u v` / `- u v` lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateStream {
    pub n: usize,
    /// Events with the source line each came from.
    pub events: Vec<(usize, UpdateEvent)>,
}

impl UpdateStream {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| ParseError::new(1, "missing `N <n>` header"))?;
        let n = parse_header(hline, header)?;
        let mut events = Vec::new();
        for (line, text) in lines {
            let mut it = text.split_whitespace();
            let (kind, u, v) = match (it.next(), it.next(), it.next(), it.next()) {
                (Some(s), Some(a), Some(b), None) => {
                    let kind = match s {
                        "+" => UpdateKind::Insert,
                        "-" => UpdateKind::Delete,
                        other => {
                            return Err(ParseError::new(
                                line,
                                format!("expected `+` or `-`, found `{other}`"),
                            ))
                        }
                    };
                    (kind, parse_num(line, a)?, parse_num(line, b)?)
                }
                _ => return Err(ParseError::new(line, "expected `+ <u> <v>` or `- <u> <v>`")),
            };
            let e = EdgeKey::new(u, v).map_err(|err| ParseError::new(line, err.to_string()))?;
            if e.hi() >= n {
                return Err(ParseError::new(line, format!("vertex {} out of range (n = {n})", e.hi())));
            }
            let seq = events.len() as u64;
            let ev = match kind {
                UpdateKind::Insert => UpdateEvent::insert(seq, e),
                UpdateKind::Delete => UpdateEvent::delete(seq, e),
            };
            events.push((line, ev));
        }
        Ok(Self { n, events })
    }

    /// Writes the stream back in the text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("N {}\n", self.n);
        for (_, ev) in &self.events {
            out.push_str(&format!("{ev}\n"));
        }
        out
    }

    /// Stream that deletes every edge of `g`, in the order given.
    pub fn deletions(n: usize, order: &[EdgeKey]) -> Self {
        let events = order
            .iter()
            .enumerate()
            .map(|(i, &e)| (i + 2, UpdateEvent::delete(i as u64, e)))
            .collect();
        Self { n, events }
    }
}

/// Uniform random graph with exactly `m` edges.
pub fn random_graph(n: usize, m: usize, seed: u64) -> Result<DynamicGraph, AdversaryError> {
    let max = n * n.saturating_sub(1) / 2;
    if m > max {
        return Err(AdversaryError::TooManyEdges { m, max });
    }
    let mut g = DynamicGraph::empty(n);
    let mut adv = Adversary::random(1.0, seed);
    while g.m() < m {
        let e = adv.random_non_edge(&g).expect("room for another edge");
        g.insert_edge(e).expect("sampled a missing edge");
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    RandomOblivious,
    SpannerTargeting,
    WitnessHammer,
    MaxLoadMachine,
    Replay,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::RandomOblivious => "random",
            StrategyKind::SpannerTargeting => "spanner-target",
            StrategyKind::WitnessHammer => "witness-hammer",
            StrategyKind::MaxLoadMachine => "max-load",
            StrategyKind::Replay => "replay",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Seeded update generator.
///
/// The adaptive graph strategies mix in uniformly random insertions with
/// probability `p_insert`; with `p_insert = 0` they only delete.
#[derive(Debug, Clone)]
pub struct Adversary {
    kind: StrategyKind,
    p_insert: f64,
    rng: ChaCha8Rng,
    budget: Option<u64>,
    emitted: u64,
    stream: Option<UpdateStream>,
    cursor: usize,
}

impl Adversary {
    fn with_kind(kind: StrategyKind, p_insert: f64, seed: u64) -> Self {
        Self {
            kind,
            p_insert: p_insert.clamp(0.0, 1.0),
            rng: ChaCha8Rng::seed_from_u64(seed),
            budget: None,
            emitted: 0,
            stream: None,
            cursor: 0,
        }
    }

    pub fn random(p_insert: f64, seed: u64) -> Self {
        Self::with_kind(StrategyKind::RandomOblivious, p_insert, seed)
    }

    pub fn spanner_targeting(p_insert: f64, seed: u64) -> Self {
        Self::with_kind(StrategyKind::SpannerTargeting, p_insert, seed)
    }

    pub fn witness_hammer(p_insert: f64, seed: u64) -> Self {
        Self::with_kind(StrategyKind::WitnessHammer, p_insert, seed)
    }

    pub fn max_load(seed: u64) -> Self {
        Self::with_kind(StrategyKind::MaxLoadMachine, 0.0, seed)
    }

    pub fn replay(stream: UpdateStream) -> Self {
        let mut a = Self::with_kind(StrategyKind::Replay, 0.0, 0);
        a.stream = Some(stream);
        a
    }

    /// Stops after `budget` emitted updates.
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    fn spend(&mut self) -> Result<(), AdversaryError> {
        if self.budget.is_some_and(|b| self.emitted >= b) {
            return Err(AdversaryError::Exhausted);
        }
        Ok(())
    }

    fn random_edge(&mut self, g: &DynamicGraph) -> Option<EdgeKey> {
        if g.m() == 0 {
            return None;
        }
        g.edges().nth(self.rng.gen_range(0..g.m()))
    }

    fn random_non_edge(&mut self, g: &DynamicGraph) -> Option<EdgeKey> {
        let n = g.n();
        let free = n * n.saturating_sub(1) / 2 - g.m();
        if free == 0 {
            return None;
        }
        for _ in 0..32 {
            let u = self.rng.gen_range(0..n);
            let v = self.rng.gen_range(0..n);
            if u != v && !g.contains(u, v) {
                return Some(EdgeKey::of(u, v));
            }
        }
        // Dense graph: pick the k-th missing pair directly.
        let mut k = self.rng.gen_range(0..free);
        for u in 0..n {
            let missing = n - 1 - u - g.neighbors(u).range(u + 1..).count();
            if k < missing {
                return (u + 1..n)
                    .filter(|&v| !g.contains(u, v))
                    .nth(k)
                    .map(|v| EdgeKey::of(u, v));
            }
            k -= missing;
        }
        None
    }

    fn insert_or(&mut self, g: &DynamicGraph, delete: Option<EdgeKey>) -> Option<UpdateEvent> {
        let seq = self.emitted;
        let want_insert = self.p_insert > 0.0 && self.rng.gen_bool(self.p_insert);
        if want_insert || (delete.is_none() && self.p_insert > 0.0) {
            if let Some(e) = self.random_non_edge(g) {
                return Some(UpdateEvent::insert(seq, e));
            }
        }
        delete.map(|e| UpdateEvent::delete(seq, e))
    }

    /// Next update for a graph algorithm.
    pub fn adv_next(&mut self, view: &dyn SpannerView) -> Result<UpdateEvent, AdversaryError> {
        self.spend()?;
        let g = view.graph();
        let ev = match self.kind {
            StrategyKind::Replay => return self.next_replayed(g),
            StrategyKind::MaxLoadMachine => {
                return Err(AdversaryError::NotApplicable {
                    strategy: self.kind.name(),
                    what: "graph updates",
                })
            }
            StrategyKind::RandomOblivious => {
                let insert = self.rng.gen_bool(self.p_insert);
                let seq = self.emitted;
                let first = if insert {
                    self.random_non_edge(g).map(|e| UpdateEvent::insert(seq, e))
                } else {
                    self.random_edge(g).map(|e| UpdateEvent::delete(seq, e))
                };
                match first {
                    Some(ev) => Some(ev),
                    None if insert => self.random_edge(g).map(|e| UpdateEvent::delete(seq, e)),
                    None if self.p_insert > 0.0 => {
                        self.random_non_edge(g).map(|e| UpdateEvent::insert(seq, e))
                    }
                    None => None,
                }
            }
            StrategyKind::SpannerTargeting => {
                let target = self.target_spanner_edge(view);
                self.insert_or(g, target)
            }
            StrategyKind::WitnessHammer => {
                let target = match view.max_load_edge() {
                    Some((e, load)) if load > 0 => Some(e),
                    Some(_) => self.random_edge(g),
                    None => self.target_spanner_edge(view),
                };
                self.insert_or(g, target)
            }
        };
        let ev = ev.ok_or(AdversaryError::Exhausted)?;
        self.emitted += 1;
        Ok(ev)
    }

    fn target_spanner_edge(&mut self, view: &dyn SpannerView) -> Option<EdgeKey> {
        let g = view.graph();
        let h: Vec<EdgeKey> = view
            .spanner_edges()
            .into_iter()
            .filter(|&e| g.has_edge(e))
            .collect();
        if h.is_empty() {
            self.random_edge(g)
        } else {
            Some(h[self.rng.gen_range(0..h.len())])
        }
    }

    fn next_replayed(&mut self, g: &DynamicGraph) -> Result<UpdateEvent, AdversaryError> {
        let stream = self.stream.as_ref().expect("replay adversary without a stream");
        if stream.n != g.n() {
            return Err(AdversaryError::SizeMismatch {
                stream: stream.n,
                graph: g.n(),
            });
        }
        let Some(&(line, ev)) = stream.events.get(self.cursor) else {
            return Err(AdversaryError::Exhausted);
        };
        let legal = match ev.kind {
            UpdateKind::Insert => !g.has_edge(ev.edge),
            UpdateKind::Delete => g.has_edge(ev.edge),
        };
        if !legal {
            let reason = match ev.kind {
                UpdateKind::Insert => "edge already present",
                UpdateKind::Delete => "edge not present",
            };
            return Err(AdversaryError::IllegalUpdate {
                line,
                event: ev.to_string(),
                reason: reason.into(),
            });
        }
        self.cursor += 1;
        self.emitted += 1;
        Ok(ev)
    }

    /// Next machine to delete in a job-machine run.
    pub fn adv_next_machine(&mut self, view: &dyn MachineView) -> Result<MachineId, AdversaryError> {
        self.spend()?;
        let x = match self.kind {
            StrategyKind::MaxLoadMachine | StrategyKind::WitnessHammer => view.max_load_machine(),
            StrategyKind::RandomOblivious => {
                let live = view.live_machines();
                (!live.is_empty()).then(|| live[self.rng.gen_range(0..live.len())])
            }
            other => {
                return Err(AdversaryError::NotApplicable {
                    strategy: other.name(),
                    what: "machine deletions",
                })
            }
        };
        let x = x.ok_or(AdversaryError::Exhausted)?;
        self.emitted += 1;
        Ok(x)
    }
}
