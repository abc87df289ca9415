//! Command-line arguments.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "dynspan", version, about = "Run, verify and benchmark dynamic graph spanners")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an algorithm against an adversary and write per-step metrics.
    Run(RunArgs),
    /// Replay a stream file with exact stretch checks after every update.
    Verify(VerifyArgs),
    /// Summarize operation counts and recourse per algorithm.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Greedy,
    FdGreedy,
    Det3,
    Resample3,
    Jm,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Greedy => "greedy",
            Algo::FdGreedy => "fd-greedy",
            Algo::Det3 => "det3",
            Algo::Resample3 => "resample3",
            Algo::Jm => "jm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckArg {
    None,
    Sampled,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Skip one repair step in the deterministic 3-spanner.
    SkipRepair,
}

/// `random`, `spanner-target`, `witness-hammer`, `max-load` or
/// `replay:<file>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdversaryArg {
    Random,
    SpannerTarget,
    WitnessHammer,
    MaxLoad,
    Replay(PathBuf),
}

impl AdversaryArg {
    pub fn label(&self) -> String {
        match self {
            AdversaryArg::Random => "random".into(),
            AdversaryArg::SpannerTarget => "spanner-target".into(),
            AdversaryArg::WitnessHammer => "witness-hammer".into(),
            AdversaryArg::MaxLoad => "max-load".into(),
            AdversaryArg::Replay(p) => format!("replay:{}", p.display()),
        }
    }
}

impl FromStr for AdversaryArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(path) = s.strip_prefix("replay:") {
            if path.is_empty() {
                return Err("replay needs a file: replay:<file>".into());
            }
            return Ok(AdversaryArg::Replay(PathBuf::from(path)));
        }
        match s {
            "random" => Ok(AdversaryArg::Random),
            "spanner-target" => Ok(AdversaryArg::SpannerTarget),
            "witness-hammer" => Ok(AdversaryArg::WitnessHammer),
            "max-load" => Ok(AdversaryArg::MaxLoad),
            other => Err(format!(
                "unknown adversary `{other}` (expected random, spanner-target, \
                 witness-hammer, max-load or replay:<file>)"
            )),
        }
    }
}

/// Algorithm parameters shared by all subcommands.
#[derive(Debug, Clone, Args)]
pub struct AlgoArgs {
    /// Stretch parameter: greedy spanners have stretch 2k-1.
    #[arg(long, default_value_t = 2)]
    pub k: usize,

    /// Phase length of the randomized 3-spanner [default: ceil(n^1.5)].
    #[arg(long)]
    pub phase_len: Option<u64>,

    /// Spread the randomized 3-spanner's rebuild over the previous phase.
    #[arg(long)]
    pub deamortize: bool,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Number of vertices (jobs for `jm`).
    #[arg(long, default_value_t = 100)]
    pub n: usize,

    /// Initial graph in `N <n>` / `<u> <v>` format.
    #[arg(long, conflicts_with = "init_m")]
    pub init: Option<PathBuf>,

    /// Start from a random graph with this many edges.
    #[arg(long)]
    pub init_m: Option<usize>,

    /// Probability that a generated update is an insertion.
    #[arg(long, default_value_t = 0.5)]
    pub p_insert: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,

    #[command(flatten)]
    pub algo_args: AlgoArgs,

    #[command(flatten)]
    pub graph: GraphArgs,

    /// Number of updates [default: the whole stream for replay, else 1000].
    #[arg(long)]
    pub steps: Option<u64>,

    #[arg(long, default_value = "random")]
    pub adversary: AdversaryArg,

    #[arg(long, value_enum, default_value_t = CheckArg::None)]
    pub check: CheckArg,

    /// Edges checked per step in sampled mode.
    #[arg(long, default_value_t = 64)]
    pub sample_count: usize,

    /// Metrics CSV; run metadata goes to `<out>.meta.json`. Stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub stream: PathBuf,

    #[arg(long, value_enum)]
    pub algo: Algo,

    #[command(flatten)]
    pub algo_args: AlgoArgs,

    /// Initial graph; the stream starts from the empty graph otherwise.
    #[arg(long)]
    pub init: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Comma-separated list of algorithms.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "det3,resample3")]
    pub algos: Vec<Algo>,

    #[command(flatten)]
    pub algo_args: AlgoArgs,

    #[command(flatten)]
    pub graph: GraphArgs,

    #[arg(long, default_value_t = 1000)]
    pub steps: u64,

    #[arg(long, default_value = "random")]
    pub adversary: AdversaryArg,

    /// Also write the table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
