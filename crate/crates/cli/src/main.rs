//! `dynspan`: run, verify and benchmark dynamic spanners from the shell.
//!
//! Exit codes: 0 on success, 2 when a stretch or invariant check fails,
//! 3 for bad arguments or malformed input.

mod args;
mod driver;
mod error;

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use dynspan::adversary::Adversary;
use dynspan::instrumentation::{percentile, write_metrics_csv, MetricsRow};
use serde::Serialize;

use args::{AdversaryArg, Algo, BenchArgs, CheckArg, Cli, Command, RunArgs, VerifyArgs};
use driver::{CheckPolicy, Outcome, RunMeta, Subject};
use error::CliError;

const DEFAULT_STEPS: u64 = 1000;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Bench(args) => cmd_bench(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Resolves `n` and the step count, taking both from the stream for replay.
fn resolve_run(args: &RunArgs) -> Result<(usize, u64, Adversary), CliError> {
    let seed = args.algo_args.seed;
    let adv = driver::make_adversary(&args.adversary, args.algo, args.graph.p_insert, seed)?;
    let (n, default_steps) = match &args.adversary {
        AdversaryArg::Replay(path) => {
            let stream = driver::load_stream(path)?;
            (stream.n, stream.events.len() as u64)
        }
        _ => (args.graph.n, DEFAULT_STEPS),
    };
    Ok((n, args.steps.unwrap_or(default_steps), adv))
}

fn build_subject(
    algo: Algo,
    args: &args::AlgoArgs,
    graph: &args::GraphArgs,
    n: usize,
    steps: u64,
) -> Result<(Subject, usize), CliError> {
    if algo == Algo::Jm {
        return Ok((Subject::Jobs(Box::new(driver::build_jobs(n, steps, args.seed)?)), 0));
    }
    let g = driver::initial_graph(graph, n, args.seed)?;
    let m = g.m();
    Ok((Subject::Graph(driver::build_spanner(algo, args, g)?), m))
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let (n, steps, mut adv) = resolve_run(args)?;
    let (mut subject, initial_edges) =
        build_subject(args.algo, &args.algo_args, &args.graph, n, steps)?;
    let policy = CheckPolicy {
        mode: args.check,
        sample_count: args.sample_count,
        seed: args.algo_args.seed,
    };
    let Outcome {
        rows,
        stopped_early,
        failure,
    } = driver::run_loop(&mut subject, &mut adv, steps, policy)?;

    let (final_edges, final_size) = driver::subject_size(&subject);
    let meta = RunMeta {
        algo: args.algo.name(),
        n,
        k: args.algo_args.k,
        seed: args.algo_args.seed,
        adversary: args.adversary.label(),
        p_insert: args.graph.p_insert,
        phase_len: (args.algo == Algo::Resample3).then(|| driver::phase_len(&args.algo_args, n)),
        deamortize: args.algo_args.deamortize,
        check: match args.check {
            CheckArg::None => "none",
            CheckArg::Sampled => "sampled",
            CheckArg::Exact => "exact",
        },
        steps_requested: steps,
        steps_run: rows.len() as u64,
        stopped_early,
        initial_edges,
        final_edges,
        final_size,
        total_recourse_add: rows.iter().map(|r| r.recourse_add).sum(),
        total_recourse_del: rows.iter().map(|r| r.recourse_del).sum(),
        max_op_count: rows.iter().map(|r| r.op_count).max().unwrap_or(0),
        total_resamples: driver::total_resamples(&subject, &rows),
    };
    match &args.out {
        Some(path) => {
            write_metrics_csv(create(path)?, &rows)?;
            let meta_file = meta_path(path);
            let mut f = create(&meta_file)?;
            serde_json::to_writer_pretty(&mut f, &meta)?;
            writeln!(f).map_err(|source| CliError::Io {
                path: meta_file,
                source,
            })?;
        }
        None => write_metrics_csv(io::stdout().lock(), &rows)?,
    }
    match failure {
        Some(err) => Err(err),
        None => Ok(()),
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    if args.algo == Algo::Jm {
        return Err(CliError::BadArgs("verify replays graph streams; jm has none".into()));
    }
    let stream = driver::load_stream(&args.stream)?;
    let n = stream.n;
    let steps = stream.events.len() as u64;
    let g = match &args.init {
        Some(path) => {
            let g = driver::load_graph(path)?;
            if g.n() != n {
                return Err(CliError::BadArgs(format!(
                    "initial graph has n = {} but the stream has n = {n}",
                    g.n()
                )));
            }
            g
        }
        None => dynspan::DynamicGraph::empty(n),
    };
    let mut subject = Subject::Graph(driver::build_spanner(args.algo, &args.algo_args, g)?);
    let mut adv = Adversary::replay(stream);
    let policy = CheckPolicy {
        mode: CheckArg::Exact,
        sample_count: 0,
        seed: args.algo_args.seed,
    };
    let outcome = driver::run_loop(&mut subject, &mut adv, steps, policy)?;
    if let Some(err) = outcome.failure {
        return Err(err);
    }
    println!("ok: {} updates verified", outcome.rows.len());
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct BenchRow {
    algo: &'static str,
    updates: u64,
    ops_p50: u64,
    ops_p95: u64,
    ops_max: u64,
    recourse_mean: String,
    recourse_max: u64,
    resamples_max: u64,
}

fn bench_row(algo: Algo, rows: &[MetricsRow]) -> BenchRow {
    let ops: Vec<u64> = rows.iter().map(|r| r.op_count).collect();
    let recourse: Vec<u64> = rows.iter().map(|r| r.recourse_add + r.recourse_del).collect();
    let mean = recourse.iter().sum::<u64>() as f64 / rows.len() as f64;
    BenchRow {
        algo: algo.name(),
        updates: rows.len() as u64,
        ops_p50: percentile(&ops, 0.5),
        ops_p95: percentile(&ops, 0.95),
        ops_max: ops.iter().copied().max().unwrap_or(0),
        recourse_mean: format!("{mean:.3}"),
        recourse_max: recourse.iter().copied().max().unwrap_or(0),
        resamples_max: rows.iter().map(|r| r.resamples).max().unwrap_or(0),
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let mut table = Vec::new();
    for &algo in &args.algos {
        let run = RunArgs {
            algo,
            algo_args: args.algo_args.clone(),
            graph: args.graph.clone(),
            steps: Some(args.steps),
            adversary: args.adversary.clone(),
            check: CheckArg::None,
            sample_count: 0,
            out: None,
        };
        let (n, steps, mut adv) = resolve_run(&run)?;
        let (mut subject, _) = build_subject(algo, &run.algo_args, &run.graph, n, steps)?;
        let policy = CheckPolicy {
            mode: CheckArg::None,
            sample_count: 0,
            seed: run.algo_args.seed,
        };
        let outcome = driver::run_loop(&mut subject, &mut adv, steps, policy)?;
        if !outcome.rows.is_empty() {
            table.push(bench_row(algo, &outcome.rows));
        }
    }
    let mut stdout = io::stdout().lock();
    let _ = writeln!(
        stdout,
        "{:<10} {:>8} {:>8} {:>8} {:>8} {:>13} {:>12} {:>13}",
        "algo", "updates", "ops_p50", "ops_p95", "ops_max", "recourse_mean", "recourse_max", "resamples_max"
    );
    for r in &table {
        let _ = writeln!(
            stdout,
            "{:<10} {:>8} {:>8} {:>8} {:>8} {:>13} {:>12} {:>13}",
            r.algo, r.updates, r.ops_p50, r.ops_p95, r.ops_max, r.recourse_mean, r.recourse_max, r.resamples_max
        );
    }
    if let Some(path) = &args.out {
        let mut w = csv::Writer::from_writer(create(path)?);
        if table.is_empty() {
            w.write_record([
                "algo",
                "updates",
                "ops_p50",
                "ops_p95",
                "ops_max",
                "recourse_mean",
                "recourse_max",
                "resamples_max",
            ])?;
        }
        for r in &table {
            w.serialize(r)?;
        }
        w.flush().map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(())
}
