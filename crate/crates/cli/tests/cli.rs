use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn dynspan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynspan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

/// Deletes every edge of the complete graph on `n` vertices, in a fixed
/// scrambled order.
fn complete_deletion_stream(n: usize) -> (String, String) {
    let mut init = format!("N {n}\n");
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            init.push_str(&format!("{u} {v}\n"));
            edges.push((u, v));
        }
    }
    let len = edges.len();
    let mut stream = format!("N {n}\n");
    for i in 0..len {
        let (u, v) = edges[(i * 37) % len];
        stream.push_str(&format!("- {u} {v}\n"));
    }
    (init, stream)
}

#[test]
fn greedy_replay_with_exact_checks() {
    let dir = TempDir::new().unwrap();
    // 30 vertices, 37 is coprime to 435 so the order is a permutation.
    let (init, stream) = complete_deletion_stream(30);
    let init = write(dir.path(), "init.txt", &init);
    let del = write(dir.path(), "del.txt", &stream);
    let csv = dir.path().join("out.csv");
    let out = dynspan(&[
        "run", "--algo", "greedy", "--k", "2", "--init", &init,
        "--adversary", &format!("replay:{del}"), "--check", "exact",
        "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,event,recourse_add,recourse_del,spanner_size,op_count,resamples,stretch_ok"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 435);
    assert!(rows.iter().all(|r| r.ends_with(",1")));
    let meta = fs::read_to_string(format!("{}.meta.json", csv.display())).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&meta).unwrap();
    assert_eq!(meta["steps_run"], 435);
    assert_eq!(meta["final_edges"], 0);
    // Every addition is an edge of the initial graph, each added at most once.
    assert!(meta["total_recourse_add"].as_u64().unwrap() <= 435);
}

#[test]
fn det3_random_sampled_smoke() {
    let out = dynspan(&[
        "run", "--algo", "det3", "--n", "144", "--steps", "10000",
        "--adversary", "random", "--check", "sampled", "--init-m", "1200",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 10001);
}

#[test]
fn malformed_stream_reports_line() {
    let dir = TempDir::new().unwrap();
    let s = write(dir.path(), "s.txt", "N 5\n+ 0 1\n\n+ 1 x\n");
    let out = dynspan(&["run", "--algo", "det3", "--adversary", &format!("replay:{s}")]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
}

#[test]
fn verify_outcomes() {
    let dir = TempDir::new().unwrap();
    let good = write(dir.path(), "good.txt", "N 6\n+ 0 1\n+ 1 2\n+ 0 2\n+ 3 4\n- 0 1\n+ 2 5\n- 1 2\n");
    for algo in ["det3", "resample3", "fd-greedy"] {
        let out = dynspan(&["verify", "--stream", &good, "--algo", algo]);
        assert_eq!(code(&out), 0, "{algo}: {}", stderr(&out));
    }
    let missing = write(dir.path(), "missing.txt", "N 6\n+ 0 1\n- 2 3\n");
    let out = dynspan(&["verify", "--stream", &missing, "--algo", "det3"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let out = dynspan(&["verify", "--stream", &good, "--algo", "det3", "--inject-fault", "skip-repair"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("check failed at step 1: edge (0,1)"), "{}", stderr(&out));
}

#[test]
fn bench_tables() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("bench.csv");
    let out = dynspan(&[
        "bench", "--algos", "det3,resample3", "--n", "49", "--init-m", "300",
        "--steps", "300", "--seed", "4", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("det3"));
    assert!(rows[1].starts_with("resample3"));
    let text = fs::read_to_string(&csv).unwrap();
    let csv_rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(csv_rows.len(), 2);
    for (row, csv_row) in rows.iter().zip(&csv_rows) {
        let cells: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(&cells, csv_row);
    }

    let out = dynspan(&["bench", "--steps", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);
}

#[test]
fn identical_arguments_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = dynspan(&[
            "run", "--algo", "resample3", "--n", "36", "--init-m", "200", "--steps", "400",
            "--adversary", "witness-hammer", "--p-insert", "0.3", "--phase-len", "150",
            "--seed", "17", "--out", p.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        fs::read(&p).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn argument_errors_exit_3() {
    assert_eq!(code(&dynspan(&["run"])), 3);
    assert_eq!(code(&dynspan(&["run", "--algo", "det3", "--k", "3"])), 3);
    assert_eq!(code(&dynspan(&["run", "--algo", "det3", "--adversary", "max-load"])), 3);
    assert_eq!(code(&dynspan(&["run", "--algo", "det3", "--adversary", "sideways"])), 3);
    assert_eq!(code(&dynspan(&["run", "--algo", "det3", "--n", "5", "--init-m", "11"])), 3);
    assert_eq!(code(&dynspan(&["--help"])), 0);
}
