//! End-to-end checks of the command-line interface: exit codes, file
//! formats, and the seed override.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::gnp_graph;
use ilprefine::io::{write_graph_file, write_partition};
use ilprefine::refine::bootstrap_partition;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ilprefine"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

struct Fixture {
    #[allow(dead_code)]
    dir: tempfile::TempDir,
    graph: PathBuf,
    partition: PathBuf,
}

fn fixture(k: usize) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let g = gnp_graph(11, 14, 0.3, 1);
    let p = bootstrap_partition(&g, k, 0.03, 4).unwrap();
    let graph = dir.path().join("g.graph");
    let partition = dir.path().join("g.part");
    write_graph_file(&g, &graph).unwrap();
    write_partition(p.assignment(), &partition).unwrap();
    Fixture {
        dir,
        graph,
        partition,
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn refine_succeeds_and_emits_a_record() {
    let f = fixture(2);
    let out = f.graph.with_extension("out");
    let records = f.graph.with_extension("jsonl");
    let output = run(&[
        "refine",
        path_str(&f.graph),
        path_str(&f.partition),
        "--k",
        "2",
        "--eps",
        "0.03",
        "--out",
        path_str(&out),
        "--records",
        path_str(&records),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let record: serde_json::Value = serde_json::from_str(stdout_of(&output).trim()).unwrap();
    assert_eq!(record["instance"], "g");
    assert_eq!(record["k"], 2);
    assert!(record["output_cut"].as_f64().unwrap() <= record["input_cut"].as_f64().unwrap());
    assert!(out.exists());
    assert!(records.exists());
}

#[test]
fn validation_failures_exit_with_two() {
    let f = fixture(2);
    // Partition shorter than the graph.
    let short = f.graph.with_extension("short");
    std::fs::write(&short, "0\n1\n").unwrap();
    let output = run(&["refine", path_str(&f.graph), path_str(&short), "--k", "2"]);
    assert_eq!(output.status.code(), Some(2));

    // Unbalanced input partition.
    let lopsided = f.graph.with_extension("lopsided");
    std::fs::write(&lopsided, "0\n".repeat(14)).unwrap();
    let output = run(&[
        "refine",
        path_str(&f.graph),
        path_str(&lopsided),
        "--k",
        "2",
    ]);
    assert_eq!(output.status.code(), Some(2));

    // Block id beyond k.
    let output = run(&[
        "evaluate",
        path_str(&f.graph),
        path_str(&f.partition),
        "--k",
        "1",
    ]);
    assert_eq!(output.status.code(), Some(2));

    // Malformed graph file.
    let broken = f.graph.with_extension("broken");
    std::fs::write(&broken, "not a header\n").unwrap();
    let output = run(&["evaluate", path_str(&broken), path_str(&f.partition)]);
    assert_eq!(output.status.code(), Some(2));

    // Unknown strategy spelling.
    let output = run(&[
        "refine",
        path_str(&f.graph),
        path_str(&f.partition),
        "--k",
        "2",
        "--strategy",
        "sideways:3",
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn evaluate_prints_balance_verdicts() {
    let f = fixture(2);
    let output = run(&["evaluate", path_str(&f.graph), path_str(&f.partition)]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout_of(&output);
    assert!(text.contains("instance=g"));
    assert!(text.contains("cut="));
    assert!(text.contains("eps=0.00 L_max="));
    assert!(text.contains("eps=0.05 L_max="));

    // All-zeros partition: zero cut, overloaded for every eps.
    let zeros = f.graph.with_extension("zeros");
    std::fs::write(&zeros, "0\n".repeat(14)).unwrap();
    let output = run(&["evaluate", path_str(&f.graph), path_str(&zeros)]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout_of(&output);
    assert!(text.contains("cut=0"));
    assert!(text.contains("balanced=false"));
    assert!(!text.contains("balanced=true"));
}

#[test]
fn bootstrap_writes_a_balanced_partition() {
    let f = fixture(2);
    let out = f.graph.with_extension("boot");
    let output = run(&[
        "bootstrap",
        path_str(&f.graph),
        "--k",
        "3",
        "--eps",
        "0.05",
        "--seed",
        "7",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout_of(&output);
    assert!(text.contains("eps=0.05 L_max="));
    let lines = std::fs::read_to_string(&out).unwrap();
    assert_eq!(lines.lines().count(), 14);
    // The verdict at the requested eps must be positive.
    assert!(text
        .lines()
        .any(|l| l.starts_with("eps=0.05") && l.ends_with("balanced=true")));
}

#[test]
fn export_ilp_writes_lp_and_model_dump() {
    let f = fixture(2);
    let lp = f.graph.with_extension("lp");
    let dump = f.graph.with_extension("model");
    let output = run(&[
        "export-ilp",
        path_str(&f.graph),
        path_str(&f.partition),
        "--k",
        "2",
        "--eps",
        "0.03",
        "--strategy",
        "boundary",
        "--preset",
        "basic",
        "--out",
        path_str(&lp),
        "--dump-model",
        path_str(&dump),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let lp_text = std::fs::read_to_string(&lp).unwrap();
    assert!(lp_text.starts_with("Minimize\n obj:"));
    assert!(lp_text.contains("Subject To\n"));
    assert!(lp_text.trim_end().ends_with("End"));
    assert!(dump.with_extension("graph").exists());
    assert!(dump.with_extension("map").exists());
    let counts = stdout_of(&output);
    assert!(counts.contains("variables="));
    assert!(counts.contains("nonzeros="));
}

#[test]
fn report_aggregates_records() {
    let f = fixture(2);
    let records = f.graph.with_extension("jsonl");
    for seed in ["1", "2"] {
        let output = run(&[
            "refine",
            path_str(&f.graph),
            path_str(&f.partition),
            "--k",
            "2",
            "--eps",
            "0.03",
            "--seed",
            seed,
            "--strategy",
            if seed == "1" { "boundary" } else { "gain:-2" },
            "--records",
            path_str(&records),
        ]);
        assert_eq!(output.status.code(), Some(0));
    }
    let csv_path = f.graph.with_extension("csv");
    let output = run(&["report", path_str(&records), "--out", path_str(&csv_path)]);
    assert_eq!(output.status.code(), Some(0));
    let csv_text = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv_text.starts_with("row,algorithm,instance,k,eps,rank,time_s,cut,ratio"));
    assert!(csv_text.contains("ratio,boundary,g"));
    assert!(csv_text.contains("geomean,gain:-2"));
}

#[test]
fn env_seed_overrides_the_flag() {
    let f = fixture(2);
    let run_with = |env_seed: Option<&str>, flag_seed: &str| -> serde_json::Value {
        let mut cmd = bin();
        cmd.args([
            "refine",
            path_str(&f.graph),
            path_str(&f.partition),
            "--k",
            "2",
            "--eps",
            "0.03",
            "--seed",
            flag_seed,
        ]);
        match env_seed {
            Some(s) => cmd.env("ILPREFINE_SEED", s),
            None => cmd.env_remove("ILPREFINE_SEED"),
        };
        let output = cmd.output().expect("binary runs");
        assert_eq!(output.status.code(), Some(0));
        let mut v: serde_json::Value =
            serde_json::from_str(String::from_utf8_lossy(&output.stdout).trim()).unwrap();
        v["time_s"] = 0.0.into();
        v
    };
    // Env var set: the flag value is ignored.
    let a = run_with(Some("5"), "1");
    let b = run_with(None, "5");
    assert_eq!(a, b, "ILPREFINE_SEED=5 must equal --seed 5");

    let mut cmd = bin();
    cmd.args([
        "refine",
        path_str(&f.graph),
        path_str(&f.partition),
        "--k",
        "2",
    ])
    .env("ILPREFINE_SEED", "not-a-number");
    let output = cmd.output().expect("binary runs");
    assert_eq!(output.status.code(), Some(2));
}
