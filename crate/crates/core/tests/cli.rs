use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commentlab"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn commentlab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &TempDir, name: &str, count: &str, seed: &str) -> PathBuf {
    let out = path(dir, name);
    let o = run(&["generate", "--count", count, "--seed", seed, "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn generate_exact_split_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "synth.csv");
    let o = run(&["generate", "--count", "5000", "--balance", "exact", "--seed", "42", "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("useful=2500 not_useful=2500"), "{}", stdout(&o));
    let meta = fs::read_to_string(path(&dir, "synth.csv.meta")).unwrap();
    assert!(meta.contains("seed=42"), "{meta}");
    assert!(fs::read_to_string(&out).unwrap().starts_with("Line of Code,Comment,Class\n"));
}

#[test]
fn zero_count_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = run(&["generate", "--count", "0", "-o", s(&path(&dir, "x.csv"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = generate(&dir, "good.csv", "200", "1");
    assert_eq!(run(&["validate", s(&good)]).status.code(), Some(0));

    let bad = path(&dir, "bad.csv");
    fs::write(
        &bad,
        "Line of Code,Comment,Class\nint total = 5;,// fine,Not Useful\nint $myvar = 3;,// sum,Not Useful\n",
    )
    .unwrap();
    let o = run(&["validate", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("row 2: line: rule 8"), "{text}");
    assert!(!text.contains("row 1:"), "{text}");
    // Lenient mode reports the same row but succeeds.
    let o = run(&["validate", "--lenient", s(&bad)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("rule 8"));

    let headerless = path(&dir, "headerless.csv");
    fs::write(&headerless, "int total = 5;,// fine,Useful\n").unwrap();
    assert_eq!(run(&["validate", s(&headerless)]).status.code(), Some(2));
    assert_eq!(run(&["validate", s(&path(&dir, "missing.csv"))]).status.code(), Some(2));
}

#[test]
fn merge_then_stats_sums_counts() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.csv", "30", "1");
    let b = generate(&dir, "b.csv", "21", "2");
    let m = path(&dir, "m.csv");
    assert_eq!(run(&["merge", s(&a), s(&b), "-o", s(&m)]).status.code(), Some(0));
    let o = run(&["stats", s(&m)]);
    assert_eq!(o.status.code(), Some(0));
    // Exact balance gives ceil(n/2) Useful per file: 15 + 11.
    let text = stdout(&o);
    assert!(text.contains("total=51"), "{text}");
    assert!(text.contains("useful=26 "), "{text}");
}

#[test]
fn config_file_sits_under_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "run.conf");
    fs::write(&cfg, "count=12\nseed=4\n").unwrap();
    let a = path(&dir, "a.csv");
    let o = run(&["generate", "--config", s(&cfg), "-o", s(&a)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("total=12"));
    let b = path(&dir, "b.csv");
    let o = run(&["generate", "--config", s(&cfg), "--count", "7", "-o", s(&b)]);
    assert!(stdout(&o).contains("total=7"));

    fs::write(&cfg, "count=lots\n").unwrap();
    assert_eq!(run(&["generate", "--config", s(&cfg), "-o", s(&a)]).status.code(), Some(2));
}

#[test]
fn resolved_config_is_logged() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_commentlab"))
        .args(["generate", "--count", "3", "-o", s(&path(&dir, "x.csv"))])
        .env_remove("RUST_LOG")
        .output()
        .unwrap();
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("generate:") && err.contains("count=3") && err.contains("seed=0"), "{err}");
}

#[test]
fn balance_writes_embeddings_and_labels() {
    let dir = TempDir::new().unwrap();
    let data = generate(&dir, "d.csv", "41", "3");
    let out = path(&dir, "bal.csv");
    let o = run(&["balance", s(&data), "--dim", "16", "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = fs::read_to_string(&out).unwrap().lines().count();
    let labels = fs::read_to_string(path(&dir, "bal.csv.labels")).unwrap();
    assert_eq!(rows, 42);
    assert_eq!(labels.lines().filter(|l| *l == "Useful").count(), 21);
    assert_eq!(labels.lines().filter(|l| *l == "Not Useful").count(), 21);
}

#[test]
fn evaluate_and_compare() {
    let dir = TempDir::new().unwrap();
    let data = generate(&dir, "d.csv", "60", "5");
    let report = path(&dir, "r.jsonl");
    let common = [
        "--models", "rf,vc,nn", "--folds", "3", "--repeats", "1", "--trees", "5", "--epochs", "2", "--dim", "32",
    ];
    let mut args = vec!["evaluate", s(&data)];
    args.extend(common);
    args.extend(["-o", s(&report)]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    for m in ["RF", "VC", "NN"] {
        assert!(table.lines().any(|l| l.starts_with(m)), "{table}");
    }
    let jsonl = fs::read_to_string(&report).unwrap();
    assert_eq!(jsonl.lines().filter(|l| l.contains("\"record\":\"summary\"")).count(), 3);
    assert_eq!(jsonl.lines().filter(|l| l.contains("\"record\":\"fold\"")).count(), 9);

    let o = run(&["compare", s(&report), s(&report)]);
    assert_eq!(o.status.code(), Some(0));
    let delta = stdout(&o);
    assert!(delta.contains("Increase (pp)") && delta.contains("Ratio"), "{delta}");
    assert_eq!(delta.lines().filter(|l| l.contains("+0.000")).count(), 6, "{delta}");

    let o = run(&["evaluate", s(&data), "--models", "rf,xgb"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn precomputed_embeddings_must_align() {
    let dir = TempDir::new().unwrap();
    let data = generate(&dir, "d.csv", "30", "6");
    let emb = path(&dir, "e.csv");
    fs::write(&emb, "0.1,0.2\n0.3,0.4\n").unwrap();
    let o = run(&["evaluate", s(&data), "--embeddings", s(&emb), "--folds", "3", "--repeats", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_and_unknown_subcommand() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}
