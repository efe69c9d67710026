use std::fs;
use std::process::{Command, Output};

const SMALL: [&str; 6] = ["--set", "trial_length=3000", "--set", "lifespan=1000", "--set", "animats_per_tribe=3"];

fn brickworld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brickworld")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut args = vec!["run", "--preset", "sf", "--seed", "5", "--out", out.to_str().unwrap()];
    args.extend(SMALL);
    let o = brickworld(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("seed 5"));
    for f in ["timeseries.csv", "summary.csv", "obituaries.csv", "score_histogram.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let ts = fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert_eq!(ts.lines().count(), 1 + 3 * 2);
}

#[test]
fn run_is_deterministic() {
    let mut args = vec!["run", "--seed", "9"];
    args.extend(SMALL);
    assert_eq!(stdout(&brickworld(&args)), stdout(&brickworld(&args)));
}

#[test]
fn config_file_and_bad_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("trial.cfg");
    fs::write(&cfg, "# short\ntrial_length=2000\nlifespan=1000\ntribe0.obedience=6\n").unwrap();
    let o = brickworld(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    fs::write(&cfg, "tribe0.authority=xx\n").unwrap();
    let o = brickworld(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("authority"));

    let o = brickworld(&["run", "--preset", "nonesuch"]);
    assert!(!o.status.success());
}

#[test]
fn batch_then_analyze_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("batch");
    let mut args = vec![
        "batch",
        "--count",
        "2",
        "--threads",
        "2",
        "--sweep",
        "tribe1.memory=true,false",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend(SMALL);
    let o = brickworld(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 4 * 2);
    let table = fs::read_to_string(out.join("batch.csv")).unwrap();
    assert!(table.lines().nth(1).unwrap().starts_with("4,0,"));

    let a = brickworld(&["analyze", out.join("summary.csv").to_str().unwrap()]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let first = |s: &str| s.lines().nth(1).unwrap().split(',').take(5).collect::<Vec<_>>().join(",");
    assert_eq!(first(&stdout(&a)), first(&table));
}

#[test]
fn dump_writes_queues_and_weights() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dump");
    let mut args = vec!["dump", "--at", "1500", "--out", out.to_str().unwrap()];
    args.extend(SMALL);
    let o = brickworld(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.iter().filter(|n| n.starts_with("queues_")).count(), 6);
    let q = names.iter().find(|n| n.starts_with("queues_")).unwrap();
    let text = fs::read_to_string(out.join(q)).unwrap();
    assert!(text.starts_with("#\tL.Action\tL.Signal\tL.Seen\tHeard"));

    let o = brickworld(&["dump", "--animat", "9999", "--out", out.to_str().unwrap(), "--set", "trial_length=100", "--set", "lifespan=50"]);
    assert!(!o.status.success());
}

#[test]
fn analyze_rejects_non_summary_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("x.csv");
    fs::write(&f, "a,b\n1,2\n").unwrap();
    assert!(!brickworld(&["analyze", f.to_str().unwrap()]).status.success());
}
