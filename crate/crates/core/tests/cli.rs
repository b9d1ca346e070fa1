use std::path::Path;
use std::process::{Command, Output};

fn spinq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinq")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, experiment: &str, sets: &[&str]) -> Output {
    let mut args = vec!["--experiment", experiment, "--out", dir.to_str().unwrap()];
    for s in sets {
        args.extend(["--set", s]);
    }
    spinq(&args)
}

fn manifest_value(dir: &Path, key: &str) -> Option<String> {
    let text = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
    text.lines().find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn plain_lgi_stays_below_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "lgi", &["alpha=0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let kmax = csv_rows(&dir.path().join("lgi.csv")).iter().map(|r| r[3]).fold(f64::MIN, f64::max);
    assert!(kmax <= 1.5 + 1e-9, "{kmax}");
    let reported: f64 = manifest_value(dir.path(), "result.k3_max").unwrap().parse().unwrap();
    assert!((reported - kmax).abs() < 1e-6);
}

#[test]
fn leeyang_trace_reports_two_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "leeyang-trace", &["bJ=0.5", "jPA=49.50393", "jPB=224.66358", "bhA=0.1", "bhB=-0.1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(csv_rows(&dir.path().join("zeros.csv")).len(), 2);
    assert_eq!(manifest_value(dir.path(), "result.zero_count").as_deref(), Some("2"));
}

#[test]
fn mpemba_crossing_is_positive() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "mpemba", &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let tc: f64 = manifest_value(dir.path(), "result.crossing_time").unwrap().parse().unwrap();
    assert!(tc > 0.0);
}

#[test]
fn reruns_are_bit_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = spinq(&["--experiment", "channel-audit", "--seed", "7", "--out", d.path().to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(a.path().join("manifest.txt")).unwrap();
    let files: Vec<&str> = text.lines().filter_map(|l| l.strip_prefix("file=")).map(|l| l.split(' ').next().unwrap()).collect();
    assert!(!files.is_empty());
    for f in files {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# comment\nexperiment = entloc-localize\nJ = 50\n").unwrap();
    let out = spinq(&["--config", cfg.to_str().unwrap(), "--set", "J=100", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(manifest_value(dir.path(), "config.J").as_deref(), Some("100"));
    let last = csv_rows(&dir.path().join("localization.csv")).pop().unwrap();
    assert!((last[1] - 1.0).abs() < 1e-9);
}

#[test]
fn slow_bath_ratio_warns() {
    let out = spinq(&["--experiment", "mpemba", "--check", "--set", "k0=1", "--set", "delta=1"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn invalid_configs_exit_with_two() {
    let alpha = format!("alpha={}", 0.9 * std::f64::consts::PI);
    let cases: [&[&str]; 4] = [
        &["--experiment", "lgi", "--check", "--set", &alpha],
        &["--experiment", "leeyang-trace", "--check", "--set", "bJ=0.5", "--set", "jPB=2"],
        &["--experiment", "lgi", "--check", "--set", "bogus=1"],
        &["--experiment", "nonsense", "--check"],
    ];
    for args in cases {
        let out = spinq(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn unwritable_output_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = run_in(&blocker, "entloc-localize", &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
