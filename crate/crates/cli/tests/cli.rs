use std::path::Path;
use std::process::{Command, Output};

const SMALL: [&str; 6] = [
    "--set",
    r#"grids.group.axes=[{"center":0,"half_width":2,"points":17},{"center":0,"half_width":2,"points":17},{"center":0,"half_width":2,"points":17}]"#,
    "--set",
    "grids.x.axes.0.points=33",
    "--set",
    "grids.lambda.axes.0.points=8",
];

fn nilpw(args: &[&str], out: &Path) -> Output {
    let out_set = format!("output={}", out.display());
    Command::new(env!("CARGO_BIN_EXE_nilpw"))
        .args(args)
        .args(["--set", &out_set])
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn pw_scan_of_zero_function_is_a_zero_function_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["pw-scan", "--set", r#"function={"family":"zero"}"#];
    args.extend(SMALL);
    let o = nilpw(&args, dir.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = read(&dir.path().join("pw_scan.csv"));
    assert!(csv.contains("# verdict: zero function"), "{csv}");
    // every generic node is below threshold
    let body: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(body.len(), 8);
    assert!(body.iter().all(|l| l.ends_with("true,true")), "{body:?}");
}

#[test]
fn pw_scan_of_a_bump_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["pw-scan"];
    args.extend(SMALL);
    let o = nilpw(&args, dir.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = read(&dir.path().join("pw_scan.csv"));
    assert!(
        csv.contains("# verdict: consistent with theorem at resolution h"),
        "{csv}"
    );
}

#[test]
fn kernel_report_records_tolerance_and_units() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["kernel", "--set", "route_tol=0.02"];
    args.extend(SMALL);
    let o = nilpw(&args, dir.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = read(&dir.path().join("kernel.csv"));
    assert!(csv.contains("# tolerance: 2e-2"), "{csv}");
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("lambda_1 [1/coord],"), "{header}");
    assert!(dir.path().join("kernel.bin").exists());
    assert!(dir.path().join("kernel.json").exists());
}

#[test]
fn interrupted_run_leaves_a_manifest_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["pw-scan", "--max-slots", "3"];
    args.extend(SMALL);
    let o = nilpw(&args, dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("3/8"));
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("pw-scan.manifest.json"))).unwrap();
    assert_eq!(manifest["completed"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["total"], 8);
    assert!(!dir.path().join("pw_scan.csv").exists());

    let mut args = vec!["pw-scan"];
    args.extend(SMALL);
    let o = nilpw(&args, dir.path());
    assert_eq!(o.status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("pw-scan.manifest.json"))).unwrap();
    assert_eq!(manifest["completed"].as_array().unwrap().len(), 8);
    assert!(dir.path().join("pw_scan.csv").exists());
}

#[test]
fn config_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["fourier", "--set", "group=no_such_group"],
        vec!["fourier", "--set", "no_such_key=1"],
        vec!["pw-scan", "--set", "epsilon=-1"],
        vec!["fourier", "--set", "grids.group.axes.0.points=1"],
    ] {
        let o = nilpw(&args, dir.path());
        assert_eq!(
            o.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn config_file_and_overrides_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"group": "abelian1", "function": {"family": "bump", "center": [0.0], "radius": [1.0]}}"#)
        .unwrap();
    let o = nilpw(
        &[
            "fourier",
            "--config",
            cfg.to_str().unwrap(),
            "--set",
            "grids.lambda.axes.0.points=5",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = read(&dir.path().join("fourier.csv"));
    assert!(csv.contains("# group: abelian1"));
    let rows = csv.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 5);
}

#[test]
fn unwritable_output_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = nilpw(&["catalog"], &blocker.join("sub"));
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn missing_config_file_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = nilpw(
        &["catalog", "--config", "/nonexistent/run.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
}
