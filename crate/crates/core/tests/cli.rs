use std::path::Path;
use std::process::{Command, Output};

use dataplane_sim::metrics::emit::GAP_HEADER;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dataplane-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cli(&[
        "run", "--out", out, "--seed", "4", "--scheme", "upf-mec", "--trace",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for report in [
        "summary.json",
        "upf_delay.csv",
        "mec_delay.csv",
        "cdf.csv",
        "trace.csv",
        "requests.csv",
    ] {
        let name = format!("table1.bestfit-upf-mec.4.{report}");
        assert!(!read(dir.path(), &name).is_empty(), "{name}");
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&read(dir.path(), "table1.bestfit-upf-mec.4.summary.json")).unwrap();
    assert_eq!(summary["residual"], 0);
    let upf =
        String::from_utf8(read(dir.path(), "table1.bestfit-upf-mec.4.upf_delay.csv")).unwrap();
    assert_eq!(upf.lines().next(), Some("upf,qos,count,mean_ms,std_ms"));
    assert_eq!(upf.lines().count(), 1 + 5 * 4);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = cli(&["run", "--out", dir.path().to_str().unwrap(), "--trace"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for name in names {
        let name = name.to_str().unwrap();
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn unknown_scheme_lists_valid_names() {
    let o = cli(&["run", "--scheme", "warp", "--out", "/tmp/unused-dps-out"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    for name in [
        "baseline",
        "bestfit-upf-no-pe",
        "bestfit-upf-pe",
        "bestfit-upf-mec",
    ] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn missing_scenario_file() {
    let o = cli(&["run", "--scenario", "/nonexistent/x.toml"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("file not found"), "{}", stderr(&o));
}

#[test]
fn invalid_scenario_prints_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let text = dataplane_sim::model::TABLE1_TOML
        .replace(
            "skew = [0.13, 0.24, 0.30, 0.15, 0.18]",
            "skew = [0.5, 0.5, 0.5, 0.0, 0.0]",
        )
        .replace("delta_ms = 1.0", "delta_ms = -1.0");
    std::fs::write(&path, text).unwrap();
    let p = path.to_str().unwrap();

    let o = cli(&["validate", "--scenario", p]);
    assert!(!o.status.success());
    let report = String::from_utf8_lossy(&o.stdout);
    assert!(report.contains("skew sums to 1.5"), "{report}");
    assert!(report.contains("delta_ms"), "{report}");

    let o = cli(&[
        "run",
        "--scenario",
        p,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("skew sums to 1.5"), "{}", stderr(&o));
}

#[test]
fn oracle_gap_with_no_trials_writes_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "oracle-gap",
        "--trials",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(read(dir.path(), "oracle.u3-n6.1.gap.csv")).unwrap();
    assert_eq!(text, format!("{GAP_HEADER}\n"));
}

#[test]
fn compare_writes_a_row_per_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "compare",
        "--seeds",
        "1-2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(read(dir.path(), "table1.all.all.comparison.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 4);
    assert!(dir.path().join("table1.baseline.all.cdf.csv").exists());
}

#[test]
fn capex_sweep_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "capex",
        "--pairs",
        "1-3",
        "--seeds",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(read(dir.path(), "capex.all.all.capex.csv")).unwrap();
    // three pair counts for each of the two thresholded classes
    assert_eq!(text.lines().count(), 1 + 3 * 2);
}

#[test]
fn bundled_scenarios_print_and_validate() {
    let o = cli(&["scenario", "capex"]);
    assert!(o.status.success());
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        dataplane_sim::model::CAPEX_TOML
    );
    assert!(cli(&["validate"]).status.success());
    assert!(!cli(&["scenario", "nope"]).status.success());
}
