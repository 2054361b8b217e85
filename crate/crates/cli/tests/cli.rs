use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mmpoincare");

fn mmpoincare(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(cwd).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.display().to_string()
}

fn csv_value(csv: &str, metric: &str) -> String {
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    reader
        .records()
        .map(Result::unwrap)
        .find(|r| &r[3] == metric)
        .map(|r| r[4].to_string())
        .unwrap_or_else(|| panic!("no row for {metric}"))
}

const GROWTH: &str = r#"{
  "id": "antenna-growth",
  "seed": 3,
  "space": {"generator": "antenna", "max_radius": 200},
  "analysis": {"name": "growth", "radii": [4, 8, 16, 24, 32, 48, 64],
               "fit_range": [8, 64], "expect_alpha": [1.9, 2.1]}
}"#;

const LEDGER: &str = r#"{
  "id": "ledger",
  "analysis": {"name": "ledger", "n": 2, "kappa": 0.0, "epsilon": 0.5, "sigma": 2.0,
               "beta": 3.0, "r0": 1.0, "r1": 2.0, "v_prime": 3.0, "outer_factor": 3.0,
               "local_poincare": {"name": "buser", "sqrt_kappa": true},
               "smoothing": {"source": "plug-in", "t": 2.0, "tprime": 7.0}}
}"#;

#[test]
fn antenna_growth_reports_alpha_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "growth.json", GROWTH);
    let out = mmpoincare(&["run", &cfg, "--output", "res"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("res/antenna-growth/report.csv")).unwrap();
    assert!(csv.starts_with("experiment,config_hash,params,metric,value,pass\n"));
    let alpha: f64 = csv_value(&csv, "alpha_hat").parse().unwrap();
    let pts: Vec<(f64, f64)> = [8.0f64, 16.0, 24.0, 32.0, 48.0, 64.0]
        .iter()
        .map(|&r| (r.ln(), (2.0 * r * r + 2.0 * r + 1.0).ln()))
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((alpha - slope).abs() < 1e-9, "alpha {alpha} vs {slope}");
    assert!((alpha - 2.0).abs() < 0.06);
    assert_eq!(csv_value(&csv, "growth_class"), "polynomial");
    assert!(tmp.path().join("res/antenna-growth/metadata.json").exists());
}

#[test]
fn ledger_without_a_space() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "ledger.json", LEDGER);
    let out = mmpoincare(&["run", &cfg, "--output", "res"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("res/ledger/report.json")).unwrap()).unwrap();
    assert_eq!(json["status"], "complete");
    let c = json["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["metric"] == "c_dprime")
        .unwrap();
    assert_eq!(c["value"].as_f64(), Some(89.0));
}

#[test]
fn invalid_configs_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = write_config(
        tmp.path(),
        "empty.json",
        r#"{"id": "e", "space": {"generator": "grid", "dim": 2, "max_radius": 10},
            "analysis": {"name": "growth", "radii": [], "fit_range": [1, 4]}}"#,
    );
    let out = mmpoincare(&["run", &empty], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parameter error"));

    let unknown = write_config(
        tmp.path(),
        "unknown.json",
        r#"{"id": "u", "space": {"generator": "klein-bottle"},
            "analysis": {"name": "growth", "radii": [1, 2], "fit_range": [1, 2]}}"#,
    );
    let out = mmpoincare(&["run", &unknown], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("klein-bottle"));

    let cloud_without_net = write_config(
        tmp.path(),
        "nonet.json",
        r#"{"id": "h", "space": {"generator": "horosphere", "n": 2, "a": 1, "height": 1, "extent": 2, "count": 50},
            "analysis": {"name": "rough-isometry"}}"#,
    );
    assert_eq!(mmpoincare(&["run", &cloud_without_net], tmp.path()).status.code(), Some(2));
    assert!(!tmp.path().join("results").exists());
}

#[test]
fn failed_analyses_leave_an_incomplete_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "clip.json",
        r#"{"id": "clip", "space": {"generator": "grid", "dim": 2, "max_radius": 10},
            "analysis": {"name": "poincare-ratio", "sigma": 2, "beta": 0, "outer_factor": 3,
                         "radii": [2, 3, 8], "field": {"kind": "random"}}}"#,
    );
    let out = mmpoincare(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("results/clip/report.json")).unwrap()).unwrap();
    assert_eq!(json["status"], "incomplete");
    assert!(json["error"].as_str().unwrap().contains("parameter error"));
}

#[test]
fn reruns_are_byte_identical_and_guarded_by_the_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep = format!(r#"{{"experiments": [{GROWTH}, {LEDGER}]}}"#);
    let cfg = write_config(tmp.path(), "sweep.json", &sweep);
    let csv = |id: &str| fs::read(tmp.path().join(format!("res/{id}/report.csv"))).unwrap();

    assert!(mmpoincare(&["run", &cfg, "--output", "res"], tmp.path()).status.success());
    let first = (csv("antenna-growth"), csv("ledger"));
    assert!(mmpoincare(&["run", &cfg, "--output", "res", "--jobs", "1"], tmp.path()).status.success());
    assert_eq!(first, (csv("antenna-growth"), csv("ledger")));

    let changed = write_config(tmp.path(), "changed.json", &GROWTH.replace("\"seed\": 3", "\"seed\": 4"));
    let out = mmpoincare(&["run", &changed, "--output", "res"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("refusing"));
    assert_eq!(first.0, csv("antenna-growth"));
}

#[test]
fn verify_suites() {
    let tmp = tempfile::tempdir().unwrap();
    for suite in ["spectral", "antenna"] {
        let out = mmpoincare(&["verify", suite], tmp.path());
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(out.status.success(), "{stdout}");
        assert!(stdout.lines().any(|l| l.contains("criteria passed")));
    }
    let out = mmpoincare(&["verify", "everything"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn formats_print_documents_the_inputs_and_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mmpoincare(&["formats", "print"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in ["EDGE LIST", "POINT CLOUD", "CONFIG", "report.csv", "tube-surface", "verify-theorem"] {
        assert!(text.contains(needle), "missing {needle}");
    }
}

#[test]
fn file_spaces_resolve_relative_to_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    fs::create_dir(&data).unwrap();
    let mut edges = String::from("# path on 41 vertices\nvertices 41\n");
    for i in 0..40 {
        edges.push_str(&format!("{i} {}\n", i + 1));
    }
    fs::write(data.join("path.txt"), edges).unwrap();
    let mut points = String::from("# unit segment\n");
    for i in 0..=400 {
        points.push_str(&format!("{}\n", i as f64 / 100.0));
    }
    fs::write(data.join("line.txt"), points).unwrap();
    let cfg = write_config(
        &data,
        "files.json",
        r#"{"experiments": [
            {"id": "path", "space": {"generator": "edge-list", "path": "path.txt"},
             "analysis": {"name": "growth", "radii": [2, 4, 6, 8, 10, 12, 14, 16, 18, 20],
                          "fit_range": [2, 20], "center": {"vertex": 20}, "expect_alpha": [0.9, 1.1]}},
            {"id": "line", "space": {"generator": "point-cloud", "path": "line.txt", "metric": {"name": "euclidean"}},
             "net": {"epsilon": 0.25, "order": "index"},
             "analysis": {"name": "rough-isometry"}}
        ]}"#,
    );
    let out = mmpoincare(&["run", &cfg, "--output", "res"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path_csv = fs::read_to_string(tmp.path().join("res/path/report.csv")).unwrap();
    assert_eq!(csv_value(&path_csv, "vertices"), "41");
    let line_csv = fs::read_to_string(tmp.path().join("res/line/report.csv")).unwrap();
    assert_eq!(csv_value(&line_csv, "vertices"), "17");
    assert_eq!(csv_value(&line_csv, "rough_isometry"), "pass");
}
