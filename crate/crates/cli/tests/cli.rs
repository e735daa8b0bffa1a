use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_regionscore"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(k).unwrap().to_string())
        .collect()
}

const EXAMPLE: &str = "case_id,forecast,obs\n1,12,8\n2,5,7\n3,15,20\n";

#[test]
fn split_squared_error_columns() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.csv"), EXAMPLE).unwrap();
    let o = run(
        dir.path(),
        &["score", "--input", "a.csv", "--cutpoints", "10"],
    );
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(column(&out, "component_2"), ["12", "0", "25"]);
    assert_eq!(column(&out, "component_1"), ["4", "4", "0"]);
    assert_eq!(column(&out, "total"), ["16", "4", "25"]);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("mean total score: 15.00"), "{err}");
}

#[test]
fn single_weight_component_equals_total() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.csv"), EXAMPLE).unwrap();
    let o = run(
        dir.path(),
        &[
            "score",
            "--input",
            "a.csv",
            "--functional",
            "huber_mean",
            "--nu",
            "2",
        ],
    );
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(column(&out, "component_1"), column(&out, "total"));
}

#[test]
fn empty_input_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("e.csv"), "case_id,forecast,obs\n").unwrap();
    let o = run(dir.path(), &["score", "--input", "e.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("no cases"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run(dir.path(), &["score", "--input", "nope.csv"]);
    assert_eq!(missing.status.code(), Some(1));
    fs::write(dir.path().join("bad.csv"), "case_id,forecast,obs\n1,x,2\n").unwrap();
    let bad = run(dir.path(), &["score", "--input", "bad.csv"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8(bad.stderr).unwrap().contains("bad.csv:2"));
    fs::write(dir.path().join("a.csv"), EXAMPLE).unwrap();
    let alpha = run(
        dir.path(),
        &[
            "score",
            "--input",
            "a.csv",
            "--functional",
            "quantile",
            "--alpha",
            "1.5",
        ],
    );
    assert_eq!(alpha.status.code(), Some(2));
}

#[test]
fn out_directory_gets_files_and_summary_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.csv"), EXAMPLE).unwrap();
    let o = run(
        dir.path(),
        &[
            "score",
            "--input",
            "a.csv",
            "--cutpoints",
            "10",
            "--out",
            "res",
        ],
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("component 2"));
    let scores = fs::read_to_string(dir.path().join("res/scores.csv")).unwrap();
    assert_eq!(column(&scores, "component_2"), ["12", "0", "25"]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res/summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["summary"]["mean_total"], 15.0);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.csv"), EXAMPLE).unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "[partition]\ncutpoints = [10.0]\n[scoring]\nfunctional = \"quantile\"\nalpha = 0.5\n",
    )
    .unwrap();
    let from_config = stdout(&run(
        dir.path(),
        &["score", "--input", "a.csv", "--config", "run.toml"],
    ));
    // |x - y| / 2 for the median
    assert_eq!(column(&from_config, "total"), ["2", "1", "2.5"]);
    let flagged = stdout(&run(
        dir.path(),
        &[
            "score", "--input", "a.csv", "--config", "run.toml", "--alpha", "0.25",
        ],
    ));
    assert_eq!(column(&flagged, "total"), ["3", "0.5", "1.25"]);
    let other = stdout(&run(
        dir.path(),
        &[
            "score",
            "--input",
            "a.csv",
            "--config",
            "run.toml",
            "--functional",
            "expectile",
            "--alpha",
            "0.5",
        ],
    ));
    assert_eq!(column(&other, "total"), ["16", "4", "25"]);
}

#[test]
fn compare_pipeline_from_synth() {
    let dir = tempfile::tempdir().unwrap();
    let s = run(
        dir.path(),
        &["synth", "--n", "2000", "--seed", "2", "--out", "."],
    );
    assert!(s.status.success());
    let o = run(
        dir.path(),
        &[
            "compare",
            "--input",
            "synthetic.csv",
            "--cutpoints",
            "10",
            "--format",
            "json",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["n_cases"], 2000);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[1]["label"], "component_1");
    assert!(rows[1]["ci_upper"].as_f64().unwrap() < 0.0);
    assert!(rows[2]["ci_lower"].as_f64().unwrap() > 0.0);
}

#[test]
fn compare_two_files_requires_matching_observations() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.csv"), EXAMPLE).unwrap();
    fs::write(
        dir.path().join("b.csv"),
        "case_id,forecast,obs\n3,14,20\n1,9,8\n2,7,7\n",
    )
    .unwrap();
    let ok = run(dir.path(), &["compare", "--inputs", "a.csv", "b.csv"]);
    assert!(ok.status.success());
    let out = stdout(&ok);
    assert!(out.starts_with("label,mean_a,mean_b,"), "{out}");
    fs::write(
        dir.path().join("c.csv"),
        "case_id,forecast,obs\n1,9,8\n2,7,7\n3,14,21\n",
    )
    .unwrap();
    let bad = run(dir.path(), &["compare", "--inputs", "a.csv", "c.csv"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn validate_partition_reports_gaps() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("p.toml"),
        "weights = [\n  { kind = \"rectangular\", params = { a = \"-inf\", b = 10.0 } },\n  { kind = \"rectangular\", params = { a = 11.0, b = \"inf\" } },\n]\n",
    )
    .unwrap();
    let o = run(dir.path(), &["validate-partition", "--partition", "p.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["passed"], false);
    assert!(String::from_utf8(o.stderr)
        .unwrap()
        .contains("invalid partition"));
}

#[test]
fn murphy_grid_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.csv"), EXAMPLE).unwrap();
    let o = run(
        dir.path(),
        &[
            "murphy", "--inputs", "a.csv", "--grid", "0:20:5", "--out", "m",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("m/murphy.csv")).unwrap();
    assert_eq!(column(&csv, "theta"), ["0", "5", "10", "15", "20"]);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m/murphy.json")).unwrap())
            .unwrap();
    assert_eq!(meta["systems"][0], "a");
    assert_eq!(meta["columns"][1], "system_1_mean");
}

#[test]
fn crps_hand_case() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("e.csv"), "case_id,obs,m1,m2\n1,1,0,2\n").unwrap();
    let o = run(
        dir.path(),
        &["crps", "--input", "e.csv", "--cutpoints", "1"],
    );
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(column(&out, "crps"), ["0.5"]);
    assert_eq!(column(&out, "component_1"), ["0.25"]);
    assert_eq!(column(&out, "component_2"), ["0.25"]);
}
