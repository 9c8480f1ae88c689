//! End-to-end tests of the `svyauc` binary: exit codes, JSON output
//! shapes, and artifact determinism.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn svyauc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svyauc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "expected success, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path.to_str().unwrap().to_string()
}

/// Tiny frame with perfectly separating scores.
const TOY: &str = "\
id,stratum,psu,weight,outcome,score,x
1,1,1,2.0,0,0.10,1.5
2,1,2,1.0,0,0.20,0.7
3,2,1,3.0,1,0.80,2.9
4,2,2,1.5,1,0.90,3.4
";

/// Deterministic frame shaped like a public-use health survey:
/// 15 strata, 2 PSUs each, 6 units per PSU.
fn survey_csv(salt: u64) -> String {
    let mut state = salt.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut out = String::from("SEQN,SDMVSTRA,SDMVPSU,WTMEC2YR,outcome,age,bmi\n");
    let mut serial = 0;
    for h in 1..=15 {
        for p in 1..=2 {
            for _ in 0..6 {
                serial += 1;
                let age = 2.0 * next() - 1.0;
                let bmi = 0.5 * age + (2.0 * next() - 1.0);
                let eta = -0.4 + 1.6 * age + 0.8 * bmi;
                let prob = 1.0 / (1.0 + (-eta as f64).exp());
                let y = u8::from(next() < prob);
                let w = 600.0 + 6000.0 * next();
                out.push_str(&format!(
                    "{serial},{h},{p},{w:.4},{y},{age:.6},{bmi:.6}\n"
                ));
            }
        }
    }
    out
}

const SCHEMA: &[&str] = &[
    "--stratum-col",
    "SDMVSTRA",
    "--psu-col",
    "SDMVPSU",
    "--weight-col",
    "WTMEC2YR",
    "--outcome-col",
    "outcome",
    "--id-col",
    "SEQN",
];

#[test]
fn auc_of_separated_scores_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "toy.csv", TOY);
    let out = svyauc(&["auc", "--input", &input, "--score-col", "score"]);
    let v = json_stdout(&out);
    assert_eq!(v["auc"], 1.0);
    assert_eq!(v["n_units"], 4);
    assert_eq!(v["source"]["score_col"], "score");
    assert_eq!(v["tool_version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn fit_reports_coefficients_and_in_sample_auc() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "survey.csv", &survey_csv(1));
    let mut args = vec!["fit", "--input", &input, "--covariate-cols", "age,bmi"];
    args.extend_from_slice(SCHEMA);
    let v = json_stdout(&svyauc(&args));
    assert_eq!(v["converged"], true);
    let coef = v["coefficients"].as_array().unwrap();
    assert_eq!(coef.len(), 3);
    assert_eq!(coef[0]["term"], "(intercept)");
    assert_eq!(coef[2]["term"], "bmi");
    let auc = v["auc"].as_f64().unwrap();
    assert!((0.5..1.0).contains(&auc));
}

#[test]
fn ci_normal_and_percentile_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "survey.csv", &survey_csv(2));
    for (method, kind) in [("jkn", "normal"), ("rb", "percentile"), ("trb", "normal")] {
        let mut args = vec![
            "ci",
            "--input",
            &input,
            "--covariate-cols",
            "age,bmi",
            "--method",
            method,
            "--ci",
            kind,
            "--B",
            "200",
            "--seed",
            "9",
            "--alpha",
            "0.1",
        ];
        args.extend_from_slice(SCHEMA);
        let v = json_stdout(&svyauc(&args));
        let (lo, hi) = (
            v["ci"]["lower"].as_f64().unwrap(),
            v["ci"]["upper"].as_f64().unwrap(),
        );
        let point = v["point"].as_f64().unwrap();
        assert!(lo < hi, "{method}/{kind}: [{lo}, {hi}]");
        if kind == "normal" {
            assert!(lo < point && point < hi);
        }
        assert_eq!(v["ci"]["level"], 0.9);
        assert_eq!(v["method"], method);
        assert_eq!(v["seed"], 9);
        assert!(v["replicates"]["total"].as_u64().unwrap() > 0);
    }
}

#[test]
fn percentile_with_jackknife_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "toy.csv", TOY);
    let out = svyauc(&[
        "ci",
        "--input",
        &input,
        "--score-col",
        "score",
        "--method",
        "jkn",
        "--ci",
        "percentile",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("percentile"), "stderr: {stderr}");
}

#[test]
fn bad_weight_is_an_input_error_with_row_number() {
    let dir = tempfile::tempdir().unwrap();
    let bad = TOY.replace("3,2,1,3.0,1", "3,2,1,-3.0,1");
    let input = write(dir.path(), "bad.csv", &bad);
    let out = svyauc(&["auc", "--input", &input, "--score-col", "score"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("row 3"), "stderr: {stderr}");
}

#[test]
fn rank_deficiency_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    // two copies of the same covariate cannot be identified
    let dup = survey_csv(3).replace(",age,bmi\n", ",age,age2\n");
    let mut rows: Vec<String> = Vec::new();
    for (i, line) in dup.lines().enumerate() {
        if i == 0 {
            rows.push(line.to_string());
        } else {
            let cols: Vec<&str> = line.split(',').collect();
            let mut cols: Vec<String> = cols.iter().map(|s| s.to_string()).collect();
            cols[6] = cols[5].clone();
            rows.push(cols.join(","));
        }
    }
    let input = write(dir.path(), "dup.csv", &(rows.join("\n") + "\n"));
    let mut args = vec!["fit", "--input", &input, "--covariate-cols", "age,age2"];
    args.extend_from_slice(SCHEMA);
    let out = svyauc(&args);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("rank"), "stderr: {stderr}");
}

#[test]
fn degenerate_jackknife_replicates_abort_with_code_4() {
    let dir = tempfile::tempdir().unwrap();
    // every case lives in one PSU, so dropping it starves the estimator
    let csv = "\
id,stratum,psu,weight,outcome,score
1,1,1,1.0,1,0.9
2,1,1,1.0,1,0.8
3,1,2,1.0,0,0.2
4,1,2,1.0,0,0.3
5,2,1,1.0,0,0.1
6,2,1,1.0,0,0.4
7,2,2,1.0,0,0.2
8,2,2,1.0,0,0.3
";
    let input = write(dir.path(), "degen.csv", csv);
    let out = svyauc(&[
        "ci",
        "--input",
        &input,
        "--score-col",
        "score",
        "--method",
        "jkn",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn compare_paired_tests_nested_models() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "survey.csv", &survey_csv(4));
    let mut args = vec![
        "compare-paired",
        "--input",
        &input,
        "--covariate-cols",
        "age,bmi",
        "--covariate-cols2",
        "bmi",
        "--method",
        "rb",
        "--B",
        "300",
        "--seed",
        "5",
    ];
    args.extend_from_slice(SCHEMA);
    let v = json_stdout(&svyauc(&args));
    let auc1 = v["auc1"].as_f64().unwrap();
    let auc2 = v["auc2"].as_f64().unwrap();
    assert!(auc1 > auc2, "full model should win in-sample: {auc1} vs {auc2}");
    let d = v["test"]["d_hat"].as_f64().unwrap();
    assert!((d - (auc1 - auc2)).abs() < 1e-12);
    let p = v["test"]["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    assert_eq!(v["test"]["pairing"], "paired");
}

#[test]
fn compare_indep_tests_two_samples() {
    let dir = tempfile::tempdir().unwrap();
    let input1 = write(dir.path(), "a.csv", &survey_csv(5));
    let input2 = write(dir.path(), "b.csv", &survey_csv(6));
    let mut args = vec![
        "compare-indep",
        "--input1",
        &input1,
        "--input2",
        &input2,
        "--covariate-cols",
        "age,bmi",
        "--method",
        "rbn",
        "--B",
        "300",
        "--seed",
        "5",
    ];
    args.extend_from_slice(SCHEMA);
    let v = json_stdout(&svyauc(&args));
    assert_eq!(v["test"]["pairing"], "independent");
    assert_eq!(v["test"]["method"], "rbn");
    let z = v["test"]["z"].as_f64().unwrap();
    assert!(z.is_finite());
}

#[test]
fn simulate_artifacts_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &str| {
        vec![
            "simulate".to_string(),
            "--scenario".into(),
            "1".into(),
            "--runs".into(),
            "12".into(),
            "--B".into(),
            "120".into(),
            "--seed".into(),
            "7".into(),
            "--a-h".into(),
            "2".into(),
            "--size".into(),
            "n1".into(),
            "--alpha".into(),
            "0.05,0.1".into(),
            "--out".into(),
            out.into(),
        ]
    };
    let out1 = dir.path().join("one");
    let out2 = dir.path().join("two");
    for out in [&out1, &out2] {
        let status = Command::new(env!("CARGO_BIN_EXE_svyauc"))
            .args(args(out.to_str().unwrap()))
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in ["summary.csv", "se_samples.csv", "meta.json"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let meta: Value =
        serde_json::from_slice(&std::fs::read(out1.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["tool_version"], env!("CARGO_PKG_VERSION"));
    let summary = std::fs::read_to_string(out1.join("summary.csv")).unwrap();
    assert!(summary.starts_with("scenario,contrast,a_h,size,method,"));
    // 4 methods x 2 alphas normal + 3 bootstrap percentile rows x 2 alphas
    assert_eq!(summary.lines().count(), 1 + 8 + 6);
}

#[test]
fn dump_replicates_emits_one_column_per_replicate() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "toy.csv", TOY);
    let out_path = dir.path().join("reps.csv");
    let out = svyauc(&[
        "dump-replicates",
        "--input",
        &input,
        "--method",
        "jkn",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    // 2 strata x 2 PSUs -> 4 jackknife replicates
    assert_eq!(header.len(), 2 + 4);
    assert_eq!(header[0], "id");
    assert_eq!(header[1], "base_weight");
    assert_eq!(header[2], "rep1");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    // dropping the PSU of unit 1 zeroes it and doubles its stratum mate
    assert_eq!(rows[0][1], 0.0);
    assert_eq!(rows[1][1], 2.0);
    // other strata keep their base weight
    assert_eq!(rows[2][1], rows[2][0]);

    // stdout and file output agree
    let stdout_run = svyauc(&["dump-replicates", "--input", &input, "--method", "jkn"]);
    assert!(stdout_run.status.success());
    assert_eq!(String::from_utf8_lossy(&stdout_run.stdout), text);
}

#[test]
fn missing_column_names_the_missing_header() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "toy.csv", TOY);
    let out = svyauc(&[
        "auc",
        "--input",
        &input,
        "--score-col",
        "score",
        "--weight-col",
        "nope",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}
