use std::process::{Command, Output};

fn g2calib(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_g2calib"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

/// Data rows of CSV output, after the provenance comment and header.
fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    let text = stdout(o);
    let (provenance, body) = text.split_once('\n').unwrap();
    assert!(provenance.starts_with("# g2calib "));
    csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn verify_passes_and_is_deterministic() {
    let a = g2calib(&["verify", "--samples", "50", "--seed", "9"]);
    let b = g2calib(&["verify", "--samples", "50", "--seed", "9"]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["pass"], true);
    assert!(v.get("wall_time_s").is_none());
    assert!(v["checks"].as_array().unwrap().len() > 30);
}

#[test]
fn verify_sample_size_does_not_change_verdicts() {
    let small = json(&g2calib(&["verify", "--samples", "10"]));
    let large = json(&g2calib(&["verify", "--samples", "3000"]));
    let verdicts = |v: &serde_json::Value| -> Vec<(String, bool)> {
        v["checks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| {
                (
                    c["name"].as_str().unwrap().to_string(),
                    c["pass"].as_bool().unwrap(),
                )
            })
            .collect()
    };
    assert_eq!(verdicts(&small), verdicts(&large));
}

#[test]
fn impossible_tolerance_fails_with_exit_1() {
    let o = g2calib(&["verify", "--samples", "20", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["pass"], false);
}

#[test]
fn malformed_flags_exit_2() {
    for args in [
        &["verify", "--samples", "0"][..],
        &["chi-flow", "--n", "3"],
        &["chi-flow", "--dt", "-1"],
        &["dirac", "--twist", "1", "2"],
        &["deform", "--format", "xml"],
        &["verify", "--tol", "abc"],
        &["sw-residual"],
        &["no-such-command"],
    ] {
        assert_eq!(g2calib(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("deform.csv");
    let o = g2calib(&["deform", "--count", "5", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# g2calib 0.1.0 deform seed=0\na,alpha1,"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn deform_metric_errors_are_small() {
    let o = g2calib(&["deform", "--count", "100", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    for row in csv_rows(&o) {
        assert_eq!(row.len(), 11);
        assert!(row[8].parse::<f64>().unwrap() < 1e-10);
    }
}

#[test]
fn grassmann_sample_statistics() {
    let a = g2calib(&["grassmann-sample", "--count", "4000", "--seed", "2"]);
    assert_eq!(
        a.stdout,
        g2calib(&["grassmann-sample", "--count", "4000", "--seed", "2"]).stdout
    );
    let v = json(&a);
    assert!(v["phi"]["mean"].as_f64().unwrap().abs() < 0.03);
    assert!(v["max_abs_phi"].as_f64().unwrap() <= 1.0);
    assert_ne!(
        a.stdout,
        g2calib(&["grassmann-sample", "--count", "4000", "--seed", "3"]).stdout
    );
}

#[test]
fn chi_flow_traces() {
    let column = |args: &[&str]| -> Vec<f64> {
        csv_rows(&g2calib(args))
            .iter()
            .map(|r| r[2].parse().unwrap())
            .collect()
    };
    let flat = column(&["chi-flow", "--n", "4", "--steps", "5", "--init", "flat"]);
    assert!(flat.iter().all(|d| *d == 0.0));
    let frozen = column(&["chi-flow", "--n", "4", "--steps", "5", "--dt", "0"]);
    assert!(frozen.windows(2).all(|w| w[0] == w[1]));
    let decaying = column(&["chi-flow", "--n", "8", "--steps", "50"]);
    assert_eq!(decaying.len(), 51);
    assert!(decaying.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn dirac_spectrum_is_symmetric() {
    let o = g2calib(&[
        "dirac", "--n", "4", "--twist", "0.3", "-0.5", "0.7", "--count", "8",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut values: Vec<f64> = csv_rows(&o).iter().map(|r| r[1].parse().unwrap()).collect();
    let mut negated: Vec<f64> = values.iter().map(|x| -x).collect();
    values.sort_by(f64::total_cmp);
    negated.sort_by(f64::total_cmp);
    for (a, b) in values.iter().zip(&negated) {
        assert!((a - b).abs() < 1e-10);
    }
    let v = json(&g2calib(&[
        "dirac", "--n", "4", "--format", "json", "--count", "8",
    ]));
    assert_eq!(v["kernel_dim"], 32);
    assert_eq!(v["physical_kernel_dim"], 4);
}

#[test]
fn sw_residual_of_zero_state_vanishes() {
    let o = g2calib(&["sw-residual", "--zero", "3", "--seed", "11"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["max_abs"], 0.0);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["version"], "0.1.0");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    let zeros4 = vec![[0.0; 4]; 8];
    let zeros3 = vec![[0.0; 3]; 8];
    let mut delta = zeros3.clone();
    delta[0] = [1.0, 0.0, 0.0];
    let state =
        serde_json::json!({"schema": 1, "n": 2, "v": zeros4, "theta": zeros3, "delta": delta});
    std::fs::write(&path, state.to_string()).unwrap();
    let v = json(&g2calib(&[
        "sw-residual",
        "--input",
        path.to_str().unwrap(),
    ]));
    assert_eq!(v["max_abs"], 1.0);
    assert_eq!(v["curvature"][0][0], 1.0);

    std::fs::write(&path, "{\"schema\": 1, \"n\": 2}").unwrap();
    assert_eq!(
        g2calib(&["sw-residual", "--input", path.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}
