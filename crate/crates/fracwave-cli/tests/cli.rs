use std::process::{Command, Output};

fn fracwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracwave"))
        .args(args)
        .env_remove("FRACWAVE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn fracderiv_prints_reference_value() {
    let out = fracwave(&["fracderiv", "--alpha", "0.5", "--power", "1", "--z", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "1.1283791671\n");
}

#[test]
fn quadrature_agrees_with_power_rule() {
    let rule = fracwave(&["fracderiv", "--alpha", "0.75", "--power", "2", "--z", "0.5"]);
    let quad = fracwave(&[
        "fracderiv",
        "--alpha",
        "0.75",
        "--power",
        "2",
        "--z",
        "0.5",
        "--method",
        "quadrature",
    ]);
    let a: f64 = stdout(&rule).trim().parse().unwrap();
    let b: f64 = stdout(&quad).trim().parse().unwrap();
    assert!((a - b).abs() < 1e-4, "{a} vs {b}");
}

#[test]
fn eval_emits_documented_csv_shape() {
    let args = [
        "eval", "burgers", "--family", "T2tanh", "--alpha", "1", "--beta", "1", "--k", "1",
        "--A", "1", "--p", "-1", "--q", "1", "--grid", "x:-5:5:101,t:0:1:11",
    ];
    let out = fracwave(&args);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,t,u");
    assert_eq!(*lines.last().unwrap(), "# skipped: 0");
    assert_eq!(lines.len(), 1 + 101 * 11 + 1);
    // Monotone shock profile in x within the first time block.
    let first_t: Vec<f64> = lines[1..=101]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(first_t.windows(2).all(|w| w[0] < w[1]));
    for line in &lines[1..lines.len() - 1] {
        assert!(!line.contains("NaN") && !line.contains("inf"), "{line}");
    }
    // Identical requests produce byte-identical artifacts.
    assert_eq!(stdout(&fracwave(&args)), text);
}

#[test]
fn eval_skips_points_outside_the_fractional_domain() {
    let out = fracwave(&[
        "eval", "burgers", "--family", "T2tanh", "--alpha", "0.5", "--beta", "0.5",
        "--grid", "x:-1:1:5,t:0:1:3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    // Two negative x nodes per time level are rejected by the fractional
    // power and omitted from the body.
    assert!(text.ends_with("# skipped: 6\n"), "{text}");
    assert_eq!(text.lines().count(), 1 + (5 - 2) * 3 + 1);
}

#[test]
fn eval_rejects_constraint_violations_before_work() {
    let out = fracwave(&[
        "eval", "burgers", "--family", "T2tanh", "--p", "1", "--q", "1",
        "--grid", "x:0:1:3,t:0:1:3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(err["error"].as_str().unwrap().contains("p*q"));
}

#[test]
fn unknown_branch_is_a_domain_error() {
    let out = fracwave(&["eval", "burgers", "--family", "T9", "--grid", "x:0:1:3,t:0:1:3"]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(err["error"].as_str().unwrap().contains("T9"));
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let out = fracwave(&["eval", "burgers"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_is_deterministic_per_seed() {
    let a = fracwave(&["verify", "--equation", "burgers", "--seed", "7"]);
    let b = fracwave(&["verify", "--equation", "burgers", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    let c = fracwave(&["verify", "--equation", "burgers", "--seed", "8"]);
    assert_ne!(stdout(&a), stdout(&c));
    let env = Command::new(env!("CARGO_BIN_EXE_fracwave"))
        .args(["verify", "--equation", "burgers"])
        .env("FRACWAVE_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(stdout(&a), String::from_utf8(env.stdout).unwrap());
}

#[test]
fn derive_reports_the_expected_coefficient() {
    let out = fracwave(&["derive", "burgers"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["N"], 1);
    assert_eq!(report["system"].as_array().unwrap().len(), 3);
    let sets = report["param_sets"].as_array().unwrap();
    assert!(sets.iter().any(|s| {
        s["assignments"]["A1"] == "A*k*p" && s["verification"]["verdict"] == "all-zero"
    }));
}

#[test]
fn classical_check_passes_for_the_shock_family() {
    let out = fracwave(&[
        "verify", "--classical", "--equation", "burgers", "--family", "T2tanh",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["verdict"], "pass");
}

#[test]
fn classical_check_rejects_fractional_orders() {
    let out = fracwave(&[
        "verify", "--classical", "--equation", "burgers", "--family", "T2tanh",
        "--alpha", "0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(err["error"].as_str().unwrap().contains("alpha"));
}

#[test]
fn list_covers_the_whole_catalog() {
    let out = fracwave(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let listings: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(listings.as_array().unwrap().len(), 44);
    let one = fracwave(&["list", "sawada-kotera"]);
    let subset: serde_json::Value = serde_json::from_str(&stdout(&one)).unwrap();
    assert_eq!(subset.as_array().unwrap().len(), 17);
}

#[test]
fn second_recipe_set_is_addressable() {
    let out = fracwave(&[
        "eval", "sawada-kotera", "--family", "T1a", "--set", "set2",
        "--grid", "x:0:1:5,t:0:1:3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("x,t,u\n"));
    assert!(text.ends_with("# skipped: 0\n"), "{text}");
}

#[test]
fn config_file_supplies_the_grid() {
    let dir = std::env::temp_dir().join("fracwave-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        r#"{ "grid": { "x0": 0.0, "x1": 1.0, "t0": 0.0, "t1": 1.0, "nx": 3, "nt": 3 } }"#,
    )
    .unwrap();
    let out = fracwave(&[
        "eval", "burgers", "--family", "T2tanh", "--config", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 1 + 9 + 1);
}
