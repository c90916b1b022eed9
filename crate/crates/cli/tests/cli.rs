use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
        .display()
        .to_string()
}

fn cityfreight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cityfreight"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn evaluate_prints_layers_and_total() {
    let b = scenario("bordeaux.scenario");
    let o = cityfreight(&[
        "evaluate",
        "--scenario",
        &b,
        "--scheme",
        "ucc",
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(
        rows[0],
        "scope,tours,deliveries,distance_km,time_h,distance_cost,time_cost,transport_cost,handling_cost,total_cost,external_cost,fill_rate_pct"
    );
    assert_eq!(rows.len(), 4);
    assert!(rows[2].starts_with("ucc-pos,"));
    assert!(rows[3].starts_with("total,14,84.00,545.89,"));
    // handling at the center: 84 deliveries at 10 each
    assert_eq!(rows[3].split(',').nth(8), Some("840.00"));
}

#[test]
fn compare_puts_the_baseline_first() {
    let b = scenario("bordeaux.scenario");
    let o = cityfreight(&[
        "compare",
        "--scenario",
        &b,
        "--schemes",
        "ucc,pi,original",
        "--baseline",
        "original",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    let col = |name: &str| rows[0].iter().position(|c| *c == name).unwrap();
    assert_eq!(rows[1][0], "original");
    assert_eq!(rows[1][col("delta_transport_cost_pct")], "0.00");
    for row in &rows[2..] {
        assert!(
            row[col("delta_transport_cost_pct")].starts_with('-'),
            "{row:?}"
        );
    }
    assert!(rows[0].iter().filter(|c| c.starts_with("delta_")).count() >= 5);
}

#[test]
fn compare_json_keeps_full_precision() {
    let b = scenario("bordeaux.scenario");
    let o = cityfreight(&["compare", "--scenario", &b, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let d = rows[0]["total"]["distance_km"].as_f64().unwrap();
    assert!((d * 100.0).fract().abs() > 0.0, "{d}");
}

#[test]
fn sweep_marks_infeasible_rows() {
    let b = scenario("bordeaux.scenario");
    let o = cityfreight(&[
        "sweep",
        "--scenario",
        &b,
        "--scheme",
        "pi",
        "--layer",
        "2",
        "--param",
        "lead_time_h",
        "--range",
        "0.25:1.25:0.25",
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0][0], "lead_time_h");
    assert_eq!(rows[0][1], "status");
    let infeasible: Vec<&str> = rows[1..]
        .iter()
        .filter(|r| r[1] == "infeasible")
        .map(|r| r[0])
        .collect();
    assert!(!infeasible.is_empty());
    // the infeasible rows form a prefix
    assert_eq!(
        infeasible,
        rows[1..=infeasible.len()]
            .iter()
            .map(|r| r[0])
            .collect::<Vec<_>>()
    );
    assert!(rows.iter().all(|r| r.len() == rows[0].len()));
}

#[test]
fn optimize_reports_mass_shares() {
    let s1 = scenario("bordeaux_supplier1.scenario");
    let o = cityfreight(&[
        "optimize",
        "--scenario",
        &s1,
        "--scheme",
        "direct",
        "--layer",
        "1",
        "--vehicles",
        "25t-F,17t-F,2.3t-F",
        "--seed",
        "3",
        "--oracle",
        "--trace",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let shares: Vec<f64> = v["mass_share"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!(shares[1] >= 0.95, "{shares:?}");
    assert!(v["annealing"]["trace"]
        .as_array()
        .is_some_and(|t| !t.is_empty()));
    assert!(v["grid"]["objective"].as_f64().is_some());
}

#[test]
fn identical_invocations_are_byte_identical() {
    let b = scenario("bordeaux.scenario");
    let runs: [&[&str]; 3] = [
        &["compare", "--scenario", &b, "--format", "json"],
        &[
            "optimize",
            "--scenario",
            &b,
            "--scheme",
            "pi-small",
            "--layer",
            "2",
            "--vehicles",
            "25t-T,17t-T,2.3t-T",
            "--seed",
            "9",
            "--trace",
        ],
        &[
            "sweep",
            "--scenario",
            &b,
            "--scheme",
            "pi",
            "--layer",
            "2",
            "--param",
            "speed_kmh",
            "--range",
            "15:30:5",
        ],
    ];
    for args in runs {
        let (a, c) = (cityfreight(args), cityfreight(args));
        assert!(a.status.success());
        assert_eq!(a.stdout, c.stdout, "{args:?}");
    }
}

#[test]
fn output_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out: PathBuf = dir.path().join("r.csv");
    let b = scenario("bordeaux.scenario");
    let o = cityfreight(&[
        "evaluate",
        "--scenario",
        &b,
        "--scheme",
        "pi",
        "--format",
        "csv",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("scope,"));

    let bad = dir.path().join("missing/dir/r.csv");
    let o = cityfreight(&[
        "evaluate",
        "--scenario",
        &b,
        "--scheme",
        "pi",
        "--output",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes_follow_the_error_class() {
    let b = scenario("bordeaux.scenario");
    assert_eq!(
        cityfreight(&["validate", "--scenario", &b]).status.code(),
        Some(0)
    );
    assert_eq!(
        cityfreight(&["validate", "--scenario", "/nonexistent.scenario"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cityfreight(&["evaluate", "--scenario", &b, "--scheme", "nope"])
            .status
            .code(),
        Some(2)
    );

    // a lead time this short has no tour plan
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(&b).unwrap().replace(
        "city_params = { radius_km = 5.0 }",
        "city_params = { radius_km = 5.0, lead_time_h = 0.25 }",
    );
    let path = dir.path().join("tight.scenario");
    std::fs::write(&path, text).unwrap();
    std::fs::copy(
        Path::new(&b).with_file_name("bordeaux_demand.csv"),
        dir.path().join("bordeaux_demand.csv"),
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let o = cityfreight(&["evaluate", "--scenario", p, "--scheme", "pi"]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("infeasible error"));
    // compare keeps going and marks the row
    let o = cityfreight(&["compare", "--scenario", p, "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.starts_with("pi,infeasible,")));

    let o = cityfreight(&[
        "sweep",
        "--scenario",
        &b,
        "--scheme",
        "pi",
        "--layer",
        "9",
        "--param",
        "speed_kmh",
        "--range",
        "1:2:1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = cityfreight(&[
        "sweep",
        "--scenario",
        &b,
        "--scheme",
        "pi",
        "--layer",
        "2",
        "--param",
        "speed_kmh",
        "--range",
        "1:2",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_rejects_the_invalid_corpus() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/invalid");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let class = path
            .file_stem()
            .unwrap()
            .to_str()
            .unwrap()
            .split('_')
            .next()
            .unwrap()
            .to_string();
        let o = cityfreight(&["validate", "--scenario", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{}", path.display());
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.starts_with(&format!("{class} error at ")), "{err}");
    }
}
