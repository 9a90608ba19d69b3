use std::f64::consts::PI;
use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anyonsim"))
        .args(args)
        .env_remove("ANYONSIM_BUDGET")
        .output()
        .expect("binary runs")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok_stdout(args)).unwrap()
}

fn failure(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(2), "{args:?} should exit with 2");
    assert!(out.stdout.is_empty());
    String::from_utf8(out.stderr).unwrap()
}

fn path_file(body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

const SQUARE_LOOP: &str = r#"{"dt": 1.0, "configs": [
    [[0,0],[1,0]], [[0,0],[0,1]], [[0,0],[-1,0]], [[0,0],[0,-1]], [[0,0],[1,0]]
]}"#;

const HALF_TURN: &str = r#"{"dt": 0.5, "configs": [
    [[1,0],[-1,0]], [[0,1],[0,-1]], [[-1,0],[1,0]]
]}"#;

#[test]
fn winding_of_square_loop_and_half_turn() {
    let f = path_file(SQUARE_LOOP);
    let v = json(&["winding", f.path().to_str().unwrap()]);
    assert_eq!(v["kind"], "Direct");
    assert_eq!(v["winding"], 1.0);
    assert!((v["total_angle"].as_f64().unwrap() - 2.0 * PI).abs() < 1e-12);

    let f = path_file(HALF_TURN);
    let v = json(&["winding", f.path().to_str().unwrap()]);
    assert_eq!(v["kind"], "Exchange");
    assert_eq!(v["winding"], 0.5);

    let csv = ok_stdout(&["winding", f.path().to_str().unwrap(), "--format", "csv"]);
    assert_eq!(
        csv,
        "kind,winding,total_angle\nExchange,0.5,3.14159265359\n"
    );
}

#[test]
fn invalid_paths_exit_with_code_two() {
    let f = path_file(r#"{"dt": 1.0, "configs": [[[0,0],[1,0]], [[1,1],[1,1]]]}"#);
    let err = failure(&["winding", f.path().to_str().unwrap()]);
    assert!(err.contains("CoincidenceAtStep(1)"), "{err}");
    assert_eq!(err.lines().count(), 1);

    let f = path_file(r#"{"dt": 1.0, "configs": [[[1,0],[0,0]], [[-1,0],[0,0]]]}"#);
    assert!(failure(&["winding", f.path().to_str().unwrap()]).contains("TurnTooLargeAtStep(0)"));

    let f = path_file("not json");
    assert!(failure(&["winding", f.path().to_str().unwrap()]).contains("ParseError"));

    let f = path_file(r#"{"dt": 1.0, "configs": [[[0,0],[1,0]], [[0,0],[2,0]]]}"#);
    assert!(
        failure(&["winding", f.path().to_str().unwrap()]).contains("EndpointsNotClosedOrExchanged")
    );

    assert!(failure(&["winding", "/nonexistent/path.json"]).contains("/nonexistent/path.json"));
}

#[test]
fn one_step_kernel_is_the_stationary_walk() {
    let v = json(&[
        "kernel",
        "--extent",
        "2",
        "--steps",
        "1",
        "--start",
        "0,0,2,0",
        "--end",
        "0,0,2,0",
        "--resolve",
    ]);
    assert_eq!(v["walk_count"], 1);
    assert_eq!(v["total"]["re"], 1.0);
    assert_eq!(v["total"]["im"], 0.0);
    let partials = v["partials"].as_array().unwrap();
    assert_eq!(partials.len(), 1);
    assert_eq!(partials[0]["winding"], 0.0);
}

#[test]
fn theta_zero_reproduces_the_partition_total() {
    let v = json(&[
        "kernel",
        "--extent",
        "1",
        "--steps",
        "4",
        "--start",
        "0,0,1,0",
        "--end",
        "1,0,0,0",
        "--theta",
        "0",
        "--resolve",
        "--dt",
        "0.7",
    ]);
    assert_eq!(v["weighted"], v["partition_total"]);
    let t = &v["total"];
    let p = &v["partition_total"];
    let d = (t["re"].as_f64().unwrap() - p["re"].as_f64().unwrap())
        .hypot(t["im"].as_f64().unwrap() - p["im"].as_f64().unwrap());
    assert!(d < 1e-12);
    let windings: Vec<f64> = v["partials"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["winding"].as_f64().unwrap())
        .collect();
    assert!(windings.contains(&0.5) && windings.contains(&-0.5));
}

#[test]
fn generic_endpoints_only_report_the_total() {
    let v = json(&[
        "kernel", "--extent", "2", "--steps", "2", "--start", "0,0,1,0", "--end", "0,1,1,0",
    ]);
    assert!(v.get("partials").is_none());
    assert!(v["total"]["re"].is_number());
    let err = failure(&[
        "kernel",
        "--extent",
        "2",
        "--steps",
        "2",
        "--start",
        "0,0,1,0",
        "--end",
        "0,1,1,0",
        "--resolve",
    ]);
    assert!(err.contains("EndpointsNotClosedOrExchanged"), "{err}");
}

#[test]
fn kernel_errors() {
    let err = failure(&[
        "kernel", "--extent", "3", "--steps", "5", "--start", "0,0,1,0", "--end", "0,0,1,0",
        "--budget", "10",
    ]);
    assert!(err.contains("BudgetExceeded"), "{err}");
    let err = failure(&[
        "kernel",
        "--extent",
        "2",
        "--steps",
        "2",
        "--start",
        "0.5,0,1,0",
        "--end",
        "0.5,0,1,0",
    ]);
    assert!(err.contains("EndpointOffLattice"), "{err}");

    let out = Command::new(env!("CARGO_BIN_EXE_anyonsim"))
        .args([
            "kernel", "--extent", "3", "--steps", "5", "--start", "0,0,1,0", "--end", "0,0,1,0",
        ])
        .env("ANYONSIM_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_over_half_a_period() {
    let two_pi = (2.0 * PI).to_string();
    let csv = ok_stdout(&[
        "sweep",
        "--theta-min",
        "0",
        "--theta-max",
        &two_pi,
        "--points",
        "3",
    ]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("theta,op_class,phi,re_amp,im_amp"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    let phis: Vec<(&str, f64)> = rows.iter().map(|r| (r[1], r[2].parse().unwrap())).collect();
    let expected = [
        ("boson", 0.0),
        ("fermion", PI),
        ("boson", PI / 2.0),
        ("fermion", 3.0 * PI / 2.0),
        ("boson", PI),
        ("fermion", 0.0),
    ];
    for ((cls, phi), (ecls, ephi)) in phis.iter().zip(expected) {
        assert_eq!(*cls, ecls);
        assert!((phi - ephi).abs() < 1e-9, "{cls} {phi} vs {ephi}");
    }
    assert!(failure(&["sweep", "--points", "0"]).contains("BadRange"));
}

#[test]
fn exchange_command() {
    let v = json(&["exchange", "--theta", "0", "--op-class", "fermion"]);
    assert_eq!(v["winding"], 0.5);
    assert_eq!(v["flips"], 1);
    assert!((v["phi"].as_f64().unwrap() - PI).abs() < 1e-12);
    let v = json(&["exchange", "--theta", &PI.to_string(), "--cw"]);
    assert_eq!(v["winding"], -0.5);
    assert!((v["phi"].as_f64().unwrap() - 3.0 * PI / 2.0).abs() < 1e-9);
    assert!(failure(&["exchange", "--op-class", "both"]).contains("BadArgument"));
}

#[test]
fn dephase_command() {
    let v = json(&["dephase"]);
    let slope = v["slope"].as_f64().unwrap();
    assert!((slope - 4.0).abs() / 4.0 < 0.01, "{slope}");
    assert_eq!(v["predicted"], 4.0);
    let v = json(&["dephase", "--separation", "4"]);
    let slope = v["slope"].as_f64().unwrap();
    assert!((slope - 16.0).abs() / 16.0 < 0.01, "{slope}");
    let err = failure(&["dephase", "--dt-grid", "0.1,0.05"]);
    assert!(err.contains("DegenerateGrid"), "{err}");
}

#[test]
fn output_is_reproducible() {
    let args = [
        "kernel",
        "--extent",
        "2",
        "--steps",
        "4",
        "--start",
        "0,0,1,0",
        "--end",
        "1,0,0,0",
        "--resolve",
        "--theta",
        "1.3",
    ];
    let first = ok_stdout(&args);
    assert_eq!(first, ok_stdout(&args));
    let mut parallel = args.to_vec();
    parallel.extend(["--workers", "4"]);
    assert_eq!(first, ok_stdout(&parallel));

    let sweep = ["sweep", "--points", "17"];
    assert_eq!(ok_stdout(&sweep), ok_stdout(&sweep));
}
