//! End-to-end checks of the binary: exit codes, output formats and
//! reproducibility.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_steklov"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("missing field {key} in:\n{text}"))
        .parse()
        .expect("numeric field")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("steklov-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn minimize_quartic_reports_global_minimizer() {
    let out = run(&[
        "minimize",
        "--poly",
        "1,-8,-18,56,0",
        "--method",
        "steklov-quartic",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!((field(&text, "x") - 7.0).abs() < 1e-4);
    assert!((field(&text, "f") - -833.0).abs() < 1e-6);
    assert!((field(&text, "t0") - 21f64.sqrt()).abs() < 1e-9);
}

#[test]
fn minimize_builtin_sine_with_explicit_t0() {
    let out = run(&[
        "minimize",
        "--builtin",
        "quad_sine",
        "--method",
        "steklov",
        "--t0",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!((field(&text, "x") - -0.5167).abs() < 1e-3);
    assert!((field(&text, "x0") - -0.3896).abs() < 1e-3);
}

#[test]
fn minimize_quadratic_flags_local_minimum_when_verifying() {
    let out = run(&[
        "minimize",
        "--poly",
        "1,-8,-18,56,0",
        "--method",
        "quadratic",
        "--t0",
        "100",
        "--verify",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!((field(&text, "x") - -2.0).abs() < 1e-3);
    assert!(text.contains("local minimum (oracle check)"), "{text}");
}

#[test]
fn minimize_emits_json() {
    let out = run(&[
        "minimize",
        "--poly",
        "1,-8,-18,56,0",
        "--method",
        "steklov-quartic",
        "--out",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["status"], "reached-zero");
    assert!((doc["x"].as_f64().unwrap() - 7.0).abs() < 1e-4);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["minimize", "--method", "steklov"],
        vec![
            "minimize",
            "--poly",
            "1,2,3",
            "--builtin",
            "quad_sine",
            "--method",
            "steklov",
        ],
        vec!["minimize", "--builtin", "nope", "--method", "steklov"],
        vec!["minimize", "--poly", "1,0,0,0", "--method", "steklov"],
        vec!["minimize", "--poly", "2,0,0,0,0", "--method", "steklov"],
        vec!["minimize", "--poly", "1,2,3", "--method", "steklov-quartic"],
        vec![
            "bench",
            "--degrees",
            "5",
            "--samples",
            "1",
            "--method",
            "steklov",
        ],
        vec![
            "surface", "--poly", "1,0", "--t0", "1", "--xrange", "9:-4", "--out", "x.csv",
        ],
    ] {
        let out = run(&args);
        assert_eq!(
            out.status.code(),
            Some(1),
            "args {args:?}:\n{}",
            stdout(&out)
        );
    }
}

#[test]
fn failed_runs_exit_two() {
    // A generated degree-6 instance whose Steklov run at t0 = 7 hits a
    // singular denominator.
    let coeffs = "1,-4.210655520614582,-31.736765153616172,130.566295053449,254.62139734215575,-978.0950888895151,0";
    let out = run(&[
        "minimize", "--poly", coeffs, "--method", "steklov", "--t0", "7",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stdout(&out));
    assert!(stdout(&out).contains("status: singular-denominator"));
}

#[test]
fn bench_is_byte_identical_across_runs() {
    let csv_a = tmp("a.csv");
    let csv_b = tmp("b.csv");
    for (path, json) in [(&csv_a, tmp("a.json")), (&csv_b, tmp("b.json"))] {
        let out = run(&[
            "bench",
            "--degrees",
            "4",
            "--samples",
            "20",
            "--seed",
            "42",
            "--method",
            "both",
            "--out",
            path.to_str().unwrap(),
            "--out",
            json.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        assert!(stdout(&out).contains("Algorithm: steklov"));
    }
    let a = std::fs::read(&csv_a).unwrap();
    let b = std::fs::read(&csv_b).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(
        text.starts_with("method,degree,t0,samples,n_global,n_local,n_noconverge,failure_rate\n")
    );
    assert!(text.ends_with('\n'));
}

#[test]
fn bench_single_sample_has_binary_rate() {
    let out = run(&[
        "bench",
        "--degrees",
        "4",
        "--samples",
        "1",
        "--seed",
        "7",
        "--method",
        "steklov",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("0.0%") || text.contains("100.0%"), "{text}");
}

#[test]
fn surface_t_zero_row_equals_objective() {
    let path = tmp("surface.csv");
    let out = run(&[
        "surface",
        "--poly",
        "1,-8,-18,56,0",
        "--t0",
        "5",
        "--xrange",
        "-4:9",
        "--grid",
        "30,6",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,t,value");
    let f = |x: f64| ((x - 8.0) * x - 18.0) * x * x + 56.0 * x;
    let mut zero_rows = 0;
    for line in lines {
        let parts: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let (x, t, value) = (parts[0], parts[1], parts[2]);
        if t == 0.0 {
            zero_rows += 1;
            assert!((value - f(x)).abs() <= 1e-9 * (1.0 + f(x).abs()));
        }
    }
    assert_eq!(zero_rows, 30);
}

#[test]
fn surface_of_even_objective_is_symmetric_at_every_t() {
    let path = tmp("surface-even.csv");
    let out = run(&[
        "surface",
        "--poly",
        "1,0,-0.98,0,1",
        "--t0",
        "0.7",
        "--xrange",
        "-2:2",
        "--grid",
        "41,5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    // Row order is t-major: 5 blocks of 41 x-values each.
    for block in rows.chunks(41) {
        for k in 0..20 {
            let left = block[k][2];
            let right = block[40 - k][2];
            assert!(
                (left - right).abs() <= 1e-9 * (1.0 + left.abs()),
                "{left} vs {right}"
            );
        }
    }
}

#[test]
fn surface_sine_matches_independent_quadrature() {
    let path = tmp("surface-sine.csv");
    let out = run(&[
        "surface",
        "--builtin",
        "quad_sine",
        "--t0",
        "7",
        "--xrange",
        "-3:3",
        "--grid",
        "7,4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let f = |u: f64| 0.06 * u * u + (3.0 * u).sin();
    for line in text.lines().skip(1) {
        let parts: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let (x, t, value) = (parts[0], parts[1], parts[2]);
        if t == 0.0 {
            continue;
        }
        // Dense Simpson as an independent check.
        let n = 20_000;
        let h = 2.0 * t / n as f64;
        let mut acc = f(x - t) + f(x + t);
        for i in 1..n {
            let w = if i % 2 == 0 { 2.0 } else { 4.0 };
            acc += w * f(x - t + h * i as f64);
        }
        let reference = acc * h / 3.0 / (2.0 * t);
        assert!(
            (value - reference).abs() <= 1e-8 * (1.0 + value.abs()),
            "{value} vs {reference}"
        );
    }
}

#[test]
fn trajectory_csv_tracks_the_valley() {
    let path = tmp("trajectory.csv");
    let out = run(&[
        "trajectory",
        "--poly",
        "1,-8,-18,56,0",
        "--method",
        "steklov-quartic",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,x,mu_x,mu_xx");
    let rows: Vec<Vec<f64>> = lines
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let last = rows.last().unwrap();
    assert_eq!(last[0], 0.0);
    assert!((last[1] - 7.0).abs() < 1e-4);
    for row in &rows {
        assert!(
            row[2].abs() <= 1e-6 * 81.0,
            "mu_x = {} at t = {}",
            row[2],
            row[0]
        );
        assert!(row[3] > 0.0);
    }
}

#[test]
fn trajectory_of_convex_objective_stays_at_vertex() {
    let path = tmp("trajectory-convex.csv");
    let out = run(&[
        "trajectory",
        "--poly",
        "1,-6,9",
        "--method",
        "steklov",
        "--t0",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    for line in text.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let x: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((x - 3.0).abs() < 1e-6, "{line}");
    }
}

#[test]
fn trajectory_of_quadratic_method_uses_phi_columns() {
    let path = tmp("trajectory-phi.csv");
    let out = run(&[
        "trajectory",
        "--poly",
        "1,-8,-18,56,0",
        "--method",
        "quadratic",
        "--t0",
        "100",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,x,phi_x,phi_xx\n"));
    let last = text.lines().rev().find(|l| !l.starts_with('#')).unwrap();
    let x: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((x - -2.0).abs() < 1e-3);
}

#[test]
fn trajectory_records_failure_status_in_comment() {
    let path = tmp("trajectory-failed.csv");
    let coeffs = "1,-4.210655520614582,-31.736765153616172,130.566295053449,254.62139734215575,-978.0950888895151,0";
    let out = run(&[
        "trajectory",
        "--poly",
        coeffs,
        "--method",
        "steklov",
        "--t0",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(
        text.trim_end().ends_with("# status=singular-denominator"),
        "{text}"
    );
}
