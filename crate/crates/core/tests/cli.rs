use std::path::Path;
use std::process::{Command, Output};

fn rhombex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rhombex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", &path]);
    let out = rhombex(&full);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

#[test]
fn square_is_certified_convex() {
    let dir = tempfile::tempdir().unwrap();
    let map = gen(
        dir.path(),
        "s.json",
        &["--kind", "square", "--width", "3", "--height", "2"],
    );
    let out = rhombex(&["check", &map, "--require-convex"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "CONVEX");
}

#[test]
fn u_shape_fails_require_convex_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let map = gen(dir.path(), "u.json", &["--kind", "ushape"]);
    let plain = rhombex(&["check", &map]);
    assert_eq!(plain.status.code(), Some(0));
    let out = rhombex(&["check", &map, "--require-convex"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("NONCONVEX "));
}

#[test]
fn exponential_at_a_pole_names_the_track() {
    let dir = tempfile::tempdir().unwrap();
    let map = gen(dir.path(), "s.json", &["--kind", "square"]);
    let out = rhombex(&["exp", &map, "--lambda", "2,0"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("pole") && err.contains("train-track 0"),
        "{err}"
    );
}

#[test]
fn converge_matches_the_closed_form_on_the_diagonal() {
    // along the diagonal of refined unit squares Exp(1, 1) = ((1 + δ/2) / (1 - δ/2))^(1/δ)
    let out = rhombex(&["converge", "--lambda", "1,0", "--x", "1,0", "--levels", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    for row in rows.iter().take(4) {
        let delta: f64 = row[0].parse().unwrap();
        let value: f64 = row[1].parse().unwrap();
        let exact = ((1.0 + delta / 2.0) / (1.0 - delta / 2.0)).powf(1.0 / delta);
        assert!((value - exact).abs() < 1e-9, "{delta}: {value} vs {exact}");
    }
    let order: f64 = rows[4][1].parse().unwrap();
    assert!((order - 2.0).abs() < 0.2, "order {order}");
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(
        dir.path(),
        "a.json",
        &["--kind", "multigrid", "--seed", "7"],
    );
    let b = gen(
        dir.path(),
        "b.json",
        &["--kind", "multigrid", "--seed", "7"],
    );
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let first = stdout(&rhombex(&["spectrum", &a]));
    assert_eq!(first, stdout(&rhombex(&["spectrum", &b])));
    let svg = dir.path().join("m.svg");
    let out = rhombex(&["render", &a, "-o", svg.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(svg).unwrap().starts_with("<svg"));
}

#[test]
fn tolerance_must_be_positive() {
    let out = rhombex(&["--tol", "-1", "converge", "--lambda", "1,0", "--x", "1,0"]);
    assert_eq!(out.status.code(), Some(2));
}
