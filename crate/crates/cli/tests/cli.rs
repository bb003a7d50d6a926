//! Golden tests for the command-line surface.

use std::path::PathBuf;
use std::process::{Command, Output};

fn alex3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alex3"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 output")
}

fn write_temp(name: &str, content: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("alex3-test-{}-{name}", std::process::id()));
    std::fs::write(&path, content).expect("temp file writable");
    path
}

#[test]
fn normalize_golden() {
    let out = alex3(&["normalize", "double(B(pt))"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "Susp(P2) # Susp(P2)\n");

    let out = alex3(&["normalize", "S3 # Susp(P2) # S3"]);
    assert_eq!(stdout(&out), "Susp(P2)\n");

    let out = alex3(&["normalize", "S3"]);
    assert_eq!(stdout(&out), "S3\n");
}

#[test]
fn compare_reports_certificates() {
    let out = alex3(&["compare", "Q #^{q1,q1} Q", "Q #^{q2,q2} Q"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("No: colored P2-graph certificate"));

    let out = alex3(&["compare", "glue(K(P2),K(P2))", "glue(D3,B(S2))"]);
    assert_eq!(stdout(&out), "Yes\n");

    let out = alex3(&[
        "--format",
        "machine",
        "compare",
        "S3",
        "Susp(P2)",
    ]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "verdict: no");
    assert_eq!(lines[1], "certificate: singular-count");
    assert_eq!(lines[2], "left: 0");
    assert_eq!(lines[3], "right: 2");
}

#[test]
fn enumerate_gluings_emits_six_lines_four_classes() {
    let out = alex3(&["enumerate-gluings"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    let mut classes: Vec<&str> =
        lines.iter().map(|l| l.split(" -> ").nth(1).unwrap()).collect();
    classes.sort();
    classes.dedup();
    assert_eq!(classes.len(), 4);
}

#[test]
fn invariants_golden() {
    let out = alex3(&["invariants", "Susp(P2) # Susp(P2)"]);
    assert_eq!(
        stdout(&out),
        "expr: Susp(P2) # Susp(P2)\nsingular_count: 4\nh1: Z/2 + Z/2\nmanifold: false\norientable: false\nprime: false\nirreducible: false\n"
    );
}

#[test]
fn machine_format_is_line_oriented() {
    let out = alex3(&["--format", "machine", "normalize", "double(B(pt))"]);
    assert_eq!(
        stdout(&out),
        "normal_form: Susp(P2) # Susp(P2)\nclusters: 2\nmanifold_summands: 0\ns2_bundles: 0\n"
    );
    let out = alex3(&["--format", "machine", "enumerate-gluings"]);
    assert!(stdout(&out).starts_with("D3+D3: S3\n"));
}

#[test]
fn graph_text_mode_appends_a_dot_rendering() {
    let out = alex3(&["graph", "Q"]);
    let text = stdout(&out);
    assert!(text.contains("graph p2 {"));
    assert!(text.contains("--"));
    let machine = stdout(&alex3(&["--format", "machine", "graph", "Q"]));
    assert!(!machine.contains("graph p2 {"));
    assert!(machine.lines().count() >= 6);

    // Unknown graph data is a value, not an error.
    let out = alex3(&["graph", "Xg(1)"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("unknown"));
}

#[test]
fn output_is_deterministic() {
    let a = stdout(&alex3(&["normalize", "Q #^{q3,q4} Q # S2~S1 # Susp(P2)"]));
    let b = stdout(&alex3(&["normalize", "Q #^{q3,q4} Q # S2~S1 # Susp(P2)"]));
    assert_eq!(a, b);
    let a = stdout(&alex3(&["catalog"]));
    let b = stdout(&alex3(&["catalog"]));
    assert_eq!(a, b);
}

#[test]
fn domain_errors_exit_one_usage_errors_exit_two() {
    let out = alex3(&["normalize", "NoSuchAtom"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty(), "no partial output on failure");
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown atom"));

    let out = alex3(&["cover", "S2xS1"]);
    assert_eq!(out.status.code(), Some(1));

    let out = alex3(&["definitely-not-a-subcommand"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn user_catalogs_merge() {
    let path = write_temp(
        "user.cat",
        "atom gadget\nsite a\nsite b\nflag prime true\nflag irreducible true\nend\n",
    );
    let out = alex3(&[
        "--catalog",
        path.to_str().unwrap(),
        "invariants",
        "gadget # S3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("singular_count: 2"));

    let bad = write_temp("bad.cat", "atom S3\nend\n");
    let out = alex3(&["--catalog", bad.to_str().unwrap(), "normalize", "S3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("redefine"));

    std::fs::remove_file(path).ok();
    std::fs::remove_file(bad).ok();
}

#[test]
fn verify_cover_files() {
    let good = write_temp(
        "good.cover",
        "piece A sheets 1 over Base\npiece B sheets 1 over Base\nmatch A.x B.x\n",
    );
    let out = alex3(&["verify-cover", good.to_str().unwrap()]);
    assert_eq!(stdout(&out), "valid: true\n");

    let bad = write_temp("bad.cover", "piece A sheets 1 over Base\n");
    let out = alex3(&["verify-cover", bad.to_str().unwrap()]);
    assert_eq!(stdout(&out), "valid: false\n");

    std::fs::remove_file(good).ok();
    std::fs::remove_file(bad).ok();
}

#[test]
fn surgery_files_round_trip() {
    let desc = write_temp("surg.desc", "base S2~S1\nbpt 1\n");
    let out = alex3(&["surgery", "check", desc.to_str().unwrap()]);
    assert_eq!(stdout(&out), "ok\n");
    let out = alex3(&["surgery", "realize", desc.to_str().unwrap()]);
    assert_eq!(stdout(&out), "Susp(P2)\n");

    let bad = write_temp("bad.desc", "base S3\ncomponent k torus 2/0\n");
    let out = alex3(&["surgery", "check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    // Skeleton output is itself a valid description file.
    let out = alex3(&["surgery", "skeleton", "Susp(P2) # Susp(P2)"]);
    let skeleton = write_temp("skeleton.desc", &stdout(&out));
    let out = alex3(&["surgery", "check", skeleton.to_str().unwrap()]);
    assert_eq!(stdout(&out), "ok\n");

    std::fs::remove_file(desc).ok();
    std::fs::remove_file(bad).ok();
    std::fs::remove_file(skeleton).ok();
}

#[test]
fn self_test_is_seed_deterministic() {
    let a = alex3(&["self-test", "--seed", "7"]);
    assert!(a.status.success());
    let b = alex3(&["self-test", "--seed", "7"]);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("self-test passed (seed 7)"));
}
