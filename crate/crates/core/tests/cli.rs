use std::process::Command;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hjmoment"));
    cmd.env_remove("HJMOMENT_OUT_DIR");
    cmd
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn study_prints_csv_with_second_order() {
    let (code, stdout, _) = run(&[
        "study", "--problem", "1d-ex1", "--scheme", "ho", "--bc", "lin", "--levels", "100,300,600", "--no-timing",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "level,J,h,error,order,cutoff,iterations,seconds");
    assert_eq!(lines.len(), 4);
    for line in &lines[2..] {
        let order: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!((order - 2.0).abs() < 0.1, "{line}");
    }
}

#[test]
fn study_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = |name: &str| {
        vec![
            "study".to_string(),
            "--problem".into(),
            "2d-ex2".into(),
            "--scheme".into(),
            "mod".into(),
            "--c".into(),
            "1".into(),
            "--levels".into(),
            "10,15,20".into(),
            "--no-timing".into(),
            "--out".into(),
            dir.path().join(name).to_string_lossy().into_owned(),
        ]
    };
    assert!(bin().args(args("a.csv")).status().unwrap().success());
    assert!(bin().args(args("b.csv")).status().unwrap().success());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn solve_reports_cutoff() {
    let (code, stdout, _) = run(&["solve", "--problem", "2d-ex1", "--scheme", "mod", "--c", "0.1", "--n", "8"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("cutoff     yes"), "{stdout}");
}

#[test]
fn verify_passes() {
    let (code, stdout, _) = run(&["verify"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 6);
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(run(&["solve", "--problem", "1d-ex1"]).0, 2);
    assert_eq!(run(&["solve", "--problem", "1d-ex1", "--scheme", "upwind", "--n", "10"]).0, 2);
    assert_eq!(run(&["solve", "--problem", "nope", "--n", "10"]).0, 2);
    assert_eq!(run(&["solve", "--problem", "1d-ex1", "--n", "3"]).0, 2);
    assert_eq!(run(&["solve", "--problem", "1d-ex1", "--n", "10", "--p", "2"]).0, 2);
    assert_eq!(run(&["study", "--problem", "1d-ex1", "--levels", "40,20"]).0, 2);
}

#[test]
fn non_convergence_exits_1() {
    let (code, _, stderr) = run(&["solve", "--problem", "1d-ex1", "--n", "50", "--tol", "1e-300"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("did not converge"), "{stderr}");
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .env("HJMOMENT_OUT_DIR", dir.path())
        .args(["solve", "--problem", "1d-ex2", "--scheme", "ho", "--n", "20"])
        .output()
        .unwrap();
    assert!(status.status.success());
    let body = std::fs::read_to_string(dir.path().join("1d-ex2-ho-20.csv")).unwrap();
    assert_eq!(body.lines().next(), Some("x,u,exact"));
    assert_eq!(body.lines().count(), 21);
}
