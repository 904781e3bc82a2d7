use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadclass"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn classno_prints_the_class_number() {
    let o = run(&["classno", "-53"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("h = 6"), "{out}");
    assert!(out.contains("method = form-count"));

    let o = run(&["classno", "321"]);
    let out = stdout(&o);
    assert!(out.contains("h = 3"), "{out}");
    assert!(out.contains("unit norm"));
}

#[test]
fn classno_rejects_squares_and_garbage() {
    let o = run(&["classno", "16"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("perfect square"));
    assert_eq!(run(&["classno", "x7"]).status.code(), Some(2));
}

#[test]
fn gen_prints_instance_and_certificate() {
    let o = run(&[
        "gen",
        "thm2_2",
        "--m",
        "3",
        "--n",
        "3",
        "--sign",
        "-",
        "--class-number",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("raw_d = -23"), "{out}");
    assert!(out.contains("h = 3"), "{out}");

    let o = run(&["gen", "Thm3.1-I", "--m", "9"]);
    assert!(stdout(&o).contains("raw_d = -8751"));

    assert_eq!(run(&["gen", "thm3_2", "--m", "4"]).status.code(), Some(2));
    assert_eq!(
        run(&["gen", "thm3_2", "--m", "5", "--k", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["gen", "thm9", "--m", "5"]).status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let o = run(&["verify", "--table", "7", "--jobs", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("table 7: 38 rows; OK: 38"));

    let o = run(&["verify", "--table", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("D_MISMATCH"));

    assert_eq!(run(&["verify", "--table", "8"]).status.code(), Some(2));
    assert_eq!(run(&["verify"]).status.code(), Some(2));
}

#[test]
fn verify_json_lines() {
    let o = run(&["verify", "--table", "5", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[0]["raw_d"], -231);
    assert_eq!(lines[0]["status"], "D_MISMATCH");
    assert_eq!(lines[6]["status"], "OK");
}

#[test]
fn verify_reads_fixture_directory() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("fixtures-cli");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("table7.csv"), "m,d,h\n3,-53,6\n5,-249,12\n").unwrap();
    let o = run(&[
        "verify",
        "--table",
        "7",
        "--fixtures",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("table 7: 2 rows; OK: 2"));

    std::fs::write(dir.join("table6.csv"), "m,d,h\n3,-327\n").unwrap();
    let o = run(&[
        "verify",
        "--table",
        "6",
        "--fixtures",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = run(&[
        "verify",
        "--table",
        "3",
        "--fixtures",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_reports_summary() {
    let o = run(&["sweep", "thm3_2", "--range", "m=3..21"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verified 10, skipped 0, rejected 9, counterexamples 0"));

    let o = run(&[
        "sweep", "thm2_3", "--range", "m=3..3", "--range", "n=1..1", "--range", "p=1..1",
        "--range", "r=-2..4",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("CERTIFICATE_FAILURE"));

    assert_eq!(
        run(&["sweep", "thm3_2", "--range", "m3"]).status.code(),
        Some(2)
    );
}
