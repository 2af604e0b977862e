use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TORUS: &str = "4 2 : 3,4,1,2,0 ; 1,4,3,2,0 ; 1,2,3,4,0";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slit-homology"))
        .args(args)
        .env_remove("SLIT_CACHE")
        .env_remove("SLIT_LONG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn err(args: &[&str]) -> String {
    let out = run(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

#[test]
fn cell_counts() {
    let out = ok(&["cells", "--h", "2"]);
    assert!(out.lines().any(|l| l.trim() == "total 8"), "{out}");
}

#[test]
fn torus_with_one_puncture() {
    let out = ok(&["homology", "--g", "1", "--m", "1"]);
    assert!(out.contains("H_0 = Z\n"));
    assert!(out.contains("H_1 = Z\n"));
    assert!(out.contains("H_2 = Z/2\n"));

    let json = ok(&["homology", "--g", "1", "--m", "1", "--json"]);
    let rec: serde_json::Value = serde_json::from_str(json.trim()).unwrap();
    assert_eq!(rec["coeff"], "z");
    assert_eq!(rec["H"][2]["torsion"], serde_json::json!([2]));
    assert_eq!(rec["H"][1]["free"], 1);
}

#[test]
fn numbered_punctures() {
    let out = ok(&["homology", "--g", "1", "--m", "2", "--non-permutable"]);
    for line in ["H_0 = Z", "H_1 = Z", "H_2 = (Z/2)^3", "H_3 = Z", "H_4 = Z"] {
        assert!(out.contains(&format!("{line}\n")), "missing {line} in {out}");
    }
    let msg = err(&["homology", "--g", "1", "--m", "2", "--non-permutable", "--coeff", "twisted"]);
    assert!(msg.contains("permutable"), "{msg}");
}

#[test]
fn methods_agree() {
    let out = ok(&["homology", "--g", "2", "--m", "0", "--method", "both"]);
    assert!(out.contains("H_1 = Z/10\n"), "{out}");
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["homology", "--g", "1", "--m", "2", "--json", "--coeff", "all"];
    let one = ok(&[&["--threads", "1"][..], &args].concat());
    let two = ok(&[&["--threads", "2"][..], &args].concat());
    assert_eq!(one, two);
}

#[test]
fn fundamental_class_of_two_punctures() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mu.txt");
    ok(&["fundamental-class", "--g", "0", "--m", "2", "--output", path.to_str().unwrap()]);
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().all(|l| l.starts_with("+1 ") || l.starts_with("-1 ")));
}

#[test]
fn render_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("torus.svg");
    ok(&["render", "--cell", TORUS, "--a", "0.1,0.2,0.3,0.2,0.2", "--output", path.to_str().unwrap()]);
    let first = fs::read_to_string(&path).unwrap();
    assert!(first.starts_with("<svg"));
    let second = ok(&["render", "--cell", TORUS, "--a", "0.1,0.2,0.3,0.2,0.2"]);
    assert_eq!(first, second);

    let plane = ok(&["render", "--cell", "2 0 : 1,2,0"]);
    assert!(plane.contains(
        r#"<g stroke="black" stroke-width="3">
</g>"#
    ));

    err(&["render", "--cell", "2 1 : 2,0,1 ; 2,0,1"]);
    err(&["render", "--cell", TORUS, "--b", "0.5,0.6,0.1"]);
}

#[test]
fn small_tables() {
    let out = ok(&["tables", "--max-h", "3"]);
    assert!(out.lines().all(|l| l.contains("PASS")), "{out}");
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn large_types_need_long_flag() {
    let msg = err(&["tables", "--max-h", "5"]);
    assert!(msg.contains("--long"), "{msg}");
    err(&["homology", "--g", "2", "--m", "1"]);
}

fn cached(root: &Path, args: &[&str]) -> Output {
    run(&[&["--cache", root.to_str().unwrap()][..], args].concat())
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["homology", "--g", "1", "--m", "2", "--json"];
    let fresh = cached(dir.path(), &args);
    assert!(fresh.status.success());
    let entry = dir.path().join("v1-h4-m2-permutable");
    assert!(entry.join("cells.txt").exists());
    assert!(entry.join("matrices-twisted").join("complete").exists());
    assert!(!entry.join("lock").exists());
    let reused = cached(dir.path(), &args);
    assert!(reused.status.success());
    assert_eq!(fresh.stdout, reused.stdout);

    let records = fs::read_to_string(entry.join("results.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 1);
    assert_eq!(records.trim(), String::from_utf8(fresh.stdout).unwrap().trim());
}

#[test]
fn cache_refuses_foreign_or_locked_directories() {
    let dir = tempfile::tempdir().unwrap();
    let entry = dir.path().join("v1-h2-m0-permutable");
    fs::create_dir_all(&entry).unwrap();

    fs::write(entry.join("lock"), "1\n").unwrap();
    let out = cached(dir.path(), &["homology", "--g", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("locked"));
    fs::remove_file(entry.join("lock")).unwrap();

    fs::write(entry.join("config.json"), r#"{"format":1,"h":3,"m":0,"permutable":true}"#).unwrap();
    let out = cached(dir.path(), &["homology", "--g", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("refusing to overwrite"));
    assert!(!entry.join("lock").exists());
}
