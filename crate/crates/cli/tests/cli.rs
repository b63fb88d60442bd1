use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn cggpack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cggpack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn graph_file(dir: &TempDir, name: &str, json: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

const C5: &str = r#"{"kind":"cgg","n":5,"edges":[[0,1],[1,2],[2,3],[3,4],[0,4]]}"#;
const K3: &str = r#"{"kind":"cgg","n":3,"edges":[[0,1],[0,2],[1,2]]}"#;

#[test]
fn chroma_reports() {
    let dir = TempDir::new().unwrap();
    let c5 = graph_file(&dir, "c5.json", C5);
    let o = cggpack(&["chroma", "--input", &c5]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("chi_c = 5\n"));

    let empty = graph_file(&dir, "e.json", r#"{"kind":"cgg","n":4,"edges":[]}"#);
    assert!(stdout(&cggpack(&["chroma", "--input", &empty])).starts_with("chi_c = 1\n"));

    let p3 = graph_file(&dir, "p3.json", r#"{"kind":"ordered","n":4,"edges":[[0,1],[1,2],[2,3]]}"#);
    assert!(stdout(&cggpack(&["chroma", "--input", &p3])).starts_with("chi_< = 4\n"));
}

#[test]
fn parse_errors_exit_4() {
    let dir = TempDir::new().unwrap();
    let bad = graph_file(&dir, "bad.json", "{\"kind\":\"cgg\",\n\"n\":5,\n\"edges\":[[0,1]");
    let o = cggpack(&["chroma", "--input", &bad]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let loop_edge = graph_file(&dir, "loop.json", r#"{"kind":"cgg","n":3,"edges":[[1,1]]}"#);
    assert_eq!(cggpack(&["chroma", "--input", &loop_edge]).status.code(), Some(4));
}

#[test]
fn feasible_commands() {
    let o = cggpack(&["feasible", "--k", "3", "--weights", "1", "--m", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("m = 5, feasible"));
    assert_eq!(s.matches("x = 1/3").count(), 2, "{s}");
    assert!(s.contains("class [1,1,3]") && s.contains("class [1,2,2]"), "{s}");

    let o = cggpack(&["feasible", "--k", "4", "--weights", "1,1", "--witness"]);
    assert!(stdout(&o).starts_with("m = 97, feasible"), "{}", stdout(&o));

    let o = cggpack(&["feasible", "--k", "4", "--weights", "1,1", "--m", "96"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("even"));

    let o = cggpack(&["feasible", "--k", "6", "--weights", "1,1,96", "--witness"]);
    assert!(stdout(&o).contains("m' = 63504, m = 127009"));
}

#[test]
fn pack_writes_and_reruns() {
    let dir = TempDir::new().unwrap();
    let k3 = graph_file(&dir, "k3.json", K3);
    let out = dir.path().join("run1");
    let o = cggpack(&["pack", "--input", &k3, "--n", "49", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("chi_le4"));
    for f in ["manifest.json", "result.json", "packing-n49-s1.json"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let again = dir.path().join("run2");
    let o = cggpack(&[
        "run",
        "--manifest",
        out.join("manifest.json").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let read = |d: &Path, f: &str| fs::read(d.join(f)).unwrap();
    assert_eq!(read(&out, "result.json"), read(&again, "result.json"));
    assert_eq!(read(&out, "packing-n49-s1.json"), read(&again, "packing-n49-s1.json"));

    // the written packing checks against the bound
    let o = cggpack(&[
        "bound",
        "--input",
        &k3,
        "--packing",
        out.join("packing-n49-s1.json").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("achieved 0."), "{}", stdout(&o));
}

#[test]
fn pack_rejects_c5() {
    let dir = TempDir::new().unwrap();
    let c5 = graph_file(&dir, "c5.json", C5);
    let o = cggpack(&["pack", "--input", &c5, "--n", "25"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("chi_c = 5"), "{}", stderr(&o));
    // greedy is always available
    let o = cggpack(&["pack", "--input", &c5, "--n", "25", "--route", "greedy"]);
    assert!(o.status.success());
}

#[test]
fn pack_ordered_trace() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "ord.json", r#"{"kind":"ordered","n":4,"edges":[[0,1],[0,2],[0,3],[1,3]]}"#);
    let o = cggpack(&["pack", "--input", &g, "--n", "300"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("ordered_chi3"));
    assert!(s.contains("depth 0 interval 0..+300 sizes [120,120,60]"), "{s}");
}

#[test]
fn bound_reports() {
    let dir = TempDir::new().unwrap();
    let c5 = graph_file(&dir, "c5.json", C5);
    let o = cggpack(&["bound", "--input", &c5, "--n", "301"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("bound = 2567/3225 (0.7960), mode cycle-bound"), "{s}");

    let edge = graph_file(&dir, "edge.json", r#"{"kind":"cgg","n":2,"edges":[[0,1]]}"#);
    let o = cggpack(&["bound", "--input", &edge, "--n", "301"]);
    assert!(stdout(&o).contains("bound = 1 "), "{}", stdout(&o));

    let o = cggpack(&["bound", "--input", &c5, "--n", "300"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_packing_exits_3() {
    let dir = TempDir::new().unwrap();
    let k3 = graph_file(&dir, "k3.json", K3);
    // two triangles sharing the edge {0,1}
    let bad = graph_file(
        &dir,
        "bad.json",
        r#"{"host":{"kind":"cgg","n":7,"complete":true},"pattern":{"kind":"cgg","n":3,"edges":[[0,1],[0,2],[1,2]]},"copies":[[0,1,2],[0,1,3]],"coverage":"2/7"}"#,
    );
    let o = cggpack(&["bound", "--input", &k3, "--packing", &bad]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}
