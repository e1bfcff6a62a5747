use std::path::PathBuf;
use std::process::{Command, Output};

fn ceqss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ceqss"))
        .args(args)
        .output()
        .expect("spawn ceqss")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ceqss-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn params_json_for_k2() {
    let out = ceqss(&["params", "--k", "2", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 3);
    assert_eq!(v["q"], 5);
    assert_eq!(v["m"], 2);
}

#[test]
fn recover_exit_codes() {
    let ok = ceqss(&["recover", "--k", "3", "--parties", "1,2,3,4"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));

    let singular = ceqss(&["recover", "--k", "3", "--parties", "2,3,4,5"]);
    assert_eq!(singular.status.code(), Some(1));

    let larger_prime = ceqss(&["--q", "17", "recover", "--k", "3", "--parties", "2,3,4,5"]);
    assert_eq!(larger_prime.status.code(), Some(0));

    let bad_q = ceqss(&["--q", "9", "recover", "--k", "3", "--parties", "1,2,3"]);
    assert_eq!(bad_q.status.code(), Some(2));

    let too_few = ceqss(&["recover", "--k", "3", "--parties", "1,2"]);
    assert_eq!(too_few.status.code(), Some(2));
}

#[test]
fn trace_file_is_readable() {
    let path = scratch("trace.json");
    let out = ceqss(&[
        "--trace",
        path.to_str().unwrap(),
        "recover",
        "--k",
        "2",
        "--parties",
        "1,2,3",
    ]);
    assert!(out.status.success());
    let trace = ceqss::io::trace_from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(!trace.is_empty());
}

#[test]
fn compile_matrix_file() {
    let matrix = scratch("k.json");
    let netlist = scratch("netlist.json");
    std::fs::write(&matrix, r#"{"q":7,"rows":2,"cols":2,"data":[1,2,3,3]}"#).unwrap();
    let out = ceqss(&[
        "compile",
        "--matrix",
        matrix.to_str().unwrap(),
        "--qudits",
        "4,1",
        "--out",
        netlist.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let prog = ceqss::io::netlist_from_json(&std::fs::read_to_string(&netlist).unwrap()).unwrap();
    assert!(!prog.is_empty());
    assert!(prog.gates.iter().flat_map(|g| g.qudits()).all(|q| q == 4 || q == 1));
}

#[test]
fn cost_table_text() {
    let out = ceqss(&["cost", "--k", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("5/3"), "{text}");
}
