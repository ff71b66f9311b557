use std::process::Command;

use serde_json::Value;

fn permtwist(args: &[&str]) -> (i32, Vec<Value>) {
    let out = Command::new(env!("CARGO_BIN_EXE_permtwist"))
        .args(args)
        .env_remove("PERMTWIST_REPORT_DIR")
        .output()
        .expect("binary runs");
    let lines = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect();
    (out.status.code().unwrap(), lines)
}

#[test]
fn coeffs_k3() {
    let (code, lines) = permtwist(&["coeffs", "--k", "3", "--order", "6"]);
    assert_eq!(code, 0);
    let a = &lines[0]["detail"][0]["detail"]["a"];
    assert_eq!(a["a_1"], "-1");
    assert_eq!(a["a_2"], "2/3");
}

#[test]
fn check_all_k1() {
    let (code, lines) = permtwist(&["check", "all", "--k", "1", "--cutoff", "2"]);
    assert_eq!(code, 0);
    assert_eq!(lines.len(), 11);
    assert!(lines.iter().all(|l| l["status"] == "pass"));
    let names: Vec<&str> = lines.iter().map(|l| l["check"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn even_k_is_an_expected_obstruction() {
    let (code, lines) = permtwist(&["check", "even-obstruction", "jacobi", "--k", "2"]);
    assert_eq!(code, 0);
    assert!(lines.iter().all(|l| l["status"] == "expected-obstruction"));
    assert_eq!(lines[0]["detail"][0]["detail"]["coset"], "1/4 + (1/2)Z");
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(permtwist(&["check", "nonsense"]).0, 2);
    assert_eq!(permtwist(&["check", "delta", "--k", "0"]).0, 2);
    assert_eq!(permtwist(&["check", "delta", "--cutoff", "1/3"]).0, 2);
    assert_eq!(permtwist(&["check", "delta", "--span", "0"]).0, 2);
}

#[test]
fn report_dir_receives_output() {
    let dir = std::env::temp_dir().join(format!("permtwist-cli-{}", std::process::id()));
    let out = Command::new(env!("CARGO_BIN_EXE_permtwist"))
        .args(["char", "--k", "3", "--cutoff", "3"])
        .env("PERMTWIST_REPORT_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let written = std::fs::read_to_string(dir.join("char.jsonl")).unwrap();
    assert_eq!(written.as_bytes(), &out.stdout[..]);
    let line: Value = serde_json::from_str(written.lines().next().unwrap()).unwrap();
    assert_eq!(line["status"], "pass");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn seeded_runs_are_deterministic() {
    let args = ["check", "supercomm", "--k", "3", "--cutoff", "1", "--samples", "2", "--seed", "11"];
    assert_eq!(permtwist(&args), permtwist(&args));
}
