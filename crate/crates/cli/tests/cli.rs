use std::process::{Command, Output};

fn medianwall(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_medianwall"))
        .args(args)
        .output()
        .unwrap()
}

fn generate_json(spec: &str) -> serde_json::Value {
    let out = medianwall(&["generate", spec]);
    assert!(out.status.success());
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn generate_sizes() {
    assert_eq!(
        generate_json("path(100)")["vertices"]
            .as_array()
            .unwrap()
            .len(),
        101
    );
    assert_eq!(
        generate_json("tripod(3,4,5)")["vertices"]
            .as_array()
            .unwrap()
            .len(),
        13
    );
    let s = generate_json("staircase(20)");
    assert_eq!(s["factors"].as_array().unwrap().len(), 2);
    assert_eq!(s["K"], serde_json::json!([1, 1]));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(
        medianwall(&["verify", "--instance", empty.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        medianwall(&["verify", "--generate", "nope(1)"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        medianwall(&["generate", "path(3)", "--K", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(medianwall(&["verify"]).status.code(), Some(2));
    let out = medianwall(&["verify", "--generate", "path(100)", "--K", "1"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = medianwall(&[
            "cylinders",
            "--generate",
            "staircase(12)",
            "--seed",
            "7",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        std::fs::read(p).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn certificate_for_path() {
    let out = medianwall(&["cylinders", "--generate", "path(20)"]);
    assert!(out.status.success());
    let cert: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cert["k"], 0);
    for key in ["R", "epsilon", "theta", "failures"] {
        assert!(cert.get(key).is_some(), "missing {key}");
    }
}

/// Statements of the subset of DOT the exporter writes.
fn parses_as_dot(text: &str) -> bool {
    let mut lines = text.lines();
    let Some(head) = lines.next() else {
        return false;
    };
    if !(head.starts_with("graph \"") && head.ends_with(" {")) {
        return false;
    }
    let body: Vec<&str> = lines.collect();
    if body.last() != Some(&"}") {
        return false;
    }
    body[..body.len() - 1].iter().all(|l| {
        let l = l.trim();
        let attrs_ok = |s: &str| s.starts_with('[') && s.ends_with("];");
        if let Some((a, b)) = l.split_once(" -- ") {
            is_id(a) && b.strip_suffix(';').is_some_and(is_id)
        } else if let Some((id, rest)) = l.split_once(' ') {
            (is_id(id) || id == "node") && attrs_ok(rest) && rest.matches('"').count() % 2 == 0
        } else {
            false
        }
    })
}

fn is_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[test]
fn dot_exports_parse() {
    let dir = tempfile::tempdir().unwrap();
    let out = medianwall(&[
        "export-dot",
        "--generate",
        "staircase(12)",
        "--dot",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["dual.dot", "interval.dot", "triple.dot"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(parses_as_dot(&text), "{name}:\n{text}");
    }
    assert!(!parses_as_dot("graph g {\n  a -- ;\n}\n"));
}
