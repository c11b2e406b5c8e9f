use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn infopriv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infopriv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = infopriv(&full);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn generated_channels_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "xor.json", &["xor", "--records", "2"]);
    let text = std::fs::read_to_string(&path).unwrap();
    let ch = infopriv::io::parse_channel(&text).unwrap();
    assert_eq!(ch.input_shape().sizes(), &[2, 2]);
    assert_eq!(ch.row(3), &[1.0, 0.0]);
    assert_eq!(infopriv::io::channel_to_json(&ch), text);
}

#[test]
fn capacity_envelope_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let xor = gen(dir.path(), "xor.json", &["xor"]);
    let x = xor.to_str().unwrap();

    let out = infopriv(&["capacity", "--channel", x]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["tool"], "infopriv");
    assert_eq!(v["command"], "capacity");
    assert!(v.get("wall_time_s").is_none());
    assert!((v["report"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(String::from_utf8_lossy(&out.stderr).contains("wall time"));

    let out = infopriv(&["capacity", "--channel", x, "--set", "Pb", "--b", "2"]);
    assert!(report(&out)["report"]["value"].as_f64().unwrap().abs() < 1e-9);

    let out = infopriv(&["capacity", "--channel", x, "--group", "2"]);
    assert!((report(&out)["report"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);

    let out = infopriv(&["capacity", "--channel", x, "--timing"]);
    assert!(report(&out)["wall_time_s"].as_f64().is_some());
}

#[test]
fn balance_csv_has_bracket_columns() {
    let dir = tempfile::tempdir().unwrap();
    let xor = gen(dir.path(), "xor.json", &["xor"]);
    let out = infopriv(&[
        "balance",
        "--channel",
        xor.to_str().unwrap(),
        "--points",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "b,delta_lower,delta_upper");
    assert_eq!(lines.len(), 6);
    let last: Vec<f64> = lines[5].split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(last[0], 2.0);
    assert!((last[1] - 1.0).abs() < 1e-9 && (last[2] - 1.0).abs() < 1e-9);
}

#[test]
fn invert_finds_the_largest_admissible_b() {
    let dir = tempfile::tempdir().unwrap();
    let constant = gen(dir.path(), "c.json", &["constant", "--alphabets", "2,2"]);
    let out = infopriv(&["invert", "--channel", constant.to_str().unwrap(), "--delta", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["report"]["b"].as_f64(), Some(2.0));
}

#[test]
fn theorem_checks_hold_on_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let id = gen(dir.path(), "id.json", &["identity", "--alphabets", "2"]);
    let i = id.to_str().unwrap();
    let out = infopriv(&[
        "check",
        "compose-general",
        "--channel",
        i,
        "--channel",
        i,
        "--coupling",
        "correlated",
        "--trials",
        "4",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = report(&out);
    assert_eq!(v["report"]["summary"]["violated"], 0);
    assert!(v["report"]["details"]["cross"][0]["value"].as_f64().unwrap() > 0.9);

    let xor = gen(dir.path(), "xor.json", &["xor"]);
    let out = infopriv(&[
        "check",
        "monotonicity",
        "--channel",
        xor.to_str().unwrap(),
        "--points",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        report(&out)["report"]["details"]["endpoint"]["outcome"],
        "boundary_equality"
    );
}

#[test]
fn decompose_reports_residuals() {
    let out = infopriv(&["decompose", "--lemma", "basic", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["report"]["summary"]["completed"], 10);
    assert!(v["report"]["summary"]["max_residual"].as_f64().unwrap() <= 1e-9);

    // a tolerance below rounding error fails the run
    let out = infopriv(&[
        "decompose",
        "--lemma",
        "basic",
        "--trials",
        "10",
        "--tol",
        "1e-30",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(
        infopriv(&["capacity", "--channel", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(infopriv(&["capacity"]).status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"alphabets":[2],"outputs":2,"rows":[[0.5,0.6],[0.5,0.5]]}"#,
    )
    .unwrap();
    assert_eq!(
        infopriv(&["capacity", "--channel", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    let xor = gen(dir.path(), "xor.json", &["xor"]);
    let x = xor.to_str().unwrap();
    let exact_pb = infopriv(&[
        "capacity",
        "--channel",
        x,
        "--set",
        "Pb",
        "--b",
        "1",
        "--method",
        "exact",
    ]);
    assert_eq!(exact_pb.status.code(), Some(2));
    let beyond = infopriv(&["capacity", "--channel", x, "--set", "Pb", "--b", "2.5"]);
    assert_eq!(beyond.status.code(), Some(2));

    let big = gen(dir.path(), "big.json", &["identity", "--alphabets", "4,16"]);
    let out = infopriv(&[
        "capacity",
        "--channel",
        big.to_str().unwrap(),
        "--method",
        "exact",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mirror"));

    // only the uniform member reaches b = log2 |X^j|, and sampling never hits it
    let id = gen(dir.path(), "id.json", &["identity", "--alphabets", "2"]);
    let i = id.to_str().unwrap();
    let out = infopriv(&[
        "check",
        "compose-general",
        "--channel",
        i,
        "--channel",
        i,
        "--b",
        "1",
        "--trials",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sampling"));
}

#[test]
fn thread_setting_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_infopriv"))
        .args(["decompose", "--lemma", "group", "--trials", "2"])
        .env("INFOPRIV_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
