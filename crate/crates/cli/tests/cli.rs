use std::path::Path;
use std::process::{Command, Output};

fn octic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_octic")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sieve_certificate_is_accepted_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let out = octic(&["sieve", "--case", "2", "--emit", path(&cert)]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("2 leaves, 2 killed: COMPLETE"));

    let out = octic(&["check", "--cert", path(&cert), "--samples", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("accepted: 2 leaves"));

    let mut json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let steps = json["branches"][0]["steps"].as_array_mut().unwrap();
    let last = steps.last_mut().unwrap();
    let modulus = last["modulus"].as_u64().unwrap();
    let r = last["residue"].as_u64().unwrap();
    last["residue"] = ((r + 1) % modulus).into();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, json.to_string()).unwrap();
    let out = octic(&["check", "--cert", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("rejected"));
}

#[test]
fn crosscheck_reports_and_rejects_bad_m() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("oracle.json");
    let out = octic(&["crosscheck", "--m", "6", "--samples", "10", "--seed", "3", "--emit", path(&report)]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["m"], 6);
    assert_eq!(json["samples"], 10);

    let out = octic(&["crosscheck", "--m", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn prove_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = octic(&["prove", "--case", "2", "--emit", path(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("PROVED"));
    let text = std::fs::read_to_string(&report).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["verdict"]["status"], "PROVED");

    let config = dir.path().join("broken.toml");
    std::fs::write(
        &config,
        "enrichment = false\nmultipliers = [\"16*(2*n + 1)^2\", \"16*(2*n + 1)\", \"4\", \"2\", \"2\", \"2\"]\n",
    )
    .unwrap();
    let out = octic(&["prove", "--case", "2", "--config", path(&config)]);
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
}

#[test]
fn basis_prints_the_discriminant() {
    let out = octic(&["basis", "--case", "3"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("D = 2^16*m^6 = "), "{}", stdout(&out));
}

#[test]
fn unknown_case_is_a_usage_error() {
    let out = octic(&["basis", "--case", "1"]);
    assert!(!out.status.success());
}
