use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const P160: &str = "730750818665451621361119245571504901405976559617";

const TOY: &str = r#"{
  "modulus": "2",
  "participants": 4,
  "rows": [["1","0","1"],["0","1","1"],["0","1","1"],["0","1","0"]],
  "psi": [1,2,3,4]
}"#;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn lsss(dir: &Path, args: &[&str]) -> Run {
    let Output { status, stdout, stderr } = Command::new(env!("CARGO_BIN_EXE_lsss"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: status.code().unwrap_or(-1),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let r = lsss(dir, args);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    r.stdout
}

fn setup() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    fs::write(path.join("d.json"), TOY).unwrap();
    (dir, path)
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn strings(v: &Value) -> Vec<Vec<String>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect())
        .collect()
}

#[test]
fn share_toy_example() {
    let (_t, d) = setup();
    let out = ok(&d, &["share", "--msp", "d.json", "--secret", "1", "--randomness", "0,0"]);
    assert_eq!(strings(&json(&out)["shares"]), vec![vec!["1"], vec!["0"], vec!["0"], vec!["0"]]);
}

#[test]
fn share_validation_errors() {
    let (_t, d) = setup();
    let r = lsss(&d, &["share", "--msp", "d.json", "--secret", "2", "--seed", "1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("not below the modulus"));
    let r = lsss(&d, &["share", "--msp", "missing.json", "--secret", "1", "--seed", "1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("missing.json"));
    // Seed is mandatory for sampled randomness.
    assert_eq!(lsss(&d, &["share", "--msp", "d.json", "--secret", "1"]).code, 2);
    fs::write(d.join("bad.json"), "{\n  \"modulus\": 2,\n}").unwrap();
    let r = lsss(&d, &["share", "--msp", "bad.json", "--secret", "1", "--seed", "1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 2"), "{}", r.stderr);
}

#[test]
fn share_is_reproducible_and_reconstructs() {
    let (_t, d) = setup();
    ok(&d, &["shamir", "--t", "3", "--n", "5", "-o", "s.json"]);
    let a = ok(&d, &["share", "--msp", "s.json", "--secret", "4242", "--seed", "9"]);
    let b = ok(&d, &["share", "--msp", "s.json", "--secret", "4242", "--seed", "9"]);
    assert_eq!(a, b);
    fs::write(d.join("sh.json"), &a).unwrap();
    let out = ok(&d, &["reconstruct", "--msp", "s.json", "--shares", "sh.json", "--set", "1,3,5"]);
    assert_eq!(out.trim(), "4242");
    let r = lsss(&d, &["reconstruct", "--msp", "s.json", "--shares", "sh.json", "--set", "1,3"]);
    assert_eq!(r.code, 3);
}

#[test]
fn contract_toy_example() {
    let (_t, d) = setup();
    let r = lsss(&d, &["contract", "--msp", "d.json", "--q", "4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("k = 2"), "{}", r.stderr);
    let doc = json(&r.stdout);
    assert_eq!(
        strings(&doc["rows"]),
        vec![vec!["1", "0", "1"], vec!["0", "0", "1"], vec!["0", "0", "1"]]
    );
}

#[test]
fn contract_authorized_set_is_refused() {
    let (_t, d) = setup();
    let r = lsss(&d, &["contract", "--msp", "d.json", "--q", "1,2,4"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("cannot contract at authorized set"));
}

#[test]
fn contract_shamir_at_three() {
    let (_t, d) = setup();
    ok(&d, &["shamir", "--t", "8", "--n", "10", "-o", "s.json"]);
    let r = lsss(&d, &["contract", "--msp", "s.json", "--q", "2,5,9"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("W = {2,5,9}"));
    let doc = json(&r.stdout);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 7);
    assert_eq!(doc["participants"], 7);
}

#[test]
fn relocate_lc_toy() {
    let (_t, d) = setup();
    // v = (1, 1, 0): shares 1, 1, 1, 1.
    let shares = ok(&d, &["share", "--msp", "d.json", "--secret", "1", "--randomness", "1,0"]);
    fs::write(d.join("sh.json"), shares).unwrap();
    let out = json(&ok(
        &d,
        &["relocate", "--msp", "d.json", "--shares", "sh.json", "--q", "4", "--method", "lc"],
    ));
    let servers = out["servers"].as_array().unwrap();
    assert_eq!(servers.len(), 3);
    // s'_1 = s_1, s'_2 = s_2 - s_4, s'_3 = s_3 - s_4.
    let vals: Vec<&str> = servers.iter().map(|s| s["shares"][0].as_str().unwrap()).collect();
    assert_eq!(vals, vec!["1", "0", "0"]);
    assert!(out["public"].as_array().unwrap().is_empty());
    assert_eq!(out["scheme"]["rows"].as_array().unwrap().len(), 3);

    let ps = json(&ok(
        &d,
        &["relocate", "--msp", "d.json", "--shares", "sh.json", "--q", "4", "--method", "ps"],
    ));
    assert_eq!(ps["public"].as_array().unwrap().len(), 1);
    let r = lsss(&d, &["relocate", "--msp", "d.json", "--shares", "sh.json", "--q", "1,2,4", "--method", "is"]);
    assert_eq!(r.code, 3);
    let r = lsss(&d, &["relocate", "--msp", "d.json", "--shares", "sh.json", "--q", "4", "--method", "xx"]);
    assert_eq!(r.code, 2);
}

#[test]
fn structure_contract() {
    let (_t, d) = setup();
    let out = ok(&d, &["structure", "contract", "--structure", "n=4; basis={1,2,4},{1,3,4}", "--q", "4"]);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "n=3; basis={1,2},{1,3}");
    assert_eq!(lines.next().unwrap(), "participants = {1,2,3}");
    let of = ok(&d, &["structure", "of", "--msp", "d.json"]);
    assert_eq!(of.trim(), "n=4; basis={1,2,4},{1,3,4}");
}

#[test]
fn bench_defaults() {
    let (_t, d) = setup();
    let out = ok(&d, &["bench"]);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "method,m,L_bits,L_MiB,rho");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 32);
    for r in rows.iter().filter(|r| r[0] == "lc") {
        let m: u64 = r[1].parse().unwrap();
        assert_eq!(r[2].parse::<u64>().unwrap(), (10 - m) * 16 * 1_000_000);
    }
    assert!(out.contains("lc,0,160000000,19.0735,1.000000"));
    let plot = ok(&d, &["bench", "--format", "plot-data"]);
    assert!(plot.starts_with("# storage_MiB"));
    let metrics = ok(&d, &["bench", "--format", "metrics", "--z", "1000"]);
    assert!(metrics.starts_with("method,n,t,m,share_bits,z,L_bits,rho"));
    assert_eq!(ok(&d, &["bench"]), out);
}

#[test]
fn simulate_scenario() {
    let (_t, d) = setup();
    let scenario = r#"{
      "scheme": {"kind": "threshold", "t": 3, "n": 5},
      "share_bits": 16, "z": 4, "seed": 7, "mode": "material",
      "events": [
        {"kind": "distribute"},
        {"kind": "remove", "servers": [2], "method": "lc"},
        {"kind": "reconstruct", "servers": [1, 3], "secret": 1},
        {"kind": "reconstruct", "servers": [1], "secret": 1},
        {"kind": "snapshot"}
      ]
    }"#;
    fs::write(d.join("sc.json"), scenario).unwrap();
    let out = ok(&d, &["simulate", "--scenario", "sc.json"]);
    assert!(out.starts_with("record,"));
    assert_eq!(out, ok(&d, &["simulate", "--scenario", "sc.json"]));
    assert!(out.lines().any(|l| l.starts_with("reconstruct,") && l.contains("refused")), "{out}");
    fs::write(d.join("bad.json"), r#"{"scheme": {"kind": "threshold", "t": 3, "n": 5}, "events": []}"#).unwrap();
    assert_eq!(lsss(&d, &["simulate", "--scenario", "bad.json"]).code, 2);
}

#[test]
fn abe_pipeline() {
    let (_t, d) = setup();
    ok(&d, &["abe", "setup", "--universe", "10", "--seed", "1", "--pk", "pk.json", "--msk", "msk.json"]);
    let pk = fs::read_to_string(d.join("pk.json")).unwrap();
    ok(&d, &["abe", "setup", "--universe", "10", "--seed", "1", "--pk", "pk2.json", "--msk", "msk2.json"]);
    assert_eq!(pk, fs::read_to_string(d.join("pk2.json")).unwrap());
    assert!(pk.contains("debug-insecure"));

    ok(&d, &["shamir", "--t", "8", "--n", "10", "--modulus", P160, "-o", "policy.json"]);
    let message = "123456789123456789";
    ok(&d, &[
        "abe", "encrypt", "--pk", "pk.json", "--msp", "policy.json", "--message", message, "--seed", "2",
        "--ct", "ct.json", "--ck", "ck.json",
    ]);
    ok(&d, &["abe", "restrict-ck", "--ct", "ct.json", "--ck", "ck.json", "--q", "10", "-o", "ckq.json"]);
    ok(&d, &[
        "abe", "contract-sct", "--pk", "pk.json", "--ct", "ct.json", "--q", "10", "--ck", "ckq.json", "-o", "sct.json",
    ]);
    ok(&d, &["abe", "keygen", "--pk", "pk.json", "--msk", "msk.json", "--attributes", "1,2,3,4,5,6,7", "--seed", "3", "-o", "sk7.json"]);
    ok(&d, &["abe", "keygen", "--pk", "pk.json", "--msk", "msk.json", "--attributes", "1,2,3,4,5,6", "--seed", "4", "-o", "sk6.json"]);
    let out = ok(&d, &["abe", "decrypt", "--pk", "pk.json", "--sk", "sk7.json", "--ct", "sct.json"]);
    assert_eq!(out.trim(), message);
    let r = lsss(&d, &["abe", "decrypt", "--pk", "pk.json", "--sk", "sk6.json", "--ct", "sct.json"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("unauthorized attribute set"));
    // The original ciphertext needs 8 attributes.
    assert_eq!(lsss(&d, &["abe", "decrypt", "--pk", "pk.json", "--sk", "sk7.json", "--ct", "ct.json"]).code, 3);

    let size = json(&ok(&d, &["abe", "size", "--ct", "sct.json"]));
    assert_eq!(size["g"], 19);
    assert_eq!(size["matrix_scalars"], 72);

    ok(&d, &["abe", "contract-ect", "--ct", "ct.json", "--q", "10", "--ck", "ckq.json", "-o", "ect.json"]);
    let out = ok(&d, &["abe", "decrypt", "--pk", "pk.json", "--sk", "sk7.json", "--ct", "ect.json"]);
    assert_eq!(out.trim(), message);
    assert_eq!(json(&ok(&d, &["abe", "size", "--ct", "ect.json"]))["ck_scalars"], 1);

    ok(&d, &["abe", "keygen", "--pk", "pk.json", "--msk", "msk.json", "--attributes", "1,2,3,4,5,6,7,8,9,10", "--seed", "5", "-o", "owner.json"]);
    ok(&d, &[
        "abe", "contract-re", "--pk", "pk.json", "--sk", "owner.json", "--ct", "ct.json", "--q", "10", "--seed", "6",
        "-o", "re.json", "--ck-out", "ck_re.json",
    ]);
    let out = ok(&d, &["abe", "decrypt", "--pk", "pk.json", "--sk", "sk7.json", "--ct", "re.json"]);
    assert_eq!(out.trim(), message);
    assert_eq!(lsss(&d, &["abe", "decrypt", "--pk", "pk.json", "--sk", "sk6.json", "--ct", "re.json"]).code, 3);
    let r = lsss(&d, &[
        "abe", "contract-re", "--pk", "pk.json", "--sk", "sk6.json", "--ct", "ct.json", "--q", "10", "--seed", "6",
    ]);
    assert_eq!(r.code, 3);
}

#[test]
fn abe_contract_sct_needs_key_file() {
    let (_t, d) = setup();
    let r = lsss(&d, &["abe", "contract-sct", "--pk", "pk.json", "--ct", "ct.json", "--q", "10"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--ck"), "{}", r.stderr);
}

#[test]
fn abe_contract_with_wrong_key_entries() {
    let (_t, d) = setup();
    ok(&d, &["abe", "setup", "--universe", "4", "--seed", "1", "--pk", "pk.json", "--msk", "msk.json"]);
    ok(&d, &["shamir", "--t", "3", "--n", "4", "--modulus", P160, "-o", "policy.json"]);
    ok(&d, &[
        "abe", "encrypt", "--pk", "pk.json", "--msp", "policy.json", "--message", "5", "--seed", "2", "--ct",
        "ct.json", "--ck", "ck.json",
    ]);
    ok(&d, &["abe", "restrict-ck", "--ct", "ct.json", "--ck", "ck.json", "--q", "1", "-o", "ck1.json"]);
    let r = lsss(&d, &[
        "abe", "contract-sct", "--pk", "pk.json", "--ct", "ct.json", "--q", "2", "--ck", "ck1.json",
    ]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("missing contraction key entry"), "{}", r.stderr);
}
