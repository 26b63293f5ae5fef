//! End-to-end runs of the `coordsynth` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use coordsynth::io::write_generator;
use coordsynth::oracle::{random_instance, InstanceParams};
use serde_json::Value;
use tempfile::TempDir;

const PLANT: &str = r#"{"events":[{"name":"a","controllable":true,"observable":true},{"name":"u","controllable":false,"observable":true}],
"states":["0","1","2"],"initial":"0","marked":["0","1","2"],"transitions":[["0","a","1"],["1","u","2"]]}"#;
const SPEC: &str = r#"{"events":[{"name":"a","controllable":true,"observable":true},{"name":"u","controllable":false,"observable":true}],
"states":["0","1"],"initial":"0","marked":["0","1"],"transitions":[["0","a","1"]]}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_coordsynth"));
    c.env_remove("COORDSYNTH_MAX_STATES");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    path(dir, name)
}

/// A prefix-closed four-subsystem project in two groups.
fn project(dir: &Path, seed: u64) -> String {
    let p = InstanceParams {
        max_states_per_subsystem: 3,
        alphabet_size: 5,
        transition_density: 0.7,
        ..InstanceParams::default()
    }
    .with_seed(seed);
    let spec = random_instance(&p).unwrap();
    let mut subsystems = Vec::new();
    for (i, g) in spec.subsystems.iter().enumerate() {
        let name = format!("g{}.json", i + 1);
        write_generator(&dir.join(&name), g).unwrap();
        subsystems.push(name);
    }
    write_generator(&dir.join("k.json"), &spec.specification).unwrap();
    let groups: Vec<Vec<usize>> = spec.groups.iter().map(|g| g.iter().map(|i| i + 1).collect()).collect();
    let project = serde_json::json!({
        "subsystems": subsystems,
        "groups": groups,
        "specification": "k.json",
        "auto_extend": true,
    });
    write(dir, "project.json", &project.to_string())
}

#[test]
fn controllability_failure_reports_witness() {
    let d = TempDir::new().unwrap();
    let l = write(d.path(), "l.json", PLANT);
    let k = write(d.path(), "k.json", SPEC);
    let o = run(&["check", "controllable", "--k", &k, "--l", &l, "--au", "u"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["verdict"]["holds"], false);
    assert_eq!(v["verdict"]["witness"]["prefix"], serde_json::json!(["a"]));
    assert_eq!(v["verdict"]["witness"]["event"], "u");

    let o = run(&["check", "normal", "--k", &k, "--l", &l]);
    assert_eq!(code(&o), 0);
}

#[test]
fn supcn_removes_the_uncontrollable_escape() {
    let d = TempDir::new().unwrap();
    let l = write(d.path(), "l.json", PLANT);
    let k = write(d.path(), "k.json", SPEC);
    let out = path(d.path(), "sup.json");
    assert_eq!(code(&run(&["supcn", "--k", &k, "--l", &l, "--au", "u", "--ao", "a,u", "--out", &out])), 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["states"].as_array().unwrap().len(), 1);
    assert!(v["transitions"].as_array().unwrap().is_empty());
}

#[test]
fn product_and_projection() {
    let d = TempDir::new().unwrap();
    let l = write(d.path(), "l.json", PLANT);
    let k = write(d.path(), "k.json", SPEC);
    let o = run(&["product", &k, &l]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["transitions"].as_array().unwrap().len(), 1);
    let o = run(&["project", &l, "--events", "u"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["events"].as_array().unwrap().len(), 1);
}

#[test]
fn coordinator_contains_shared_events() {
    let d = TempDir::new().unwrap();
    let l = write(d.path(), "l.json", PLANT);
    let k = write(d.path(), "k.json", SPEC);
    let o = run(&["coordinator", &k, &l]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["alphabet"], serde_json::json!(["a", "u"]));
    let o = run(&["coordinator", "--nonblocking", &k, &l]);
    assert_eq!(code(&o), 0);
}

#[test]
fn malformed_json_reports_position() {
    let d = TempDir::new().unwrap();
    let bad = write(d.path(), "bad.json", "{\n  \"events\": [,]\n}");
    let l = write(d.path(), "l.json", PLANT);
    let o = run(&["product", &bad, &l]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2, column 14"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&["check", "controllable"])), 1);
    assert_eq!(code(&run(&["no-such-command"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn synthesize_writes_artifacts_and_verifies() {
    let d = TempDir::new().unwrap();
    let p = project(d.path(), 3);
    let out = path(d.path(), "out");
    let o = run(&["synthesize", "--project", &p, "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&o);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["final_nonblocking"], true);
    for f in ["report.json", "final.json", "coordinator_k.json", "timings.json", "group_1.json"] {
        assert!(d.path().join("out").join(f).exists(), "{f} missing");
    }
    let v = run(&["verify", "--project", &p, "--result", &out, "--mode", "all"]);
    assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stdout));
    assert_eq!(json(&v)["supremal"]["outcome"], "supremal");

    let t = run(&["synthesize", "--project", &p, "--out", &out, "--report", "text", "--strict-theorem3"]);
    let expected = if report["conditions"]["all_hold"] == true { 0 } else { 2 };
    assert_eq!(code(&t), expected);
    if expected == 0 {
        assert!(String::from_utf8_lossy(&t.stdout).contains("all conditions hold: true"));
    }
}

#[test]
fn identical_inputs_give_identical_outputs() {
    let d = TempDir::new().unwrap();
    let p = project(d.path(), 11);
    let a = path(d.path(), "a");
    let b = path(d.path(), "b");
    let oa = run(&["synthesize", "--project", &p, "--out", &a]);
    let ob = bin()
        .args(["--jobs", "1", "synthesize", "--project", &p, "--out", &b])
        .output()
        .unwrap();
    assert_eq!(code(&oa), 0);
    assert_eq!(oa.stdout, ob.stdout);
    let mut names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "timings.json")
        .collect();
    names.sort();
    assert!(names.len() > 5);
    for n in names {
        let left = fs::read(Path::new(&a).join(&n)).unwrap();
        let right = fs::read(Path::new(&b).join(&n)).unwrap();
        assert!(left == right, "{n} differs");
    }
}

#[test]
fn state_ceiling_exits_three() {
    let d = TempDir::new().unwrap();
    let p = project(d.path(), 5);
    let out = path(d.path(), "out");
    let o = bin()
        .env("COORDSYNTH_MAX_STATES", "1")
        .args(["synthesize", "--project", &p, "--out", &out])
        .output()
        .unwrap();
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn zero_based_group_is_rejected() {
    let d = TempDir::new().unwrap();
    project(d.path(), 2);
    let text = fs::read_to_string(d.path().join("project.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["groups"][0][0] = 0.into();
    let p = write(d.path(), "zero.json", &v.to_string());
    let o = run(&["synthesize", "--project", &p, "--out", &path(d.path(), "out")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn fuzz_summarizes_seeds() {
    let d = TempDir::new().unwrap();
    let params = serde_json::json!({
        "n_subsystems": 4, "m_groups": 2, "max_states_per_subsystem": 3, "alphabet_size": 5,
        "fraction_uncontrollable": 0.3, "fraction_unobservable": 0.2, "prefix_closed": true,
        "transition_density": 0.7
    });
    let p = write(d.path(), "params.json", &params.to_string());
    let out = path(d.path(), "records.json");
    let o = run(&["fuzz", "--seeds", "0..8", "--params", &p, "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = json(&o);
    assert_eq!(v["instances"], 8);
    assert_eq!(v["failed"], 0);
    assert!(Path::new(&out).exists());
    assert_eq!(code(&run(&["fuzz", "--seeds", "5", "--params", &p])), 1);
}
