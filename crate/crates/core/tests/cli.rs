use std::path::PathBuf;
use std::process::{Command, Output};

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("outcomes-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_outcomes")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn invert_writes_rows_and_manifest() {
    let d = tmp("invert");
    let f = d.join("inv.json");
    let o = run(&["invert", "--m", "3", "--out", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<Vec<String>> = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    assert_eq!(rows[0], ["3/1", "-3/1", "1/1"]);
    assert_eq!(rows[2], ["1/2", "-1/1", "1/2"]);
    assert!(d.join("inv.json.manifest.json").exists());
}

#[test]
fn sweep_and_classify() {
    let d = tmp("sweep");
    let f = d.join("v.csv");
    let o = run(&["sweep", "--family", "power", "--s", "2", "--m-grid", "100,200,400,800", "--fit", "--out", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&f).unwrap();
    assert!(text.starts_with("M,variance_of_mean\n100,"));
    assert_eq!(text.lines().count(), 5);
    let c = d.join("c.json");
    let o = run(&["classify", "--family", "power", "--s", "3", "--m-grid", "50:250:50", "--out", c.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&c).unwrap()).unwrap();
    assert_eq!(rep["case_label"], "Case1");
}

#[test]
fn sample_is_seeded() {
    let d = tmp("sample");
    let args = |f: &str| {
        vec!["sample", "--family", "exp", "--alpha", "1", "--m", "20", "--n", "4", "--trials", "2000", "--seed", "9", "--out"]
            .into_iter()
            .map(String::from)
            .chain([d.join(f).display().to_string()])
            .collect::<Vec<_>>()
    };
    for f in ["a.json", "b.json"] {
        let a = args(f);
        assert_eq!(code(&run(&a.iter().map(String::as_str).collect::<Vec<_>>())), 0);
    }
    assert_eq!(std::fs::read(d.join("a.json")).unwrap(), std::fs::read(d.join("b.json")).unwrap());
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["sweep", "--family", "power", "--m-grid", "bad"])), 2);
    assert_eq!(code(&run(&["repro", "--figure", "7"])), 2);
    assert_eq!(code(&run(&["nonsense"])), 2);
    let d = tmp("codes");
    let f = d.join("x.csv");
    assert_eq!(code(&run(&["family", "--family", "power", "--s", "0", "--m", "5", "--out", f.to_str().unwrap()])), 1);
    assert_eq!(code(&run(&["classify", "--family", "exp", "--m-grid", "5,10,20,40", "--out", f.to_str().unwrap()])), 1);
}

#[test]
fn identities_subset_passes() {
    let d = tmp("ident");
    let f = d.join("id.json");
    let o = run(&["identities", "--only", "chu_vandermonde", "--out", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
}
