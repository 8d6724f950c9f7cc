use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name)
}

fn foret(args: &[&str]) -> Output {
    foret_env(args, &[])
}

fn foret_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_foret"));
    cmd.args(args);
    for var in [
        "FORET_WORKERS",
        "FORET_NODE_BUDGET",
        "FORET_TIME_BUDGET",
        "FORET_MAX_ITEMS",
    ] {
        cmd.env_remove(var);
    }
    cmd.envs(env.iter().copied());
    cmd.output().expect("binary runs")
}

fn ok_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, value.to_string()).unwrap();
    p
}

fn lits(var: &str, states: &[&str]) -> Value {
    json!({"var": var, "states": states})
}

#[test]
fn susan_explanations() {
    let out = foret(&[
        "explain",
        "--forest",
        path(&data("susan.json")),
        "--instance",
        path(&data("susan_instance.json")),
    ]);
    let v = ok_json(&out);
    assert_eq!(v["class"], "yes");
    assert_eq!(
        v["sufficient_reasons"],
        json!([
            [lits("Age", &[">=55"]), lits("BType", &["A"])],
            [lits("Age", &[">=55"]), lits("Weight", &["oWeight"])]
        ])
    );
    assert_eq!(
        v["necessary_reasons"],
        json!([
            [lits("Age", &[">=55"])],
            [lits("BType", &["A"]), lits("Weight", &["oWeight"])]
        ])
    );
    assert_eq!(v["robustness"], json!({"distance": 1, "vars": [["Age"]]}));
    assert_eq!(v["shortest_gnrs"], json!([[lits("Age", &[">=55"])]]));
    assert_eq!(v["flips"], json!([{"Age": "<55", "BType": "A", "Weight": "oWeight"}]));
}

#[test]
fn reasons_are_serialized_as_circuits() {
    let out = foret(&[
        "explain",
        "--forest",
        path(&data("susan.json")),
        "--instance",
        path(&data("susan_instance.json")),
        "--kinds",
        "cr,gr",
    ]);
    let v = ok_json(&out);
    assert_eq!(v["complete_reason"]["kind"], "complete");
    assert_eq!(v["general_reason"]["kind"], "general");
    assert!(v.get("sufficient_reasons").is_none());
}

#[test]
fn robustness_and_flips_subcommands() {
    let (forest, instance) = (data("susan.json"), data("susan_instance.json"));
    let run = |cmd| ok_json(&foret(&[cmd, "--forest", path(&forest), "--instance", path(&instance)]));
    let r = run("robustness");
    assert_eq!(r["robustness"]["distance"], 1);
    assert!(r.get("flips").is_none());
    let f = run("flips");
    assert_eq!(f["flips"].as_array().unwrap().len(), 1);
}

#[test]
fn compiled_artifacts_feed_explain() {
    let dir = TempDir::new().unwrap();
    let art = dir.path().join("xyz.json");
    let out = foret(&[
        "compile",
        "--forest",
        path(&data("xyz.json")),
        "--mode",
        "dg-full",
        "--out",
        path(&art),
    ]);
    let stats = ok_json(&out);
    assert_eq!(stats.as_array().unwrap().len(), 3);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&art).unwrap()).unwrap();
    assert_eq!(saved.as_array().unwrap().len(), 3);

    let v = ok_json(&foret(&[
        "explain",
        "--forest",
        path(&data("xyz.json")),
        "--artifact",
        path(&art),
        "--instance",
        path(&data("xyz_instance.json")),
        "--kinds",
        "sr",
    ]));
    assert_eq!(v["class"], "c3");
    assert_eq!(
        v["sufficient_reasons"],
        json!([[lits("X", &["x2"]), lits("Y", &["y2"]), lits("Z", &["z3"])]])
    );
}

#[test]
fn nnf_artifacts_cannot_give_reasons() {
    let dir = TempDir::new().unwrap();
    let art = dir.path().join("a.json");
    let stats = dir.path().join("s.json");
    ok_json(&foret(&[
        "compile",
        "--forest",
        path(&data("susan.json")),
        "--class",
        "yes",
        "--out",
        path(&art),
        "--stats",
        path(&stats),
    ]));
    assert!(stats.exists());
    let out = foret(&[
        "explain",
        "--forest",
        path(&data("susan.json")),
        "--artifact",
        path(&art),
        "--instance",
        path(&data("susan_instance.json")),
    ]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    assert!(stderr(&out).contains("dg-conj or dg-full"), "{}", stderr(&out));
}

#[test]
fn contrastive_explanations() {
    let v = ok_json(&foret(&[
        "ce",
        "--forest",
        path(&data("xyz.json")),
        "--instance",
        path(&data("xyz_instance.json")),
        "--target",
        "c1",
    ]));
    assert_eq!(v["class"], json!(["c3"]));
    assert_eq!(v["contrastive_explanations"], json!([[lits("Y", &["y2"])]]));

    let own = foret(&[
        "ce",
        "--forest",
        path(&data("xyz.json")),
        "--instance",
        path(&data("xyz_instance.json")),
        "--target",
        "c3",
    ]);
    assert!(!own.status.success());
}

fn tied_forest(dir: &TempDir) -> (PathBuf, PathBuf) {
    let forest = json!({
        "features": [{"name": "X", "states": ["a", "b"]}],
        "classes": ["p", "q"],
        "trees": [{"leaf": 1}, {"leaf": 0}]
    });
    (
        write(dir, "tie.json", &forest),
        write(dir, "x.json", &json!({"X": "a"})),
    )
}

#[test]
fn ties_need_a_policy() {
    let dir = TempDir::new().unwrap();
    let (f, x) = tied_forest(&dir);
    let base = ["robustness", "--forest", path(&f), "--instance", path(&x)];
    let out = foret(&base);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("--class"), "{}", stderr(&out));

    let mut ranked = base.to_vec();
    ranked.extend(["--ties", "highest-ranked"]);
    let v = ok_json(&foret(&ranked));
    assert_eq!(v["class"], "p");
    assert_eq!(v["robustness"]["distance"], Value::Null);

    let mut explicit = base.to_vec();
    explicit.extend(["--class", "q"]);
    assert_eq!(ok_json(&foret(&explicit))["class"], "q");
}

#[test]
fn generated_forests_are_deterministic_and_verify() {
    let dir = TempDir::new().unwrap();
    let args = [
        "gen",
        "--seed",
        "11",
        "--trees",
        "8",
        "--classes",
        "2",
        "--depth",
        "4",
        "--states",
        "2",
    ];
    let a = foret(&args);
    let b = foret(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let f = dir.path().join("f.json");
    std::fs::write(&f, &a.stdout).unwrap();
    ok_json(&foret(&["compile", "--forest", path(&f), "--mode", "nnf"]));
    let v = ok_json(&foret(&[
        "verify",
        "--forest",
        path(&f),
        "--seed",
        "2",
        "--trials",
        "5",
        "--workers",
        "2",
    ]));
    assert_eq!(v["passed"], true, "{v}");
    assert_eq!(v["failed"], 0);
    assert!(v["checks"].as_u64().unwrap() > 0);
}

#[test]
fn single_class_forests_are_rejected() {
    let out = foret(&["gen", "--classes", "1"]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    assert!(stderr(&out).contains("2 classes"));
}

#[test]
fn stats_side_by_side() {
    let out = foret(&["stats", "--forest", path(&data("xyz.json"))]);
    let v = ok_json(&out);
    let classes = v["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 3);
    for c in classes {
        for mode in ["nnf", "dg-conj"] {
            let cell = &c["modes"][mode];
            assert!(cell["nodes"].as_u64().unwrap() > 0);
            let s = cell["seconds"].as_f64().unwrap();
            assert_eq!((s * 1000.0).round() / 1000.0, s);
        }
    }
    let table = stderr(&out);
    let header = table.lines().next().unwrap();
    assert!(
        header.contains("nnf nodes") && header.contains("dg-conj nodes"),
        "{table}"
    );
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn constant_artifact_has_one_node() {
    let dir = TempDir::new().unwrap();
    let forest = json!({
        "features": [{"name": "X", "states": ["a", "b"]}],
        "classes": ["p", "q"],
        "trees": [{"leaf": 0}]
    });
    let f = write(&dir, "const.json", &forest);
    let art = dir.path().join("p.json");
    ok_json(&foret(&[
        "compile",
        "--forest",
        path(&f),
        "--class",
        "p",
        "--out",
        path(&art),
    ]));
    let v = ok_json(&foret(&["stats", "--artifact", path(&art)]));
    assert_eq!(v["classes"][0]["modes"]["nnf"]["nodes"], 1);
}

#[test]
fn node_budget_from_environment_and_flag() {
    let f = path(&data("xyz.json")).to_string();
    let args = ["compile", "--forest", f.as_str(), "--mode", "dg-full"];
    let starved = foret_env(&args, &[("FORET_NODE_BUDGET", "3")]);
    assert!(!starved.status.success());
    assert!(stderr(&starved).contains("node budget"), "{}", stderr(&starved));

    let mut flagged = args.to_vec();
    flagged.extend(["--node-budget", "100000"]);
    ok_json(&foret_env(&flagged, &[("FORET_NODE_BUDGET", "3")]));

    let zero = foret_env(&args, &[("FORET_NODE_BUDGET", "0")]);
    assert!(!zero.status.success());
}

#[test]
fn comparator_schedule() {
    let v = ok_json(&foret(&["schedule", "--inputs", "8"]));
    let triples = v.as_array().unwrap();
    assert_eq!(triples.len(), 19);
    assert_eq!(triples[0], json!([1, 1, 2]));
    let layers = triples.iter().map(|t| t[0].as_u64().unwrap()).max().unwrap();
    assert_eq!(layers, 6);
    assert!(!foret(&["schedule", "--inputs", "6"]).status.success());
}

#[test]
fn help_documents_formats() {
    let out = foret(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for key in ["forest", "instance", "artifact", "contrastive_explanations"] {
        assert!(text.contains(key), "{key}");
    }
}

#[test]
fn malformed_input_is_reported() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", &json!({"features": []}));
    let out = foret(&["compile", "--forest", path(&bad)]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    assert!(stderr(&out).starts_with("error:"));
}
