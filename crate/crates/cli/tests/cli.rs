use std::path::Path;
use std::process::{Command, Output};

fn rgcost(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rgcost"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn rankgrad_on_tori_is_one_over_m_squared() {
    let dir = tempfile::tempdir().unwrap();
    let o = rgcost(dir.path(), &["rankgrad", "--family", "Z2-torus", "--params", "2,3,4,5,6,7,8,9,10,11,12"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut m = 2;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let expect = 1.0 / (m * m) as f64;
        assert_eq!(rec[1].parse::<usize>().unwrap(), m * m);
        assert_eq!(rec[4].parse::<f64>().unwrap(), expect);
        assert_eq!(rec[5].parse::<f64>().unwrap(), expect);
        assert_eq!(&rec[7], "true");
        m += 1;
    }
    assert_eq!(m, 13);
}

#[test]
fn ccost_on_cycles_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = rgcost(
        dir.path(),
        &["ccost", "--family", "cycle", "--params", "11,13,20", "--L", "3", "--seed", "1", "--out", "cc"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("cc/ccost.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    for rec in rdr.records() {
        assert_eq!(rec.unwrap()[5].parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn malformed_graph_exits_two_with_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.elist"), "graph 4 2 2\n0 1\n# ok\n2 nine\n").unwrap();
    let o = rgcost(dir.path(), &["stats", "--graphs", "bad.elist"]);
    assert_eq!(o.status.code(), Some(2));
    let entry: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(entry["kind"], "input");
    assert_eq!(entry["line"], 4);
    assert_eq!(entry["path"], "bad.elist");
}

#[test]
fn rewire_writes_graph_and_report() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.elist"),
        "graph 6 6 2\n0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n",
    )
    .unwrap();
    let o = rgcost(
        dir.path(),
        &["rewire", "--graph", "c.elist", "--L", "3", "--budget", "500", "--seed", "7", "--out", "h.elist", "--report", "r.json"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["valid"], true);
    assert!(std::fs::read_to_string(dir.path().join("h.elist")).unwrap().starts_with("graph 6 "));
}

#[test]
fn analysis_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("z.pres"), "gens: a b\nrel: abAB\n").unwrap();
    std::fs::write(dir.path().join("h.sub"), "sub: a\n").unwrap();
    let o = rgcost(
        dir.path(),
        &["enumerate", "--presentation", "z.pres", "--subgroup", "h.sub", "--max-cosets", "50"],
    );
    assert_eq!(o.status.code(), Some(1));
    let entry: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(entry["kind"], "analysis");
}

const SPEC: &str = r#"
seed = 11
output_dir = "out"
deterministic = true
plot = true

[graphs.cycles]
files = ["c.elist"]
family = "cycle"
params = [11, 12]

[groups.tori]
family = "Z2-torus"
params = [2, 3, 4]

[[analysis]]
kind = "stats"
input = "cycles"
r = 2

[[analysis]]
kind = "ccost"
input = "cycles"
L = 3
budget = 2000

[[analysis]]
kind = "rankgrad"
input = "tori"

[[analysis]]
kind = "partition"
name = "torus-halves"
input = "tori"
k = 2

[[analysis]]
kind = "trichotomy"
input = "tori"
c = 0.5
budget = 5000
"#;

fn spec_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.toml"), SPEC).unwrap();
    std::fs::write(dir.path().join("c.elist"), "graph 5 5 2\n0 1\n1 2\n2 3\n3 4\n4 0\n").unwrap();
    dir
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let a = spec_dir();
    let b = spec_dir();
    for d in [&a, &b] {
        let o = rgcost(d.path(), &["run", "spec.toml"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ta = tree(&a.path().join("out"));
    let tb = tree(&b.path().join("out"));
    assert!(ta.len() > 5, "{:?}", ta.iter().map(|t| &t.0).collect::<Vec<_>>());
    assert_eq!(ta, tb);
    let manifest: serde_json::Value = serde_json::from_slice(&ta.iter().find(|t| t.0 == "manifest.json").unwrap().1).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["inputs"][1]["path"], "c.elist");
    assert!(manifest["errors"].as_array().unwrap().is_empty());
}

#[test]
fn manifest_detects_tampering() {
    let d = spec_dir();
    assert!(rgcost(d.path(), &["run", "spec.toml"]).status.success());
    let o = rgcost(d.path(), &["verify-manifest", "out/manifest.json"]);
    assert_eq!(stdout(&o).trim(), "ok");
    assert!(o.status.success());

    std::fs::write(d.path().join("c.elist"), "graph 5 5 2\n0 1\n1 2\n2 3\n3 4\n4 1\n").unwrap();
    let o = rgcost(d.path(), &["verify-manifest", "out/manifest.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("mismatch: c.elist"));
}

#[test]
fn spec_errors_are_reported_before_running() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("spec.toml"),
        "output_dir = \"out\"\n[[analysis]]\nkind = \"rewire\"\ninput = \"missing\"\n",
    )
    .unwrap();
    let o = rgcost(d.path(), &["run", "spec.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["errors"].as_array().unwrap().len(), 2);
    assert!(manifest["outputs"].as_array().unwrap().is_empty());
}

#[test]
fn plain_command_manifest() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("g.elist"), "graph 4 4 2\n0 1\n1 2\n2 3\n3 0\n").unwrap();
    let o = rgcost(
        d.path(),
        &["partition", "--graph", "g.elist", "--k", "2", "--eps", "0.1", "--out", "p.json", "--manifest", "m.json"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = rgcost(d.path(), &["verify-manifest", "m.json"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let p: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(p["partition"]["boundary_vertex_sum"], 4);
}
