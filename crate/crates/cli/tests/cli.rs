use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use vne_core::embed::Embedding;
use vne_core::topology::SubstrateNetwork;
use vne_core::vnr::{motivating_example, Vnr};

fn vne(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vne"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited")
}

/// Two access nodes per side joined through one L-R link.
fn bottleneck_file(dir: &Path, capacity: f64) -> PathBuf {
    let mut sn = SubstrateNetwork::new();
    let ids: Vec<_> = ["A", "B", "C", "D", "L", "R"]
        .iter()
        .map(|n| sn.add_node(*n, None).unwrap())
        .collect();
    sn.add_link("A-L", ids[0], ids[4], 1000.0, 1.0).unwrap();
    sn.add_link("B-L", ids[1], ids[4], 1000.0, 1.0).unwrap();
    sn.add_link("L-R", ids[4], ids[5], capacity, 1.0).unwrap();
    sn.add_link("R-C", ids[5], ids[2], 1000.0, 1.0).unwrap();
    sn.add_link("R-D", ids[5], ids[3], 1000.0, 1.0).unwrap();
    let path = dir.join("bottleneck.json");
    sn.save(&path).unwrap();
    path
}

#[test]
fn gen_topo_b4_and_random() {
    let dir = TempDir::new().unwrap();
    let out = vne(dir.path(), &["gen-topo", "--kind", "b4", "--bandwidth", "1200", "--out", "b4.json"]);
    assert_eq!(code(&out), 0);
    let sn = SubstrateNetwork::load(dir.path().join("b4.json")).unwrap();
    assert_eq!((sn.node_count(), sn.link_count()), (14, 25));
    assert!(dir.path().join("b4.json.manifest.json").exists());

    let args = |name: &str| {
        ["gen-topo", "--kind", "random", "--nodes", "3", "--prob", "1", "--seed", "4", "--out", name]
            .map(String::from)
    };
    for name in ["r1.json", "r2.json"] {
        let a = args(name);
        let a: Vec<&str> = a.iter().map(String::as_str).collect();
        assert_eq!(code(&vne(dir.path(), &a)), 0);
    }
    let r1 = fs::read_to_string(dir.path().join("r1.json")).unwrap();
    assert_eq!(r1, fs::read_to_string(dir.path().join("r2.json")).unwrap());
    assert_eq!(SubstrateNetwork::from_json(&r1).unwrap().link_count(), 3);
}

#[test]
fn gen_vnr_round_trips() {
    let dir = TempDir::new().unwrap();
    vne(dir.path(), &["gen-topo", "--kind", "b4", "--out", "b4.json"]);
    let out = vne(dir.path(), &["gen-vnr", "--topo", "b4.json", "--seed", "7", "--out", "r.json"]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("r.json")).unwrap();
    let vnr = Vnr::from_json(&text).unwrap();
    assert_eq!(vnr.to_json(), text);
}

#[test]
fn embed_motivating_example() {
    let dir = TempDir::new().unwrap();
    let topo = bottleneck_file(dir.path(), 200.0);
    let sn = SubstrateNetwork::load(&topo).unwrap();
    motivating_example().save(dir.path().join("vnr.json")).unwrap();

    let out = vne(dir.path(), &["embed", "--topo", "bottleneck.json", "--vnr", "vnr.json", "--alg", "mpor", "--out", "mpor.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let emb = Embedding::load(dir.path().join("mpor.json"), &sn).unwrap();
    let lr = sn.link_id("L-R").unwrap().0;
    assert!((emb.allocation[lr] - 200.0).abs() < 1e-6);
    let report = fs::read_to_string(dir.path().join("mpor.json.verify.json")).unwrap();
    assert!(report.contains("\"ok\": true"));

    let out = vne(dir.path(), &["verify", "--topo", "bottleneck.json", "--vnr", "vnr.json", "--embedding", "mpor.json"]);
    assert_eq!(code(&out), 0);

    let out = vne(dir.path(), &["embed", "--topo", "bottleneck.json", "--vnr", "vnr.json", "--alg", "mpic", "--out", "mpic.json"]);
    assert_eq!(code(&out), 2);
    assert!(!dir.path().join("mpic.json").exists());
    let manifest = fs::read_to_string(dir.path().join("mpic.json.manifest.json")).unwrap();
    assert!(manifest.contains("lp_infeasible"));

    let out = vne(dir.path(), &["embed", "--topo", "bottleneck.json", "--vnr", "vnr.json", "--alg", "spic", "--k", "0", "--out", "s.json"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn verify_flags_a_shrunk_allocation() {
    let dir = TempDir::new().unwrap();
    let topo = bottleneck_file(dir.path(), 200.0);
    let sn = SubstrateNetwork::load(&topo).unwrap();
    motivating_example().save(dir.path().join("vnr.json")).unwrap();
    vne(dir.path(), &["embed", "--topo", "bottleneck.json", "--vnr", "vnr.json", "--alg", "mpor", "--out", "e.json"]);
    let mut emb = Embedding::load(dir.path().join("e.json"), &sn).unwrap();
    emb.allocation[sn.link_id("L-R").unwrap().0] = 150.0;
    fs::write(dir.path().join("bad.json"), emb.to_json(&sn)).unwrap();
    let out = vne(dir.path(), &["verify", "--topo", "bottleneck.json", "--vnr", "vnr.json", "--embedding", "bad.json", "--report", "bad.report.json"]);
    assert_eq!(code(&out), 2);
    let report = fs::read_to_string(dir.path().join("bad.report.json")).unwrap();
    assert!(report.contains("L-R"));
}

#[test]
fn io_and_usage_errors() {
    let dir = TempDir::new().unwrap();
    let out = vne(dir.path(), &["embed", "--topo", "missing.json", "--vnr", "x.json", "--alg", "mpor", "--out", "e.json"]);
    assert_eq!(code(&out), 3);
    fs::write(dir.path().join("junk.json"), "{ not json").unwrap();
    let out = vne(dir.path(), &["gen-vnr", "--topo", "junk.json", "--out", "r.json"]);
    assert_eq!(code(&out), 3);
    assert_eq!(code(&vne(dir.path(), &["simulate", "--horizon", "0", "--out", "s.csv"])), 1);
    assert_eq!(code(&vne(dir.path(), &["embed", "--alg", "nonsense"])), 1);
    assert_eq!(code(&vne(dir.path(), &["frobnicate"])), 1);
}

#[test]
fn simulate_writes_metrics_and_events() {
    let dir = TempDir::new().unwrap();
    let out = vne(
        dir.path(),
        &["simulate", "--alg", "mpic", "--bandwidth", "400", "--horizon", "10", "--seed", "2", "--out", "m.csv", "--events", "ev.json"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("m.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "topology,bandwidth,algorithm,seed,acceptance_rate,avg_link_utility,avg_cost_all,avg_cost_small,embed_time_s,n_vnrs"
    );
    assert!(lines[1].starts_with("b4,400.0,mpic,2,"));
    let events: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("ev.json")).unwrap()).unwrap();
    let n: usize = lines[1].rsplit(',').next().unwrap().parse().unwrap();
    let arrivals = events
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["event"] == "arrival")
        .count();
    assert_eq!(arrivals, n);
}

#[test]
fn default_sweep_grid_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let out = vne(dir.path(), &["sweep", "--horizon", "4", "--no-timing", "--out", name]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        fs::read_to_string(dir.path().join(name)).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a.lines().count(), 37);
    assert_eq!(a, run("b.csv"));
    let manifest = fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap();
    assert!(manifest.contains("\"command\": \"sweep\""));
}
