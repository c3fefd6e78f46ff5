use std::fs;

use lsq::{run, CurveTable, DiskStore, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_PASS, EXIT_USAGE};
use lsq_core::verify::{class_set, modsym_space, MemoryStore, Store};

fn lsq(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = run(std::iter::once("lsq").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

#[test]
fn bundled_table_conductors() {
    let t = CurveTable::bundled();
    let labels: Vec<String> = t.labels().map(String::from).collect();
    assert!(labels.len() >= 50);
    for l in &labels {
        let e = t.get(l).unwrap();
        for ld in e.all_local_data().unwrap() {
            assert!(ld.satisfies_ogg(), "{l} at {}", ld.prime);
        }
    }
}

#[test]
fn curve_arguments() {
    let t = CurveTable::bundled();
    let a = t.parse("11a1").unwrap();
    assert_eq!(t.parse("0,-1,1,-10,-20").unwrap(), a);
    assert_eq!(t.parse("[0, -1, 1, -10, -20]").unwrap(), a);
    assert!(t.parse("0,0,0,0,0").is_err());
    assert!(t.parse("1,2,3").is_err());
    assert!(t.parse("nope").is_err());
}

#[test]
fn extra_table() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    fs::write(&good, "label,a1,a2,a3,a4,a6,conductor\nmine,0,0,1,-1,0,37\n").unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "label,a1,a2,a3,a4,a6,conductor\nmine,0,0,1,-1,0,38\n").unwrap();
    let cache = dir.path().join("c");
    let c = cache.to_str().unwrap();
    let (code, _) = lsq(&["--cache-dir", c, "--table", good.to_str().unwrap(), "degree-class", "--curve", "mine", "--q", "37"]);
    assert_eq!(code, EXIT_PASS);
    let (code, _) = lsq(&["--cache-dir", c, "--table", bad.to_str().unwrap(), "degree-class", "--curve", "mine", "--q", "37"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn disk_store_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut disk = DiskStore::new(dir.path().join("cache"));
    assert!(disk.load(11, 1).is_none());
    let set = class_set(&mut disk, 11, 1, lsq_core::brandt::DEFAULT_BOUND).unwrap();
    assert_eq!(disk.load(11, 1), Some(set.clone()));
    let space = modsym_space(&mut disk, 37, lsq_core::modsym::DEFAULT_LEVEL_BOUND).unwrap();
    let back = disk.load_space(37).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&space).unwrap());

    // unreadable entries are recomputed
    let path = fs::read_dir(disk.dir()).unwrap().map(|e| e.unwrap().path()).find(|p| {
        p.file_name().unwrap().to_str().unwrap().starts_with("classes-")
    });
    fs::write(path.unwrap(), "{ not json").unwrap();
    assert!(disk.load(11, 1).is_none());
    assert_eq!(class_set(&mut disk, 11, 1, lsq_core::brandt::DEFAULT_BOUND).unwrap(), set);
    assert_eq!(class_set(&mut MemoryStore::new(), 11, 1, lsq_core::brandt::DEFAULT_BOUND).unwrap(), set);
}

#[test]
fn reports_do_not_depend_on_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c");
    let c = c.to_str().unwrap();
    let mut outputs = Vec::new();
    for extra in [&["--cache-dir", c][..], &["--cache-dir", c], &["--no-cache"]] {
        let mut args = extra.to_vec();
        args.extend(["--json", "-", "degree-class", "--curve", "37b1", "--q", "37"]);
        let (code, out) = lsq(&args);
        assert_eq!(code, EXIT_PASS);
        outputs.push(out);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let v: serde_json::Value = serde_json::from_str(&outputs[0]).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["verdict"], "pass");
}

#[test]
fn json_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let (code, _) =
            lsq(&["--no-cache", "--json", p.to_str().unwrap(), "identity-suite", "--chi1", "-3", "--chi2", "-4", "--chi3", "5"]);
        assert_eq!(code, EXIT_PASS);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn exit_codes() {
    assert_eq!(lsq(&["--no-cache", "degree-class", "--curve", "15a1", "--q", "15"]).0, EXIT_FAIL);
    assert_eq!(lsq(&["--no-cache", "degree-class", "--curve", "99z9", "--q", "3"]).0, EXIT_USAGE);
    assert_eq!(lsq(&["--no-cache", "bogus"]).0, EXIT_USAGE);
    assert_eq!(lsq(&["--no-cache", "check-318", "--curve", "11a1", "--q", "11"]).0, EXIT_PASS);
    assert_eq!(lsq(&["--no-cache", "identity-suite", "--chi1", "5", "--chi2", "5", "--chi3", "-3"]).0, EXIT_FAIL);
    let (code, out) = lsq(&[
        "--no-cache",
        "square-value",
        "--curve",
        "11a1",
        "--chi1",
        "-7",
        "--chi2",
        "-3",
        "--delta-height",
        "1",
    ]);
    assert_eq!(code, EXIT_INCONCLUSIVE, "{out}");
    let (code, out) = lsq(&["--no-cache", "--json", "-", "pipeline", "--curve", "11a1", "--p", "22"]);
    assert_eq!(code, EXIT_FAIL);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["error"].as_str().unwrap().contains("not admissible"));
}

#[test]
fn local_data() {
    let (code, out) = lsq(&["--no-cache", "--json", "-", "local-data", "--curve", "11a3", "--prime", "11"]);
    assert_eq!(code, EXIT_PASS);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["tamagawa"], 1);
    assert_eq!(v["ord_disc"], 1);
    assert_eq!(v["ogg"], true);
    assert_eq!(lsq(&["--no-cache", "local-data", "--curve", "11a1", "--prime", "12"]).0, EXIT_USAGE);
}

#[test]
fn square_value_through_the_cli() {
    let (code, out) = lsq(&["--no-cache", "--json", "-", "square-value", "--curve", "11a1", "--chi1", "-7", "--deltas", "1"]);
    assert_eq!(code, EXIT_PASS, "{out}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["characters"]["chi2"], -3);
    assert_eq!(v["q"], 11);
    assert_eq!(v["reports"][0]["check"], "square_value");
}
