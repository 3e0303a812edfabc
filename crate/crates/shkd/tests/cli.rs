// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn shkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shkd")).args(args).output().expect("binary runs")
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/scenarios").join(name).to_string_lossy().into_owned()
}

fn out_dir(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn read(dir: &str, file: &str) -> String {
    std::fs::read_to_string(PathBuf::from(dir).join(file)).unwrap()
}

#[test]
fn simulate_worked_instance() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "run");
    let o = shkd(&["simulate", "--scenario", &scenario("worked_gf7.json"), "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read(&out, "summary.txt");
    assert!(summary.contains("healed: 1\n"), "{summary}");
    assert!(read(&out, "run_report.csv").contains("U1,1,healed-from-2,false"));
    let mut names: Vec<String> =
        std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    assert_eq!(names, ["run_report.csv", "sessions.csv", "storage.csv", "summary.txt"]);
}

#[test]
fn simulate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (out_dir(&tmp, "a"), out_dir(&tmp, "b"));
    for out in [&a, &b] {
        let o = shkd(&["simulate", "--scenario", &scenario("threshold_20.json"), "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["run_report.csv", "sessions.csv", "storage.csv", "summary.txt"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
}

#[test]
fn override_changes_losses() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (out_dir(&tmp, "a"), out_dir(&tmp, "b"));
    let s = scenario("threshold_20.json");
    assert_eq!(shkd(&["simulate", "--scenario", &s, "--out", &a]).status.code(), Some(0));
    let o = shkd(&["simulate", "--scenario", &s, "--out", &b, "--override", "seed.loss=4242"]);
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(read(&a, "run_report.csv"), read(&b, "run_report.csv"));
    let o = shkd(&["simulate", "--scenario", &s, "--out", &b, "--override", "seed.pepper=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_and_invalid_configs_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, "{ \"field\": { \"q\": 7 }, ").unwrap();
    let o = shkd(&["simulate", "--scenario", bad.to_str().unwrap(), "--out", &out_dir(&tmp, "x")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());

    let text = std::fs::read_to_string(scenario("worked_gf7.json")).unwrap().replace("\"q\": 7", "\"q\": 8");
    std::fs::write(&bad, text).unwrap();
    let o = shkd(&["simulate", "--scenario", bad.to_str().unwrap(), "--out", &out_dir(&tmp, "x")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("x").exists());

    let o = shkd(&["simulate", "--scenario", "/nonexistent/s.json", "--out", &out_dir(&tmp, "x")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn system_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("fail.json");
    // U2 and U3 both leave after session 1; together they can rebuild the key
    let text = std::fs::read_to_string(scenario("worked_gf7.json"))
        .unwrap()
        .replace(
            "{ \"id\": 2, \"cycle\": [1, 3] }",
            "{ \"id\": 2, \"cycle\": [1, 1] }, { \"id\": 3, \"cycle\": [1, 1] }",
        )
        .replace("\"dummies\": { \"count\": 0 }", "\"dummies\": { \"count\": 1 }");
    std::fs::write(&path, text).unwrap();
    let out = out_dir(&tmp, "f");
    let o = shkd(&["simulate", "--scenario", path.to_str().unwrap(), "--out", &out]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(&out, "summary.txt").contains("system failed at session 2"));
}

#[test]
fn attack_stock_scenarios_pass() {
    let tmp = tempfile::tempdir().unwrap();
    for s in ["worked_gf7.json", "multipartite.json", "threshold_20.json"] {
        let out = out_dir(&tmp, s);
        let o = shkd(&["attack", "--scenario", &scenario(s), "--property", "all", "--out", &out]);
        assert_eq!(o.status.code(), Some(0), "{s}: {}", String::from_utf8_lossy(&o.stdout));
        let v = read(&out, "verdicts.csv");
        assert!(v.starts_with("property,mode,session"));
        assert!(!v.contains(",false\n"));
    }
}

#[test]
fn mutation_flips_collusion() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "m");
    let o = shkd(&[
        "attack",
        "--scenario",
        &scenario("threshold_20.json"),
        "--property",
        "collusion",
        "--out",
        &out,
        "--remove-beta-blocker",
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(read(&out, "verdicts.csv").lines().skip(1).all(|l| l.starts_with("collusion,") && l.ends_with(",false")));
}

#[test]
fn bench_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bench.csv");
    let o = shkd(&["bench", "--t", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let golden = include_bytes!("golden/bench_t10.csv");
    assert_eq!(std::fs::read(&out).unwrap(), golden);
    let o = shkd(&["bench", "--t", "10"]);
    assert_eq!(o.stdout, golden);
    assert!(String::from_utf8_lossy(golden).contains("Ours,communication,(T_j+1) log q,100,67,10,50,100,10,bits,77\n"));
}

#[test]
fn bench_rejects_bad_params() {
    assert_eq!(shkd(&["bench", "--t", "10", "--q", "68"]).status.code(), Some(2));
    assert_eq!(shkd(&["bench", "--t", "10", "--j", "101"]).status.code(), Some(2));
    assert_eq!(shkd(&["bench", "--t", "0"]).status.code(), Some(2));
    assert_eq!(shkd(&["bench", "--t", "-3"]).status.code(), Some(2));
    assert_eq!(shkd(&["bench"]).status.code(), Some(2));
}

#[test]
fn bench_comparison_drops_storage() {
    let o = shkd(&["bench", "--t", "4", "--comparison"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(!text.contains(",storage,"));
}
