//! End-to-end runs of the `ptkitaev` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ptkitaev::sweep::{read_csv, CellStatus};

fn ptkitaev(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptkitaev"))
        .args(args)
        .env_remove("PTKITAEV_WORKERS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn threshold_of_twenty_site_chain() {
    let o = ptkitaev(&["threshold", "--n", "20", "--mu", "0", "--delta", "0", "--m0", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let v: f64 = text.trim().strip_prefix("gamma_th/J = ").unwrap().parse().unwrap();
    assert!((v - 1.0).abs() <= 0.02, "{text}");
}

#[test]
fn single_site_spectrum() {
    let o = ptkitaev(&["spectrum", "--n", "1", "--mu", "2", "--gamma", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, vec!["-1.0000000000 +0.0000000000i", "+1.0000000000 +0.0000000000i"]);
}

#[test]
fn exit_codes() {
    assert_eq!(ptkitaev(&["--help"]).status.code(), Some(0));
    assert_eq!(ptkitaev(&["threshold", "--nope"]).status.code(), Some(1));
    assert_eq!(ptkitaev(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ptkitaev(&["threshold", "--n", "6", "--m0", "5"]).status.code(), Some(1));
    assert_eq!(ptkitaev(&["threshold", "--gamma-max", "-1"]).status.code(), Some(1));
    let zero_workers = Command::new(env!("CARGO_BIN_EXE_ptkitaev"))
        .args(["threshold", "--n", "2"])
        .env("PTKITAEV_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(zero_workers.status.code(), Some(1));
}

#[test]
fn rescaling_j_leaves_printed_output_unchanged() {
    let a = ptkitaev(&["threshold", "--n", "8", "--delta", "1.2", "--intervals"]);
    let b = ptkitaev(&["threshold", "--n", "8", "--j", "2", "--delta", "2.4", "--intervals"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let a = ptkitaev(&["spectrum", "--n", "5", "--mu", "0.3", "--delta", "0.7", "--gamma", "0.4", "--m0", "2"]);
    let b = ptkitaev(&["spectrum", "--n", "5", "--j", "2", "--mu", "0.6", "--delta", "1.4", "--gamma", "0.8", "--m0", "2"]);
    assert_eq!(stdout(&a), stdout(&b));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn sidecar_replays_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();
    let o = ptkitaev(&[
        "map-mu-delta", "--n", "6", "--m0", "3", "--grid", "7x5", "--out", out_s, "--workers", "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = snapshot(&out);
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, vec!["map-mu-delta.config.json", "map-mu-delta.csv", "map-mu-delta.json", "map-mu-delta.ppm"]);

    for (name, _) in &first {
        if !name.ends_with("config.json") {
            fs::remove_file(out.join(name)).unwrap();
        }
    }
    let cfg = out.join("map-mu-delta.config.json");
    let o = ptkitaev(&["--config", cfg.to_str().unwrap(), "--workers", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(snapshot(&out), first);
}

#[test]
fn reentrant_map_shows_a_detached_symmetric_island() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = ptkitaev(&["reentrant-map", "--n", "8", "--mu", "0", "--m0", "1", "--grid", "121x161", "--out", out, "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = read_csv(dir.path().join("reentrant-map.csv")).unwrap();
    assert_eq!((g.x.n, g.y.n), (121, 161));
    // columns whose floor cells resume after a broken stretch
    let reentrant: Vec<f64> = (0..g.x.n)
        .filter(|&ix| {
            let col: Vec<bool> = (0..g.y.n).map(|iy| g.status_at(ix, iy) == CellStatus::Floor).collect();
            let first_broken = col.iter().position(|f| !f);
            first_broken.is_some_and(|k| col[k..].iter().any(|f| *f))
        })
        .map(|ix| g.x.value(ix))
        .collect();
    assert!(!reentrant.is_empty());
    let (lo, hi) = (reentrant[0], *reentrant.last().unwrap());
    assert!(lo >= 1.0 - 0.05 && hi <= 2f64.sqrt() + 0.05, "island spans δ ∈ [{lo}, {hi}]");
    assert!(reentrant.contains(&1.2));
}

#[test]
fn ep_commands() {
    let o = ptkitaev(&["ep-order", "--n", "8", "--delta", "1", "--gamma", "2.0001"]);
    assert!(stdout(&o).starts_with("EP order: 3"), "{}", stdout(&o));
    let dir = tempfile::tempdir().unwrap();
    let o = ptkitaev(&["ep-contours", "--n", "8", "--grid", "32x32", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("lowest crossing on δ = 0: γ/J = 1.0000"), "{}", stdout(&o));
    let points = fs::read_to_string(dir.path().join("ep-contours.points.csv")).unwrap();
    assert!(points.starts_with("delta,gamma,pair_count_low,pair_count_high,rowsum\n"));
    assert!(ptkitaev(&["ep-contours", "--grid", "8x8"]).status.code() == Some(1));
}

#[test]
fn analytic_check_table() {
    let o = ptkitaev(&["analytic-check"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.matches("PASS").count(), 5, "{text}");
    assert_eq!(text.matches("REJECTED").count(), 2, "{text}");
    assert!(!text.contains("FAIL"));
}
