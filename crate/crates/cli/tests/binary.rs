// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use hvcell::gdsio::{GdsElement, GdsLibrary, GdsStructure};
use hvcell::interact::PlacedInstance;
use hvcell::pcell::{evaluate_params, DeviceParams};
use hvcell::{generate, write_gds, Design, Point, TechnologyData, Transform};
use tempfile::TempDir;

fn hvcell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hvcell"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn boundary(layer: i16, x0: i64, y0: i64, x1: i64, y1: i64) -> GdsElement {
    GdsElement::Boundary {
        layer,
        datatype: 0,
        points: vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
            Point::new(x0, y0),
        ],
    }
}

fn write_library(path: &Path, elements: Vec<GdsElement>) {
    let mut lib = GdsLibrary::new("T");
    lib.structures.push(GdsStructure { name: "TOP".into(), elements });
    std::fs::write(path, write_gds(&lib).unwrap()).unwrap();
}

#[test]
fn generate_writes_a_clean_cell() {
    let dir = TempDir::new().unwrap();
    let gds = path(&dir, "m.gds");
    let o = hvcell(&["generate", "pmos20t", "--fingers", "3", "--w", "6", "--guard-ring", "50v", "-o", &gds]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("PMOS20T_"));
    let o = hvcell(&["drc", &gds]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).ends_with("0 violations\n"));
    let o = hvcell(&["dbcomp", &gds, &gds]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "congruent\n");
}

#[test]
fn generate_json_reports_dbu() {
    let o = hvcell(&["generate", "capmim", "--l", "12.5", "--w", "20", "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["params"]["l"], 12_500);
    assert_eq!(v["params"]["w"], 20_000);
}

#[test]
fn parameter_and_device_errors_exit_2() {
    let o = hvcell(&["generate", "bjt"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bjt"), "{}", stderr(&o));
    let o = hvcell(&["generate", "nmos5", "--fingers", "0"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("fingers"), "{}", stderr(&o));
    let o = hvcell(&["generate", "nmos5", "--l=-1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("positive"), "{}", stderr(&o));
    let o = hvcell(&["generate", "nmos5", "--l", "0.1", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["params"]["l"], 500);
}

#[test]
fn usage_and_io_errors_exit_2() {
    assert_eq!(code(&hvcell(&[])), 2);
    assert_eq!(code(&hvcell(&["frobnicate"])), 2);
    assert_eq!(code(&hvcell(&["drc", "/nonexistent/x.gds"])), 2);
    assert_eq!(code(&hvcell(&["generate", "nmos5", "--tech", "/nonexistent/x.tech"])), 2);
    let dir = TempDir::new().unwrap();
    let junk = path(&dir, "junk.gds");
    std::fs::write(&junk, b"not a stream").unwrap();
    let o = hvcell(&["dbcomp", &junk, &junk]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&hvcell(&["--help"])), 0);
}

#[test]
fn drc_findings_exit_1() {
    let tech = TechnologyData::demo();
    let met1 = tech.layer("met1").unwrap().gds_layer;
    let dir = TempDir::new().unwrap();
    let gds = path(&dir, "bad.gds");
    write_library(Path::new(&gds), vec![boundary(met1, 0, 0, 2000, 2000), boundary(met1, 2050, 0, 4000, 2000)]);
    let o = hvcell(&["drc", &gds]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    let o = hvcell(&["drc", &gds, "--json"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!v.as_array().unwrap().is_empty());
    assert_eq!(code(&hvcell(&["drc", &gds, "--top", "MISSING"])), 2);
}

#[test]
fn dbcomp_differences_exit_1() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.gds"), path(&dir, "b.gds"));
    write_library(Path::new(&a), vec![boundary(1, 0, 0, 100, 100)]);
    write_library(Path::new(&b), vec![boundary(1, 0, 0, 100, 105)]);
    let o = hvcell(&["dbcomp", &a, &b]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("1 only in A"), "{}", stdout(&o));
}

#[test]
fn lvs_exit_codes() {
    let tech = TechnologyData::demo();
    let cell = generate(&evaluate_params(&DeviceParams::defaults("respoly").unwrap(), &tech).unwrap(), &tech).unwrap();
    let inst = PlacedInstance::new("R1", cell, Transform::identity()).with_nets([("PLUS", "a"), ("MINUS", "b")]);
    let design = Design { instances: vec![inst], wires: vec![] };
    let dir = TempDir::new().unwrap();
    let (d, good, bad) = (path(&dir, "d.json"), path(&dir, "good.sp"), path(&dir, "bad.sp"));
    std::fs::write(&d, serde_json::to_string(&design).unwrap()).unwrap();
    std::fs::write(&good, "* divider\nRX respoly n1 n2 l=20u w=1u\n.end\n").unwrap();
    std::fs::write(&bad, "RX respoly n1 n2 l=20u w=1u\nRY respoly n2 n3 l=20u w=1u\n").unwrap();
    let o = hvcell(&["lvs", &d, &good]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).starts_with("LVS CLEAN"));
    let o = hvcell(&["lvs", &d, &bad]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    let o = hvcell(&["lvs", &d, &bad, "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["clean"], false);
    std::fs::write(&bad, "Q1 npn a b c\n").unwrap();
    assert_eq!(code(&hvcell(&["lvs", &d, &bad])), 2);
}
