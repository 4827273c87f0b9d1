use std::process::Command;

use clap::Parser;
use serde_json::Value;

use betatile_cli::{run, Cli};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_betatile"))
}

fn run_args(args: &[&str]) -> betatile::Result<betatile_cli::Outcome> {
    let mut v = vec!["betatile"];
    v.extend_from_slice(args);
    run(&Cli::try_parse_from(v).expect("arguments parse"))
}

#[test]
fn analyze_exit_codes_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    let st = bin()
        .args(["--poly", "1,-3,-2", "--json", path.to_str().unwrap(), "analyze", "--max-den", "40"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let d: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(d["verdict"], "Tiling");
    assert_eq!(d["qm"], true);
    assert_eq!(d["gamma"]["exact_value"]["pretty"], "(-b + 5)/8");
    assert_eq!(d["config"]["poly"], "1,-3,-2");
}

#[test]
fn analyze_reports_family_note() {
    let o = run_args(&["--poly", "1,0,-1,-1", "analyze", "--max-den", "20"]).unwrap();
    assert_eq!(o.json["qm"], false);
    assert!(o.json["notes"][0].as_str().unwrap().contains("(QM) fails"));
    assert_eq!(o.exit_code, 0);
}

#[test]
fn fig2_lattice() {
    let o = run_args(&["--poly", "1,-2,-2", "parry"]).unwrap();
    let l = &o.json["lattice_basis"];
    assert_eq!(l.as_array().unwrap().len(), 1);
    assert_eq!(l[0]["pretty"], "b - 3");
    assert_eq!(o.json["v"][1]["pretty"], "b - 2");
}

#[test]
fn errors_are_machine_readable() {
    let out = bin().args(["--poly", "1,2,3", "parry"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let d: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(d["error"]["code"], "NotPisot");
    let e = run_args(&["--poly", "1,0,-1,-1", "--level", "4", "--svg", "x.svg", "tiles", "--target", "per"]).unwrap_err();
    assert_eq!(e.code(), "QMViolated");
    let e = run_args(&["--poly", "1,-1,0,-1", "gamma", "--method", "quadratic"]).unwrap_err();
    assert_eq!(e.code(), "BadParameters");
}

#[test]
fn svg_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for i in 0..2 {
        let p = dir.path().join(format!("t{i}.svg"));
        let st = bin()
            .args(["--poly", "1,-2,-2", "--level", "6", "--svg", p.to_str().unwrap(), "tiles", "--target", "aper"])
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(st.success());
        bodies.push(std::fs::read(&p).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    let s = String::from_utf8(bodies.remove(0)).unwrap();
    assert!(s.contains("\"command\":\"tiles\""));
    // |T^{-2}(0)| = 3 + 3 + 2
    assert_eq!(s.matches("<g id=\"tile").count(), 8);
}

#[test]
fn natext_is_seeded() {
    let a = run_args(&["--poly", "1,-2,-2", "--level", "6", "natext", "--samples", "300", "--seed", "5"]).unwrap();
    let b = run_args(&["--poly", "1,-2,-2", "--level", "6", "natext", "--samples", "300", "--seed", "5"]).unwrap();
    assert_eq!(a.json, b.json);
    assert_eq!(a.json["modal_count"], 1);
    let c = run_args(&["--poly", "1,-2,-2", "--level", "6", "natext", "--samples", "50", "--window", "1,2"]).unwrap();
    assert_eq!(c.json["out_of_stripe"], 50);
}

#[test]
fn dot_round_trip() {
    let o = run_args(&["--poly", "1,-3,-2", "boundary-graph"]).unwrap();
    let dot = o.dot.unwrap();
    let edges = betatile::boundary::parse_dot_edges(&dot).unwrap();
    assert_eq!(edges.values().sum::<usize>(), o.json["edges"].as_array().unwrap().len());
    assert_eq!(o.json["decision"]["verdict"], "Tiling");
}

#[test]
fn gamma_methods() {
    let o = run_args(&["--poly", "1,-3,-2", "gamma", "--method", "quadratic"]).unwrap();
    let lo = o.json["enclosure"]["lo_f64"].as_f64().unwrap();
    assert!((lo - 0.17977).abs() < 1e-3);
    let o = run_args(&["--poly", "1,-1,-1", "gamma", "--max-den", "30"]).unwrap();
    assert!(o.json["scan"]["first_non_pp"].is_null());
    let o = run_args(&["--poly", "1,-3,-2", "--level", "6", "gamma", "--method", "thm5"]).unwrap();
    assert_eq!(o.json["bound"]["inner_certified"], true);
}

#[test]
fn purper_point() {
    let o = run_args(&["--poly", "1,-3,-2", "purper", "--x", "1/2"]).unwrap();
    assert_eq!(o.json["point"]["report"]["purely_periodic"], false);
    assert_eq!(o.json["point"]["in_natural_extension"], false);
    assert_eq!(o.json["w_holds"], true);
}
