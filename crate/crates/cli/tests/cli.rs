use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn ddlpb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddlpb")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Value of `key=` in the `#` comment lines.
fn footer(text: &str, key: &str) -> String {
    let needle = format!("{key}=");
    text.lines()
        .filter(|l| l.starts_with('#'))
        .flat_map(|l| l.trim_start_matches('#').trim().split(','))
        .find_map(|kv| kv.strip_prefix(&needle))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
        .to_string()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn born_ion_solve() {
    let born = fixture("born_ion.pqr");
    let out = ddlpb(&["solve", born.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# ddlpb-report/1\n"));
    assert!(text.contains("iteration,energy_kjmol,rel_error\n"));
    let e: f64 = footer(&text, "energy_kjmol").parse().unwrap();
    assert!((e + 343.67).abs() < 0.05, "{e}");
    assert_eq!(footer(&text, "converged"), "true");
}

#[test]
fn large_step_in_weak_solvent_exits_2() {
    let ion = fixture("offcenter_ion.pqr");
    let out = ddlpb(&["solve", ion.to_str().unwrap(), "--eps2", "0.5", "--alpha", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(footer(&stdout(&out), "converged"), "false");
}

#[test]
fn input_errors_exit_1() {
    assert_eq!(ddlpb(&["solve", "does/not/exist.pqr"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pqr");
    std::fs::write(&bad, "ATOM      1 NA   ION A   1       0.000   zero   0.000  1.0000 2.0000\n").unwrap();
    let out = ddlpb(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert_eq!(ddlpb(&["solve", "--no-such-flag"]).status.code(), Some(1));
    let born = fixture("born_ion.pqr");
    assert_eq!(ddlpb(&["solve", born.to_str().unwrap(), "--kappa", "0"]).status.code(), Some(1));
    assert_eq!(ddlpb(&["spectrum", "--radius", "-1"]).status.code(), Some(1));
}

#[test]
fn spectrum_table() {
    let text = stdout(&ddlpb(&["spectrum", "--radius", "1", "--eps2", "2", "--kappa", "1"]));
    assert!(text.contains("ell,lambda_r,lambda_c,lambda_e,mu\n"));
    let table = rows(&text);
    assert_eq!(table.len(), 8);
    let mu0: f64 = table[0][4].parse().unwrap();
    assert!((mu0 - 0.864666).abs() < 5e-6);
    assert_eq!(footer(&text, "C2"), "1");

    let text = stdout(&ddlpb(&["spectrum", "--radius", "1.5", "--eps1", "2", "--eps2", "2"]));
    assert_eq!(footer(&text, "C2"), "1");
}

#[test]
fn spectrum_footer_respects_lower_bound() {
    for radius in ["1", "2"] {
        for eps2 in ["0.5", "1", "2", "78.54"] {
            for kappa in ["0.104", "1"] {
                let out = ddlpb(&["spectrum", "--radius", radius, "--eps2", eps2, "--kappa", kappa, "--lmax", "50"]);
                assert_eq!(out.status.code(), Some(0));
                let text = stdout(&out);
                let c1: f64 = footer(&text, "C1").parse().unwrap();
                let lo: f64 = footer(&text, "mu_min").parse().unwrap();
                assert!(lo >= c1 - 1e-12, "R={radius} eps2={eps2} kappa={kappa}");
            }
        }
    }
}

#[test]
fn benzene_sweep_converges_everywhere() {
    let benzene = fixture("benzene.pqr");
    let out = ddlpb(&["sweep", benzene.to_str().unwrap(), "--alpha-grid", "0.1:0.1:1.9"]);
    assert_eq!(out.status.code(), Some(0));
    let table = rows(&stdout(&out));
    assert_eq!(table.len(), 19);
    assert!(table.iter().all(|r| r[2] == "true"));
}

#[test]
fn sweep_best_alpha_near_prediction() {
    let ion = fixture("offcenter_ion.pqr");
    let text = stdout(&ddlpb(&["sweep", ion.to_str().unwrap(), "--eps2", "2"]));
    let best: f64 = footer(&text, "best_alpha").parse().unwrap();
    let predicted: f64 = footer(&text, "practical_alpha").parse().unwrap();
    assert!((predicted - 4.0 / 3.0).abs() < 1e-12);
    assert!((best - predicted).abs() <= 0.3, "{best}");
}

#[test]
fn single_alpha_sweep_matches_solve() {
    let dimer = fixture("dimer.pqr");
    let path = dimer.to_str().unwrap();
    let solve = stdout(&ddlpb(&["solve", path, "--alpha", "0.7"]));
    let sweep = stdout(&ddlpb(&["sweep", path, "--alpha-grid", "0.7"]));
    let row = &rows(&sweep)[0];
    assert_eq!(row[0], "0.7");
    assert_eq!(row[1], footer(&solve, "n_ite"));
    assert_eq!(row[3], footer(&solve, "energy_kjmol"));
    assert_eq!(row[4], rows(&solve).last().unwrap()[2]);
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let benzene = fixture("benzene.pqr");
    let mut texts = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}.csv"));
        let status = ddlpb(&[
            "sweep",
            benzene.to_str().unwrap(),
            "--alpha-grid",
            "0.5,1.0",
            "--threads",
            "1",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(status.status.code(), Some(0));
        assert!(status.stdout.is_empty());
        texts.push(std::fs::read(out).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn json_mirrors_csv() {
    let born = fixture("born_ion.pqr");
    let csv = stdout(&ddlpb(&["solve", born.to_str().unwrap()]));
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&ddlpb(&["solve", born.to_str().unwrap(), "--format", "json"]))).unwrap();
    assert_eq!(json["format"], "ddlpb-report/1");
    assert_eq!(json["converged"], true);
    assert_eq!(json["n_ite"].to_string(), footer(&csv, "n_ite"));
    assert_eq!(json["config"]["lmax"], 7);
    assert_eq!(json["config"]["g0"], "zero");
    assert!(json["wall_time_s"].as_f64().unwrap() >= 0.0);
    let last = json["iterations"].as_array().unwrap().last().unwrap();
    let e: f64 = footer(&csv, "energy_kjmol").parse().unwrap();
    assert_eq!(last["energy_kjmol"].as_f64().unwrap(), e);

    let spectrum: serde_json::Value =
        serde_json::from_str(&stdout(&ddlpb(&["spectrum", "--radius", "2", "--format", "json"]))).unwrap();
    assert_eq!(spectrum["spectrum"]["mu"].as_array().unwrap().len(), 8);
}
