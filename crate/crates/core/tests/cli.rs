use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

use heisenberg_charges::exact::{charge_exact, RationalCharge, RationalChargeJson};
use heisenberg_charges::spin_algebra::RepIndex;

fn hcharges(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcharges")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exact_charge_round_trips() {
    let out = hcharges(&["charge", "--psi", "1111212", "--jj", "1", "--exact", "--quiet"]);
    let v = stdout_json(&out);
    assert_eq!(v["schema"], "rational-charge/1");
    assert_eq!(v["numerator"], serde_json::json!(["2", "11", "26", "34", "25", "10"]));
    assert_eq!(v["denominator"], serde_json::json!(["1", "7", "21", "35", "35", "21", "7"]));
    assert_eq!((v["prefactor_num"].as_str(), v["prefactor_den"].as_str()), (Some("1"), Some("7")));

    let parsed: RationalChargeJson = serde_json::from_value(v).unwrap();
    let rc = RationalCharge::from_json(&parsed).unwrap();
    let direct = charge_exact(&"1111212".parse().unwrap(), RepIndex::new(1).unwrap()).unwrap();
    for mu in [-3.0, 0.0, 0.25, 9.0] {
        assert_eq!(rc.eval_f64(mu), direct.eval_f64(mu));
    }
}

#[test]
fn numeric_charge_csv() {
    let out = hcharges(&["charge", "--psi", "12", "--jj", "1", "--numeric", "--mu", "0,1", "--out", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mu,X");
    assert_eq!(lines.len(), 3);
    let x: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!(x.is_finite() && x > 0.0);
}

#[test]
fn exit_codes() {
    assert_eq!(hcharges(&["charge", "--psi", "", "--jj", "1"]).status.code(), Some(2));
    assert_eq!(hcharges(&["charge", "--psi", "13", "--jj", "1"]).status.code(), Some(2));
    assert_eq!(hcharges(&["gibbs", "--jj", "1", "--mu-grid", "a"]).status.code(), Some(2));
    let capped = hcharges(&["charge", "--psi", "1111212", "--jj", "2", "--degree-cap", "4"]);
    assert_eq!(capped.status.code(), Some(3));
    assert_eq!(hcharges(&["decay", "--psi-m", "12", "--psi-n", "12", "--jj", "1"]).status.code(), Some(2));
}

#[test]
fn curve_and_gibbs_examples() {
    let v = stdout_json(&hcharges(&["curve", "--M", "2", "-q"]));
    let s = &v["solutions"][0];
    assert!((s["mu_sq_re"].as_f64().unwrap() + 0.5).abs() < 1e-14);
    assert!(s["mu_sq_im"].as_f64().unwrap().abs() < 1e-14);

    let v = stdout_json(&hcharges(&["gibbs", "--jj", "1", "--mu-grid", "0", "-q"]));
    let avg = v["values"][0]["average"].as_f64().unwrap();
    assert!((avg - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-15);
}

#[test]
fn manifest_matches_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("manifest.json");
    let args = ["ensemble", "--M", "8", "--jj", "1", "--count", "4", "--seed", "3", "--grid", "-5:5:51:2", "-q"];
    let mut with_manifest: Vec<&str> = args.to_vec();
    with_manifest.extend(["--manifest", path.to_str().unwrap()]);
    let a = hcharges(&with_manifest);
    let b = hcharges(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let m: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(m["schema"], "run-manifest/1");
    assert_eq!(m["command"], "ensemble");
    assert_eq!(m["seed"], 3);
    let digest: String = Sha256::digest(&a.stdout).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(m["output_digests"][0]["sha256"], digest.as_str());

    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["schema"], "ensemble-report/1");
    assert_eq!(report["per_state"].as_array().unwrap().len(), 4);
}

#[test]
fn poles_densities_decay_and_deviation() {
    let v = stdout_json(&hcharges(&["poles", "--psi", "1111212", "--jj", "1", "-q"]));
    assert_eq!(v["total_with_multiplicity"], 12);
    assert_eq!(v["physical_strip"]["inside"].as_array().unwrap().len(), 0);

    let out = hcharges(&["densities", "--jj", "2", "--mu-grid", "0", "-q"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("mu,rho,rho_bar,eta\n0,"));
    assert!(text.trim_end().ends_with(",8"));

    let v = stdout_json(&hcharges(&["decay", "--psi-m", "1121212122", "--psi-n", "1212121212", "--jj", "1", "-q"]));
    assert_eq!(v["decays"], true);
    assert_eq!(v["norms"].as_array().unwrap().len(), 10);

    let v = stdout_json(&hcharges(&["deviation", "--psi", "1112122121", "--jj", "1", "--grid", "-10:10:201:4", "-q"]));
    assert!(v["delta"].as_f64().unwrap() > 0.0);

    let out = hcharges(&["deviation", "--psi", "112", "--jj", "1", "--grid", "-1:1:3", "--curves", "-q"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("mu,X_exact,X_tilde,X_infinity,rel_deviation"));
    assert_eq!(text.lines().count(), 4);
}
