use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dunkl-pauli"));
    c.env_remove("DUNKL_PAULI_OUT");
    c
}

fn scenario(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("scenario.json");
    std::fs::write(&p, body).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: &Path) -> Output {
    bin().args([cmd, "--config"]).arg(config).arg("--out").arg(out).output().unwrap()
}

const CONSTANT: &str = r#"{
    "deformation": {"nu1": 0.0, "nu2": 0.0},
    "state": {"n": 1, "l": 1, "m_s": 1},
    "profiles": {
        "mass": {"type": "constant", "value": 1.0},
        "omega": {"type": "constant", "value": 0.0},
        "omega_c": {"type": "constant", "value": 1.5}
    },
    "time": {"t0": 0.0, "t1": 2.0, "samples": 5, "dt": 0.001, "checks": 2}
}"#;

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn landau_levels_without_deformation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), CONSTANT);
    let out = run("stationary-energy", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("stationary_energy.csv")).unwrap();
    let (n, m_s, branch, l, e) =
        (column(&csv, "n"), column(&csv, "m_s"), column(&csv, "branch"), column(&csv, "l"), column(&csv, "energy"));
    let mut checked = 0;
    for i in 0..e.len() {
        // the positive branch of the lowest even index is the Landau level itself
        if branch[i] == "1" && l[i] == "1" {
            let n: f64 = n[i].parse().unwrap();
            let m: f64 = m_s[i].parse().unwrap();
            let e: f64 = e[i].parse().unwrap();
            assert!((e - 0.75 * (2.0 * n + 1.0 + m)).abs() < 1e-12, "n {n} m_s {m}: {e}");
            checked += 1;
        }
    }
    assert_eq!(checked, 2 * 3 * 2);
    assert!(dir.path().join("stationary-energy.meta.json").exists());
}

#[test]
fn ep_solve_constant_case_sits_at_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), &CONSTANT.replace("\"value\": 0.0", "\"value\": 0.5"));
    let out = run("ep-solve", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("ep_solve.csv")).unwrap();
    assert!(csv.starts_with("t,rho,rho_dot,ep_residual\n"));
    let want = (0.25f64 + 0.5625).sqrt().powf(-0.5);
    for v in column(&csv, "rho") {
        assert!((v.parse::<f64>().unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn evolve_writes_series_and_densities() {
    let dir = tempfile::tempdir().unwrap();
    let body = CONSTANT.replace("\"time\"", "\"outputs\": {\"density_times\": [0.5, 1.0]}, \"time\"");
    let cfg = scenario(dir.path(), &body);
    let out = run("evolve", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let series = std::fs::read_to_string(dir.path().join("evolve.csv")).unwrap();
    assert_eq!(series.lines().count(), 6);
    for v in column(&series, "norm") {
        assert!((v.parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
    }
    let density = std::fs::read_to_string(dir.path().join("density_001.csv")).unwrap();
    assert_eq!(density.lines().count(), 1 + 512 * 64);
}

#[test]
fn verify_passes_on_a_stationary_state_and_fails_impossible_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), CONSTANT);
    let out = run("verify", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(doc["pass"], true);
    assert!(doc["reports"].as_array().unwrap().len() >= 7);

    let cfg = scenario(dir.path(), &CONSTANT.replace("\"time\"", "\"tolerances\": {\"pde\": 1e-15}, \"time\""));
    let out = run("verify", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL schrodinger-residual"));
}

#[test]
fn config_errors_exit_with_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (CONSTANT.replace("\"nu1\": 0.0", "\"nu1\": -0.7"), "nu1 must exceed -1/2"),
        (CONSTANT.replace("\"l\": 1,", "\"l\": 2, \"eps2\": -1,"), "half-odd-integer"),
        (CONSTANT.replace("\"n\": 1,", "\"n\": 1, \"colour\": 3,"), "state"),
        (CONSTANT.replace("\"samples\": 5", "\"samples\": \"many\""), "time.samples"),
    ];
    for (body, needle) in cases {
        let cfg = scenario(dir.path(), &body);
        let out = run("verify", &cfg, dir.path());
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(2), "{err}");
        assert!(err.contains(needle), "{needle} not in {err}");
    }
    let out = bin().args(["verify", "--config", "/nonexistent/x.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let cfg = scenario(dir.path(), &CONSTANT.replace("1.5}", "1.5, \"depth\": 0.1}").replace("\"constant\", \"value\": 1.5", "\"sinusoidal\", \"amplitude\": 1.5, \"frequency\": 1.0"));
    let out = run("stationary-energy", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn collapsed_auxiliary_solution_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let body = CONSTANT.replace("\"time\"", "\"initial\": {\"rho\": 1e-200, \"rho_dot\": 0.0}, \"time\"");
    let cfg = scenario(dir.path(), &body);
    let out = run("ep-solve", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn output_directory_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), CONSTANT);
    let target = dir.path().join("from-env");
    let out = bin().args(["ep-solve", "--config"]).arg(&cfg).env("DUNKL_PAULI_OUT", &target).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(target.join("ep_solve.csv").exists());
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(target.join("ep-solve.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["tool"], "dunkl-pauli");
    assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn seedless_flag_is_accepted_and_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), CONSTANT);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run("angular-spectrum", &cfg, &a);
    let out = bin().args(["angular-spectrum", "--seedless", "--config"]).arg(&cfg).arg("--out").arg(&b).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    for f in ["angular_spectrum.csv", "angular-spectrum.meta.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
}
