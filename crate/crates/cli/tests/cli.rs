use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const HEAT: &str = "drift.kind = polynomial\ndrift.coeffs = 0\ndiffusion.kind = additive\ndiffusion.sigma = 0\nscheme.tau = 0.01\nscheme.n_steps = 100\n";

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_monospde"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .unwrap()
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let j = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(j).unwrap().parse().unwrap()).collect()
}

#[test]
fn check_gates_on_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(dir.path(), "drift.alpha = 1\n", &["check"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let csv = fs::read_to_string(dir.path().join("check.csv")).unwrap();
    assert!(csv.contains("margin.contraction,"));
    let bad = run(dir.path(), "drift.alpha = 0.3\n", &["check"]);
    assert_eq!(bad.status.code(), Some(2));
    let csv = fs::read_to_string(dir.path().join("check.csv")).unwrap();
    let line = csv.lines().find(|l| l.starts_with("margin.contraction,")).unwrap();
    let m: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!(m < 0.0);
    let manifest = fs::read_to_string(dir.path().join("check.manifest")).unwrap();
    assert!(manifest.contains("outputs = check.csv,check.resolved.cfg"));
    for name in ["check.csv", "check.resolved.cfg"] {
        assert!(dir.path().join(name).exists());
    }
    assert_eq!(fs::read_to_string(dir.path().join("results.log")).unwrap().lines().count(), 2);
}

#[test]
fn missing_constant_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "drift.kind = custom_table\ndrift.table_x = -1, 1\ndrift.table_y = 1, -1\n";
    let out = run(dir.path(), cfg, &["check"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("constants.L1"));
    let out = run(dir.path(), "scheme.tau = soon\n", &["check"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn simulate_heat_decays_geometrically() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), HEAT, &["simulate"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 102);
    let l2 = csv_column(&csv, "l2");
    let h = 1.0 / 64.0;
    let c = (std::f64::consts::PI * h).cos();
    let lam = 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
    for (m, v) in l2.iter().enumerate() {
        let want = l2[0] * (1.0 + 0.01 * lam).powi(-(m as i32));
        assert!((v - want).abs() <= 1e-8 * want);
    }
    let zero = run(dir.path(), &HEAT.replace("n_steps = 100", "n_steps = 0"), &["simulate"]);
    assert_eq!(zero.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn simulate_refuses_large_steps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "drift.alpha = 0.25\nscheme.tau = 0.1\nscheme.n_steps = 5\nmesh.n_cells = 16\n";
    let out = run(dir.path(), cfg, &["simulate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max_wellposed_tau"));
    let forced = run(dir.path(), cfg, &["--override", "simulate"]);
    assert_eq!(forced.status.code(), Some(0), "{}", String::from_utf8_lossy(&forced.stderr));
}

#[test]
fn coupling_reports_pathwise_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "drift.alpha = 1\nmesh.n_cells = 32\nscheme.tau = 0.05\nscheme.n_steps = 100\n";
    let out = run(dir.path(), cfg, &["--paths", "4", "coupling"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("pathwise_contraction=pass"));
    let out = run(dir.path(), "drift.alpha = 0.3\n", &["coupling"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn converge_heat_in_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{HEAT}mesh.n_cells = 16\nconverge.expected_slope = 2\nconverge.slope_tol = 0.1\nconverge.reference = 0.0001220703125\n");
    let out = run(
        dir.path(),
        &cfg,
        &["--paths", "1", "converge", "--axis", "tau", "--ladder", "0.03125,0.015625,0.0078125,0.00390625,0.001953125"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("flag=pass"));
    let csv = fs::read_to_string(dir.path().join("converge.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "level,h,tau,mse,stderr");
    let bad = run(dir.path(), &cfg, &["converge", "--ladder", "0.03,0.01"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn ergodic_rejects_long_burn_in() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "scheme.n_steps = 100\nergodic.burn_in = 100\n", &["ergodic"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ergodic.burn_in"));
}

#[test]
fn replay_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = "drift.alpha = 0.8\nmesh.n_cells = 16\nscheme.tau = 0.02\nscheme.n_steps = 50\n";
    for cmd in ["simulate", "stability", "mixing"] {
        let first = run(a.path(), cfg, &["--seed", "99", "--paths", "3", cmd]);
        assert_eq!(first.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&first.stderr));
        let manifest = fs::read_to_string(a.path().join(format!("{cmd}.manifest"))).unwrap();
        let resolved = a.path().join(format!("{cmd}.resolved.cfg"));
        let replay = Command::new(env!("CARGO_BIN_EXE_monospde"))
            .arg("--config")
            .arg(&resolved)
            .arg("--out")
            .arg(b.path())
            .arg(cmd)
            .output()
            .unwrap();
        assert_eq!(replay.status.code(), Some(0));
        let outputs = manifest.lines().find_map(|l| l.strip_prefix("outputs = ")).unwrap();
        for name in outputs.split(',') {
            assert_eq!(
                fs::read(a.path().join(name)).unwrap(),
                fs::read(b.path().join(name)).unwrap(),
                "{name}"
            );
        }
    }
}
