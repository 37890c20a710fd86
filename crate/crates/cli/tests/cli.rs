use std::path::Path;
use std::process::Command;

use springchain::equilibrium::residual;
use springchain::field::effective_field;
use springchain::model::AppliedField;
use springchain_cli::output::{extract_config, read_snapshot, Snapshot};
use springchain_cli::{parse_config, run, ExperimentConfig, RunOptions};

const SMALL: &str = "seed = 7\n[stack]\nn_hard = 6\nn_soft = 6\nd = 2e-7\ninterface_A = 1.8e-6\n";

fn cfg(experiment: &str) -> ExperimentConfig {
    parse_config(&format!("{SMALL}[experiment]\n{experiment}")).unwrap()
}

fn run_in(cfg: &ExperimentConfig, dir: &Path) -> i32 {
    let opts = RunOptions { out_dir: dir.to_path_buf(), trace: false };
    run(cfg, &opts, &mut Vec::new()).unwrap().exit_code()
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn relax_along_the_easy_axis_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg("kind = \"relax\"\nH_a = 4800\ntheta_a = 0\n");
    assert_eq!(run_in(&c, dir.path()), 0);
    let text = std::fs::read_to_string(dir.path().join("relax.csv")).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].len(), 6 + 12);
    assert!(rows[0][6..].iter().all(|&t| t == 0.0));
    assert_eq!(rows[0][5], 0.0, "no steps needed");
}

#[test]
fn step_budget_exhaustion_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = cfg("kind = \"sweep\"\nH_a = 3000\ntheta_end = 20\ncoarse_step = 10\n");
    c.criteria.max_steps = 1;
    assert_eq!(run_in(&c, dir.path()), springchain_cli::EXIT_NON_CONVERGENCE);
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let note = text.lines().last().unwrap();
    assert!(note.starts_with("# not converged at theta_a_deg:"), "{note}");
    assert!(note.contains(" 10") && note.contains(" 20"), "{note}");
}

#[test]
fn snapshot_survives_a_save_load_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg("kind = \"relax\"\nH_a = 3000\ntheta_a = 100\n");
    assert_eq!(run_in(&c, dir.path()), 0);
    let path = dir.path().join("snapshot.csv");
    let snap = read_snapshot(&path).unwrap();
    assert_eq!(snap.fingerprint, c.fingerprint());
    assert_eq!(snap.to_text(), std::fs::read_to_string(&path).unwrap());
    assert_eq!(Snapshot::from_text(&snap.to_text()).unwrap(), snap);

    let stack = c.stack.build().unwrap();
    let applied = AppliedField::new(snap.h_a, snap.theta_a).unwrap();
    let fields = effective_field(&stack, &snap.state, &applied).unwrap();
    let r = residual(&snap.state, &fields, c.criteria.h_floor).unwrap();
    assert!((r - snap.residual).abs() < 1e-12, "{r} vs {}", snap.residual);
    assert!(r <= c.criteria.torque_tol);
}

#[test]
fn same_config_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = cfg("kind = \"relax\"\nH_a = 3000\ntheta_a = 200\ninitial = \"random\"\n");
    run_in(&c, a.path());
    run_in(&c, b.path());
    for f in ["relax.csv", "profile.csv", "snapshot.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let mut other = c.clone();
    other.seed = 8;
    assert_ne!(other.fingerprint(), c.fingerprint());
}

#[test]
fn result_header_reproduces_the_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = cfg("kind = \"sweep\"\nH_a = 2000\ntheta_end = 40\ncoarse_step = 5\n");
    run_in(&c, a.path());
    let first = std::fs::read_to_string(a.path().join("sweep.csv")).unwrap();
    let again = parse_config(&extract_config(&first).unwrap()).unwrap();
    assert_eq!(again, c);
    run_in(&again, b.path());
    assert_eq!(first, std::fs::read_to_string(b.path().join("sweep.csv")).unwrap());
}

#[test]
fn curves_cover_both_directions() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg("kind = \"torque-curve\"\nH_a = 2000\ncoarse_step = 30\n");
    assert_eq!(run_in(&c, dir.path()), 0);
    let text = std::fs::read_to_string(dir.path().join("torque_curve.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert!(rows.iter().any(|l| l.starts_with("increasing,")));
    assert!(rows.iter().any(|l| l.starts_with("decreasing,")));
}

fn binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_springchain")).args(args).output().unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let conf = dir.path().join("c.toml");
    std::fs::write(&conf, format!("{SMALL}[experiment]\nH_a = 3000\ntheta_a = 45\n")).unwrap();
    let conf_s = conf.to_str().unwrap();

    let ok = binary(&["relax", "--config", conf_s, "--out", out_s, "--trace"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("converged=true"));
    assert!(out.join("trace.csv").exists());

    // rerun from the result file
    let again = binary(&["relax", "--config", out.join("relax.csv").to_str().unwrap(), "--out", out_s]);
    assert_eq!(again.status.code(), Some(0));

    let budget = binary(&["relax", "--config", conf_s, "--out", out_s, "--override", "relax.max_steps=1"]);
    assert_eq!(budget.status.code(), Some(2));

    let bad = binary(&["relax", "--config", conf_s, "--out", out_s, "--override", "stack.soft.M=-5"]);
    assert_eq!(bad.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("stack.soft.M"));

    assert_eq!(binary(&["anneal"]).status.code(), Some(64));
    assert_eq!(binary(&["relax", "--bogus"]).status.code(), Some(64));
    let missing = binary(&["relax", "--config", dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}
