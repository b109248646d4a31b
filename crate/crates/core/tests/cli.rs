use std::fs;
use std::path::Path;
use std::process::Command;

fn oblab(root: &Path, config: Option<&str>, args: &[&str]) -> (i32, String) {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_oblab"));
    cmd.args(args).arg("--out").arg(root).env_remove("OBLAB_RUNS_DIR");
    if let Some(text) = config {
        let path = dir.path().join("run.toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(&path);
    }
    let out = cmd.output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr),
    )
}

fn run_dir(stdout: &str) -> std::path::PathBuf {
    stdout.split_whitespace().last().unwrap().into()
}

const SMALL_SIM: &str = "[grid]\nn = 16\n[init]\nfamily = \"zero\"\n[run]\nhorizon = 0.5\nsample_every = 0.1\n";

#[test]
fn validate_green_defaults_pass() {
    let root = tempfile::tempdir().unwrap();
    let (code, out) = oblab(root.path(), None, &["validate-green"]);
    assert_eq!(code, 0, "{out}");
    let dir = run_dir(&out);
    for f in ["config.echo", "series.csv", "fits.json", "status"] {
        assert!(dir.join(f).exists(), "missing {f}");
    }
    assert_eq!(fs::read_to_string(dir.join("status")).unwrap().trim(), "completed");
    let fits: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("fits.json")).unwrap()).unwrap();
    assert!(fits["max_gap"].as_f64().unwrap() < 1e-8);
    let csv = fs::read_to_string(dir.join("series.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("xi,t,G1,G2,G3,lambda_plus_re"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first.len(), 10);
    // ξ = 0: G2 = e^{−βt}, G3 = 1.
    assert_eq!((first[0], first[4]), (0.0, 1.0));
}

#[test]
fn unknown_config_key_exits_one() {
    let root = tempfile::tempdir().unwrap();
    let (code, out) = oblab(root.path(), Some("[params]\nalpha = 1.0\nweissenberg = 3.0\n"), &["simulate"]);
    assert_eq!(code, 1, "{out}");
}

#[test]
fn lower_bound_without_mean_velocity_is_refused() {
    let root = tempfile::tempdir().unwrap();
    let (code, out) = oblab(root.path(), Some("[decay]\nu_amp = 0.0\nlower_bound = true\n"), &["linear-decay"]);
    assert_eq!(code, 1, "{out}");
}

#[test]
fn zero_simulation_writes_a_complete_record() {
    let root = tempfile::tempdir().unwrap();
    let (code, out) = oblab(root.path(), Some(SMALL_SIM), &["simulate"]);
    assert_eq!(code, 0, "{out}");
    let dir = run_dir(&out);
    let csv = fs::read_to_string(dir.join("series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), oldroyd_core::monitors::REPORT_CSV_HEADER);
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.split(',').skip(1).take(17).all(|x| x.parse::<f64>().unwrap() == 0.0)));
    assert!(dir.join("checkpoints/final.bin").exists());
    assert!(dir.join("checkpoints/final.bin.json").exists());
}

#[test]
fn identical_configs_are_byte_identical() {
    let cfg = "[grid]\nn = 16\n[init.random]\nband = 0.2\n[run]\nhorizon = 0.3\nsample_every = 0.1\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ca, oa) = oblab(a.path(), Some(cfg), &["simulate", "--threads", "1"]);
    let (cb, ob) = oblab(b.path(), Some(cfg), &["simulate", "--threads", "1"]);
    assert_eq!((ca, cb), (0, 0), "{oa}\n{ob}");
    let (da, db) = (run_dir(&oa), run_dir(&ob));
    assert_eq!(da.file_name(), db.file_name());
    for f in ["series.csv", "config.echo", "checkpoints/final.bin"] {
        assert_eq!(fs::read(da.join(f)).unwrap(), fs::read(db.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn seed_flag_changes_the_run() {
    let root = tempfile::tempdir().unwrap();
    let cfg = "[grid]\nn = 16\n[init.random]\nband = 0.2\n[run]\nhorizon = 0.1\nsample_every = 0.1\n";
    let (_, a) = oblab(root.path(), Some(cfg), &["simulate", "--seed", "5"]);
    let (_, b) = oblab(root.path(), Some(cfg), &["simulate", "--seed", "6"]);
    assert_ne!(run_dir(&a), run_dir(&b));
    let echo = fs::read_to_string(run_dir(&a).join("config.echo")).unwrap();
    assert!(echo.contains("seed = 5"));
}

#[test]
fn out_root_comes_from_environment() {
    let root = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_oblab"))
        .arg("validate-green")
        .env("OBLAB_RUNS_DIR", root.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_dir(root.path()).unwrap().count(), 1);
}

#[test]
fn large_step_is_refused_with_a_suggestion() {
    let root = tempfile::tempdir().unwrap();
    let cfg = "[grid]\nn = 16\nlength = 6.283185307179586\n[init.random]\nh3_norm = 50.0\nband = 100.0\nwidth = 10.0\n[run]\nhorizon = 1.0\nsample_every = 1.0\n[run.step]\ndt = 1.0\n";
    let (code, out) = oblab(root.path(), Some(cfg), &["simulate"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("aborted") && out.contains("CFL"), "{out}");
}

#[test]
fn singleton_sweep_matches_simulate() {
    let root = tempfile::tempdir().unwrap();
    let cfg = "[grid]\nn = 16\n[init.random]\nband = 0.2\n[run]\nhorizon = 0.5\nsample_every = 0.1\n[sweep]\nmus = [0.0]\n";
    let (code, out) = oblab(root.path(), Some(cfg), &["sweep-mu"]);
    assert_eq!(code, 0, "{out}");
    let (code, sim) = oblab(root.path(), Some(cfg), &["simulate"]);
    assert_eq!(code, 0, "{sim}");
    assert_eq!(
        fs::read_to_string(run_dir(&out).join("members/00.csv")).unwrap(),
        fs::read_to_string(run_dir(&sim).join("series.csv")).unwrap()
    );
}

#[test]
fn increasing_mu_list_is_a_config_error() {
    let root = tempfile::tempdir().unwrap();
    let (code, out) = oblab(root.path(), Some("[grid]\nn = 16\n[sweep]\nmus = [0.0, 0.1]\n"), &["sweep-mu"]);
    assert_eq!(code, 1, "{out}");
}
