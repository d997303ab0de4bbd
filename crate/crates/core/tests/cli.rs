use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chrono-collapse"));
    cmd.env_remove("CHRONO_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chrono-collapse-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn tau_prints_quadrature_value() {
    let o = run(&["tau", "--model", "csl", "--lambda", "1e-16", "--sigma", "1e-7", "--radius", "1e-7"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "quadrature");
    let tau: f64 = row[3].parse().unwrap();
    assert!((tau / 3.71362624e-65 - 1.0).abs() < 1e-8);
}

#[test]
fn unit_suffixed_aliases_match() {
    let a = run(&["tau", "--model", "csl", "--lambda", "1e-16", "--sigma", "1e-7", "--radius", "3e-7"]);
    let b = run(&["tau", "--model", "csl", "--lambda-per-s", "1e-16", "--sigma-m", "1e-7", "--radius-m", "3e-7"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn invalid_input_exits_one() {
    for args in [
        &["tau", "--model", "csl", "--radius", "-1"][..],
        &["tau", "--model", "dp", "--lambda", "1e-16", "--radius", "1e-9"],
        &["kernel", "--model", "csl", "--sigma", "0"],
        &["nonsense"],
        &["tau", "--model", "csl"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_exits_two() {
    let o = run(&["headline", "--out", "/nonexistent-dir/headline.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_lists_units_and_defaults() {
    let o = run(&["tau", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for needle in ["--radius-m", "s^-1", "[default: 1e-7 for CSL, 1e-9 for DP]", "CHRONO_SEED"] {
        assert!(text.contains(needle), "missing {needle}");
    }
}

#[test]
fn strict_rejects_excluded_parameters() {
    let loose = run(&["tau", "--model", "csl", "--lambda", "1e-5", "--radius", "1e-7"]);
    assert!(loose.status.success());
    assert!(String::from_utf8_lossy(&loose.stderr).contains("warning"));
    let strict = run(&["tau", "--model", "csl", "--lambda", "1e-5", "--radius", "1e-7", "--strict"]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let cfg = scratch("params.cfg");
    std::fs::write(&cfg, "# reference CSL\nmodel = csl\nlambda_per_s = 1e-16\nsigma_m = 1e-7\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = run(&["tau", "--config", cfg, "--radius", "1e-7"]);
    let from_flags = run(&["tau", "--model", "csl", "--radius", "1e-7"]);
    assert_eq!(from_file.stdout, from_flags.stdout);
    let overridden = run(&["tau", "--config", cfg, "--lambda", "1e-15", "--radius", "1e-7"]);
    assert_ne!(overridden.stdout, from_file.stdout);
}

#[test]
fn seed_env_matches_flag() {
    let args = ["drift", "--model", "dp", "--steps", "4", "--realizations", "2"];
    let by_flag = bin().args(args).args(["--seed", "99"]).output().unwrap();
    let by_env = bin().args(args).env("CHRONO_SEED", "99").output().unwrap();
    let other = bin().args(args).args(["--seed", "100"]).output().unwrap();
    assert_eq!(by_flag.stdout, by_env.stdout);
    assert_ne!(by_flag.stdout, other.stdout);
}

#[test]
fn json_output_carries_metadata() {
    let path = scratch("scan.json");
    let o = run(&["scan", "time", "--count", "5", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["metadata"]["command"], "scan time");
    assert_eq!(v["metadata"]["parameters"].as_array().unwrap().len(), 3);
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn headline_table() {
    let text = stdout(&run(&["headline"]));
    assert!(text.contains("csl_reference,3.94084137e-29"));
    assert!(text.contains("dp_reference,1.24555828e-31"));
}

#[test]
fn stability_reports_ratio() {
    let o = run(&["stability", "--model", "csl", "--t", "100"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let ratio: f64 = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((ratio / 1.215059645571348e-15 - 1.0).abs() < 1e-7);
}
