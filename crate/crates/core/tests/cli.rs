use std::path::Path;
use std::process::Command;

use mimo_augment::harness::{read_results, run_sweep, ExperimentConfig, CSV_HEADER};
use mimo_augment::pipeline::Method;

const BIN: &str = env!("CARGO_BIN_EXE_mimo-augment");

const SMALL: &str = "\
t_d = 40
t_b = 20
i_da = 2
j = 3
sigma_g = 0.08
sigma_u = 1.0
sigma_l = 0.24
sub_blocks = 2
channels = invariant, varying
snr_db = 10, 20
trials = 6
timing = off
";

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str], threads: Option<&str>) -> std::process::Output {
    let mut c = Command::new(BIN);
    c.args(args);
    match threads {
        Some(t) => c.env("SIM_THREADS", t),
        None => c.env_remove("SIM_THREADS"),
    };
    c.output().unwrap()
}

#[test]
fn csv_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.cfg", SMALL);
    let one = dir.path().join("one.csv");
    let eight = dir.path().join("eight.csv");
    let env = dir.path().join("env.csv");
    for (out, flag, env_threads) in [(&one, Some("1"), None), (&eight, Some("8"), None), (&env, None, Some("3"))] {
        let mut args = vec!["run", "--config", &cfg, "--out", out.to_str().unwrap()];
        if let Some(f) = flag {
            args.extend(["--threads", f]);
        }
        let o = run(&args, env_threads);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(&one).unwrap();
    assert_eq!(a, std::fs::read(&eight).unwrap());
    assert_eq!(a, std::fs::read(&env).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.cfg", SMALL);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        assert!(run(&["run", "--config", &cfg, "--out", out.to_str().unwrap()], Some("2")).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    for bad in ["nr = four\n", "unknown_key = 1\n", "t_b = 5000\n", "just text\n"] {
        let cfg = write(dir.path(), "bad.cfg", bad);
        let o = run(&["run", "--config", &cfg, "--out", out.to_str().unwrap()], None);
        assert_eq!(o.status.code(), Some(2), "{bad}");
        assert!(!o.stderr.is_empty());
    }
    let o = run(&["run", "--no-such-flag"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.cfg", SMALL);
    let out = dir.path().join("o.csv");
    let o = run(
        &[
            "sweep-snr",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--snrs",
            "5,30",
            "--trials",
            "2",
            "--seed",
            "9",
        ],
        Some("1"),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = read_results(&out).unwrap();
    assert!(!recs.is_empty());
    assert!(recs.iter().all(|r| (r.snr_db == 5.0 || r.snr_db == 30.0) && r.trials == 2));
    assert!(recs.iter().all(|r| r.symbol_count == 2 * 40 * 2));
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest"], Some("2"));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let t1 = ExperimentConfig::from_file(&root.join("table1.cfg")).unwrap();
    assert_eq!((t1.nt, t1.nr), (2, 4));
    assert_eq!(t1.snr_db, vec![10.0, 15.0, 20.0, 25.0]);
    assert_eq!(t1.methods, vec![Method::Em]);
    assert_eq!(t1.channels.len(), 2);
    let f4 = ExperimentConfig::from_file(&root.join("fig4.cfg")).unwrap();
    assert_eq!(f4.nr, 6);
    assert_eq!(f4.methods.len(), 5);
}

#[test]
fn doubling_trials_shrinks_std_err_by_root_two() {
    // low SNR keeps the error count high and the blocks homogeneous
    let cfg = |trials| ExperimentConfig {
        snr_db: vec![0.0],
        methods: vec![Method::CeMld],
        t_d: 200,
        t_b: 200,
        sub_blocks: 1,
        trials,
        timing: false,
        ..Default::default()
    };
    let a = &run_sweep(&cfg(200), 1).unwrap()[0];
    let b = &run_sweep(&cfg(400), 1).unwrap()[0];
    let ratio = a.std_err() / b.std_err();
    assert!((ratio / 2f64.sqrt() - 1.0).abs() <= 0.2, "ratio {ratio}");
}
