use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn retrodp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_retrodp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn kv(path: &Path) -> Vec<(String, String)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = retrodp(&[
        "run", "--dataset", "bimod", "--n", "30", "--iters", "400", "--burnin", "100", "--seed", "3",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["trace.csv", "summary.txt", "summary.kv"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("# retrodp-trace v1"));
    assert_eq!(trace.lines().count(), 2 + 300);
    assert!(kv(&out.join("summary.kv")).iter().any(|(k, _)| k.starts_with("M.")));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# desk run\nsampler = neal8\ndataset = lepto\nn = 20\niters = 500\nburnin = 100\nseed = 5\n").unwrap();
    let out = dir.path().join("o");
    let o = retrodp(&[
        "run", "--config", cfg.to_str().unwrap(), "--iters", "300", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let meta = trace.lines().next().unwrap();
    assert!(meta.contains("sampler=neal8"), "{meta}");
    assert!(meta.contains("seed=5"), "{meta}");
    assert_eq!(trace.lines().count(), 2 + 200);
}

#[test]
fn generate_data_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("d.txt");
    let o = retrodp(&["generate-data", "--dataset", "lepto", "--n", "25", "--seed", "7", "--out", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let written = fs::read_to_string(&f).unwrap();
    assert_eq!(written.lines().count(), 25);
    let again = retrodp(&["generate-data", "--dataset", "lepto", "--n", "25", "--seed", "7"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), written);
}

#[test]
fn data_file_runs() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("d.txt");
    fs::write(&f, "# values\n-1.0, -0.8 -1.2\n2.0\n2.3\n1.9\n").unwrap();
    let out = dir.path().join("o");
    let o = retrodp(&[
        "run", "--dataset", f.to_str().unwrap(), "--iters", "200", "--burnin", "50", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(out.join("trace.csv")).unwrap().contains("n=6"));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "sampler = retro-mh\nno-such-key = 1\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--sampler", "gibbs", "--out", out],
        vec!["run", "--iters", "100", "--burnin", "100", "--out", out],
        vec!["run", "--sampler", "retro-exact", "--out", out],
        vec!["run", "--alpha", "-1", "--out", out],
        vec!["run", "--config", bad.to_str().unwrap(), "--out", out],
        vec!["run", "--config", "/nonexistent/run.cfg", "--out", out],
        vec!["run", "--bogus-flag"],
        vec!["geweke", "--iters", "10", "--sampler", "neal8", "--update-alpha"],
    ];
    for args in cases {
        let o = retrodp(&args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    let o = retrodp(&[
        "run", "--n", "10", "--iters", "50", "--burnin", "10", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn exact_sampler_runs_with_fixed_variance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = retrodp(&[
        "run", "--sampler", "retro-exact", "--fixed-variance", "0.5", "--n", "20", "--iters", "200", "--burnin",
        "50", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn compare_and_observed_partition() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    let o = retrodp(&[
        "compare", "--samplers", "retro-mh,neal8", "--seeds", "1,2", "--n", "20", "--iters", "300", "--burnin",
        "50", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for i in 0..4 {
        assert!(out.join(format!("run{i}/trace.csv")).is_file());
    }
    assert!(out.join("summary.txt").is_file());

    let out = dir.path().join("obs");
    let o = retrodp(&["observed-partition", "--sizes", "5,4,1", "--iters", "2000", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = kv(&out.join("summary.kv"));
    let total: f64 = s
        .iter()
        .filter(|(k, _)| k.starts_with("p_"))
        .map(|(_, v)| v.parse::<f64>().unwrap())
        .sum();
    assert!(total > 0.5 && total <= 1.0 + 1e-9, "{total}");
    assert!(out.join("fig_observed_5_4_1.gp").is_file());
}

#[test]
fn geweke_prints_table() {
    let o = retrodp(&["geweke", "--iters", "2000", "--seed", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("min p-value"));
}
