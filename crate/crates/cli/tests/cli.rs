use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ait(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ait"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulate(dir: &Path, name: &str, extra: &[&str]) -> String {
    let out = dir.join(name);
    let out_s = out.to_str().unwrap().to_string();
    let mut args = vec!["simulate", "--out", &out_s];
    args.extend_from_slice(extra);
    let o = ait(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    out_s
}

#[test]
fn simulate_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate(
        dir.path(),
        "t2.csv",
        &[
            "--scenario",
            "table2",
            "--dist",
            "uniform",
            "--n",
            "1000",
            "--seed",
            "7",
        ],
    );
    let csv = fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "Z1,Z2,X,Y");
    assert_eq!(lines.count(), 1000);
    let meta = fs::read_to_string(format!("{path}.meta")).unwrap();
    assert!(meta.contains("label.Z1 = invalid-exogeneity"), "{meta}");
    assert!(meta.contains("label.Z2 = valid"));
    assert!(meta.contains("seed = 7"));

    let again = simulate(
        dir.path(),
        "t2b.csv",
        &[
            "--scenario",
            "table2",
            "--dist",
            "uniform",
            "--n",
            "1000",
            "--seed",
            "7",
        ],
    );
    assert_eq!(fs::read(&path).unwrap(), fs::read(again).unwrap());
}

#[test]
fn simulate_rejects_bad_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = out.to_str().unwrap();
    for args in [
        vec!["simulate", "--scenario", "table9", "--n", "1000", "--out", out],
        vec!["simulate", "--scenario", "table2", "--n", "10", "--out", out],
        vec!["simulate", "--scenario", "table3", "--n", "1000", "--out", out],
        vec![
            "simulate",
            "--scenario",
            "table2",
            "--dist",
            "cauchy",
            "--n",
            "1000",
            "--out",
            out,
        ],
    ] {
        let o = ait(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn test_reports_each_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate(
        dir.path(),
        "m.csv",
        &["--scenario", "linear-partial-nongaussian", "--n", "3000", "--seed", "2"],
    );
    let o = ait(&[
        "test", "--data", &path, "--x", "X", "--y", "Y", "--z", "Z", "--effect", "constant",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("H0: Z is a valid instrument for X -> Y"), "{text}");
    assert!(text.contains("reject H0: invalid IV"), "{text}");
    assert!(text.contains("alpha       0.003333 (auto: 10/n)"), "{text}");
    assert!(text.contains("HSIC        large-scale"), "{text}");

    let path2 = simulate(
        dir.path(),
        "t2.csv",
        &["--scenario", "table2", "--dist", "gamma", "--n", "500", "--seed", "3"],
    );
    let m = ait(&[
        "test",
        "--data",
        &path2,
        "--x",
        "X",
        "--y",
        "Y",
        "--z",
        "Z1",
        "--z",
        "Z2",
        "--machine",
        "--alpha",
        "0.05",
    ]);
    assert!(m.status.success(), "{}", stderr(&m));
    let lines: Vec<String> = stdout(&m).lines().map(String::from).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("candidate=Z1 p_value="));
    assert!(lines[1].starts_with("candidate=Z2 p_value="));
    assert!(lines
        .iter()
        .all(|l| l.contains("alpha=5.000000e-2") && l.contains("hsic=permutation")));
}

#[test]
fn test_is_deterministic_and_honours_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate(
        dir.path(),
        "d.csv",
        &["--scenario", "table2", "--dist", "beta", "--n", "400", "--seed", "5"],
    );
    let run = |seed: &str| {
        stdout(&ait(&[
            "test",
            "--data",
            &path,
            "--x",
            "X",
            "--y",
            "Y",
            "--z",
            "Z1",
            "--machine",
            "--seed",
            seed,
        ]))
    };
    assert_eq!(run("1"), run("1"));
}

#[test]
fn test_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let mut text = String::from("x,y,z\n");
    for i in 0..100 {
        let x = (i as f64 * 0.37).sin();
        text.push_str(&format!("{x},{},{}\n", 2.0 * x + (i as f64).cos(), 1.0));
    }
    fs::write(&csv, text).unwrap();
    let c = csv.to_str().unwrap();

    let weak = ait(&["test", "--data", c, "--x", "x", "--y", "y", "--z", "z"]);
    assert_eq!(weak.status.code(), Some(3), "{}", stderr(&weak));
    assert!(stderr(&weak).contains("weak"), "{}", stderr(&weak));

    let missing_y = ait(&["test", "--data", c, "--x", "x", "--z", "z"]);
    assert_eq!(missing_y.status.code(), Some(2));
    assert!(stderr(&missing_y).contains("--y"));

    let missing_file = ait(&["test", "--data", "/nonexistent.csv", "--x", "x", "--y", "y", "--z", "z"]);
    assert_eq!(missing_file.status.code(), Some(2));

    let bad_col = ait(&["test", "--data", c, "--x", "x", "--y", "y", "--z", "nope"]);
    assert_eq!(bad_col.status.code(), Some(2));

    let bad_alpha = ait(&[
        "test", "--data", c, "--x", "x", "--y", "y", "--z", "z", "--alpha", "0.9",
    ]);
    assert_eq!(bad_alpha.status.code(), Some(2));
}

#[test]
fn config_file_supplies_missing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate(
        dir.path(),
        "d.csv",
        &["--scenario", "table2", "--dist", "t", "--n", "300", "--seed", "1"],
    );
    let cfg = dir.path().join("run.conf");
    fs::write(
        &cfg,
        format!("# defaults\ndata = {path}\nx = X\ny = Y\nz = Z1, Z2\nalpha = 0.05\nmachine = true\n"),
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = ait(&["test", "--config", cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);

    let flags_win = ait(&["test", "--config", cfg, "--alpha", "0.1", "--z", "Z2"]);
    assert!(flags_win.status.success(), "{}", stderr(&flags_win));
    let text = stdout(&flags_win);
    assert_eq!(text.lines().count(), 1);
    assert!(
        text.contains("candidate=Z2") && text.contains("alpha=1.000000e-1"),
        "{text}"
    );
}

#[test]
fn bench_is_byte_identical_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |jobs: &str, name: &str| {
        let out = dir.path().join(name);
        let o = ait(&[
            "bench",
            "--suite",
            "quick",
            "--replicates",
            "2",
            "--sizes",
            "400",
            "--seed",
            "1",
            "--jobs",
            jobs,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        (
            fs::read(&out).unwrap(),
            fs::read(dir.path().join(format!("{name}.log"))).unwrap(),
        )
    };
    let (t1, l1) = run("1", "a.tsv");
    let (t3, l3) = run("3", "b.tsv");
    assert_eq!(t1, t3);
    assert_eq!(l1, l3);
    let table = String::from_utf8(t1).unwrap();
    assert!(table.starts_with("Scenario\tn\tValid MR\tInvalid MR"));
    assert_eq!(table.lines().count(), 7);
}

#[test]
fn bench_markdown_and_bad_flags() {
    let o = ait(&[
        "bench",
        "--suite",
        "quick",
        "--replicates",
        "1",
        "--sizes",
        "300",
        "--format",
        "markdown",
        "--jobs",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("| Scenario | n | Valid MR | Invalid MR |"));

    assert_eq!(ait(&["bench", "--replicates", "0"]).status.code(), Some(2));
    assert_eq!(ait(&["bench", "--suite", "huge"]).status.code(), Some(2));
    assert_eq!(ait(&["bench", "--sizes", "abc"]).status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    let o = ait(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("simulate"));
}
