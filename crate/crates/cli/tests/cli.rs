//! End-to-end tests of the `rsmooth` binary: flag handling, CSV schemas,
//! exit codes, config-file merging, and reproducibility of output.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rsmooth"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

// data rows of a CSV (skips the header and `#` comments)
fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

// strip the volatile wall_ms column (last) from estimate/sweep bodies
fn stable_body(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| match l.rfind(',') {
            Some(i) => &l[..i],
            None => l,
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn estimate_header_is_schema_stable() {
    let out = run(&[
        "estimate", "--problem", "heaviside", "--x", "0", "--estimator", "zeroth", "--epsilon",
        "0.5", "--samples", "100", "--seed", "7",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "problem,x0,estimator,epsilon,samples,seed,mean0,stderr0,wall_ms"
    );

    let out = run(&[
        "estimate", "--problem", "quadratic:d=2", "--x", "1,1", "--estimator", "first",
        "--epsilon", "0.1", "--samples", "100", "--seed", "1",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out).lines().next().unwrap(),
        "problem,x0,x1,estimator,epsilon,samples,seed,mean0,mean1,stderr0,stderr1,wall_ms"
    );
}

#[test]
fn estimate_zeroth_heaviside_matches_oracle() {
    let out = run(&[
        "estimate", "--problem", "heaviside", "--x", "0", "--estimator", "zeroth", "--epsilon",
        "0.5", "--samples", "100000", "--seed", "7",
    ]);
    assert_eq!(code(&out), 0);
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    let mean: f64 = rows[0][6].parse().unwrap();
    let err: f64 = rows[0][7].parse().unwrap();
    assert!((mean - 0.797885).abs() <= 4.0 * err, "mean {mean} stderr {err}");
}

#[test]
fn estimate_first_quadratic_2d() {
    let out = run(&[
        "estimate", "--problem", "quadratic:d=2", "--x", "1,1", "--estimator", "first",
        "--epsilon", "0.1", "--samples", "1000", "--seed", "1",
    ]);
    assert_eq!(code(&out), 0);
    let rows = data_rows(&stdout(&out));
    for k in 0..2 {
        let mean: f64 = rows[0][7 + k].parse().unwrap();
        let err: f64 = rows[0][9 + k].parse().unwrap();
        assert!((mean - 2.0).abs() <= 4.0 * err, "coord {k}: mean {mean} stderr {err}");
    }
}

#[test]
fn estimate_value_reports_smoothing_bias() {
    // E[(x + eps Z)^2] = x^2 + eps^2
    let out = run(&[
        "estimate", "--problem", "quadratic", "--x", "1", "--estimator", "value", "--epsilon",
        "0.3", "--samples", "100000", "--seed", "4",
    ]);
    assert_eq!(code(&out), 0);
    let rows = data_rows(&stdout(&out));
    let mean: f64 = rows[0][6].parse().unwrap();
    let err: f64 = rows[0][7].parse().unwrap();
    assert!((mean - 1.09).abs() <= 4.0 * err, "mean {mean} stderr {err}");
}

#[test]
fn usage_errors_exit_2() {
    // first-order estimator on a problem without a gradient oracle
    let out = run(&[
        "estimate", "--problem", "heaviside", "--x", "0", "--estimator", "first", "--epsilon",
        "0.5", "--samples", "10",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("gradient oracle"), "{}", stderr(&out));

    let out = run(&[
        "estimate", "--problem", "bogus", "--x", "0", "--estimator", "zeroth", "--epsilon", "0.5",
        "--samples", "10",
    ]);
    assert_eq!(code(&out), 2);

    // message names the missing field
    let out = run(&["estimate", "--problem", "heaviside", "--x", "0", "--estimator", "zeroth"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("epsilon"), "{}", stderr(&out));

    let out = run(&[
        "estimate", "--problem", "heaviside", "--x", "0,1", "--estimator", "zeroth", "--epsilon",
        "0.5", "--samples", "10",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("`x`"), "{}", stderr(&out));

    let out = run(&[
        "sweep", "--problem", "heaviside", "--x", "0", "--estimator", "zeroth", "--epsilon",
        "0.5", "--samples", "10", "--sweep", "gamma", "--grid", "1,2",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sweep_samples_shows_root_m_rate() {
    let out = run(&[
        "sweep", "--problem", "heaviside", "--x", "0", "--estimator", "zeroth", "--epsilon",
        "0.5", "--sweep", "samples", "--grid", "100,1000,10000,100000", "--seed", "3",
    ]);
    assert_eq!(code(&out), 0);
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 4);
    let errs: Vec<f64> = rows.iter().map(|r| r[7].parse().unwrap()).collect();
    let ideal = 1.0 / 10f64.sqrt();
    for pair in errs.windows(2) {
        let ratio = pair[1] / pair[0];
        assert!(
            (ratio - ideal).abs() / ideal < 0.3,
            "stderr ratio per decade {ratio}, ideal {ideal}"
        );
    }
}

#[test]
fn sweep_x_traces_the_smoothed_gradient_bell() {
    let out = run(&[
        "sweep", "--problem", "heaviside", "--estimator", "zeroth", "--epsilon", "0.5",
        "--samples", "20000", "--sweep", "x",
        "--grid", "-1,-0.8,-0.6,-0.4,-0.2,0,0.2,0.4,0.6,0.8,1", "--seed", "5",
    ]);
    assert_eq!(code(&out), 0);
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 11);
    for r in rows {
        let x: f64 = r[1].parse().unwrap();
        let mean: f64 = r[6].parse().unwrap();
        let err: f64 = r[7].parse().unwrap();
        let t = x / 0.5;
        let oracle = (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt() / 0.5;
        assert!((mean - oracle).abs() <= 4.0 * err, "x {x}: mean {mean} oracle {oracle}");
    }
}

#[test]
fn sweep_epsilon_leaves_quadratic_first_gradient_fixed() {
    let out = run(&[
        "sweep", "--problem", "quadratic", "--x", "1", "--estimator", "first", "--samples",
        "20000", "--sweep", "epsilon", "--grid", "0.01,0.1,1", "--seed", "2",
    ]);
    assert_eq!(code(&out), 0);
    for r in data_rows(&stdout(&out)) {
        let mean: f64 = r[6].parse().unwrap();
        let err: f64 = r[7].parse().unwrap();
        assert!((mean - 2.0).abs() <= 4.0 * err, "{r:?}");
    }
}

#[test]
fn sweep_runs_grid_by_seed_in_order() {
    let out = run(&[
        "sweep", "--problem", "heaviside", "--x", "0", "--estimator", "zeroth", "--epsilon",
        "0.5", "--sweep", "samples", "--grid", "100,200", "--seeds", "1,2",
    ]);
    assert_eq!(code(&out), 0);
    let rows = data_rows(&stdout(&out));
    let keys: Vec<(String, String)> =
        rows.iter().map(|r| (r[4].clone(), r[5].clone())).collect();
    assert_eq!(
        keys,
        vec![
            ("100".into(), "1".into()),
            ("100".into(), "2".into()),
            ("200".into(), "1".into()),
            ("200".into(), "2".into())
        ]
    );
}

#[test]
fn optimize_raw_on_plateau_emits_constant_trajectory() {
    let out = run(&[
        "optimize", "--problem", "wall:target=0.5", "--x0", "2", "--grad-source", "raw",
        "--step-size", "0.5", "--max-iters", "20",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "iter,x0,value,grad_norm");
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 21);
    for r in &rows {
        assert_eq!(r[1], "2");
        assert_eq!(r[3], "0");
    }
    assert!(text.contains("terminated_by=max_iters"));
}

#[test]
fn optimize_with_shipped_wall_config_reaches_target() {
    let cfg = configs_dir().join("wall_first.json");
    let out = run(&["optimize", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let final_value: f64 = text
        .lines()
        .find(|l| l.starts_with("# final_value="))
        .and_then(|l| l.split(['=', ' ']).nth(2))
        .unwrap()
        .parse()
        .unwrap();
    assert!(final_value < 0.01, "final value {final_value}");
}

#[test]
fn optimize_with_shipped_edge_config_reaches_target() {
    let cfg = configs_dir().join("edge_zeroth_baseline.json");
    let out = run(&["optimize", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = data_rows(&stdout(&out));
    let theta: f64 = rows.last().unwrap()[1].parse().unwrap();
    assert!((theta - 0.8).abs() < 2.0 / 32.0, "final theta {theta}");
}

#[test]
fn flags_override_config_file() {
    let cfg = configs_dir().join("wall_first.json");
    let out = run(&["optimize", "--config", cfg.to_str().unwrap(), "--max-iters", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(data_rows(&stdout(&out)).len(), 4);
}

#[test]
fn optimize_divergence_exits_1() {
    let out = run(&[
        "optimize", "--problem", "quadratic", "--x0", "1", "--grad-source", "raw",
        "--step-size", "1000", "--max-iters", "5000",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("diverged"), "{}", stderr(&out));
}

#[test]
fn validate_passes_by_default_and_fails_when_coarse() {
    let out = run(&["validate"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).lines().all(|l| l.starts_with("PASS")));

    let out = run(&["validate", "--nodes", "101"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).lines().any(|l| l.starts_with("FAIL")));
}

#[test]
fn csv_bodies_are_reproducible() {
    let args = [
        "estimate", "--problem", "heaviside", "--x", "0", "--estimator", "zeroth", "--epsilon",
        "0.5", "--samples", "5000", "--seed", "9",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(stable_body(&stdout(&a)), stable_body(&stdout(&b)));

    // optimize bodies carry no timing at all
    let args = [
        "optimize", "--problem", "wall:target=0.5", "--x0", "2", "--grad-source", "first",
        "--epsilon", "0.3", "--samples", "64", "--step-size", "0.5", "--max-iters", "30",
        "--seed", "4",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn csv_body_independent_of_worker_count() {
    let args = [
        "sweep", "--problem", "heaviside", "--x", "0", "--estimator", "zeroth", "--epsilon",
        "0.5", "--sweep", "samples", "--grid", "1000,2000", "--seeds", "1,2",
    ];
    let a = bin().args(args).env("RAYON_NUM_THREADS", "1").output().unwrap();
    let b = bin().args(args).env("RAYON_NUM_THREADS", "4").output().unwrap();
    assert_eq!(code(&a), 0);
    assert_eq!(stable_body(&stdout(&a)), stable_body(&stdout(&b)));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = run(&[
        "estimate", "--problem", "relu", "--x", "0", "--estimator", "first", "--epsilon", "1",
        "--samples", "1000", "--seed", "2", "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout(&out));
    // re-parseable: every row has as many fields as the header
    let header_fields = written.lines().next().unwrap().split(',').count();
    for row in data_rows(&written) {
        assert_eq!(row.len(), header_fields);
    }
}
