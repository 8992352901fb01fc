use std::path::Path;
use std::process::{Command, Output};

use approxred::cli::{read_run_config, EXIT_NEGATIVE, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn approxred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_approxred"))
        .args(args)
        .env_remove("APPROXRED_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn header(body: &str) -> &str {
    body.lines().find(|l| !l.starts_with('#')).unwrap()
}

fn data_rows(body: &str) -> Vec<Vec<f64>> {
    body.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

const DECOUPLED: &str = r#"
name = "decoupled"
states = ["y", "z"]
retained = 1
rhs = ["-a*y", "-z + y^2"]
x0 = [1.0, 0.5]

[params]
a = 1.5
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("system.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_writes_csv_with_metadata() {
    let out = approxred(&[
        "simulate",
        "--system",
        "ball-hoop",
        "--set",
        "R=5",
        "--x0",
        "0.5,0.3",
        "--t-end",
        "20",
    ]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let body = stdout(&out);
    assert_eq!(header(&body), "t,x0,x1");
    let rows = data_rows(&body);
    assert_eq!(rows.len(), 2001);
    assert_eq!(rows[0], vec![0.0, 0.5, 0.3]);
    assert_eq!(rows.last().unwrap()[0], 20.0);
    for key in [
        "# tool: approxred",
        "# params:",
        "# g: 9.81",
        "# x0: [0.5,0.3]",
        "# integrator:",
        "# seed: 42",
    ] {
        assert!(body.contains(key), "missing {key}");
    }
}

#[test]
fn usage_errors_exit_one() {
    let out = approxred(&["simulate", "--system", "unknown"]);
    assert_eq!(code(&out), EXIT_USAGE);
    let err = stderr(&out);
    assert!(err.contains("ball-hoop") && err.contains("cart-pendulum"), "{err}");

    let out = approxred(&["simulate", "--system", "ball-hoop", "--x0", "0.5"]);
    assert_eq!(code(&out), EXIT_USAGE);
    assert!(stderr(&out).contains("dimension mismatch"));

    assert_eq!(
        code(&approxred(&["simulate", "--system", "ball-hoop", "--set", "nope=1"])),
        EXIT_USAGE
    );
    assert_eq!(
        code(&approxred(&["bound", "--system", "ball-hoop", "--n-ic", "0"])),
        EXIT_USAGE
    );
    assert_eq!(code(&approxred(&["frobnicate"])), EXIT_USAGE);
    assert_eq!(
        code(&approxred(&[
            "check-lyapunov",
            "--system",
            "cart-pendulum",
            "--certificate",
            "iiss"
        ])),
        EXIT_USAGE
    );
    assert_eq!(code(&approxred(&["--help"])), EXIT_OK);
}

#[test]
fn numerical_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "name = \"blowup\"\nstates = [\"y\", \"z\"]\nretained = 1\nrhs = [\"y^2\", \"-z\"]\nx0 = [1.0, 0.0]\n",
    );
    let out = approxred(&["simulate", "--config", &cfg, "--t-end", "2"]);
    assert_eq!(code(&out), EXIT_NUMERICAL, "{}", stderr(&out));
}

#[test]
fn compare_emits_columns_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cmp.csv");
    let out = approxred(&["compare", "--system", "ball-hoop", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_OK);
    let summary: Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let sup = summary["sup_dev"].as_f64().unwrap();
    assert!(sup > 0.0 && sup.is_finite());

    let body = std::fs::read_to_string(&path).unwrap();
    assert_eq!(header(&body), "t,full_proj_0,reduced_0,deviation");
    let rows = data_rows(&body);
    let max = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    assert_eq!(max, sup);
    for r in &rows {
        assert_eq!(r[3], (r[1] - r[2]).abs());
    }
}

#[test]
fn cart_pendulum_deviation_stays_bounded() {
    let out = approxred(&[
        "compare",
        "--system",
        "cart-pendulum",
        "--t-end",
        "30",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), EXIT_OK);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let dev: Vec<f64> = v["deviation"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d.as_f64().unwrap())
        .collect();
    assert_eq!(dev.len(), 3001);
    assert!(dev.iter().all(|d| d.is_finite() && *d < 10.0));
    assert_eq!(v["full_proj"][0].as_array().unwrap().len(), 2);
}

#[test]
fn exact_system_compares_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DECOUPLED);
    let out = approxred(&["compare", "--config", &cfg, "--format", "json"]);
    assert_eq!(code(&out), EXIT_OK);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["summary"]["sup_dev"].as_f64().unwrap() <= 1e-8);

    let out = approxred(&["check-exact", "--config", &cfg]);
    assert_eq!(code(&out), EXIT_OK);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"], "REDUCIBLE_UP_TO_TOL");

    let out = approxred(&["bound", "--config", &cfg, "--box", "-1,1;-1,1", "--n-ic", "20"]);
    assert_eq!(code(&out), EXIT_OK);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["delta_hat"].as_f64().unwrap() <= 1e-8);
    for key in ["mode", "n_ic", "failures", "seed"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn check_exact_verdicts() {
    let out = approxred(&["check-exact", "--system", "ball-hoop"]);
    assert_eq!(code(&out), EXIT_NEGATIVE);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"], "NOT_REDUCIBLE");
    assert!(v["witness"]["point"].is_array());

    let out = approxred(&["check-exact", "--system", "ball-hoop", "--tol", "1e9"]);
    assert_eq!(code(&out), EXIT_OK);
}

#[test]
fn check_lyapunov_verdicts() {
    for cert in ["fiberwise", "iiss"] {
        let out = approxred(&["check-lyapunov", "--system", "ball-hoop", "--certificate", cert]);
        assert_eq!(code(&out), EXIT_OK, "{cert}: {}", stdout(&out));
        let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["verdict"], "NO_COUNTEREXAMPLE");
        assert_eq!(v["samples_checked"], 10_000);

        let out = approxred(&[
            "check-lyapunov",
            "--system",
            "ball-hoop",
            "--certificate",
            cert,
            "--corrupt",
        ]);
        assert_eq!(code(&out), EXIT_NEGATIVE, "{cert}");
        let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["verdict"], "COUNTEREXAMPLE");
        assert!(v["counterexample"]["violation"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn sweep_rows_and_consistency() {
    let out = approxred(&[
        "sweep",
        "--system",
        "ball-hoop",
        "--param",
        "R",
        "--values",
        "5,10,20,40",
        "--t-end",
        "20",
    ]);
    assert_eq!(code(&out), EXIT_OK);
    let body = stdout(&out);
    assert_eq!(header(&body), "param_value,sup_dev,t_of_sup");
    let rows = data_rows(&body);
    assert_eq!(rows.len(), 4);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));

    let out = approxred(&[
        "sweep",
        "--system",
        "cart-pendulum",
        "--param",
        "d",
        "--values",
        "0.001,0.01,0.1,1",
    ]);
    assert_eq!(code(&out), EXIT_OK);
    assert!(data_rows(&stdout(&out)).iter().all(|r| r[1].is_finite()));

    // A single-value sweep agrees with compare.
    let one = data_rows(&stdout(&approxred(&[
        "sweep",
        "--system",
        "ball-hoop",
        "--param",
        "R",
        "--values",
        "10",
    ])));
    let cmp = approxred(&["compare", "--system", "ball-hoop", "--set", "R=10", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&cmp)).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0][1], v["summary"]["sup_dev"].as_f64().unwrap());
    assert_eq!(one[0][2], v["summary"]["t_of_sup"].as_f64().unwrap());
}

#[test]
fn outputs_are_reproducible_and_carry_their_config() {
    let dir = tempfile::tempdir().unwrap();
    let runs = [
        vec!["bound", "--system", "ball-hoop", "--n-ic", "16", "--mode", "cross"],
        vec![
            "check-lyapunov",
            "--system",
            "ball-hoop",
            "--certificate",
            "iiss",
            "--samples",
            "500",
        ],
        vec![
            "simulate",
            "--system",
            "cart-pendulum",
            "--method",
            "rk4",
            "--dt",
            "0.01",
            "--t-end",
            "2",
        ],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut bodies = Vec::new();
        for tag in ["a", "b"] {
            let path = dir.path().join(format!("{i}-{tag}"));
            let mut full = args.clone();
            full.extend(["--seed", "11", "--out", path.to_str().unwrap()]);
            assert_eq!(code(&approxred(&full)), EXIT_OK, "{args:?}");
            bodies.push(std::fs::read_to_string(&path).unwrap());
        }
        assert_eq!(bodies[0], bodies[1], "{args:?}");

        // The embedded config reproduces the run.
        let cfg = read_run_config(&bodies[0]).unwrap();
        assert_eq!(cfg.seed, 11);
        let again = approxred::cli::execute(&cfg).unwrap();
        assert_eq!(again.body, bodies[0], "{args:?}");
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_approxred"))
        .args(["bound", "--system", "ball-hoop", "--n-ic", "4"])
        .env("APPROXRED_SEED", "99")
        .output()
        .unwrap();
    let v: Value = serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(v["seed"], 99);
}

#[test]
fn custom_config_overrides_and_embedding() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DECOUPLED);
    let out = approxred(&["simulate", "--config", &cfg, "--set", "a=3", "--t-end", "1"]);
    assert_eq!(code(&out), EXIT_OK);
    let body = stdout(&out);
    let rows = data_rows(&body);
    let last = rows.last().unwrap();
    assert!((last[1] - (-3.0f64).exp()).abs() < 1e-8);

    // The definition travels with the output, so the run replays without
    // the original file.
    let rc = read_run_config(&body).unwrap();
    drop(dir);
    assert_eq!(approxred::cli::execute(&rc).unwrap().body, body);

    let out = approxred(&["simulate", "--config", "/nonexistent.toml"]);
    assert_eq!(code(&out), EXIT_USAGE);
}
