//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use approxred::cli::{self, Cli, Outcome, RunConfig};
use approxred::integrate::{integrate_field, IntegratorConfig};
use approxred::model::{norm, BoxRegion, VectorField};
use approxred::numdiff;
use approxred::reduce::{measure_deviation, ReducibilityReport, ReducibilityVerdict};
use approxred::sampling::sample_box;
use approxred::stability::{check_fiberwise, check_iiss, CertificateVerdict};
use approxred::systems::{ball_hoop, cart_pendulum, lookup, BallHoopParams};
use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = std::result::Result<String, String>;

fn oracles() -> Value {
    serde_json::from_str(include_str!("fixtures/oracles.json")).expect("oracle fixture parses")
}

fn command(args: &[&str]) -> RunConfig {
    let mut full = vec!["approxred"];
    full.extend_from_slice(args);
    let cli = Cli::try_parse_from(full).expect("arguments parse");
    RunConfig::from_command(&cli.command).expect("config resolves")
}

fn run(args: &[&str]) -> Outcome {
    cli::execute(&command(args)).expect("command runs")
}

/// Data rows of a CSV output, skipping `#` metadata and the header.
fn csv_rows(body: &str) -> Vec<Vec<f64>> {
    body.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn timed(limit: Duration, f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    let out = f()?;
    let took = start.elapsed();
    if took > limit {
        return Err(format!("{out}; took {took:.2?}, limit {limit:?}"));
    }
    Ok(format!("{out}; {took:.2?}"))
}

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn criterion_1() -> Check {
    timed(Duration::from_secs(5), || {
        let out = run(&[
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
        let devs: Vec<f64> = csv_rows(&out.body).iter().map(|r| r[1]).collect();
        ensure(devs.len() == 4, format!("expected 4 rows, got {}", devs.len()))?;
        let ratios: Vec<f64> = devs.windows(2).map(|w| w[1] / w[0]).collect();
        ensure(
            ratios.iter().all(|&r| r <= 0.9),
            format!("sup_dev {devs:?}, ratios {ratios:?}"),
        )?;
        Ok(format!("sup_dev {devs:.4?}, ratios {ratios:.3?}"))
    })
}

fn criterion_2() -> Check {
    timed(Duration::from_secs(10), || {
        let x0 = cart_pendulum::DEFAULT_X0;
        let envelope = 100.0 * norm(&x0);
        let cfg = IntegratorConfig::default().with_t_end(30.0);
        let mut summary = Vec::new();
        for d in [0.001, 0.01, 0.1, 1.0] {
            let e = cart_pendulum::CartPendulumParams {
                d,
                ..Default::default()
            };
            let entry = approxred::systems::cart_pendulum(e).map_err(|e| e.to_string())?;
            let rep = measure_deviation(&entry.field, &entry.decomp, &x0, &cfg).map_err(|e| e.to_string())?;
            ensure(
                rep.dev_series.iter().all(|v| v.is_finite()),
                format!("d = {d}: non-finite deviation"),
            )?;
            ensure(
                rep.sup_dev <= envelope,
                format!("d = {d}: sup_dev {} above {envelope}", rep.sup_dev),
            )?;
            let (start, end) = (norm(&rep.reduced[0]), norm(rep.reduced.last().unwrap()));
            if d >= 0.1 {
                ensure(end < start, format!("d = {d}: reduced norm {start} -> {end}"))?;
            }
            summary.push(format!("d={d}: sup_dev {:.3}, |y| {start:.3}->{end:.3}", rep.sup_dev));
        }
        Ok(summary.join(", "))
    })
}

/// A random system whose retained block does not depend on the fiber.
fn decoupled_config(rng: &mut ChaCha8Rng, index: usize) -> String {
    let n = rng.gen_range(2..=6);
    let m = rng.gen_range(1..=(n - 1).min(3));
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut rhs = Vec::new();
    for i in 0..n {
        let a: f64 = rng.gen_range(0.5..2.0);
        let b: f64 = rng.gen_range(-0.5..0.5);
        // Retained states couple only to retained states; fiber states may
        // read anything.
        let j = if i < m {
            rng.gen_range(0..m)
        } else {
            rng.gen_range(0..n)
        };
        rhs.push(format!("-{a}*s{i} + {b}*sin(s{j})"));
    }
    let quote = |v: &[String]| v.iter().map(|s| format!("\"{s}\"")).collect::<Vec<_>>().join(", ");
    format!(
        "name = \"decoupled-{index}\"\nstates = [{}]\nretained = {m}\nrhs = [{}]\n",
        quote(&names),
        quote(&rhs)
    )
}

fn criterion_3() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    timed(Duration::from_secs(5), || {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut worst: f64 = 0.0;
        for k in 0..5 {
            let path = dir.path().join(format!("decoupled-{k}.toml"));
            std::fs::write(&path, decoupled_config(&mut rng, k)).map_err(|e| e.to_string())?;
            let p = path.to_str().unwrap();
            let exact = run(&["check-exact", "--config", p]);
            ensure(
                exact.verdict == Some(true),
                format!("system {k}: check-exact not reducible"),
            )?;
            let report: ReducibilityReport = serde_json::from_str(&exact.body).map_err(|e| e.to_string())?;
            ensure(report.verdict == ReducibilityVerdict::ReducibleUpToTol, "verdict field")?;
            let cmp = run(&["compare", "--config", p, "--t-end", "5"]);
            let summary: Value = serde_json::from_str(cmp.summary.as_deref().unwrap()).unwrap();
            let dev = summary["sup_dev"].as_f64().unwrap();
            ensure(dev <= 1e-7, format!("system {k}: sup_dev {dev}"))?;
            worst = worst.max(dev);
        }
        Ok(format!("5 systems reducible, max sup_dev {worst:e}"))
    })
}

fn criterion_4() -> Check {
    let out = run(&["check-exact", "--system", "ball-hoop"]);
    ensure(out.verdict == Some(false), "ball-hoop reported reducible")?;
    let status = Command::new(env!("CARGO_BIN_EXE_approxred"))
        .args(["check-exact", "--system", "ball-hoop"])
        .output()
        .map_err(|e| e.to_string())?
        .status;
    ensure(
        status.code() == Some(cli::EXIT_NEGATIVE),
        format!("exit status {status}"),
    )?;
    let rep: ReducibilityReport = serde_json::from_str(&out.body).map_err(|e| e.to_string())?;
    let w = rep.witness.ok_or("no witness")?;
    let entry = lookup("ball-hoop", &BTreeMap::new()).unwrap();
    let m = entry.decomp.m();
    let col = m + w.fiber_index.ok_or("witness without fiber index")?;
    let d = numdiff::partials(
        |x| entry.field.eval(x).unwrap(),
        &w.point,
        w.component..w.component + 1,
        col..col + 1,
    )[(0, 0)];
    ensure(d.abs() > rep.tol, format!("re-evaluated partial {d} within tol"))?;
    Ok(format!("exit 3, witness at {:?}, re-evaluated partial {d:.6}", w.point))
}

fn criterion_5() -> Check {
    let p = BallHoopParams::default();
    let entry = approxred::systems::ball_hoop(p).unwrap();
    let region = entry.default_box().map_err(|e| e.to_string())?;
    let v = p.lyapunov();
    let mut worst: f64 = 0.0;
    for x in sample_box(&region, 10_000, 42).map_err(|e| e.to_string())? {
        let got = v.derivative_along(&entry.field, &x).map_err(|e| e.to_string())?;
        let want = p.lyapunov_rate(&x);
        worst = worst.max((got - want).abs() / (1.0 + want.abs()));
    }
    ensure(worst <= 1e-9, format!("max relative error {worst:e}"))?;
    let cert = p.fiberwise_certificate(&region).map_err(|e| e.to_string())?;
    let closed = format!("closed form max rel err {worst:e}");
    timed(Duration::from_secs(2), || {
        let rep =
            check_fiberwise(&entry.field, &entry.decomp, &cert, &region, 100_000, 42).map_err(|e| e.to_string())?;
        ensure(rep.passed(), format!("{:?}", rep.counterexample))?;
        Ok(format!("{closed}; fiberwise NO_COUNTEREXAMPLE at 1e5 samples"))
    })
}

fn criterion_6() -> Check {
    let p = BallHoopParams::default();
    let region = p.default_box(&ball_hoop::DEFAULT_X0).map_err(|e| e.to_string())?;
    let (state_box, input_box) = BallHoopParams::split_box(&region).map_err(|e| e.to_string())?;
    let l = ball_hoop::certified_lipschitz(&p, &input_box, 42).map_err(|e| e.to_string())?;
    let cert = p.iiss_certificate(l).map_err(|e| e.to_string())?;
    let rep = check_iiss(&p.control_system(), &cert, &state_box, &input_box, 100_000, 42).map_err(|e| e.to_string())?;
    ensure(rep.passed(), format!("{:?}", rep.counterexample))?;
    ensure(rep.premise_samples > 0, "decay premise never met")?;
    let flipped = BallHoopParams { mu: -p.mu, ..p };
    let bad =
        check_iiss(&flipped.control_system(), &cert, &state_box, &input_box, 100_000, 42).map_err(|e| e.to_string())?;
    ensure(
        bad.verdict == CertificateVerdict::Counterexample,
        "sign flip not detected",
    )?;
    Ok(format!(
        "L_hat*1.2 = {l:.4}, {} premise samples, flipped friction: {} violations",
        rep.premise_samples, bad.violations
    ))
}

fn criterion_7() -> Check {
    let f = VectorField::new("decay", 1, |x, out| out[0] = -x[0]).unwrap();
    let exact = (-1.0f64).exp();
    let errs: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
        .iter()
        .map(|&dt| {
            let traj = integrate_field(&f, &[1.0], &IntegratorConfig::rk4(dt, 1.0)).unwrap();
            (traj.last()[0] - exact).abs()
        })
        .collect();
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    ensure(ratios.iter().all(|&r| r >= 12.0), format!("ratios {ratios:?}"))?;
    Ok(format!("error ratios {ratios:.2?}"))
}

fn criterion_8() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_approxred");
    let run_to = |name: &str| -> std::result::Result<Vec<u8>, String> {
        let path = dir.path().join(name);
        let status = Command::new(bin)
            .args([
                "sweep",
                "--system",
                "ball-hoop",
                "--param",
                "R",
                "--values",
                "5,10,20,40",
                "--seed",
                "7",
            ])
            .arg("--out")
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), format!("sweep exited with {status}"))?;
        std::fs::read(&path).map_err(|e| e.to_string())
    };
    let (a, b) = (run_to("a.csv")?, run_to("b.csv")?);
    ensure(a == b, "sweep outputs differ")?;
    Ok(format!("two sweeps, {} identical bytes", a.len()))
}

fn criterion_9() -> Check {
    let o = oracles();
    let entry = lookup("ball-hoop", &BTreeMap::new()).unwrap();
    let traj = integrate_field(&entry.field, &ball_hoop::DEFAULT_X0, &IntegratorConfig::default())
        .map_err(|e| e.to_string())?;
    let want: Vec<f64> = o["ball_hoop_endpoint_r5_t10"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let end_err = traj
        .last()
        .iter()
        .zip(&want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(end_err <= 1e-6, format!("endpoint error {end_err:e}"))?;

    let cfg = IntegratorConfig::default().with_t_end(20.0);
    let dev = measure_deviation(&entry.field, &entry.decomp, &ball_hoop::DEFAULT_X0, &cfg)
        .map_err(|e| e.to_string())?
        .sup_dev;
    let want_dev = o["ball_hoop_sup_dev_t20"]["5"]["sup_dev"].as_f64().unwrap();
    let rel = (dev - want_dev).abs() / want_dev;
    ensure(rel <= 1e-4, format!("sup_dev relative error {rel:e}"))?;

    let p = BallHoopParams::default();
    let l = p
        .coupling_lipschitz(&BoxRegion::from_intervals(&[(-0.3, 0.3)]).unwrap(), 42)
        .map_err(|e| e.to_string())?;
    let want_l = o["lipschitz_r5_box03"].as_f64().unwrap();
    ensure((l - want_l).abs() <= 1e-3, format!("Lipschitz {l} vs {want_l}"))?;
    Ok(format!(
        "endpoint err {end_err:.1e}, sup_dev rel err {rel:.1e}, Lipschitz err {:.1e}",
        (l - want_l).abs()
    ))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 9] = [
        ("R-sweep deviation decreases by at least 10% per step", criterion_1),
        ("cart-pendulum deviation bounded, reduced spiral converges", criterion_2),
        ("random decoupled systems reduce exactly", criterion_3),
        ("ball-hoop is not exactly reducible, witness re-evaluates", criterion_4),
        ("Lyapunov closed form and fiberwise check", criterion_5),
        ("ball-hoop IISS certificate, sign flip detected", criterion_6),
        ("RK4 fourth-order convergence", criterion_7),
        ("byte-identical sweep output", criterion_8),
        ("oracle-pinned numerics", criterion_9),
    ];
    assert!(Path::new(env!("CARGO_BIN_EXE_approxred")).exists());
    let mut failed = 0;
    let mut report = String::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        let _ = writeln!(report, "criterion {}: {tag}: {name} ({detail})", i + 1);
    }
    print!("{report}");
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
