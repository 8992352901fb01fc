//! Production numerics against values from the independent scipy oracle in
//! `fixtures/oracles.py` (DOP853, rtol = atol = 1e-12).

use std::collections::BTreeMap;

use approxred::cli::{self, Cli, RunConfig};
use approxred::integrate::{integrate_field, IntegratorConfig};
use approxred::model::BoxRegion;
use approxred::reduce::measure_deviation;
use approxred::systems::{ball_hoop, lookup, BallHoopParams};
use clap::Parser;
use serde_json::Value;

fn oracles() -> Value {
    serde_json::from_str(include_str!("fixtures/oracles.json")).unwrap()
}

fn overrides(r: f64) -> BTreeMap<String, f64> {
    [("R".to_string(), r)].into_iter().collect()
}

#[test]
fn ball_hoop_endpoint() {
    let o = oracles();
    let e = lookup("ball-hoop", &BTreeMap::new()).unwrap();
    let traj = integrate_field(&e.field, &ball_hoop::DEFAULT_X0, &IntegratorConfig::default()).unwrap();
    for (got, want) in traj
        .last()
        .iter()
        .zip(o["ball_hoop_endpoint_r5_t10"].as_array().unwrap())
    {
        assert!((got - want.as_f64().unwrap()).abs() <= 1e-6);
    }
}

#[test]
fn ball_hoop_sweep_values() {
    let o = oracles();
    let cfg = IntegratorConfig::default().with_t_end(20.0);
    for r in [5.0, 10.0, 20.0, 40.0] {
        let e = lookup("ball-hoop", &overrides(r)).unwrap();
        let rep = measure_deviation(&e.field, &e.decomp, &ball_hoop::DEFAULT_X0, &cfg).unwrap();
        let want = &o["ball_hoop_sup_dev_t20"][format!("{r}")];
        let sup = want["sup_dev"].as_f64().unwrap();
        assert!(
            (rep.sup_dev - sup).abs() <= 1e-4 * sup,
            "R = {r}: {} vs {sup}",
            rep.sup_dev
        );
        assert_eq!(rep.t_of_sup, want["t_of_sup"].as_f64().unwrap(), "R = {r}");
    }
}

#[test]
fn coupling_lipschitz_constant() {
    let o = oracles();
    let region = BoxRegion::from_intervals(&[(-0.3, 0.3)]).unwrap();
    let l = BallHoopParams::default().coupling_lipschitz(&region, 42).unwrap();
    assert!((l - o["lipschitz_r5_box03"].as_f64().unwrap()).abs() <= 1e-3);
}

#[test]
fn ball_hoop_delta_on_default_box() {
    let o = oracles();
    let cli = Cli::try_parse_from(["approxred", "bound", "--system", "ball-hoop"]).unwrap();
    let cfg = RunConfig::from_command(&cli.command).unwrap();
    let out = cli::execute(&cfg).unwrap();
    let v: Value = serde_json::from_str(&out.body).unwrap();
    let got = v["delta_hat"].as_f64().unwrap();
    let want = o["ball_hoop_delta_default_n100_t10"].as_f64().unwrap();
    assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");
    assert_eq!(v["n_ic"], 100);
    assert_eq!(v["failures"], 0);
}

#[test]
fn delta_initial_conditions_match_fixture() {
    // The oracle integrates the crate's own Sobol draws; make sure they have
    // not drifted.
    let fixture: Vec<Vec<f64>> = serde_json::from_str(include_str!("fixtures/delta_ics_default.json")).unwrap();
    let e = lookup("ball-hoop", &BTreeMap::new()).unwrap();
    let ics = approxred::sampling::sample_box(&e.default_box().unwrap(), 100, 42).unwrap();
    assert_eq!(ics.len(), fixture.len());
    for (a, b) in ics.iter().zip(&fixture) {
        assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-15));
    }
}
