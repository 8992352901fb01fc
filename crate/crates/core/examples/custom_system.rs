//! Loads a system from TOML and compares it with its reduction.
//!
//! cargo run --example custom_system -- examples/decoupled.toml

use std::collections::BTreeMap;
use std::path::PathBuf;

use approxred::integrate::IntegratorConfig;
use approxred::model::BoxRegion;
use approxred::reduce::{check_exact_reducible, measure_deviation, CheckOptions};
use approxred::systems::{from_config, SystemConfig};

fn main() -> approxred::Result<()> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/decoupled.toml")));
    let cfg = SystemConfig::load(&path)?;
    let e = from_config(&cfg, &BTreeMap::new())?;
    let region = BoxRegion::symmetric(&vec![1.0; e.field.dim()])?;
    let check = check_exact_reducible(&e.field, &e.decomp, &region, &CheckOptions::default())?;
    println!("{}: {:?}", cfg.name, check.verdict);
    let x0 = cfg.initial_condition();
    let rep = measure_deviation(&e.field, &e.decomp, &x0, &IntegratorConfig::default())?;
    println!("sup deviation from {x0:?}: {:.3e}", rep.sup_dev);
    Ok(())
}
