//! Integrates the ball-in-hoop system and prints the trajectory as CSV.
//!
//! cargo run --example ball_hoop_simulate > ball_hoop.csv

use std::collections::BTreeMap;

use approxred::integrate::{integrate_field, IntegratorConfig};
use approxred::systems::{ball_hoop, lookup};

fn main() -> approxred::Result<()> {
    let entry = lookup("ball-hoop", &BTreeMap::new())?;
    let traj = integrate_field(
        &entry.field,
        &ball_hoop::DEFAULT_X0,
        &IntegratorConfig::default().with_output_dt(0.01),
    )?;
    println!("t,{}", entry.state_names.join(","));
    for (t, x) in traj.iter() {
        println!("{t:?},{:?},{:?}", x[0], x[1]);
    }
    Ok(())
}
