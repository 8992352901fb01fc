//! Cart-pendulum: the retained (position, velocity) block against its
//! reduction for a few cart damping values.

use std::collections::BTreeMap;

use approxred::integrate::IntegratorConfig;
use approxred::reduce::{construct_reduced, measure_deviation};
use approxred::systems::{cart_pendulum, lookup};

fn main() -> approxred::Result<()> {
    let cfg = IntegratorConfig::default();
    for d in [0.5, 1.0, 2.0, 4.0] {
        let e = lookup("cart-pendulum", &BTreeMap::from([("d".to_string(), d)]))?;
        let reduced = construct_reduced(&e.field, &e.decomp)?;
        let y = reduced.eval(&[1.0, 0.0])?;
        let rep = measure_deviation(&e.field, &e.decomp, &cart_pendulum::DEFAULT_X0, &cfg)?;
        println!(
            "d = {d}: Y(1, 0) = {y:?}, sup_dev = {:.6} at t = {}",
            rep.sup_dev, rep.t_of_sup
        );
    }
    Ok(())
}
