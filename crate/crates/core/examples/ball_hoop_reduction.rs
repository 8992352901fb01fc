//! Deviation between the full ball-in-hoop trajectory and the reduced
//! (angle frozen at zero) trajectory as the hoop radius grows.

use std::collections::BTreeMap;

use approxred::integrate::IntegratorConfig;
use approxred::reduce::measure_deviation;
use approxred::systems::{ball_hoop, lookup};

fn main() -> approxred::Result<()> {
    let cfg = IntegratorConfig::default().with_t_end(20.0);
    println!("{:>6} {:>12} {:>8}", "R", "sup_dev", "t_of_sup");
    for r in [5.0, 10.0, 20.0, 40.0] {
        let overrides = BTreeMap::from([("R".to_string(), r)]);
        let e = lookup("ball-hoop", &overrides)?;
        let rep = measure_deviation(&e.field, &e.decomp, &ball_hoop::DEFAULT_X0, &cfg)?;
        println!("{r:>6} {:>12.6} {:>8.2}", rep.sup_dev, rep.t_of_sup);
    }
    Ok(())
}
