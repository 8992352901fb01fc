//! Sampled worst-case deviation over the default ball-in-hoop region.

use std::collections::BTreeMap;

use approxred::integrate::IntegratorConfig;
use approxred::reduce::{estimate_delta, DeltaMode};
use approxred::systems::lookup;

fn main() -> approxred::Result<()> {
    let e = lookup("ball-hoop", &BTreeMap::new())?;
    let region = e.default_box()?;
    let cfg = IntegratorConfig::default();
    for mode in [DeltaMode::Projected, DeltaMode::Cross] {
        let est = estimate_delta(&e.field, &e.decomp, &region, 100, &cfg, mode, 42)?;
        println!(
            "{mode:?}: delta_hat = {:.6} from x0 = {:?} ({} failures)",
            est.delta_hat, est.argmax_x0, est.failures
        );
    }
    Ok(())
}
