//! Runs the reducibility test on a decoupled triangular system and on the
//! ball-in-hoop, which is not reducible.

use std::collections::BTreeMap;

use approxred::model::{BoxRegion, Decomposition, VectorField};
use approxred::reduce::{check_exact_reducible, CheckOptions};
use approxred::systems::lookup;

fn main() -> approxred::Result<()> {
    let triangular = VectorField::new("triangular", 3, |x, out| {
        out[0] = -x[0] + x[1];
        out[1] = -x[1];
        out[2] = x[0] * x[2] - x[2].powi(3);
    })?;
    let d = Decomposition::new(3, 2)?;
    let region = BoxRegion::symmetric(&[1.0; 3])?;
    let rep = check_exact_reducible(&triangular, &d, &region, &CheckOptions::default())?;
    println!("triangular: {:?} (max residual {:.2e})", rep.verdict, rep.max_residual);

    let e = lookup("ball-hoop", &BTreeMap::new())?;
    let rep = check_exact_reducible(&e.field, &e.decomp, &e.default_box()?, &CheckOptions::default())?;
    println!("ball-hoop:  {:?}", rep.verdict);
    if let Some(w) = rep.witness {
        println!(
            "  worst at {:?}, component {}, magnitude {:.4}",
            w.point, w.component, w.magnitude
        );
    }
    Ok(())
}
