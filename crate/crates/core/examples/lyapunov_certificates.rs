//! Checks every bundled certificate, then a deliberately broken copy of each.

use std::collections::BTreeMap;

use approxred::systems::{lookup, BUILTIN_SYSTEMS};

fn main() -> approxred::Result<()> {
    for name in BUILTIN_SYSTEMS {
        let e = lookup(name, &BTreeMap::new())?;
        for cert in &e.certificates {
            let check = e.certificate(cert, None, 42)?;
            for (label, c) in [("bundled", check.clone()), ("corrupted", check.corrupted())] {
                let rep = c.run(10_000, 42)?;
                print!("{name:>14} {:<10} {label:<10} {:?}", check.kind(), rep.verdict);
                if let Some(cex) = &rep.counterexample {
                    print!("  {:?} violated by {:.3e}", cex.condition, cex.violation);
                }
                println!();
            }
        }
    }
    Ok(())
}
