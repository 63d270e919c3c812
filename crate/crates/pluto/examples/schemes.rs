//! Composite strategies from the label catalog.

use pluto::scheme::{named_strategy, CATALOG};

fn main() -> pluto::Result<()> {
    for label in CATALOG {
        let ts = named_strategy(label)?;
        let d = ts.dims;
        println!(
            "{:<20} <{},{},{}> tasks {:>4} core {:>4} naive {:>4}",
            ts.label,
            d.l,
            d.m,
            d.n,
            ts.n(),
            ts.core.len(),
            d.l * d.m * d.n
        );
    }
    Ok(())
}
