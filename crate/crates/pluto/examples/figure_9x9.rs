//! Recovery-count CDF of 26·29 from 5000 random arrival orders.

use pluto::scheme::named_strategy;
use pluto::sim::{monte_carlo, Decoder};
use std::time::Instant;

fn main() -> pluto::Result<()> {
    let t0 = Instant::now();
    let ts = named_strategy("26x29")?;
    let d = monte_carlo(&ts, 5000, 0, Decoder::Oracle);
    let s = d.summary();
    println!("{} tasks, {:.1?}", ts.n(), t0.elapsed());
    println!("P(count <= 729) = {:.4}", d.cdf[729]);
    println!("P(count <= 737) = {:.4}", d.cdf[737]);
    println!("quantiles {:?}", s.quantiles);
    Ok(())
}
