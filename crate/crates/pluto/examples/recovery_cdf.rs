//! Exact and sampled recovery-count distributions of the 9-task Strassen code.

use pluto::pluto::pluto_222;
use pluto::scheme::lift;
use pluto::sim::{exact_distribution, monte_carlo, Decoder, DEFAULT_BUDGET};

fn main() -> pluto::Result<()> {
    let ts = lift(&pluto_222(1)?);
    let exact = exact_distribution(&ts, Decoder::Oracle, DEFAULT_BUDGET)?;
    let mc = monte_carlo(&ts, 10_000, 1, Decoder::Oracle);
    println!("k  exact     sampled");
    for k in 0..=ts.n() {
        println!("{k:<2} {:.5}  {:.5}", exact.cdf[k], mc.cdf[k]);
    }
    if let Some(f) = &exact.fractions {
        println!("exact fractions {f:?}");
    }
    Ok(())
}
