//! Exhaustive 4-erasure sweep of 9·9 under the peeling decoder, plus a random
//! soundness check of the peeler against the span oracle on 9·9 ∪ 53.

use pluto::decode::{count_subsets, PeelConfig, PeelContext};
use pluto::scheme::named_strategy;
use pluto::sim::trial_order;
use std::collections::BTreeSet;
use std::time::Instant;

fn main() -> pluto::Result<()> {
    let t0 = Instant::now();
    let ts = named_strategy("9x9")?;
    let ctx = PeelContext::new(&ts, PeelConfig::default());
    let core = ts.is_core();
    let n = ts.n();
    let four_cycle = |s: &[usize]| {
        let rows: BTreeSet<i32> = s.iter().map(|&u| ts.coords[u][0]).collect();
        let cols: BTreeSet<i32> = s.iter().map(|&u| ts.coords[u][1]).collect();
        rows.len() == 2 && cols.len() == 2 && s.iter().any(|&u| core[u])
    };
    let stuck = |s: &[usize]| {
        let mut avail = vec![true; n];
        s.iter().for_each(|&u| avail[u] = false);
        !ctx.complete(&avail)
    };
    let incomplete = count_subsets(n, 4, |s| stuck(s));
    let other = count_subsets(n, 4, |s| stuck(s) && !four_cycle(s));
    println!("9x9: {incomplete} incomplete 4-sets, {other} not core-meeting 4-cycles ({:.1?})", t0.elapsed());

    let t1 = Instant::now();
    let big = named_strategy("9x9+53")?;
    let ctx = PeelContext::new(&big, PeelConfig::default());
    let oracle = big.oracle();
    let (mut complete, mut unsound) = (0, 0);
    for trial in 0..100_000u64 {
        let order = trial_order(big.n(), 11, trial);
        let k = big.n() - 2 - (trial as usize % 12);
        let mut avail = vec![false; big.n()];
        order[..k].iter().for_each(|&u| avail[u] = true);
        if ctx.complete(&avail) {
            complete += 1;
            if !oracle.decodable(&avail) {
                unsound += 1;
            }
        }
    }
    println!("9x9+53: {complete} peel-complete of 100000 random subsets, {unsound} not oracle-decodable ({:.1?})", t1.elapsed());
    Ok(())
}
