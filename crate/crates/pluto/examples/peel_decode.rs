//! Oracle versus peeling decoder on a few erasure patterns of 9·9 and 9·9 ∪ 53.

use pluto::decode::{peel, PeelConfig};
use pluto::scheme::named_strategy;

fn main() -> pluto::Result<()> {
    for label in ["9x9", "9x9+53"] {
        let ts = named_strategy(label)?;
        let oracle = ts.oracle();
        for missing in [vec![0, 1, 2], vec![0, 1, 9, 10], vec![0, 10, 20, 30, 40]] {
            let mut avail = vec![true; ts.n()];
            missing.iter().for_each(|&m| avail[m] = false);
            let st = peel(&ts, &avail, PeelConfig::default());
            let names: Vec<String> = missing.iter().map(|&m| ts.task_name(m)).collect();
            println!("{label} missing {names:?}: oracle {} peel {} ({} steps)", oracle.decodable(&avail), st.complete, st.events.len());
        }
    }
    Ok(())
}
