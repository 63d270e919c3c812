//! Threaded manager/worker run of 9·9 ∪ 53 with four stragglers that never answer.

use pluto::decode::PeelConfig;
use pluto::exec::{random_grid, run_job, StragglerBehavior, StragglerSpec, WorkerPoolConfig};
use pluto::scheme::named_strategy;
use rand::SeedableRng;

fn main() -> pluto::Result<()> {
    let ts = named_strategy("9x9+53")?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let a = random_grid(4, 4, 32, &mut rng);
    let b = random_grid(4, 4, 32, &mut rng);
    let cfg = WorkerPoolConfig {
        seed: 7,
        stragglers: StragglerSpec::Random(4),
        behavior: StragglerBehavior::NeverRespond,
        threads: 4,
        peel: PeelConfig::default(),
    };
    let out = run_job(&ts, &a, &b, &cfg)?;
    let tr = &out.transcript;
    let names: Vec<String> = tr.plan.stragglers.iter().map(|&s| ts.task_name(s)).collect();
    println!("stragglers {names:?}");
    println!("completed {} after {} responses", tr.completed, tr.consumed.len());
    println!("block multiplications {}", tr.block_multiplications);
    println!("relative error {:.2e}", tr.residual.unwrap_or(f64::NAN));
    for e in tr.events.iter().take(8) {
        println!("  after {:>3}: {:?} {:?}", e.arrivals, e.event.rule, e.names);
    }
    Ok(())
}
