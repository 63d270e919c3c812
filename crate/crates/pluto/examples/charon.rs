//! Charon: squared Strassen with fourteen backups from the inner <2,4,2> algorithm.

use pluto::decode::correctable_counts;
use pluto::pluto::charon_code;

fn main() {
    let t = std::time::Instant::now();
    let code = charon_code().expect("charon search");
    let grp = &code.groups[0];
    println!("G = {:?}", grp.big_g.as_ref().unwrap());
    println!("H = {:?}", grp.big_h.as_ref().unwrap());
    println!("workers: {}", code.n());
    for (e, ok, total) in correctable_counts(&code.oracle(), 4) {
        println!("{e} erasures: {ok}/{total} correctable ({:.4})", ok as f64 / total as f64);
    }
    println!("elapsed {:.1?}", t.elapsed());
}
