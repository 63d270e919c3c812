//! Symmetry actions on Strassen and Laderman and the task permutations they induce.

use pluto::bilinear::{laderman, strassen, verify_action, GroupAction};
use pluto::pluto::{symmetry_orbit, vector_checksum};

fn main() -> pluto::Result<()> {
    let l = laderman();
    for (name, g) in [("rotation", GroupAction::laderman_rotation()), ("reflection", GroupAction::laderman_reflection())] {
        let p = verify_action(&l, &g).expect("symmetry");
        println!("laderman {name}: {} order {}", p.cycle_string(), p.order());
    }
    let s = strassen();
    let p = verify_action(&s, &GroupAction::strassen_conjugation()).expect("symmetry");
    println!("strassen conjugation: {} order {}", p.cycle_string(), p.order());
    let g0 = vector_checksum(&s, &[1, 2], &[-1, 1])?;
    for g in symmetry_orbit(&s, &GroupAction::strassen_conjugation(), &g0)? {
        println!("  parity {:?}", g.parity());
    }
    Ok(())
}
