//! Laderman corank-nullity polynomial over generic, char 3 and char 2 fields.

use pluto::bilinear::laderman;
use pluto::matroid::*;

fn main() {
    let gm = decode_matroid_matrix(&laderman(), false);
    let t = std::time::Instant::now();
    let generic = corank_nullity(&gm).unwrap();
    println!("generic: {generic}");
    println!("matches: {}", generic == Poly::parse(LADERMAN_POLY).unwrap());
    println!("T(1,1) = {}", generic.eval(1, 1));
    for (c, expect) in [(3, LADERMAN_CHAR3_CORRECTION), (2, LADERMAN_CHAR2_CORRECTION)] {
        let d = char_correction(&gm, Characteristic::Generic, Characteristic::Prime(c)).unwrap();
        println!("char {c} correction: {d}");
        println!("  matches: {}  divisible by xy-1: {}", d == Poly::parse(expect).unwrap(), d.divisible_by_xy_minus_one());
    }
    println!("elapsed {:.1?}", t.elapsed());
}
