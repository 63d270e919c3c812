//! Corank-nullity polynomial of the Strassen decode matroid.

use pluto::bilinear::strassen;
use pluto::matroid::{corank_nullity, decode_matroid_matrix, Characteristic};

fn main() -> pluto::Result<()> {
    for c in ["generic", "2", "3"] {
        let ch = Characteristic::parse(c)?;
        let t = corank_nullity(&decode_matroid_matrix(&strassen(), false).with_characteristic(ch))?;
        println!("{c}: {t}  T(1,1) = {}", t.eval(1, 1));
    }
    Ok(())
}
