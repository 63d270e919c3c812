//! Checksum groups on Strassen and Laderman, with their erasure guarantees.

use pluto::pluto::{pluto_222, pluto_333, verify_claims};

fn main() -> pluto::Result<()> {
    for checks in 1..=3 {
        let code = pluto_222(checks)?;
        let claims = verify_claims(&code, checks + 1);
        println!("<2,2,2;{}>", code.n());
        for g in &code.groups {
            println!("  g {:?} h {:?} parity {:?}", g.g, g.h, g.parity());
        }
        for (e, ok, total) in &claims.correctable {
            println!("  {e} erasures: {ok}/{total}");
        }
        println!("  merged check matrix MDS: {}", claims.merged_mds);
    }
    let l = pluto_333(2, 0)?;
    println!("<3,3,3;{}>", l.n());
    for g in &l.groups {
        println!("  parity {:?}", g.parity());
    }
    Ok(())
}
