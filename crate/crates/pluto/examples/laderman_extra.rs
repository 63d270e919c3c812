//! Laderman with its two fixed checksum groups plus one searched group.

use pluto::pluto::{pluto_333, verify_claims};

fn main() {
    let code = pluto_333(2, 1).expect("search");
    let grp = code.groups.last().unwrap();
    println!("third group g = {:?}, h = {:?}", grp.g, grp.h);
    println!("parity {:?}", grp.parity());
    for (e, ok, total) in verify_claims(&code, 3).correctable {
        println!("{e} erasures: {ok}/{total}");
    }
}
