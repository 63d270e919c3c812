//! Brute-force sweeps behind the β-group union theorems.

use pluto::decode::verify_union_theorems;

fn main() {
    let r = verify_union_theorems();
    for row in &r.beta_matrix {
        println!("{row:?}");
    }
    println!("symmetric: {}", r.beta_matrix_symmetric);
    println!("2x2 systems invertible: {}/{}", r.pair_systems.0, r.pair_systems.1);
    println!("4x4 systems full rank: {}/{}", r.square_systems.0, r.square_systems.1);
    println!("reciprocal sums nonzero: {}/{}", r.reciprocal_sums.0, r.reciprocal_sums.1);
}
