//! Brent check for the built-in algorithms and a round trip through JSON.

use pluto::bilinear::{builtin, export_algorithm_json, import_algorithm_json, tensor_alg, verify_brent};

fn main() -> pluto::Result<()> {
    for name in ["strassen", "laderman", "schoolbook<2,3,4>"] {
        let alg = builtin(name)?;
        println!("{name}: dims {:?} rank {} brent {}", alg.dims, alg.r(), verify_brent(&alg).is_ok());
    }
    let s = builtin("strassen")?;
    let ss = tensor_alg(&s, &s);
    println!("strassen ⊗ strassen: rank {} brent {}", ss.r(), verify_brent(&ss).is_ok());
    let back = import_algorithm_json(&export_algorithm_json(&s))?;
    println!("json round trip equal: {}", back == s);
    Ok(())
}
