use std::path::Path;
use std::process::Command;

fn pluto(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pluto")).args(args).output().expect("run pluto");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

#[test]
fn outputs_match_golden_files() {
    let cases: [(&[&str], &str); 5] = [
        (&["sim", "mc", "--scheme", "9x9+53", "--samples", "500", "--seed", "3", "--format", "csv"], "sim_mc_9x9_53.csv"),
        (&["matroid", "poly", "--alg", "strassen", "--format", "csv"], "matroid_strassen.csv"),
        (&["sim", "thresholds", "--format", "csv"], "thresholds.csv"),
        (&["pluto", "build", "--base", "strassen", "--checks", "2"], "pluto_222_2.json"),
        (&["sim", "exact", "--scheme", "11", "--format", "csv"], "sim_exact_11.csv"),
    ];
    for (args, file) in cases {
        let (code, text) = pluto(args);
        assert_eq!(code, 0, "{args:?}");
        assert_eq!(text, golden(file), "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let base = ["sim", "mc", "--scheme", "9x9", "--samples", "400", "--seed", "9", "--format", "csv"];
    let one = pluto(&[&base[..], &["--threads", "1"]].concat());
    let four = pluto(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one, four);
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("pluto-golden-{}.csv", std::process::id()));
    let p = path.display().to_string();
    let (code, stdout) = pluto(&["matroid", "poly", "--format", "csv", "--out", &p]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), golden("matroid_strassen.csv"));
    let _ = std::fs::remove_file(&path);
}

#[test]
fn bad_input_exits_nonzero() {
    assert_ne!(pluto(&["nope"]).0, 0);
    assert_ne!(pluto(&["scheme", "describe", "--label", "8x8"]).0, 0);
    assert_ne!(pluto(&["sim", "mc", "--scheme", "9", "--field", "gf4"]).0, 0);
    assert_ne!(pluto(&["alg", "import", "--file", "/nonexistent.json"]).0, 0);
}

#[test]
fn json_round_trip_through_import() {
    let (code, json) = pluto(&["alg", "export", "--name", "laderman"]);
    assert_eq!(code, 0);
    let path = std::env::temp_dir().join(format!("pluto-laderman-{}.json", std::process::id()));
    std::fs::write(&path, json).unwrap();
    let (code, text) = pluto(&["alg", "import", "--file", &path.display().to_string()]);
    let _ = std::fs::remove_file(&path);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["rank"], 23);
    assert_eq!(v["brent"], true);
}
