//! One pass/fail line per acceptance criterion.
//!
//! Criteria expected to fail are listed in `KNOWN_FAILURES`; the test asserts
//! that the failing set is exactly that list, so a regression or an
//! unexpected pass both show up.

use pluto::bilinear::{
    decode_combination, evaluate, laderman, parse_tasks, schoolbook, strassen, verify_action, verify_brent,
    BilinearAlgorithm, Grid, GroupAction,
};
use pluto::decode::{
    count_subsets, correctable_counts, verify_union_theorems, PeelConfig, PeelContext,
};
use pluto::exec::{random_fp_grid, random_grid, run_job, StragglerBehavior, StragglerSpec, WorkerPoolConfig};
use pluto::fieldlin::{Fp, Ring, DEFAULT_PRIME};
use pluto::matroid::{
    char_correction, corank_nullity, decode_matroid_matrix, Characteristic, Poly, LADERMAN_CHAR2_CORRECTION,
    LADERMAN_CHAR3_CORRECTION, LADERMAN_POLY, STRASSEN_POLY,
};
use pluto::pluto::{charon_code, pluto_222, pluto_333, symmetry_orbit, tolerates, vector_checksum, verify_claims};
use pluto::scheme::{beta_checksum, factor, lift, named_strategy, tensor, BETA_G, BETA_H, CATALOG};
use pluto::sim::{exact_distribution, monte_carlo, table_one_inputs, thresholds_table, trial_order, Decoder, Judge};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

const KNOWN_FAILURES: &[usize] = &[5];

type Check = fn() -> (bool, String);

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn schoolbook_fp(a: &Grid<Fp>, b: &Grid<Fp>) -> Vec<Fp> {
    let mut out = Vec::new();
    for i in 0..a.rows {
        for k in 0..b.cols {
            let mut acc = a.at(i, 0).mul(b.at(0, k));
            for j in 1..a.cols {
                acc = acc.add(&a.at(i, j).mul(b.at(j, k)));
            }
            out.push(acc);
        }
    }
    out
}

fn ac1() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = Vec::new();
    let algs = [strassen(), laderman()];
    for alg in &algs {
        for _ in 0..100 {
            let d = alg.dims;
            let a = random_fp_grid(d.l, d.m, DEFAULT_PRIME, &mut rng);
            let b = random_fp_grid(d.m, d.n, DEFAULT_PRIME, &mut rng);
            if evaluate(alg, &a, &b).unwrap().blocks != schoolbook_fp(&a, &b) {
                bad.push(alg.name.clone());
                break;
            }
        }
    }
    let mut labels: Vec<&str> = vec!["9x9"];
    labels.extend(CATALOG.iter().copied().filter(|l| *l != "9x9"));
    for label in &labels {
        let ts = named_strategy(label).unwrap();
        let p = ts.prime();
        for _ in 0..100 {
            let d = ts.dims;
            let a = random_fp_grid(d.l, d.m, p, &mut rng);
            let b = random_fp_grid(d.m, d.n, p, &mut rng);
            if ts.evaluate(&a, &b).unwrap().1.blocks != schoolbook_fp(&a, &b) {
                bad.push(label.to_string());
                break;
            }
        }
    }
    (bad.is_empty(), format!("{} algorithms and schemes, mismatches {:?}", algs.len() + labels.len(), bad))
}

fn mutate(alg: &BilinearAlgorithm, rng: &mut ChaCha8Rng) -> BilinearAlgorithm {
    let mut m = alg.clone();
    let delta = if rng.gen_bool(0.5) { 1 } else { -1 } * rng.gen_range(1..=3);
    let r = m.r();
    match rng.gen_range(0..3) {
        0 => {
            let len = m.a_enc[0].len();
            m.a_enc[rng.gen_range(0..r)][rng.gen_range(0..len)] += delta;
        }
        1 => {
            let len = m.b_enc[0].len();
            m.b_enc[rng.gen_range(0..r)][rng.gen_range(0..len)] += delta;
        }
        _ => {
            let rows = m.dec.len();
            m.dec[rng.gen_range(0..rows)][rng.gen_range(0..r)] += delta;
        }
    }
    m
}

fn ac2() -> (bool, String) {
    let (s, l) = (strassen(), laderman());
    let ok = verify_brent(&s).is_ok() && verify_brent(&l).is_ok() && s.r() == 7 && l.r() == 23;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut caught = 0;
    for k in 0..50 {
        let base = if k % 2 == 0 { &s } else { &l };
        if verify_brent(&mutate(base, &mut rng)).is_err() {
            caught += 1;
        }
    }
    (ok && caught == 50, format!("ranks 7/23 verified, {caught}/50 mutations rejected"))
}

fn ac3() -> (bool, String) {
    let c = pluto_222(3).unwrap();
    let p = |i: usize| c.groups[i].parity().to_vec();
    let mut ok = p(0) == [1, -4, 3, -3, 2, 2, -1] && p(1) == [1, 1, 4, 2, 3, -2, 3] && p(2) == [1, -3, -1, -2, -2, -3, 4];
    let l = pluto_333(2, 0).unwrap();
    ok &= l.groups[0].parity() == [-1, 2, 4, 1, -3, 21, 18, 15, 12, 3, 6, 2, 3, 17, -4, 13, 10, 9, 2, -2, 6, -3, 9];
    ok &= l.groups[1].parity() == [6, -4, -1, 2, 3, 17, 13, 9, 10, 4, 3, 18, 12, 21, 15, 1, -3, 2, 2, -3, -2, 9, 6];
    let want = [
        ("A11 + 2A21", "-B11 + B12"),
        ("A12 + 2A22", "-B21 + B22"),
        ("3A11 - A21", "B11 + 2B12"),
        ("3A12 - A22", "B21 + 2B22"),
        ("2A11 - 3A21", "2B11 + B12"),
        ("2A12 - 3A22", "2B21 + B22"),
    ];
    let tasks = c.tasks();
    let backups_ok = want.iter().enumerate().all(|(s, (a, b))| {
        tasks[7 + s].a == pluto::bilinear::parse_lin(a, 'A', 2, 2) && tasks[7 + s].b == pluto::bilinear::parse_lin(b, 'B', 2, 2)
    });
    (ok && backups_ok, format!("parities match, six backup definitions match: {backups_ok}"))
}

fn ac4() -> (bool, String) {
    let mut parts = Vec::new();
    let mut ok = true;
    let cases: Vec<(&str, pluto::pluto::PlutoCode, usize)> = vec![
        ("9", pluto_222(1).unwrap(), 1),
        ("11", pluto_222(2).unwrap(), 2),
        ("13", pluto_222(3).unwrap(), 3),
        ("26", pluto_333(1, 0).unwrap(), 1),
        ("29", pluto_333(2, 0).unwrap(), 2),
    ];
    for (name, code, e) in cases {
        let t = Instant::now();
        let pass = tolerates(&code, e);
        let el = t.elapsed();
        ok &= pass && el < secs(30);
        parts.push(format!("n={name} e={e} {} {:.2}s", if pass { "ok" } else { "FAIL" }, el.as_secs_f64()));
    }
    (ok, parts.join("; "))
}

fn ac5() -> (bool, String) {
    let r2 = verify_claims(&pluto_222(2).unwrap(), 2);
    let r3 = verify_claims(&pluto_222(3).unwrap(), 3);
    let h = &r2.merged_check_matrix;
    let cols = h[0].len();
    let col_ok = (0..cols).all(|j| h.iter().any(|row| row[j] != 0));
    let minors = (0..cols)
        .flat_map(|a| ((a + 1)..cols).map(move |b| (a, b)))
        .filter(|&(a, b)| h[0][a] * h[1][b] - h[0][b] * h[1][a] != 0)
        .count();
    let lemma = r3.nonuples.len() == 3 && r3.nonuples.iter().all(|(_, _, mds)| *mds);
    let triples = r3.merged_zero_minors == vec![vec![0, 1, 3], vec![0, 2, 4], vec![0, 5, 6]];
    let first_seven: BTreeSet<u64> = [2, 3, 5, 7, 11, 13, 17].into();
    let primes_ok = r2.minor_primes.iter().all(|p| first_seven.contains(p));
    (
        r2.merged_mds && col_ok && minors == 36 && lemma && triples && primes_ok,
        format!(
            "2x2 minors nonzero {minors}/36, columns nonzero {col_ok}, nonuples MDS {lemma}, zero-minor triples {{1,2,4}},{{1,3,5}},{{1,6,7}} {triples}, minor primes {:?} within first seven {primes_ok}",
            r2.minor_primes
        ),
    )
}

fn ac6() -> (bool, String) {
    let t = Instant::now();
    let expect = Poly::parse(STRASSEN_POLY).unwrap();
    let same = [Characteristic::Generic, Characteristic::Prime(2), Characteristic::Prime(3)]
        .iter()
        .all(|&c| corank_nullity(&decode_matroid_matrix(&strassen(), false).with_characteristic(c)).unwrap() == expect);
    let el = t.elapsed();
    (same && expect.eval(1, 1) == 128 && el < secs(1), format!("three characteristics agree {same}, T(1,1)={}, {:.3}s", expect.eval(1, 1), el.as_secs_f64()))
}

fn ac7() -> (bool, String) {
    let t = Instant::now();
    let gm = decode_matroid_matrix(&laderman(), false);
    let generic = corank_nullity(&gm).unwrap();
    let g_ok = generic == Poly::parse(LADERMAN_POLY).unwrap();
    let t11 = generic.eval(1, 1);
    let d3 = char_correction(&gm, Characteristic::Generic, Characteristic::Prime(3)).unwrap();
    let d2 = char_correction(&gm, Characteristic::Generic, Characteristic::Prime(2)).unwrap();
    let c3 = d3 == Poly::parse(LADERMAN_CHAR3_CORRECTION).unwrap();
    let c2 = d2 == Poly::parse(LADERMAN_CHAR2_CORRECTION).unwrap();
    let div = d3.divisible_by_xy_minus_one() && d2.divisible_by_xy_minus_one();
    let el = t.elapsed();
    (
        g_ok && c3 && c2 && div && t11 == 8_388_608 && el < secs(180),
        format!("generic {g_ok}, char 3 {c3}, char 2 {c2}, divisible {div}, T(1,1)={t11}, {:.1}s", el.as_secs_f64()),
    )
}

fn ac8() -> (bool, String) {
    let t = Instant::now();
    let r = verify_union_theorems();
    let want = [
        [7, 1, 6, 8, -1, 3, 4],
        [1, 3, -2, 4, -3, -1, 2],
        [6, -2, 8, 4, 2, 4, 2],
        [8, 4, 4, 12, -4, 2, 6],
        [-1, -3, 2, -4, 3, 1, -2],
        [3, -1, 4, 2, 1, 2, 1],
        [4, 2, 2, 6, -2, 1, 3],
    ];
    let s7 = factor("7").unwrap();
    let grp = beta_checksum(&tensor(&s7, &s7).unwrap(), &BETA_G, &BETA_H).unwrap();
    let derived = (0..7).all(|s| (0..7).all(|t| grp.parity[s * 7 + t] == want[s][t] && r.beta_matrix[s][t] == want[s][t]));
    let el = t.elapsed();
    (
        derived && r.beta_matrix_symmetric && r.pair_systems == (147, 147) && r.square_systems == (441, 441) && el < secs(10),
        format!(
            "matrix reproduced {derived}, symmetric {}, 2x2 {}/{}, 4x4 {}/{}, {:.2}s",
            r.beta_matrix_symmetric, r.pair_systems.0, r.pair_systems.1, r.square_systems.0, r.square_systems.1, el.as_secs_f64()
        ),
    )
}

fn ac9() -> (bool, String) {
    let t = Instant::now();
    let ts = named_strategy("9x9").unwrap();
    let ctx = PeelContext::new(&ts, PeelConfig::default());
    let core = ts.is_core();
    let n = ts.n();
    let cycle = |s: &[usize]| {
        let rows: BTreeSet<i32> = s.iter().map(|&u| ts.coords[u][0]).collect();
        let cols: BTreeSet<i32> = s.iter().map(|&u| ts.coords[u][1]).collect();
        rows.len() == 2 && cols.len() == 2 && s.iter().any(|&u| core[u])
    };
    let stuck = |s: &[usize]| {
        let mut avail = vec![true; n];
        s.iter().for_each(|&u| avail[u] = false);
        !ctx.complete(&avail)
    };
    let stuck_count = count_subsets(n, 4, |s| stuck(s));
    let cycles = count_subsets(n, 4, |s| cycle(s));
    let stuck_cycles = count_subsets(n, 4, |s| cycle(s) && stuck(s));
    let big = named_strategy("9x9+53").unwrap();
    let bctx = PeelContext::new(&big, PeelConfig::default());
    let oracle = big.oracle();
    let (mut complete, mut unsound) = (0, 0);
    for trial in 0..100_000u64 {
        let order = trial_order(big.n(), 11, trial);
        let k = big.n() - 2 - (trial as usize % 12);
        let mut avail = vec![false; big.n()];
        order[..k].iter().for_each(|&u| avail[u] = true);
        if bctx.complete(&avail) {
            complete += 1;
            if !oracle.decodable(&avail) {
                unsound += 1;
            }
        }
    }
    let el = t.elapsed();
    (
        stuck_count == cycles && stuck_cycles == cycles && unsound == 0 && el < secs(600),
        format!(
            "9x9: {stuck_count} incomplete of {} 4-sets, {cycles} core-meeting 4-cycles; 9x9+53: {unsound} unsound of {complete} peel-complete; {:.1}s",
            pluto::decode::binomial(n, 4),
            el.as_secs_f64()
        ),
    )
}

fn ac10() -> (bool, String) {
    let t = Instant::now();
    let ts = named_strategy("26x29").unwrap();
    let d = monte_carlo(&ts, 5000, 0, Decoder::Oracle);
    let (p729, p737) = (d.cdf[729], d.cdf[737]);
    let el = t.elapsed();
    (
        ts.n() == 754 && (0.990..=1.0).contains(&p729) && p737 == 1.0 && el < secs(1200),
        format!("{} tasks, P(<=729)={p729:.4}, P(<=737)={p737:.4}, {:.1}s", ts.n(), el.as_secs_f64()),
    )
}

fn ac11() -> (bool, String) {
    let t = Instant::now();
    let code = charon_code().unwrap();
    let c = correctable_counts(&code.oracle(), 4);
    let frac = |e: usize| c[e].1 as f64 / c[e].2 as f64;
    let el = t.elapsed();
    let ok = code.n() == 63
        && c[2] == (2, 1953, 1953)
        && c[3].2 == 39_711
        && (frac(3) - 0.997).abs() <= 0.002
        && c[4].2 == 595_665
        && (frac(4) - 0.984).abs() <= 0.003
        && el < secs(1800);
    (ok, format!("n={}, 2: {}/{}, 3: {:.4}, 4: {:.4}, {:.1}s", code.n(), c[2].1, c[2].2, frac(3), frac(4), el.as_secs_f64()))
}

fn same_cycle(c: &[usize], want: &[usize]) -> bool {
    c.len() == want.len() && (0..c.len()).any(|k| (0..c.len()).all(|i| c[(i + k) % c.len()] == want[i]))
}

fn ac12() -> (bool, String) {
    let l = laderman();
    let rot = verify_action(&l, &GroupAction::laderman_rotation()).expect("rotation");
    let printed: [&[usize]; 6] = [&[6, 14], &[1, 3, 10, 11], &[4, 16, 7, 12], &[5, 17, 9, 13], &[15, 2, 18, 8], &[20, 21, 23, 22]];
    let cyc = rot.cycles();
    let rot_ok = cyc.len() == printed.len() && printed.iter().all(|w| cyc.iter().any(|c| same_cycle(c, w))) && rot.order() == 4;
    let refl = verify_action(&l, &GroupAction::laderman_reflection()).expect("reflection");
    let mut rc = refl.cycles();
    rc.sort();
    let refl_ok = rc == vec![vec![1, 3], vec![2, 5], vec![8, 9], vec![10, 11], vec![12, 16], vec![13, 18], vec![15, 17], vec![21, 22]];
    let s = strassen();
    let conj = verify_action(&s, &GroupAction::strassen_conjugation()).expect("conjugation");
    let g0 = vector_checksum(&s, &[1, 2], &[-1, 1]).unwrap();
    let orbit = symmetry_orbit(&s, &GroupAction::strassen_conjugation(), &g0).unwrap();
    let fixtures: [&[i64]; 3] = [&[1, -4, 3, -3, 2, 2, -1], &[1, 1, 4, 2, 3, -2, 3], &[1, -3, -1, -2, -2, -3, 4]];
    let perm_ok = orbit.len() == 3
        && orbit.iter().zip(fixtures).all(|(g, f)| {
            let mut a: Vec<i64> = g.parity().iter().map(|x| x.abs()).collect();
            let mut b: Vec<i64> = fixtures[0].iter().map(|x| x.abs()).collect();
            a.sort();
            b.sort();
            g.parity() == f && a == b
        });
    (
        rot_ok && refl_ok && conj.order() == 3 && perm_ok,
        format!("rotation {} order {}, reflection {}, Strassen action order {}, parity orbit {perm_ok}", rot.cycle_string(), rot.order(), refl.cycle_string(), conj.order()),
    )
}

fn ac13() -> (bool, String) {
    let l = laderman();
    let c = |s: &str| -> Vec<i64> {
        let mut w = vec![0i64; 9];
        let s = s.replace(' ', "");
        let mut sign = 1;
        let mut i = 0;
        let b = s.as_bytes();
        while i < b.len() {
            match b[i] {
                b'+' => sign = 1,
                b'-' => sign = -1,
                b'C' => {
                    let (r, k) = ((b[i + 1] - b'1') as usize, (b[i + 2] - b'1') as usize);
                    w[r * 3 + k] += sign;
                    i += 2;
                }
                _ => unreachable!(),
            }
            i += 1;
        }
        w
    };
    let ids = [
        ("C12 - C11", "L4 + L5 + L1 + L15 + L12 - L19"),
        ("C21 - C11", "L16 + L17 + L3 + L2 + L4 - L19"),
        ("C13 - C11", "L7 + L9 + L10 + L18 + L16 - L19"),
        ("C31 - C11", "L12 + L13 + L11 + L8 + L7 - L19"),
        ("C32 - C12 + C22", "L2 + L20 - L1 + L22 + L13"),
        ("C22 - C21 + C23", "L18 + L21 - L3 + L20 + L5"),
        ("C23 - C13 + C33", "L8 + L23 - L10 + L21 + L17"),
        ("C33 - C31 + C32", "L15 + L22 - L11 + L23 + L9"),
        ("C11", "L6 + L14 + L19"),
        ("C22", "L6 + L4 + L5 + L2 + L20"),
        ("C12 - C22", "L14 + L1 + L15 - L2 - L20 + L12"),
    ];
    let held = ids.iter().filter(|(lhs, rhs)| decode_combination(&l, &c(lhs)) == parse_tasks(rhs, 'L', 23)).count();
    (held == 11, format!("{held}/11 identities hold"))
}

fn ac14() -> (bool, String) {
    // (workers, exponent, pluto, epc, pdc, epc2) in table order.
    let want: [(usize, usize, f64, usize, usize, usize, usize); 21] = [
        (8, 9, 3.170, 8, 9, 12, 13),
        (8, 11, 3.459, 9, 9, 12, 13),
        (8, 13, 3.700, 10, 9, 12, 13),
        (8, 15, 3.907, 11, 9, 12, 13),
        (8, 17, 4.087, 12, 9, 12, 13),
        (12, 13, 3.126, 12, 13, 18, 21),
        (12, 14, 3.126, 13, 14, 20, 21),
        (18, 17, 2.980, 16, 19, 27, 29),
        (18, 18, 2.980, 17, 20, 30, 29),
        (27, 26, 2.966, 25, 29, 45, 45),
        (27, 29, 3.065, 27, 29, 45, 45),
        (27, 32, 3.155, 29, 29, 45, 45),
        (27, 35, 3.236, 31, 29, 45, 45),
        (36, 32, 2.910, 31, 38, 60, 57),
        (36, 33, 2.910, 32, 39, 63, 57),
        (48, 41, 2.890, 40, 50, 80, 75),
        (48, 42, 2.890, 41, 51, 84, 75),
        (64, 53, 2.864, 52, 67, 112, 97),
        (64, 57, 2.916, 55, 67, 112, 97),
        (64, 61, 2.965, 58, 67, 112, 97),
        (64, 63, 2.989, 61, 67, 112, 97),
    ];
    let rows = thresholds_table(&table_one_inputs());
    let mut mismatches = Vec::new();
    if rows.len() != want.len() {
        mismatches.push(format!("{} rows", rows.len()));
    }
    for (i, (r, w)) in rows.iter().zip(want.iter()).enumerate() {
        let exp_ok = r.exponent.is_some_and(|e| (e - w.2).abs() < 5e-4);
        if (r.naive, r.n, r.pluto, r.epc, r.pdc, r.epc2) != (w.0, w.1, Some(w.3), w.4, w.5, w.6) || !exp_ok {
            mismatches.push(format!("row {}", i + 1));
        }
    }
    (mismatches.is_empty(), format!("{} rows, mismatches {:?}", rows.len(), mismatches))
}

fn ac15() -> (bool, String) {
    let ts = named_strategy("9x9+53").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let (a, b) = (random_grid(4, 4, 32, &mut rng), random_grid(4, 4, 32, &mut rng));
    let cfg = WorkerPoolConfig {
        seed: 15,
        stragglers: StragglerSpec::Random(4),
        behavior: StragglerBehavior::NeverRespond,
        threads: 4,
        peel: PeelConfig::default(),
    };
    let out = run_job(&ts, &a, &b, &cfg).unwrap();
    let tr = &out.transcript;
    let judge = Judge::new(&ts, Decoder::Peel(cfg.peel));
    let sim = judge.recovery_count(&tr.plan.sim_order()).filter(|&k| k <= ts.n() - 4);
    let err = tr.residual.unwrap_or(f64::INFINITY);
    (
        tr.completed && err <= 1e-9 && sim == tr.recovery_count,
        format!("completed {}, relative error {err:.2e}, recovery count {:?} vs simulator {:?}", tr.completed, tr.recovery_count, sim),
    )
}

fn ac16() -> (bool, String) {
    let ts = lift(&pluto_222(1).unwrap());
    let exact = exact_distribution(&ts, Decoder::Oracle, pluto::sim::DEFAULT_BUDGET).unwrap();
    let mc = monte_carlo(&ts, 10_000, 16, Decoder::Oracle);
    let dev = exact.cdf.iter().zip(&mc.cdf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    (dev <= 0.02, format!("max |cdf difference| {dev:.4}"))
}

#[test]
fn acceptance() {
    let checks: [(&str, Check); 16] = [
        ("evaluate matches schoolbook over F_p", ac1),
        ("Brent verification and mutations", ac2),
        ("checksum fixtures", ac3),
        ("worst-case guarantees", ac4),
        ("MDS structure", ac5),
        ("Strassen corank-nullity polynomial", ac6),
        ("Laderman corank-nullity polynomial", ac7),
        ("union theorems", ac8),
        ("peeling soundness and stopping sets", ac9),
        ("26x29 recovery counts", ac10),
        ("Charon erasure fractions", ac11),
        ("symmetries", ac12),
        ("low-weight Laderman identities", ac13),
        ("thresholds table", ac14),
        ("exec demo", ac15),
        ("exact vs Monte Carlo", ac16),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in checks.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = f();
        // Written to the handle directly so the lines survive output capture.
        let line = format!("{}AC{:02} {} {name}: {detail} [{:.1}s]\n", if i == 0 { "\n" } else { "" }, i + 1, if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
        let _ = std::io::stdout().lock().write_all(line.as_bytes());
        if !ok {
            failed.push(i + 1);
        }
    }
    assert_eq!(failed, KNOWN_FAILURES, "failing criteria differ from the known list");
}

#[test]
fn schoolbook_is_a_valid_algorithm() {
    let sb = schoolbook(pluto::bilinear::Dims::new(2, 3, 2));
    assert!(verify_brent(&sb).is_ok());
}
