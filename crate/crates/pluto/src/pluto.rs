//! Checksum (backup) tasks attached to bilinear algorithms via gCh = (gA)(Bh).

use crate::bilinear::{decode_combination, matmul, verify_brent, BilinearAlgorithm, Dims, GroupAction};
use crate::decode::SpanOracle;
use crate::error::{invalid, Error, Result};
use crate::fieldlin::{
    integer_minors, invm, is_prime, k_subsets, modp, mulm, powm, prime_factors, rank_rational, zero_minors,
    DenseMatrix, ScalarKind, DEFAULT_PRIME,
};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Vector,
    Epc,
    Charon,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaskDef {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
}

/// `base · S_base = backups · S_backups`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityRelation {
    pub base: Vec<i64>,
    pub backups: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChecksumGroup {
    pub kind: GroupKind,
    pub g: Vec<i64>,
    pub h: Vec<i64>,
    pub big_g: Option<Vec<Vec<i64>>>,
    pub big_h: Option<Vec<Vec<i64>>>,
    pub zeta: Option<i64>,
    pub backups: Vec<TaskDef>,
    pub relations: Vec<ParityRelation>,
    /// Prime over which the identities hold; `None` means over the integers.
    pub modulus: Option<u64>,
}

impl ChecksumGroup {
    /// Parity of the first relation (the only one for vector and EPC groups).
    pub fn parity(&self) -> &[i64] {
        &self.relations[0].base
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlutoCode {
    pub base: BilinearAlgorithm,
    pub groups: Vec<ChecksumGroup>,
}

impl PlutoCode {
    pub fn plain(base: BilinearAlgorithm) -> Self {
        PlutoCode { base, groups: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.base.r() + self.groups.iter().map(|g| g.backups.len()).sum::<usize>()
    }

    pub fn modulus(&self) -> Option<u64> {
        self.groups.iter().find_map(|g| g.modulus)
    }

    /// All task definitions: base tasks first, then backups in group order.
    pub fn tasks(&self) -> Vec<TaskDef> {
        let mut out: Vec<TaskDef> =
            (0..self.base.r()).map(|s| TaskDef { a: self.base.a_enc[s].clone(), b: self.base.b_enc[s].clone() }).collect();
        for g in &self.groups {
            out.extend(g.backups.iter().cloned());
        }
        out
    }

    /// Relations as length-N rows `r` with `r · S = 0`.
    pub fn relation_rows(&self) -> Vec<Vec<i64>> {
        let n = self.n();
        let mut rows = Vec::new();
        let mut off = self.base.r();
        for g in &self.groups {
            for rel in &g.relations {
                let mut row = vec![0i64; n];
                row[..self.base.r()].copy_from_slice(&rel.base);
                for (j, &c) in rel.backups.iter().enumerate() {
                    row[off + j] = -c;
                }
                rows.push(row);
            }
            off += g.backups.len();
        }
        rows
    }

    /// Task-id offset of each group's first backup.
    pub fn group_offsets(&self) -> Vec<usize> {
        let mut off = self.base.r();
        self.groups
            .iter()
            .map(|g| {
                let o = off;
                off += g.backups.len();
                o
            })
            .collect()
    }

    /// Target weights over all tasks: the base decode rows padded with zeros.
    pub fn target_rows(&self) -> Vec<Vec<i64>> {
        let n = self.n();
        self.base
            .dec
            .iter()
            .map(|row| {
                let mut w = vec![0i64; n];
                w[..row.len()].copy_from_slice(row);
                w
            })
            .collect()
    }

    /// Oracle over the span of the group relations only (sound, possibly conservative).
    pub fn relation_oracle(&self) -> SpanOracle {
        SpanOracle::from_relations(&self.relation_rows(), &self.target_rows(), self.modulus().unwrap_or(DEFAULT_PRIME))
    }

    pub fn oracle(&self) -> SpanOracle {
        let tasks = self.tasks();
        let a: Vec<Vec<i64>> = tasks.iter().map(|t| t.a.clone()).collect();
        let b: Vec<Vec<i64>> = tasks.iter().map(|t| t.b.clone()).collect();
        let n = self.n();
        let targets: Vec<Vec<i64>> = self
            .base
            .dec
            .iter()
            .map(|row| {
                let mut w = vec![0i64; n];
                w[..row.len()].copy_from_slice(row);
                w
            })
            .collect();
        SpanOracle::new(self.base.dims, &a, &b, &targets, self.modulus().unwrap_or(DEFAULT_PRIME))
    }
}

fn tensor_of(a: &[i64], b: &[i64], p: Option<u64>) -> Vec<i64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(match p {
                Some(p) => mulm(modp(x, p), modp(y, p), p) as i64,
                None => x * y,
            });
        }
    }
    out
}

/// Checks every relation of the group as a tensor identity.
pub fn verify_group(base: &BilinearAlgorithm, g: &ChecksumGroup) -> bool {
    let dim = base.dims.a_len() * base.dims.b_len();
    let norm = |x: i64| g.modulus.map_or(x, |p| modp(x, p) as i64);
    g.relations.iter().all(|rel| {
        let mut acc = vec![0i64; dim];
        for s in 0..base.r() {
            if rel.base[s] != 0 {
                for (x, t) in acc.iter_mut().zip(tensor_of(&base.a_enc[s], &base.b_enc[s], g.modulus)) {
                    *x = norm(*x + norm(rel.base[s] * t));
                }
            }
        }
        for (j, bk) in g.backups.iter().enumerate() {
            if rel.backups[j] != 0 {
                for (x, t) in acc.iter_mut().zip(tensor_of(&bk.a, &bk.b, g.modulus)) {
                    *x = norm(*x - norm(rel.backups[j] * t));
                }
            }
        }
        acc.iter().all(|&x| x == 0)
    })
}

/// Backups (Σ_i g_i A_ij) ⋆ (Σ_k B_jk h_k) for j = 1..m with the matching parity.
pub fn vector_checksum(alg: &BilinearAlgorithm, g: &[i64], h: &[i64]) -> Result<ChecksumGroup> {
    let d = alg.dims;
    if g.len() != d.l || h.len() != d.n {
        return invalid(format!("g needs length {} and h length {}", d.l, d.n));
    }
    if g.iter().all(|&x| x == 0) || h.iter().all(|&x| x == 0) {
        return invalid("g and h must be nonzero");
    }
    let backups = (0..d.m)
        .map(|j| {
            let mut a = vec![0i64; d.a_len()];
            for i in 0..d.l {
                a[i * d.m + j] = g[i];
            }
            let mut b = vec![0i64; d.b_len()];
            for k in 0..d.n {
                b[j * d.n + k] = h[k];
            }
            TaskDef { a, b }
        })
        .collect();
    let parity = decode_combination(alg, &outer(g, h));
    Ok(ChecksumGroup {
        kind: GroupKind::Vector,
        g: g.to_vec(),
        h: h.to_vec(),
        big_g: None,
        big_h: None,
        zeta: None,
        backups,
        relations: vec![ParityRelation { base: parity, backups: vec![1; d.m] }],
        modulus: None,
    })
}

fn outer(g: &[i64], h: &[i64]) -> Vec<i64> {
    g.iter().flat_map(|&x| h.iter().map(move |&y| x * y)).collect()
}

pub const STRASSEN_VECTORS: [([i64; 2], [i64; 2]); 3] = [([1, 2], [-1, 1]), ([3, -1], [1, 2]), ([2, -3], [2, 1])];
pub const LADERMAN_VECTORS: [([i64; 3], [i64; 3]); 2] = [([1, 2, 3], [2, -1, 3]), ([2, -1, 3], [1, 3, 2])];

/// Strassen with 0 to 3 fixed checksum groups (N = 7 + 2·checks).
pub fn pluto_222(checks: usize) -> Result<PlutoCode> {
    if checks > 3 {
        return invalid("pluto_222 supports at most three checksum groups");
    }
    let base = crate::bilinear::strassen();
    let groups = STRASSEN_VECTORS[..checks]
        .iter()
        .map(|(g, h)| vector_checksum(&base, g, h))
        .collect::<Result<Vec<_>>>()?;
    Ok(PlutoCode { base, groups })
}

/// Bound of the small-integer candidate search.
pub const SEARCH_BOUND: i64 = 3;

/// Nonzero integer vectors with entries in [-bound, bound], lexicographic order.
pub fn small_vectors(len: usize, bound: i64) -> impl Iterator<Item = Vec<i64>> {
    let total = ((2 * bound + 1) as u64).pow(len as u32);
    (0..total).filter_map(move |x| small_vector_at(x, len, bound))
}

/// The `x`-th vector of the lexicographic scan, or None for the zero vector.
pub fn small_vector_at(mut x: u64, len: usize, bound: i64) -> Option<Vec<i64>> {
    let width = (2 * bound + 1) as u64;
    let mut v = vec![0i64; len];
    for i in (0..len).rev() {
        v[i] = (x % width) as i64 - bound;
        x /= width;
    }
    v.iter().any(|&e| e != 0).then_some(v)
}

/// Whether every erasure pattern of `e` tasks leaves C decodable.
pub fn tolerates(code: &PlutoCode, e: usize) -> bool {
    tolerates_cached(&code.oracle(), e, &mut Vec::new())
}

/// Like [`tolerates`], trying previously failing patterns first and recording new ones.
pub fn tolerates_cached(oracle: &crate::decode::SpanOracle, e: usize, witnesses: &mut Vec<Vec<usize>>) -> bool {
    if let Some(pos) = witnesses.iter().position(|s| !oracle.decodable_missing(s)) {
        let w = witnesses.remove(pos);
        witnesses.insert(0, w);
        return false;
    }
    let ids: Vec<usize> = (0..oracle.n()).collect();
    for k in 1..=e {
        if let Some(s) = k_subsets(&ids, k).into_iter().find(|s| !oracle.decodable_missing(s)) {
            witnesses.insert(0, s);
            return false;
        }
    }
    true
}

/// Laderman with up to two fixed groups plus `extra` searched groups.
pub fn pluto_333(checks: usize, extra: usize) -> Result<PlutoCode> {
    if checks > 2 {
        return invalid("pluto_333 has two fixed groups; use `extra` for more");
    }
    if extra > 0 && checks < 2 {
        return invalid("extra groups are searched after both fixed groups");
    }
    let base = crate::bilinear::laderman();
    let mut code = PlutoCode::plain(base.clone());
    for (g, h) in &LADERMAN_VECTORS[..checks] {
        code.groups.push(vector_checksum(&base, g, h)?);
    }
    for _ in 0..extra {
        let target = code.groups.len() + 1;
        let mut witnesses = Vec::new();
        let found = small_vectors(3, SEARCH_BOUND)
            .flat_map(|g| small_vectors(3, SEARCH_BOUND).map(move |h| (g.clone(), h)))
            .find_map(|(g, h)| {
                let grp = vector_checksum(&base, &g, &h).ok()?;
                let mut trial = code.clone();
                trial.groups.push(grp);
                tolerates_cached(&trial.oracle(), target, &mut witnesses).then_some(trial)
            });
        code = found.ok_or_else(|| {
            Error::SearchFailed(format!("no checksum group with entries in [-{SEARCH_BOUND},{SEARCH_BOUND}] tolerates {target} erasures"))
        })?;
    }
    Ok(code)
}

/// Smallest prime above 19,683 with m | p − 1.
pub fn epc_default_prime(m: usize) -> u64 {
    (19_684u64..).find(|&p| is_prime(p) && (p - 1) % m as u64 == 0).unwrap()
}

/// A primitive m-th root of unity in F_p.
pub fn primitive_root_of_unity(m: usize, p: u64) -> Option<u64> {
    let m = m as u64;
    if (p - 1) % m != 0 {
        return None;
    }
    if m == 1 {
        return Some(1);
    }
    let qs = prime_factors(&BigInt::from(m));
    (2..p).map(|x| powm(x, (p - 1) / m, p)).find(|&mu| qs.iter().all(|&q| powm(mu, m / q, p) != 1))
}

/// EPC-flavour group over F_p: m backups (g A u_t) ⋆ (v_tᵀ B h) with g_i = ζ^{im},
/// h_k = ζ^{kℓm} and the diagonal split m·I = Σ_t u_t v_tᵀ, u_t[j] = (ζμ^t)^j.
pub fn epc_checksum(alg: &BilinearAlgorithm, zeta: i64, p: Option<u64>) -> Result<ChecksumGroup> {
    let d = alg.dims;
    let p = p.unwrap_or_else(|| epc_default_prime(d.m));
    if !is_prime(p) {
        return Err(Error::UnsupportedField(format!("{p} is not prime")));
    }
    let z = modp(zeta, p);
    if z == 0 {
        return invalid("zeta must be nonzero in the field");
    }
    let mu = primitive_root_of_unity(d.m, p)
        .ok_or_else(|| Error::UnsupportedField(format!("F_{p} has no primitive {}-th root of unity", d.m)))?;
    let g: Vec<u64> = (1..=d.l).map(|i| powm(z, (i * d.m) as u64, p)).collect();
    let h: Vec<u64> = (1..=d.n).map(|k| powm(z, (k * d.l * d.m) as u64, p)).collect();
    let mut backups = Vec::new();
    for t in 1..=d.m {
        let x = mulm(z, powm(mu, t as u64, p), p);
        let xinv = invm(x, p);
        let mut a = vec![0i64; d.a_len()];
        let mut b = vec![0i64; d.b_len()];
        for j in 0..d.m {
            let u = powm(x, (j + 1) as u64, p);
            let v = powm(xinv, (j + 1) as u64, p);
            for i in 0..d.l {
                a[i * d.m + j] = mulm(g[i], u, p) as i64;
            }
            for k in 0..d.n {
                b[j * d.n + k] = mulm(v, h[k], p) as i64;
            }
        }
        backups.push(TaskDef { a, b });
    }
    let w: Vec<i64> = g
        .iter()
        .flat_map(|&x| h.iter().map(move |&y| mulm(mulm(x, y, p), d.m as u64 % p, p) as i64))
        .collect();
    let parity: Vec<i64> = decode_combination(alg, &w).into_iter().map(|x| modp(x, p) as i64).collect();
    let grp = ChecksumGroup {
        kind: GroupKind::Epc,
        g: g.iter().map(|&x| x as i64).collect(),
        h: h.iter().map(|&x| x as i64).collect(),
        big_g: None,
        big_h: None,
        zeta: Some(zeta),
        backups,
        relations: vec![ParityRelation { base: parity, backups: vec![1; d.m] }],
        modulus: Some(p),
    };
    debug_assert!(verify_group(alg, &grp));
    Ok(grp)
}

/// Charon group on a ⟨4,4,4⟩ base: the inner ⟨2,4,2⟩ algorithm applied to (GA, BH).
pub fn charon_44(
    base: &BilinearAlgorithm,
    big_g: &[Vec<i64>],
    big_h: &[Vec<i64>],
    inner: &BilinearAlgorithm,
) -> Result<ChecksumGroup> {
    if base.dims != Dims::new(4, 4, 4) {
        return invalid("charon needs a <4,4,4> base");
    }
    if inner.dims != Dims::new(2, 4, 2) || verify_brent(inner).is_err() {
        return invalid("inner algorithm must be a verified <2,4,2> algorithm");
    }
    if big_g.len() != 2 || big_g.iter().any(|r| r.len() != 4) || big_h.len() != 4 || big_h.iter().any(|r| r.len() != 2) {
        return invalid("G must be 2x4 and H 4x2");
    }
    if rank_rational(big_g) < 2 || rank_rational(big_h) < 2 {
        return invalid("G and H must have full rank");
    }
    let backups = (0..inner.r())
        .map(|s| {
            let mut a = vec![0i64; 16];
            let mut b = vec![0i64; 16];
            for i in 0..4 {
                for j in 0..4 {
                    a[i * 4 + j] = (0..2).map(|p| inner.a_enc[s][p * 4 + j] * big_g[p][i]).sum();
                }
            }
            for j in 0..4 {
                for k in 0..4 {
                    b[j * 4 + k] = (0..2).map(|q| inner.b_enc[s][j * 2 + q] * big_h[k][q]).sum();
                }
            }
            TaskDef { a, b }
        })
        .collect();
    let mut relations = Vec::new();
    for p in 0..2 {
        for q in 0..2 {
            let w: Vec<i64> = (0..16).map(|x| big_g[p][x / 4] * big_h[x % 4][q]).collect();
            relations.push(ParityRelation { base: decode_combination(base, &w), backups: inner.dec[p * 2 + q].clone() });
        }
    }
    let grp = ChecksumGroup {
        kind: GroupKind::Charon,
        g: Vec::new(),
        h: Vec::new(),
        big_g: Some(big_g.to_vec()),
        big_h: Some(big_h.to_vec()),
        zeta: None,
        backups,
        relations,
        modulus: None,
    };
    debug_assert!(verify_group(base, &grp));
    Ok(grp)
}

pub fn charon_inner() -> BilinearAlgorithm {
    crate::bilinear::tensor_alg(&crate::bilinear::schoolbook(Dims::new(1, 2, 1)), &crate::bilinear::strassen())
}

/// Squared Strassen with a Charon group. G and H are the first pair from a seeded scan of
/// integer matrices with entries in [-CHARON_BOUND, CHARON_BOUND] for which every 2-erasure
/// is correctable.
pub fn charon_code() -> Result<PlutoCode> {
    static CACHE: std::sync::OnceLock<PlutoCode> = std::sync::OnceLock::new();
    if let Some(c) = CACHE.get() {
        return Ok(c.clone());
    }
    let code = charon_search()?;
    Ok(CACHE.get_or_init(|| code).clone())
}

/// Candidates drawn by the seeded scan before giving up.
pub const CHARON_SCAN_LIMIT: usize = 10_000;

/// Entry bound for Charon's G and H. Entries in [-3, 3] leave many 3- and 4-erasure
/// patterns uncorrectable; at this size the code behaves like a generic one.
pub const CHARON_BOUND: i64 = 100;

fn charon_search() -> Result<PlutoCode> {
    use rand::{Rng, SeedableRng};
    let ss = crate::bilinear::tensor_alg(&crate::bilinear::strassen(), &crate::bilinear::strassen());
    let inner = charon_inner();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let mut draw = |r: usize, c: usize| -> Vec<Vec<i64>> {
        (0..r).map(|_| (0..c).map(|_| rng.gen_range(-CHARON_BOUND..=CHARON_BOUND)).collect()).collect()
    };
    let mut witnesses = Vec::new();
    for _ in 0..CHARON_SCAN_LIMIT {
        let (g, h) = (draw(2, 4), draw(4, 2));
        let Ok(grp) = charon_44(&ss, &g, &h, &inner) else { continue };
        let code = PlutoCode { base: ss.clone(), groups: vec![grp] };
        // The relation span screen is sound; the full oracle confirms.
        if tolerates_cached(&code.relation_oracle(), 2, &mut witnesses) && tolerates(&code, 2) {
            return Ok(code);
        }
    }
    Err(Error::SearchFailed(format!("no Charon G,H with entries in [-{CHARON_BOUND},{CHARON_BOUND}] after {CHARON_SCAN_LIMIT} draws")))
}

/// Verification report for a Pluto code.
#[derive(Clone, Debug, Serialize)]
pub struct ClaimsReport {
    pub n: usize,
    /// (erasures, correctable count, total count).
    pub correctable: Vec<(usize, u64, u64)>,
    pub merged_check_matrix: Vec<Vec<i64>>,
    pub merged_mds: bool,
    pub merged_zero_minors: Vec<Vec<usize>>,
    pub nullity_one_triples: Vec<Vec<usize>>,
    /// For each triple: the deleted column and whether the remaining check matrix is MDS.
    pub nonuples: Vec<(Vec<usize>, usize, bool)>,
    pub minor_primes: Vec<u64>,
}

/// Check matrix of the merged-symbol code: base columns then one column per relation (−I).
pub fn merged_check_matrix(code: &PlutoCode) -> Vec<Vec<i64>> {
    let rels: Vec<&ParityRelation> = code.groups.iter().flat_map(|g| g.relations.iter()).collect();
    let k = rels.len();
    rels.iter()
        .enumerate()
        .map(|(i, rel)| {
            let mut row = rel.base.clone();
            row.extend((0..k).map(|j| if i == j { -1 } else { 0 }));
            row
        })
        .collect()
}

fn is_mds(h: &[Vec<i64>]) -> (bool, Vec<Vec<usize>>) {
    if h.is_empty() {
        return (true, Vec::new());
    }
    let m = DenseMatrix::from_rows(h, ScalarKind::Rational).unwrap();
    let z = zero_minors(&m, h.len(), None).unwrap();
    (z.is_empty(), z)
}

/// Column triples of the decode matrix with rank 2.
pub fn nullity_one_triples(alg: &BilinearAlgorithm) -> Vec<Vec<usize>> {
    let cols: Vec<usize> = (0..alg.r()).collect();
    k_subsets(&cols, 3)
        .into_iter()
        .filter(|t| {
            let sub: Vec<Vec<i64>> = alg.dec.iter().map(|row| t.iter().map(|&j| row[j]).collect()).collect();
            rank_rational(&sub) == 2
        })
        .collect()
}

pub fn verify_claims(code: &PlutoCode, max_erasures: usize) -> ClaimsReport {
    let n = code.n();
    let oracle = code.oracle();
    let mut correctable = crate::decode::correctable_counts(&oracle, max_erasures);
    if let Some(z) = correctable.iter().position(|c| c.1 == 0) {
        correctable.truncate(z + 1);
    }
    let h = merged_check_matrix(code);
    let (merged_mds, merged_zero_minors) = is_mds(&h);
    let triples = nullity_one_triples(&code.base);
    let mut nonuples = Vec::new();
    if !h.is_empty() {
        for t in &triples {
            // Delete a triple column expressible by the other two.
            let del = t
                .iter()
                .copied()
                .find(|&c| {
                    let others: Vec<usize> = t.iter().copied().filter(|&x| x != c).collect();
                    let sub: Vec<Vec<i64>> = code.base.dec.iter().map(|row| others.iter().map(|&j| row[j]).collect()).collect();
                    rank_rational(&sub) == 2
                })
                .unwrap();
            let keep: Vec<usize> = (0..h[0].len()).filter(|&j| j != del).collect();
            let sub: Vec<Vec<i64>> = h.iter().map(|row| keep.iter().map(|&j| row[j]).collect()).collect();
            nonuples.push((t.clone(), del, is_mds(&sub).0));
        }
    }
    let mut primes = BTreeSet::new();
    for k in 1..=h.len() {
        for (_, _, d) in integer_minors(&h, k) {
            if !d.is_zero() {
                primes.extend(prime_factors(&d));
            }
        }
    }
    ClaimsReport {
        n,
        correctable,
        merged_check_matrix: h,
        merged_mds,
        merged_zero_minors,
        nullity_one_triples: triples,
        nonuples,
        minor_primes: primes.into_iter().collect(),
    }
}

fn vec_mat(v: &[i64], m: &[Vec<i64>]) -> Vec<i64> {
    matmul(&[v.to_vec()], m).remove(0)
}

fn mat_vec(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Transports a vector group along the action until the C-weights return to the start.
pub fn symmetry_orbit(base: &BilinearAlgorithm, action: &GroupAction, group: &ChecksumGroup) -> Result<Vec<ChecksumGroup>> {
    const SAFETY: usize = 12;
    if group.kind != GroupKind::Vector {
        return invalid("orbits are defined for vector groups");
    }
    let start = outer(&group.g, &group.h);
    let mut out = vec![group.clone()];
    let (mut g, mut h) = (group.g.clone(), group.h.clone());
    loop {
        let (g2, h2) = if action.transpose {
            (mat_vec(&action.c.1, &h), vec_mat(&g, &action.c.0))
        } else {
            (vec_mat(&g, &action.c.0), mat_vec(&action.c.1, &h))
        };
        g = g2;
        h = h2;
        if outer(&g, &h) == start {
            return Ok(out);
        }
        let grp = vector_checksum(base, &g, &h)?;
        if !verify_group(base, &grp) {
            return invalid("derived group failed its identity");
        }
        out.push(grp);
        if out.len() > SAFETY {
            return Err(Error::BudgetExceeded(format!("orbit longer than {SAFETY}")));
        }
    }
}

/// Serialized group inside a Pluto code document.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GroupDoc {
    pub kind: GroupKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub g: Vec<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h: Vec<i64>,
    #[serde(default, rename = "G", skip_serializing_if = "Option::is_none")]
    pub big_g: Option<Vec<Vec<i64>>>,
    #[serde(default, rename = "H", skip_serializing_if = "Option::is_none")]
    pub big_h: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<crate::bilinear::AlgorithmDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PlutoDoc {
    #[serde(flatten)]
    pub algorithm: crate::bilinear::AlgorithmDoc,
    pub groups: Vec<GroupDoc>,
}

pub fn export_pluto(code: &PlutoCode) -> PlutoDoc {
    let inner = charon_inner();
    PlutoDoc {
        algorithm: crate::bilinear::export_algorithm(&code.base),
        groups: code
            .groups
            .iter()
            .map(|g| GroupDoc {
                kind: g.kind,
                g: if g.kind == GroupKind::Vector { g.g.clone() } else { Vec::new() },
                h: if g.kind == GroupKind::Vector { g.h.clone() } else { Vec::new() },
                big_g: g.big_g.clone(),
                big_h: g.big_h.clone(),
                inner: (g.kind == GroupKind::Charon).then(|| crate::bilinear::export_algorithm(&inner)),
                zeta: g.zeta,
                modulus: g.modulus,
            })
            .collect(),
    }
}

pub fn import_pluto(doc: &PlutoDoc) -> Result<PlutoCode> {
    let base = crate::bilinear::import_algorithm(&doc.algorithm)?;
    let mut groups = Vec::new();
    for gd in &doc.groups {
        groups.push(match gd.kind {
            GroupKind::Vector => vector_checksum(&base, &gd.g, &gd.h)?,
            GroupKind::Epc => epc_checksum(&base, gd.zeta.ok_or_else(|| Error::Malformed("epc group needs zeta".into()))?, gd.modulus)?,
            GroupKind::Charon => {
                let inner = match &gd.inner {
                    Some(d) => crate::bilinear::import_algorithm(d)?,
                    None => charon_inner(),
                };
                let g = gd.big_g.as_ref().ok_or_else(|| Error::Malformed("charon group needs G".into()))?;
                let h = gd.big_h.as_ref().ok_or_else(|| Error::Malformed("charon group needs H".into()))?;
                charon_44(&base, g, h, &inner)?
            }
        });
    }
    Ok(PlutoCode { base, groups })
}
