//! Exact scalar and dense-matrix linear algebra over the rationals and prime fields.
//!
//! The prime-field helpers operate on plain `u64` residues and are the workhorse for
//! enumeration; [`DenseMatrix`] is the tagged, kind-checked interface.

use crate::error::{invalid, Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Default modulus for mass rank computations.
pub const DEFAULT_PRIME: u64 = 1_000_003;

#[inline]
pub fn modp(x: i64, p: u64) -> u64 {
    let r = x.rem_euclid(p as i64);
    r as u64
}

#[inline]
pub fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn addm(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn subm(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

pub fn powm(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, a, p);
        }
        a = mulm(a, a, p);
        e >>= 1;
    }
    r
}

/// Inverse of a nonzero residue (p prime).
pub fn invm(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    powm(a, p - 2, p)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Signed representative in (-p/2, p/2].
pub fn centered(a: u64, p: u64) -> i64 {
    if a > p / 2 {
        a as i64 - p as i64
    } else {
        a as i64
    }
}

pub fn vec_modp(v: &[i64], p: u64) -> Vec<u64> {
    v.iter().map(|&x| modp(x, p)).collect()
}

/// Incrementally maintained row-echelon basis over F_p.
///
/// Every stored row is monic at its pivot and vanishes at the pivots of earlier rows,
/// so a single ordered sweep reduces any vector.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    p: u64,
    dim: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(dim: usize, p: u64) -> Self {
        EchelonBasis { p, dim, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn reduce(&self, v: &mut [u64]) {
        let p = self.p;
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            let f = v[piv];
            if f != 0 {
                for (x, &r) in v.iter_mut().zip(row).skip(piv) {
                    if r != 0 {
                        *x = subm(*x, mulm(f, r, p), p);
                    }
                }
            }
        }
    }

    /// Adds `v` to the basis; returns false when it was already in the span.
    pub fn insert(&mut self, mut v: Vec<u64>) -> bool {
        debug_assert_eq!(v.len(), self.dim);
        self.reduce(&mut v);
        match v.iter().position(|&x| x != 0) {
            None => false,
            Some(piv) => {
                let inv = invm(v[piv], self.p);
                for x in v.iter_mut().skip(piv) {
                    *x = mulm(*x, inv, self.p);
                }
                self.rows.push(v);
                self.pivots.push(piv);
                true
            }
        }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }
}

/// Rank over F_p of a list of rows.
pub fn rank_mod(rows: &[Vec<u64>], p: u64) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let mut b = EchelonBasis::new(first.len(), p);
    for r in rows {
        b.insert(r.clone());
    }
    b.rank()
}

pub fn rank_mod_i64(rows: &[Vec<i64>], p: u64) -> usize {
    let rows: Vec<Vec<u64>> = rows.iter().map(|r| vec_modp(r, p)).collect();
    rank_mod(&rows, p)
}

/// Basis of the left kernel `{y : y·M = 0}` of the matrix whose rows are given.
pub fn left_kernel_mod(rows: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let n = rows.len();
    if n == 0 {
        return Vec::new();
    }
    let d = rows[0].len();
    // Each basis entry carries the combination of input rows that produced it.
    let mut basis: Vec<(Vec<u64>, usize, Vec<u64>)> = Vec::new();
    let mut kernel = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut v = r.clone();
        let mut combo = vec![0u64; n];
        combo[i] = 1;
        for (brow, piv, bcombo) in &basis {
            let f = v[*piv];
            if f != 0 {
                for (x, &y) in v.iter_mut().zip(brow) {
                    *x = subm(*x, mulm(f, y, p), p);
                }
                for (x, &y) in combo.iter_mut().zip(bcombo) {
                    *x = subm(*x, mulm(f, y, p), p);
                }
            }
        }
        match v.iter().position(|&x| x != 0) {
            None => kernel.push(combo),
            Some(piv) => {
                let inv = invm(v[piv], p);
                v.iter_mut().for_each(|x| *x = mulm(*x, inv, p));
                combo.iter_mut().for_each(|x| *x = mulm(*x, inv, p));
                basis.push((v, piv, combo));
            }
        }
        debug_assert!(basis.iter().all(|b| b.0.len() == d));
    }
    kernel
}

/// Reduced row-echelon form in place; returns pivot columns.
pub fn rref_mod(m: &mut [Vec<u64>], p: u64) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(sel) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, sel);
        let inv = invm(m[r][c], p);
        m[r].iter_mut().for_each(|x| *x = mulm(*x, inv, p));
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                let (a, b) = if i < r {
                    let (lo, hi) = m.split_at_mut(r);
                    (&mut lo[i], &hi[0])
                } else {
                    let (lo, hi) = m.split_at_mut(i);
                    (&mut hi[0], &lo[r])
                };
                for (x, &y) in a.iter_mut().zip(b.iter()) {
                    if y != 0 {
                        *x = subm(*x, mulm(f, y, p), p);
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solves `x·M = target` over F_p for the row vector x, if solvable.
pub fn solve_left_mod(rows: &[Vec<u64>], target: &[u64], p: u64) -> Option<Vec<u64>> {
    let n = rows.len();
    let d = target.len();
    // Work on the transpose augmented with the target column.
    let mut t: Vec<Vec<u64>> = (0..d)
        .map(|j| {
            let mut r: Vec<u64> = rows.iter().map(|row| row[j]).collect();
            r.push(target[j]);
            r
        })
        .collect();
    let piv = rref_mod(&mut t, p);
    if piv.last() == Some(&n) {
        return None;
    }
    let mut x = vec![0u64; n];
    for (i, &c) in piv.iter().enumerate() {
        x[c] = t[i][n];
    }
    Some(x)
}

pub type Rational = BigRational;

pub fn q(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Rank over Q of an integer matrix given by rows.
pub fn rank_rational(rows: &[Vec<i64>]) -> usize {
    let m: Vec<Vec<Scalar>> =
        rows.iter().map(|r| r.iter().map(|&x| Scalar::Rational(q(x))).collect()).collect();
    eliminate(m).len()
}

/// Scalar value of one of the supported kinds.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Rational(BigRational),
    Mod { value: u64, p: u64 },
    Real(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarKind {
    Rational,
    Prime(u64),
    Real,
}

impl ScalarKind {
    /// Parses `rational` or `fp:<p>`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "rational" {
            return Ok(ScalarKind::Rational);
        }
        if let Some(rest) = s.strip_prefix("fp:") {
            let p: u64 = rest.parse().map_err(|_| Error::InvalidInput(format!("bad prime {rest}")))?;
            if !is_prime(p) {
                return Err(Error::UnsupportedField(format!("{p} is not prime")));
            }
            return Ok(ScalarKind::Prime(p));
        }
        invalid(format!("unknown field {s}"))
    }
}

impl Scalar {
    pub fn from_int(x: i64, kind: ScalarKind) -> Scalar {
        match kind {
            ScalarKind::Rational => Scalar::Rational(q(x)),
            ScalarKind::Prime(p) => Scalar::Mod { value: modp(x, p), p },
            ScalarKind::Real => Scalar::Real(x as f64),
        }
    }

    pub fn kind(&self) -> ScalarKind {
        match self {
            Scalar::Rational(_) => ScalarKind::Rational,
            Scalar::Mod { p, .. } => ScalarKind::Prime(*p),
            Scalar::Real(_) => ScalarKind::Real,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Mod { value, .. } => *value == 0,
            Scalar::Real(x) => *x == 0.0,
        }
    }

    fn zip(&self, o: &Scalar) -> Result<()> {
        if self.kind() != o.kind() {
            return invalid("mixed scalar kinds");
        }
        Ok(())
    }

    pub fn add(&self, o: &Scalar) -> Result<Scalar> {
        self.zip(o)?;
        Ok(match (self, o) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Mod { value: a, p }, Scalar::Mod { value: b, .. }) => {
                Scalar::Mod { value: addm(*a, *b, *p), p: *p }
            }
            (Scalar::Real(a), Scalar::Real(b)) => Scalar::Real(a + b),
            _ => unreachable!(),
        })
    }

    pub fn sub(&self, o: &Scalar) -> Result<Scalar> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Scalar) -> Result<Scalar> {
        self.zip(o)?;
        Ok(match (self, o) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Mod { value: a, p }, Scalar::Mod { value: b, .. }) => {
                Scalar::Mod { value: mulm(*a, *b, *p), p: *p }
            }
            (Scalar::Real(a), Scalar::Real(b)) => Scalar::Real(a * b),
            _ => unreachable!(),
        })
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Mod { value, p } => Scalar::Mod { value: subm(0, *value, *p), p: *p },
            Scalar::Real(a) => Scalar::Real(-a),
        }
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return invalid("division by zero");
        }
        Ok(match self {
            Scalar::Rational(a) => Scalar::Rational(a.recip()),
            Scalar::Mod { value, p } => Scalar::Mod { value: invm(*value, *p), p: *p },
            Scalar::Real(a) => Scalar::Real(1.0 / a),
        })
    }

    /// Integer value when the scalar is an integral rational or a residue (centered).
    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Scalar::Rational(r) if r.is_integer() => r.to_integer().to_i64(),
            Scalar::Mod { value, p } => Some(centered(*value, *p)),
            _ => None,
        }
    }
}

impl std::fmt::Display for Scalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scalar::Rational(r) => write!(f, "{r}"),
            Scalar::Mod { value, .. } => write!(f, "{value}"),
            Scalar::Real(x) => write!(f, "{x}"),
        }
    }
}

/// Gaussian elimination with first-nonzero pivoting; returns the nonzero echelon rows.
fn eliminate(mut m: Vec<Vec<Scalar>>) -> Vec<Vec<Scalar>> {
    let rows = m.len();
    if rows == 0 {
        return m;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(sel) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, sel);
        let inv = m[r][c].inv().expect("nonzero pivot");
        let pivot_row: Vec<Scalar> = m[r].iter().map(|x| x.mul(&inv).unwrap()).collect();
        for row in m.iter_mut().skip(r + 1) {
            if !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x = x.sub(&f.mul(y).unwrap()).unwrap();
                    }
                }
            }
        }
        m[r] = pivot_row;
        r += 1;
    }
    m.truncate(r);
    m
}

/// Row-major dense matrix over a single scalar kind.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Scalar>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Scalar>) -> Result<Self> {
        if entries.len() != rows * cols {
            return invalid(format!("{} entries for a {rows}x{cols} matrix", entries.len()));
        }
        let m = DenseMatrix { rows, cols, entries };
        m.kind()?;
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<i64>], kind: ScalarKind) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return invalid("ragged rows");
        }
        let entries = rows.iter().flatten().map(|&x| Scalar::from_int(x, kind)).collect();
        DenseMatrix::new(r, c, entries)
    }

    pub fn zeros(rows: usize, cols: usize, kind: ScalarKind) -> Self {
        DenseMatrix { rows, cols, entries: vec![Scalar::from_int(0, kind); rows * cols] }
    }

    pub fn identity(n: usize, kind: ScalarKind) -> Self {
        let mut m = Self::zeros(n, n, kind);
        for i in 0..n {
            m.entries[i * n + i] = Scalar::from_int(1, kind);
        }
        m
    }

    /// Scalar kind shared by all entries (rational for an empty matrix).
    pub fn kind(&self) -> Result<ScalarKind> {
        let Some(first) = self.entries.first() else { return Ok(ScalarKind::Rational) };
        let k = first.kind();
        if self.entries.iter().any(|e| e.kind() != k) {
            return invalid("mixed scalar kinds");
        }
        Ok(k)
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> Vec<Scalar> {
        self.entries[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn transpose(&self) -> Self {
        let mut e = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                e.push(self.get(i, j).clone());
            }
        }
        DenseMatrix { rows: self.cols, cols: self.rows, entries: e }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut e = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            for &j in cols {
                e.push(self.get(i, j).clone());
            }
        }
        DenseMatrix { rows: self.rows, cols: cols.len(), entries: e }
    }

    fn row_vecs(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    /// Linear rank over the matrix's scalar field.
    pub fn rank(&self) -> Result<usize> {
        match self.kind()? {
            ScalarKind::Real => invalid("rank is not defined for floating-point matrices"),
            ScalarKind::Prime(p) => {
                let rows: Vec<Vec<u64>> = (0..self.rows)
                    .map(|i| {
                        self.row(i)
                            .iter()
                            .map(|s| if let Scalar::Mod { value, .. } = s { *value } else { 0 })
                            .collect()
                    })
                    .collect();
                Ok(rank_mod(&rows, p))
            }
            ScalarKind::Rational => Ok(eliminate(self.row_vecs()).len()),
        }
    }

    /// Determinant of a square matrix.
    pub fn det(&self) -> Result<Scalar> {
        if self.rows != self.cols {
            return invalid("determinant of a non-square matrix");
        }
        let kind = self.kind()?;
        let n = self.rows;
        let mut m = self.row_vecs();
        let mut det = Scalar::from_int(1, kind);
        for c in 0..n {
            let Some(sel) = (c..n).find(|&i| !m[i][c].is_zero()) else {
                return Ok(Scalar::from_int(0, kind));
            };
            if sel != c {
                m.swap(c, sel);
                det = det.neg();
            }
            det = det.mul(&m[c][c])?;
            let inv = m[c][c].inv()?;
            for i in c + 1..n {
                if !m[i][c].is_zero() {
                    let f = m[i][c].mul(&inv)?;
                    for j in c..n {
                        let t = f.mul(&m[c][j])?;
                        m[i][j] = m[i][j].sub(&t)?;
                    }
                }
            }
        }
        Ok(det)
    }
}

/// For each target, whether it lies in the span of the generators.
pub fn in_span(targets: &[Vec<Scalar>], generators: &[Vec<Scalar>]) -> Result<Vec<bool>> {
    let dim = targets
        .first()
        .or(generators.first())
        .map_or(0, |v| v.len());
    if targets.iter().chain(generators).any(|v| v.len() != dim) {
        return invalid("dimension mismatch");
    }
    let kind = targets.iter().chain(generators).flatten().next().map(|s| s.kind());
    if let Some(k) = kind {
        if targets.iter().chain(generators).flatten().any(|s| s.kind() != k) {
            return invalid("mixed scalar kinds");
        }
        if k == ScalarKind::Real {
            return invalid("span membership is not defined for floating-point vectors");
        }
    }
    let gen_mat = |extra: Option<&Vec<Scalar>>| -> DenseMatrix {
        let mut e: Vec<Scalar> = generators.iter().flatten().cloned().collect();
        let mut rows = generators.len();
        if let Some(t) = extra {
            e.extend(t.iter().cloned());
            rows += 1;
        }
        DenseMatrix { rows, cols: dim, entries: e }
    };
    let base = if generators.is_empty() { 0 } else { gen_mat(None).rank()? };
    targets.iter().map(|t| Ok(gen_mat(Some(t)).rank()? == base)).collect()
}

/// Lexicographically ordered k-subsets of `items`.
pub fn k_subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let n = items.len();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every k-subset of the designated columns (0-based) whose submatrix has rank below k.
pub fn zero_minors(m: &DenseMatrix, k: usize, columns: Option<&[usize]>) -> Result<Vec<Vec<usize>>> {
    let all: Vec<usize> = (0..m.cols).collect();
    let cols = columns.unwrap_or(&all);
    if k > cols.len() {
        return invalid(format!("k={k} exceeds {} designated columns", cols.len()));
    }
    if k > m.rows {
        return invalid(format!("k={k} exceeds {} rows", m.rows));
    }
    let mut out = Vec::new();
    for s in k_subsets(cols, k) {
        if m.select_columns(&s).rank()? < k {
            out.push(s);
        }
    }
    Ok(out)
}

/// All k×k minors (row subset, column subset, value) of an integer matrix, exact over Q.
pub fn integer_minors(rows: &[Vec<i64>], k: usize) -> Vec<(Vec<usize>, Vec<usize>, BigInt)> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    let ri: Vec<usize> = (0..r).collect();
    let ci: Vec<usize> = (0..c).collect();
    let mut out = Vec::new();
    for rs in k_subsets(&ri, k) {
        for cs in k_subsets(&ci, k) {
            let sub: Vec<Vec<i64>> = rs.iter().map(|&i| cs.iter().map(|&j| rows[i][j]).collect()).collect();
            let m = DenseMatrix::from_rows(&sub, ScalarKind::Rational).unwrap();
            let d = match m.det().unwrap() {
                Scalar::Rational(x) => x.to_integer(),
                _ => unreachable!(),
            };
            out.push((rs.clone(), cs, d));
        }
    }
    out
}

/// Prime factors of |n| (empty for 0 and ±1).
pub fn prime_factors(n: &BigInt) -> Vec<u64> {
    let mut n = n.abs().to_u64().expect("minor fits in u64");
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn rational_is_one(r: &Rational) -> bool {
    r.is_one()
}

/// Coefficient ring for block evaluation. Multiplication need not commute.
pub trait Ring: Clone + std::fmt::Debug + Send + Sync {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, c: i64) -> Self;
    fn zero_like(&self) -> Self;
}

impl Ring for f64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, c: i64) -> Self {
        self * c as f64
    }
    fn zero_like(&self) -> Self {
        0.0
    }
}

impl Ring for Rational {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, c: i64) -> Self {
        self * q(c)
    }
    fn zero_like(&self) -> Self {
        q(0)
    }
}

/// Residue modulo a runtime prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fp {
    pub v: u64,
    pub p: u64,
}

impl Fp {
    pub fn new(x: i64, p: u64) -> Fp {
        Fp { v: modp(x, p), p }
    }
}

impl Ring for Fp {
    fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.p, o.p);
        Fp { v: addm(self.v, o.v, self.p), p: self.p }
    }
    fn sub(&self, o: &Self) -> Self {
        Fp { v: subm(self.v, o.v, self.p), p: self.p }
    }
    fn mul(&self, o: &Self) -> Self {
        Fp { v: mulm(self.v, o.v, self.p), p: self.p }
    }
    fn scale(&self, c: i64) -> Self {
        Fp { v: mulm(self.v, modp(c, self.p), self.p), p: self.p }
    }
    fn zero_like(&self) -> Self {
        Fp { v: 0, p: self.p }
    }
}

/// Dense matrix over a ring, used as a non-commutative block.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<R> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<R>,
}

impl<R: Ring> Mat<R> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn at(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.cols + j]
    }
}

impl<R: Ring> Ring for Mat<R> {
    fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "block shape mismatch");
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect() }
    }
    fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "block shape mismatch");
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect() }
    }
    fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "block shape mismatch");
        let zero = self.data[0].zero_like();
        let mut data = vec![zero; self.rows * o.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                for j in 0..o.cols {
                    let t = a.mul(&o.data[k * o.cols + j]);
                    data[i * o.cols + j] = data[i * o.cols + j].add(&t);
                }
            }
        }
        Mat { rows: self.rows, cols: o.cols, data }
    }
    fn scale(&self, c: i64) -> Self {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.scale(c)).collect() }
    }
    fn zero_like(&self) -> Self {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.zero_like()).collect() }
    }
}

/// Dense f64 matrix block with a cache-friendly product.
#[derive(Clone, Debug, PartialEq)]
pub struct RealBlock {
    pub n: usize,
    pub m: usize,
    pub data: Vec<f64>,
}

impl RealBlock {
    pub fn zeros(n: usize, m: usize) -> Self {
        RealBlock { n, m, data: vec![0.0; n * m] }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl Ring for RealBlock {
    fn add(&self, o: &Self) -> Self {
        RealBlock { n: self.n, m: self.m, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }
    fn sub(&self, o: &Self) -> Self {
        RealBlock { n: self.n, m: self.m, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }
    fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.m, o.n, "block shape mismatch");
        let mut out = RealBlock::zeros(self.n, o.m);
        for i in 0..self.n {
            let row = &mut out.data[i * o.m..(i + 1) * o.m];
            for k in 0..self.m {
                let a = self.data[i * self.m + k];
                if a != 0.0 {
                    for (x, &b) in row.iter_mut().zip(&o.data[k * o.m..(k + 1) * o.m]) {
                        *x += a * b;
                    }
                }
            }
        }
        out
    }
    fn scale(&self, c: i64) -> Self {
        RealBlock { n: self.n, m: self.m, data: self.data.iter().map(|a| a * c as f64).collect() }
    }
    fn zero_like(&self) -> Self {
        RealBlock::zeros(self.n, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn matrix10() -> Vec<Vec<i64>> {
        vec![
            vec![1, -4, 3, -3, 2, 2, -1, -1, -1, 0, 0],
            vec![1, 1, 4, 2, 3, -2, 3, 0, 0, -1, -1],
        ]
    }

    #[test]
    fn small_ranks() {
        let id = DenseMatrix::identity(2, ScalarKind::Rational);
        assert_eq!(id.rank().unwrap(), 2);
        assert_eq!(DenseMatrix::zeros(3, 5, ScalarKind::Prime(7)).rank().unwrap(), 0);
        let m = DenseMatrix::from_rows(&matrix10(), ScalarKind::Rational).unwrap();
        assert_eq!(m.rank().unwrap(), 2);
    }

    #[test]
    fn mixed_kinds_rejected() {
        let m = DenseMatrix {
            rows: 1,
            cols: 2,
            entries: vec![Scalar::from_int(1, ScalarKind::Rational), Scalar::from_int(1, ScalarKind::Prime(5))],
        };
        assert!(m.rank().is_err());
    }

    #[test]
    fn span_examples() {
        let k = ScalarKind::Rational;
        let v = |x: &[i64]| x.iter().map(|&a| Scalar::from_int(a, k)).collect::<Vec<_>>();
        assert_eq!(in_span(&[v(&[1, 0])], &[v(&[1, 1]), v(&[0, 1])]).unwrap(), vec![true]);
        assert_eq!(in_span(&[v(&[0, 0, 1])], &[v(&[1, 0, 0]), v(&[0, 1, 0])]).unwrap(), vec![false]);
        assert!(in_span(&[v(&[0, 1])], &[v(&[1, 0, 0])]).is_err());
    }

    #[test]
    fn zero_minor_examples() {
        let m = DenseMatrix::from_rows(&matrix10(), ScalarKind::Rational).unwrap();
        let cols: Vec<usize> = (0..7).collect();
        assert!(zero_minors(&m, 2, Some(&cols)).unwrap().is_empty());
        let z = DenseMatrix::zeros(2, 2, ScalarKind::Rational);
        assert_eq!(zero_minors(&z, 1, None).unwrap(), vec![vec![0], vec![1]]);
        assert!(zero_minors(&z, 3, None).is_err());
    }

    #[test]
    fn subsets_are_lexicographic() {
        let s = k_subsets(&[0, 1, 2, 3], 2);
        assert_eq!(s, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(k_subsets(&[5, 6], 0), vec![Vec::<usize>::new()]);
        assert_eq!(k_subsets(&[0, 1, 2, 3, 4], 3).len(), 10);
    }

    #[test]
    fn kernel_annihilates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = DEFAULT_PRIME;
        for _ in 0..20 {
            let n = rng.gen_range(1..8);
            let d = rng.gen_range(1..6);
            let rows: Vec<Vec<u64>> =
                (0..n).map(|_| (0..d).map(|_| rng.gen_range(0..3)).collect()).collect();
            let k = left_kernel_mod(&rows, p);
            assert_eq!(k.len() + rank_mod(&rows, p), n);
            for y in &k {
                for j in 0..d {
                    let s = (0..n).fold(0, |acc, i| addm(acc, mulm(y[i], rows[i][j], p), p));
                    assert_eq!(s, 0);
                }
            }
        }
    }

    #[test]
    fn solve_left_roundtrip() {
        let p = 101;
        let rows = vec![vec![1, 2, 3], vec![0, 1, 4]];
        let t = vec![2, 5, 10];
        let x = solve_left_mod(&rows, &t, p).unwrap();
        assert_eq!(x, vec![2, 1]);
        assert!(solve_left_mod(&rows, &[0, 0, 1], p).is_none());
    }

    #[test]
    fn determinant() {
        let m = DenseMatrix::from_rows(&[vec![2, 1], vec![7, 4]], ScalarKind::Rational).unwrap();
        assert_eq!(m.det().unwrap().to_i64(), Some(1));
        assert_eq!(prime_factors(&BigInt::from(-84)), vec![2, 3, 7]);
    }

    proptest::proptest! {
        #[test]
        fn rank_invariant_under_transpose_and_permutation(
            data in proptest::collection::vec(-2i64..3, 12),
            perm_seed in 0u64..1000,
        ) {
            let rows: Vec<Vec<i64>> = data.chunks(4).map(|c| c.to_vec()).collect();
            let m = DenseMatrix::from_rows(&rows, ScalarKind::Rational).unwrap();
            let r = m.rank().unwrap();
            proptest::prop_assert_eq!(m.transpose().rank().unwrap(), r);
            let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
            let mut cols: Vec<usize> = (0..4).collect();
            use rand::seq::SliceRandom;
            cols.shuffle(&mut rng);
            proptest::prop_assert_eq!(m.select_columns(&cols).rank().unwrap(), r);
            proptest::prop_assert_eq!(rank_mod_i64(&rows, DEFAULT_PRIME), r);
        }

        #[test]
        fn random_combination_in_span(
            data in proptest::collection::vec(-3i64..4, 15),
            coef in proptest::collection::vec(-5i64..6, 3),
        ) {
            let gens: Vec<Vec<i64>> = data.chunks(5).map(|c| c.to_vec()).collect();
            let t: Vec<i64> = (0..5).map(|j| (0..3).map(|i| coef[i] * gens[i][j]).sum()).collect();
            let k = ScalarKind::Rational;
            let conv = |v: &Vec<i64>| v.iter().map(|&a| Scalar::from_int(a, k)).collect::<Vec<_>>();
            let g: Vec<_> = gens.iter().map(conv).collect();
            proptest::prop_assert_eq!(in_span(&[conv(&t)], &g).unwrap(), vec![true]);
        }
    }
}
