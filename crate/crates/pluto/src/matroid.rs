//! Corank-nullity polynomials of decode matrices.

use crate::bilinear::BilinearAlgorithm;
use crate::error::{invalid, Error, Result};
use crate::fieldlin::{is_prime, modp, rank_mod_i64, EchelonBasis, DEFAULT_PRIME};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Largest ground set accepted by [`corank_nullity`].
pub const MAX_GROUND: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Characteristic {
    Generic,
    Prime(u64),
}

impl Characteristic {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "generic" | "0" | "q" | "rational" => Ok(Characteristic::Generic),
            t => {
                let p: u64 = t.trim_start_matches("char").trim().parse().map_err(|_| Error::UnsupportedField(t.into()))?;
                if !is_prime(p) {
                    return Err(Error::UnsupportedField(t.into()));
                }
                Ok(Characteristic::Prime(p))
            }
        }
    }

    pub fn modulus(self) -> u64 {
        match self {
            Characteristic::Generic => DEFAULT_PRIME,
            Characteristic::Prime(p) => p,
        }
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Characteristic::Generic => write!(f, "generic"),
            Characteristic::Prime(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroundMatrix {
    pub rows: Vec<Vec<i64>>,
    pub characteristic: Characteristic,
}

impl GroundMatrix {
    pub fn new(rows: Vec<Vec<i64>>, characteristic: Characteristic) -> Self {
        GroundMatrix { rows, characteristic }
    }

    pub fn columns(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn with_characteristic(&self, c: Characteristic) -> Self {
        GroundMatrix { rows: self.rows.clone(), characteristic: c }
    }

    fn column_mod(&self, j: usize) -> Vec<u64> {
        let p = self.characteristic.modulus();
        self.rows.iter().map(|r| modp(r[j], p)).collect()
    }
}

/// Rows are C entries, columns tasks. With `augment`, the bottom half of the rows is negated
/// and a row making every column sum to zero is appended.
pub fn decode_matroid_matrix(alg: &BilinearAlgorithm, augment: bool) -> GroundMatrix {
    let mut rows = alg.dec.clone();
    if augment {
        let half = rows.len() / 2;
        let start = rows.len() - half;
        for row in rows.iter_mut().skip(start) {
            row.iter_mut().for_each(|x| *x = -*x);
        }
        let bal = (0..alg.r()).map(|j| -rows.iter().map(|r| r[j]).sum::<i64>()).collect();
        rows.push(bal);
    }
    GroundMatrix::new(rows, Characteristic::Generic)
}

/// Bivariate polynomial with signed integer coefficients keyed by (x exponent, y exponent).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Poly {
    pub terms: BTreeMap<(u32, u32), i64>,
}

pub type CorankNullityPoly = Poly;

impl Poly {
    pub fn monomial(c: i64, i: u32, j: u32) -> Self {
        let mut p = Poly::default();
        p.add_term(i, j, c);
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: i64) {
        let e = self.terms.entry((i, j)).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> i64 {
        self.terms.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (&(i, j), &c) in &o.terms {
            r.add_term(i, j, c);
        }
        r
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (&(i, j), &c) in &o.terms {
            r.add_term(i, j, -c);
        }
        r
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::default();
        for (&(i, j), &c) in &self.terms {
            for (&(k, l), &d) in &o.terms {
                r.add_term(i + k, j + l, c * d);
            }
        }
        r
    }

    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.terms.iter().map(|(&(i, j), &c)| c * x.pow(i) * y.pow(j)).sum()
    }

    /// Divisibility by xy − 1: the polynomial vanishes on y = 1/x.
    pub fn divisible_by_xy_minus_one(&self) -> bool {
        let mut diag: BTreeMap<i64, i64> = BTreeMap::new();
        for (&(i, j), &c) in &self.terms {
            *diag.entry(i as i64 - j as i64).or_insert(0) += c;
        }
        diag.values().all(|&v| v == 0)
    }

    /// Sorted (i, j, coefficient) triples.
    pub fn triples(&self) -> Vec<(u32, u32, i64)> {
        self.terms.iter().map(|(&(i, j), &c)| (i, j, c)).collect()
    }

    /// Parses sums and products of monomials such as `3x^2y + 20 - xy` or `(-1+xy)(4x^3+2)`.
    pub fn parse(s: &str) -> Result<Poly> {
        let clean: String = s
            .chars()
            .map(|c| match c {
                '−' => '-',
                c => c,
            })
            .filter(|c| !c.is_whitespace())
            .collect();
        let mut parser = PolyParser { s: clean.as_bytes(), pos: 0 };
        let p = parser.sum()?;
        if parser.pos != parser.s.len() {
            return Err(Error::Malformed(format!("trailing input in polynomial at {}", parser.pos)));
        }
        Ok(p)
    }
}

struct PolyParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl PolyParser<'_> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<Poly> {
        let mut acc = Poly::default();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    1
                }
                Some(b'-') => {
                    self.pos += 1;
                    -1
                }
                _ if first => 1,
                _ => return Ok(acc),
            };
            first = false;
            let t = self.product()?;
            acc = acc.add(&t.mul(&Poly::monomial(sign, 0, 0)));
        }
    }

    fn number(&mut self) -> Option<i64> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.s[start..self.pos]).unwrap().parse().unwrap())
    }

    fn product(&mut self) -> Result<Poly> {
        let mut acc = Poly::monomial(1, 0, 0);
        let mut any = false;
        loop {
            match self.peek() {
                Some(b'(') => {
                    self.pos += 1;
                    let inner = self.sum()?;
                    if self.peek() != Some(b')') {
                        return Err(Error::Malformed("unbalanced parenthesis".into()));
                    }
                    self.pos += 1;
                    acc = acc.mul(&inner);
                }
                Some(b'0'..=b'9') => {
                    let c = self.number().unwrap();
                    acc = acc.mul(&Poly::monomial(c, 0, 0));
                }
                Some(v @ (b'x' | b'y')) => {
                    self.pos += 1;
                    let mut e = 1;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        let brace = self.peek() == Some(b'{');
                        if brace {
                            self.pos += 1;
                        }
                        e = self.number().ok_or_else(|| Error::Malformed("missing exponent".into()))? as u32;
                        if brace {
                            self.pos += 1;
                        }
                    }
                    let m = if v == b'x' { Poly::monomial(1, e, 0) } else { Poly::monomial(1, 0, e) };
                    acc = acc.mul(&m);
                }
                Some(b'*') => self.pos += 1,
                _ => break,
            }
            any = true;
        }
        if !any {
            return Err(Error::Malformed(format!("expected a term at {}", self.pos)));
        }
        Ok(acc)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut keys: Vec<&(u32, u32)> = self.terms.keys().collect();
        keys.sort_by_key(|&&(i, j)| (j, std::cmp::Reverse(i)));
        for (n, &&(i, j)) in keys.iter().enumerate() {
            let c = self.terms[&(i, j)];
            let sign = if c < 0 { "-" } else { "+" };
            if n == 0 {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            let var = |v: &str, e: u32| match e {
                0 => String::new(),
                1 => v.to_string(),
                e => format!("{v}^{e}"),
            };
            let mono = format!("{}{}", var("x", i), var("y", j));
            if a != 1 || mono.is_empty() {
                write!(f, "{a}")?;
            }
            write!(f, "{mono}")?;
        }
        Ok(())
    }
}

/// Subset counts indexed by [rank][size], enumerated by depth-first include/exclude with an
/// incremental basis. The first `split` columns are fixed per parallel job.
fn rank_size_counts(gm: &GroundMatrix) -> Vec<Vec<u64>> {
    let n = gm.columns();
    let p = gm.characteristic.modulus();
    let dim = gm.rows.len();
    let cols: Vec<Vec<u64>> = (0..n).map(|j| gm.column_mod(j)).collect();
    let split = n.min(8);
    let merge = |mut a: Vec<Vec<u64>>, b: Vec<Vec<u64>>| {
        for (ra, rb) in a.iter_mut().zip(b) {
            for (x, y) in ra.iter_mut().zip(rb) {
                *x += y;
            }
        }
        a
    };
    (0u64..1 << split)
        .into_par_iter()
        .map(|mask| {
            let mut counts = vec![vec![0u64; n + 1]; dim + 1];
            let mut basis = EchelonBasis::new(dim, p);
            let mut size = 0;
            for (j, col) in cols.iter().enumerate().take(split) {
                if mask >> j & 1 == 1 {
                    basis.insert(col.clone());
                    size += 1;
                }
            }
            dfs(&cols, split, basis, size, &mut counts);
            counts
        })
        .reduce(|| vec![vec![0u64; n + 1]; dim + 1], merge)
}

fn dfs(cols: &[Vec<u64>], j: usize, basis: EchelonBasis, size: usize, counts: &mut [Vec<u64>]) {
    if j == cols.len() {
        counts[basis.rank()][size] += 1;
        return;
    }
    if basis.rank() == basis.dim() {
        // Every extension has full rank: count sizes binomially.
        let rest = cols.len() - j;
        let mut c = 1u64;
        for k in 0..=rest {
            counts[basis.rank()][size + k] += c;
            c = c * (rest - k) as u64 / (k + 1) as u64;
        }
        return;
    }
    let mut with = basis.clone();
    with.insert(cols[j].clone());
    dfs(cols, j + 1, with, size + 1, counts);
    dfs(cols, j + 1, basis, size, counts);
}

/// T(x, y) = Σ_S x^{rank E − rank S} y^{|S| − rank S}.
pub fn corank_nullity(gm: &GroundMatrix) -> Result<CorankNullityPoly> {
    let n = gm.columns();
    if n > MAX_GROUND {
        return Err(Error::BudgetExceeded(format!("{n} columns exceeds the enumeration bound {MAX_GROUND}")));
    }
    if gm.rows.is_empty() {
        return invalid("empty ground matrix");
    }
    let counts = rank_size_counts(gm);
    let rank_e = (0..counts.len()).find(|&r| counts[r][n] > 0).unwrap_or(0);
    let mut poly = Poly::default();
    for (r, row) in counts.iter().enumerate() {
        for (s, &c) in row.iter().enumerate() {
            if c > 0 {
                poly.add_term((rank_e - r) as u32, (s - r) as u32, c as i64);
            }
        }
    }
    Ok(poly)
}

/// Reference enumeration with a full elimination per subset.
pub fn corank_nullity_naive(gm: &GroundMatrix) -> Result<CorankNullityPoly> {
    let n = gm.columns();
    if n > 20 {
        return Err(Error::BudgetExceeded(format!("naive enumeration limited to 20 columns, got {n}")));
    }
    let p = gm.characteristic.modulus();
    let cols: Vec<Vec<i64>> = (0..n).map(|j| gm.rows.iter().map(|r| r[j]).collect()).collect();
    let rank_e = rank_mod_i64(&cols, p);
    let mut poly = Poly::default();
    for mask in 0u64..1 << n {
        let sel: Vec<Vec<i64>> = (0..n).filter(|j| mask >> j & 1 == 1).map(|j| cols[j].clone()).collect();
        let r = if sel.is_empty() { 0 } else { rank_mod_i64(&sel, p) };
        poly.add_term((rank_e - r) as u32, (sel.len() - r) as u32, 1);
    }
    Ok(poly)
}

/// T over `b` minus T over `a`.
pub fn char_correction(gm: &GroundMatrix, a: Characteristic, b: Characteristic) -> Result<Poly> {
    if a == b {
        return Ok(Poly::default());
    }
    let ta = corank_nullity(&gm.with_characteristic(a))?;
    let tb = corank_nullity(&gm.with_characteristic(b))?;
    Ok(tb.sub(&ta))
}

pub const STRASSEN_POLY: &str = "x^4 + 7x^3 + 21x^2 + 32x + 3x^2y + 20 + 15xy + 18y + 3xy^2 + 7y^2 + y^3";

pub const LADERMAN_POLY: &str = "127348 + 188514x + 148229x^2 + 78493x^3 + 30079x^4 + 8505x^5 + 1755x^6 + 253x^7 + 23x^8 + x^9 \
 + 427578y + 442448xy + 242994x^2y + 87583x^3y + 21554x^4y + 3530x^5y + 350x^6y + 16x^7y \
 + 779465y^2 + 569150xy^2 + 222202x^2y^2 + 56082x^3y^2 + 9181x^4y^2 + 896x^5y^2 + 40x^6y^2 \
 + 990980y^3 + 507027xy^3 + 139626x^2y^3 + 24664x^3y^3 + 2708x^4y^3 + 164x^5y^3 + 4x^6y^3 \
 + 961856y^4 + 339280xy^4 + 63942x^2y^4 + 7652x^3y^4 + 528x^4y^4 + 16x^5y^4 \
 + 743144y^5 + 176918xy^5 + 21588x^2y^5 + 1640x^3y^5 + 60x^4y^5 \
 + 466076y^6 + 73168xy^6 + 5276x^2y^6 + 230x^3y^6 + 4x^4y^6 \
 + 238812y^7 + 24150xy^7 + 878x^2y^7 + 16x^3y^7 \
 + 99647y^8 + 6341xy^8 + 88x^2y^8 \
 + 33451y^9 + 1300xy^9 + 4x^2y^9 \
 + 8835y^10 + 198xy^10 \
 + 1770y^11 + 20xy^11 \
 + 253y^12 + xy^12 \
 + 23y^13 \
 + y^14";

pub const LADERMAN_CHAR3_CORRECTION: &str = "-4 + 4xy";

pub const LADERMAN_CHAR2_CORRECTION: &str = "(-1 + xy)(4x^3 + 52x^2 + 290x + 8x^2y + 740 + 124xy + 786y + 20xy^2 + 465y^2 + 176y^3 + 40y^4 + 4y^5)";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::{laderman, strassen};
    use crate::fieldlin::rank_rational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_column() {
        let gm = GroundMatrix::new(vec![vec![1]], Characteristic::Generic);
        assert_eq!(corank_nullity(&gm).unwrap(), Poly::parse("x + 1").unwrap());
    }

    #[test]
    fn strassen_matrices() {
        let gm = decode_matroid_matrix(&strassen(), false);
        assert_eq!(
            gm.rows,
            vec![vec![1, 0, 0, 1, -1, 0, 1], vec![0, 0, 1, 0, 1, 0, 0], vec![0, 1, 0, 1, 0, 0, 0], vec![1, -1, 1, 0, 0, 1, 0]]
        );
        let aug = decode_matroid_matrix(&strassen(), true);
        assert_eq!(aug.rows[4], vec![0, 0, 0, 0, 0, 1, -1]);
        assert_eq!(aug.rows[3], vec![-1, 1, -1, 0, 0, -1, 0]);
        assert!((0..7).all(|j| aug.rows.iter().map(|r| r[j]).sum::<i64>() == 0));
    }

    #[test]
    fn strassen_polynomial() {
        let expect = Poly::parse(STRASSEN_POLY).unwrap();
        assert_eq!(expect.terms.len(), 11);
        for augment in [false, true] {
            for c in [Characteristic::Generic, Characteristic::Prime(2), Characteristic::Prime(3)] {
                let gm = decode_matroid_matrix(&strassen(), augment).with_characteristic(c);
                let t = corank_nullity(&gm).unwrap();
                assert_eq!(t, expect);
                assert_eq!(corank_nullity_naive(&gm).unwrap(), t);
            }
        }
        assert_eq!(expect.eval(1, 1), 128);
        assert_eq!(expect.coeff(2, 1), 3);
        assert_eq!(expect.coeff(1, 1), 15);
    }

    #[test]
    fn parse_and_print() {
        let p = Poly::parse("(-1 + xy)(2 + y^2)").unwrap();
        assert_eq!(p, Poly::parse("-2 - y^2 + 2xy + xy^3").unwrap());
        assert!(p.divisible_by_xy_minus_one());
        assert!(!Poly::parse("x + 1").unwrap().divisible_by_xy_minus_one());
        assert_eq!(Poly::parse(&p.to_string()).unwrap(), p);
        assert_eq!(Poly::parse(LADERMAN_POLY).unwrap().eval(1, 1), 1 << 23);
    }

    #[test]
    fn same_characteristic_correction_is_zero() {
        let gm = decode_matroid_matrix(&strassen(), false);
        assert!(char_correction(&gm, Characteristic::Prime(3), Characteristic::Prime(3)).unwrap().is_zero());
    }

    #[test]
    fn fp_rank_matches_rational() {
        let gm = decode_matroid_matrix(&laderman(), false);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let cols: Vec<Vec<i64>> = (0..23)
                .filter(|_| rng.gen_bool(0.5))
                .map(|j| gm.rows.iter().map(|r| r[j]).collect())
                .collect();
            if cols.is_empty() {
                continue;
            }
            assert_eq!(rank_mod_i64(&cols, DEFAULT_PRIME), rank_rational(&cols));
        }
    }

    #[test]
    fn too_large() {
        let gm = GroundMatrix::new(vec![vec![1; 31]], Characteristic::Generic);
        assert!(matches!(corank_nullity(&gm), Err(Error::BudgetExceeded(_))));
    }
}
