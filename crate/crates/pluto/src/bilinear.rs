//! Bilinear matrix-multiplication algorithms ⟨ℓ,m,n;r⟩.
//!
//! Task `s` computes `(Σ a_enc[s][(i,j)] A_ij) ⋆ (Σ b_enc[s][(j,k)] B_jk)` and the product
//! block `C_ik` is `Σ_s dec[(i,k)][s] · S_s`. Indices are 0-based and row-major.

use crate::error::{invalid, Error, Result};
use crate::fieldlin::Ring;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub l: usize,
    pub m: usize,
    pub n: usize,
}

impl Dims {
    pub fn new(l: usize, m: usize, n: usize) -> Dims {
        assert!(l >= 1 && m >= 1 && n >= 1, "dimensions must be positive");
        Dims { l, m, n }
    }

    pub fn a_len(&self) -> usize {
        self.l * self.m
    }

    pub fn b_len(&self) -> usize {
        self.m * self.n
    }

    pub fn c_len(&self) -> usize {
        self.l * self.n
    }

    pub fn naive(&self) -> usize {
        self.l * self.m * self.n
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<{},{},{}>", self.l, self.m, self.n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearAlgorithm {
    pub name: String,
    pub dims: Dims,
    pub a_enc: Vec<Vec<i64>>,
    pub b_enc: Vec<Vec<i64>>,
    pub dec: Vec<Vec<i64>>,
    /// Set when an imported algorithm failed Brent verification.
    pub flagged: bool,
}

/// Parses a signed sum of block symbols such as `A11 - 2A21 + A33` into a row-major
/// coefficient vector over a `rows × cols` grid of `var` blocks.
pub fn parse_lin(expr: &str, var: char, rows: usize, cols: usize) -> Vec<i64> {
    let mut v = vec![0i64; rows * cols];
    let s: String = expr.chars().filter(|c| !c.is_whitespace() && *c != '(' && *c != ')').collect();
    let mut sign = 1i64;
    let mut coef = String::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '+' => sign = 1,
            '-' => sign = -1,
            d if d.is_ascii_digit() => coef.push(d),
            x if x == var => {
                let i = chars.next().and_then(|c| c.to_digit(10)).expect("row index") as usize;
                let j = chars.next().and_then(|c| c.to_digit(10)).expect("column index") as usize;
                let k: i64 = if coef.is_empty() { 1 } else { coef.parse().unwrap() };
                v[(i - 1) * cols + (j - 1)] += sign * k;
                coef.clear();
                sign = 1;
            }
            other => panic!("unexpected character {other} in {expr}"),
        }
    }
    v
}

/// Parses `L6 + L14 - L19` style task sums into a weight vector of length r.
pub fn parse_tasks(expr: &str, prefix: char, r: usize) -> Vec<i64> {
    let mut v = vec![0i64; r];
    let s: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    let mut sign = 1;
    let mut num = String::new();
    let mut in_task = false;
    let flush = |num: &mut String, sign: i64, v: &mut Vec<i64>| {
        if !num.is_empty() {
            let idx: usize = num.parse().unwrap();
            v[idx - 1] += sign;
            num.clear();
        }
    };
    for c in s.chars() {
        match c {
            '+' | '-' => {
                flush(&mut num, sign, &mut v);
                in_task = false;
                sign = if c == '+' { 1 } else { -1 };
            }
            x if x == prefix => in_task = true,
            d if d.is_ascii_digit() && in_task => num.push(d),
            other => panic!("unexpected character {other} in {expr}"),
        }
    }
    flush(&mut num, sign, &mut v);
    v
}

impl BilinearAlgorithm {
    pub fn r(&self) -> usize {
        self.a_enc.len()
    }

    fn from_exprs(name: &str, dims: Dims, tasks: &[(&str, &str)], dec_exprs: &[(&str, &str)], prefix: char) -> Self {
        let a_enc = tasks.iter().map(|(a, _)| parse_lin(a, 'A', dims.l, dims.m)).collect();
        let b_enc = tasks.iter().map(|(_, b)| parse_lin(b, 'B', dims.m, dims.n)).collect();
        let r = tasks.len();
        let mut dec = vec![vec![0i64; r]; dims.c_len()];
        for (c, e) in dec_exprs {
            let idx = parse_lin(c, 'C', dims.l, dims.n);
            let row = idx.iter().position(|&x| x == 1).unwrap();
            dec[row] = parse_tasks(e, prefix, r);
        }
        BilinearAlgorithm { name: name.into(), dims, a_enc, b_enc, dec, flagged: false }
    }

    /// Validates matrix shapes.
    pub fn check_shapes(&self) -> Result<()> {
        let r = self.r();
        if self.b_enc.len() != r {
            return invalid(format!("a_enc has {r} rows but b_enc has {}", self.b_enc.len()));
        }
        if self.a_enc.iter().any(|x| x.len() != self.dims.a_len()) {
            return invalid("a_enc row length differs from l*m");
        }
        if self.b_enc.iter().any(|x| x.len() != self.dims.b_len()) {
            return invalid("b_enc row length differs from m*n");
        }
        if self.dec.len() != self.dims.c_len() || self.dec.iter().any(|x| x.len() != r) {
            return invalid("dec must be (l*n) x r");
        }
        Ok(())
    }
}

pub fn schoolbook(d: Dims) -> BilinearAlgorithm {
    let r = d.naive();
    let mut a_enc = Vec::with_capacity(r);
    let mut b_enc = Vec::with_capacity(r);
    let mut dec = vec![vec![0i64; r]; d.c_len()];
    for i in 0..d.l {
        for j in 0..d.m {
            for k in 0..d.n {
                let s = a_enc.len();
                let mut a = vec![0; d.a_len()];
                a[i * d.m + j] = 1;
                let mut b = vec![0; d.b_len()];
                b[j * d.n + k] = 1;
                a_enc.push(a);
                b_enc.push(b);
                dec[i * d.n + k][s] = 1;
            }
        }
    }
    BilinearAlgorithm { name: format!("schoolbook{}", d), dims: d, a_enc, b_enc, dec, flagged: false }
}

pub fn strassen() -> BilinearAlgorithm {
    BilinearAlgorithm::from_exprs(
        "strassen",
        Dims::new(2, 2, 2),
        &[
            ("A11 + A22", "B11 + B22"),
            ("A21 + A22", "B11"),
            ("A11", "B12 - B22"),
            ("A22", "-B11 + B21"),
            ("A11 + A12", "B22"),
            ("-A11 + A21", "B11 + B12"),
            ("A12 - A22", "B21 + B22"),
        ],
        &[
            ("C11", "S1 + S4 - S5 + S7"),
            ("C12", "S3 + S5"),
            ("C21", "S2 + S4"),
            ("C22", "S1 - S2 + S3 + S6"),
        ],
        'S',
    )
}

pub fn laderman() -> BilinearAlgorithm {
    BilinearAlgorithm::from_exprs(
        "laderman",
        Dims::new(3, 3, 3),
        &[
            ("A11 + A12 + A13 - A21 - A22 - A32 - A33", "B22"),
            ("A11 - A21", "-B12 + B22"),
            ("A22", "-B11 + B12 + B21 - B22 - B23 - B31 + B33"),
            ("-A11 + A21 + A22", "B11 - B12 + B22"),
            ("A21 + A22", "-B11 + B12"),
            ("A11", "B11"),
            ("-A11 + A31 + A32", "B11 - B13 + B23"),
            ("A11 - A31", "-B13 + B23"),
            ("A31 + A32", "-B11 + B13"),
            ("A11 + A12 + A13 - A22 - A23 - A31 - A32", "B23"),
            ("A32", "-B11 + B13 + B21 - B22 - B23 - B31 + B32"),
            ("-A13 + A32 + A33", "B22 + B31 - B32"),
            ("A13 - A33", "B22 - B32"),
            ("-A13", "-B31"),
            ("A32 + A33", "-B31 + B32"),
            ("-A13 + A22 + A23", "B23 + B31 - B33"),
            ("A13 - A23", "B23 - B33"),
            ("A22 + A23", "-B31 + B33"),
            ("A12", "B21"),
            ("A23", "B32"),
            ("-A21", "-B13"),
            ("-A31", "-B12"),
            ("A33", "B33"),
        ],
        &[
            ("C11", "L6 + L14 + L19"),
            ("C12", "L14 + L6 + L4 + L5 + L1 + L15 + L12"),
            ("C21", "L6 + L14 + L16 + L17 + L3 + L2 + L4"),
            ("C13", "L14 + L6 + L7 + L9 + L10 + L18 + L16"),
            ("C31", "L6 + L14 + L12 + L13 + L11 + L8 + L7"),
            ("C22", "L6 + L4 + L5 + L20 + L2"),
            ("C23", "L14 + L16 + L17 + L21 + L18"),
            ("C33", "L6 + L7 + L9 + L23 + L8"),
            ("C32", "L14 + L12 + L13 + L22 + L15"),
        ],
        'L',
    )
}

/// One nonzero component of the Brent residual.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BrentViolation {
    /// C entry (i,k), A index (i2,j), B index (j2,k2), all 0-based.
    pub c: (usize, usize),
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub residual: i64,
}

/// Checks Σ_s dec[(i,k),s] a_s ⊗ b_s = Σ_j e_ij ⊗ e_jk exactly; returns all violations.
pub fn verify_brent(alg: &BilinearAlgorithm) -> std::result::Result<(), Vec<BrentViolation>> {
    if alg.check_shapes().is_err() {
        return Err(vec![BrentViolation { c: (0, 0), a: (0, 0), b: (0, 0), residual: i64::MAX }]);
    }
    let d = alg.dims;
    let mut bad = Vec::new();
    for i in 0..d.l {
        for k in 0..d.n {
            let row = &alg.dec[i * d.n + k];
            let mut acc = vec![0i64; d.a_len() * d.b_len()];
            for (s, &w) in row.iter().enumerate() {
                if w == 0 {
                    continue;
                }
                for (x, &a) in alg.a_enc[s].iter().enumerate() {
                    if a == 0 {
                        continue;
                    }
                    for (y, &b) in alg.b_enc[s].iter().enumerate() {
                        acc[x * d.b_len() + y] += w * a * b;
                    }
                }
            }
            for j in 0..d.m {
                acc[(i * d.m + j) * d.b_len() + j * d.n + k] -= 1;
            }
            for (idx, &v) in acc.iter().enumerate() {
                if v != 0 {
                    let (x, y) = (idx / d.b_len(), idx % d.b_len());
                    bad.push(BrentViolation {
                        c: (i, k),
                        a: (x / d.m, x % d.m),
                        b: (y / d.n, y % d.n),
                        residual: v,
                    });
                }
            }
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}

/// Row-major grid of blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<R> {
    pub rows: usize,
    pub cols: usize,
    pub blocks: Vec<R>,
}

impl<R: Ring> Grid<R> {
    pub fn new(rows: usize, cols: usize, blocks: Vec<R>) -> Result<Self> {
        if blocks.len() != rows * cols || blocks.is_empty() {
            return invalid(format!("{} blocks for a {rows}x{cols} grid", blocks.len()));
        }
        Ok(Grid { rows, cols, blocks })
    }

    pub fn at(&self, i: usize, j: usize) -> &R {
        &self.blocks[i * self.cols + j]
    }
}

/// Linear combination Σ c_i x_i of ring elements; zero when every coefficient vanishes.
pub fn combine<R: Ring>(coef: &[i64], xs: &[R]) -> R {
    let mut acc: Option<R> = None;
    for (&c, x) in coef.iter().zip(xs) {
        if c == 0 {
            continue;
        }
        let t = if c == 1 { x.clone() } else { x.scale(c) };
        acc = Some(match acc {
            None => t,
            Some(a) => a.add(&t),
        });
    }
    acc.unwrap_or_else(|| xs[0].zero_like())
}

/// Task values S_s for concrete inputs; exactly one ring multiplication per task.
pub fn task_values<R: Ring>(alg: &BilinearAlgorithm, a: &Grid<R>, b: &Grid<R>) -> Result<Vec<R>> {
    let d = alg.dims;
    if (a.rows, a.cols) != (d.l, d.m) || (b.rows, b.cols) != (d.m, d.n) {
        return invalid(format!("grids {}x{} and {}x{} do not match {}", a.rows, a.cols, b.rows, b.cols, d));
    }
    Ok((0..alg.r())
        .map(|s| combine(&alg.a_enc[s], &a.blocks).mul(&combine(&alg.b_enc[s], &b.blocks)))
        .collect())
}

/// Evaluates C = A·B with the algorithm's r block multiplications.
pub fn evaluate<R: Ring>(alg: &BilinearAlgorithm, a: &Grid<R>, b: &Grid<R>) -> Result<Grid<R>> {
    let s = task_values(alg, a, b)?;
    let blocks = alg.dec.iter().map(|row| combine(row, &s)).collect();
    Grid::new(alg.dims.l, alg.dims.n, blocks)
}

/// Task weights expressing Σ c_weights[(i,k)] C_ik, i.e. c_weightsᵀ·dec.
pub fn decode_combination(alg: &BilinearAlgorithm, c_weights: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; alg.r()];
    for (row, &w) in alg.dec.iter().zip(c_weights) {
        if w != 0 {
            for (o, &x) in out.iter_mut().zip(row) {
                *o += w * x;
            }
        }
    }
    out
}

/// Kronecker product of two coefficient grids, re-flattened row-major on the composite grid.
pub fn kron_grid(x: &[i64], xr: usize, xc: usize, y: &[i64], yr: usize, yc: usize) -> Vec<i64> {
    let cols = xc * yc;
    let mut out = vec![0i64; xr * yr * cols];
    for i in 0..xr {
        for j in 0..xc {
            let a = x[i * xc + j];
            if a == 0 {
                continue;
            }
            for k in 0..yr {
                for l in 0..yc {
                    out[(i * yr + k) * cols + j * yc + l] = a * y[k * yc + l];
                }
            }
        }
    }
    out
}

/// Tensor product p ⊗ q: task (s,t) has id s·r′+t, outer indices vary slowest.
pub fn tensor_alg(p: &BilinearAlgorithm, q: &BilinearAlgorithm) -> BilinearAlgorithm {
    let (dp, dq) = (p.dims, q.dims);
    let dims = Dims::new(dp.l * dq.l, dp.m * dq.m, dp.n * dq.n);
    let mut a_enc = Vec::new();
    let mut b_enc = Vec::new();
    for s in 0..p.r() {
        for t in 0..q.r() {
            a_enc.push(kron_grid(&p.a_enc[s], dp.l, dp.m, &q.a_enc[t], dq.l, dq.m));
            b_enc.push(kron_grid(&p.b_enc[s], dp.m, dp.n, &q.b_enc[t], dq.m, dq.n));
        }
    }
    let r = p.r() * q.r();
    let mut dec = vec![vec![0i64; r]; dims.c_len()];
    for i in 0..dp.l {
        for k in 0..dp.n {
            for i2 in 0..dq.l {
                for k2 in 0..dq.n {
                    let row = &mut dec[(i * dq.l + i2) * dims.n + k * dq.n + k2];
                    for s in 0..p.r() {
                        let w = p.dec[i * dp.n + k][s];
                        if w == 0 {
                            continue;
                        }
                        for t in 0..q.r() {
                            row[s * q.r() + t] = w * q.dec[i2 * dq.n + k2][t];
                        }
                    }
                }
            }
        }
    }
    BilinearAlgorithm {
        name: format!("{}*{}", p.name, q.name),
        dims,
        a_enc,
        b_enc,
        dec,
        flagged: p.flagged || q.flagged,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionKind {
    Identity,
    Rotation,
    Reflection,
    Conjugation,
}

/// Substitution acting on (A, B, C).
///
/// Without transposition: A ↦ La·A·Ra, B ↦ Lb·B·Rb, C ↦ Lc·C·Rc.
/// With transposition the roles of A and B swap: A ↦ La·Bᵀ·Ra, B ↦ Lb·Aᵀ·Rb, C ↦ Lc·Cᵀ·Rc.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupAction {
    pub kind: ActionKind,
    pub order: usize,
    pub transpose: bool,
    pub a: (Vec<Vec<i64>>, Vec<Vec<i64>>),
    pub b: (Vec<Vec<i64>>, Vec<Vec<i64>>),
    pub c: (Vec<Vec<i64>>, Vec<Vec<i64>>),
}

pub fn identity_matrix(n: usize) -> Vec<Vec<i64>> {
    (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect()
}

fn neg(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    m.iter().map(|r| r.iter().map(|x| -x).collect()).collect()
}

pub fn matmul(x: &[Vec<i64>], y: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let (n, k, m) = (x.len(), y.len(), y[0].len());
    let mut out = vec![vec![0i64; m]; n];
    for i in 0..n {
        for t in 0..k {
            if x[i][t] != 0 {
                for j in 0..m {
                    out[i][j] += x[i][t] * y[t][j];
                }
            }
        }
    }
    out
}

pub fn transpose(x: &[Vec<i64>]) -> Vec<Vec<i64>> {
    (0..x[0].len()).map(|j| x.iter().map(|r| r[j]).collect()).collect()
}

impl GroupAction {
    pub fn identity(d: Dims) -> Self {
        GroupAction {
            kind: ActionKind::Identity,
            order: 1,
            transpose: false,
            a: (identity_matrix(d.l), identity_matrix(d.m)),
            b: (identity_matrix(d.m), identity_matrix(d.n)),
            c: (identity_matrix(d.l), identity_matrix(d.n)),
        }
    }

    /// X ↦ R X R⁻¹ on all three matrices.
    pub fn conjugation(r: Vec<Vec<i64>>, r_inv: Vec<Vec<i64>>, order: usize) -> Self {
        GroupAction {
            kind: ActionKind::Conjugation,
            order,
            transpose: false,
            a: (r.clone(), r_inv.clone()),
            b: (r.clone(), r_inv.clone()),
            c: (r, r_inv),
        }
    }

    /// Order-3 conjugation fixing the trace on ⟨2,2,2⟩.
    pub fn strassen_conjugation() -> Self {
        Self::conjugation(vec![vec![-1, 1], vec![-1, 0]], vec![vec![0, -1], vec![1, -1]], 3)
    }

    /// Order-4 rotation on ⟨3,3,3⟩: A ↦ P Bᵀ Q, B ↦ Q Aᵀ, C ↦ P Cᵀ.
    pub fn laderman_rotation() -> Self {
        let p = vec![vec![1, 0, 0], vec![0, 0, 1], vec![0, 1, 0]];
        let q = vec![vec![0, 0, -1], vec![0, 1, 0], vec![-1, 0, 0]];
        GroupAction {
            kind: ActionKind::Rotation,
            order: 4,
            transpose: true,
            a: (p.clone(), q.clone()),
            b: (q, identity_matrix(3)),
            c: (p, identity_matrix(3)),
        }
    }

    /// Involution on ⟨3,3,3⟩: A ↦ −Bᵀ D, B ↦ −D Aᵀ, C ↦ Cᵀ with D = diag(1,−1,1).
    pub fn laderman_reflection() -> Self {
        let d = vec![vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, 1]];
        GroupAction {
            kind: ActionKind::Reflection,
            order: 2,
            transpose: true,
            a: (neg(&identity_matrix(3)), d.clone()),
            b: (neg(&d), identity_matrix(3)),
            c: (identity_matrix(3), identity_matrix(3)),
        }
    }

    /// The plain transpose swap A ↦ −Bᵀ, B ↦ −Aᵀ, C ↦ Cᵀ without the diagonal sign.
    pub fn plain_transpose_swap() -> Self {
        GroupAction {
            kind: ActionKind::Reflection,
            order: 2,
            transpose: true,
            a: (neg(&identity_matrix(3)), identity_matrix(3)),
            b: (neg(&identity_matrix(3)), identity_matrix(3)),
            c: (identity_matrix(3), identity_matrix(3)),
        }
    }

    /// Image of an integer matrix pair under the substitution.
    pub fn apply(&self, a: &[Vec<i64>], b: &[Vec<i64>]) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
        let (xa, xb) = if self.transpose { (transpose(b), transpose(a)) } else { (a.to_vec(), b.to_vec()) };
        (
            matmul(&matmul(&self.a.0, &xa), &self.a.1),
            matmul(&matmul(&self.b.0, &xb), &self.b.1),
        )
    }

    pub fn apply_c(&self, c: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let x = if self.transpose { transpose(c) } else { c.to_vec() };
        matmul(&matmul(&self.c.0, &x), &self.c.1)
    }

    /// Checks A′B′ = C′ on random integer inputs.
    pub fn is_valid(&self, d: Dims) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        (0..5).all(|_| {
            let a: Vec<Vec<i64>> = (0..d.l).map(|_| (0..d.m).map(|_| rng.gen_range(-9..10)).collect()).collect();
            let b: Vec<Vec<i64>> = (0..d.m).map(|_| (0..d.n).map(|_| rng.gen_range(-9..10)).collect()).collect();
            let (a2, b2) = self.apply(&a, &b);
            a2.len() == d.l && b2.len() == d.m && matmul(&a2, &b2) == self.apply_c(&matmul(&a, &b))
        })
    }
}

/// Coefficient vector of α(L·X·R) over the entries of X, where α has coefficients over an
/// `rows × cols` grid; with `transposed`, the result is expressed over Xᵀ's source grid.
fn pull_back(alpha: &[i64], l: &[Vec<i64>], r: &[Vec<i64>], transposed: bool) -> Vec<i64> {
    let rows = l.len();
    let cols = r[0].len();
    let (xr, xc) = (l[0].len(), r.len());
    let mut out = vec![0i64; xr * xc];
    for i in 0..rows {
        for j in 0..cols {
            let a = alpha[i * cols + j];
            if a == 0 {
                continue;
            }
            for u in 0..xr {
                if l[i][u] == 0 {
                    continue;
                }
                for v in 0..xc {
                    if r[v][j] != 0 {
                        out[u * xc + v] += a * l[i][u] * r[v][j];
                    }
                }
            }
        }
    }
    if transposed {
        let mut t = vec![0i64; xr * xc];
        for u in 0..xr {
            for v in 0..xc {
                t[v * xr + u] = out[u * xc + v];
            }
        }
        t
    } else {
        out
    }
}

/// Task obtained by substituting the action into task `s`, as (A-coefficients, B-coefficients).
pub fn transform_task(alg: &BilinearAlgorithm, g: &GroupAction, s: usize) -> (Vec<i64>, Vec<i64>) {
    let from_a = pull_back(&alg.a_enc[s], &g.a.0, &g.a.1, g.transpose);
    let from_b = pull_back(&alg.b_enc[s], &g.b.0, &g.b.1, g.transpose);
    if g.transpose {
        (from_b, from_a)
    } else {
        (from_a, from_b)
    }
}

/// Returns c with x = c·y, if any.
fn proportional(x: &[i64], y: &[i64]) -> Option<Ratio<i64>> {
    let k = y.iter().position(|&v| v != 0)?;
    let c = Ratio::new(x[k], y[k]);
    if c == Ratio::from_integer(0) {
        return None;
    }
    x.iter().zip(y).all(|(&a, &b)| Ratio::from_integer(a) == c * b).then_some(c)
}

/// Signed permutation: task s maps to `perm[s]` scaled by `sign[s]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignedPermutation {
    pub perm: Vec<usize>,
    pub sign: Vec<i64>,
}

impl SignedPermutation {
    /// Cycles of the underlying permutation, 1-based, fixed points omitted.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.perm.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut c = Vec::new();
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                c.push(x + 1);
                x = self.perm[x];
            }
            if c.len() > 1 {
                out.push(c);
            }
        }
        out
    }

    /// Order of the underlying permutation.
    pub fn order(&self) -> usize {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.cycles().iter().fold(1, |acc, c| acc / gcd(acc, c.len()) * c.len())
    }

    /// Order of the signed permutation (smallest k with π^k = id and all signs +1).
    pub fn signed_order(&self) -> usize {
        let n = self.perm.len();
        let mut p: Vec<usize> = (0..n).collect();
        let mut sg = vec![1i64; n];
        for k in 1..=4 * n.max(1) {
            let np: Vec<usize> = (0..n).map(|s| self.perm[p[s]]).collect();
            let ns: Vec<i64> = (0..n).map(|s| sg[s] * self.sign[p[s]]).collect();
            p = np;
            sg = ns;
            if p.iter().enumerate().all(|(i, &x)| i == x) && sg.iter().all(|&x| x == 1) {
                return k;
            }
        }
        0
    }

    /// Renders cycles as `(6 14)(1 3 10 11)`.
    pub fn cycle_string(&self) -> String {
        self.cycles()
            .iter()
            .map(|c| format!("({})", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")))
            .collect()
    }
}

/// Finds the signed task permutation induced by the action, if the task set is invariant.
pub fn verify_action(alg: &BilinearAlgorithm, g: &GroupAction) -> Option<SignedPermutation> {
    if g.a.0.len() != alg.dims.l || !g.is_valid(alg.dims) {
        return None;
    }
    let r = alg.r();
    let mut perm = vec![usize::MAX; r];
    let mut sign = vec![0i64; r];
    let mut used = vec![false; r];
    for s in 0..r {
        let (a2, b2) = transform_task(alg, g, s);
        let mut found = false;
        for t in 0..r {
            if used[t] {
                continue;
            }
            if let (Some(ca), Some(cb)) = (proportional(&a2, &alg.a_enc[t]), proportional(&b2, &alg.b_enc[t])) {
                let c = ca * cb;
                if c == Ratio::from_integer(1) || c == Ratio::from_integer(-1) {
                    perm[s] = t;
                    sign[s] = c.to_integer();
                    used[t] = true;
                    found = true;
                    break;
                }
            }
        }
        if !found {
            return None;
        }
    }
    Some(SignedPermutation { perm, sign })
}

/// Serialized algorithm document.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmDoc {
    pub name: String,
    pub dims: [usize; 3],
    pub rank: usize,
    pub a_enc: Vec<Vec<i64>>,
    pub b_enc: Vec<Vec<i64>>,
    pub dec: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_note: Option<String>,
}

pub fn export_algorithm(alg: &BilinearAlgorithm) -> AlgorithmDoc {
    AlgorithmDoc {
        name: alg.name.clone(),
        dims: [alg.dims.l, alg.dims.m, alg.dims.n],
        rank: alg.r(),
        a_enc: alg.a_enc.clone(),
        b_enc: alg.b_enc.clone(),
        dec: alg.dec.clone(),
        field_note: None,
    }
}

/// Builds an algorithm from a document; a Brent failure sets `flagged` instead of failing.
pub fn import_algorithm(doc: &AlgorithmDoc) -> Result<BilinearAlgorithm> {
    if doc.dims.iter().any(|&x| x == 0) {
        return Err(Error::Malformed("dimensions must be positive".into()));
    }
    if doc.rank != doc.a_enc.len() {
        return Err(Error::Malformed(format!("rank {} but {} a_enc rows", doc.rank, doc.a_enc.len())));
    }
    let mut alg = BilinearAlgorithm {
        name: doc.name.clone(),
        dims: Dims::new(doc.dims[0], doc.dims[1], doc.dims[2]),
        a_enc: doc.a_enc.clone(),
        b_enc: doc.b_enc.clone(),
        dec: doc.dec.clone(),
        flagged: false,
    };
    alg.check_shapes().map_err(|e| Error::Malformed(e.to_string()))?;
    alg.flagged = verify_brent(&alg).is_err();
    Ok(alg)
}

pub fn import_algorithm_json(text: &str) -> Result<BilinearAlgorithm> {
    let doc: AlgorithmDoc = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    import_algorithm(&doc)
}

pub fn export_algorithm_json(alg: &BilinearAlgorithm) -> String {
    serde_json::to_string_pretty(&export_algorithm(alg)).expect("serializable")
}

/// Built-in algorithm by name.
pub fn builtin(name: &str) -> Result<BilinearAlgorithm> {
    match name {
        "strassen" => Ok(strassen()),
        "laderman" => Ok(laderman()),
        _ => {
            if let Some(rest) = name.strip_prefix("schoolbook") {
                let parts: Vec<usize> = rest
                    .trim_matches(|c| c == '<' || c == '>' || c == '(' || c == ')' || c == ':')
                    .split(',')
                    .filter_map(|x| x.trim().parse().ok())
                    .collect();
                if parts.len() == 3 && parts.iter().all(|&x| x > 0) {
                    return Ok(schoolbook(Dims::new(parts[0], parts[1], parts[2])));
                }
            }
            Err(Error::UnknownName(name.into()))
        }
    }
}

pub const BUILTIN_NAMES: &[&str] = &["strassen", "laderman", "schoolbook<l,m,n>"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldlin::{Fp, Mat, DEFAULT_PRIME};

    fn rand_grid(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Grid<Fp> {
        Grid::new(r, c, (0..r * c).map(|_| Fp::new(rng.gen_range(0..1000), DEFAULT_PRIME)).collect()).unwrap()
    }

    #[test]
    fn schoolbook_sizes() {
        assert_eq!(schoolbook(Dims::new(1, 1, 1)).dec, vec![vec![1]]);
        assert_eq!(schoolbook(Dims::new(2, 2, 2)).r(), 8);
        assert_eq!(schoolbook(Dims::new(3, 3, 3)).r(), 27);
        assert!(verify_brent(&schoolbook(Dims::new(2, 3, 4))).is_ok());
    }

    #[test]
    fn strassen_coefficients() {
        let s = strassen();
        assert_eq!(s.a_enc[0], vec![1, 0, 0, 1]);
        assert_eq!(s.dec[0], vec![1, 0, 0, 1, -1, 0, 1]);
        assert!(verify_brent(&s).is_ok());
    }

    #[test]
    fn laderman_coefficients() {
        let l = laderman();
        assert_eq!(l.r(), 23);
        assert_eq!(l.a_enc[5], parse_lin("A11", 'A', 3, 3));
        assert_eq!(l.b_enc[5], parse_lin("B11", 'B', 3, 3));
        let mut c11 = vec![0; 23];
        for t in [6, 14, 19] {
            c11[t - 1] = 1;
        }
        assert_eq!(l.dec[0], c11);
        assert!(verify_brent(&l).is_ok());
        let mut bad = l.clone();
        bad.a_enc[5][0] = -1;
        assert!(verify_brent(&bad).is_err());
    }

    #[test]
    fn evaluate_scalars() {
        let a = Grid::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Grid::new(2, 2, vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let c = evaluate(&strassen(), &a, &b).unwrap();
        assert_eq!(c.blocks, vec![19.0, 22.0, 43.0, 50.0]);
        assert!(evaluate(&strassen(), &a, &Grid::new(1, 2, vec![1.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn evaluate_matches_schoolbook() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for alg in [strassen(), laderman(), tensor_alg(&strassen(), &strassen())] {
            let d = alg.dims;
            let sb = schoolbook(d);
            for _ in 0..20 {
                let a = rand_grid(&mut rng, d.l, d.m);
                let b = rand_grid(&mut rng, d.m, d.n);
                assert_eq!(evaluate(&alg, &a, &b).unwrap(), evaluate(&sb, &a, &b).unwrap());
            }
        }
    }

    #[test]
    fn evaluate_noncommutative_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let blk = |rng: &mut ChaCha8Rng| Mat::from_fn(2, 2, |_, _| Fp::new(rng.gen_range(0..50), DEFAULT_PRIME));
        let a = Grid::new(2, 2, (0..4).map(|_| blk(&mut rng)).collect()).unwrap();
        let b = Grid::new(2, 2, (0..4).map(|_| blk(&mut rng)).collect()).unwrap();
        let c = evaluate(&strassen(), &a, &b).unwrap();
        let flat = |g: &Grid<Mat<Fp>>| Mat::from_fn(4, 4, |i, j| *g.at(i / 2, j / 2).at(i % 2, j % 2));
        let direct = flat(&a).mul(&flat(&b));
        assert_eq!(flat(&c), direct);
    }

    #[test]
    fn decode_combination_examples() {
        let w = decode_combination(&strassen(), &[-1, 1, -2, 2]);
        assert_eq!(w, vec![1, -4, 3, -3, 2, 2, -1]);
        let l = laderman();
        let mut cw = vec![0; 9];
        cw[1] = 1;
        cw[0] = -1;
        let expect = parse_tasks("L4 + L5 + L1 + L15 + L12 - L19", 'L', 23);
        assert_eq!(decode_combination(&l, &cw), expect);
        assert_eq!(decode_combination(&l, &[0; 9]), vec![0; 23]);
    }

    #[test]
    fn tensor_products() {
        let ss = tensor_alg(&strassen(), &strassen());
        assert_eq!((ss.dims, ss.r()), (Dims::new(4, 4, 4), 49));
        assert!(verify_brent(&ss).is_ok());
        let c = tensor_alg(&schoolbook(Dims::new(1, 2, 1)), &strassen());
        assert_eq!((c.dims, c.r()), (Dims::new(2, 4, 2), 14));
        assert!(verify_brent(&c).is_ok());
        let one = tensor_alg(&strassen(), &schoolbook(Dims::new(1, 1, 1)));
        assert_eq!((one.a_enc.clone(), one.b_enc.clone(), one.dec.clone()), (strassen().a_enc, strassen().b_enc, strassen().dec));
    }

    #[test]
    fn strassen_conjugation_order_three() {
        let p = verify_action(&strassen(), &GroupAction::strassen_conjugation()).expect("symmetry");
        assert_eq!(p.order(), 3);
        assert_eq!(3 % p.order(), 0);
        assert!(verify_action(&strassen(), &GroupAction::identity(Dims::new(2, 2, 2))).is_some());
    }

    #[test]
    fn laderman_rotation_cycles() {
        let p = verify_action(&laderman(), &GroupAction::laderman_rotation()).expect("symmetry");
        let cyc = p.cycles();
        for want in [vec![6, 14], vec![1, 3, 10, 11], vec![4, 16, 7, 12], vec![5, 17, 9, 13], vec![15, 2, 18, 8], vec![20, 21, 23, 22]] {
            let rotated = cyc.iter().any(|c| {
                c.len() == want.len() && (0..c.len()).any(|k| (0..c.len()).all(|i| c[(i + k) % c.len()] == want[i]))
            });
            assert!(rotated, "missing cycle {want:?} in {}", p.cycle_string());
        }
        assert_eq!(p.order(), 4);
    }

    #[test]
    fn laderman_reflection_involution() {
        let p = verify_action(&laderman(), &GroupAction::laderman_reflection()).expect("symmetry");
        let mut cyc = p.cycles();
        cyc.sort();
        assert_eq!(
            cyc,
            vec![vec![1, 3], vec![2, 5], vec![8, 9], vec![10, 11], vec![12, 16], vec![13, 18], vec![15, 17], vec![21, 22]]
        );
        assert!(verify_action(&laderman(), &GroupAction::plain_transpose_swap()).is_none());
    }

    #[test]
    fn document_round_trip() {
        let s = strassen();
        let back = import_algorithm_json(&export_algorithm_json(&s)).unwrap();
        assert_eq!(back, s);
        let sb = import_algorithm(&export_algorithm(&schoolbook(Dims::new(2, 2, 2)))).unwrap();
        assert_eq!(sb.r(), 8);
        assert!(!sb.flagged);
        let mut doc = export_algorithm(&s);
        doc.rank = 6;
        assert!(import_algorithm(&doc).is_err());
        let text = export_algorithm_json(&s).replacen("[\n      1,", "[\n      0.5,", 1);
        assert!(import_algorithm_json(&text).is_err());
        let mut bad = export_algorithm(&s);
        bad.dec[0][0] = 2;
        assert!(import_algorithm(&bad).unwrap().flagged);
    }
}
