//! Flattened task sets: lifted Pluto codes, tensor products, β checksums, unions and
//! level rotations, plus the named strategy catalog.

use crate::bilinear::{kron_grid, Dims};
use crate::decode::SpanOracle;
use crate::error::{invalid, Error, Result};
use crate::fieldlin::DEFAULT_PRIME;
use crate::pluto::{self, PlutoCode, TaskDef};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::sync::{Mutex, OnceLock};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    Axis,
    Beta,
}

/// A local code: `relations · S|tasks = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub kind: LineKind,
    pub levels: Vec<usize>,
    pub tasks: Vec<usize>,
    pub relations: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Structure {
    Prime(String),
    Tensor(Box<TaskSet>, Box<TaskSet>),
    Beta { inner: Box<TaskSet>, g: Vec<i64>, h: Vec<i64> },
    Union(Vec<TaskSet>),
    Permuted { inner: Box<TaskSet>, perm: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskSet {
    pub label: String,
    pub dims: Dims,
    pub levels: Vec<Dims>,
    pub tasks: Vec<TaskDef>,
    /// Per task and level: index of the prime task, or −(j+1) for β backup j.
    pub coords: Vec<Vec<i32>>,
    pub core: Vec<usize>,
    /// Per C entry (row-major), dense weights over tasks.
    pub targets: Vec<Vec<i64>>,
    pub lines: Vec<Line>,
    pub structure: Structure,
    pub modulus: Option<u64>,
}

/// Backups and parity of a β checksum over a task set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaGroup {
    pub g: Vec<i64>,
    pub h: Vec<i64>,
    pub backups: Vec<TaskDef>,
    /// Dense over the task set's tasks; supported on the core.
    pub parity: Vec<i64>,
}

impl TaskSet {
    pub fn n(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_core(&self) -> Vec<bool> {
        let mut v = vec![false; self.n()];
        for &c in &self.core {
            v[c] = true;
        }
        v
    }

    pub fn prime(&self) -> u64 {
        self.modulus.unwrap_or(DEFAULT_PRIME)
    }

    pub fn oracle(&self) -> SpanOracle {
        let a: Vec<Vec<i64>> = self.tasks.iter().map(|t| t.a.clone()).collect();
        let b: Vec<Vec<i64>> = self.tasks.iter().map(|t| t.b.clone()).collect();
        SpanOracle::new(self.dims, &a, &b, &self.targets, self.prime())
    }

    pub fn contains_union(&self) -> bool {
        match &self.structure {
            Structure::Prime(_) => false,
            Structure::Union(_) => true,
            Structure::Tensor(x, y) => x.contains_union() || y.contains_union(),
            Structure::Beta { inner, .. } | Structure::Permuted { inner, .. } => inner.contains_union(),
        }
    }

    /// Lines containing each task.
    pub fn line_index(&self) -> Vec<Vec<usize>> {
        let mut idx = vec![Vec::new(); self.n()];
        for (li, line) in self.lines.iter().enumerate() {
            for &t in &line.tasks {
                idx[t].push(li);
            }
        }
        idx
    }

    /// 1-based display name such as `S(1)(9)` or `S(3)(b50)`.
    pub fn task_name(&self, id: usize) -> String {
        let base = self.core_size_per_beta();
        let mut out = String::from("S");
        let mut last_beta = None;
        for &c in &self.coords[id] {
            if c >= 0 {
                out.push_str(&format!("({})", c + 1));
                last_beta = None;
            } else if last_beta != Some(c) {
                out.push_str(&format!("(b{})", base + (-c) as usize));
                last_beta = Some(c);
            }
        }
        out
    }

    fn core_size_per_beta(&self) -> usize {
        // β numbering continues after the core of the product the group was attached to.
        fn find(s: &Structure) -> Option<usize> {
            match s {
                Structure::Beta { inner, .. } => Some(find(&inner.structure).unwrap_or(inner.core.len())),
                Structure::Tensor(x, y) => find(&x.structure).or_else(|| find(&y.structure)),
                Structure::Union(parts) => parts.iter().find_map(|p| find(&p.structure)),
                Structure::Permuted { inner, .. } => find(&inner.structure),
                Structure::Prime(_) => None,
            }
        }
        find(&self.structure).unwrap_or(0)
    }

    /// Task values and C computed from the flattened coefficients.
    pub fn evaluate<R: crate::fieldlin::Ring>(
        &self,
        a: &crate::bilinear::Grid<R>,
        b: &crate::bilinear::Grid<R>,
    ) -> Result<(Vec<R>, crate::bilinear::Grid<R>)> {
        let d = self.dims;
        if (a.rows, a.cols, b.rows, b.cols) != (d.l, d.m, d.m, d.n) {
            return invalid("grid shapes do not match the task set");
        }
        let vals: Vec<R> = self
            .tasks
            .iter()
            .map(|t| crate::bilinear::combine(&t.a, &a.blocks).mul(&crate::bilinear::combine(&t.b, &b.blocks)))
            .collect();
        let c = self.targets.iter().map(|w| crate::bilinear::combine(w, &vals)).collect();
        Ok((vals, crate::bilinear::Grid::new(d.l, d.n, c)?))
    }
}

/// One task per code task, one axis line holding every relation.
pub fn lift(code: &PlutoCode) -> TaskSet {
    lift_named(code, &format!("{}", code.n()))
}

fn lift_named(code: &PlutoCode, label: &str) -> TaskSet {
    let n = code.n();
    let r = code.base.r();
    let targets = code
        .base
        .dec
        .iter()
        .map(|row| {
            let mut w = vec![0i64; n];
            w[..r].copy_from_slice(row);
            w
        })
        .collect();
    let rels = code.relation_rows();
    let lines = if rels.is_empty() {
        Vec::new()
    } else {
        vec![Line { kind: LineKind::Axis, levels: vec![0], tasks: (0..n).collect(), relations: rels }]
    };
    TaskSet {
        label: label.to_string(),
        dims: code.base.dims,
        levels: vec![code.base.dims],
        tasks: code.tasks(),
        coords: (0..n as i32).map(|s| vec![s]).collect(),
        core: (0..r).collect(),
        targets,
        lines,
        structure: Structure::Prime(label.to_string()),
        modulus: code.modulus(),
    }
}

fn merge_modulus(x: Option<u64>, y: Option<u64>) -> Result<Option<u64>> {
    match (x, y) {
        (Some(p), Some(q)) if p != q => Err(Error::UnsupportedField(format!("cannot combine F_{p} with F_{q}"))),
        _ => Ok(x.or(y)),
    }
}

/// Tensor product x ⊗ y; task (s,t) has id s·|y|+t.
pub fn tensor(x: &TaskSet, y: &TaskSet) -> Result<TaskSet> {
    if x.contains_union() || y.contains_union() {
        return Err(Error::UnsupportedComposition("tensor of a union; apply unions after tensoring".into()));
    }
    let modulus = merge_modulus(x.modulus, y.modulus)?;
    let (dx, dy) = (x.dims, y.dims);
    let dims = Dims::new(dx.l * dy.l, dx.m * dy.m, dx.n * dy.n);
    let (nx, ny) = (x.n(), y.n());
    let mut tasks = Vec::with_capacity(nx * ny);
    let mut coords = Vec::with_capacity(nx * ny);
    for s in 0..nx {
        for t in 0..ny {
            tasks.push(TaskDef {
                a: kron_grid(&x.tasks[s].a, dx.l, dx.m, &y.tasks[t].a, dy.l, dy.m),
                b: kron_grid(&x.tasks[s].b, dx.m, dx.n, &y.tasks[t].b, dy.m, dy.n),
            });
            let mut c = x.coords[s].clone();
            c.extend(&y.coords[t]);
            coords.push(c);
        }
    }
    let core = x.core.iter().flat_map(|&s| y.core.iter().map(move |&t| s * ny + t)).collect();
    let mut targets = vec![Vec::new(); dims.c_len()];
    for i in 0..dx.l {
        for k in 0..dx.n {
            let wx = &x.targets[i * dx.n + k];
            for i2 in 0..dy.l {
                for k2 in 0..dy.n {
                    let wy = &y.targets[i2 * dy.n + k2];
                    let mut w = vec![0i64; nx * ny];
                    for (s, &u) in wx.iter().enumerate() {
                        if u != 0 {
                            for (t, &v) in wy.iter().enumerate() {
                                w[s * ny + t] = u * v;
                            }
                        }
                    }
                    targets[(i * dy.l + i2) * dims.n + k * dy.n + k2] = w;
                }
            }
        }
    }
    let shift = x.levels.len();
    let mut lines = Vec::new();
    for line in &x.lines {
        for t in 0..ny {
            lines.push(Line {
                kind: line.kind,
                levels: line.levels.clone(),
                tasks: line.tasks.iter().map(|&s| s * ny + t).collect(),
                relations: line.relations.clone(),
            });
        }
    }
    for line in &y.lines {
        for s in 0..nx {
            lines.push(Line {
                kind: line.kind,
                levels: line.levels.iter().map(|&l| l + shift).collect(),
                tasks: line.tasks.iter().map(|&t| s * ny + t).collect(),
                relations: line.relations.clone(),
            });
        }
    }
    let mut levels = x.levels.clone();
    levels.extend(&y.levels);
    Ok(TaskSet {
        label: format!("{}x{}", x.label, y.label),
        dims,
        levels,
        tasks,
        coords,
        core,
        targets,
        lines,
        structure: Structure::Tensor(Box::new(x.clone()), Box::new(y.clone())),
        modulus,
    })
}

/// Backups (gA)_j ⋆ (Bh)_j for j < M and the parity over the core expressing g C h.
pub fn beta_checksum(ts: &TaskSet, g: &[i64], h: &[i64]) -> Result<BetaGroup> {
    let d = ts.dims;
    if g.len() != d.l || h.len() != d.n {
        return invalid(format!("g needs length {} and h length {}", d.l, d.n));
    }
    if g.iter().all(|&x| x == 0) || h.iter().all(|&x| x == 0) {
        return invalid("g and h must be nonzero");
    }
    let backups = (0..d.m)
        .map(|j| {
            let mut a = vec![0i64; d.a_len()];
            let mut b = vec![0i64; d.b_len()];
            for i in 0..d.l {
                a[i * d.m + j] = g[i];
            }
            for k in 0..d.n {
                b[j * d.n + k] = h[k];
            }
            TaskDef { a, b }
        })
        .collect();
    let mut parity = vec![0i64; ts.n()];
    for i in 0..d.l {
        for k in 0..d.n {
            let w = g[i] * h[k];
            if w != 0 {
                for (p, &x) in parity.iter_mut().zip(&ts.targets[i * d.n + k]) {
                    *p += w * x;
                }
            }
        }
    }
    Ok(BetaGroup { g: g.to_vec(), h: h.to_vec(), backups, parity })
}

/// The task set extended by a β group and its parity line.
pub fn with_beta(ts: &TaskSet, g: &[i64], h: &[i64]) -> Result<TaskSet> {
    let grp = beta_checksum(ts, g, h)?;
    let mut out = ts.clone();
    let existing = ts.coords.iter().filter(|c| c.iter().any(|&x| x < 0)).count() as i32;
    let support: Vec<usize> = (0..ts.n()).filter(|&s| grp.parity[s] != 0).collect();
    let mut line_tasks = support.clone();
    let mut rel: Vec<i64> = support.iter().map(|&s| grp.parity[s]).collect();
    for (j, bk) in grp.backups.iter().enumerate() {
        line_tasks.push(out.tasks.len());
        rel.push(-1);
        out.tasks.push(bk.clone());
        out.coords.push(vec![-(existing + j as i32 + 1); ts.levels.len()]);
        for w in out.targets.iter_mut() {
            w.push(0);
        }
    }
    out.lines.push(Line { kind: LineKind::Beta, levels: (0..ts.levels.len()).collect(), tasks: line_tasks, relations: vec![rel] });
    out.label = format!("{}+b", ts.label);
    out.structure = Structure::Beta { inner: Box::new(ts.clone()), g: g.to_vec(), h: h.to_vec() };
    Ok(out)
}

/// Union with tasks identified by equal coefficients.
pub fn union(parts: &[TaskSet]) -> Result<TaskSet> {
    union_with(parts, &[])
}

/// Union; `identify` lists ((part, id), (part, id)) pairs that must coincide.
pub fn union_with(parts: &[TaskSet], identify: &[((usize, usize), (usize, usize))]) -> Result<TaskSet> {
    let Some(first) = parts.first() else { return invalid("union of nothing") };
    if parts.iter().any(|p| p.dims != first.dims) {
        return invalid("union parts must share dimensions");
    }
    for &((p, i), (q, j)) in identify {
        let (Some(x), Some(y)) = (parts.get(p).and_then(|t| t.tasks.get(i)), parts.get(q).and_then(|t| t.tasks.get(j))) else {
            return Err(Error::InvalidIdentification(format!("no task ({p},{i}) or ({q},{j})")));
        };
        if x != y {
            return Err(Error::InvalidIdentification(format!(
                "task {i} of part {p} and task {j} of part {q} have different coefficients"
            )));
        }
    }
    let mut modulus = None;
    let mut index: HashMap<TaskDef, usize> = HashMap::new();
    let mut tasks = Vec::new();
    let mut coords = Vec::new();
    let mut core = HashSet::new();
    let mut lines = Vec::new();
    let mut seen_lines = HashSet::new();
    let mut first_map = Vec::new();
    for (pi, part) in parts.iter().enumerate() {
        modulus = merge_modulus(modulus, part.modulus)?;
        let map: Vec<usize> = part
            .tasks
            .iter()
            .enumerate()
            .map(|(s, t)| {
                *index.entry(t.clone()).or_insert_with(|| {
                    tasks.push(t.clone());
                    coords.push(part.coords[s].clone());
                    tasks.len() - 1
                })
            })
            .collect();
        core.extend(part.core.iter().map(|&c| map[c]));
        for line in &part.lines {
            let mut pairs: Vec<(usize, usize)> = line.tasks.iter().enumerate().map(|(k, &t)| (map[t], k)).collect();
            pairs.sort();
            let ids: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let rels: Vec<Vec<i64>> = line.relations.iter().map(|r| pairs.iter().map(|&(_, k)| r[k]).collect()).collect();
            if seen_lines.insert((ids.clone(), rels.clone())) {
                lines.push(Line { kind: line.kind, levels: line.levels.clone(), tasks: ids, relations: rels });
            }
        }
        if pi == 0 {
            first_map = map;
        }
    }
    let n = tasks.len();
    let targets = first
        .targets
        .iter()
        .map(|w| {
            let mut out = vec![0i64; n];
            for (s, &x) in w.iter().enumerate() {
                out[first_map[s]] += x;
            }
            out
        })
        .collect();
    let mut core: Vec<usize> = core.into_iter().collect();
    core.sort();
    if parts.len() == 1 {
        return Ok(first.clone());
    }
    Ok(TaskSet {
        label: parts.iter().map(|p| p.label.clone()).collect::<Vec<_>>().join("+"),
        dims: first.dims,
        levels: first.levels.clone(),
        tasks,
        coords,
        core,
        targets,
        lines,
        structure: Structure::Union(parts.to_vec()),
        modulus,
    })
}

fn permute_index(idx: usize, sizes: &[usize], perm: &[usize]) -> usize {
    let mut digits = vec![0; sizes.len()];
    let mut x = idx;
    for k in (0..sizes.len()).rev() {
        digits[k] = x % sizes[k];
        x /= sizes[k];
    }
    perm.iter().fold(0, |acc, &k| acc * sizes[k] + digits[k])
}

/// Reorders levels: new level k is old level `perm[k]`.
pub fn permute_levels(ts: &TaskSet, perm: &[usize]) -> Result<TaskSet> {
    let k = ts.levels.len();
    let mut check = perm.to_vec();
    check.sort();
    if check != (0..k).collect::<Vec<_>>() {
        return invalid(format!("{perm:?} is not a permutation of {k} levels"));
    }
    let ls: Vec<usize> = ts.levels.iter().map(|d| d.l).collect();
    let ms: Vec<usize> = ts.levels.iter().map(|d| d.m).collect();
    let ns: Vec<usize> = ts.levels.iter().map(|d| d.n).collect();
    let d = ts.dims;
    let remap = |v: &[i64], rs: &[usize], cs: &[usize], rows: usize, cols: usize| -> Vec<i64> {
        let mut out = vec![0i64; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                out[permute_index(i, rs, perm) * cols + permute_index(j, cs, perm)] = v[i * cols + j];
            }
        }
        out
    };
    let tasks = ts
        .tasks
        .iter()
        .map(|t| TaskDef { a: remap(&t.a, &ls, &ms, d.l, d.m), b: remap(&t.b, &ms, &ns, d.m, d.n) })
        .collect();
    let mut targets = vec![Vec::new(); d.c_len()];
    for i in 0..d.l {
        for kk in 0..d.n {
            targets[permute_index(i, &ls, perm) * d.n + permute_index(kk, &ns, perm)] = ts.targets[i * d.n + kk].clone();
        }
    }
    let mut inv = vec![0; k];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let lines = ts
        .lines
        .iter()
        .map(|l| {
            let mut levels: Vec<usize> = l.levels.iter().map(|&x| inv[x]).collect();
            levels.sort();
            Line { levels, ..l.clone() }
        })
        .collect();
    Ok(TaskSet {
        label: format!("rho({})", ts.label),
        dims: Dims::new(ls.iter().product(), ms.iter().product(), ns.iter().product()),
        levels: perm.iter().map(|&x| ts.levels[x]).collect(),
        tasks,
        coords: ts.coords.iter().map(|c| perm.iter().map(|&x| c[x]).collect()).collect(),
        core: ts.core.clone(),
        targets,
        lines,
        structure: Structure::Permuted { inner: Box::new(ts.clone()), perm: perm.to_vec() },
        modulus: ts.modulus,
    })
}

/// The cyclic level rotation: level 1 content moves to level k, the others shift down.
pub fn rho(ts: &TaskSet) -> Result<TaskSet> {
    let k = ts.levels.len();
    let perm: Vec<usize> = (0..k).map(|i| (i + 1) % k).collect();
    permute_levels(ts, &perm)
}

/// P ∪ ρP ∪ ρ²P ∪ … over all level rotations.
pub fn cyc(ts: &TaskSet) -> Result<TaskSet> {
    let mut parts = vec![ts.clone()];
    for _ in 1..ts.levels.len() {
        parts.push(rho(parts.last().unwrap())?);
    }
    let mut out = union(&parts)?;
    out.label = format!("cyc {}", ts.label);
    Ok(out)
}

pub const BETA_G: [i64; 4] = [1, 1, 1, 1];
pub const BETA_H: [i64; 4] = [3, 1, 1, 2];

static CACHE: OnceLock<std::sync::Mutex<HashMap<String, TaskSet>>> = OnceLock::new();

fn cached(name: &str, build: impl FnOnce() -> Result<TaskSet>) -> Result<TaskSet> {
    let cache = CACHE.get_or_init(Default::default);
    if let Some(ts) = cache.lock().unwrap().get(name) {
        return Ok(ts.clone());
    }
    let ts = build()?;
    cache.lock().unwrap().insert(name.to_string(), ts.clone());
    Ok(ts)
}

/// 7·7 with `groups` β checksums; the first is the fixed [1 1 1 1], [3 1 1 2] group and the
/// rest come from a seeded draw of vectors with entries in [-BETA_BOUND, BETA_BOUND]
/// (first draw for which any `groups` erasures stay decodable).
pub fn beta_strategy(groups: usize) -> Result<TaskSet> {
    static CACHE: Mutex<Option<HashMap<usize, TaskSet>>> = Mutex::new(None);
    if groups == 0 {
        return invalid("at least one β group");
    }
    if let Some(ts) = CACHE.lock().unwrap().as_ref().and_then(|m| m.get(&groups)) {
        return Ok(ts.clone());
    }
    let mut ts = if groups == 1 {
        let s7 = lift_named(&pluto::pluto_222(0)?, "7");
        with_beta(&tensor(&s7, &s7)?, &BETA_G, &BETA_H)?
    } else {
        let base = beta_strategy(groups - 1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(groups as u64);
        let mut witnesses = Vec::new();
        let mut found = None;
        for _ in 0..pluto::CHARON_SCAN_LIMIT {
            let g: Vec<i64> = (0..4).map(|_| rng.gen_range(-BETA_BOUND..=BETA_BOUND)).collect();
            let h: Vec<i64> = (0..4).map(|_| rng.gen_range(-BETA_BOUND..=BETA_BOUND)).collect();
            let Ok(cand) = with_beta(&base, &g, &h) else { continue };
            if pluto::tolerates_cached(&cand.oracle(), groups, &mut witnesses) {
                found = Some(cand);
                break;
            }
        }
        found.ok_or_else(|| Error::SearchFailed(format!("no β group tolerating {groups} erasures")))?
    };
    ts.label = format!("{}", 49 + 4 * groups);
    CACHE.lock().unwrap().get_or_insert_with(HashMap::new).insert(groups, ts.clone());
    Ok(ts)
}

/// Entry bound for searched β groups. Entries in [-3, 3] almost never give a second group
/// that tolerates two erasures.
pub const BETA_BOUND: i64 = 100;

/// Every erasure pattern of up to `e` tasks keeps C decodable.
pub fn tolerates(ts: &TaskSet, e: usize) -> bool {
    pluto::tolerates_cached(&ts.oracle(), e, &mut Vec::new())
}

/// Prime factor names understood by the label parser.
pub const FACTORS: &[&str] = &["7", "9", "11", "13", "23", "26", "29", "32", "35", "53", "57", "61", "charon"];

pub fn factor(name: &str) -> Result<TaskSet> {
    cached(name, || {
        let code = match name {
            "7" | "9" | "11" | "13" => pluto::pluto_222((name.parse::<usize>().unwrap() - 7) / 2)?,
            "23" | "26" | "29" => pluto::pluto_333((name.parse::<usize>().unwrap() - 23) / 3, 0)?,
            "32" => pluto::pluto_333(2, 1)?,
            "35" => pluto::pluto_333(2, 2)?,
            "53" => return beta_strategy(1),
            "57" => return beta_strategy(2),
            "61" => return beta_strategy(3),
            "charon" => pluto::charon_code()?,
            _ => return Err(Error::UnknownName(format!("factor {name:?}; known: {}", FACTORS.join(", ")))),
        };
        Ok(lift_named(&code, name))
    })
}

/// ASCII normal form of a strategy label.
pub fn normalize_label(label: &str) -> String {
    let s = label
        .replace(['·', '⋅', '*', '×'], "x")
        .replace('∪', "+")
        .replace('ρ', "rho")
        .to_lowercase();
    let s: String = s.split_whitespace().collect::<Vec<_>>().join("");
    let terms = split_top(&s, '+');
    terms
        .iter()
        .map(|t| match t.strip_prefix("cyc") {
            Some(rest) => format!("cyc {}", rest.trim_start_matches(['(', ' ']).trim_end_matches(')')),
            None => t.to_string(),
        })
        .collect::<Vec<_>>()
        .join("+")
}

fn split_top(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if ch == sep && depth == 0 {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(ch);
        }
    }
    out.push(cur);
    out
}

fn parse_term(t: &str) -> Result<TaskSet> {
    let t = t.trim();
    if let Some(rest) = t.strip_prefix("cyc") {
        return cyc(&parse_term(rest.trim())?);
    }
    if let Some(inner) = t.strip_prefix("rho(").and_then(|r| r.strip_suffix(')')) {
        return rho(&parse_term(inner)?);
    }
    if let Some(inner) = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        return parse_term(inner);
    }
    let names: Vec<&str> = t.split('x').collect();
    if names.iter().any(|n| n.is_empty()) {
        return Err(Error::UnknownName(format!("malformed term {t:?}")));
    }
    let mut acc = factor(names[0])?;
    for n in &names[1..] {
        acc = tensor(&acc, &factor(n)?)?;
    }
    Ok(acc)
}

/// Builds a strategy from labels such as "9x9", "7x9+53", "cyc 7x53", "9x9x9+cyc 9x53".
pub fn named_strategy(label: &str) -> Result<TaskSet> {
    let norm = normalize_label(label);
    if norm.is_empty() {
        return Err(Error::UnknownName("empty label".into()));
    }
    let parts = split_top(&norm, '+').iter().map(|t| parse_term(t)).collect::<Result<Vec<_>>>()?;
    let mut ts = union(&parts)?;
    ts.label = norm;
    Ok(ts)
}

/// Labels named in the catalog of unions and figures.
pub const CATALOG: &[&str] = &[
    "9x9",
    "11x11",
    "7x9+53",
    "9x9+53",
    "7x9+9x7+53",
    "9x11+11x9+57",
    "9x9x9",
    "cyc 7x7x9",
    "cyc 7x53",
    "cyc 7x57",
    "9x9x9+cyc 9x53",
    "7x9x7+7x53+53x7",
    "26x29",
    "charon",
];

/// Serialized composition tree.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum NodeDoc {
    Prime { name: String },
    Tensor { left: Box<NodeDoc>, right: Box<NodeDoc> },
    Beta { inner: Box<NodeDoc>, g: Vec<i64>, h: Vec<i64> },
    Union { parts: Vec<NodeDoc> },
    Permuted { inner: Box<NodeDoc>, perm: Vec<usize> },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SchemeDoc {
    pub label: String,
    pub tasks: usize,
    pub core: usize,
    pub dims: [usize; 3],
    pub tree: NodeDoc,
}

fn node_doc(ts: &TaskSet) -> NodeDoc {
    match &ts.structure {
        Structure::Prime(name) => NodeDoc::Prime { name: name.clone() },
        Structure::Tensor(x, y) => NodeDoc::Tensor { left: Box::new(node_doc(x)), right: Box::new(node_doc(y)) },
        Structure::Beta { inner, g, h } => NodeDoc::Beta { inner: Box::new(node_doc(inner)), g: g.clone(), h: h.clone() },
        Structure::Union(parts) => NodeDoc::Union { parts: parts.iter().map(node_doc).collect() },
        Structure::Permuted { inner, perm } => NodeDoc::Permuted { inner: Box::new(node_doc(inner)), perm: perm.clone() },
    }
}

pub fn export_scheme(ts: &TaskSet) -> SchemeDoc {
    SchemeDoc {
        label: ts.label.clone(),
        tasks: ts.n(),
        core: ts.core.len(),
        dims: [ts.dims.l, ts.dims.m, ts.dims.n],
        tree: node_doc(ts),
    }
}

fn build_node(node: &NodeDoc) -> Result<TaskSet> {
    match node {
        NodeDoc::Prime { name } => factor(name),
        NodeDoc::Tensor { left, right } => tensor(&build_node(left)?, &build_node(right)?),
        NodeDoc::Beta { inner, g, h } => with_beta(&build_node(inner)?, g, h),
        NodeDoc::Union { parts } => union(&parts.iter().map(build_node).collect::<Result<Vec<_>>>()?),
        NodeDoc::Permuted { inner, perm } => permute_levels(&build_node(inner)?, perm),
    }
}

pub fn import_scheme(doc: &SchemeDoc) -> Result<TaskSet> {
    let mut ts = build_node(&doc.tree)?;
    if ts.n() != doc.tasks || ts.core.len() != doc.core {
        return Err(Error::Malformed(format!("tree builds {} tasks / {} core, document says {} / {}", ts.n(), ts.core.len(), doc.tasks, doc.core)));
    }
    ts.label = doc.label.clone();
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::{evaluate, schoolbook, Grid};
    use crate::fieldlin::{Fp, Ring};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Grid<Fp> {
        Grid::new(rows, cols, (0..rows * cols).map(|_| Fp::new(rng.gen_range(0..1000), DEFAULT_PRIME)).collect()).unwrap()
    }

    fn matches_schoolbook(ts: &TaskSet, trials: usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = ts.dims;
        for _ in 0..trials {
            let a = random_grid(d.l, d.m, &mut rng);
            let b = random_grid(d.m, d.n, &mut rng);
            let (_, c) = ts.evaluate(&a, &b).unwrap();
            let want = evaluate(&schoolbook(d), &a, &b).unwrap();
            assert_eq!(c.blocks, want.blocks, "{}", ts.label);
        }
    }

    #[test]
    fn lifted_counts() {
        let t = lift(&pluto::pluto_222(1).unwrap());
        assert_eq!((t.n(), t.core.len()), (9, 7));
        let t = lift(&pluto::pluto_222(0).unwrap());
        assert_eq!((t.n(), t.core.len(), t.lines.len()), (7, 7, 0));
        let t = lift(&pluto::pluto_333(2, 0).unwrap());
        assert_eq!((t.n(), t.core.len()), (29, 23));
    }

    #[test]
    fn tensor_counts_and_lines() {
        let t = named_strategy("9x9").unwrap();
        assert_eq!((t.n(), t.core.len(), t.lines.len()), (81, 49, 18));
        assert!(t.lines.iter().all(|l| l.tasks.len() == 9 && l.relations.len() == 1));
        assert_eq!(named_strategy("26x29").unwrap().n(), 754);
        let one = lift(&PlutoCode::plain(schoolbook(Dims::new(1, 1, 1))));
        let nine = factor("9").unwrap();
        let t = tensor(&nine, &one).unwrap();
        assert_eq!(t.tasks, nine.tasks);
        assert_eq!(t.targets, nine.targets);
        matches_schoolbook(&named_strategy("9x9").unwrap(), 5);
    }

    #[test]
    fn tensor_matches_nested_evaluation() {
        // Task (s,t) applies t's combination to the sub-blocks of s's factors.
        let nine = factor("9").unwrap();
        let t = named_strategy("9x9").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_grid(4, 4, &mut rng);
        for s in 0..9 {
            let outer: Vec<Fp> = (0..4)
                .map(|kl| {
                    let (k, l) = (kl / 2, kl % 2);
                    let mut acc = Fp::new(0, DEFAULT_PRIME);
                    for ij in 0..4 {
                        let (i, j) = (ij / 2, ij % 2);
                        acc = acc.add(&a.at(i * 2 + k, j * 2 + l).scale(nine.tasks[s].a[ij]));
                    }
                    acc
                })
                .collect();
            for u in 0..9 {
                let nested = crate::bilinear::combine(&nine.tasks[u].a, &outer);
                let flat = crate::bilinear::combine(&t.tasks[s * 9 + u].a, &a.blocks);
                assert_eq!(nested, flat);
            }
        }
    }

    #[test]
    fn beta_matrix() {
        let s7 = factor("7").unwrap();
        let ss = tensor(&s7, &s7).unwrap();
        let grp = beta_checksum(&ss, &BETA_G, &BETA_H).unwrap();
        let want = [
            [7, 1, 6, 8, -1, 3, 4],
            [1, 3, -2, 4, -3, -1, 2],
            [6, -2, 8, 4, 2, 4, 2],
            [8, 4, 4, 12, -4, 2, 6],
            [-1, -3, 2, -4, 3, 1, -2],
            [3, -1, 4, 2, 1, 2, 1],
            [4, 2, 2, 6, -2, 1, 3],
        ];
        for s in 0..7 {
            for t in 0..7 {
                assert_eq!(grp.parity[s * 7 + t], want[s][t]);
                assert_eq!(grp.parity[s * 7 + t], grp.parity[t * 7 + s]);
            }
        }
        assert_eq!(grp.backups.len(), 4);
        let b50 = &grp.backups[0];
        assert_eq!(b50.a, crate::bilinear::parse_lin("A11 + A21 + A31 + A41", 'A', 4, 4));
        assert_eq!(b50.b, crate::bilinear::parse_lin("3B11 + B12 + B13 + 2B14", 'B', 4, 4));
        assert!(beta_checksum(&ss, &[0; 4], &BETA_H).is_err());
        let f53 = factor("53").unwrap();
        assert_eq!((f53.n(), f53.core.len()), (53, 49));
        matches_schoolbook(&f53, 3);
        assert_eq!(f53.task_name(49), "S(b50)");
        assert_eq!(f53.task_name(8), "S(2)(2)");
        // Any 52 of 53 decode.
        assert!(tolerates(&f53, 1));
    }

    #[test]
    fn union_counts() {
        assert_eq!(named_strategy("7x9+53").unwrap().n(), 67);
        assert_eq!(named_strategy("9x9+53").unwrap().n(), 85);
        let f = named_strategy("7x9+9x7+53").unwrap();
        assert_eq!((f.n(), f.core.len()), (81, 49));
        matches_schoolbook(&f, 3);
        let x = named_strategy("9x9").unwrap();
        let u = union(&[x.clone(), x.clone()]).unwrap();
        assert_eq!((u.n(), u.lines.len(), u.core.len()), (x.n(), x.lines.len(), x.core.len()));
        let y = factor("9").unwrap();
        let z = tensor(&y, &y).unwrap();
        assert!(matches!(union_with(&[x.clone(), z], &[((0, 0), (1, 1))]), Err(Error::InvalidIdentification(_))));
        assert!(matches!(tensor(&u, &y), Err(Error::UnsupportedComposition(_))));
    }

    #[test]
    fn rotation() {
        let a = named_strategy("9x53").unwrap();
        let b = named_strategy("53x9").unwrap();
        let r = rho(&a).unwrap();
        let key = |t: &TaskSet| {
            let mut v: Vec<TaskDef> = t.tasks.clone();
            v.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
            v
        };
        assert_eq!(key(&r), key(&b));
        assert_eq!(key(&rho(&rho(&b).unwrap()).unwrap()), key(&a));
        matches_schoolbook(&r, 2);
        let c = named_strategy("cyc 7x7x9").unwrap();
        assert_eq!(c.n(), 343 + 3 * 98);
        matches_schoolbook(&c, 1);
        assert_eq!(normalize_label("9·9·9 ∪ Cyc 9·53"), "9x9x9+cyc 9x53");
        assert!(matches!(named_strategy("9x8"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn table_two_counts() {
        for (label, n) in [("9x26", 234), ("26x53", 1378), ("9x9x9", 729)] {
            let t = named_strategy(label).unwrap();
            assert_eq!(t.n(), n, "{label}");
        }
        for (x, y) in [("26", "26"), ("23", "26"), ("26", "29")] {
            let (fx, fy) = (factor(x).unwrap(), factor(y).unwrap());
            let t = tensor(&fx, &fy).unwrap();
            if fx.n() <= fx.dims.naive() && fy.n() <= fy.dims.naive() {
                assert!(t.n() <= t.dims.naive());
            }
        }
    }

    #[test]
    fn document_round_trip() {
        let t = named_strategy("7x9+9x7+53").unwrap();
        let doc = export_scheme(&t);
        let text = serde_json::to_string(&doc).unwrap();
        let back = import_scheme(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.tasks, t.tasks);
        assert_eq!(back.label, "7x9+9x7+53");
    }
}
