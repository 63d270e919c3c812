//! Erasure decodability: span oracle, peeling decoder, stopping sets.

use crate::bilinear::Dims;
use crate::fieldlin::{k_subsets, left_kernel_mod, modp, mulm, rank_mod, rank_rational, rref_mod, vec_modp, EchelonBasis};
use crate::pluto::PlutoCode;
use crate::scheme::{LineKind, TaskSet};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeSet, VecDeque};

/// Decides whether the targets lie in the span of the available task tensors.
///
/// Uses the left kernel K of the task-tensor matrix: with erased set U, the targets are
/// recoverable iff every target weight restricted to U lies in the row space of K|U.
#[derive(Clone, Debug)]
pub struct SpanOracle {
    p: u64,
    n: usize,
    tensors: Vec<Vec<u64>>,
    kernel: Vec<Vec<u64>>,
    targets: Vec<Vec<u64>>,
}

impl SpanOracle {
    /// `targets` are task weights w with Σ w_s a_s⊗b_s equal to each target tensor.
    pub fn new(dims: Dims, a: &[Vec<i64>], b: &[Vec<i64>], targets: &[Vec<i64>], p: u64) -> Self {
        let _ = dims;
        let tensors: Vec<Vec<u64>> = a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let (x, y) = (vec_modp(x, p), vec_modp(y, p));
                x.iter().flat_map(|&u| y.iter().map(move |&v| mulm(u, v, p))).collect()
            })
            .collect();
        let kernel = left_kernel_mod(&tensors, p);
        let targets = targets.iter().map(|w| vec_modp(w, p)).collect();
        SpanOracle { p, n: tensors.len(), tensors, kernel, targets }
    }

    /// Oracle whose kernel is replaced by the span of known relations. Its answers are
    /// sound but may reject patterns the full kernel would accept; tensors are unavailable.
    pub fn from_relations(relations: &[Vec<i64>], targets: &[Vec<i64>], p: u64) -> Self {
        let n = targets.first().map_or(0, |t| t.len());
        SpanOracle {
            p,
            n,
            tensors: Vec::new(),
            kernel: relations.iter().map(|r| vec_modp(r, p)).collect(),
            targets: targets.iter().map(|w| vec_modp(w, p)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn kernel(&self) -> &[Vec<u64>] {
        &self.kernel
    }

    pub fn target_weights(&self) -> &[Vec<u64>] {
        &self.targets
    }

    pub fn decodable_missing(&self, missing: &[usize]) -> bool {
        if missing.is_empty() {
            return true;
        }
        let live: Vec<&Vec<u64>> =
            self.targets.iter().filter(|w| missing.iter().any(|&u| w[u] != 0)).collect();
        if live.is_empty() {
            return true;
        }
        let mut basis = EchelonBasis::new(missing.len(), self.p);
        for k in &self.kernel {
            let r: Vec<u64> = missing.iter().map(|&u| k[u]).collect();
            if r.iter().any(|&x| x != 0) {
                basis.insert(r);
                if basis.rank() == missing.len() {
                    return true;
                }
            }
        }
        live.iter().all(|w| basis.contains(&missing.iter().map(|&u| w[u]).collect::<Vec<_>>()))
    }

    pub fn decodable(&self, available: &[bool]) -> bool {
        let missing: Vec<usize> = (0..self.n).filter(|&i| !available[i]).collect();
        self.decodable_missing(&missing)
    }

    /// Same question answered by comparing ranks of the available tensors with and
    /// without the targets.
    pub fn decodable_direct(&self, available: &[bool]) -> bool {
        assert!(self.n == 0 || !self.tensors.is_empty(), "relation-only oracle has no tensors");
        let avail: Vec<Vec<u64>> =
            (0..self.n).filter(|&i| available[i]).map(|i| self.tensors[i].clone()).collect();
        let mut all = avail.clone();
        for w in &self.targets {
            let dim = self.tensors.first().map_or(0, |t| t.len());
            let mut t = vec![0u64; dim];
            for (s, &c) in w.iter().enumerate() {
                if c != 0 {
                    for (x, &y) in t.iter_mut().zip(&self.tensors[s]) {
                        *x = (*x + mulm(c, y, self.p)) % self.p;
                    }
                }
            }
            all.push(t);
        }
        rank_mod(&avail, self.p) == rank_mod(&all, self.p)
    }
}

/// Reduces an i64 weight vector into F_p.
pub fn weight_mod(w: &[i64], p: u64) -> Vec<u64> {
    w.iter().map(|&x| modp(x, p)).collect()
}

/// Oracle decision for a task set and availability mask.
pub fn oracle_decodable(ts: &TaskSet, available: &[bool]) -> bool {
    ts.oracle().decodable(available)
}

/// Pinned unknowns are those whose unit vector lies in the row space of the relations
/// restricted to the unknown columns.
fn pinned_in(rows: Vec<Vec<u64>>, p: u64) -> (Vec<Vec<u64>>, Vec<usize>) {
    let mut m: Vec<Vec<u64>> = rows.into_iter().filter(|r| r.iter().any(|&x| x != 0)).collect();
    let piv = rref_mod(&mut m, p);
    m.truncate(piv.len());
    let pinned = m
        .iter()
        .zip(&piv)
        .filter(|(row, _)| row.iter().filter(|&&x| x != 0).count() == 1)
        .map(|(_, &c)| c)
        .collect();
    (m, pinned)
}

fn in_rref_span(rref: &[Vec<u64>], v: &[u64], p: u64) -> bool {
    let mut w = v.to_vec();
    for row in rref {
        let Some(piv) = row.iter().position(|&x| x != 0) else { continue };
        let f = w[piv];
        if f != 0 {
            for (x, &y) in w.iter_mut().zip(row) {
                *x = crate::fieldlin::subm(*x, mulm(f, y, p), p);
            }
        }
    }
    w.iter().all(|&x| x == 0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErasureSolve {
    pub recovered: Vec<usize>,
    pub unresolved: Vec<usize>,
    pub c_decodable: bool,
}

/// Recovers erased symbols of a prime code from the full relation space.
pub fn prime_erasure_solve(code: &PlutoCode, available: &[bool]) -> ErasureSolve {
    let oracle = code.oracle();
    let p = oracle.prime();
    let missing: Vec<usize> = (0..code.n()).filter(|&i| !available[i]).collect();
    let rows = oracle.kernel().iter().map(|k| missing.iter().map(|&u| k[u]).collect()).collect();
    let (_, pinned) = pinned_in(rows, p);
    let recovered: Vec<usize> = pinned.iter().map(|&c| missing[c]).collect();
    let unresolved = missing.iter().copied().filter(|u| !recovered.contains(u)).collect();
    ErasureSolve { recovered, unresolved, c_decodable: oracle.decodable_missing(&missing) }
}

/// Bipartite graph whose edges are unknown cells of a two-level array.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteErasureGraph {
    pub left: usize,
    pub right: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl BipartiteErasureGraph {
    /// Cells map to vertices through `left_map` / `right_map`; repeated edges collapse.
    pub fn from_cells(cells: &[(usize, usize)], left_map: &[usize], right_map: &[usize]) -> Self {
        let left = left_map.iter().max().map_or(0, |m| m + 1);
        let right = right_map.iter().max().map_or(0, |m| m + 1);
        let edges = cells.iter().map(|&(s, t)| (left_map[s], right_map[t])).collect();
        BipartiteErasureGraph { left, right, edges }
    }

    /// Unknown cells of a two-level task set with identity vertex maps.
    pub fn of_task_set(ts: &TaskSet, unknown: &[usize], left_map: &[usize], right_map: &[usize]) -> Self {
        let cells: Vec<(usize, usize)> =
            unknown.iter().map(|&u| (ts.coords[u][0] as usize, ts.coords[u][1] as usize)).collect();
        Self::from_cells(&cells, left_map, right_map)
    }
}

/// Repeatedly deletes vertices of degree below k with their edges.
pub fn k_core(g: &BipartiteErasureGraph, k: usize) -> BipartiteErasureGraph {
    let mut edges = g.edges.clone();
    loop {
        let mut dl = vec![0usize; g.left];
        let mut dr = vec![0usize; g.right];
        for &(s, t) in &edges {
            dl[s] += 1;
            dr[t] += 1;
        }
        let before = edges.len();
        edges.retain(|&(s, t)| dl[s] >= k && dr[t] >= k);
        if edges.len() == before {
            return BipartiteErasureGraph { left: g.left, right: g.right, edges };
        }
    }
}

/// Vertex map merging backups in pairs after the first `r` indices (eleven-task Strassen: 8,9 and 10,11).
pub fn merged_vertex_map(n: usize, r: usize) -> Vec<usize> {
    (0..n).map(|i| if i < r { i } else { r + (i - r) / 2 }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PeelConfig {
    pub use_beta: bool,
    /// Largest number of unknown core symbols for the bounded exact solve; 0 disables it.
    pub stall_cap: usize,
}

impl Default for PeelConfig {
    fn default() -> Self {
        PeelConfig { use_beta: true, stall_cap: 64 }
    }
}

impl PeelConfig {
    /// Only line-local repairs.
    pub fn local() -> Self {
        PeelConfig { use_beta: false, stall_cap: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    AxisRepair,
    BetaCut,
    BoundedSolve,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeelEvent {
    pub rule: Rule,
    pub tasks: Vec<usize>,
}

/// Precomputed per-task-set data shared by many peels.
#[derive(Clone, Debug)]
pub struct PeelContext<'a> {
    pub ts: &'a TaskSet,
    pub cfg: PeelConfig,
    p: u64,
    line_index: Vec<Vec<usize>>,
    relations: Vec<Vec<Vec<u64>>>,
    is_core: Vec<bool>,
    targets: Vec<Vec<(usize, u64)>>,
}

impl<'a> PeelContext<'a> {
    pub fn new(ts: &'a TaskSet, cfg: PeelConfig) -> Self {
        let p = ts.prime();
        PeelContext {
            ts,
            cfg,
            p,
            line_index: ts.line_index(),
            relations: ts.lines.iter().map(|l| l.relations.iter().map(|r| vec_modp(r, p)).collect()).collect(),
            is_core: ts.is_core(),
            targets: ts
                .targets
                .iter()
                .map(|w| w.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i, modp(x, p))).collect())
                .collect(),
        }
    }

    fn line_enabled(&self, li: usize) -> bool {
        self.cfg.use_beta || self.ts.lines[li].kind != LineKind::Beta
    }

    pub fn peel(&self, available: &[bool]) -> AvailabilityState {
        let mut p = Peeler::new(self, available);
        p.run();
        p.state()
    }

    pub fn complete(&self, available: &[bool]) -> bool {
        let mut p = Peeler::new(self, available);
        p.run()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AvailabilityState {
    pub known: Vec<usize>,
    pub inferred: Vec<usize>,
    pub complete: bool,
    pub events: Vec<PeelEvent>,
}

/// Incremental peeling decoder.
pub struct Peeler<'c, 'a> {
    ctx: &'c PeelContext<'a>,
    entry: Vec<bool>,
    known: Vec<bool>,
    unknown_core: usize,
    dirty: Vec<bool>,
    queue: VecDeque<usize>,
    targets_done: bool,
    solved_at: Option<usize>,
    pub events: Vec<PeelEvent>,
}

impl<'c, 'a> Peeler<'c, 'a> {
    pub fn new(ctx: &'c PeelContext<'a>, available: &[bool]) -> Self {
        let n = ctx.ts.n();
        let nl = ctx.ts.lines.len();
        let unknown_core = (0..n).filter(|&i| ctx.is_core[i] && !available[i]).count();
        Peeler {
            ctx,
            entry: available.to_vec(),
            known: available.to_vec(),
            unknown_core,
            dirty: vec![true; nl],
            queue: (0..nl).collect(),
            targets_done: false,
            solved_at: None,
            events: Vec::new(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.unknown_core == 0 || self.targets_done
    }

    pub fn known(&self) -> &[bool] {
        &self.known
    }

    fn learn(&mut self, t: usize) {
        if self.known[t] {
            return;
        }
        self.known[t] = true;
        if self.ctx.is_core[t] {
            self.unknown_core -= 1;
        }
        for &li in &self.ctx.line_index[t] {
            if !self.dirty[li] {
                self.dirty[li] = true;
                self.queue.push_back(li);
            }
        }
    }

    /// A worker reported task `t`.
    pub fn add_known(&mut self, t: usize) {
        self.entry[t] = true;
        self.learn(t);
    }

    fn local(&mut self, li: usize) {
        let line = &self.ctx.ts.lines[li];
        let unk: Vec<usize> = (0..line.tasks.len()).filter(|&k| !self.known[line.tasks[k]]).collect();
        if unk.is_empty() {
            return;
        }
        let p = self.ctx.p;
        let rels = &self.ctx.relations[li];
        let pinned: Vec<usize> = if unk.len() == 1 {
            if rels.iter().any(|r| r[unk[0]] != 0) {
                vec![line.tasks[unk[0]]]
            } else {
                Vec::new()
            }
        } else {
            let rows = rels.iter().map(|r| unk.iter().map(|&k| r[k]).collect()).collect();
            pinned_in(rows, p).1.into_iter().map(|c| line.tasks[unk[c]]).collect()
        };
        if !pinned.is_empty() {
            let rule = if line.kind == LineKind::Beta { Rule::BetaCut } else { Rule::AxisRepair };
            self.events.push(PeelEvent { rule, tasks: pinned.clone() });
            for t in pinned {
                self.learn(t);
            }
        }
    }

    fn bounded_solve(&mut self) -> bool {
        let ctx = self.ctx;
        let n = ctx.ts.n();
        let unknown: Vec<usize> = (0..n).filter(|&i| !self.known[i]).collect();
        let mut col = vec![usize::MAX; n];
        for (c, &u) in unknown.iter().enumerate() {
            col[u] = c;
        }
        let mut rows = Vec::new();
        for (li, line) in ctx.ts.lines.iter().enumerate() {
            if !ctx.line_enabled(li) || !line.tasks.iter().any(|&t| !self.known[t]) {
                continue;
            }
            for r in &ctx.relations[li] {
                let mut row = vec![0u64; unknown.len()];
                let mut any = false;
                for (k, &t) in line.tasks.iter().enumerate() {
                    if col[t] != usize::MAX && r[k] != 0 {
                        row[col[t]] = r[k];
                        any = true;
                    }
                }
                if any {
                    rows.push(row);
                }
            }
        }
        let (rref, pinned) = pinned_in(rows, ctx.p);
        self.targets_done = ctx.targets.iter().all(|w| {
            let mut v = vec![0u64; unknown.len()];
            for &(i, x) in w {
                if col[i] != usize::MAX {
                    v[col[i]] = x;
                }
            }
            in_rref_span(&rref, &v, ctx.p)
        });
        let learned: Vec<usize> = pinned.iter().map(|&c| unknown[c]).collect();
        if !learned.is_empty() || self.targets_done {
            self.events.push(PeelEvent { rule: Rule::BoundedSolve, tasks: learned.clone() });
        }
        for &t in &learned {
            self.learn(t);
        }
        !learned.is_empty()
    }

    /// Runs the rules to a fixpoint; returns completion.
    pub fn run(&mut self) -> bool {
        loop {
            while let Some(li) = self.queue.pop_front() {
                self.dirty[li] = false;
                if self.is_complete() {
                    self.queue.clear();
                    self.dirty.iter_mut().for_each(|d| *d = false);
                    return true;
                }
                if self.ctx.line_enabled(li) {
                    self.local(li);
                }
            }
            if self.is_complete() {
                return true;
            }
            let known_count = self.known.iter().filter(|&&k| k).count();
            if self.ctx.cfg.stall_cap == 0
                || self.unknown_core > self.ctx.cfg.stall_cap
                || self.solved_at == Some(known_count)
            {
                return false;
            }
            self.solved_at = Some(known_count);
            if !self.bounded_solve() {
                return self.is_complete();
            }
        }
    }

    pub fn state(&self) -> AvailabilityState {
        AvailabilityState {
            known: (0..self.known.len()).filter(|&i| self.entry[i]).collect(),
            inferred: (0..self.known.len()).filter(|&i| self.known[i] && !self.entry[i]).collect(),
            complete: self.is_complete(),
            events: self.events.clone(),
        }
    }
}

/// Peels a task set from scratch.
pub fn peel(ts: &TaskSet, available: &[bool], cfg: PeelConfig) -> AvailabilityState {
    PeelContext::new(ts, cfg).peel(available)
}

#[derive(Clone, Debug, Serialize)]
pub struct UnionTheoremReport {
    pub beta_matrix: Vec<Vec<i64>>,
    pub beta_matrix_symmetric: bool,
    /// (invertible, total) over s and unordered t ≠ τ.
    pub pair_systems: (usize, usize),
    /// (full rank, total) over unordered s ≠ σ, t ≠ τ.
    pub square_systems: (usize, usize),
    pub reciprocal_sums: (usize, usize),
}

/// Brute-force sweeps behind the union theorems on the 7·7 core with the β group.
pub fn verify_union_theorems() -> UnionTheoremReport {
    let s7 = crate::scheme::factor("7").expect("builtin");
    let ss = crate::scheme::tensor(&s7, &s7).expect("tensor");
    let grp = crate::scheme::beta_checksum(&ss, &crate::scheme::BETA_G, &crate::scheme::BETA_H).expect("beta");
    let m: Vec<Vec<i64>> = (0..7).map(|s| (0..7).map(|t| grp.parity[s * 7 + t]).collect()).collect();
    let sym = (0..7).all(|s| (0..7).all(|t| m[s][t] == m[t][s]));
    let nine = crate::pluto::pluto_222(1).expect("builtin");
    let e = nine.groups[0].parity().to_vec();
    let pairs: Vec<(usize, usize)> = (0..7).flat_map(|t| (t + 1..7).map(move |u| (t, u))).collect();
    let mut pair_ok = 0;
    for s in 0..7 {
        for &(t, u) in &pairs {
            if m[s][t] * e[u] - m[s][u] * e[t] != 0 {
                pair_ok += 1;
            }
        }
    }
    let (mut sq_ok, mut rec_ok, mut total) = (0, 0, 0);
    for &(s, sg) in &pairs {
        for &(t, u) in &pairs {
            total += 1;
            // Unknowns S(s)(t), S(s)(τ), S(σ)(τ), S(σ)(t).
            let sys = vec![
                vec![m[s][t], m[s][u], m[sg][u], m[sg][t]],
                vec![e[t], e[u], 0, 0],
                vec![0, 0, e[u], e[t]],
                vec![e[s], 0, 0, e[sg]],
            ];
            if rank_rational(&sys) == 4 {
                sq_ok += 1;
            }
            let v = m[s][t] * e[sg] * e[u] - m[s][u] * e[sg] * e[t] + m[sg][u] * e[s] * e[t] - m[sg][t] * e[s] * e[u];
            if v != 0 {
                rec_ok += 1;
            }
        }
    }
    UnionTheoremReport {
        beta_matrix: m,
        beta_matrix_symmetric: sym,
        pair_systems: (pair_ok, 7 * pairs.len()),
        square_systems: (sq_ok, total),
        reciprocal_sums: (rec_ok, total),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Exhaustive,
    Sampled { trials: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct StoppingSetReport {
    pub mode: SearchMode,
    /// Smallest size found, if any stalling set was found within the bound.
    pub size: Option<usize>,
    pub sets: Vec<Vec<usize>>,
    pub examined: u64,
}

/// Smallest erasure sets on which peeling ends incomplete.
///
/// Exhaustive mode tries every set up to `size_bound`; sampled mode grows random erasure
/// prefixes until peeling fails and then shrinks greedily to an inclusion-minimal set.
pub fn min_stopping_set(ts: &TaskSet, size_bound: usize, cfg: PeelConfig, mode: SearchMode) -> StoppingSetReport {
    let ctx = PeelContext::new(ts, cfg);
    let n = ts.n();
    let fails = |missing: &[usize]| {
        let mut avail = vec![true; n];
        for &u in missing {
            avail[u] = false;
        }
        !ctx.complete(&avail)
    };
    match mode {
        SearchMode::Exhaustive => {
            let mut examined = 0u64;
            for k in 1..=size_bound.min(n) {
                let found: Vec<Vec<usize>> = (0..n)
                    .into_par_iter()
                    .flat_map_iter(|first| {
                        let rest: Vec<usize> = (first + 1..n).collect();
                        k_subsets(&rest, k - 1)
                            .into_iter()
                            .map(move |mut s| {
                                s.insert(0, first);
                                s
                            })
                            .filter(|s| fails(s))
                            .collect::<Vec<_>>()
                    })
                    .collect();
                examined += binomial(n, k);
                if !found.is_empty() {
                    let mut found = found;
                    found.sort();
                    return StoppingSetReport { mode, size: Some(k), sets: found, examined };
                }
            }
            StoppingSetReport { mode, size: None, sets: Vec::new(), examined }
        }
        SearchMode::Sampled { trials, seed } => {
            let results: Vec<Vec<usize>> = (0..trials)
                .into_par_iter()
                .filter_map(|trial| {
                    let mut rng = ChaCha8Rng::seed_from_u64(crate::sim::trial_seed(seed, trial as u64));
                    let mut order: Vec<usize> = (0..n).collect();
                    order.shuffle(&mut rng);
                    if !fails(&order) {
                        return None;
                    }
                    let (mut lo, mut hi) = (0, n);
                    while lo < hi {
                        let mid = (lo + hi) / 2;
                        if fails(&order[..mid]) {
                            hi = mid;
                        } else {
                            lo = mid + 1;
                        }
                    }
                    let mut set: Vec<usize> = order[..lo].to_vec();
                    let mut i = 0;
                    while i < set.len() {
                        let mut trial_set = set.clone();
                        trial_set.remove(i);
                        if fails(&trial_set) {
                            set = trial_set;
                        } else {
                            i += 1;
                        }
                    }
                    set.sort();
                    (set.len() <= size_bound).then_some(set)
                })
                .collect();
            let size = results.iter().map(|s| s.len()).min();
            let mut sets: Vec<Vec<usize>> = results.into_iter().filter(|s| Some(s.len()) == size).collect();
            sets.sort();
            sets.dedup();
            StoppingSetReport { mode, size, sets, examined: trials as u64 }
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Number of k-subsets of 0..n accepted by `f`, enumerated in parallel by smallest element.
pub fn count_subsets<F>(n: usize, k: usize, f: F) -> u128
where
    F: Fn(&[usize]) -> bool + Sync,
{
    if k == 0 {
        return u128::from(f(&[]));
    }
    (0..n)
        .into_par_iter()
        .map(|first| {
            let mut idx: Vec<usize> = std::iter::once(first).chain(first + 1..first + k).collect();
            if idx[k - 1] >= n {
                return 0;
            }
            let mut count = 0u128;
            loop {
                if f(&idx) {
                    count += 1;
                }
                // Advance positions 1..k lexicographically.
                let mut i = k - 1;
                loop {
                    if i == 0 {
                        return count;
                    }
                    if idx[i] < n - (k - i) {
                        idx[i] += 1;
                        for j in i + 1..k {
                            idx[j] = idx[j - 1] + 1;
                        }
                        break;
                    }
                    i -= 1;
                }
            }
        })
        .sum()
}

/// (erasures, correctable patterns, total patterns) for every erasure count up to `max_e`.
pub fn correctable_counts(oracle: &SpanOracle, max_e: usize) -> Vec<(usize, u64, u64)> {
    let n = oracle.n();
    (0..=max_e.min(n))
        .map(|e| (e, count_subsets(n, e, |s| oracle.decodable_missing(s)) as u64, binomial(n, e)))
        .collect()
}
