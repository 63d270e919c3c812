//! Coded block multiplication through a simulated manager/worker pool.

use crate::bilinear::{combine, Grid};
use crate::decode::{PeelConfig, PeelContext, PeelEvent, Peeler};
use crate::error::{invalid, Result};
use crate::fieldlin::{invm, modp, Fp, Rational, RealBlock, Ring};
use crate::scheme::TaskSet;
use crate::sim::trial_order;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Block types the manager can assemble with rational coefficients.
pub trait Assemble: Ring + 'static {
    fn scale_q(&self, q: &Rational) -> Self;
    /// Squared norm used for residuals; exact fields count nonzero entries.
    fn norm_sq(&self) -> f64;
}

impl Assemble for RealBlock {
    fn scale_q(&self, q: &Rational) -> Self {
        let f = q.to_f64().unwrap_or(f64::NAN);
        RealBlock { n: self.n, m: self.m, data: self.data.iter().map(|x| x * f).collect() }
    }
    fn norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }
}

impl Assemble for f64 {
    fn scale_q(&self, q: &Rational) -> Self {
        self * q.to_f64().unwrap_or(f64::NAN)
    }
    fn norm_sq(&self) -> f64 {
        self * self
    }
}

impl Assemble for Rational {
    fn scale_q(&self, q: &Rational) -> Self {
        self * q
    }
    fn norm_sq(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }
}

impl Assemble for Fp {
    fn scale_q(&self, q: &Rational) -> Self {
        let p = self.p;
        let red = |x: &BigInt| {
            let r = x % BigInt::from(p);
            let r = if r.is_negative() { r + BigInt::from(p) } else { r };
            r.to_u64().unwrap()
        };
        let f = crate::fieldlin::mulm(red(q.numer()), invm(red(q.denom()), p), p);
        Fp { v: crate::fieldlin::mulm(self.v, f, p), p }
    }
    fn norm_sq(&self) -> f64 {
        if self.v == 0 {
            0.0
        } else {
            1.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StragglerSpec {
    Explicit(Vec<usize>),
    Random(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StragglerBehavior {
    NeverRespond,
    RespondLast,
}

#[derive(Clone, Debug, Serialize)]
pub struct WorkerPoolConfig {
    /// Seeds the arrival permutation (trial 0 of the simulator's stream) and random stragglers.
    pub seed: u64,
    pub stragglers: StragglerSpec,
    pub behavior: StragglerBehavior,
    /// OS threads backing the workers.
    pub threads: usize,
    pub peel: PeelConfig,
}

impl Default for WorkerPoolConfig {
    fn default() -> Self {
        WorkerPoolConfig {
            seed: 0,
            stragglers: StragglerSpec::Random(0),
            behavior: StragglerBehavior::NeverRespond,
            threads: 4,
            peel: PeelConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArrivalPlan {
    pub permutation: Vec<usize>,
    pub stragglers: Vec<usize>,
    /// Completion stream: the permutation without stragglers, plus stragglers last when they respond.
    pub stream: Vec<usize>,
}

impl ArrivalPlan {
    /// Full order with stragglers moved to the end, as the simulator sees it.
    pub fn sim_order(&self) -> Vec<usize> {
        let mut o: Vec<usize> = self.permutation.iter().copied().filter(|t| !self.stragglers.contains(t)).collect();
        o.extend(self.permutation.iter().copied().filter(|t| self.stragglers.contains(t)));
        o
    }
}

pub fn arrival_plan(n: usize, cfg: &WorkerPoolConfig) -> Result<ArrivalPlan> {
    let permutation = trial_order(n, cfg.seed, 0);
    let mut stragglers = match &cfg.stragglers {
        StragglerSpec::Explicit(ids) => {
            if ids.iter().any(|&i| i >= n) {
                return invalid("straggler id out of range");
            }
            ids.clone()
        }
        StragglerSpec::Random(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(crate::sim::trial_seed(cfg.seed, u64::MAX));
            let mut ids: Vec<usize> = (0..n).collect();
            ids.shuffle(&mut rng);
            ids.truncate(*k);
            ids
        }
    };
    stragglers.sort();
    stragglers.dedup();
    if stragglers.len() >= n {
        return invalid("straggler count must be below the task count");
    }
    let mut stream: Vec<usize> = permutation.iter().copied().filter(|t| stragglers.binary_search(t).is_err()).collect();
    if cfg.behavior == StragglerBehavior::RespondLast {
        stream.extend(permutation.iter().copied().filter(|t| stragglers.binary_search(t).is_ok()));
    }
    Ok(ArrivalPlan { permutation, stragglers, stream })
}

#[derive(Clone, Debug, Serialize)]
pub struct TranscriptEvent {
    /// Number of arrivals consumed when the rule fired.
    pub arrivals: usize,
    #[serde(flatten)]
    pub event: PeelEvent,
    pub names: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct JobTranscript {
    pub label: String,
    pub plan: ArrivalPlan,
    pub consumed: Vec<usize>,
    pub recovery_count: Option<usize>,
    pub completed: bool,
    pub events: Vec<TranscriptEvent>,
    pub block_multiplications: usize,
    pub residual: Option<f64>,
}

pub struct JobResult<R> {
    pub c: Option<Grid<R>>,
    pub transcript: JobTranscript,
}

fn check_shapes<R: Assemble>(ts: &TaskSet, a: &Grid<R>, b: &Grid<R>) -> Result<()> {
    let d = ts.dims;
    if (a.rows, a.cols, b.rows, b.cols) != (d.l, d.m, d.m, d.n) {
        return invalid(format!(
            "grids {}x{} and {}x{} do not match <{},{},{}>",
            a.rows, a.cols, b.rows, b.cols, d.l, d.m, d.n
        ));
    }
    if a.blocks.len() != d.l * d.m || b.blocks.len() != d.m * d.n {
        return invalid("block count does not match grid dims");
    }
    Ok(())
}

/// Coefficients over known tasks for every target: w − λR with λR agreeing with w on the
/// unknown tasks, solved exactly over the line relations.
pub fn assembly_coefficients(ts: &TaskSet, known: &[bool], use_beta: bool) -> Option<Vec<Vec<Rational>>> {
    let n = ts.n();
    let unknown: Vec<usize> = (0..n).filter(|&i| !known[i]).collect();
    let mut rels: Vec<Vec<i64>> = Vec::new();
    for line in &ts.lines {
        if !use_beta && line.kind == crate::scheme::LineKind::Beta {
            continue;
        }
        if !line.tasks.iter().any(|&t| !known[t]) {
            continue;
        }
        for r in &line.relations {
            let mut row = vec![0i64; n];
            for (k, &t) in line.tasks.iter().enumerate() {
                row[t] = r[k];
            }
            rels.push(row);
        }
    }
    let nt = ts.targets.len();
    // Equations: for each unknown u, Σ_r λ_r R[r][u] = w[u]; augmented with one column per target.
    let nr = rels.len();
    let mut m: Vec<Vec<Rational>> = unknown
        .iter()
        .map(|&u| {
            let mut row: Vec<Rational> = rels.iter().map(|r| Rational::from_integer(r[u].into())).collect();
            row.extend(ts.targets.iter().map(|w| Rational::from_integer(w[u].into())));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r0 = 0;
    for c in 0..nr {
        let Some(p) = (r0..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r0, p);
        let inv = Rational::one() / m[r0][c].clone();
        for x in m[r0].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r0 && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot_row = m[r0].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        pivots.push(c);
        r0 += 1;
    }
    if m[r0..].iter().any(|row| row[nr..].iter().any(|x| !x.is_zero())) {
        return None;
    }
    let mut out = Vec::with_capacity(nt);
    for t in 0..nt {
        let mut lambda = vec![Rational::zero(); nr];
        for (i, &c) in pivots.iter().enumerate() {
            lambda[c] = m[i][nr + t].clone();
        }
        let coef: Vec<Rational> = (0..n)
            .map(|s| {
                let mut v = Rational::from_integer(ts.targets[t][s].into());
                for (l, r) in lambda.iter().zip(&rels) {
                    if !l.is_zero() && r[s] != 0 {
                        v -= l * Rational::from_integer(r[s].into());
                    }
                }
                v
            })
            .collect();
        debug_assert!(unknown.iter().all(|&u| coef[u].is_zero()));
        out.push(coef);
    }
    Some(out)
}

/// Runs the job: the manager forms each task's two factors, workers multiply concurrently,
/// and the manager consumes the completion stream in plan order, peeling after every arrival.
pub fn run_job<R: Assemble>(ts: &TaskSet, a: &Grid<R>, b: &Grid<R>, cfg: &WorkerPoolConfig) -> Result<JobResult<R>> {
    check_shapes(ts, a, b)?;
    let n = ts.n();
    let plan = arrival_plan(n, cfg)?;
    let factors: Vec<(R, R)> = ts.tasks.iter().map(|t| (combine(&t.a, &a.blocks), combine(&t.b, &b.blocks))).collect();
    let mults = AtomicUsize::new(0);
    let (work_tx, work_rx) = crossbeam_channel::unbounded::<usize>();
    let (done_tx, done_rx) = crossbeam_channel::unbounded::<(usize, R)>();
    for t in 0..n {
        work_tx.send(t).expect("queue open");
    }
    drop(work_tx);
    let never = cfg.behavior == StragglerBehavior::NeverRespond;
    let ctx = PeelContext::new(ts, cfg.peel);

    let (values, consumed, events, completed) = std::thread::scope(|scope| {
        for _ in 0..cfg.threads.max(1) {
            let (work_rx, done_tx, factors, mults, plan) = (work_rx.clone(), done_tx.clone(), &factors, &mults, &plan);
            scope.spawn(move || {
                for t in work_rx.iter() {
                    let v = factors[t].0.mul(&factors[t].1);
                    mults.fetch_add(1, Ordering::Relaxed);
                    if never && plan.stragglers.binary_search(&t).is_ok() {
                        continue;
                    }
                    // The manager may have finished already.
                    let _ = done_tx.send((t, v));
                }
            });
        }
        drop(done_tx);
        let mut peeler = Peeler::new(&ctx, &vec![false; n]);
        let mut pending: HashMap<usize, R> = HashMap::new();
        let mut values: HashMap<usize, R> = HashMap::new();
        let mut consumed = Vec::new();
        let mut events = Vec::new();
        let mut completed = peeler.run();
        let mut seen_events = peeler.events.len();
        for &next in &plan.stream {
            if completed {
                break;
            }
            let v = match pending.remove(&next) {
                Some(v) => v,
                None => loop {
                    let (t, v) = done_rx.recv().expect("worker results");
                    if t == next {
                        break v;
                    }
                    pending.insert(t, v);
                },
            };
            values.insert(next, v);
            consumed.push(next);
            peeler.add_known(next);
            completed = peeler.run();
            for e in &peeler.events[seen_events..] {
                events.push(TranscriptEvent {
                    arrivals: consumed.len(),
                    event: e.clone(),
                    names: e.tasks.iter().map(|&t| ts.task_name(t)).collect(),
                });
            }
            seen_events = peeler.events.len();
        }
        drop(done_rx);
        (values, consumed, events, completed)
    });

    let mut transcript = JobTranscript {
        label: ts.label.clone(),
        plan,
        recovery_count: completed.then_some(consumed.len()),
        consumed,
        completed,
        events,
        block_multiplications: mults.load(Ordering::Relaxed),
        residual: None,
    };
    if !completed {
        return Ok(JobResult { c: None, transcript });
    }
    let mut known = vec![false; n];
    transcript.consumed.iter().for_each(|&t| known[t] = true);
    let coefs = assembly_coefficients(ts, &known, cfg.peel.use_beta)
        .ok_or_else(|| crate::Error::InvalidInput("peel reported completion but the targets are not in the relation span".into()))?;
    let zero = values.values().next().map(|v| v.zero_like()).expect("at least one arrival");
    let blocks = coefs
        .iter()
        .map(|coef| {
            let mut acc = zero.clone();
            for (&t, v) in &values {
                if !coef[t].is_zero() {
                    acc = acc.add(&v.scale_q(&coef[t]));
                }
            }
            acc
        })
        .collect();
    let c = Grid { rows: ts.dims.l, cols: ts.dims.n, blocks };
    transcript.residual = Some(verify_job(&c, a, b));
    Ok(JobResult { c: Some(c), transcript })
}

/// ‖C − AB‖_F / ‖AB‖_F by direct block multiplication.
pub fn verify_job<R: Assemble>(c: &Grid<R>, a: &Grid<R>, b: &Grid<R>) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..a.rows {
        for k in 0..b.cols {
            let mut acc = a.blocks[i * a.cols].mul(&b.blocks[k]);
            for j in 1..a.cols {
                acc = acc.add(&a.blocks[i * a.cols + j].mul(&b.blocks[j * b.cols + k]));
            }
            num += c.blocks[i * c.cols + k].sub(&acc).norm_sq();
            den += acc.norm_sq();
        }
    }
    if num == 0.0 {
        0.0
    } else {
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }
}

/// Grid of blocks with uniform entries in [−1, 1].
pub fn random_grid(rows: usize, cols: usize, block: usize, rng: &mut impl Rng) -> Grid<RealBlock> {
    let blocks = (0..rows * cols)
        .map(|_| RealBlock { n: block, m: block, data: (0..block * block).map(|_| rng.gen_range(-1.0..=1.0)).collect() })
        .collect();
    Grid { rows, cols, blocks }
}

pub fn random_fp_grid(rows: usize, cols: usize, p: u64, rng: &mut impl Rng) -> Grid<Fp> {
    Grid { rows, cols, blocks: (0..rows * cols).map(|_| Fp { v: modp(rng.gen_range(0..p as i64), p), p }).collect() }
}
