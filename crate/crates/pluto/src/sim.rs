//! Recovery-count distributions under random arrival order and threshold formulas.

use crate::bilinear::Dims;
use crate::decode::{binomial, count_subsets, PeelConfig, PeelContext, SpanOracle};
use crate::error::{Error, Result};
use crate::scheme::TaskSet;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

pub const DEFAULT_SAMPLES: usize = 5000;
pub const DEFAULT_BUDGET: u64 = 5_000_000;

/// Per-trial seed derived from the master seed and the trial index.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut z = master ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform arrival order for one trial.
pub fn trial_order(n: usize, master: u64, trial: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(master, trial));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoder {
    Oracle,
    Peel(PeelConfig),
}

impl Decoder {
    pub fn name(&self) -> &'static str {
        match self {
            Decoder::Oracle => "oracle",
            Decoder::Peel(_) => "peel",
        }
    }
}

/// Decodability test for one task set under a chosen decoder.
pub struct Judge<'a> {
    n: usize,
    oracle: Option<SpanOracle>,
    peel: Option<PeelContext<'a>>,
}

impl<'a> Judge<'a> {
    pub fn new(ts: &'a TaskSet, decoder: Decoder) -> Self {
        match decoder {
            Decoder::Oracle => Judge { n: ts.n(), oracle: Some(ts.oracle()), peel: None },
            Decoder::Peel(cfg) => Judge { n: ts.n(), oracle: None, peel: Some(PeelContext::new(ts, cfg)) },
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn decodable_missing(&self, missing: &[usize]) -> bool {
        match (&self.oracle, &self.peel) {
            (Some(o), _) => o.decodable_missing(missing),
            (None, Some(p)) => {
                let mut avail = vec![true; self.n];
                missing.iter().for_each(|&u| avail[u] = false);
                p.complete(&avail)
            }
            _ => unreachable!(),
        }
    }

    /// Smallest k whose arrival prefix decodes, or None if even the full set does not.
    /// Gallops down from k = n, then bisects.
    pub fn recovery_count(&self, order: &[usize]) -> Option<usize> {
        let n = order.len();
        let ok = |k: usize| self.decodable_missing(&order[k..]);
        if !ok(n) {
            return None;
        }
        let (mut hi, mut step) = (n, 1);
        let lo = loop {
            if step > hi {
                if ok(0) {
                    return Some(0);
                }
                break 0;
            }
            if ok(hi - step) {
                hi -= step;
                step *= 2;
            } else {
                break hi - step;
            }
        };
        // ok(lo) is false, ok(hi) is true.
        let (mut lo, mut hi) = (lo, hi);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Mode {
    Exact,
    Empirical { samples: usize, seed: u64 },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Empirical { .. } => "empirical",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryDistribution {
    pub label: String,
    pub n: usize,
    pub mode: Mode,
    pub decoder: Decoder,
    /// P(recovery count ≤ k) for k = 0..=n.
    pub cdf: Vec<f64>,
    /// Exact mode: (decodable k-subsets, C(n, k)) for every k.
    pub fractions: Option<Vec<(u128, u128)>>,
    /// Empirical mode: recovery count per trial (None when the full set does not decode).
    pub counts: Option<Vec<Option<usize>>>,
}

/// Number of correctable erasure patterns of each size, stopping at the first size with none.
fn correctable_levels(judge: &Judge, budget: u64) -> Result<Vec<u128>> {
    let n = judge.n();
    let mut levels = Vec::new();
    for e in 0..=n {
        let total = binomial(n, e);
        if total > budget {
            return Err(Error::BudgetExceeded(format!(
                "C({n},{e}) = {total} erasure patterns exceeds the budget {budget}; use Monte Carlo"
            )));
        }
        let ok = count_subsets(n, e, |s| judge.decodable_missing(s));
        levels.push(ok);
        if ok == 0 {
            break;
        }
    }
    Ok(levels)
}

pub fn exact_distribution(ts: &TaskSet, decoder: Decoder, budget: u64) -> Result<RecoveryDistribution> {
    let judge = Judge::new(ts, decoder);
    let n = ts.n();
    let levels = correctable_levels(&judge, budget)?;
    let fractions: Vec<(u128, u128)> = (0..=n)
        .map(|k| {
            let e = n - k;
            let total = binomial_u128(n, e);
            (levels.get(e).copied().unwrap_or(0), total)
        })
        .collect();
    let cdf = fractions.iter().map(|&(a, b)| a as f64 / b as f64).collect();
    Ok(RecoveryDistribution {
        label: ts.label.clone(),
        n,
        mode: Mode::Exact,
        decoder,
        cdf,
        fractions: Some(fractions),
        counts: None,
    })
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

pub fn monte_carlo(ts: &TaskSet, samples: usize, seed: u64, decoder: Decoder) -> RecoveryDistribution {
    let judge = Judge::new(ts, decoder);
    let n = ts.n();
    let counts: Vec<Option<usize>> = (0..samples as u64)
        .into_par_iter()
        .map(|t| judge.recovery_count(&trial_order(n, seed, t)))
        .collect();
    let mut hist = vec![0usize; n + 1];
    for c in counts.iter().flatten() {
        hist[*c] += 1;
    }
    let mut acc = 0;
    let cdf = hist
        .iter()
        .map(|&h| {
            acc += h;
            acc as f64 / samples.max(1) as f64
        })
        .collect();
    RecoveryDistribution {
        label: ts.label.clone(),
        n,
        mode: Mode::Empirical { samples, seed },
        decoder,
        cdf,
        fractions: None,
        counts: Some(counts),
    }
}

/// Smallest t such that every t-subset of tasks decodes (oracle).
pub fn guaranteed_threshold(ts: &TaskSet, budget: u64) -> Result<usize> {
    let judge = Judge::new(ts, Decoder::Oracle);
    let n = ts.n();
    for e in 1..=n {
        let total = binomial(n, e);
        if total > budget {
            return Err(Error::BudgetExceeded(format!("C({n},{e}) = {total} exceeds the budget {budget}")));
        }
        if count_subsets(n, e, |s| judge.decodable_missing(s)) < total as u128 {
            return Ok(n - (e - 1));
        }
    }
    Ok(0)
}

impl RecoveryDistribution {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["k", "cdf", "mode", "scheme_label", "decoder"]).map_err(csv_err)?;
        for (k, c) in self.cdf.iter().enumerate() {
            wr.write_record([k.to_string(), format!("{c:.6}"), self.mode.name().into(), self.label.clone(), self.decoder.name().into()])
                .map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Smallest k with cdf(k) ≥ q.
    pub fn quantile(&self, q: f64) -> Option<usize> {
        self.cdf.iter().position(|&c| c >= q - 1e-12)
    }

    pub fn summary(&self) -> DistributionSummary {
        DistributionSummary {
            label: self.label.clone(),
            n: self.n,
            mode: self.mode.clone(),
            decoder: self.decoder.name().into(),
            min_count: self.cdf.iter().position(|&c| c > 0.0),
            quantiles: [0.5, 0.9, 0.99, 0.998, 1.0].iter().map(|&q| (q, self.quantile(q))).collect(),
            cdf: self.cdf.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DistributionSummary {
    pub label: String,
    pub n: usize,
    pub mode: Mode,
    pub decoder: String,
    pub min_count: Option<usize>,
    pub quantiles: Vec<(f64, Option<usize>)>,
    pub cdf: Vec<f64>,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdInput {
    pub dims: Dims,
    pub r: usize,
    pub n: usize,
    /// Guaranteed erasure count when not given by one erasure per m backups.
    pub tolerated: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub dims: Dims,
    pub naive: usize,
    pub r: usize,
    pub n: usize,
    pub pluto: Option<usize>,
    pub epc: usize,
    pub pdc: usize,
    pub epc2: usize,
    pub exponent: Option<f64>,
}

fn rotations(d: Dims) -> [Dims; 3] {
    [d, Dims::new(d.m, d.n, d.l), Dims::new(d.n, d.l, d.m)]
}

/// Rows of the prime-code summary: Strassen, rectangular, Laderman and 4×4 codes.
pub fn table_one_inputs() -> Vec<ThresholdInput> {
    let row = |l, m, n, r, w| ThresholdInput { dims: Dims::new(l, m, n), r, n: w, tolerated: None };
    let mut v = Vec::new();
    for w in [9, 11, 13, 15, 17] {
        v.push(row(2, 2, 2, 7, w));
    }
    v.extend([row(2, 2, 3, 11, 13), row(2, 3, 2, 11, 14), row(3, 2, 3, 15, 17), row(2, 3, 3, 15, 18)]);
    for w in [26, 29, 32, 35] {
        v.push(row(3, 3, 3, 23, w));
    }
    v.extend([row(3, 3, 4, 29, 32), row(3, 4, 3, 29, 33), row(4, 3, 4, 38, 41), row(3, 4, 4, 38, 42)]);
    for w in [53, 57, 61] {
        v.push(row(4, 4, 4, 49, w));
    }
    v.push(ThresholdInput { dims: Dims::new(4, 4, 4), r: 49, n: 63, tolerated: Some(2) });
    v
}

/// Computed columns. The exponent is ln(N₁N₂N₃)/ln(ℓmn) over the three cyclic rotations of the
/// dimensions (a transposed shape counts as the same code); for rotations other than the row's
/// own shape the first listed row is used. It is None when a rotation is missing.
pub fn thresholds_table(rows: &[ThresholdInput]) -> Vec<ThresholdRow> {
    let lookup = |d: Dims| {
        rows.iter()
            .find(|r| r.dims == d || r.dims == Dims::new(d.n, d.m, d.l))
            .map(|r| r.n)
    };
    rows.iter()
        .map(|row| {
            let d = row.dims;
            let naive = d.l * d.m * d.n;
            let tolerated = row.tolerated.or_else(|| ((row.n - row.r) % d.m == 0).then(|| (row.n - row.r) / d.m));
            let others: Option<Vec<usize>> = rotations(d)[1..].iter().map(|&x| lookup(x)).collect();
            let exponent = if d.l == d.m && d.m == d.n {
                Some(3.0 * (row.n as f64).ln() / (naive as f64).ln())
            } else {
                others.map(|o| (row.n as f64 * o[0] as f64 * o[1] as f64).ln() / (naive as f64).ln())
            };
            ThresholdRow {
                dims: d,
                naive,
                r: row.r,
                n: row.n,
                pluto: tolerated.map(|t| row.n - t),
                epc: naive + d.m - 1,
                pdc: d.l * (2 * d.m - 1) * d.n,
                epc2: 2 * row.r - 1,
                exponent,
            }
        })
        .collect()
}

pub fn write_thresholds_csv<W: Write>(rows: &[ThresholdRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["dims", "naive", "rank", "workers", "exponent", "pluto", "epc", "pdc", "epc2"]).map_err(csv_err)?;
    for r in rows {
        wr.write_record([
            format!("<{},{},{}>", r.dims.l, r.dims.m, r.dims.n),
            r.naive.to_string(),
            r.r.to_string(),
            r.n.to_string(),
            r.exponent.map_or(String::new(), |e| format!("{e:.3}")),
            r.pluto.map_or(String::new(), |p| p.to_string()),
            r.epc.to_string(),
            r.pdc.to_string(),
            r.epc2.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pluto::{pluto_222, pluto_333};
    use crate::scheme::{lift, named_strategy};

    #[test]
    fn exact_small_codes() {
        let ts = lift(&pluto_222(1).unwrap());
        let d = exact_distribution(&ts, Decoder::Oracle, DEFAULT_BUDGET).unwrap();
        assert_eq!(d.cdf[8], 1.0);
        let o = ts.oracle();
        let ids: Vec<usize> = (0..9).collect();
        let d7 = crate::fieldlin::k_subsets(&ids, 2).iter().filter(|s| o.decodable_missing(s)).count() as u128;
        assert_eq!(d.fractions.as_ref().unwrap()[7], (d7, 36));
        assert!(d.cdf[..7].iter().all(|&c| c == 0.0));
        assert!(d.cdf.windows(2).all(|w| w[0] <= w[1]));
        let d13 = exact_distribution(&lift(&pluto_222(3).unwrap()), Decoder::Oracle, DEFAULT_BUDGET).unwrap();
        assert_eq!(d13.cdf[10], 1.0);
        assert!(d13.cdf[9] < 1.0);
    }

    #[test]
    fn thresholds_exhaustive() {
        assert_eq!(guaranteed_threshold(&lift(&pluto_222(1).unwrap()), DEFAULT_BUDGET).unwrap(), 8);
        assert_eq!(guaranteed_threshold(&lift(&pluto_222(2).unwrap()), DEFAULT_BUDGET).unwrap(), 9);
        assert_eq!(guaranteed_threshold(&lift(&pluto_222(3).unwrap()), DEFAULT_BUDGET).unwrap(), 10);
        assert_eq!(guaranteed_threshold(&lift(&pluto_333(1, 0).unwrap()), DEFAULT_BUDGET).unwrap(), 25);
    }

    #[test]
    fn budget() {
        let ts = named_strategy("9x9").unwrap();
        assert!(matches!(exact_distribution(&ts, Decoder::Oracle, 1000), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn formulas() {
        let t = thresholds_table(&[
            ThresholdInput { dims: Dims::new(2, 2, 2), r: 7, n: 9, tolerated: None },
            ThresholdInput { dims: Dims::new(3, 3, 3), r: 23, n: 26, tolerated: None },
            ThresholdInput { dims: Dims::new(2, 1, 2), r: 4, n: 4, tolerated: None },
        ]);
        assert_eq!((t[0].epc, t[0].pdc, t[0].epc2, t[0].pluto), (9, 12, 13, Some(8)));
        assert_eq!((t[1].epc, t[1].pdc, t[1].epc2, t[1].pluto), (29, 45, 45, Some(25)));
        assert_eq!((t[2].epc, t[2].pdc), (4, 4));
        assert!((t[0].exponent.unwrap() - 3.170).abs() < 5e-4);
        let full = thresholds_table(&table_one_inputs());
        let e223 = full.iter().find(|r| r.dims == Dims::new(2, 2, 3)).unwrap().exponent.unwrap();
        assert!((e223 - 3.126).abs() < 5e-4);
        assert_eq!(full.last().unwrap().pluto, Some(61));
    }

    #[test]
    fn monte_carlo_reproducible_and_consistent() {
        let ts = lift(&pluto_222(1).unwrap());
        let a = monte_carlo(&ts, 2000, 7, Decoder::Oracle);
        let b = monte_carlo(&ts, 2000, 7, Decoder::Oracle);
        assert_eq!(a.cdf, b.cdf);
        let exact = exact_distribution(&ts, Decoder::Oracle, DEFAULT_BUDGET).unwrap();
        for k in 0..=9 {
            assert!((a.cdf[k] - exact.cdf[k]).abs() < 0.04);
        }
    }

    #[test]
    fn peel_counts_dominate() {
        let ts = named_strategy("9x9+53").unwrap();
        let o = Judge::new(&ts, Decoder::Oracle);
        let p = Judge::new(&ts, Decoder::Peel(PeelConfig::default()));
        for t in 0..100 {
            let order = trial_order(ts.n(), 3, t);
            let (a, b) = (o.recovery_count(&order).unwrap(), p.recovery_count(&order).unwrap());
            assert!(b >= a);
            // Linear check of the bisection.
            let lin = (0..=ts.n()).find(|&k| o.decodable_missing(&order[k..])).unwrap();
            assert_eq!(a, lin);
        }
    }

    #[test]
    fn full_set_only() {
        let ts = lift(&crate::pluto::PlutoCode::plain(crate::bilinear::strassen()));
        let d = monte_carlo(&ts, 50, 0, Decoder::Oracle);
        assert_eq!(d.cdf[6], 0.0);
        assert_eq!(d.cdf[7], 1.0);
    }

    #[test]
    fn csv_output() {
        let ts = lift(&pluto_222(1).unwrap());
        let d = exact_distribution(&ts, Decoder::Oracle, DEFAULT_BUDGET).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("k,cdf,mode,scheme_label,decoder\n"));
        assert!(s.contains("8,1.000000,exact,9,oracle"));
    }
}
