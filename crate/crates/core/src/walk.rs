//! Left random walks `X_n = Y_n ⋯ Y_1 x`, return times and recurrence statistics.

use std::collections::HashMap;
use std::hash::Hash;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{FiniteMeasure, Group};
use crate::rng::{chain_rng, par_blocks, ChainRng};
use crate::stats::linear_fit;

/// Membership test for the neighborhood U.
pub type Region<'a, G> = &'a (dyn Fn(&G) -> bool + Sync);

#[derive(Clone, Debug)]
pub struct WalkConfig<G> {
    pub measure: FiniteMeasure<G>,
    pub start: G,
    pub horizon: usize,
    pub chains: usize,
    pub seed: u64,
}

impl<G: Group> WalkConfig<G> {
    pub fn new(measure: FiniteMeasure<G>, start: G, horizon: usize, chains: usize, seed: u64) -> Result<Self> {
        if horizon == 0 || chains == 0 {
            return Err(Error::InvalidArgument("horizon and chain count must be positive".into()));
        }
        Ok(Self { measure, start, horizon, chains, seed })
    }

    pub fn rng(&self, chain: usize) -> ChainRng {
        chain_rng(self.seed, chain as u64)
    }

    /// Advances `x` by one step.
    #[inline]
    pub fn step(&self, x: &G, rng: &mut ChainRng) -> G {
        self.measure.sample(rng).compose(x)
    }

    /// `X_0, …, X_horizon` for one chain.
    pub fn trajectory(&self, chain: usize) -> Vec<G> {
        let mut rng = self.rng(chain);
        let mut x = self.start.clone();
        let mut out = Vec::with_capacity(self.horizon + 1);
        out.push(x.clone());
        for _ in 0..self.horizon {
            x = self.step(&x, &mut rng);
            out.push(x.clone());
        }
        out
    }

    /// Number of `n ∈ [0, horizon]` with `X_n ∈ U`, per chain.
    pub fn visit_counts(&self, in_u: Region<'_, G>) -> Vec<u64> {
        par_blocks(self.chains, |range| {
            range
                .map(|c| {
                    let mut rng = self.rng(c);
                    let mut x = self.start.clone();
                    let mut v = u64::from(in_u(&x));
                    for _ in 0..self.horizon {
                        x = self.step(&x, &mut rng);
                        v += u64::from(in_u(&x));
                    }
                    v
                })
                .collect::<Vec<_>>()
        })
        .concat()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChungFuchsRow {
    pub k: usize,
    /// Estimate of `P{X_k ∈ U}`.
    pub estimate: f64,
    pub stderr: f64,
    /// Estimate of `Σ_{j≤k} P{X_j ∈ U}`.
    pub running_sum: f64,
    pub running_stderr: f64,
}

/// Monte Carlo partial sums of `μ^k(U)` for `k = 0..=N` (N = horizon).
pub fn chung_fuchs<G: Group>(cfg: &WalkConfig<G>, in_u: Region<'_, G>) -> Vec<ChungFuchsRow> {
    let n = cfg.horizon;
    let blocks = par_blocks(cfg.chains, |range| {
        let mut hits = vec![0u64; n + 1];
        let mut sq = vec![0u64; n + 1];
        for c in range {
            let mut rng = cfg.rng(c);
            let mut x = cfg.start.clone();
            let mut cum = 0u64;
            for k in 0..=n {
                if k > 0 {
                    x = cfg.step(&x, &mut rng);
                }
                if in_u(&x) {
                    hits[k] += 1;
                    cum += 1;
                }
                sq[k] += cum * cum;
            }
        }
        (hits, sq)
    });
    let mut hits = vec![0u64; n + 1];
    let mut sq = vec![0u64; n + 1];
    for (h, s) in blocks {
        for k in 0..=n {
            hits[k] += h[k];
            sq[k] += s[k];
        }
    }
    let c = cfg.chains as f64;
    let mut cum = 0u64;
    (0..=n)
        .map(|k| {
            cum += hits[k];
            let p = hits[k] as f64 / c;
            let mean = cum as f64 / c;
            let var = ((sq[k] as f64 / c - mean * mean) * c / (c - 1.0).max(1.0)).max(0.0);
            ChungFuchsRow {
                k,
                estimate: p,
                stderr: (p * (1.0 - p) / c).sqrt(),
                running_sum: mean,
                running_stderr: (var / c).sqrt(),
            }
        })
        .collect()
}

/// First-return samples `(T, X_T)` with `T = inf{n ≥ 1 : X_n ∈ U}`.
#[derive(Clone, Debug)]
pub struct InducedSample<G> {
    /// `None` when the chain did not return within the horizon.
    pub returns: Vec<Option<(usize, G)>>,
    pub censored_fraction: f64,
    /// Censoring above 1% biases the induced-law estimate.
    pub biased: bool,
}

/// Censoring level above which induced estimates are flagged.
pub const CENSOR_FLAG: f64 = 0.01;

pub fn induced_walk_sample<G: Group>(cfg: &WalkConfig<G>, in_u: Region<'_, G>) -> Result<InducedSample<G>> {
    let returns: Vec<Option<(usize, G)>> = par_blocks(cfg.chains, |range| {
        range
            .map(|c| {
                let mut rng = cfg.rng(c);
                let mut x = cfg.start.clone();
                for t in 1..=cfg.horizon {
                    x = cfg.step(&x, &mut rng);
                    if in_u(&x) {
                        return Some((t, x));
                    }
                }
                None
            })
            .collect::<Vec<_>>()
    })
    .concat();
    let censored = returns.iter().filter(|r| r.is_none()).count();
    if censored == returns.len() {
        return Err(Error::NoReturns);
    }
    let censored_fraction = censored as f64 / returns.len() as f64;
    Ok(InducedSample { returns, censored_fraction, biased: censored_fraction > CENSOR_FLAG })
}

impl<G: Clone + Eq + Hash> InducedSample<G> {
    /// Empirical law of `X_T` among returned chains, in order of first appearance.
    pub fn induced_law(&self) -> Vec<(G, f64)> {
        let mut order = Vec::new();
        let mut counts: HashMap<G, usize> = HashMap::new();
        for (_, g) in self.returns.iter().flatten() {
            *counts.entry(g.clone()).or_insert_with(|| {
                order.push(g.clone());
                0
            }) += 1;
        }
        let total: usize = counts.values().sum();
        order.into_iter().map(|g| {
            let w = counts[&g] as f64 / total as f64;
            (g, w)
        }).collect()
    }
}

impl<G> InducedSample<G> {
    pub fn fraction_with_time(&self, t: usize) -> f64 {
        self.returns.iter().filter(|r| matches!(r, Some((s, _)) if *s == t)).count() as f64 / self.returns.len() as f64
    }
}

/// All return times to U of one chain within the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnRecord {
    pub times: Vec<usize>,
    /// The horizon cut the record short (always true for an infinite process).
    pub censored: bool,
}

pub fn return_record<G: Group>(cfg: &WalkConfig<G>, in_u: Region<'_, G>, chain: usize) -> ReturnRecord {
    let mut rng = cfg.rng(chain);
    let mut x = cfg.start.clone();
    let mut times = Vec::new();
    for t in 1..=cfg.horizon {
        x = cfg.step(&x, &mut rng);
        if in_u(&x) {
            times.push(t);
        }
    }
    ReturnRecord { times, censored: true }
}

/// Thresholds of the recurrence heuristic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierConfig {
    /// Minimum R² of the fit `S(N) ≈ a + c log N` for recurrent-consistent.
    pub r2_recurrent: f64,
    /// Maximum per-step `P{X_k ∈ U}` past `tail_from` for transient-consistent.
    pub tail_increment: f64,
    pub tail_from: usize,
    /// Start of the fitting range.
    pub fit_from: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self { r2_recurrent: 0.98, tail_increment: 1e-3, tail_from: 2000, fit_from: 100 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    RecurrentConsistent,
    TransientConsistent,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub log_fit_r2: f64,
    pub log_fit_slope: f64,
    /// `S(2N) − S(N)` on the doubling grid starting at `fit_from`.
    pub doubling_increments: Vec<f64>,
    /// Last doubling increment over the first.
    pub doubling_ratio: f64,
    /// Largest per-step estimate at or beyond `tail_from`.
    pub tail_max: f64,
}

/// Ratio of last to first doubling increment above which growth is faster
/// than logarithmic.
const SUPERLOG_RATIO: f64 = 1.5;
/// Minimal ratio for non-decaying doubling increments.
const FLAT_RATIO: f64 = 0.5;

/// Reads a Chung-Fuchs table as evidence for one regime. Never a proof.
pub fn recurrence_classifier(rows: &[ChungFuchsRow], cfg: &ClassifierConfig) -> Classification {
    let n = rows.len() - 1;
    let s = |k: usize| rows[k].running_sum;
    let start = cfg.fit_from.clamp(1, n.max(1));

    let mut doubling_increments = Vec::new();
    let mut k = start;
    while 2 * k <= n {
        doubling_increments.push(s(2 * k) - s(k));
        k *= 2;
    }
    let doubling_ratio = match (doubling_increments.first(), doubling_increments.last()) {
        (Some(&f), Some(&l)) if f > 0.0 => l / f,
        _ => 0.0,
    };

    // Log-spaced fitting grid.
    let pts = 24;
    let (lo, hi) = ((start as f64).ln(), (n.max(start + 1) as f64).ln());
    let mut grid: Vec<usize> = (0..pts).map(|i| (lo + (hi - lo) * i as f64 / (pts - 1) as f64).exp().round() as usize).collect();
    grid.dedup();
    grid.retain(|&k| k <= n);
    let xs: Vec<f64> = grid.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = grid.iter().map(|&k| s(k)).collect();
    let fit = linear_fit(&xs, &ys);

    let tail_max = rows.iter().skip(cfg.tail_from).map(|r| r.estimate).fold(0.0, f64::max);
    let last = doubling_increments.last().copied().unwrap_or(0.0);

    let non_decaying = last > 0.0 && doubling_ratio >= FLAT_RATIO;
    let verdict = if non_decaying && (fit.r2 > cfg.r2_recurrent || doubling_ratio > SUPERLOG_RATIO) {
        Verdict::RecurrentConsistent
    } else if n > cfg.tail_from && tail_max < cfg.tail_increment && doubling_ratio < FLAT_RATIO {
        Verdict::TransientConsistent
    } else {
        Verdict::Inconclusive
    };
    Classification {
        verdict,
        log_fit_r2: fit.r2,
        log_fit_slope: fit.slope,
        doubling_increments,
        doubling_ratio,
        tail_max,
    }
}

/// Two-sided increment sequence `(Y_k)_{k∈ℤ}` with random access: each index
/// owns a fixed window of its chain's stream.
pub struct BilateralPath<'a, G> {
    measure: &'a FiniteMeasure<G>,
    seed: u64,
    chain: u64,
}

const WINDOW_WORDS: u128 = 16;
const INDEX_OFFSET: i128 = 1 << 40;

impl<'a, G: Group> BilateralPath<'a, G> {
    pub fn new(measure: &'a FiniteMeasure<G>, seed: u64, chain: u64) -> Self {
        Self { measure, seed, chain }
    }

    pub fn increment(&self, k: i64) -> &'a G {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.chain);
        rng.set_word_pos((k as i128 + INDEX_OFFSET) as u128 * WINDOW_WORDS);
        self.measure.sample(&mut rng)
    }

    /// `Y_to ⋯ Y_from · x` for `from ≤ to`.
    pub fn product(&self, from: i64, to: i64, x: &G) -> G {
        (from..=to).fold(x.clone(), |acc, k| self.increment(k).compose(&acc))
    }

    /// The shifted path `(θω̂)_k = ω̂_{k+1}`.
    pub fn walk(&self, shift: i64, n: usize, x: &G) -> G {
        if n == 0 {
            return x.clone();
        }
        self.product(1 + shift, n as i64 + shift, x)
    }
}
