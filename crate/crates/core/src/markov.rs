//! Markov operators `Pψ(x) = ∫ψ(gx) dμ(g)` on a G-space: Monte Carlo powers,
//! Cesàro invariant measures, ratio limits, regeneration measures and
//! empirical return statistics.

use std::marker::PhantomData;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{Cyclic, FiniteMeasure, Group, Zk};
use crate::rng::{chain_rng, par_blocks, ChainRng};
use crate::stats::Estimate;

/// A group element acting on points of `X`.
pub trait Action<X>: Send + Sync {
    fn act(&self, x: &X) -> X;
}

impl<const K: usize> Action<Zk<K>> for Zk<K> {
    fn act(&self, x: &Zk<K>) -> Zk<K> {
        self.compose(x)
    }
}

impl Action<Cyclic> for Cyclic {
    fn act(&self, x: &Cyclic) -> Cyclic {
        self.compose(x)
    }
}

/// Bin assignment for points of `X`; `None` means outside the window.
pub struct Bins<'a, X> {
    pub count: usize,
    pub index: &'a (dyn Fn(&X) -> Option<usize> + Sync),
}

/// Real-valued function on the space.
pub type Func<'a, X> = &'a (dyn Fn(&X) -> f64 + Sync);

/// The law μ together with its action on `X`.
pub struct MarkovSystem<G, X> {
    pub measure: FiniteMeasure<G>,
    _space: PhantomData<fn(&X)>,
}

impl<G: Action<X> + Clone, X: Clone + Send + Sync> MarkovSystem<G, X> {
    pub fn new(measure: FiniteMeasure<G>) -> Self {
        Self { measure, _space: PhantomData }
    }

    #[inline]
    pub fn step(&self, x: &X, rng: &mut ChainRng) -> X {
        self.measure.sample(rng).act(x)
    }

    /// Spot check of `gh·x = g·(h·x)` and `e·x = x` on all atom pairs.
    pub fn check_action(&self, xs: &[X], eq: impl Fn(&X, &X) -> bool) -> bool
    where
        G: Group,
    {
        let atoms = self.measure.atoms();
        xs.iter().all(|x| {
            eq(&atoms[0].identity_like().act(x), x)
                && atoms.iter().all(|g| atoms.iter().all(|h| eq(&g.compose(h).act(x), &g.act(&h.act(x)))))
        })
    }

    /// Monte Carlo `P^kψ(x)`.
    pub fn pk_estimate(&self, psi: Func<'_, X>, x: &X, k: usize, chains: usize, seed: u64) -> Estimate {
        let vals: Vec<f64> = par_blocks(chains, |range| {
            range
                .map(|c| {
                    let mut rng = chain_rng(seed, c as u64);
                    let mut y = x.clone();
                    for _ in 0..k {
                        y = self.step(&y, &mut rng);
                    }
                    psi(&y)
                })
                .collect::<Vec<_>>()
        })
        .concat();
        Estimate::from_samples(&vals)
    }

    /// Exact `Pψ(x)` by summing over atoms.
    pub fn p_exact(&self, psi: Func<'_, X>, x: &X) -> f64 {
        self.measure.iter().map(|(g, w)| w * psi(&g.act(x))).sum()
    }

    /// Cesàro measure `η_n = Σ_{k≤n} P^kδ_x / Σ_{k≤n} P^ku(x)`, binned.
    pub fn cesaro_invariant_measure(
        &self,
        u: Func<'_, X>,
        start: &X,
        n_max: usize,
        chains: usize,
        seed: u64,
        bins: &Bins<'_, X>,
    ) -> Result<CesaroReport> {
        let nb = bins.count;
        let half = n_max / 2;
        let blocks = par_blocks(chains, |range| {
            let mut occ = vec![0.0f64; nb];
            let mut pushed = vec![0.0f64; nb];
            let (mut u_sum, mut u_half) = (0.0f64, 0.0f64);
            for c in range {
                let mut rng = chain_rng(seed, c as u64);
                let mut x = start.clone();
                for k in 0..=n_max {
                    if k > 0 {
                        x = self.step(&x, &mut rng);
                    }
                    if let Some(b) = (bins.index)(&x) {
                        occ[b] += 1.0;
                    }
                    for (g, w) in self.measure.iter() {
                        if let Some(b) = (bins.index)(&g.act(&x)) {
                            pushed[b] += w;
                        }
                    }
                    let uv = u(&x);
                    u_sum += uv;
                    if k <= half {
                        u_half += uv;
                    }
                }
            }
            (occ, pushed, u_sum, u_half)
        });
        let mut occ = vec![0.0; nb];
        let mut pushed = vec![0.0; nb];
        let (mut u_sum, mut u_half) = (0.0, 0.0);
        for (o, p, s, h) in blocks {
            occ.iter_mut().zip(o).for_each(|(a, b)| *a += b);
            pushed.iter_mut().zip(p).for_each(|(a, b)| *a += b);
            u_sum += s;
            u_half += h;
        }
        if u_sum <= 0.0 {
            return Err(Error::Hypothesis("the Cesàro sums of u vanish: no visits to the support of u".into()));
        }
        let late_share = (u_sum - u_half) / u_sum;
        if late_share < SATURATION_SHARE {
            return Err(Error::Hypothesis(format!(
                "transient-consistent: the Cesàro sums of u saturate (second half contributes {late_share:.4})"
            )));
        }
        let masses: Vec<f64> = occ.iter().map(|o| o / u_sum).collect();
        let pushed: Vec<f64> = pushed.iter().map(|o| o / u_sum).collect();
        let defect = relative_l1(&pushed, &masses);
        Ok(CesaroReport { masses, pushed, defect, late_share, u_visits: u_sum / chains as f64 })
    }

    /// Cross-start ratios `Σ_{k≤n} P^kφ(x) / Σ_{k≤n} P^ku(x)` at checkpoints.
    pub fn ratio_equidistribution(
        &self,
        phi: Func<'_, X>,
        u: Func<'_, X>,
        starts: &[X],
        n_max: usize,
        checkpoints: &[usize],
        chains: usize,
        seed: u64,
    ) -> RatioReport {
        let per_start: Vec<Vec<Option<f64>>> = starts
            .iter()
            .enumerate()
            .map(|(si, x0)| {
                let blocks = par_blocks(chains, |range| {
                    let mut acc = vec![(0.0f64, 0.0f64); checkpoints.len()];
                    for c in range {
                        // Independent streams per start: chains are indexed after the start.
                        let mut rng = chain_rng(seed, (si * chains + c) as u64);
                        let mut x = x0.clone();
                        let (mut sp, mut su) = (phi(&x), u(&x));
                        let mut next = 0;
                        for k in 0..=n_max {
                            if k > 0 {
                                x = self.step(&x, &mut rng);
                                sp += phi(&x);
                                su += u(&x);
                            }
                            while next < checkpoints.len() && checkpoints[next] == k {
                                acc[next].0 += sp;
                                acc[next].1 += su;
                                next += 1;
                            }
                        }
                    }
                    acc
                });
                let mut acc = vec![(0.0, 0.0); checkpoints.len()];
                for b in blocks {
                    for (a, v) in acc.iter_mut().zip(b) {
                        a.0 += v.0;
                        a.1 += v.1;
                    }
                }
                acc.into_iter().map(|(p, q)| (q > 0.0).then(|| p / q)).collect()
            })
            .collect();
        let finals: Vec<f64> = per_start.iter().filter_map(|r| r.last().copied().flatten()).collect();
        let spread = if finals.len() == starts.len() && !finals.is_empty() {
            let (lo, hi) = finals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            (hi - lo) / finals[0].abs()
        } else {
            f64::NAN
        };
        RatioReport { checkpoints: checkpoints.to_vec(), ratios: per_start, spread }
    }

    /// Average occupation measure before the first return to U, started from
    /// points weighted by `f` (one chain per start per replicate).
    #[allow(clippy::too_many_arguments)]
    pub fn regeneration_measure(
        &self,
        in_u: &(dyn Fn(&X) -> bool + Sync),
        starts: &[X],
        f: Func<'_, X>,
        chains: usize,
        horizon: usize,
        seed: u64,
        bins: &Bins<'_, X>,
    ) -> RegenerationReport {
        let nb = bins.count;
        let blocks = par_blocks(chains, |range| {
            let mut occ = vec![0.0f64; nb];
            let mut pushed = vec![0.0f64; nb];
            let mut censored = 0usize;
            for c in range {
                for (si, x0) in starts.iter().enumerate() {
                    let w = f(x0);
                    if w == 0.0 {
                        continue;
                    }
                    let mut rng = chain_rng(seed, (c * starts.len() + si) as u64);
                    let mut x = x0.clone();
                    let mut returned = false;
                    for k in 0..horizon {
                        if k > 0 && in_u(&x) {
                            returned = true;
                            break;
                        }
                        if let Some(b) = (bins.index)(&x) {
                            occ[b] += w;
                        }
                        for (g, wg) in self.measure.iter() {
                            if let Some(b) = (bins.index)(&g.act(&x)) {
                                pushed[b] += w * wg;
                            }
                        }
                        x = self.step(&x, &mut rng);
                    }
                    if !returned && !in_u(&x) {
                        censored += 1;
                    }
                }
            }
            (occ, pushed, censored)
        });
        let mut occ = vec![0.0; nb];
        let mut pushed = vec![0.0; nb];
        let mut censored = 0;
        for (o, p, c) in blocks {
            occ.iter_mut().zip(o).for_each(|(a, b)| *a += b);
            pushed.iter_mut().zip(p).for_each(|(a, b)| *a += b);
            censored += c;
        }
        let runs = (chains * starts.len()) as f64;
        occ.iter_mut().for_each(|m| *m /= chains as f64);
        pushed.iter_mut().for_each(|m| *m /= chains as f64);
        let censored_fraction = censored as f64 / runs;
        let total: f64 = occ.iter().sum();
        let defect = if total > 0.0 { relative_l1(&pushed, &occ) } else { 0.0 };
        RegenerationReport { masses: occ, pushed, defect, censored_fraction, biased: censored_fraction > 0.01 }
    }

    /// Return statistics for starts in U under common increments.
    ///
    /// A chain has returned once it re-enters U after having left it; a chain
    /// that never leaves U counts as returned at every step.
    pub fn property_r_test(
        &self,
        in_u: &(dyn Fn(&X) -> bool + Sync),
        starts: &[X],
        chains: usize,
        horizon: usize,
        seed: u64,
    ) -> PropertyRReport {
        let m = starts.len();
        let per_chain: Vec<(usize, u64, bool)> = par_blocks(chains, |range| {
            range
                .map(|c| {
                    let mut rng = chain_rng(seed, c as u64);
                    let mut xs: Vec<X> = starts.to_vec();
                    let mut left = vec![false; m];
                    let mut returned = vec![false; m];
                    let mut visits = 0u64;
                    for _ in 0..horizon {
                        let g = self.measure.sample(&mut rng);
                        for i in 0..m {
                            xs[i] = g.act(&xs[i]);
                            if in_u(&xs[i]) {
                                visits += 1;
                                returned[i] |= left[i];
                            } else {
                                left[i] = true;
                            }
                        }
                    }
                    let count = (0..m).filter(|&i| returned[i] || !left[i]).count();
                    (count, visits, count == m)
                })
                .collect::<Vec<_>>()
        })
        .concat();
        summarize_returns(&per_chain, m, horizon)
    }
}

fn summarize_returns(per_chain: &[(usize, u64, bool)], m: usize, horizon: usize) -> PropertyRReport {
    let runs = (per_chain.len() * m) as f64;
    let returned: usize = per_chain.iter().map(|r| r.0).sum();
    let visits: u64 = per_chain.iter().map(|r| r.1).sum();
    let common = per_chain.iter().filter(|r| r.2).count();
    PropertyRReport {
        return_fraction: returned as f64 / runs,
        mean_visits: visits as f64 / runs,
        common_return_fraction: common as f64 / per_chain.len() as f64,
        horizon,
    }
}

/// Share of the Cesàro sum contributed by the second half of the horizon
/// below which the sums are declared saturating.
pub const SATURATION_SHARE: f64 = 0.05;

/// `Σ|a − b| / Σ b`.
pub fn relative_l1(a: &[f64], b: &[f64]) -> f64 {
    let total: f64 = b.iter().sum();
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / total
}

#[derive(Clone, Debug, Serialize)]
pub struct CesaroReport {
    /// `η_n` per bin, normalized so that `η_n(u) = 1`.
    pub masses: Vec<f64>,
    /// `P̂η_n` per bin (visited points pushed through every atom).
    pub pushed: Vec<f64>,
    /// `‖P̂η_n − η_n‖₁ / η_n(window)` over the bins.
    pub defect: f64,
    /// Fraction of `Σ P^k u` contributed by `k > n/2`.
    pub late_share: f64,
    /// Mean `Σ_{k≤n} u(X_k)` per chain.
    pub u_visits: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioReport {
    pub checkpoints: Vec<usize>,
    /// Per start, ratio at each checkpoint (`None` before u has any mass).
    pub ratios: Vec<Vec<Option<f64>>>,
    /// `(max − min)/first` of the final ratios across starts.
    pub spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegenerationReport {
    pub masses: Vec<f64>,
    pub pushed: Vec<f64>,
    pub defect: f64,
    pub censored_fraction: f64,
    pub biased: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyRReport {
    /// Fraction of (chain, start) pairs that returned within the horizon.
    pub return_fraction: f64,
    pub mean_visits: f64,
    /// Fraction of chains in which every start returned (common horizon).
    pub common_return_fraction: f64,
    pub horizon: usize,
}

/// Exact transition matrix on a finite state space.
#[derive(Clone, Debug)]
pub struct FiniteChain {
    pub p: Vec<Vec<f64>>,
}

impl FiniteChain {
    pub fn from_system<G: Action<usize> + Clone>(sys: &MarkovSystem<G, usize>, states: usize) -> Self {
        let mut p = vec![vec![0.0; states]; states];
        for (i, row) in p.iter_mut().enumerate() {
            for (g, w) in sys.measure.iter() {
                row[g.act(&i)] += w;
            }
        }
        Self { p }
    }

    /// `Pψ` as a vector.
    pub fn apply(&self, psi: &[f64]) -> Vec<f64> {
        self.p.iter().map(|row| row.iter().zip(psi).map(|(a, b)| a * b).sum()).collect()
    }

    /// `Σ_{k≤n} P^kψ`.
    pub fn cesaro_sum(&self, psi: &[f64], n: usize) -> Vec<f64> {
        let mut cur = psi.to_vec();
        let mut acc = cur.clone();
        for _ in 0..n {
            cur = self.apply(&cur);
            acc.iter_mut().zip(&cur).for_each(|(a, c)| *a += c);
        }
        acc
    }

    /// Smallest r with `φ ≤ Σ_{k≤r} P^k u` pointwise, if one exists up to `r_max`.
    pub fn domination_index(&self, phi: &[f64], u: &[f64], r_max: usize) -> Option<usize> {
        (0..=r_max).find(|&r| self.cesaro_sum(u, r).iter().zip(phi).all(|(s, f)| f <= s))
    }
}

impl Action<usize> for Cyclic {
    fn act(&self, x: &usize) -> usize {
        (*x + self.k as usize) % self.n as usize
    }
}
