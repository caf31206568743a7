//! Fibered walks over a compact base: cocycles `z(g, x̄)`, Birkhoff sums
//! `S_n = Σ z(Y_k, X̄_{k−1})`, drift and zero-drift recurrence of the fiber.

use std::f64::consts::TAU;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{FiniteMeasure, Group};
use crate::projective::{act_with_cocycle, proj_act, Mat, ProjPoint};
use crate::rng::{chain_rng, par_blocks, ChainRng};
use crate::stats::Estimate;

/// Largest tolerated violation of the cocycle identity.
pub const REJECT_VIOLATION: f64 = 1e-6;
/// Horizon-doubling growth ratio above which visits count as unbounded.
pub const DOUBLING_RATIO: f64 = 1.3;

/// Base action, cocycle and stationary base sampler.
pub trait CocycleSystem: Sync {
    type G: Group;
    type Base: Clone + Send + Sync;
    fn act(&self, g: &Self::G, x: &Self::Base) -> Self::Base;
    fn cocycle(&self, g: &Self::G, x: &Self::Base) -> f64;
    fn sample_base(&self, rng: &mut ChainRng) -> Self::Base;
    /// The fiber is ℤ and cocycle values must be integers.
    fn integer_fiber(&self) -> bool {
        false
    }
}

/// Translation of ℝ (or ℤ when values are integers).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Translation(pub f64);

impl Group for Translation {
    fn compose(&self, o: &Self) -> Self {
        Translation(self.0 + o.0)
    }
    fn identity_like(&self) -> Self {
        Translation(0.0)
    }
    fn inverse(&self) -> Self {
        Translation(-self.0)
    }
}

/// Trivial base; the cocycle is the translation length.
#[derive(Clone, Copy, Debug, Default)]
pub struct CoinCocycle {
    pub integer: bool,
}

impl CoinCocycle {
    /// Fair `±1` steps shifted by `drift`.
    pub fn measure(drift: f64) -> FiniteMeasure<Translation> {
        FiniteMeasure::uniform(vec![Translation(1.0 + drift), Translation(-1.0 + drift)]).expect("two atoms")
    }
}

impl CocycleSystem for CoinCocycle {
    type G = Translation;
    type Base = ();
    fn act(&self, _: &Translation, _: &()) {}
    fn cocycle(&self, g: &Translation, _: &()) -> f64 {
        g.0
    }
    fn sample_base(&self, _: &mut ChainRng) {}
    fn integer_fiber(&self) -> bool {
        self.integer
    }
}

/// Rotation `(α, s)` of the circle ℝ/ℤ carrying the cocycle
/// `z = s + φ(x + α) − φ(x)`, `φ(x) = amp·sin 2πx`; Lebesgue measure is invariant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CircleStep {
    pub alpha: f64,
    pub s: f64,
}

impl Group for CircleStep {
    fn compose(&self, o: &Self) -> Self {
        CircleStep { alpha: (self.alpha + o.alpha).rem_euclid(1.0), s: self.s + o.s }
    }
    fn identity_like(&self) -> Self {
        CircleStep { alpha: 0.0, s: 0.0 }
    }
    fn inverse(&self) -> Self {
        CircleStep { alpha: (-self.alpha).rem_euclid(1.0), s: -self.s }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CircleCocycle {
    pub amp: f64,
}

impl CircleCocycle {
    fn phi(&self, x: f64) -> f64 {
        self.amp * (TAU * x).sin()
    }
}

impl CocycleSystem for CircleCocycle {
    type G = CircleStep;
    type Base = f64;
    fn act(&self, g: &CircleStep, x: &f64) -> f64 {
        (x + g.alpha).rem_euclid(1.0)
    }
    fn cocycle(&self, g: &CircleStep, x: &f64) -> f64 {
        g.s + self.phi(x + g.alpha) - self.phi(*x)
    }
    fn sample_base(&self, rng: &mut ChainRng) -> f64 {
        rng.gen::<f64>()
    }
}

/// `z(g, x̄) = log‖gx‖` on ℙ¹ with ρ drawn from a stationary sample.
#[derive(Clone, Debug)]
pub struct NormCocycle {
    pub rho: Vec<ProjPoint<2>>,
}

impl CocycleSystem for NormCocycle {
    type G = Mat<2>;
    type Base = ProjPoint<2>;
    fn act(&self, g: &Mat<2>, x: &ProjPoint<2>) -> ProjPoint<2> {
        proj_act(g, x)
    }
    fn cocycle(&self, g: &Mat<2>, x: &ProjPoint<2>) -> f64 {
        act_with_cocycle(g, x).1
    }
    fn sample_base(&self, rng: &mut ChainRng) -> ProjPoint<2> {
        self.rho[rng.gen_range(0..self.rho.len())]
    }
}

/// Adds a constant to another cocycle (not a cocycle unless the constant is 0).
#[derive(Clone, Debug)]
pub struct Shifted<S> {
    pub inner: S,
    pub shift: f64,
}

impl<S: CocycleSystem> CocycleSystem for Shifted<S> {
    type G = S::G;
    type Base = S::Base;
    fn act(&self, g: &S::G, x: &S::Base) -> S::Base {
        self.inner.act(g, x)
    }
    fn cocycle(&self, g: &S::G, x: &S::Base) -> f64 {
        self.inner.cocycle(g, x) + self.shift
    }
    fn sample_base(&self, rng: &mut ChainRng) -> S::Base {
        self.inner.sample_base(rng)
    }
    fn integer_fiber(&self) -> bool {
        self.inner.integer_fiber()
    }
}

/// Up to this many atoms are multiplied to form each test element.
const CHECK_WORD: usize = 3;

/// Max of `|z(gh, x̄) − z(g, hx̄) − z(h, x̄)|` over random words g, h and base points.
pub fn cocycle_violation<S: CocycleSystem>(sys: &S, mu: &FiniteMeasure<S::G>, samples: usize, seed: u64) -> f64 {
    let word = |rng: &mut ChainRng| {
        let len = rng.gen_range(1..=CHECK_WORD);
        let mut g = mu.sample(rng).clone();
        for _ in 1..len {
            g = g.compose(mu.sample(rng));
        }
        g
    };
    let mut rng = chain_rng(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let (g, h) = (word(&mut rng), word(&mut rng));
        let x = sys.sample_base(&mut rng);
        let lhs = sys.cocycle(&g.compose(&h), &x);
        let rhs = sys.cocycle(&g, &sys.act(&h, &x)) + sys.cocycle(&h, &x);
        let mut v = (lhs - rhs).abs();
        if sys.integer_fiber() {
            v = v.max((lhs - lhs.round()).abs());
        }
        worst = worst.max(v);
    }
    worst
}

/// Rejects systems whose cocycle identity fails beyond `REJECT_VIOLATION`.
pub fn cocycle_check<S: CocycleSystem>(sys: &S, mu: &FiniteMeasure<S::G>, samples: usize, seed: u64) -> Result<f64> {
    let v = cocycle_violation(sys, mu, samples, seed);
    if v > REJECT_VIOLATION {
        return Err(Error::Hypothesis(format!("cocycle identity violated by {v:.3e}")));
    }
    Ok(v)
}

/// `∫∫ z(g, x̄) dμ(g) dρ(x̄)`: exact in g, Monte Carlo over `samples` base points.
pub fn drift<S: CocycleSystem>(sys: &S, mu: &FiniteMeasure<S::G>, samples: usize, seed: u64) -> Estimate {
    let vals: Vec<f64> = par_blocks(samples, |range| {
        range
            .map(|c| {
                let x = sys.sample_base(&mut chain_rng(seed, c as u64));
                mu.iter().map(|(g, w)| w * sys.cocycle(g, &x)).sum::<f64>()
            })
            .collect::<Vec<_>>()
    })
    .concat();
    Estimate::from_samples(&vals)
}

/// Birkhoff sums `s0 + S_n`, `n = 0..=horizon`, along one chain.
pub fn birkhoff_path<S: CocycleSystem>(
    sys: &S,
    mu: &FiniteMeasure<S::G>,
    x0: &S::Base,
    s0: f64,
    horizon: usize,
    rng: &mut ChainRng,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(horizon + 1);
    let (mut x, mut s) = (x0.clone(), s0);
    out.push(s);
    for _ in 0..horizon {
        let g = mu.sample(rng);
        s += sys.cocycle(g, &x);
        x = sys.act(g, &x);
        out.push(s);
    }
    out
}

/// Skew-product step on `base × fiber`: `(x̄, s) ↦ (g x̄, s + z(g, x̄))`.
pub fn skew_step<S: CocycleSystem>(sys: &S, g: &S::G, p: &(S::Base, f64)) -> (S::Base, f64) {
    (sys.act(g, &p.0), p.1 + sys.cocycle(g, &p.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct BirkhoffReport {
    pub interval: (f64, f64),
    pub horizon: usize,
    /// Visits of `s0 + S_n`, `1 ≤ n ≤ horizon`, to the interval, per chain.
    pub visits: Vec<u64>,
    /// The same count up to `horizon / 2`.
    pub visits_half: Vec<u64>,
    pub last_visit: Vec<Option<usize>>,
    /// Mean visits at the horizon over mean visits at half the horizon.
    pub doubling_ratio: f64,
}

impl BirkhoffReport {
    pub fn fraction_with_at_least(&self, m: u64) -> f64 {
        self.visits.iter().filter(|v| **v >= m).count() as f64 / self.visits.len() as f64
    }

    /// Chains whose final 90% of steps stay outside the interval.
    pub fn escape_fraction(&self) -> f64 {
        let cut = self.horizon / 10;
        self.last_visit.iter().filter(|l| l.is_none_or(|t| t <= cut)).count() as f64 / self.last_visit.len() as f64
    }

    /// Visit counts keep growing under horizon doubling.
    pub fn recurrent_consistent(&self) -> bool {
        self.doubling_ratio > DOUBLING_RATIO
    }
}

/// Visit counts of the Birkhoff sums to `[lo, hi]`, with base points drawn from ρ.
pub fn birkhoff_recurrence<S: CocycleSystem>(
    sys: &S,
    mu: &FiniteMeasure<S::G>,
    interval: (f64, f64),
    s0: f64,
    horizon: usize,
    chains: usize,
    seed: u64,
) -> BirkhoffReport {
    let (lo, hi) = interval;
    let half = horizon / 2;
    let per: Vec<(u64, u64, Option<usize>)> = par_blocks(chains, |range| {
        range
            .map(|c| {
                let mut rng = chain_rng(seed, c as u64);
                let mut x = sys.sample_base(&mut rng);
                let mut s = s0;
                let (mut v, mut vh, mut last) = (0u64, 0u64, None);
                for n in 1..=horizon {
                    let g = mu.sample(&mut rng);
                    s += sys.cocycle(g, &x);
                    x = sys.act(g, &x);
                    if lo <= s && s <= hi {
                        v += 1;
                        if n <= half {
                            vh += 1;
                        }
                        last = Some(n);
                    }
                }
                (v, vh, last)
            })
            .collect::<Vec<_>>()
    })
    .concat();
    let visits: Vec<u64> = per.iter().map(|p| p.0).collect();
    let visits_half: Vec<u64> = per.iter().map(|p| p.1).collect();
    let (t, h) = (visits.iter().sum::<u64>() as f64, visits_half.iter().sum::<u64>() as f64);
    BirkhoffReport {
        interval,
        horizon,
        visits,
        visits_half,
        last_visit: per.iter().map(|p| p.2).collect(),
        doubling_ratio: if h > 0.0 { t / h } else { f64::NAN },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::projective::furstenberg_sample;

    fn pair_rho() -> NormCocycle {
        let seeds: Vec<_> = (0..4).map(|i| ProjPoint::from_angle(i as f64 * 0.7)).collect();
        let rep = furstenberg_sample(&models::hyperbolic_pair(0.0), &seeds, 60, 2000, 3, 32);
        NormCocycle { rho: rep.nu.points.iter().map(|a| ProjPoint::from_angle(*a)).collect() }
    }

    #[test]
    fn norm_cocycle_identity() {
        let sys = pair_rho();
        let v = cocycle_check(&sys, &models::hyperbolic_pair(0.0), 2000, 1).unwrap();
        assert!(v < 1e-9, "{v}");
    }

    #[test]
    fn zero_and_corrupted() {
        let zero = CircleCocycle { amp: 0.0 };
        let mu = FiniteMeasure::dirac(CircleStep { alpha: 0.3, s: 0.0 });
        assert_eq!(cocycle_violation(&zero, &mu, 100, 1), 0.0);
        let bad = Shifted { inner: pair_rho(), shift: 1.0 };
        let v = cocycle_violation(&bad, &models::hyperbolic_pair(0.0), 200, 1);
        assert!((v - 1.0).abs() < 1e-9);
        assert!(cocycle_check(&bad, &models::hyperbolic_pair(0.0), 200, 1).is_err());
    }

    #[test]
    fn integer_fiber_flags_fractions() {
        let sys = CoinCocycle { integer: true };
        assert!(cocycle_check(&sys, &CoinCocycle::measure(0.0), 100, 1).is_ok());
        assert!(cocycle_check(&sys, &CoinCocycle::measure(0.25), 100, 1).is_err());
    }

    #[test]
    fn drifts() {
        let circ = CircleCocycle { amp: 0.8 };
        let mu = FiniteMeasure::uniform(vec![
            CircleStep { alpha: 0.17, s: 1.0 },
            CircleStep { alpha: 0.83, s: -1.0 },
            CircleStep { alpha: 0.41, s: 0.5 },
            CircleStep { alpha: 0.59, s: -0.5 },
        ])
        .unwrap();
        assert!(cocycle_check(&circ, &mu, 1000, 2).unwrap() < 1e-9);
        let d = drift(&circ, &mu, 20_000, 5);
        assert!(d.mean.abs() < 3.0 * d.stderr.max(1e-12), "{d:?}");
        let c = drift(&CoinCocycle::default(), &FiniteMeasure::dirac(Translation(0.75)), 10, 1);
        assert_eq!((c.mean, c.stderr), (0.75, 0.0));
    }

    #[test]
    fn zero_cocycle_visits_every_step() {
        let r = birkhoff_recurrence(&CircleCocycle { amp: 0.0 }, &FiniteMeasure::dirac(CircleStep { alpha: 0.1, s: 0.0 }), (-0.5, 0.5), 0.0, 100, 8, 1);
        assert!(r.visits.iter().all(|v| *v == 100));
    }

    #[test]
    fn coin_recurrence_and_drift_escape() {
        let sys = CoinCocycle { integer: true };
        let r = birkhoff_recurrence(&sys, &CoinCocycle::measure(0.0), (-1.0, 1.0), 0.0, 40_000, 200, 9);
        assert!(r.recurrent_consistent(), "{}", r.doubling_ratio);
        let e = birkhoff_recurrence(&CoinCocycle::default(), &CoinCocycle::measure(0.1), (-1.0, 1.0), 0.0, 40_000, 200, 9);
        assert!(e.escape_fraction() >= 0.99);
        assert!(!e.recurrent_consistent());
    }

    #[test]
    fn coin_visits_follow_local_time_law() {
        // Visits to {−1, 0, 1} by time n are about 3√n|Z| for Z standard normal.
        let (n, m, chains) = (10_000usize, 100u64, 2000);
        let r = birkhoff_recurrence(&CoinCocycle { integer: true }, &CoinCocycle::measure(0.0), (-1.0, 1.0), 0.0, n, chains, 4);
        let z = m as f64 / (3.0 * (n as f64).sqrt());
        let oracle = 1.0 - libm::erf(z / std::f64::consts::SQRT_2);
        let got = r.fraction_with_at_least(m);
        assert!((got - oracle).abs() < 0.04, "{got} vs {oracle}");
    }

    #[test]
    fn fiber_translation_equivariance() {
        let sys = CoinCocycle { integer: true };
        let mu = CoinCocycle::measure(0.0);
        let a = birkhoff_recurrence(&sys, &mu, (-2.0, 3.0), 0.0, 5000, 64, 4);
        let b = birkhoff_recurrence(&sys, &mu, (5.0, 10.0), 7.0, 5000, 64, 4);
        assert_eq!(a.visits, b.visits);
        assert_eq!(a.last_visit, b.last_visit);
        let p = birkhoff_path(&sys, &mu, &(), 0.0, 300, &mut chain_rng(2, 0));
        let q = birkhoff_path(&sys, &mu, &(), 11.0, 300, &mut chain_rng(2, 0));
        assert!(p.iter().zip(&q).all(|(x, y)| x + 11.0 == *y));
    }

    #[test]
    fn skew_product_matches_birkhoff_sums() {
        let sys = pair_rho();
        let mu = models::hyperbolic_pair(0.0);
        let x0 = sys.rho[0];
        let direct = birkhoff_path(&sys, &mu, &x0, 0.0, 500, &mut chain_rng(8, 3));
        let mut rng = chain_rng(8, 3);
        let mut p = (x0, 0.0);
        for s in direct.iter().skip(1) {
            p = skew_step(&sys, mu.sample(&mut rng), &p);
            assert_eq!(p.1, *s);
        }
    }
}
