//! Finitely supported laws on groups and weighted point clouds on spaces.

use std::collections::HashMap;
use std::hash::Hash;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// A group: composition, identity and inverse.
pub trait Group: Clone + Send + Sync {
    /// `self · other`.
    fn compose(&self, other: &Self) -> Self;
    fn identity_like(&self) -> Self;
    fn inverse(&self) -> Self;
}

/// ℤ^K as an additive group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Zk<const K: usize>(pub [i64; K]);

impl<const K: usize> Group for Zk<K> {
    fn compose(&self, other: &Self) -> Self {
        let mut out = self.0;
        for (o, x) in out.iter_mut().zip(other.0) {
            *o += x;
        }
        Zk(out)
    }
    fn identity_like(&self) -> Self {
        Zk([0; K])
    }
    fn inverse(&self) -> Self {
        Zk(self.0.map(|x| -x))
    }
}

impl<const K: usize> Zk<K> {
    pub fn unit(i: usize, s: i64) -> Self {
        let mut v = [0; K];
        v[i] = s;
        Zk(v)
    }

    /// Uniform law on `±e_i`.
    pub fn simple_walk() -> FiniteMeasure<Self> {
        let atoms = (0..K).flat_map(|i| [Self::unit(i, 1), Self::unit(i, -1)]).collect();
        FiniteMeasure::uniform(atoms).expect("nonempty")
    }

    pub fn l1(&self) -> i64 {
        self.0.iter().map(|x| x.abs()).sum()
    }
}

/// ℤ/n as an additive group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cyclic {
    pub n: u32,
    pub k: u32,
}

impl Group for Cyclic {
    fn compose(&self, other: &Self) -> Self {
        Cyclic { n: self.n, k: (self.k + other.k) % self.n }
    }
    fn identity_like(&self) -> Self {
        Cyclic { n: self.n, k: 0 }
    }
    fn inverse(&self) -> Self {
        Cyclic { n: self.n, k: (self.n - self.k) % self.n }
    }
}

#[derive(Clone, Debug)]
enum Sampler {
    Uniform,
    Weighted(WeightedIndex<f64>),
}

/// Probability measure with finitely many atoms.
#[derive(Clone, Debug)]
pub struct FiniteMeasure<G> {
    atoms: Vec<G>,
    weights: Vec<f64>,
    sampler: Sampler,
}

/// Tolerance on the total weight.
pub const WEIGHT_TOL: f64 = 1e-12;

impl<G: Clone> FiniteMeasure<G> {
    pub fn new(atoms: Vec<G>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::InvalidArgument("measure needs one positive weight per atom".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        let uniform = weights.iter().all(|w| *w == weights[0]);
        let sampler = if uniform {
            Sampler::Uniform
        } else {
            Sampler::Weighted(WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(e.to_string()))?)
        };
        Ok(Self { atoms, weights, sampler })
    }

    pub fn uniform(atoms: Vec<G>) -> Result<Self> {
        let n = atoms.len();
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    pub fn dirac(g: G) -> Self {
        Self::new(vec![g], vec![1.0]).expect("valid")
    }

    pub fn atoms(&self) -> &[G] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&G, f64)> {
        self.atoms.iter().zip(self.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Index of an atom drawn with its weight.
    #[inline]
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.sampler {
            Sampler::Uniform => rng.gen_range(0..self.atoms.len()),
            Sampler::Weighted(w) => w.sample(rng),
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &G {
        &self.atoms[self.sample_index(rng)]
    }

    /// Image measure under `f`.
    pub fn map<H: Clone>(&self, f: impl Fn(&G) -> H) -> FiniteMeasure<H> {
        FiniteMeasure::new(self.atoms.iter().map(f).collect(), self.weights.clone()).expect("same weights")
    }
}

impl<G: Group + Eq + Hash> FiniteMeasure<G> {
    /// Merges equal atoms.
    pub fn merged(atoms: Vec<G>, weights: Vec<f64>) -> Result<Self> {
        let mut order: Vec<G> = Vec::new();
        let mut acc: HashMap<G, f64> = HashMap::new();
        for (g, w) in atoms.into_iter().zip(weights) {
            let e = acc.entry(g.clone()).or_insert_with(|| {
                order.push(g);
                0.0
            });
            *e += w;
        }
        let weights = order.iter().map(|g| acc[g]).collect();
        Self::new(order, weights)
    }

    /// Exact k-th convolution power `μ^k`, law of `Y_k ⋯ Y_1`.
    pub fn convolve_exact(&self, k: usize, budget: usize) -> Result<Self> {
        let mut cur = FiniteMeasure::dirac(self.atoms[0].identity_like());
        for _ in 0..k {
            if cur.len().saturating_mul(self.len()) > budget {
                return Err(Error::Budget(format!(
                    "support would reach {} elements (budget {budget}); use the Monte Carlo estimators",
                    cur.len() * self.len()
                )));
            }
            let mut atoms = Vec::with_capacity(cur.len() * self.len());
            let mut weights = Vec::with_capacity(atoms.capacity());
            for (x, wx) in cur.iter() {
                for (g, wg) in self.iter() {
                    atoms.push(g.compose(x));
                    weights.push(wx * wg);
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            cur = Self::merged(atoms, weights)?;
        }
        Ok(cur)
    }

    pub fn mass_of(&self, g: &G) -> f64 {
        self.iter().filter(|(a, _)| *a == g).map(|(_, w)| w).sum()
    }

    /// Every atom's inverse is an atom of equal weight.
    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(g, w)| (self.mass_of(&g.inverse()) - w).abs() <= WEIGHT_TOL)
    }
}

/// What an empirical measure's points are coordinates of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    /// Angle in [0, π) parameterizing ℙ¹.
    Projective,
    Real,
    Fiber,
    /// Integer bin or state labels.
    Bins,
}

/// Weighted point cloud.
#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalMeasure {
    pub space: Space,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Equal-width bins on `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Binning {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Binning {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(hi > lo && bins > 0);
        Self { lo, hi, bins }
    }

    pub fn projective(bins: usize) -> Self {
        Self::new(0.0, std::f64::consts::PI, bins)
    }

    #[inline]
    pub fn index(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        Some((((x - self.lo) / (self.hi - self.lo) * self.bins as f64) as usize).min(self.bins - 1))
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }
}

/// Bin masses plus the mass that fell outside the range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub binning: Binning,
    pub masses: Vec<f64>,
    pub overflow: f64,
}

impl Histogram {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum::<f64>() + self.overflow
    }

    /// Masses rescaled to sum to one over the in-range bins.
    pub fn normalized(&self) -> Vec<f64> {
        let s: f64 = self.masses.iter().sum();
        self.masses.iter().map(|m| m / s).collect()
    }
}

impl EmpiricalMeasure {
    pub fn new(space: Space, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be nonnegative, one per point".into()));
        }
        Ok(Self { space, points, weights })
    }

    pub fn unweighted(space: Space, points: Vec<f64>) -> Self {
        let n = points.len();
        Self { space, points, weights: vec![1.0 / n.max(1) as f64; n] }
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn histogram(&self, binning: Binning) -> Histogram {
        let mut masses = vec![0.0; binning.bins];
        let mut overflow = 0.0;
        for (&x, &w) in self.points.iter().zip(&self.weights) {
            match binning.index(x) {
                Some(i) => masses[i] += w,
                None => overflow += w,
            }
        }
        Histogram { binning, masses, overflow }
    }
}

/// Total-variation distance between two probability vectors.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
