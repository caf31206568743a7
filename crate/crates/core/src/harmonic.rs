//! The free group `Γ = ⟨a, b⟩ ⊂ SL(2, ℤ)` with `a = [[1,2],[0,1]]`,
//! `b = [[1,0],[2,1]]`: reduced words, abelianization to ℤ², the stationary
//! measure ν on ℙ¹ and singularity diagnostics.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{EmpiricalMeasure, FiniteMeasure, Group, Space, Zk};
use crate::projective::{delta_bar, proj_act, stationarity_defect, Mat, ProjPoint, Vect};
use crate::rng::{chain_rng, par_blocks};
use crate::stats::{linear_fit, percentile_sorted};
use crate::walk::{chung_fuchs, recurrence_classifier, ChungFuchsRow, Classification, ClassifierConfig, WalkConfig};

/// Letters `a = 1`, `a⁻¹ = −1`, `b = 2`, `b⁻¹ = −2`.
pub type Letter = i8;

/// Exact 2×2 integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BigMat(pub [BigInt; 4]);

impl BigMat {
    pub fn identity() -> Self {
        BigMat([BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one()])
    }

    /// `self · letter` by column operations.
    pub fn mul_letter(&mut self, l: Letter) {
        let [p, q, r, s] = &mut self.0;
        match l {
            1 => {
                *q += &*p * 2;
                *s += &*r * 2;
            }
            -1 => {
                *q -= &*p * 2;
                *s -= &*r * 2;
            }
            2 => {
                *p += &*q * 2;
                *r += &*s * 2;
            }
            -2 => {
                *p -= &*q * 2;
                *r -= &*s * 2;
            }
            _ => unreachable!("letters are ±1, ±2"),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let [a, b, c, d] = &self.0;
        let [e, f, g, h] = &o.0;
        BigMat([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }

    pub fn det(&self) -> BigInt {
        let [a, b, c, d] = &self.0;
        a * d - b * c
    }

    /// Floating matrix proportional to `self`, scaled so the largest entry has about 60 bits.
    pub fn to_scaled_f64(&self) -> Mat<2> {
        let bits = self.0.iter().map(|x| x.bits()).max().unwrap_or(0);
        let shift = bits.saturating_sub(60);
        let f = |x: &BigInt| (x.abs() >> shift).to_f64().unwrap_or(f64::NAN) * if x.is_negative() { -1.0 } else { 1.0 };
        Mat::<2>::new(f(&self.0[0]), f(&self.0[1]), f(&self.0[2]), f(&self.0[3]))
    }

    pub fn to_f64(&self) -> Mat<2> {
        let f = |x: &BigInt| x.to_f64().unwrap_or(f64::NAN);
        Mat::<2>::new(f(&self.0[0]), f(&self.0[1]), f(&self.0[2]), f(&self.0[3]))
    }
}

/// Reduced word over `{a, a⁻¹, b, b⁻¹}` with its matrix.
#[derive(Clone, Debug)]
pub struct FreeWord {
    letters: Vec<Letter>,
    matrix: BigMat,
}

impl PartialEq for FreeWord {
    fn eq(&self, o: &Self) -> bool {
        self.letters == o.letters
    }
}
impl Eq for FreeWord {}
impl std::hash::Hash for FreeWord {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.letters.hash(h)
    }
}

fn reduce(letters: impl IntoIterator<Item = Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

impl FreeWord {
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Self {
        let letters = reduce(letters);
        let mut matrix = BigMat::identity();
        for &l in &letters {
            matrix.mul_letter(l);
        }
        Self { letters, matrix }
    }

    pub fn a() -> Self {
        Self::new([1])
    }

    pub fn b() -> Self {
        Self::new([2])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn matrix(&self) -> &BigMat {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Exponent sums of a and b.
    pub fn abelianize(&self) -> Zk<2> {
        let mut v = [0i64; 2];
        for &l in &self.letters {
            v[(l.unsigned_abs() - 1) as usize] += l.signum() as i64;
        }
        Zk(v)
    }

    /// ℓ¹ length of the abelianization.
    pub fn abel_len(&self) -> i64 {
        self.abelianize().l1()
    }
}

impl Group for FreeWord {
    fn compose(&self, o: &Self) -> Self {
        let letters = reduce(self.letters.iter().chain(&o.letters).copied());
        FreeWord { letters, matrix: self.matrix.mul(&o.matrix) }
    }
    fn identity_like(&self) -> Self {
        FreeWord::new([])
    }
    fn inverse(&self) -> Self {
        FreeWord::new(self.letters.iter().rev().map(|l| -l))
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for &l in &self.letters {
            f.write_str(match l {
                1 => "a",
                -1 => "A",
                2 => "b",
                _ => "B",
            })?;
        }
        Ok(())
    }
}

/// Parses words like `abAB`, `ab^-1a`, `a⁻¹b^3` (capitals are inverses; `e` is the identity).
impl FromStr for FreeWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().replace('⁻', "^-").replace('¹', "1");
        if s == "e" || s.is_empty() {
            return Ok(FreeWord::new([]));
        }
        let chars: Vec<char> = s.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let base: Letter = match chars[i] {
                'a' => 1,
                'A' => -1,
                'b' => 2,
                'B' => -2,
                c => return Err(Error::Parse(format!("unexpected `{c}` in word `{s}`"))),
            };
            i += 1;
            let mut exp: i64 = 1;
            if i < chars.len() && chars[i] == '^' {
                let start = i + 1;
                let mut j = start;
                if j < chars.len() && chars[j] == '-' {
                    j += 1;
                }
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let t: String = chars[start..j].iter().collect();
                exp = t.parse().map_err(|_| Error::Parse(format!("bad exponent in `{s}`")))?;
                i = j;
            }
            let l = if exp < 0 { -base } else { base };
            out.extend(std::iter::repeat_n(l, exp.unsigned_abs() as usize));
        }
        Ok(FreeWord::new(out))
    }
}

/// Uniform law on `{a, a⁻¹, b, b⁻¹}`.
pub fn uniform4() -> FiniteMeasure<FreeWord> {
    FiniteMeasure::uniform(vec![FreeWord::new([1]), FreeWord::new([-1]), FreeWord::new([2]), FreeWord::new([-2])]).expect("four atoms")
}

/// Whether the words generate the whole free group (Stallings folding).
pub fn generates_free_group(words: &[FreeWord]) -> bool {
    // Edges (from, label ∈ {1, 2}, to); vertex 0 is the base point.
    let mut edges: Vec<(usize, Letter, usize)> = Vec::new();
    let mut next = 1;
    for w in words {
        let ls = w.letters();
        let mut v = 0;
        for (i, &l) in ls.iter().enumerate() {
            let u = if i + 1 == ls.len() {
                0
            } else {
                next += 1;
                next - 1
            };
            if l > 0 {
                edges.push((v, l, u));
            } else {
                edges.push((u, -l, v));
            }
            v = u;
        }
    }
    let mut parent: Vec<usize> = (0..next).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    loop {
        let mut merged = false;
        let mut out: std::collections::HashMap<(usize, Letter, bool), usize> = std::collections::HashMap::new();
        for &(f, l, t) in &edges {
            let (f, t) = (find(&mut parent, f), find(&mut parent, t));
            for (key, target) in [((f, l, true), t), ((t, l, false), f)] {
                match out.get(&key) {
                    Some(&o) if o != target => {
                        let (x, y) = (find(&mut parent, o), find(&mut parent, target));
                        if x != y {
                            parent[x.max(y)] = x.min(y);
                            merged = true;
                        }
                    }
                    Some(_) => {}
                    None => {
                        out.insert(key, target);
                    }
                }
            }
        }
        if !merged {
            break;
        }
    }
    let root = find(&mut parent, 0);
    let mut reach: HashSet<usize> = HashSet::from([root]);
    let mut labels = HashSet::new();
    let mut changed = true;
    while changed {
        changed = false;
        for &(f, l, t) in &edges {
            let (f, t) = (find(&mut parent, f), find(&mut parent, t));
            if reach.contains(&f) || reach.contains(&t) {
                changed |= reach.insert(f) | reach.insert(t);
                if f == root && t == root {
                    labels.insert(l);
                }
            }
        }
    }
    reach.len() == 1 && labels.len() == 2
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    /// `Σ μ(γ) |γ̄|²`.
    pub second_moment: f64,
    /// `Σ μ(γ) γ̄`.
    pub drift: (f64, f64),
    pub symmetric: bool,
    pub adapted: bool,
    /// Finite support makes the moment finite.
    pub finite_support: bool,
    pub flagged: bool,
}

pub fn moment_check(mu: &FiniteMeasure<FreeWord>) -> MomentReport {
    let mut m2 = 0.0;
    let mut drift = (0.0, 0.0);
    for (g, w) in mu.iter() {
        let v = g.abelianize();
        m2 += w * (v.l1() as f64).powi(2);
        drift.0 += w * v.0[0] as f64;
        drift.1 += w * v.0[1] as f64;
    }
    let symmetric = mu.is_symmetric();
    let adapted = generates_free_group(mu.atoms());
    MomentReport { second_moment: m2, drift, symmetric, adapted, finite_support: true, flagged: !(symmetric && adapted) }
}

#[derive(Clone, Debug, Serialize)]
pub struct AbelianReport {
    pub rows: Vec<ChungFuchsRow>,
    pub classification: Classification,
    /// Chains that left the box `|x|_∞ ≤ r` and came back within the horizon.
    pub return_fraction: f64,
    pub box_radius: i64,
}

/// The image walk `γ̄₁ + … + γ̄_n` on ℤ²: Chung-Fuchs sums at the origin and box returns.
pub fn abelianized_recurrence(
    mu: &FiniteMeasure<FreeWord>,
    horizon: usize,
    chains: usize,
    seed: u64,
    box_radius: i64,
    classifier: &ClassifierConfig,
) -> Result<AbelianReport> {
    let image = mu.map(|g| g.abelianize());
    let image = FiniteMeasure::merged(image.atoms().to_vec(), image.weights().to_vec())?;
    let cfg = WalkConfig::new(image, Zk([0, 0]), horizon, chains, seed)?;
    let origin = |x: &Zk<2>| x.0 == [0, 0];
    let rows = chung_fuchs(&cfg, &origin);
    let classification = recurrence_classifier(&rows, classifier);
    let in_box = |x: &Zk<2>| x.0.iter().all(|c| c.abs() <= box_radius);
    let returned: usize = par_blocks(chains, |range| {
        range
            .filter(|&c| {
                let mut rng = chain_rng(seed ^ 0xb0c5, c as u64);
                let mut x = Zk([0, 0]);
                let mut left = false;
                for _ in 0..horizon {
                    x = cfg.step(&x, &mut rng);
                    if !in_box(&x) {
                        left = true;
                    } else if left {
                        return true;
                    }
                }
                false
            })
            .count()
    })
    .iter()
    .sum();
    Ok(AbelianReport { rows, classification, return_fraction: returned as f64 / chains as f64, box_radius })
}

/// Non-collapse threshold on the per-chain cloud diameter.
pub const COLLAPSE_FLAG: f64 = 1e-3;
/// Number of spread seed directions.
pub const SEEDS: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct NuReport {
    pub nu: EmpiricalMeasure,
    pub diameters: Vec<f64>,
    pub defect: f64,
    /// Fraction of chains whose cloud did not collapse below `COLLAPSE_FLAG`.
    pub noncollapse_fraction: f64,
    /// The support does not generate Γ.
    pub degenerate: bool,
}

impl NuReport {
    pub fn collapse_fraction(&self, threshold: f64) -> f64 {
        self.diameters.iter().filter(|d| **d < threshold).count() as f64 / self.diameters.len() as f64
    }
}

/// Forward products `Y_1 ⋯ Y_n` (exact) applied to a spread seed on ℙ¹.
pub fn nu_sample(mu: &FiniteMeasure<FreeWord>, n: usize, chains: usize, seed: u64, bins: usize) -> NuReport {
    let seeds: Vec<ProjPoint<2>> = (0..SEEDS).map(|i| ProjPoint::from_angle((i as f64 + 0.5) * std::f64::consts::PI / SEEDS as f64)).collect();
    let per: Vec<(f64, f64)> = par_blocks(chains, |range| {
        range
            .map(|c| {
                let mut rng = chain_rng(seed, c as u64);
                let mut m = BigMat::identity();
                for _ in 0..n {
                    for &l in mu.sample(&mut rng).letters() {
                        m.mul_letter(l);
                    }
                }
                let f = m.to_scaled_f64();
                let imgs: Vec<ProjPoint<2>> = seeds.iter().map(|x| ProjPoint::from_vector(&(f * x.vector())).0).collect();
                let mut diam: f64 = 0.0;
                for i in 0..imgs.len() {
                    for j in i + 1..imgs.len() {
                        diam = diam.max(delta_bar(&imgs[i], &imgs[j]));
                    }
                }
                (imgs[0].angle(), diam)
            })
            .collect::<Vec<_>>()
    })
    .concat();
    let angles: Vec<f64> = per.iter().map(|p| p.0).collect();
    let diameters: Vec<f64> = per.iter().map(|p| p.1).collect();
    let mats = mu.map(|g| g.matrix().to_f64());
    let defect = stationarity_defect(&mats, &angles, bins);
    let noncollapse = diameters.iter().filter(|d| **d > COLLAPSE_FLAG).count() as f64 / chains as f64;
    NuReport {
        nu: EmpiricalMeasure::unweighted(Space::Projective, angles),
        diameters,
        defect,
        noncollapse_fraction: noncollapse,
        degenerate: !generates_free_group(mu.atoms()),
    }
}

/// Stationarity check of a ℙ¹ sample against the matrix image of μ.
pub fn nu_defect(mu: &FiniteMeasure<FreeWord>, angles: &[f64], bins: usize) -> f64 {
    stationarity_defect(&mu.map(|g| g.matrix().to_f64()), angles, bins)
}

/// Smallest mean ball count for a scale to be kept.
pub const MIN_BALL_COUNT: f64 = 10.0;
/// Smallest expected count per dyadic interval.
pub const MIN_DYADIC_COUNT: f64 = 32.0;
/// Reference points used for local-dimension slopes.
pub const DEFAULT_REFS: usize = 2000;
pub const BOOTSTRAP: usize = 200;

/// `n` log-spaced ball radii on `[lo, hi]`.
pub fn log_scales(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1).max(1) as f64).exp()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleRow {
    pub r: f64,
    pub mean_count: f64,
    pub kept: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularityReport {
    pub samples: usize,
    pub scales: Vec<ScaleRow>,
    pub notices: Vec<String>,
    /// Mean over reference points of the fitted local dimension.
    pub mean_local_dim: f64,
    /// Bootstrap 95% interval for the mean.
    pub ci: (f64, f64),
    pub points_used: usize,
    /// `(depth k, max_I ν̂(I) · 2^k)` over dyadic intervals of ℙ¹ = [0, π).
    pub dyadic: Vec<(usize, f64)>,
}

impl SingularityReport {
    /// Mean dimension below `threshold` and CI excluding 1.
    pub fn singular_consistent(&self, threshold: f64) -> bool {
        self.mean_local_dim < threshold && self.ci.1 < 1.0
    }

    pub fn dyadic_increasing(&self) -> bool {
        self.dyadic.len() >= 2 && self.dyadic.last().map(|d| d.1) > self.dyadic.first().map(|d| d.1)
    }
}

/// Local-dimension slopes of `log ν̂(B(x, r))` vs `log r` and dyadic mass ratios.
pub fn singularity_diagnostics(angles: &[f64], scales: &[f64], refs: usize, depth: usize, seed: u64) -> Result<SingularityReport> {
    let n = angles.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let pi = std::f64::consts::PI;
    let mut sorted: Vec<f64> = angles.iter().map(|a| a.rem_euclid(pi)).collect();
    sorted.sort_by(f64::total_cmp);
    let below = |x: f64| sorted.partition_point(|v| *v < x);
    let below_eq = |x: f64| sorted.partition_point(|v| *v <= x);
    // Points within circular distance r of x, excluding x itself once.
    let count = |x: f64, r: f64| -> usize {
        if 2.0 * r >= pi {
            return n - 1;
        }
        let (lo, hi) = (x - r, x + r);
        let mut c = below_eq(hi.min(pi)) - below(lo.max(0.0));
        if lo < 0.0 {
            c += n - below(lo + pi);
        }
        if hi >= pi {
            c += below_eq(hi - pi);
        }
        c - 1
    };
    let refs = refs.min(n);
    let ref_pts: Vec<f64> = angles[..refs].to_vec();
    let counts: Vec<Vec<usize>> = ref_pts.iter().map(|&x| scales.iter().map(|&r| count(x, r)).collect()).collect();
    let mut notices = Vec::new();
    let rows: Vec<ScaleRow> = scales
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let mean = counts.iter().map(|c| c[j] as f64).sum::<f64>() / refs as f64;
            let kept = mean >= MIN_BALL_COUNT;
            if !kept {
                notices.push(format!("scale {r:.3e} dropped: mean ball count {mean:.1} < {MIN_BALL_COUNT}"));
            }
            ScaleRow { r, mean_count: mean, kept }
        })
        .collect();
    let slopes: Vec<f64> = counts
        .iter()
        .filter_map(|c| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .zip(c)
                .filter(|(row, &k)| row.kept && k > 0)
                .map(|(row, &k)| (row.r.ln(), (k as f64 / (n - 1) as f64).ln()))
                .unzip();
            (xs.len() >= 3).then(|| linear_fit(&xs, &ys).slope)
        })
        .collect();
    if slopes.is_empty() {
        return Err(Error::InvalidArgument("no reference point has three usable scales".into()));
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let mut rng = chain_rng(seed, 0);
    let mut boots: Vec<f64> = (0..BOOTSTRAP)
        .map(|_| (0..slopes.len()).map(|_| slopes[rng.gen_range(0..slopes.len())]).sum::<f64>() / slopes.len() as f64)
        .collect();
    boots.sort_by(f64::total_cmp);
    let ci = (percentile_sorted(&boots, 0.025), percentile_sorted(&boots, 0.975));
    let mut dyadic = Vec::new();
    for k in 1..=depth {
        let cells = 1usize << k;
        if (n as f64) / (cells as f64) < MIN_DYADIC_COUNT {
            notices.push(format!("dyadic depth {k} dropped: fewer than {MIN_DYADIC_COUNT} expected samples per interval"));
            break;
        }
        let mut h = vec![0usize; cells];
        for &a in &sorted {
            h[((a / pi * cells as f64) as usize).min(cells - 1)] += 1;
        }
        let max = *h.iter().max().expect("nonempty");
        dyadic.push((k, max as f64 * cells as f64 / n as f64));
    }
    Ok(SingularityReport { samples: n, scales: rows, notices, mean_local_dim: mean, ci, points_used: slopes.len(), dyadic })
}

#[derive(Clone, Debug, Serialize)]
pub struct FreenessReport {
    pub max_len: usize,
    pub words: usize,
    /// All reduced words have pairwise distinct matrices.
    pub distinct: bool,
}

/// Enumerates reduced words up to `max_len` and checks their matrices are distinct.
pub fn freeness_check(max_len: usize) -> FreenessReport {
    fn mul(m: [i64; 4], l: Letter) -> [i64; 4] {
        let [p, q, r, s] = m;
        match l {
            1 => [p, q + 2 * p, r, s + 2 * r],
            -1 => [p, q - 2 * p, r, s - 2 * r],
            2 => [p + 2 * q, q, r + 2 * s, s],
            _ => [p - 2 * q, q, r - 2 * s, s],
        }
    }
    let mut seen: HashSet<[i64; 4]> = HashSet::new();
    let mut words = 0usize;
    let mut distinct = true;
    let mut stack: Vec<([i64; 4], Letter, usize)> = vec![([1, 0, 0, 1], 0, 0)];
    while let Some((m, last, len)) = stack.pop() {
        words += 1;
        distinct &= seen.insert(m);
        if len == max_len {
            continue;
        }
        for l in [1, -1, 2, -2] {
            if l != -last {
                stack.push((mul(m, l), l, len + 1));
            }
        }
    }
    FreenessReport { max_len, words, distinct }
}

/// Vector form of a direction, for callers that need ℙ¹ points from angles.
pub fn direction(theta: f64) -> Vect<2> {
    *ProjPoint::from_angle(theta).vector()
}

/// Image of a direction under a word's matrix.
pub fn act(word: &FreeWord, theta: f64) -> f64 {
    proj_act(&word.matrix().to_f64(), &ProjPoint::from_angle(theta)).angle()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> FreeWord {
        s.parse().unwrap()
    }

    #[test]
    fn word_examples() {
        let x = w("abab^-1a");
        assert_eq!(x.abelianize(), Zk([3, 0]));
        assert_eq!(x.abel_len(), 3);
        assert_eq!(w("abAB").abelianize(), Zk([0, 0]));
        assert_eq!(w("a⁻¹b").letters(), &[-1, 2]);
        let ab = w("ab").matrix().clone();
        assert_eq!(ab, BigMat([5.into(), 2.into(), 2.into(), 1.into()]));
        assert_eq!(w("aA"), w("e"));
        assert_eq!(w("a^3").letters(), &[1, 1, 1]);
        assert_eq!(w("abAB").to_string(), "abAB");
        assert!("abc".parse::<FreeWord>().is_err());
    }

    #[test]
    fn homomorphism_and_determinant() {
        let mut rng = chain_rng(4, 0);
        for _ in 0..200 {
            let mut rand_word = |len: usize| FreeWord::new((0..len).map(|_| [1, -1, 2, -2][rng.gen_range(0..4)]));
            let (u, v) = (rand_word(30), rand_word(50));
            let uv = u.compose(&v);
            assert_eq!(uv.abelianize(), u.abelianize().compose(&v.abelianize()));
            assert_eq!(uv.matrix(), &FreeWord::new(u.letters().iter().chain(v.letters()).copied()).matrix().clone());
            assert!(uv.matrix().det().is_one());
        }
    }

    #[test]
    fn moments() {
        let r = moment_check(&uniform4());
        assert_eq!(r.second_moment, 1.0);
        assert_eq!(r.drift, (0.0, 0.0));
        assert!(r.symmetric && r.adapted && !r.flagged);
        let d = moment_check(&FiniteMeasure::dirac(w("a")));
        assert_eq!(d.drift, (1.0, 0.0));
        assert!(d.flagged && !d.symmetric && !d.adapted);
        let mixed = FiniteMeasure::uniform(vec![w("a^2"), w("a^-2"), w("b"), w("B"), w("ab"), w("BA")]).unwrap();
        let oracle: f64 = [4.0, 4.0, 1.0, 1.0, 4.0, 4.0].iter().sum::<f64>() / 6.0;
        assert!((moment_check(&mixed).second_moment - oracle).abs() < 1e-12);
    }

    #[test]
    fn stallings() {
        assert!(generates_free_group(&[w("a"), w("b")]));
        assert!(generates_free_group(&[w("ab"), w("b")]));
        assert!(!generates_free_group(&[w("a^2"), w("b")]));
        assert!(!generates_free_group(&[w("a")]));
        assert!(!generates_free_group(&[w("abAB"), w("a")]));
        assert!(generates_free_group(&[w("ab"), w("aab"), w("b")]));
    }

    #[test]
    fn abelian_walks() {
        let cfg = ClassifierConfig::default();
        let r = abelianized_recurrence(&FiniteMeasure::dirac(w("a")), 3000, 64, 1, 1, &cfg).unwrap();
        assert_eq!(r.classification.verdict, crate::walk::Verdict::TransientConsistent);
        assert_eq!(r.return_fraction, 0.0);
    }

    #[test]
    fn parabolic_cloud_flagged() {
        let r = nu_sample(&FiniteMeasure::dirac(w("a")), 200, 16, 1, 32);
        assert!(r.degenerate);
        assert_eq!(r.collapse_fraction(1e-6), 0.0);
        assert!(r.nu.points.iter().all(|t| t.min(std::f64::consts::PI - t) < 0.05));
    }

    #[test]
    fn collapse_for_free_group() {
        let r = nu_sample(&uniform4(), 200, 256, 2, 32);
        assert!(r.collapse_fraction(1e-6) >= 0.99);
        assert!(!r.degenerate);
    }

    #[test]
    fn controls() {
        let mut rng = chain_rng(1, 0);
        let pi = std::f64::consts::PI;
        let uniform: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>() * pi).collect();
        let scales = log_scales(1e-3, 1e-1, 8);
        let l = singularity_diagnostics(&uniform, &scales, 2000, 10, 3).unwrap();
        assert!((l.mean_local_dim - 1.0).abs() < 0.02, "{}", l.mean_local_dim);
        assert!(l.dyadic.iter().all(|d| d.1 < 2.0));
        let dirac = vec![0.7; 1000];
        let d = singularity_diagnostics(&dirac, &scales, 100, 4, 3).unwrap();
        assert!(d.mean_local_dim.abs() < 1e-12);
        let sparse: Vec<f64> = uniform[..3000].to_vec();
        let s = singularity_diagnostics(&sparse, &scales, 1000, 2, 1).unwrap();
        assert!(!s.notices.is_empty() && s.scales.iter().any(|r| r.kept));
        assert!(singularity_diagnostics(&uniform[..100], &scales, 100, 2, 1).is_err());
    }

    #[test]
    fn free_up_to_length_eight() {
        let r = freeness_check(8);
        assert_eq!(r.words, 1 + 2 * (3usize.pow(8) - 1));
        assert!(r.distinct);
    }
}
