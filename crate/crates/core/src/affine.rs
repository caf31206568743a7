//! Affine recursions `x ↦ a x + b` on ℝ and ℚ_p: criticality and fixed-point
//! checks, visit statistics, descending ladder epochs and the infinite
//! invariant measure.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{LocalField, PAdic, Wide};
use crate::markov::{Action, Bins, MarkovSystem, RatioReport};
use crate::measures::{Binning, FiniteMeasure, Group};
use crate::rng::{chain_rng, par_blocks, ChainRng};
use crate::stats::{linear_fit, Estimate, LinearFit};

/// Tolerance on `|∫ log|a| dμ|` for the criticality check.
pub const CRITICAL_TOL: f64 = 1e-12;
/// Ladder censoring share above which the sample is flagged.
pub const LADDER_CENSOR_FLAG: f64 = 0.05;
/// Bootstrap resamples for the tail-trend slope.
pub const BOOTSTRAP: usize = 200;

/// `x ↦ a x + b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineMap<T> {
    pub a: T,
    pub b: T,
}

impl<T: LocalField> AffineMap<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::InvalidArgument("affine coefficient a must be nonzero".into()));
        }
        Ok(Self { a, b })
    }

    pub fn apply(&self, x: &T) -> T {
        self.a.mul(x).add(&self.b)
    }

    /// Fixed point `b / (1 − a)`; `None` for translations.
    pub fn fixed_point(&self) -> Option<T> {
        let d = self.a.one_like().sub(&self.a);
        d.inv().map(|i| self.b.mul(&i))
    }
}

impl<T: LocalField> Group for AffineMap<T> {
    /// `(a₂, b₂)∘(a₁, b₁) = (a₂a₁, a₂b₁ + b₂)`.
    fn compose(&self, o: &Self) -> Self {
        AffineMap { a: self.a.mul(&o.a), b: self.a.mul(&o.b).add(&self.b) }
    }
    fn identity_like(&self) -> Self {
        AffineMap { a: self.a.one_like(), b: self.a.zero_like() }
    }
    fn inverse(&self) -> Self {
        let ai = self.a.inv().expect("a is nonzero");
        AffineMap { b: ai.mul(&self.b).neg(), a: ai }
    }
}

impl<T: LocalField> Action<T> for AffineMap<T> {
    fn act(&self, x: &T) -> T {
        self.apply(x)
    }
}

impl Action<Wide> for AffineMap<f64> {
    fn act(&self, x: &Wide) -> Wide {
        Wide::new(self.a).mul(x).add(&Wide::new(self.b))
    }
}

/// Law of `(a, b)` with independent rational coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineLaw {
    pub a: Vec<(Rational64, f64)>,
    pub b: Vec<(Rational64, f64)>,
}

/// Parses `v1,v2,…` (uniform) or `v1:w1,v2:w2,…`; values are integers or `n/d`.
pub fn parse_law(s: &str) -> Result<Vec<(Rational64, f64)>> {
    let parts: Vec<&str> = s.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        return Err(Error::Parse(format!("empty law `{s}`")));
    }
    let uniform = 1.0 / parts.len() as f64;
    parts
        .iter()
        .map(|p| {
            let (v, w) = match p.split_once(':') {
                Some((v, w)) => (v, w.parse::<f64>().map_err(|e| Error::Parse(format!("weight `{w}`: {e}")))?),
                None => (*p, uniform),
            };
            let r = Rational64::from_str(v.trim()).map_err(|e| Error::Parse(format!("value `{v}`: {e}")))?;
            Ok((r, w))
        })
        .collect()
}

fn rat_f64(r: &Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// p-adic valuation of a nonzero rational.
fn rat_val(r: &Rational64, p: u32) -> i64 {
    let v = |mut n: i64| {
        let mut k = 0;
        while n % p as i64 == 0 {
            n /= p as i64;
            k += 1;
        }
        k
    };
    v(*r.numer()) - v(*r.denom())
}

impl AffineLaw {
    pub fn new(a: Vec<(Rational64, f64)>, b: Vec<(Rational64, f64)>) -> Result<Self> {
        if a.iter().any(|(x, _)| x.is_zero()) {
            return Err(Error::InvalidArgument("affine coefficient a must be nonzero".into()));
        }
        Ok(Self { a, b })
    }

    pub fn parse(a: &str, b: &str) -> Result<Self> {
        Self::new(parse_law(a)?, parse_law(b)?)
    }

    fn pairs(&self) -> impl Iterator<Item = (&Rational64, &Rational64, f64)> {
        self.a.iter().flat_map(move |(a, wa)| self.b.iter().map(move |(b, wb)| (a, b, wa * wb)))
    }

    pub fn real_measure(&self) -> Result<FiniteMeasure<AffineMap<f64>>> {
        let (atoms, weights): (Vec<_>, Vec<_>) =
            self.pairs().map(|(a, b, w)| (AffineMap { a: rat_f64(a), b: rat_f64(b) }, w)).unzip();
        FiniteMeasure::new(atoms, weights)
    }

    pub fn padic_measure(&self, p: u32, prec: usize) -> Result<FiniteMeasure<AffineMap<PAdic>>> {
        let conv = |r: &Rational64| PAdic::from_rational(*r.numer(), *r.denom(), p, prec);
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for (a, b, w) in self.pairs() {
            atoms.push(AffineMap::new(conv(a)?, conv(b)?)?);
            weights.push(w);
        }
        FiniteMeasure::new(atoms, weights)
    }

    /// `∫ log|a| dμ` for the real or p-adic absolute value.
    pub fn log_drift(&self, field: AffineField) -> f64 {
        let total: f64 = self.a.iter().map(|(_, w)| w).sum();
        self.a
            .iter()
            .map(|(a, w)| {
                w / total
                    * match field {
                        AffineField::Real => rat_f64(a).abs().ln(),
                        AffineField::Padic(p) => -(rat_val(a, p) as f64) * (p as f64).ln(),
                    }
            })
            .sum()
    }

    /// Every atom's absolute value of `a` equals 1.
    pub fn isometric(&self, field: AffineField) -> bool {
        self.a.iter().all(|(a, _)| match field {
            AffineField::Real => rat_f64(a).abs() == 1.0,
            AffineField::Padic(p) => rat_val(a, p) == 0,
        })
    }

    /// Common fixed point `b/(1 − a)` shared by every atom, if any (exact).
    pub fn common_fixed_point(&self) -> Option<Rational64> {
        let mut common: Option<Rational64> = None;
        for (a, b, _) in self.pairs() {
            if a.is_one() {
                if b.is_zero() {
                    continue;
                }
                return None;
            }
            let x = b / (Rational64::one() - a);
            match common {
                None => common = Some(x),
                Some(c) if c == x => {}
                Some(_) => return None,
            }
        }
        common.or(Some(Rational64::zero()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AffineField {
    Real,
    Padic(u32),
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalityReport {
    pub log_drift: f64,
    pub critical: bool,
    /// Every `|a| = 1`: the walk is a translation-type walk.
    pub degenerate: bool,
    pub common_fixed_point: Option<String>,
    /// The `(2+δ)`-moment condition holds automatically for finite support.
    pub moment_condition: bool,
}

pub fn criticality(law: &AffineLaw, field: AffineField) -> CriticalityReport {
    let m = law.log_drift(field);
    CriticalityReport {
        log_drift: m,
        critical: m.abs() <= CRITICAL_TOL,
        degenerate: law.isometric(field),
        common_fixed_point: law.common_fixed_point().map(|r| r.to_string()),
        moment_condition: true,
    }
}

/// Errors unless `∫ log|a| dμ = 0` and the support has no common fixed point.
pub fn validate_critical(law: &AffineLaw, field: AffineField) -> Result<CriticalityReport> {
    let r = criticality(law, field);
    if !r.critical {
        return Err(Error::Hypothesis(format!(
            "criticality hypothesis ∫log|a|dμ = 0 fails: ∫log|a|dμ = {:.6e} ({} regime)",
            r.log_drift,
            if r.log_drift < 0.0 { "contracting" } else { "expanding" }
        )));
    }
    if let Some(x) = &r.common_fixed_point {
        return Err(Error::Hypothesis(format!("the support has the common fixed point {x}")));
    }
    Ok(r)
}

/// Exact element `num / p^k` of ℤ[1/p], normalized so that `p ∤ num` when `k > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerFraction {
    pub num: BigInt,
    pub k: u32,
}

impl PowerFraction {
    pub fn from_rational(r: &Rational64, p: u32) -> Result<Self> {
        let mut d = *r.denom();
        let mut k = 0;
        while d % p as i64 == 0 {
            d /= p as i64;
            k += 1;
        }
        if d != 1 {
            return Err(Error::InvalidArgument(format!("{r} is not in ℤ[1/{p}]")));
        }
        Ok(Self { num: BigInt::from(*r.numer()), k })
    }

    fn normalize(mut self, p: u32) -> Self {
        while self.k > 0 && (&self.num % p).is_zero() {
            self.num /= p;
            self.k -= 1;
        }
        if self.num.is_zero() {
            self.k = 0;
        }
        self
    }

    /// `log_p |x|_p`; `None` for zero.
    pub fn log_p_abs(&self, p: u32) -> Option<i64> {
        if self.num.is_zero() {
            return None;
        }
        if self.k > 0 {
            return Some(self.k as i64);
        }
        let mut n = self.num.abs();
        let mut v = 0;
        while (&n % p).is_zero() {
            n /= p;
            v += 1;
        }
        Some(-v)
    }

    /// `|x|_p ≤ p^r` for `r ≥ 0`.
    pub fn in_ball(&self, r: u32) -> bool {
        self.k <= r
    }

    pub fn to_padic(&self, p: u32, prec: usize) -> PAdic {
        let mut x = PAdic::zero(p, prec);
        let mut n = self.num.abs();
        let mut i = 0;
        while !n.is_zero() && i < prec as i64 {
            let d = (&n % p).to_i64().expect("digit fits");
            if d != 0 {
                x = x.add(&PAdic::from_i64(d, p, prec).shift(i));
            }
            n /= p;
            i += 1;
        }
        if self.num.is_negative() {
            x = x.neg();
        }
        x.shift(-(self.k as i64))
    }
}

/// `x ↦ ±p^e x + b` on ℤ[1/p], evaluated exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerAffine {
    pub p: u32,
    pub negative: bool,
    pub e: i32,
    pub b: PowerFraction,
}

impl PowerAffine {
    pub fn apply(&self, x: &PowerFraction) -> PowerFraction {
        let p = self.p;
        // a·x
        let (mut num, mut k) = (x.num.clone(), x.k as i64 - self.e as i64);
        if self.negative {
            num = -num;
        }
        if k < 0 {
            num *= BigInt::from(p).pow((-k) as u32);
            k = 0;
        }
        // + b
        let kk = k.max(self.b.k as i64) as u32;
        let lhs = num * BigInt::from(p).pow(kk - k as u32);
        let rhs = &self.b.num * BigInt::from(p).pow(kk - self.b.k);
        PowerFraction { num: lhs + rhs, k: kk }.normalize(p)
    }
}

impl AffineLaw {
    /// Exact p-adic law; requires `a = ±p^e` and `b ∈ ℤ[1/p]`.
    pub fn power_measure(&self, p: u32) -> Result<FiniteMeasure<PowerAffine>> {
        PAdic::check_prime(p)?;
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for (a, b, w) in self.pairs() {
            let e = rat_val(a, p);
            let unit = a / Rational64::from(p as i64).pow(e as i32);
            if unit.abs() != Rational64::one() {
                return Err(Error::InvalidArgument(format!("exact p-adic walk needs a = ±{p}^e, got {a}")));
            }
            atoms.push(PowerAffine { p, negative: unit.is_negative(), e: e as i32, b: PowerFraction::from_rational(b, p)? });
            weights.push(w);
        }
        FiniteMeasure::new(atoms, weights)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VisitReport {
    pub horizon: usize,
    /// Visits to the window in steps `1..=horizon`, per chain.
    pub visits: Vec<u64>,
    pub visits_half: Vec<u64>,
    pub doubling_ratio: f64,
}

impl VisitReport {
    pub fn fraction_with_at_least(&self, m: u64) -> f64 {
        self.visits.iter().filter(|v| **v >= m).count() as f64 / self.visits.len() as f64
    }

    fn from_counts(horizon: usize, per: Vec<(u64, u64)>) -> Self {
        let visits: Vec<u64> = per.iter().map(|p| p.0).collect();
        let visits_half: Vec<u64> = per.iter().map(|p| p.1).collect();
        let (t, h) = (visits.iter().sum::<u64>() as f64, visits_half.iter().sum::<u64>() as f64);
        Self { horizon, visits, visits_half, doubling_ratio: if h > 0.0 { t / h } else { f64::NAN } }
    }
}

fn visit_walk<S: Clone, M>(
    mu: &FiniteMeasure<M>,
    x0: &S,
    horizon: usize,
    chains: usize,
    seed: u64,
    step: impl Fn(&M, &S) -> S + Sync,
    inside: impl Fn(&S) -> bool + Sync,
) -> VisitReport
where
    M: Clone + Sync,
    S: Sync,
{
    let half = horizon / 2;
    let per = par_blocks(chains, |range| {
        range
            .map(|c| {
                let mut rng = chain_rng(seed, c as u64);
                let mut x = x0.clone();
                let (mut v, mut vh) = (0u64, 0u64);
                for n in 1..=horizon {
                    x = step(mu.sample(&mut rng), &x);
                    if inside(&x) {
                        v += 1;
                        if n <= half {
                            vh += 1;
                        }
                    }
                }
                (v, vh)
            })
            .collect::<Vec<_>>()
    })
    .concat();
    VisitReport::from_counts(horizon, per)
}

/// Visits of the real walk to `[−l, l]`.
pub fn affine_walk_real(mu: &FiniteMeasure<AffineMap<f64>>, x0: f64, l: f64, horizon: usize, chains: usize, seed: u64) -> VisitReport {
    visit_walk(mu, &Wide::new(x0), horizon, chains, seed, |g, x| g.act(x), |x| x.to_f64().abs() <= l)
}

/// Visits of the exact p-adic walk to the ball `|x|_p ≤ p^r`.
pub fn affine_walk_padic(mu: &FiniteMeasure<PowerAffine>, x0: &PowerFraction, r: u32, horizon: usize, chains: usize, seed: u64) -> VisitReport {
    visit_walk(mu, x0, horizon, chains, seed, |g, x| g.apply(x), |x| x.in_ball(r))
}

/// One real trajectory `x_0, …, x_horizon`.
pub fn trajectory_real(mu: &FiniteMeasure<AffineMap<f64>>, x0: f64, horizon: usize, rng: &mut ChainRng) -> Vec<Wide> {
    let mut out = Vec::with_capacity(horizon + 1);
    let mut x = Wide::new(x0);
    out.push(x);
    for _ in 0..horizon {
        x = mu.sample(rng).act(&x);
        out.push(x);
    }
    out
}

/// One ladder epoch: τ and the composed element `X_τ`.
#[derive(Clone, Debug, Serialize)]
pub struct LadderSample<T> {
    pub tau: usize,
    pub element: AffineMap<T>,
    pub censored: bool,
}

/// First n with `|a(Y_n ⋯ Y_1)| < 1`, drawing increments from `rng`.
pub fn ladder_epoch<T: LocalField>(mu: &FiniteMeasure<AffineMap<T>>, horizon: usize, rng: &mut impl Rng) -> LadderSample<T> {
    let mut x = mu.atoms()[0].identity_like();
    let mut log_a = 0.0;
    for n in 1..=horizon {
        let g = mu.sample(rng);
        log_a += g.a.log_abs();
        x = g.compose(&x);
        if log_a < -CRITICAL_TOL {
            return LadderSample { tau: n, element: x, censored: false };
        }
    }
    LadderSample { tau: horizon, element: x, censored: true }
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderReport {
    pub horizon: usize,
    pub chains: usize,
    /// τ per chain; `None` when censored at the horizon.
    pub taus: Vec<Option<usize>>,
    /// `m̂_τ = mean log|a(X_τ)|` over uncensored chains.
    pub m_tau: Estimate,
    pub censored_fraction: f64,
    pub flagged: bool,
    /// `(t, √t · P̂{τ > t})` for `t = 1..=horizon`.
    pub tail: Vec<(usize, f64)>,
    pub tail_sup: f64,
    pub trend: TailTrend,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailTrend {
    pub t_range: (usize, usize),
    pub fit: LinearFit,
    /// Bootstrap 95% interval for the slope.
    pub slope_ci: (f64, f64),
}

impl LadderReport {
    pub fn p_tau(&self, t: usize) -> Estimate {
        let xs: Vec<f64> = self.taus.iter().map(|x| (*x == Some(t)) as u8 as f64).collect();
        Estimate::from_samples(&xs)
    }

    /// No upward trend: the bootstrap slope interval reaches zero or below.
    pub fn no_upward_trend(&self) -> bool {
        self.trend.slope_ci.0 <= 0.0
    }
}

fn tail_curve(taus: &[Option<usize>], weights: Option<&[u32]>, horizon: usize) -> Vec<f64> {
    // survival[t] = #{τ > t}
    let mut hist = vec![0u64; horizon + 2];
    let mut total = 0u64;
    for (i, t) in taus.iter().enumerate() {
        let w = weights.map_or(1, |w| w[i] as u64);
        total += w;
        hist[t.unwrap_or(horizon + 1)] += w;
    }
    let mut out = vec![0.0; horizon + 1];
    let mut surv = total;
    for t in 0..=horizon {
        surv -= hist[t];
        out[t] = (t as f64).sqrt() * surv as f64 / total as f64;
    }
    out
}

/// Ladder epochs over `chains` independent runs, with the tail diagnostic on `t_range`.
pub fn ladder_sample<T: LocalField>(
    mu: &FiniteMeasure<AffineMap<T>>,
    chains: usize,
    horizon: usize,
    t_range: (usize, usize),
    seed: u64,
) -> (LadderReport, Vec<LadderSample<T>>) {
    let samples: Vec<LadderSample<T>> = par_blocks(chains, |range| {
        range.map(|c| ladder_epoch(mu, horizon, &mut chain_rng(seed, c as u64))).collect::<Vec<_>>()
    })
    .concat();
    let taus: Vec<Option<usize>> = samples.iter().map(|s| (!s.censored).then_some(s.tau)).collect();
    let logs: Vec<f64> = samples.iter().filter(|s| !s.censored).map(|s| s.element.a.log_abs()).collect();
    let censored_fraction = 1.0 - logs.len() as f64 / chains as f64;
    let curve = tail_curve(&taus, None, horizon);
    let (lo, hi) = (t_range.0.max(1), t_range.1.min(horizon));
    let ts: Vec<f64> = (lo..=hi).map(|t| t as f64).collect();
    let fit = linear_fit(&ts, &curve[lo..=hi]);
    let mut slopes: Vec<f64> = (0..BOOTSTRAP)
        .map(|r| {
            let mut rng = chain_rng(seed ^ 0x5eed_b007, r as u64);
            let mut w = vec![0u32; chains];
            for _ in 0..chains {
                w[rng.gen_range(0..chains)] += 1;
            }
            linear_fit(&ts, &tail_curve(&taus, Some(&w), horizon)[lo..=hi]).slope
        })
        .collect();
    slopes.sort_by(f64::total_cmp);
    let slope_ci = (
        crate::stats::percentile_sorted(&slopes, 0.025),
        crate::stats::percentile_sorted(&slopes, 0.975),
    );
    let report = LadderReport {
        horizon,
        chains,
        m_tau: Estimate::from_samples(&logs),
        censored_fraction,
        flagged: censored_fraction > LADDER_CENSOR_FLAG,
        tail: curve.iter().enumerate().skip(1).map(|(t, v)| (t, *v)).collect(),
        tail_sup: curve.iter().skip(1).copied().fold(0.0, f64::max),
        trend: TailTrend { t_range: (lo, hi), fit, slope_ci },
        taus,
    };
    (report, samples)
}

/// Successive ladder epochs along one path: returns the epoch times and the
/// values of the induced walk, together with the full trajectory.
pub fn induced_ladder_path(
    mu: &FiniteMeasure<AffineMap<f64>>,
    x0: f64,
    epochs: usize,
    max_steps: usize,
    rng: &mut ChainRng,
) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let mut full = vec![x0];
    let mut times = Vec::new();
    let mut induced = Vec::new();
    let (mut x_ind, mut n) = (x0, 0);
    'outer: for _ in 0..epochs {
        let mut g = mu.atoms()[0].identity_like();
        let mut log_a = 0.0;
        loop {
            if n == max_steps {
                break 'outer;
            }
            let h = mu.sample(rng);
            n += 1;
            full.push(h.apply(full.last().expect("nonempty")));
            log_a += h.a.log_abs();
            g = h.compose(&g);
            if log_a < -CRITICAL_TOL {
                break;
            }
        }
        x_ind = g.apply(&x_ind);
        times.push(n);
        induced.push(x_ind);
    }
    (times, induced, full)
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub windows: Vec<f64>,
    /// Cesàro mass of `[−L, L]` normalized by the mass of `[−1, 1]`.
    pub window_masses: Vec<f64>,
    /// `mass([−2L, 2L]) / mass([−L, L])` for consecutive windows.
    pub growth_ratios: Vec<f64>,
    /// `mass([−2L, 2L]) − mass([−L, L])`; roughly constant under logarithmic growth.
    pub growth_increments: Vec<f64>,
    pub defect: f64,
    pub bin_width: f64,
    pub masses: Vec<f64>,
}

/// Cesàro invariant measure of the real walk on unit bins over `[−2L_max, 2L_max]`.
pub fn invariant_measure_affine(
    mu: &FiniteMeasure<AffineMap<f64>>,
    x0: f64,
    windows: &[f64],
    n_max: usize,
    chains: usize,
    seed: u64,
) -> Result<InvariantReport> {
    let l_max = windows.iter().copied().fold(1.0, f64::max);
    let reach = 2.0 * l_max;
    let nb = (2.0 * reach).ceil() as usize;
    let grid = Binning::new(-reach, reach, nb);
    let index = |x: &Wide| grid.index(x.to_f64());
    let bins = Bins { count: nb, index: &index };
    let u = |x: &Wide| (x.to_f64().abs() <= 1.0) as u8 as f64;
    let sys: MarkovSystem<AffineMap<f64>, Wide> = MarkovSystem::new(mu.clone());
    let rep = sys.cesaro_invariant_measure(&u, &Wide::new(x0), n_max, chains, seed, &bins)?;
    let mass = |l: f64| -> f64 {
        (0..nb).filter(|&i| grid.center(i).abs() <= l).map(|i| rep.masses[i]).sum()
    };
    let mut ws: Vec<f64> = windows.to_vec();
    ws.sort_by(f64::total_cmp);
    let window_masses: Vec<f64> = ws.iter().map(|&l| mass(l)).collect();
    let growth_ratios = ws.iter().map(|&l| mass(2.0 * l) / mass(l)).collect();
    let growth_increments = ws.iter().map(|&l| mass(2.0 * l) - mass(l)).collect();
    Ok(InvariantReport { windows: ws, window_masses, growth_ratios, growth_increments, defect: rep.defect, bin_width: grid.width(), masses: rep.masses })
}

/// Cross-start ratio `Σ P^k φ / Σ P^k u` for `φ = 1_{[−L_φ, L_φ]}`, `u = 1_{[−1, 1]}`.
pub fn affine_ratio_equidistribution(
    mu: &FiniteMeasure<AffineMap<f64>>,
    starts: &[f64],
    l_phi: f64,
    n_max: usize,
    checkpoints: &[usize],
    chains: usize,
    seed: u64,
) -> RatioReport {
    let sys: MarkovSystem<AffineMap<f64>, Wide> = MarkovSystem::new(mu.clone());
    let phi = |x: &Wide| (x.to_f64().abs() <= l_phi) as u8 as f64;
    let u = |x: &Wide| (x.to_f64().abs() <= 1.0) as u8 as f64;
    let xs: Vec<Wide> = starts.iter().map(|x| Wide::new(*x)).collect();
    sys.ratio_equidistribution(&phi, &u, &xs, n_max, checkpoints, chains, seed)
}

/// The standard critical model: `a ∈ {2, ½}`, `b ∈ {±1}`, all fair.
pub fn critical_model() -> AffineLaw {
    AffineLaw::parse("2,1/2", "1,-1").expect("static law")
}

impl PowerFraction {
    pub fn to_f64_lossy(&self, p: u32) -> f64 {
        self.num.to_f64().unwrap_or(f64::NAN) / (p as f64).powi(self.k as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_rule() {
        let g = AffineMap::new(2.0, 3.0).unwrap();
        let h = AffineMap::new(0.5, -1.0).unwrap();
        assert_eq!(h.compose(&g), AffineMap { a: 1.0, b: 0.5 });
        assert_eq!(h.compose(&g).apply(&7.0), h.apply(&g.apply(&7.0)));
        assert_eq!(g.compose(&g.inverse()), g.identity_like());
        let p = 5;
        let gp = AffineMap::new(PAdic::from_i64(5, p, 32), PAdic::one(p, 32)).unwrap();
        let hp = AffineMap::new(PAdic::from_rational(1, 5, p, 32).unwrap(), PAdic::from_i64(-2, p, 32)).unwrap();
        let x = PAdic::from_i64(13, p, 32);
        assert_eq!(hp.compose(&gp).apply(&x), hp.apply(&gp.apply(&x)));
        assert!(AffineMap::new(0.0, 1.0).is_err());
    }

    #[test]
    fn law_parsing_and_checks() {
        let law = critical_model();
        assert_eq!(law.real_measure().unwrap().len(), 4);
        let r = validate_critical(&law, AffineField::Real).unwrap();
        assert!(r.critical && !r.degenerate && r.common_fixed_point.is_none());
        let bad = AffineLaw::parse("2,1/3", "1").unwrap();
        let e = validate_critical(&bad, AffineField::Real).unwrap_err();
        assert!(e.to_string().contains("criticality"));
        let trans = AffineLaw::parse("1", "1").unwrap();
        let c = criticality(&trans, AffineField::Real);
        assert!(c.critical && c.degenerate && c.common_fixed_point.is_none());
        let fixed = AffineLaw::parse("2,1/2", "0").unwrap();
        assert!(validate_critical(&fixed, AffineField::Real).is_err());
        let padic = AffineLaw::parse("5,1/5", "1").unwrap();
        assert!(validate_critical(&padic, AffineField::Padic(5)).is_ok());
        assert!(validate_critical(&padic, AffineField::Padic(3)).is_ok());
        assert!(!criticality(&AffineLaw::parse("5,1/25", "1").unwrap(), AffineField::Padic(5)).critical);
        assert!(parse_law("2:0.25,1/2:0.75").is_ok());
        assert!(parse_law("x").is_err());
    }

    #[test]
    fn translation_escapes() {
        let mu = AffineLaw::parse("1", "1").unwrap().real_measure().unwrap();
        let mut rng = chain_rng(0, 0);
        let t = trajectory_real(&mu, 2.0, 50, &mut rng);
        assert!(t.iter().enumerate().all(|(n, x)| x.to_f64() == 2.0 + n as f64));
        let v = affine_walk_real(&mu, 0.0, 10.0, 1000, 4, 1);
        assert!(v.visits.iter().all(|c| *c == 10));
    }

    #[test]
    fn power_fraction_arithmetic() {
        let p = 5;
        let g = PowerAffine { p, negative: false, e: -1, b: PowerFraction::from_rational(&Rational64::from(1), p).unwrap() };
        let x = PowerFraction::from_rational(&Rational64::new(3, 1), p).unwrap();
        let y = g.apply(&x);
        assert_eq!(y, PowerFraction { num: BigInt::from(8), k: 1 });
        assert_eq!(y.log_p_abs(p), Some(1));
        let px = y.to_padic(p, 32);
        assert_eq!(px, PAdic::from_rational(8, 5, p, 32).unwrap());
        let h = PowerAffine { p, negative: true, e: 1, b: PowerFraction::from_rational(&Rational64::new(2, 5), p).unwrap() };
        assert_eq!(h.apply(&y), PowerFraction::from_rational(&Rational64::new(-38, 5), p).unwrap());
        assert!(PowerFraction::from_rational(&Rational64::new(1, 3), 5).is_err());
        assert!(AffineLaw::parse("3", "1").unwrap().power_measure(5).is_err());
    }

    #[test]
    fn ladder_laws() {
        let mu = critical_model().real_measure().unwrap();
        let (r, samples) = ladder_sample(&mu, 20_000, 400, (10, 400), 3);
        for (t, exact) in [(1, 0.5), (2, 0.0), (3, 0.125)] {
            let e = r.p_tau(t);
            assert!((e.mean - exact).abs() <= 4.0 * e.stderr.max(1e-9), "t={t} {e:?}");
        }
        assert!(samples.iter().filter(|s| !s.censored).all(|s| s.element.a == 0.5));
        assert!((r.m_tau.mean + 2f64.ln()).abs() < 1e-12 && r.m_tau.stderr < 1e-12);
        let always = AffineLaw::parse("1/2,-1/2", "1").unwrap().real_measure().unwrap();
        assert!(ladder_sample(&always, 100, 10, (1, 10), 1).0.taus.iter().all(|t| *t == Some(1)));
    }

    #[test]
    fn induced_walk_is_a_subprocess() {
        let mu = critical_model().real_measure().unwrap();
        for c in 0..20 {
            let (times, induced, full) = induced_ladder_path(&mu, 0.75, 30, 200, &mut chain_rng(5, c));
            for (t, x) in times.iter().zip(&induced) {
                assert_eq!(full[*t], *x);
            }
        }
    }

    #[test]
    fn padic_walk_returns() {
        let law = AffineLaw::parse("5,1/5", "1").unwrap();
        let mu = law.power_measure(5).unwrap();
        let v = affine_walk_padic(&mu, &PowerFraction { num: BigInt::from(0), k: 0 }, 0, 4000, 32, 2);
        assert!(v.fraction_with_at_least(10) > 0.9);
    }
}
