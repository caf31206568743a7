//! Discretized transfer operators `P_tφ(x) = ∫ ‖gx‖^{it} φ(gx) dμ(g)` on ℙ¹.

use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{Binning, FiniteMeasure};
use crate::projective::{act_with_cocycle, Mat, ProjPoint};

type C64 = Complex<f64>;

pub const MIN_BINS: usize = 16;
pub const POWER_TOL: f64 = 1e-10;
pub const POWER_BUDGET: usize = 100_000;
/// Finite-difference step for `k″(0)`.
pub const DEFAULT_H: f64 = 1e-2;
/// Iterations of the deflated power method used to estimate the second modulus.
const DEFLATION_ITERS: usize = 3000;

/// Sparse row representation of the bin-center collocation matrix.
#[derive(Clone, Debug)]
pub struct DiscretizedOperator {
    pub bins: usize,
    pub t: f64,
    rows: Vec<Vec<(usize, C64)>>,
}

pub fn build_operator(mu: &FiniteMeasure<Mat<2>>, bins: usize, t: f64) -> Result<DiscretizedOperator> {
    if bins < MIN_BINS {
        return Err(Error::InvalidArgument(format!("need at least {MIN_BINS} bins, got {bins}")));
    }
    let grid = Binning::projective(bins);
    let rows = (0..bins)
        .into_par_iter()
        .map(|i| {
            let x = ProjPoint::from_angle(grid.center(i));
            let mut row: Vec<(usize, C64)> = Vec::new();
            for (g, w) in mu.iter() {
                let (y, z) = act_with_cocycle(g, &x);
                let j = grid.index(y.angle()).unwrap_or(bins - 1);
                let tz = t * z;
                let c = C64::new(w * tz.cos(), w * tz.sin());
                match row.iter_mut().find(|(k, _)| *k == j) {
                    Some((_, acc)) => *acc += c,
                    None => row.push((j, c)),
                }
            }
            row.sort_by_key(|(j, _)| *j);
            row
        })
        .collect();
    Ok(DiscretizedOperator { bins, t, rows })
}

impl DiscretizedOperator {
    /// `Mφ`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.rows.iter().map(|r| r.iter().map(|(j, c)| c * v[*j]).sum()).collect()
    }

    /// `πM` (row vector times matrix).
    pub fn apply_left(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.bins];
        for (i, r) in self.rows.iter().enumerate() {
            for (j, c) in r {
                out[*j] += v[i] * c;
            }
        }
        out
    }

    pub fn dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.bins, self.bins);
        for (i, r) in self.rows.iter().enumerate() {
            for (j, c) in r {
                m[(i, *j)] = *c;
            }
        }
        m
    }

    pub fn row_sums(&self) -> Vec<C64> {
        self.rows.iter().map(|r| r.iter().map(|(_, c)| *c).sum()).collect()
    }

    pub fn row_abs_sums(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|(_, c)| c.norm()).sum()).collect()
    }

    /// `(i, j)` entry.
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.rows[i].iter().find(|(k, _)| *k == j).map_or(C64::new(0.0, 0.0), |(_, c)| *c)
    }
}

fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(v: &mut [C64], s: f64) {
    v.iter_mut().for_each(|z| *z /= s);
}

/// Power iteration from a real start vector. Returns the eigenvalue and the
/// unit eigenvector.
fn power(apply: impl Fn(&[C64]) -> Vec<C64>, n: usize) -> std::result::Result<(C64, Vec<C64>), (f64, f64)> {
    let mut v = vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let mut growth = 0.0;
    for it in 0..POWER_BUDGET {
        let w = apply(&v);
        let k: C64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
        let resid = vnorm(&w.iter().zip(&v).map(|(b, a)| b - k * a).collect::<Vec<_>>());
        let nw = vnorm(&w);
        if nw == 0.0 {
            return Ok((C64::new(0.0, 0.0), v));
        }
        if resid <= POWER_TOL * nw.max(f64::MIN_POSITIVE) {
            let mut w = w;
            scale(&mut w, nw);
            return Ok((k, w));
        }
        if it + 1 == POWER_BUDGET {
            growth = nw;
        }
        v = w;
        scale(&mut v, nw);
    }
    Err((growth, f64::NAN))
}

#[derive(Clone, Debug, Serialize)]
pub struct LeadingEigen {
    pub k: (f64, f64),
    pub modulus: f64,
    /// Stationary density over the bins (t = 0 only).
    pub density: Option<Vec<f64>>,
    /// `|second| / |first|`.
    pub gap: f64,
}

/// Dominant eigenvalue by power iteration, second modulus by deflation.
pub fn leading_eigen(op: &DiscretizedOperator) -> Result<LeadingEigen> {
    let n = op.bins;
    let second_guess = || deflated_second(op, None, None);
    let (k, right) = power(|v| op.apply(v), n).map_err(|(first, _)| Error::NonConvergence { first, second: second_guess() })?;
    let left = power(|v| op.apply_left(v), n).map(|(_, l)| l).ok();
    let density = if op.t == 0.0 {
        left.as_ref().map(|l| {
            let s: C64 = l.iter().sum();
            l.iter().map(|z| (z / s).re.max(0.0)).collect::<Vec<f64>>()
        })
    } else {
        None
    };
    let second = deflated_second(op, Some((k, &right)), left.as_deref());
    Ok(LeadingEigen { k: (k.re, k.im), modulus: k.norm(), density, gap: second / k.norm() })
}

/// Geometric-mean growth rate of the deflated iteration over its last third.
fn deflated_second(op: &DiscretizedOperator, lead: Option<(C64, &[C64])>, left: Option<&[C64]>) -> f64 {
    let n = op.bins;
    let project = |v: &mut Vec<C64>| {
        if let (Some((_, r)), Some(l)) = (lead, left) {
            let lr: C64 = l.iter().zip(r).map(|(a, b)| a * b).sum();
            let lv: C64 = l.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            let c = lv / lr;
            v.iter_mut().zip(r).for_each(|(x, y)| *x -= c * y);
        }
    };
    let mut v: Vec<C64> = (0..n).map(|i| C64::new(((i * 7919) % 97) as f64 / 97.0 - 0.5, 0.0)).collect();
    project(&mut v);
    let nv = vnorm(&v);
    if nv == 0.0 {
        return 0.0;
    }
    scale(&mut v, nv);
    let mut log_growth = 0.0;
    let tail = DEFLATION_ITERS / 3;
    for it in 0..DEFLATION_ITERS {
        let mut w = op.apply(&v);
        project(&mut w);
        let nw = vnorm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        if it >= DEFLATION_ITERS - tail {
            log_growth += nw.ln();
        }
        scale(&mut w, nw);
        v = w;
    }
    (log_growth / tail as f64).exp()
}

/// Largest eigenvalue modulus from a dense Schur decomposition.
pub fn dense_spectral_radius(op: &DiscretizedOperator) -> f64 {
    op.dense().schur().eigenvalues().map_or(f64::NAN, |ev| ev.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub bins: usize,
    pub h: f64,
    /// `k(−h), k(0), k(h)` as (re, im).
    pub k: [(f64, f64); 3],
    /// `|k′(0)|` by central difference.
    pub k_prime: f64,
    pub sigma2: f64,
    /// σ² with step h/2 and the Richardson extrapolation of the two.
    pub sigma2_half_step: f64,
    pub sigma2_richardson: f64,
    /// σ² on a grid of 2N bins and the relative change.
    pub sigma2_refined: f64,
    pub refinement_change: f64,
    pub gap: f64,
}

fn k_at(mu: &FiniteMeasure<Mat<2>>, bins: usize, t: f64) -> Result<C64> {
    let e = leading_eigen_value(&build_operator(mu, bins, t)?)?;
    Ok(e)
}

fn leading_eigen_value(op: &DiscretizedOperator) -> Result<C64> {
    power(|v| op.apply(v), op.bins)
        .map(|(k, _)| k)
        .map_err(|(first, _)| Error::NonConvergence { first, second: deflated_second(op, None, None) })
}

fn sigma2_at(mu: &FiniteMeasure<Mat<2>>, bins: usize, h: f64) -> Result<(C64, C64, C64, f64)> {
    let (km, k0, kp) = (k_at(mu, bins, -h)?, k_at(mu, bins, 0.0)?, k_at(mu, bins, h)?);
    let s2 = -((kp - 2.0 * k0 + km) / (h * h)).re;
    Ok((km, k0, kp, s2))
}

/// `σ² = −k″(0)` by central differences, with step-halving and grid-refinement checks.
pub fn variance_sigma2(mu: &FiniteMeasure<Mat<2>>, bins: usize, h: f64) -> Result<SpectralReport> {
    let (km, k0, kp, s2) = sigma2_at(mu, bins, h)?;
    if !(s2 > 0.0) {
        return Err(Error::Hypothesis(format!(
            "σ² = {s2:.3e} ≤ 0: degenerate cocycle or discretization too coarse"
        )));
    }
    let (_, _, _, s2_half) = sigma2_at(mu, bins, h / 2.0)?;
    let (_, _, _, s2_fine) = sigma2_at(mu, 2 * bins, h)?;
    let gap = leading_eigen(&build_operator(mu, bins, 0.0)?)?.gap;
    Ok(SpectralReport {
        bins,
        h,
        k: [(km.re, km.im), (k0.re, k0.im), (kp.re, kp.im)],
        k_prime: ((kp - km) / (2.0 * h)).norm(),
        sigma2: s2,
        sigma2_half_step: s2_half,
        sigma2_richardson: (4.0 * s2_half - s2) / 3.0,
        sigma2_refined: s2_fine,
        refinement_change: (s2_fine - s2).abs() / s2,
        gap,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    pub gap: f64,
    /// The dense fallback was needed.
    pub dense: bool,
}

/// `|k(t)|` for each t; falls back to a dense eigen-solve when power iteration stalls.
pub fn spectral_radius_scan(mu: &FiniteMeasure<Mat<2>>, bins: usize, ts: &[f64]) -> Result<Vec<ScanRow>> {
    ts.par_iter()
        .map(|&t| {
            let op = build_operator(mu, bins, t)?;
            match leading_eigen(&op) {
                Ok(e) => Ok(ScanRow { t, re: e.k.0, im: e.k.1, modulus: e.modulus, gap: e.gap, dense: false }),
                Err(Error::NonConvergence { .. }) => {
                    let r = dense_spectral_radius(&op);
                    Ok(ScanRow { t, re: f64::NAN, im: f64::NAN, modulus: r, gap: f64::NAN, dense: true })
                }
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Sums adjacent bins to reach `target` bins.
pub fn coarsen(masses: &[f64], target: usize) -> Vec<f64> {
    let f = masses.len() / target;
    assert!(f >= 1 && masses.len() % target == 0, "bin counts must divide");
    masses.chunks(f).map(|c| c.iter().sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::projective::{proj_act, rescale};

    #[test]
    fn stochastic_at_zero() {
        let mu = models::hyperbolic_pair(0.0);
        let op = build_operator(&mu, 64, 0.0).unwrap();
        assert!(op.row_sums().iter().all(|s| (s.re - 1.0).abs() < 1e-12 && s.im == 0.0));
        let op = build_operator(&mu, 64, 3.0).unwrap();
        assert!(op.row_abs_sums().iter().all(|s| *s <= 1.0 + 1e-12));
        assert!(build_operator(&mu, 8, 0.0).is_err());
    }

    #[test]
    fn grid_rotation_is_a_permutation() {
        let n = 32;
        let mu = FiniteMeasure::dirac(models::rotation(std::f64::consts::PI / n as f64));
        let op = build_operator(&mu, n, 0.0).unwrap();
        for i in 0..n {
            assert_eq!(op.entry(i, (i + 1) % n), C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn diagonal_rows_follow_images() {
        let g = Mat::<2>::new(2.0, 0.0, 0.0, 0.5);
        let op = build_operator(&FiniteMeasure::dirac(g), 64, 0.0).unwrap();
        let grid = Binning::projective(64);
        for i in 0..64 {
            let j = grid.index(proj_act(&g, &ProjPoint::from_angle(grid.center(i))).angle()).unwrap();
            assert_eq!(op.entry(i, j), C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn leading_at_zero() {
        let mu = models::hyperbolic_pair(0.0);
        let e = leading_eigen(&build_operator(&mu, 64, 0.0).unwrap()).unwrap();
        assert_eq!(e.k, (1.0, 0.0));
        let d = e.density.unwrap();
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9 && d.iter().all(|x| *x >= 0.0));
        assert!(e.gap < 1.0);
    }

    #[test]
    fn rotation_model_has_uniform_density() {
        let e = leading_eigen(&build_operator(&models::rotation_dilation(511), 64, 0.0).unwrap()).unwrap();
        assert!(e.density.unwrap().iter().all(|x| (x - 1.0 / 64.0).abs() < 1e-9));
    }

    #[test]
    fn rotations_only_are_degenerate() {
        let mu = models::rotations(511);
        assert!(matches!(variance_sigma2(&mu, 32, DEFAULT_H), Err(Error::Hypothesis(_))));
        let scan = spectral_radius_scan(&mu, 32, &[0.0, 1.0, 2.5]).unwrap();
        assert!(scan.iter().all(|r| (r.modulus - 1.0).abs() < 1e-9));
    }

    #[test]
    fn radial_smoke_variance() {
        let r = variance_sigma2(&models::rotation_dilation(511), 32, DEFAULT_H).unwrap();
        let exact = 2f64.ln().powi(2);
        assert!((r.sigma2 - exact).abs() < 0.05 * exact);
        assert!(r.k_prime < 1e-9);
    }

    #[test]
    fn conjugate_symmetry() {
        let mu = rescale(&models::hyperbolic_pair(0.0), 0.7);
        let a = leading_eigen(&build_operator(&mu, 32, 0.4).unwrap()).unwrap();
        let b = leading_eigen(&build_operator(&mu, 32, -0.4).unwrap()).unwrap();
        assert_eq!(a.k.0, b.k.0);
        assert_eq!(a.k.1, -b.k.1);
    }

    #[test]
    fn coarsen_sums() {
        assert_eq!(coarsen(&[1.0, 2.0, 3.0, 4.0], 2), vec![3.0, 7.0]);
    }
}
