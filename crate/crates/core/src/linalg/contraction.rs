//! Contraction directions of conjugation by g, at the Lie-algebra level.
//!
//! For diagonalizable `g = S diag(λ) S⁻¹`, conjugation acts on the matrix
//! `s_a w_bᵀ` (column `a` of S times row `b` of S⁻¹) by the factor `λ_a/λ_b`.
//! The directions with `|λ_a/λ_b| < 1 − tol` span the Lie algebra of the
//! contraction group, and the module is the product of their rates.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use super::eigen::{charpoly, eigen_structure_padic, lift_simple_root, null_space, null_space_complex};
use super::matrix::SquareMatrix;
use crate::error::{Error, Result};
use crate::fields::PAdic;

/// Default tolerance on eigenvalue ratios over ℝ.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Maximal number of conjugation steps in the orbit check.
pub const ORBIT_STEPS: u32 = 20;
/// Rounding budget of the floating-point orbit check.
pub const ORBIT_ROUNDING: f64 = 1e-9;

/// Conjugation steps over which rounding stays below `ORBIT_ROUNDING`: errors
/// grow by `spread/rate` per step relative to the contracting orbit, where
/// `spread = max|λ| / min|λ|` bounds the expansion of `Ad(g)`.
pub fn orbit_steps(spread: f64, rate: f64) -> u32 {
    let per_step = (spread / rate).ln();
    let n = (ORBIT_ROUNDING / f64::EPSILON).ln() / per_step;
    (n.floor() as u32).clamp(1, ORBIT_STEPS)
}

#[derive(Clone, Debug)]
pub struct Direction<T> {
    pub e: SquareMatrix<T>,
    pub rate: f64,
}

#[derive(Clone, Debug)]
pub struct ContractionData<T> {
    /// Real basis of contracting directions; empty when only valuations are known.
    pub directions: Vec<Direction<T>>,
    /// Contraction rate of every direction, with multiplicity.
    pub rates: Vec<f64>,
    /// Product of the rates.
    pub delta: f64,
    /// Directions could not be computed (p-adic, eigenvalues outside ℚ_p).
    pub valuation_only: bool,
    /// Largest relative deviation of `‖gⁿEg⁻ⁿ‖/‖E‖` from `rateⁿ` seen in the orbit check.
    pub orbit_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionSummary {
    pub directions: usize,
    pub delta: f64,
    pub valuation_only: bool,
    pub orbit_error: f64,
    pub rates: Vec<f64>,
}

impl<T> ContractionData<T> {
    pub fn is_trivial(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn summary(&self) -> ContractionSummary {
        ContractionSummary {
            directions: self.rates.len(),
            delta: self.delta,
            valuation_only: self.valuation_only,
            orbit_error: self.orbit_error,
            rates: self.rates.clone(),
        }
    }
}

type C64 = Complex<f64>;

fn fro(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn contraction_subgroup_real(g: &SquareMatrix<f64>, tol: f64) -> Result<ContractionData<f64>> {
    let d = g.dim();
    let gn = g.to_nalgebra();
    let scale = gn.norm();
    if g.det().abs() <= f64::EPSILON * scale.powi(d as i32) {
        return Err(Error::Singular);
    }
    let ev = gn.clone().complex_eigenvalues();
    let close = |a: C64, b: C64| (a - b).norm() <= 1e-9 * scale.max(1.0);

    // Cluster eigenvalues, keep one representative per conjugate pair.
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    for &z in ev.iter() {
        match clusters.iter_mut().find(|(c, _)| close(*c, z)) {
            Some((_, m)) => *m += 1,
            None => clusters.push((z, 1)),
        }
    }

    let gc: DMatrix<C64> = gn.map(|x| C64::new(x, 0.0));
    let null_tol = 1e-7 * scale.max(1.0);
    let mut lambdas: Vec<C64> = Vec::new();
    let mut cols: Vec<Vec<C64>> = Vec::new();
    let mut conj_of: Vec<usize> = Vec::new();
    for &(z, mult) in &clusters {
        if z.im < -1e-9 * scale.max(1.0) {
            continue;
        }
        let is_real = z.im.abs() <= 1e-9 * scale.max(1.0);
        let z = if is_real { C64::new(z.re, 0.0) } else { z };
        let shifted = &gc - DMatrix::<C64>::identity(d, d) * z;
        let mut kernel = null_space_complex(&shifted, null_tol);
        if kernel.len() < mult {
            return Err(Error::Defective(format!(
                "eigenvalue {:.6}{:+.6}i has algebraic multiplicity {} but geometric multiplicity {}",
                z.re,
                z.im,
                mult,
                kernel.len()
            )));
        }
        kernel.truncate(mult);
        for v in kernel {
            let base = cols.len();
            if is_real {
                // A real kernel exists; rotate the phase so the largest entry is real.
                let k = (0..d).max_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm())).unwrap();
                let phase = v[k].conj() / v[k].norm();
                cols.push(v.iter().map(|x| C64::new((x * phase).re, 0.0)).collect());
                lambdas.push(z);
                conj_of.push(base);
            } else {
                cols.push(v.clone());
                cols.push(v.iter().map(|x| x.conj()).collect());
                lambdas.push(z);
                lambdas.push(z.conj());
                conj_of.push(base + 1);
                conj_of.push(base);
            }
        }
    }
    if cols.len() != d {
        return Err(Error::Defective("eigenvector basis is incomplete".into()));
    }
    let s = DMatrix::<C64>::from_fn(d, d, |i, j| cols[j][i]);
    let w = s.clone().try_inverse().ok_or_else(|| Error::Defective("eigenvector matrix is singular".into()))?;
    let ginv = gc.clone().try_inverse().ok_or(Error::Singular)?;

    let mods: Vec<f64> = lambdas.iter().map(|z| z.norm()).collect();
    let spread = mods.iter().copied().fold(0.0, f64::max) / mods.iter().copied().fold(f64::INFINITY, f64::min);
    let mut directions = Vec::new();
    let mut rates = Vec::new();
    let mut orbit_error: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let rate = lambdas[a].norm() / lambdas[b].norm();
            if rate >= 1.0 - tol {
                continue;
            }
            rates.push(rate);
            let (ca, cb) = (conj_of[a], conj_of[b]);
            if (ca, cb) < (a, b) {
                continue;
            }
            let ec = s.column(a) * w.row(b);
            let mut m = ec.clone();
            let m0 = fro(&ec);
            for n in 1..=orbit_steps(spread, rate) {
                m = &gc * m * &ginv;
                let rel = (fro(&m) / m0) / rate.powi(n as i32) - 1.0;
                orbit_error = orbit_error.max(rel.abs());
            }
            let to_real = |f: &dyn Fn(&C64) -> f64| {
                SquareMatrix::from_rows((0..d).map(|i| (0..d).map(|j| f(&ec[(i, j)])).collect()).collect())
                    .expect("square")
            };
            directions.push(Direction { e: to_real(&|z| z.re), rate });
            if (ca, cb) != (a, b) {
                directions.push(Direction { e: to_real(&|z| z.im), rate });
            }
        }
    }
    let delta = rates.iter().product();
    Ok(ContractionData { directions, rates, delta, valuation_only: false, orbit_error })
}

/// Conjugation steps used for the exact p-adic orbit check.
pub const PADIC_ORBIT_STEPS: u32 = 4;

pub fn contraction_subgroup_padic(g: &SquareMatrix<PAdic>) -> Result<ContractionData<PAdic>> {
    let (report, segs) = eigen_structure_padic(g)?;
    let d = g.dim();
    let p = g.get(0, 0).prime() as f64;
    // Rates from valuations alone (exact comparison; equal valuations never contract).
    let mut rates = Vec::new();
    for a in &segs {
        for b in &segs {
            if a.val.cmp_exact(b.val) == std::cmp::Ordering::Greater {
                let r = p.powf(-(a.val.as_f64() - b.val.as_f64()));
                rates.extend(std::iter::repeat(r).take(a.len * b.len));
            }
        }
    }
    let delta = rates.iter().product();
    if report.valuation_only {
        return Ok(ContractionData { directions: Vec::new(), rates, delta, valuation_only: true, orbit_error: 0.0 });
    }

    let coeffs = charpoly(g);
    let prec = g.get(0, 0).precision();
    let tol = p.powf(-((prec / 2) as f64));
    let mut lambdas = Vec::new();
    let mut cols: Vec<Vec<PAdic>> = Vec::new();
    for s in &segs {
        let lam = lift_simple_root(&coeffs, s.val.num);
        let shifted = g.sub(&SquareMatrix::identity_like(d, &lam).scale(&lam));
        let mut k = null_space(&shifted, tol);
        if k.is_empty() {
            return Err(Error::Defective("no p-adic eigenvector found at working precision".into()));
        }
        cols.push(k.swap_remove(0));
        lambdas.push(lam);
    }
    let s = SquareMatrix::from_rows((0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect())?;
    let w = s.inv()?;
    let ginv = g.inv()?;
    let mut directions = Vec::new();
    let mut orbit_error: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let rate = lambdas[a].abs() / lambdas[b].abs();
            if lambdas[a].valuation() <= lambdas[b].valuation() {
                continue;
            }
            let e = SquareMatrix::from_rows(
                (0..d).map(|i| (0..d).map(|j| s.get(i, a).mul(w.get(b, j))).collect()).collect(),
            )?;
            let m0 = e.max_abs();
            let mut m = e.clone();
            for n in 1..=PADIC_ORBIT_STEPS {
                m = g.mul(&m).mul(&ginv);
                let rel = (m.max_abs() / m0) / rate.powi(n as i32) - 1.0;
                orbit_error = orbit_error.max(rel.abs());
            }
            directions.push(Direction { e, rate });
        }
    }
    Ok(ContractionData { directions, rates, delta, valuation_only: false, orbit_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_trivial_contraction() {
        let c = contraction_subgroup_real(&SquareMatrix::diag(&[1.0, 1.0]), DEFAULT_TOL).unwrap();
        assert!(c.is_trivial());
        assert_eq!(c.delta, 1.0);
    }

    #[test]
    fn diagonal_real() {
        let c = contraction_subgroup_real(&SquareMatrix::diag(&[2.0, 0.5]), DEFAULT_TOL).unwrap();
        assert_eq!(c.rates, vec![0.25]);
        assert!((c.delta - 0.25).abs() < 1e-15);
        let e = &c.directions[0].e;
        assert!(e.get(1, 0).abs() > 0.5 && e.get(0, 1).abs() < 1e-15);
        assert!(c.orbit_error < 1e-12);
    }

    #[test]
    fn oracle_orbit_decays_like_four_to_minus_n() {
        // Independent check: iterate g^n (I + tE) g^-n with E = E21 directly.
        let g = SquareMatrix::diag(&[2.0, 0.5]);
        let gi = g.inv().unwrap();
        let t = 1e-3;
        let mut m = SquareMatrix::from_rows(vec![vec![1.0, 0.0], vec![t, 1.0]]).unwrap();
        for n in 1..=20 {
            m = g.mul(&m).mul(&gi);
            assert!((m.get(1, 0) / t - 0.25f64.powi(n)).abs() < 1e-15);
        }
    }

    #[test]
    fn rotation_is_isometric() {
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let g = SquareMatrix::from_rows(vec![vec![c, -s], vec![s, c]]).unwrap();
        assert!(contraction_subgroup_real(&g, DEFAULT_TOL).unwrap().is_trivial());
    }

    #[test]
    fn complex_pair_against_real_eigenvalue() {
        // 3x3: a rotation-scaling block of modulus 2 and a real eigenvalue 1/2.
        let g = SquareMatrix::from_rows(vec![
            vec![2.0 * 0.6, -2.0 * 0.8, 0.0],
            vec![2.0 * 0.8, 2.0 * 0.6, 0.0],
            vec![0.0, 0.0, 0.5],
        ])
        .unwrap();
        let c = contraction_subgroup_real(&g, DEFAULT_TOL).unwrap();
        assert_eq!(c.rates.len(), 2);
        assert_eq!(c.directions.len(), 2);
        assert!((c.delta - 1.0 / 16.0).abs() < 1e-12);
        assert!(c.orbit_error < 1e-9);
    }

    #[test]
    fn defective_is_reported() {
        let g = SquareMatrix::from_rows(vec![vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(contraction_subgroup_real(&g, DEFAULT_TOL), Err(Error::Defective(_))));
    }

    #[test]
    fn padic_diag_p_one() {
        let m = |n| PAdic::from_i64(n, 5, 32);
        let g = SquareMatrix::diag(&[m(5), m(1)]);
        let c = contraction_subgroup_padic(&g).unwrap();
        assert_eq!(c.rates, vec![0.2]);
        assert!((c.delta - 0.2).abs() < 1e-15);
        let e = &c.directions[0].e;
        assert!(!e.get(0, 1).is_zero() && e.get(1, 0).is_zero());
        assert!(c.orbit_error < 1e-12);
        // Oracle: conjugation multiplies the (1,2) entry by exactly 5.
        let gi = g.inv().unwrap();
        let x = SquareMatrix::from_rows(vec![vec![m(1), m(1)], vec![m(0), m(1)]]).unwrap();
        let y = g.mul(&x).mul(&gi);
        assert_eq!(*y.get(0, 1), m(5));
    }
}
