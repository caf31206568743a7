//! Eigenvalue moduli over ℝ (Schur form) and ℚ_p (Newton polygon).

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use super::matrix::SquareMatrix;
use crate::error::{Error, Result};
use crate::fields::{LocalField, PAdic};

/// Relative tolerance for grouping real eigenvalues of equal modulus.
pub const REAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct EigenReport {
    /// Distinct absolute values, largest first, with multiplicities.
    pub moduli: Vec<(f64, usize)>,
    /// A single simple eigenvalue of maximal modulus exists.
    pub unique_dominant: bool,
    /// Only eigenvalue valuations are known (p-adic, non-split polygon).
    pub valuation_only: bool,
}

/// A rational valuation `num/den` with `den > 0`, as produced by polygon slopes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Valuation {
    pub num: i64,
    pub den: i64,
}

impl Valuation {
    fn new(num: i64, den: i64) -> Self {
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        let s = if den < 0 { -1 } else { 1 };
        Self { num: s * num / g, den: s * den / g }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn cmp_exact(self, o: Self) -> std::cmp::Ordering {
        (self.num * o.den).cmp(&(o.num * self.den))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// One Newton-polygon segment: `len` roots of valuation `val`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub val: Valuation,
    pub len: usize,
}

pub fn eigen_structure_real(g: &SquareMatrix<f64>) -> Result<EigenReport> {
    if g.det().abs() <= f64::EPSILON * g.max_abs().powi(g.dim() as i32) {
        return Err(Error::Singular);
    }
    let ev = g.to_nalgebra().complex_eigenvalues();
    let mut mods: Vec<f64> = ev.iter().map(|z| z.norm()).collect();
    mods.sort_by(|a, b| b.total_cmp(a));
    let mut moduli: Vec<(f64, usize)> = Vec::new();
    for m in mods {
        match moduli.last_mut() {
            Some((top, k)) if (*top - m).abs() <= REAL_TOL * top.max(1.0) => *k += 1,
            _ => moduli.push((m, 1)),
        }
    }
    let unique_dominant = moduli[0].1 == 1;
    Ok(EigenReport { moduli, unique_dominant, valuation_only: false })
}

/// Characteristic polynomial coefficients `a_0..a_d` of `det(xI - g)`,
/// from sums of principal minors.
pub fn charpoly<T: LocalField>(g: &SquareMatrix<T>) -> Vec<T> {
    let d = g.dim();
    let zero = g.get(0, 0).zero_like();
    let mut e = vec![zero.clone(); d + 1];
    e[0] = zero.one_like();
    for mask in 1u32..(1 << d) {
        let idx: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
        let rows = idx.iter().map(|&i| idx.iter().map(|&j| g.get(i, j).clone()).collect()).collect();
        let minor = SquareMatrix::from_rows(rows).expect("square minor").det();
        let k = idx.len();
        e[k] = e[k].add(&minor);
    }
    // det(xI - g) = sum_k (-1)^k e_k x^(d-k)
    (0..=d)
        .map(|i| {
            let k = d - i;
            if k % 2 == 0 {
                e[k].clone()
            } else {
                e[k].neg()
            }
        })
        .collect()
}

/// Lower convex hull of `(i, v(a_i))`; root valuations are minus the slopes.
pub fn newton_polygon(coeffs: &[PAdic]) -> Vec<Segment> {
    let pts: Vec<(i64, i64)> =
        coeffs.iter().enumerate().filter_map(|(i, c)| c.valuation().map(|v| (i as i64, v))).collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b when it lies on or above segment a..pt.
            if (b.1 - a.1) * (pt.0 - a.0) >= (pt.1 - a.1) * (b.0 - a.0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut segs: Vec<Segment> = hull
        .windows(2)
        .map(|w| Segment { val: Valuation::new(w[0].1 - w[1].1, w[1].0 - w[0].0), len: (w[1].0 - w[0].0) as usize })
        .collect();
    // Roots at zero (missing low coefficients) would make g singular; callers check.
    segs.sort_by(|a, b| a.val.cmp_exact(b.val));
    segs
}

pub fn eigen_structure_padic(g: &SquareMatrix<PAdic>) -> Result<(EigenReport, Vec<Segment>)> {
    if g.det().is_zero() {
        return Err(Error::Singular);
    }
    let segs = newton_polygon(&charpoly(g));
    let p = g.get(0, 0).prime() as f64;
    let moduli = segs.iter().map(|s| (p.powf(-s.val.as_f64()), s.len)).collect();
    let unique_dominant = segs[0].len == 1;
    let valuation_only = segs.iter().any(|s| s.len > 1);
    Ok((EigenReport { moduli, unique_dominant, valuation_only }, segs))
}

fn eval<T: LocalField>(coeffs: &[T], x: &T) -> T {
    coeffs.iter().rev().fold(x.zero_like(), |acc, c| acc.mul(x).add(c))
}

/// Lifts the unique root of valuation `val` (a length-one segment) digit by digit:
/// each digit is the residue that maximizes the valuation of the polynomial.
pub fn lift_simple_root(coeffs: &[PAdic], val: i64) -> PAdic {
    let sample = &coeffs[0];
    let (p, prec) = (sample.prime(), sample.precision());
    let mut digits: Vec<u32> = Vec::with_capacity(prec);
    for i in 0..prec {
        let mut best: Option<(u32, i64)> = None;
        for d in (if i == 0 { 1 } else { 0 })..p {
            let mut trial = digits.clone();
            trial.push(d);
            trial.resize(prec, 0);
            let x = PAdic::from_parts(p, prec, val, trial).expect("valid digits");
            let score = eval(coeffs, &x).valuation().unwrap_or(i64::MAX);
            if best.map_or(true, |(_, s)| score > s) {
                best = Some((d, score));
            }
        }
        let (d, score) = best.expect("at least one residue");
        digits.push(d);
        if score == i64::MAX {
            // Exact root: the remaining digits are zero, not unknown.
            digits.resize(prec, 0);
            break;
        }
    }
    PAdic::from_parts(p, prec, val, digits).expect("valid digits")
}

/// Kernel basis of a real matrix from its SVD; singular values at or below
/// `tol` count as zero.
pub fn null_space_complex(m: &DMatrix<Complex<f64>>, tol: f64) -> Vec<Vec<Complex<f64>>> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol)
        .map(|(i, _)| vt.row(i).iter().map(|z| z.conj()).collect())
        .collect()
}

/// Kernel basis by Gauss-Jordan elimination; pivots with magnitude at most
/// `tol` times the largest entry are treated as zero.
pub fn null_space<T: LocalField>(m: &SquareMatrix<T>, rel_tol: f64) -> Vec<Vec<T>> {
    let d = m.dim();
    let mut a: Vec<Vec<T>> = (0..d).map(|i| (0..d).map(|j| m.get(i, j).clone()).collect()).collect();
    let scale = m.max_abs();
    let zero = m.get(0, 0).zero_like();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..d {
        if row == d {
            break;
        }
        let piv = (row..d).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs())).unwrap();
        if a[piv][col].abs() <= rel_tol * scale {
            continue;
        }
        a.swap(piv, row);
        let inv = a[row][col].inv().expect("nonzero pivot");
        for j in 0..d {
            a[row][j] = a[row][j].mul(&inv);
        }
        for r in 0..d {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..d {
                    let t = f.mul(&a[row][j]);
                    a[r][j] = a[r][j].sub(&t);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (0..d)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![zero.clone(); d];
            v[free] = zero.one_like();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = a[r][free].neg();
            }
            v
        })
        .collect()
}
