//! Word-metric ball growth by breadth-first enumeration.

use std::collections::HashSet;
use std::hash::Hash;

use serde::Serialize;

use crate::stats::linear_fit;

/// A finitely generated group with exactly comparable elements.
pub trait GrowthGroup {
    type Elem: Clone + Eq + Hash + Send + Sync;
    fn identity(&self) -> Self::Elem;
    /// Symmetric generating set.
    fn generators(&self) -> Vec<Self::Elem>;
    /// Product `a·b`, or `None` when the element cannot be represented.
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem>;
}

/// ℤ^k with the standard generators.
pub struct Lattice(pub usize);

impl GrowthGroup for Lattice {
    type Elem = Vec<i64>;
    fn identity(&self) -> Vec<i64> {
        vec![0; self.0]
    }
    fn generators(&self) -> Vec<Vec<i64>> {
        (0..self.0)
            .flat_map(|i| {
                [1, -1].map(|s| {
                    let mut v = vec![0; self.0];
                    v[i] = s;
                    v
                })
            })
            .collect()
    }
    fn mul(&self, a: &Vec<i64>, b: &Vec<i64>) -> Option<Vec<i64>> {
        Some(a.iter().zip(b).map(|(x, y)| x + y).collect())
    }
}

/// Discrete Heisenberg group in normal form `(x, y, z)` with
/// `(x, y, z)(x', y', z') = (x + x', y + y', z + z' + x y')`.
pub struct Heisenberg;

impl GrowthGroup for Heisenberg {
    type Elem = (i64, i64, i64);
    fn identity(&self) -> Self::Elem {
        (0, 0, 0)
    }
    fn generators(&self) -> Vec<Self::Elem> {
        vec![(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        Some((a.0 + b.0, a.1 + b.1, a.2 + b.2 + a.0 * b.1))
    }
}

/// Integer matrix group given by generators; the inverses are added.
pub struct IntMatrixGroup {
    pub d: usize,
    pub gens: Vec<Vec<i64>>,
}

impl IntMatrixGroup {
    /// Fails unless every generator has determinant ±1 (so the inverse is integral).
    pub fn new(d: usize, gens: Vec<Vec<i64>>) -> crate::error::Result<Self> {
        let mut all = Vec::new();
        for g in gens {
            let m = crate::linalg::SquareMatrix::from_rows(g.chunks(d).map(|r| r.iter().map(|&x| x as f64).collect()).collect())?;
            let inv = m.inv()?;
            if (m.det().abs() - 1.0).abs() > 1e-9 {
                return Err(crate::error::Error::InvalidArgument("generator must have determinant ±1".into()));
            }
            let ginv: Vec<i64> = inv.entries().iter().map(|x| x.round() as i64).collect();
            if !all.contains(&g) {
                all.push(g);
            }
            if !all.contains(&ginv) {
                all.push(ginv);
            }
        }
        Ok(Self { d, gens: all })
    }
}

impl GrowthGroup for IntMatrixGroup {
    type Elem = Vec<i64>;
    fn identity(&self) -> Vec<i64> {
        (0..self.d * self.d).map(|k| i64::from(k % (self.d + 1) == 0)).collect()
    }
    fn generators(&self) -> Vec<Vec<i64>> {
        self.gens.clone()
    }
    fn mul(&self, a: &Vec<i64>, b: &Vec<i64>) -> Option<Vec<i64>> {
        let d = self.d;
        let mut out = vec![0i64; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0i64;
                for k in 0..d {
                    acc = acc.checked_add(a[i * d + k].checked_mul(b[k * d + j])?)?;
                }
                out[i * d + j] = acc;
            }
        }
        Some(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    /// `|B_n|` for n = 0..=n_reached.
    pub ball_sizes: Vec<u64>,
    /// Slope of log|B_n| against log n over the upper half of the range.
    pub degree: f64,
    pub r2: f64,
    /// Enumeration stopped early (element budget or overflow).
    pub truncated: bool,
    pub warning: Option<String>,
}

/// Default cap on the number of enumerated elements.
pub const DEFAULT_BUDGET: usize = 5_000_000;

pub fn cayley_growth_degree<G: GrowthGroup>(group: &G, n_max: usize, budget: usize) -> GrowthReport {
    let gens = group.generators();
    let mut seen: HashSet<G::Elem> = HashSet::new();
    let id = group.identity();
    seen.insert(id.clone());
    let mut frontier = vec![id];
    let mut sizes = vec![1u64];
    let mut warning = None;
    for _ in 1..=n_max {
        let mut next = Vec::new();
        let mut overflow = false;
        for x in &frontier {
            for s in &gens {
                match group.mul(x, s) {
                    Some(y) => {
                        if seen.insert(y.clone()) {
                            next.push(y);
                        }
                    }
                    None => overflow = true,
                }
            }
        }
        if overflow {
            warning = Some("entry overflow; ball sizes beyond this radius are unavailable".to_string());
            break;
        }
        sizes.push(seen.len() as u64);
        frontier = next;
        if seen.len() > budget {
            warning = Some(format!(
                "element budget {budget} exceeded at radius {}; growth is likely exponential",
                sizes.len() - 1
            ));
            break;
        }
    }
    let n = sizes.len() - 1;
    let lo = (n / 2).max(1);
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        (lo..=n).map(|k| ((k as f64).ln(), (sizes[k] as f64).ln())).unzip();
    let (degree, r2) = if xs.len() >= 2 {
        let f = linear_fit(&xs, &ys);
        (f.slope, f.r2)
    } else {
        (f64::NAN, f64::NAN)
    };
    GrowthReport { ball_sizes: sizes, degree, r2, truncated: warning.is_some(), warning }
}
