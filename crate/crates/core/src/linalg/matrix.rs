use std::fmt;

use crate::error::{Error, Result};
use crate::fields::{Field, LocalField, PAdic, DEFAULT_PRECISION};

/// A d×d matrix over a local field, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    d: usize,
    entries: Vec<T>,
}

impl<T: LocalField> SquareMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("matrix must be square and nonempty".into()));
        }
        let entries: Vec<T> = rows.into_iter().flatten().collect();
        let f = entries[0].field();
        if entries.iter().any(|x| x.field() != f) {
            return Err(Error::FieldMismatch("matrix entries from different fields".into()));
        }
        Ok(Self { d, entries })
    }

    pub fn identity_like(d: usize, sample: &T) -> Self {
        let mut entries = vec![sample.zero_like(); d * d];
        for i in 0..d {
            entries[i * d + i] = sample.one_like();
        }
        Self { d, entries }
    }

    pub fn diag(values: &[T]) -> Self {
        let d = values.len();
        let mut m = Self { d, entries: vec![values[0].zero_like(); d * d] };
        for (i, v) in values.iter().enumerate() {
            m.entries[i * d + i] = v.clone();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn field(&self) -> Field {
        self.entries[0].field()
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.entries[i * self.d + j] = v;
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn mul(&self, o: &Self) -> Self {
        let d = self.d;
        let zero = self.entries[0].zero_like();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = zero.clone();
                for k in 0..d {
                    acc = acc.add(&self.get(i, k).mul(o.get(k, j)));
                }
                out.push(acc);
            }
        }
        Self { d, entries: out }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { d: self.d, entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { d: self.d, entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, c: &T) -> Self {
        Self { d: self.d, entries: self.entries.iter().map(|a| a.mul(c)).collect() }
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        (0..self.d)
            .map(|i| {
                (0..self.d).fold(v[0].zero_like(), |acc, k| acc.add(&self.get(i, k).mul(&v[k])))
            })
            .collect()
    }

    /// Largest entry magnitude; a norm in both fields.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    /// Gauss-Jordan elimination with pivoting on the largest absolute value,
    /// optionally mirroring row operations on `aug`. Returns the reduced
    /// (diagonal) matrix and the determinant.
    fn eliminate(&self, mut aug: Option<&mut Self>) -> (Vec<T>, T) {
        let d = self.d;
        let mut a = self.entries.clone();
        let mut det = self.entries[0].one_like();
        for col in 0..d {
            let piv = (col..d)
                .max_by(|&r, &s| a[r * d + col].abs().total_cmp(&a[s * d + col].abs()))
                .unwrap();
            if a[piv * d + col].is_zero() {
                return (a, det.zero_like());
            }
            if piv != col {
                for j in 0..d {
                    a.swap(piv * d + j, col * d + j);
                }
                if let Some(m) = aug.as_deref_mut() {
                    for j in 0..d {
                        m.entries.swap(piv * d + j, col * d + j);
                    }
                }
                det = det.neg();
            }
            let pv = a[col * d + col].clone();
            det = det.mul(&pv);
            let pinv = pv.inv().expect("nonzero pivot");
            for r in 0..d {
                if r == col || a[r * d + col].is_zero() {
                    continue;
                }
                let f = a[r * d + col].mul(&pinv);
                for j in 0..d {
                    let t = f.mul(&a[col * d + j]);
                    a[r * d + j] = a[r * d + j].sub(&t);
                }
                if let Some(m) = aug.as_deref_mut() {
                    for j in 0..d {
                        let t = f.mul(&m.entries[col * d + j]);
                        m.entries[r * d + j] = m.entries[r * d + j].sub(&t);
                    }
                }
            }
        }
        (a, det)
    }

    pub fn det(&self) -> T {
        self.eliminate(None).1
    }

    pub fn inv(&self) -> Result<Self> {
        let mut aug = Self::identity_like(self.d, &self.entries[0]);
        let (a, det) = self.eliminate(Some(&mut aug));
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let d = self.d;
        for i in 0..d {
            let pinv = a[i * d + i].inv().ok_or(Error::Singular)?;
            for j in 0..d {
                aug.entries[i * d + j] = aug.entries[i * d + j].mul(&pinv);
            }
        }
        Ok(aug)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::identity_like(self.d, &self.entries[0]);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    pub fn transpose(&self) -> Self {
        let d = self.d;
        let entries = (0..d * d).map(|k| self.entries[(k % d) * d + k / d].clone()).collect();
        Self { d, entries }
    }
}

impl SquareMatrix<f64> {
    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.d, self.d, &self.entries)
    }
}

/// Vector norm matching the field: Euclidean over ℝ, max-norm over ℚ_p.
pub fn norm<T: LocalField>(v: &[T]) -> f64 {
    T::vec_norm(v)
}

/// Matrix over either field, as read from a CSV grid.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyMatrix {
    Real(SquareMatrix<f64>),
    PAdic(SquareMatrix<PAdic>),
}

impl AnyMatrix {
    /// Parses a grid whose first line is a field header: `field,real` or
    /// `field,padic,<p>[,<precision>]`. Real rows hold decimal numbers; p-adic
    /// rows hold integers, fractions `n/d`, or rendered p-adic literals.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let parts: Vec<&str> = header.split(',').map(str::trim).collect();
        let field = match parts.as_slice() {
            ["field", "real"] => Field::Real,
            ["field", "padic", p] => Field::Padic { p: parse_num(p)?, precision: DEFAULT_PRECISION },
            ["field", "padic", p, n] => Field::Padic { p: parse_num(p)?, precision: parse_num(n)? },
            _ => return Err(Error::Parse(format!("bad field header {header:?}"))),
        };
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').map(str::trim).collect()).collect();
        match field {
            Field::Real => {
                let rows = rows
                    .iter()
                    .map(|r| r.iter().map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")))).collect())
                    .collect::<Result<Vec<Vec<f64>>>>()?;
                Ok(AnyMatrix::Real(SquareMatrix::from_rows(rows)?))
            }
            Field::Padic { p, precision } => {
                PAdic::check_prime(p)?;
                let rows = rows
                    .iter()
                    .map(|r| r.iter().map(|s| parse_padic_entry(s, p, precision)).collect())
                    .collect::<Result<Vec<Vec<PAdic>>>>()?;
                Ok(AnyMatrix::PAdic(SquareMatrix::from_rows(rows)?))
            }
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            AnyMatrix::Real(m) => grid("field,real".into(), m, |x| format!("{x:?}")),
            AnyMatrix::PAdic(m) => grid(format!("field,{}", m.field()), m, |x| x.to_string()),
        }
    }
}

fn grid<T: LocalField>(header: String, m: &SquareMatrix<T>, f: impl Fn(&T) -> String) -> String {
    let mut s = header;
    s.push('\n');
    for i in 0..m.dim() {
        let row: Vec<String> = (0..m.dim()).map(|j| f(m.get(i, j))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn parse_num<N: std::str::FromStr>(s: &str) -> Result<N> {
    s.parse().map_err(|_| Error::Parse(format!("expected a number, got {s:?}")))
}

fn parse_padic_entry(s: &str, p: u32, prec: usize) -> Result<PAdic> {
    if s.contains('^') {
        return s.parse();
    }
    match s.split_once('/') {
        Some((n, d)) => PAdic::from_rational(parse_num(n)?, parse_num(d)?, p, prec),
        None => Ok(PAdic::from_i64(parse_num(s)?, p, prec)),
    }
}

impl<T: LocalField + fmt::Display> fmt::Display for SquareMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.d {
            let row: Vec<String> = (0..self.d).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[[f64; 2]; 2]) -> SquareMatrix<f64> {
        SquareMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn product_of_free_generators() {
        let ab = m(&[[1.0, 2.0], [0.0, 1.0]]).mul(&m(&[[1.0, 0.0], [2.0, 1.0]]));
        assert_eq!(ab, m(&[[5.0, 2.0], [2.0, 1.0]]));
        assert!((ab.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_and_apply() {
        let g = m(&[[2.0, 1.0], [1.0, 1.0]]);
        let gi = g.inv().unwrap();
        assert_eq!(g.mul(&gi), SquareMatrix::identity_like(2, &1.0));
        assert_eq!(SquareMatrix::identity_like(2, &0.0).apply(&[3.0, 4.0]), vec![3.0, 4.0]);
        assert!(matches!(m(&[[1.0, 2.0], [2.0, 4.0]]).inv(), Err(Error::Singular)));
    }

    #[test]
    fn padic_norm_and_inverse() {
        let v = [PAdic::from_i64(5, 5, 32), PAdic::from_i64(1, 5, 32)];
        assert_eq!(norm(&v), 1.0);
        let g = AnyMatrix::parse_csv("field,padic,5\n5,1\n0,1/5\n").unwrap();
        let AnyMatrix::PAdic(g) = g else { panic!() };
        let one = PAdic::one(5, 32);
        assert_eq!(g.mul(&g.inv().unwrap()), SquareMatrix::identity_like(2, &one));
        assert_eq!(g.det(), one);
    }

    #[test]
    fn csv_round_trip() {
        for text in ["field,real\n1.5,2\n-3,4\n", "field,padic,2,16\n1,2\n3/5,-7\n"] {
            let a = AnyMatrix::parse_csv(text).unwrap();
            assert_eq!(AnyMatrix::parse_csv(&a.to_csv()).unwrap(), a);
        }
        assert!(AnyMatrix::parse_csv("field,complex\n1\n").is_err());
        assert!(AnyMatrix::parse_csv("field,real\n1,2\n3\n").is_err());
    }
}
