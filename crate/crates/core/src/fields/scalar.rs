use std::fmt;

use serde::{Deserialize, Serialize};

use super::padic::PAdic;
use crate::error::{Error, Result};

/// The field a scalar or matrix lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Field {
    Real,
    Padic { p: u32, precision: usize },
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Real => write!(f, "real"),
            Field::Padic { p, precision } => write!(f, "padic,{p},{precision}"),
        }
    }
}

/// Arithmetic shared by every scalar type the matrix and walk code is generic over.
pub trait LocalField: Clone + fmt::Debug + Send + Sync + 'static {
    fn field(&self) -> Field;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_i64_like(&self, n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn abs(&self) -> f64;
    fn log_abs(&self) -> f64;
    fn is_zero(&self) -> bool;

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Norm of a vector: Euclidean over the reals, max over non-archimedean fields.
    fn vec_norm(v: &[Self]) -> f64;

    /// Best-effort real value for binning and display.
    fn to_f64_lossy(&self) -> f64;
}

impl LocalField for f64 {
    fn field(&self) -> Field {
        Field::Real
    }
    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn from_i64_like(&self, n: i64) -> Self {
        n as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
    fn abs(&self) -> f64 {
        f64::abs(*self)
    }
    fn log_abs(&self) -> f64 {
        f64::abs(*self).ln()
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn vec_norm(v: &[Self]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl LocalField for PAdic {
    fn field(&self) -> Field {
        Field::Padic { p: self.prime(), precision: self.precision() }
    }
    fn zero_like(&self) -> Self {
        PAdic::zero(self.prime(), self.precision())
    }
    fn one_like(&self) -> Self {
        PAdic::one(self.prime(), self.precision())
    }
    fn from_i64_like(&self, n: i64) -> Self {
        PAdic::from_i64(n, self.prime(), self.precision())
    }
    fn add(&self, o: &Self) -> Self {
        PAdic::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        PAdic::mul(self, o)
    }
    fn neg(&self) -> Self {
        PAdic::neg(self)
    }
    fn inv(&self) -> Option<Self> {
        PAdic::inv(self).ok()
    }
    fn abs(&self) -> f64 {
        PAdic::abs(self)
    }
    fn log_abs(&self) -> f64 {
        PAdic::log_abs(self)
    }
    fn is_zero(&self) -> bool {
        PAdic::is_zero(self)
    }
    fn vec_norm(v: &[Self]) -> f64 {
        v.iter().map(PAdic::abs).fold(0.0, f64::max)
    }
    fn to_f64_lossy(&self) -> f64 {
        // Signed representative of the first digits; used only for labels.
        self.truncated_integer(8).map(|n| n as f64).unwrap_or(f64::NAN)
    }
}

/// A tagged scalar in either field. Binary operations check that both sides
/// share a field descriptor.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalScalar {
    Real(f64),
    PAdic(PAdic),
}

impl LocalScalar {
    pub fn field(&self) -> Field {
        match self {
            LocalScalar::Real(_) => Field::Real,
            LocalScalar::PAdic(x) => x.field(),
        }
    }

    fn pair<'a>(&'a self, o: &'a Self) -> Result<(&'a Self, &'a Self)> {
        if self.field() != o.field() {
            return Err(Error::FieldMismatch(format!("{} vs {}", self.field(), o.field())));
        }
        Ok((self, o))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        Ok(match self.pair(o)? {
            (LocalScalar::Real(a), LocalScalar::Real(b)) => LocalScalar::Real(a + b),
            (LocalScalar::PAdic(a), LocalScalar::PAdic(b)) => LocalScalar::PAdic(a.add(b)),
            _ => unreachable!(),
        })
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        Ok(match self.pair(o)? {
            (LocalScalar::Real(a), LocalScalar::Real(b)) => LocalScalar::Real(a * b),
            (LocalScalar::PAdic(a), LocalScalar::PAdic(b)) => LocalScalar::PAdic(a.mul(b)),
            _ => unreachable!(),
        })
    }

    pub fn neg(&self) -> Self {
        match self {
            LocalScalar::Real(a) => LocalScalar::Real(-a),
            LocalScalar::PAdic(a) => LocalScalar::PAdic(a.neg()),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match self {
            LocalScalar::Real(a) if *a == 0.0 => Err(Error::DivisionByZero),
            LocalScalar::Real(a) => Ok(LocalScalar::Real(1.0 / a)),
            LocalScalar::PAdic(a) => Ok(LocalScalar::PAdic(a.inv()?)),
        }
    }

    pub fn abs(&self) -> f64 {
        match self {
            LocalScalar::Real(a) => a.abs(),
            LocalScalar::PAdic(a) => a.abs(),
        }
    }
}

impl fmt::Display for LocalScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalScalar::Real(a) => write!(f, "{a}"),
            LocalScalar::PAdic(a) => write!(f, "{a}"),
        }
    }
}

/// Real number with an unbounded binary exponent: `m * 2^e`, `0.5 <= |m| < 1`.
///
/// Critical affine walks reach magnitudes like `2^(±sqrt n)` and occasionally
/// beyond the f64 range at horizons of 10^6 steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wide {
    m: f64,
    e: i64,
}

impl Wide {
    pub const ZERO: Wide = Wide { m: 0.0, e: 0 };

    pub fn new(x: f64) -> Self {
        Self::from_parts(x, 0)
    }

    fn from_parts(m: f64, e: i64) -> Self {
        if m == 0.0 || !m.is_finite() {
            return Wide { m, e: 0 };
        }
        let bits = m.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        if exp == 0 {
            // Subnormal: rescale into the normal range first.
            return Self::from_parts(m * 2f64.powi(64), e - 64);
        }
        let shift = exp - 1022;
        let mant = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
        Wide { m: mant, e: e + shift }
    }

    pub fn to_f64(self) -> f64 {
        if self.e > 1100 {
            return self.m.signum() * f64::INFINITY;
        }
        if self.e < -1100 {
            return 0.0;
        }
        self.m * 2f64.powi(self.e as i32)
    }

    pub fn log2_abs(self) -> f64 {
        self.m.abs().log2() + self.e as f64
    }
}

impl LocalField for Wide {
    fn field(&self) -> Field {
        Field::Real
    }
    fn zero_like(&self) -> Self {
        Wide::ZERO
    }
    fn one_like(&self) -> Self {
        Wide::new(1.0)
    }
    fn from_i64_like(&self, n: i64) -> Self {
        Wide::new(n as f64)
    }
    fn add(&self, o: &Self) -> Self {
        if self.m == 0.0 {
            return *o;
        }
        if o.m == 0.0 {
            return *self;
        }
        let (hi, lo) = if self.e >= o.e { (self, o) } else { (o, self) };
        let d = hi.e - lo.e;
        if d > 60 {
            return *hi;
        }
        Wide::from_parts(hi.m + lo.m * 2f64.powi(-(d as i32)), hi.e)
    }
    fn mul(&self, o: &Self) -> Self {
        Wide::from_parts(self.m * o.m, self.e + o.e)
    }
    fn neg(&self) -> Self {
        Wide { m: -self.m, e: self.e }
    }
    fn inv(&self) -> Option<Self> {
        (self.m != 0.0).then(|| Wide::from_parts(1.0 / self.m, -self.e))
    }
    fn abs(&self) -> f64 {
        self.to_f64().abs()
    }
    fn log_abs(&self) -> f64 {
        self.log2_abs() * std::f64::consts::LN_2
    }
    fn is_zero(&self) -> bool {
        self.m == 0.0
    }
    fn vec_norm(v: &[Self]) -> f64 {
        v.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt()
    }
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64()
    }
}
