//! Fixed-precision p-adic numbers.
//!
//! A nonzero element is `p^v * u` where the unit `u` is stored as a little-endian
//! digit vector. The vector length is the number of digits known exactly; it
//! starts at the configured precision and shrinks when cancellation eats
//! leading digits. Comparisons never look past the shorter of two operands.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default number of base-p digits carried by every element.
pub const DEFAULT_PRECISION: usize = 32;

#[derive(Clone, Debug)]
pub struct PAdic {
    p: u32,
    prec: usize,
    val: i64,
    digits: Vec<u32>,
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn inv_mod(a: u32, p: u32) -> u32 {
    // p is prime, so a^(p-2) is the inverse.
    let (mut base, mut exp, mut acc) = (a as u64 % p as u64, p as u64 - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    acc as u32
}

impl PAdic {
    pub fn check_prime(p: u32) -> Result<()> {
        if p > 1 << 16 {
            return Err(Error::InvalidArgument(format!("prime {p} too large (limit 65536)")));
        }
        if !is_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not prime")));
        }
        Ok(())
    }

    pub fn zero(p: u32, prec: usize) -> Self {
        Self { p, prec, val: 0, digits: Vec::new() }
    }

    pub fn one(p: u32, prec: usize) -> Self {
        Self::from_i64(1, p, prec)
    }

    /// Builds `p^val * sum(digits[i] p^i)` after normalizing leading zeros.
    pub fn from_parts(p: u32, prec: usize, val: i64, digits: Vec<u32>) -> Result<Self> {
        Self::check_prime(p)?;
        if digits.iter().any(|&d| d >= p) {
            return Err(Error::InvalidArgument(format!("digit out of range for p = {p}")));
        }
        let mut digits = digits;
        digits.truncate(prec);
        Ok(Self::normalized(p, prec, val, digits))
    }

    fn normalized(p: u32, prec: usize, mut val: i64, mut digits: Vec<u32>) -> Self {
        let lead = digits.iter().take_while(|&&d| d == 0).count();
        if lead == digits.len() {
            return Self::zero(p, prec);
        }
        digits.drain(..lead);
        val += lead as i64;
        Self { p, prec, val, digits }
    }

    pub fn from_i64(n: i64, p: u32, prec: usize) -> Self {
        if n == 0 {
            return Self::zero(p, prec);
        }
        let mut m = n.unsigned_abs();
        let mut val = 0;
        while m % p as u64 == 0 {
            m /= p as u64;
            val += 1;
        }
        let mut digits = Vec::with_capacity(prec);
        while digits.len() < prec {
            digits.push((m % p as u64) as u32);
            m /= p as u64;
        }
        let x = Self { p, prec, val, digits };
        if n < 0 {
            x.neg()
        } else {
            x
        }
    }

    pub fn from_rational(num: i64, den: i64, p: u32, prec: usize) -> Result<Self> {
        Self::check_prime(p)?;
        let d = Self::from_i64(den, p, prec);
        Ok(Self::from_i64(num, p, prec).mul(&d.inv()?))
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Valuation, or `None` for zero (valuation +infinity).
    pub fn valuation(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.val)
    }

    /// Number of exactly known unit digits.
    pub fn exact_digits(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn abs(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            (self.p as f64).powf(-(self.val as f64))
        }
    }

    pub fn log_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            -(self.val as f64) * (self.p as f64).ln()
        }
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let p = self.p;
        let mut digits = Vec::with_capacity(self.digits.len());
        digits.push(p - self.digits[0]);
        digits.extend(self.digits[1..].iter().map(|d| p - 1 - d));
        Self { digits, ..self.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let p = self.p as u64;
        let val = self.val.min(other.val);
        let top = (self.val + self.digits.len() as i64).min(other.val + other.digits.len() as i64);
        let len = (top - val).max(0) as usize;
        let mut out = Vec::with_capacity(len);
        let mut carry = 0u64;
        let digit = |x: &Self, k: i64| -> u64 {
            let i = k - x.val;
            if i >= 0 && (i as usize) < x.digits.len() {
                x.digits[i as usize] as u64
            } else {
                0
            }
        };
        for i in 0..len as i64 {
            let s = digit(self, val + i) + digit(other, val + i) + carry;
            out.push((s % p) as u32);
            carry = s / p;
        }
        Self::normalized(self.p, self.prec.max(other.prec), val, out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.p, self.prec.max(other.prec));
        }
        let p = self.p as u128;
        let len = self.digits.len().min(other.digits.len());
        let mut acc = vec![0u128; len];
        for (i, &a) in self.digits[..len].iter().enumerate() {
            for (j, &b) in other.digits[..len - i].iter().enumerate() {
                acc[i + j] += a as u128 * b as u128;
            }
        }
        let mut out = Vec::with_capacity(len);
        let mut carry = 0u128;
        for a in acc {
            let s = a + carry;
            out.push((s % p) as u32);
            carry = s / p;
        }
        Self { p: self.p, prec: self.prec.max(other.prec), val: self.val + other.val, digits: out }
    }

    /// Multiplicative inverse by digit-by-digit long division of 1 by the unit.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = self.p as i64;
        let len = self.digits.len();
        let d0inv = inv_mod(self.digits[0], self.p) as i64;
        // Remainder r, initially 1, with digits in [0, p).
        let mut r = vec![0i64; len];
        r[0] = 1;
        let mut q = Vec::with_capacity(len);
        for i in 0..len {
            let qi = r[i] * d0inv % p;
            q.push(qi as u32);
            let mut borrow = 0i64;
            for (k, &d) in self.digits[..len - i].iter().enumerate() {
                let mut s = r[i + k] - qi * d as i64 - borrow;
                borrow = 0;
                if s < 0 {
                    let b = (-s + p - 1) / p;
                    s += b * p;
                    borrow = b;
                }
                r[i + k] = s;
            }
            debug_assert_eq!(r[i], 0);
        }
        Ok(Self { p: self.p, prec: self.prec, val: -self.val, digits: q })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    /// Multiplies by `p^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Self { val: self.val + k, ..self.clone() }
    }

    /// Residue of the unit part modulo p (0 for zero).
    pub fn unit_residue(&self) -> u32 {
        self.digits.first().copied().unwrap_or(0)
    }

    /// Rational approximation `p^v * sum(d_i p^i)` truncated to `n` digits, as f64.
    /// Only meaningful for display; p-adic and real magnitudes are unrelated.
    pub fn truncated_integer(&self, n: usize) -> Option<i128> {
        if self.val < 0 {
            return None;
        }
        let mut acc: i128 = 0;
        let mut scale: i128 = (self.p as i128).checked_pow(self.val as u32)?;
        for &d in self.digits.iter().take(n) {
            acc = acc.checked_add(scale.checked_mul(d as i128)?)?;
            scale = scale.checked_mul(self.p as i128)?;
        }
        Some(acc)
    }
}

impl PartialEq for PAdic {
    fn eq(&self, other: &Self) -> bool {
        if self.p != other.p || self.is_zero() != other.is_zero() {
            return false;
        }
        if self.is_zero() {
            return true;
        }
        let n = self.digits.len().min(other.digits.len());
        self.val == other.val && self.digits[..n] == other.digits[..n]
    }
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.p;
        if self.is_zero() {
            return write!(f, "{p}^inf * (0)");
        }
        write!(f, "{p}^{} * (", self.val)?;
        for (i, d) in self.digits.iter().enumerate() {
            match i {
                0 => write!(f, "{d}")?,
                1 => write!(f, " + {d}*{p}")?,
                _ => write!(f, " + {d}*{p}^{i}")?,
            }
        }
        write!(f, ")")
    }
}

impl FromStr for PAdic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed p-adic literal: {s:?}"));
        let (head, body) = s.split_once('*').ok_or_else(bad)?;
        let (p, v) = head.trim().split_once('^').ok_or_else(bad)?;
        let p: u32 = p.trim().parse().map_err(|_| bad())?;
        Self::check_prime(p)?;
        let body = body.trim().strip_prefix('(').and_then(|b| b.strip_suffix(')')).ok_or_else(bad)?;
        if v.trim() == "inf" {
            return if body.trim() == "0" { Ok(Self::zero(p, DEFAULT_PRECISION)) } else { Err(bad()) };
        }
        let val: i64 = v.trim().parse().map_err(|_| bad())?;
        let mut digits = Vec::new();
        for (i, term) in body.split('+').enumerate() {
            let term = term.trim();
            let (d, pow) = match term.split_once('*') {
                None => (term, 0usize),
                Some((d, pw)) => {
                    let pw = pw.trim();
                    let exp = match pw.split_once('^') {
                        None if pw.parse::<u32>().ok() == Some(p) => 1,
                        Some((base, e)) if base.parse::<u32>().ok() == Some(p) => e.parse().map_err(|_| bad())?,
                        _ => return Err(bad()),
                    };
                    (d, exp)
                }
            };
            if pow != i {
                return Err(bad());
            }
            digits.push(d.parse::<u32>().map_err(|_| bad())?);
        }
        if digits.first() == Some(&0) {
            return Err(bad());
        }
        let prec = digits.len().max(DEFAULT_PRECISION);
        Self::from_parts(p, prec, val, digits)
    }
}
