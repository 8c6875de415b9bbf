//! Exact arithmetic modulo `p^e` for odd primes `p` and `1 <= e <= 5`.
//!
//! Two value types live here. [`Residue`] is a fully reduced class modulo
//! `p^e`. [`ValUnit`] is a p-adically scaled value `p^v * u` with `u` a unit,
//! which lets binomial coefficients divisible by `p` be divided by factors
//! divisible by `p` without losing information.
//!
//! Residues are stored as `u64` and multiplied through `u128`, so every
//! modulus must satisfy `p^e < 2^64`. For `e = 5` that is `p <= 7131`, for
//! `e = 4` it is `p <= 65535`, and for `e = 3` roughly `p < 2.6 * 10^6`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use thiserror::Error;

use crate::ntbase::is_prime;

pub const MAX_EXPONENT: u32 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("{p} is not an odd prime")]
    NotOddPrime { p: u64 },
    #[error("exponent {e} is outside 1..={max}", max = MAX_EXPONENT)]
    ExponentOutOfRange { e: u32 },
    #[error("{p}^{e} does not fit in 64 bits")]
    ModulusTooLarge { p: u64, e: u32 },
    #[error("operands carry different moduli ({left} vs {right})")]
    ModulusMismatch { left: Modulus, right: Modulus },
    #[error("{value} is not a unit modulo {p}")]
    NotUnit { value: u64, p: u64 },
    #[error("denominator {den} is divisible by {p}")]
    DenominatorNotUnit { den: i128, p: u64 },
    #[error("division by zero")]
    DivideByZero,
    #[error("result would carry negative p-adic valuation {v}")]
    NegativeValuation { v: i64 },
}

/// The modulus `p^e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    p: u64,
    e: u32,
    pe: u64,
}

impl Modulus {
    pub fn new(p: u64, e: u32) -> Result<Self, ArithError> {
        if p.is_multiple_of(2) || !is_prime(p) {
            return Err(ArithError::NotOddPrime { p });
        }
        if !(1..=MAX_EXPONENT).contains(&e) {
            return Err(ArithError::ExponentOutOfRange { e });
        }
        let pe = p.checked_pow(e).ok_or(ArithError::ModulusTooLarge { p, e })?;
        Ok(Modulus { p, e, pe })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    /// `p^e` itself.
    pub fn pe(&self) -> u64 {
        self.pe
    }

    /// Same prime, different exponent.
    pub fn with_exponent(&self, e: u32) -> Result<Self, ArithError> {
        Modulus::new(self.p, e)
    }

    /// `p^k` for `k <= e`.
    pub fn p_pow(&self, k: u32) -> u64 {
        debug_assert!(k <= self.e);
        self.p.pow(k)
    }

    /// Reduce a signed integer into `[0, p^e)`.
    pub fn reduce(&self, z: i128) -> u64 {
        z.rem_euclid(self.pe as i128) as u64
    }

    fn mul_raw(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.pe as u128) as u64
    }

    fn add_raw(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.pe as u128) as u64
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.e)
    }
}

/// A residue class modulo `p^e`, always fully reduced into `[0, p^e)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Residue {
    m: Modulus,
    v: u64,
}

impl Residue {
    pub fn new(v: u64, m: Modulus) -> Self {
        Residue { m, v: v % m.pe }
    }

    pub fn from_int(z: i128, m: Modulus) -> Self {
        Residue { m, v: m.reduce(z) }
    }

    pub fn zero(m: Modulus) -> Self {
        Residue { m, v: 0 }
    }

    pub fn one(m: Modulus) -> Self {
        Residue { m, v: 1 % m.pe }
    }

    pub fn value(&self) -> u64 {
        self.v
    }

    pub fn modulus(&self) -> Modulus {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.v == 0
    }

    pub fn is_unit(&self) -> bool {
        !self.v.is_multiple_of(self.m.p)
    }

    /// Number of factors of `p` in the stored representative, `None` for zero.
    pub fn valuation(&self) -> Option<u32> {
        if self.v == 0 {
            return None;
        }
        let mut v = 0;
        let mut x = self.v;
        while x.is_multiple_of(self.m.p) {
            x /= self.m.p;
            v += 1;
        }
        Some(v)
    }

    fn check(&self, other: &Residue) -> Result<(), ArithError> {
        if self.m != other.m {
            return Err(ArithError::ModulusMismatch { left: self.m, right: other.m });
        }
        Ok(())
    }

    pub fn try_add(self, other: Residue) -> Result<Residue, ArithError> {
        self.check(&other)?;
        Ok(Residue { m: self.m, v: self.m.add_raw(self.v, other.v) })
    }

    pub fn try_sub(self, other: Residue) -> Result<Residue, ArithError> {
        self.check(&other)?;
        Ok(Residue { m: self.m, v: self.m.add_raw(self.v, self.m.pe - other.v) })
    }

    pub fn try_mul(self, other: Residue) -> Result<Residue, ArithError> {
        self.check(&other)?;
        Ok(Residue { m: self.m, v: self.m.mul_raw(self.v, other.v) })
    }

    /// Multiplicative inverse modulo `p^e`.
    pub fn inv(self) -> Result<Residue, ArithError> {
        if !self.is_unit() {
            return Err(ArithError::NotUnit { value: self.v, p: self.m.p });
        }
        let inv = inverse_mod(self.v as i128, self.m.pe as i128).expect("unit has an inverse");
        Ok(Residue { m: self.m, v: inv as u64 })
    }

    /// `self^n`; a negative `n` inverts first and needs a unit.
    pub fn pow(self, n: i64) -> Result<Residue, ArithError> {
        let base = if n < 0 { self.inv()? } else { self };
        let mut exp = n.unsigned_abs();
        let mut acc = Residue::one(self.m);
        let mut sq = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= sq;
            }
            sq = sq * sq;
            exp >>= 1;
        }
        Ok(acc)
    }

    /// `num / den` reduced modulo `p^e`.
    pub fn from_rational(num: i128, den: i128, m: Modulus) -> Result<Residue, ArithError> {
        if den == 0 {
            return Err(ArithError::DivideByZero);
        }
        if den.rem_euclid(m.p as i128) == 0 {
            return Err(ArithError::DenominatorNotUnit { den, p: m.p });
        }
        let d = Residue::from_int(den, m).inv()?;
        Ok(Residue::from_int(num, m) * d)
    }

    /// Image in `Z/p^f` for `f <= e`.
    pub fn reduce_to(self, m: Modulus) -> Residue {
        debug_assert_eq!(m.p, self.m.p);
        debug_assert!(m.e <= self.m.e);
        Residue::new(self.v, m)
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.v, self.m)
    }
}

macro_rules! residue_op {
    ($trait:ident, $method:ident, $try:ident, $assign_trait:ident, $assign:ident) => {
        impl $trait for Residue {
            type Output = Residue;
            /// Panics when the moduli differ; use the `try_*` form to get an error instead.
            fn $method(self, rhs: Residue) -> Residue {
                match self.$try(rhs) {
                    Ok(r) => r,
                    Err(e) => panic!("{e}"),
                }
            }
        }

        impl $assign_trait for Residue {
            fn $assign(&mut self, rhs: Residue) {
                *self = $trait::$method(*self, rhs);
            }
        }
    };
}

residue_op!(Add, add, try_add, AddAssign, add_assign);
residue_op!(Sub, sub, try_sub, SubAssign, sub_assign);
residue_op!(Mul, mul, try_mul, MulAssign, mul_assign);

impl Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Residue {
        Residue { m: self.m, v: if self.v == 0 { 0 } else { self.m.pe - self.v } }
    }
}

/// Inverse of `a` modulo `n` by the extended Euclidean algorithm.
pub fn inverse_mod(a: i128, n: i128) -> Option<i128> {
    let (mut old_r, mut r) = (a.rem_euclid(n), n);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(n))
}

/// A p-adically scaled value: exact zero, or `p^v * u` with `u` a unit mod `p^e`.
///
/// The represented number is known modulo `p^(e+v)`. Reducing to a
/// [`Residue`] gives `p^v * u mod p^e`, which is `0` once `v >= e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ValUnit {
    m: Modulus,
    // None encodes exact zero.
    inner: Option<(u32, u64)>,
}

impl ValUnit {
    pub fn zero(m: Modulus) -> Self {
        ValUnit { m, inner: None }
    }

    pub fn one(m: Modulus) -> Self {
        ValUnit { m, inner: Some((0, 1)) }
    }

    /// Build from valuation and unit part. `u` must be coprime to `p`.
    pub fn from_parts(v: u32, u: u64, m: Modulus) -> Result<Self, ArithError> {
        let u = u % m.pe;
        if u.is_multiple_of(m.p) {
            return Err(ArithError::NotUnit { value: u, p: m.p });
        }
        Ok(ValUnit { m, inner: Some((v, u)) })
    }

    /// Factor the full power of `p` out of `z`.
    pub fn from_int(z: i128, m: Modulus) -> Self {
        if z == 0 {
            return ValUnit::zero(m);
        }
        let p = m.p as i128;
        let mut z = z;
        let mut v = 0u32;
        while z % p == 0 {
            z /= p;
            v += 1;
        }
        ValUnit { m, inner: Some((v, m.reduce(z))) }
    }

    /// Factor `p` out of a residue representative. Valuations of at least
    /// `e` cannot be seen and come back as zero.
    pub fn from_residue(r: Residue) -> Self {
        ValUnit::from_int(r.value() as i128, r.modulus())
    }

    pub fn modulus(&self) -> Modulus {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_none()
    }

    pub fn valuation(&self) -> Option<u32> {
        self.inner.map(|(v, _)| v)
    }

    pub fn unit(&self) -> Option<u64> {
        self.inner.map(|(_, u)| u)
    }

    fn check(&self, other: &ValUnit) -> Result<(), ArithError> {
        if self.m != other.m {
            return Err(ArithError::ModulusMismatch { left: self.m, right: other.m });
        }
        Ok(())
    }

    pub fn try_mul(self, other: ValUnit) -> Result<ValUnit, ArithError> {
        self.check(&other)?;
        Ok(match (self.inner, other.inner) {
            (Some((va, ua)), Some((vb, ub))) => ValUnit { m: self.m, inner: Some((va + vb, self.m.mul_raw(ua, ub))) },
            _ => ValUnit::zero(self.m),
        })
    }

    pub fn try_div(self, other: ValUnit) -> Result<ValUnit, ArithError> {
        self.check(&other)?;
        let (vb, ub) = other.inner.ok_or(ArithError::DivideByZero)?;
        let Some((va, ua)) = self.inner else {
            return Ok(ValUnit::zero(self.m));
        };
        if va < vb {
            return Err(ArithError::NegativeValuation { v: va as i64 - vb as i64 });
        }
        let inv = Residue::new(ub, self.m).inv()?;
        Ok(ValUnit { m: self.m, inner: Some((va - vb, self.m.mul_raw(ua, inv.value()))) })
    }

    pub fn pow(self, n: u32) -> ValUnit {
        match self.inner {
            None if n == 0 => ValUnit::one(self.m),
            None => self,
            Some((v, u)) => {
                let u = Residue::new(u, self.m).pow(n as i64).expect("non-negative power");
                ValUnit { m: self.m, inner: Some((v * n, u.value())) }
            }
        }
    }

    /// Sum of two scaled values.
    ///
    /// Both operands are aligned to the smaller valuation `w`; the result is
    /// correct modulo `p^(w+e)`, which always covers the image modulo `p^e`.
    /// When the aligned sum vanishes modulo `p^e` the result saturates to
    /// exact zero and any finer valuation information is dropped. When it is
    /// divisible by `p^s` for some `0 < s < e`, the unit part of the result is
    /// only meaningful modulo `p^(e-s)`.
    pub fn try_add(self, other: ValUnit) -> Result<ValUnit, ArithError> {
        self.check(&other)?;
        let (lo, hi) = match (self.inner, other.inner) {
            (None, _) => return Ok(other),
            (_, None) => return Ok(self),
            (Some(a), Some(b)) => {
                if a.0 <= b.0 {
                    (a, b)
                } else {
                    (b, a)
                }
            }
        };
        let m = self.m;
        let shift = hi.0 - lo.0;
        let scaled = if shift >= m.e { 0 } else { m.mul_raw(hi.1, m.p_pow(shift)) };
        let s = m.add_raw(lo.1, scaled);
        if s == 0 {
            return Ok(ValUnit::zero(m));
        }
        let mut extra = 0;
        let mut u = s;
        while u.is_multiple_of(m.p) {
            u /= m.p;
            extra += 1;
        }
        Ok(ValUnit { m, inner: Some((lo.0 + extra, u)) })
    }

    pub fn to_residue(&self) -> Residue {
        match self.inner {
            None => Residue::zero(self.m),
            Some((v, _)) if v >= self.m.e => Residue::zero(self.m),
            Some((v, u)) => Residue::new(self.m.mul_raw(u, self.m.p_pow(v)), self.m),
        }
    }
}
