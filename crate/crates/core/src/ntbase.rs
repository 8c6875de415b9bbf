//! Primes, Legendre symbols, floors of linear forms in `p`, and
//! representations of `p`, `2p`, `4p` by binary quadratic forms.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Deterministic primality test by trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d * d <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// All primes `<= limit`, ascending (sieve of Eratosthenes).
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Primes in `[lo, hi]`.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    sieve_primes(hi).into_iter().filter(|&q| q >= lo).collect()
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Legendre symbol `(a|p)` for an odd prime `p`, via Euler's criterion.
pub fn legendre(a: i64, p: u64) -> i8 {
    let r = (a as i128).rem_euclid(p as i128) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// `floor((a*p + b) / c)` for `c > 0`.
pub fn floor_linear(a: i64, b: i64, c: i64, p: u64) -> i64 {
    assert!(c > 0, "floor_linear needs a positive divisor");
    let num = a as i128 * p as i128 + b as i128;
    num.div_euclid(c as i128) as i64
}

/// Exact integer square root.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("{t}*{p} is not of the form {alpha}x^2+{beta}y^2")]
    NotRepresentable { t: u64, alpha: u64, beta: u64, p: u64 },
    #[error("{t}*{p} = {alpha}x^2+{beta}y^2 has several values of x^2 ({first}, {second})")]
    AmbiguousRepresentation { t: u64, alpha: u64, beta: u64, p: u64, first: u64, second: u64 },
    #[error("witness x = {x} for {t}*{p} = {alpha}x^2+{beta}y^2 is divisible by {p}")]
    WitnessNotCoprime { t: u64, alpha: u64, beta: u64, p: u64, x: u64 },
}

/// A witness `t*p = alpha*x^2 + beta*y^2` with `x, y >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadRep {
    pub t: u64,
    pub alpha: u64,
    pub beta: u64,
    pub p: u64,
    pub x: u64,
    pub y: u64,
}

/// Find `x, y >= 0` with `t*p = alpha*x^2 + beta*y^2` by scanning `y`.
///
/// Fails when no witness exists, when two witnesses disagree on `x^2`, or
/// when `p | x`.
pub fn represent_form(t: u64, alpha: u64, beta: u64, p: u64) -> Result<QuadRep, FormError> {
    assert!(alpha > 0 && beta > 0, "form coefficients must be positive");
    let target = t * p;
    let mut found: Option<(u64, u64)> = None;
    let ymax = isqrt(target / beta);
    for y in 0..=ymax {
        let rest = target - beta * y * y;
        if !rest.is_multiple_of(alpha) {
            continue;
        }
        let q = rest / alpha;
        let x = isqrt(q);
        if x * x != q {
            continue;
        }
        match found {
            None => found = Some((x, y)),
            Some((x0, _)) if x0 == x => {}
            Some((x0, _)) => {
                return Err(FormError::AmbiguousRepresentation { t, alpha, beta, p, first: x0 * x0, second: x * x })
            }
        }
    }
    let (x, y) = found.ok_or(FormError::NotRepresentable { t, alpha, beta, p })?;
    if x % p == 0 {
        return Err(FormError::WitnessNotCoprime { t, alpha, beta, p, x });
    }
    Ok(QuadRep { t, alpha, beta, p, x, y })
}

/// One argument of a Legendre-symbol guard: the prime itself or a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LegArg {
    P,
    Int(i64),
}

impl fmt::Display for LegArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LegArg::P => write!(f, "p"),
            LegArg::Int(a) => write!(f, "{a}"),
        }
    }
}

/// A decidable constraint on the prime `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrimeCondition {
    All,
    /// `p mod modulus` lies in `residues`.
    ModIn {
        modulus: u64,
        residues: Vec<u64>,
    },
    /// `(top|bottom) == sign`, where `bottom` is `p` or an odd prime constant.
    Legendre {
        top: LegArg,
        bottom: LegArg,
        sign: i8,
    },
    NotEqual(u64),
    Greater(u64),
    And(Vec<PrimeCondition>),
}

/// Legendre symbol with either argument possibly equal to `p`.
pub fn legendre_args(top: LegArg, bottom: LegArg, p: u64) -> i8 {
    let val = |a: LegArg| match a {
        LegArg::P => p as i64,
        LegArg::Int(n) => n,
    };
    let q = val(bottom);
    assert!(q > 2, "Legendre symbol needs an odd prime below");
    legendre(val(top), q as u64)
}

pub fn check_condition(cond: &PrimeCondition, p: u64) -> bool {
    match cond {
        PrimeCondition::All => true,
        PrimeCondition::ModIn { modulus, residues } => residues.contains(&(p % modulus)),
        PrimeCondition::Legendre { top, bottom, sign } => legendre_args(*top, *bottom, p) == *sign,
        PrimeCondition::NotEqual(n) => p != *n,
        PrimeCondition::Greater(n) => p > *n,
        PrimeCondition::And(parts) => parts.iter().all(|c| check_condition(c, p)),
    }
}

impl fmt::Display for PrimeCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimeCondition::All => write!(f, "all"),
            PrimeCondition::ModIn { modulus, residues } => {
                let set: Vec<String> = residues.iter().map(|r| r.to_string()).collect();
                write!(f, "p mod {modulus} in {{{}}}", set.join(", "))
            }
            PrimeCondition::Legendre { top, bottom, sign } => {
                write!(f, "legendre({top}, {bottom}) == {sign}")
            }
            PrimeCondition::NotEqual(n) => write!(f, "p != {n}"),
            PrimeCondition::Greater(n) => write!(f, "p > {n}"),
            PrimeCondition::And(parts) => {
                let s: Vec<String> = parts.iter().map(|c| c.to_string()).collect();
                write!(f, "{}", s.join(" and "))
            }
        }
    }
}
