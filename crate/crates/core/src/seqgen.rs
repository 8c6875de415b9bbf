//! Bernoulli, Euler and `U` numbers modulo `p`, and the eight Apéry-like
//! sequences modulo `p^e`.
//!
//! Each Apéry-like sequence is produced by its three-term recurrence and can
//! be recomputed independently from its binomial-sum formula.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::modring::{Modulus, Residue, ValUnit};

fn mod_p(p: u64) -> Result<Modulus, EvalError> {
    Ok(Modulus::new(p, 1)?)
}

/// `C(n, k) mod p` for any `n`, by Lucas' theorem.
fn binom_mod_p(mut n: u64, mut k: u64, fact: &[Residue], inv_fact: &[Residue]) -> Residue {
    let m = fact[0].modulus();
    let p = m.p();
    let mut acc = Residue::one(m);
    while n > 0 || k > 0 {
        let (nd, kd) = ((n % p) as usize, (k % p) as usize);
        if kd > nd {
            return Residue::zero(m);
        }
        acc = acc * fact[nd] * inv_fact[kd] * inv_fact[nd - kd];
        n /= p;
        k /= p;
    }
    acc
}

fn factorials_mod_p(m: Modulus) -> (Vec<Residue>, Vec<Residue>) {
    let p = m.p() as usize;
    let mut fact = Vec::with_capacity(p);
    fact.push(Residue::one(m));
    for i in 1..p {
        fact.push(fact[i - 1] * Residue::new(i as u64, m));
    }
    let inv: Vec<Residue> = fact.iter().map(|f| f.inv().expect("i! is a unit for i < p")).collect();
    (fact, inv)
}

/// `B_0, ..., B_nmax` modulo `p` from `sum_{k<n} C(n,k) B_k = 0`.
pub fn bernoulli_table(nmax: u64, p: u64) -> Result<Vec<Residue>, EvalError> {
    let m = mod_p(p)?;
    if nmax + 3 > p {
        return Err(EvalError::OutOfRange { index: nmax as i64, limit: p as i64 - 3 });
    }
    let (fact, inv_fact) = factorials_mod_p(m);
    let mut b = vec![Residue::one(m)];
    for n in 1..=nmax {
        // (n+1) B_n = -sum_{k<n} C(n+1,k) B_k
        let mut s = Residue::zero(m);
        for (k, bk) in b.iter().enumerate() {
            s += binom_mod_p(n + 1, k as u64, &fact, &inv_fact) * *bk;
        }
        let d = Residue::new(n + 1, m).inv()?;
        b.push(-(s * d));
    }
    Ok(b)
}

/// `B_n mod p` for `0 <= n <= p-3`.
pub fn bernoulli_mod(n: u64, p: u64) -> Result<Residue, EvalError> {
    Ok(bernoulli_table(n, p)?[n as usize])
}

fn signed_recurrence(nmax: u64, p: u64, scale: i128) -> Result<Vec<Residue>, EvalError> {
    let m = mod_p(p)?;
    let (fact, inv_fact) = factorials_mod_p(m);
    let c = Residue::from_int(scale, m);
    let mut t = vec![Residue::one(m)];
    for n in 1..=nmax {
        let mut s = Residue::zero(m);
        for k in 1..=n / 2 {
            s += binom_mod_p(n, 2 * k, &fact, &inv_fact) * t[(n - 2 * k) as usize];
        }
        t.push(-(c * s));
    }
    Ok(t)
}

/// `E_0, ..., E_nmax` modulo `p`.
pub fn euler_table(nmax: u64, p: u64) -> Result<Vec<Residue>, EvalError> {
    signed_recurrence(nmax, p, 1)
}

/// `U_0, ..., U_nmax` modulo `p`.
pub fn u_table(nmax: u64, p: u64) -> Result<Vec<Residue>, EvalError> {
    signed_recurrence(nmax, p, 2)
}

pub fn euler_mod(n: u64, p: u64) -> Result<Residue, EvalError> {
    Ok(euler_table(n, p)?[n as usize])
}

pub fn u_mod(n: u64, p: u64) -> Result<Residue, EvalError> {
    Ok(u_table(n, p)?[n as usize])
}

/// `B_n mod p` for even `2 <= n <= p-3` in `O(p log p)`, using
/// `sum_{j=1}^{p-1} j^n = p B_n (mod p^2)`.
pub fn bernoulli_fast(n: u64, p: u64) -> Result<Residue, EvalError> {
    let m1 = mod_p(p)?;
    if n == 0 {
        return Ok(Residue::one(m1));
    }
    if n % 2 == 1 {
        return Ok(if n == 1 { -Residue::new(2, m1).inv()? } else { Residue::zero(m1) });
    }
    if n + 3 > p {
        return Err(EvalError::OutOfRange { index: n as i64, limit: p as i64 - 3 });
    }
    let m2 = Modulus::new(p, 2)?;
    let mut s = Residue::zero(m2);
    for j in 1..p {
        s += Residue::new(j, m2).pow(n as i64)?;
    }
    debug_assert_eq!(s.value() % p, 0);
    Ok(Residue::new(s.value() / p, m1))
}

/// `E_n mod p` in `O(p log n)`, using `E_n = sum_{j<p} (-1)^j (2j+1)^n (mod p)`.
pub fn euler_fast(n: u64, p: u64) -> Result<Residue, EvalError> {
    let m = mod_p(p)?;
    let mut s = Residue::zero(m);
    for j in 0..p {
        let t = Residue::new(2 * j + 1, m).pow(n as i64)?;
        if j % 2 == 0 {
            s += t;
        } else {
            s -= t;
        }
    }
    Ok(s)
}

/// `U_n mod p` in `O(p log n)`, using
/// `2 U_n = sum_{j<p} (-1)^j ((3j+1)^n + (3j+2)^n) (mod p)`.
pub fn u_fast(n: u64, p: u64) -> Result<Residue, EvalError> {
    let m = mod_p(p)?;
    let mut s = Residue::zero(m);
    for j in 0..p {
        let t = Residue::new(3 * j + 1, m).pow(n as i64)? + Residue::new(3 * j + 2, m).pow(n as i64)?;
        if j % 2 == 0 {
            s += t;
        } else {
            s -= t;
        }
    }
    Ok(s * Residue::new(2, m).inv()?)
}

/// The eight Apéry-like sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SeqName {
    Apery,
    Domb,
    AlmkvistZudilin,
    T,
    V,
    V3,
    V4,
    V6,
}

impl SeqName {
    pub const ALL: [SeqName; 8] = [
        SeqName::Apery,
        SeqName::Domb,
        SeqName::AlmkvistZudilin,
        SeqName::T,
        SeqName::V,
        SeqName::V3,
        SeqName::V4,
        SeqName::V6,
    ];

    /// Short name used in the conjecture language.
    pub fn symbol(&self) -> &'static str {
        match self {
            SeqName::Apery => "A",
            SeqName::Domb => "D",
            SeqName::AlmkvistZudilin => "b",
            SeqName::T => "T",
            SeqName::V => "V",
            SeqName::V3 => "V3",
            SeqName::V4 => "V4",
            SeqName::V6 => "V6",
        }
    }

    /// `(a, b, c)` in `(n+1)^3 u_{n+1} = (2n+1)(a n(n+1) + b) u_n - c n^3 u_{n-1}`.
    pub fn coefficients(&self) -> (i64, i64, i64) {
        match self {
            SeqName::Apery => (17, 5, 1),
            SeqName::Domb => (10, 4, 64),
            SeqName::AlmkvistZudilin => (-7, -3, 81),
            SeqName::T => (12, 4, 16),
            SeqName::V => (16, 8, 256),
            SeqName::V3 => (27, 15, 729),
            SeqName::V4 => (64, 40, 4096),
            SeqName::V6 => (432, 312, 186624),
        }
    }
}

impl fmt::Display for SeqName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for SeqName {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SeqName::ALL.into_iter().find(|n| n.symbol() == s).ok_or_else(|| EvalError::Unbound(s.to_string()))
    }
}

/// `u_0, ..., u_{len-1}` modulo `p^e`. Requires `len <= p` so that every
/// divisor `(n+1)^3` is a unit.
pub fn apery_like_recurrence(name: SeqName, m: Modulus, len: u64) -> Result<Vec<Residue>, EvalError> {
    if len > m.p() {
        return Err(EvalError::OutOfRange { index: len as i64, limit: m.p() as i64 });
    }
    let (a, b, c) = name.coefficients();
    let r = |z: i128| Residue::from_int(z, m);
    let mut u = Vec::with_capacity(len as usize);
    if len > 0 {
        u.push(Residue::one(m));
    }
    if len > 1 {
        u.push(r(b as i128));
    }
    for n in 1..len.saturating_sub(1) {
        let n_i = n as i128;
        let lead = r((2 * n_i + 1) * (a as i128 * n_i * (n_i + 1) + b as i128));
        let tail = r(c as i128 * n_i * n_i * n_i);
        let num = lead * u[n as usize] - tail * u[n as usize - 1];
        let den = r((n_i + 1).pow(3)).inv()?;
        u.push(num * den);
    }
    Ok(u)
}

/// Factorials `m!` for `m <= limit` split as `p^v * unit`, modulo `p^e`.
#[derive(Debug, Clone)]
pub struct FactorialTable {
    m: Modulus,
    val: Vec<u32>,
    unit: Vec<Residue>,
    unit_inv: Vec<Residue>,
}

impl FactorialTable {
    pub fn new(m: Modulus, limit: u64) -> Self {
        let p = m.p();
        let mut val = Vec::with_capacity(limit as usize + 1);
        let mut unit = Vec::with_capacity(limit as usize + 1);
        val.push(0);
        unit.push(Residue::one(m));
        for i in 1..=limit {
            let mut j = i;
            let mut v = 0;
            while j % p == 0 {
                j /= p;
                v += 1;
            }
            let k = i as usize;
            val.push(val[k - 1] + v);
            unit.push(unit[k - 1] * Residue::new(j, m));
        }
        let unit_inv = unit.iter().map(|u| u.inv().expect("unit part")).collect();
        FactorialTable { m, val, unit, unit_inv }
    }

    pub fn limit(&self) -> u64 {
        self.val.len() as u64 - 1
    }

    /// `C(n, k)` as a scaled value; zero outside `0 <= k <= n`.
    pub fn binom(&self, n: i64, k: i64) -> ValUnit {
        if k < 0 || n < 0 || k > n {
            return ValUnit::zero(self.m);
        }
        let (n, k) = (n as usize, k as usize);
        assert!(n <= self.limit() as usize, "factorial table too short for C({n},{k})");
        let v = self.val[n] - self.val[k] - self.val[n - k];
        let u = self.unit[n] * self.unit_inv[k] * self.unit_inv[n - k];
        ValUnit::from_parts(v, u.value(), self.m).expect("product of units")
    }
}

fn power(base: i64, exp: u64, m: Modulus) -> ValUnit {
    ValUnit::from_int(base as i128, m).pow(exp as u32)
}

fn product(factors: &[ValUnit]) -> ValUnit {
    let m = factors[0].modulus();
    factors.iter().fold(ValUnit::one(m), |acc, f| acc.try_mul(*f).expect("same modulus"))
}

fn sum_terms(m: Modulus, terms: impl Iterator<Item = ValUnit>) -> Residue {
    terms.fold(Residue::zero(m), |acc, t| acc + t.to_residue())
}

/// `u_n mod p^e` from the binomial-sum formulas.
///
/// Where several formulas are known (T, V, V4) all are evaluated and a
/// disagreement is reported as [`EvalError::FormulaMismatch`].
pub fn apery_like_direct(name: SeqName, n: u64, m: Modulus) -> Result<Residue, EvalError> {
    if n >= m.p() {
        return Err(EvalError::OutOfRange { index: n as i64, limit: m.p() as i64 - 1 });
    }
    let f = FactorialTable::new(m, 6 * n.max(1));
    let values = direct_forms(name, n as i64, &f, m);
    let first = values[0];
    if values.iter().any(|v| *v != first) {
        return Err(EvalError::FormulaMismatch { name: name.symbol(), n });
    }
    Ok(first)
}

/// Every known direct formula for `u_n`, in a fixed order.
pub fn direct_forms(name: SeqName, n: i64, f: &FactorialTable, m: Modulus) -> Vec<Residue> {
    let c = |a: i64, b: i64| f.binom(a, b);
    let nu = n as u64;
    // sum_k C(n,k) C(n+k,k) (-1)^k X_k base^(n-k)
    let shifted = |x: &dyn Fn(i64) -> ValUnit, base: i64| {
        sum_terms(
            m,
            (0..=n).map(|k| {
                let sign = if k % 2 == 0 { 1 } else { -1 };
                product(&[c(n, k), c(n + k, k), ValUnit::from_int(sign, m), x(k), power(base, (n - k) as u64, m)])
            }),
        )
    };
    match name {
        SeqName::Apery => vec![sum_terms(m, (0..=n).map(|k| product(&[c(n, k), c(n, k), c(n + k, k), c(n + k, k)])))],
        SeqName::Domb => {
            vec![sum_terms(m, (0..=n).map(|k| product(&[c(n, k), c(n, k), c(2 * k, k), c(2 * n - 2 * k, n - k)])))]
        }
        SeqName::AlmkvistZudilin => vec![sum_terms(
            m,
            (0..=n / 3).map(|k| {
                product(&[c(2 * k, k), c(3 * k, k), c(n, 3 * k), c(n + k, k), power(-3, nu - 3 * k as u64, m)])
            }),
        )],
        SeqName::T => vec![
            sum_terms(m, (0..=n).map(|k| product(&[c(n, k), c(n, k), c(2 * k, n), c(2 * k, n)]))),
            sum_terms(
                m,
                (0..=n / 2).map(|k| {
                    product(&[
                        c(2 * k, k),
                        c(2 * k, k),
                        c(4 * k, 2 * k),
                        c(n + 2 * k, 4 * k),
                        power(4, nu - 2 * k as u64, m),
                    ])
                }),
            ),
        ],
        SeqName::V => vec![
            shifted(&|k| c(2 * k, k).pow(2), 16),
            sum_terms(m, (0..=n).map(|k| product(&[c(2 * k, k).pow(2), c(2 * n - 2 * k, n - k).pow(2)]))),
            sum_terms(m, (0..=n).map(|k| product(&[c(2 * k, k).pow(3), c(k, n - k), power(-16, (n - k) as u64, m)]))),
        ],
        SeqName::V3 => vec![shifted(&|k| product(&[c(2 * k, k), c(3 * k, k)]), 27)],
        SeqName::V4 => vec![
            shifted(&|k| product(&[c(2 * k, k), c(4 * k, 2 * k)]), 64),
            sum_terms(
                m,
                (0..=n).map(|k| product(&[c(2 * k, k).pow(3), c(2 * n - 2 * k, n - k), power(16, (n - k) as u64, m)])),
            ),
        ],
        SeqName::V6 => vec![shifted(&|k| product(&[c(3 * k, k), c(6 * k, 3 * k)]), 432)],
    }
}
