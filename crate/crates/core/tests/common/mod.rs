//! Exact big-rational reference evaluation of registry expressions.

#![allow(dead_code)]

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use supercong::conjdsl::ast::{BinOp, Define, Expr, ExprKind};

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(big(n))
}

pub fn binom(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * big(n - i) / big(i + 1);
    }
    acc
}

/// Direct binomial-sum formula for each of the eight sequences.
pub fn sequence(name: &str, n: i64) -> BigInt {
    let c = binom;
    let pw = |b: i64, e: i64| num_traits::pow(big(b), e as usize);
    let sign = |k: i64| if k % 2 == 0 { big(1) } else { big(-1) };
    let terms: Vec<BigInt> = match name {
        "A" => (0..=n).map(|k| (c(n, k) * c(n + k, k)).pow(2)).collect(),
        "D" => (0..=n).map(|k| c(n, k).pow(2) * c(2 * k, k) * c(2 * n - 2 * k, n - k)).collect(),
        "b" => (0..=n / 3).map(|k| c(2 * k, k) * c(3 * k, k) * c(n, 3 * k) * c(n + k, k) * pw(-3, n - 3 * k)).collect(),
        "T" => (0..=n).map(|k| (c(n, k) * c(2 * k, n)).pow(2)).collect(),
        "V" => (0..=n).map(|k| (c(2 * k, k) * c(2 * n - 2 * k, n - k)).pow(2)).collect(),
        "V3" => (0..=n).map(|k| c(n, k) * c(n + k, k) * sign(k) * c(2 * k, k) * c(3 * k, k) * pw(27, n - k)).collect(),
        "V4" => (0..=n).map(|k| c(2 * k, k).pow(3) * c(2 * n - 2 * k, n - k) * pw(16, n - k)).collect(),
        "V6" => {
            (0..=n).map(|k| c(n, k) * c(n + k, k) * sign(k) * c(3 * k, k) * c(6 * k, 3 * k) * pw(432, n - k)).collect()
        }
        other => panic!("unknown sequence {other}"),
    };
    terms.into_iter().sum()
}

pub fn bernoulli(n: usize) -> BigRational {
    let mut b: Vec<BigRational> = vec![rat(1)];
    for m in 1..=n {
        let s: BigRational = (0..m).map(|k| BigRational::from_integer(binom(m as i64 + 1, k as i64)) * &b[k]).sum();
        b.push(-s / rat(m as i64 + 1));
    }
    b[n].clone()
}

fn euler_like(n: usize, factor: i64) -> BigRational {
    let mut e: Vec<BigInt> = vec![big(1)];
    for m in 1..=n {
        let s: BigInt = (1..=m / 2).map(|k| binom(m as i64, 2 * k as i64) * &e[m - 2 * k]).sum();
        e.push(-big(factor) * s);
    }
    BigRational::from_integer(e[n].clone())
}

/// `(a | q)` for an odd prime `q`, by Euler's criterion.
pub fn legendre(a: &BigInt, q: &BigInt) -> i64 {
    let r = a.mod_floor(q);
    if r.is_zero() {
        return 0;
    }
    let e = (q - 1u32) / 2u32;
    if r.modpow(&e, q).is_one() {
        1
    } else {
        -1
    }
}

/// `q mod m`, or `None` when the denominator shares a factor with `m`.
pub fn reduce(q: &BigRational, m: u64) -> Option<u64> {
    let m = BigInt::from(m);
    let d = q.denom().mod_floor(&m);
    let inv = d.modinv(&m)?;
    (q.numer().mod_floor(&m) * inv).mod_floor(&m).to_u64()
}

/// Interprets registry expressions exactly for one prime.
pub struct Oracle<'a> {
    p: i64,
    x: Option<i64>,
    y: Option<i64>,
    defines: HashMap<&'a str, &'a Expr>,
}

impl<'a> Oracle<'a> {
    pub fn new(p: u64, xy: Option<(u64, u64)>, defines: impl IntoIterator<Item = &'a Define>) -> Self {
        Oracle {
            p: p as i64,
            x: xy.map(|v| v.0 as i64),
            y: xy.map(|v| v.1 as i64),
            defines: defines.into_iter().map(|d| (d.name.as_str(), &d.expr)).collect(),
        }
    }

    pub fn eval(&self, e: &Expr) -> BigRational {
        self.go(e, None)
    }

    fn int(&self, e: &Expr, k: Option<(&str, i64)>) -> i64 {
        let v = self.go(e, k);
        assert!(v.is_integer(), "expected an integer, got {v}");
        v.to_integer().to_i64().expect("small integer")
    }

    fn go(&self, e: &Expr, k: Option<(&str, i64)>) -> BigRational {
        match &e.kind {
            ExprKind::Int(n) => BigRational::from_integer(BigInt::from(*n)),
            ExprKind::Var(v) => self.var(v, k),
            ExprKind::Neg(a) => -self.go(a, k),
            ExprKind::Binary(op, a, b) => {
                if *op == BinOp::Pow {
                    let base = self.go(a, k);
                    let n = self.int(b, k);
                    let r = num_traits::pow(base.clone(), n.unsigned_abs() as usize);
                    return if n < 0 { r.recip() } else { r };
                }
                let (x, y) = (self.go(a, k), self.go(b, k));
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => unreachable!(),
                }
            }
            ExprKind::Call(f, args) => self.call(f, args, k),
            ExprKind::Sum { var, lo, hi, body } => {
                let (lo, hi) = (self.int(lo, k), self.int(hi, k));
                (lo..=hi).map(|i| self.go(body, Some((var.as_str(), i)))).sum()
            }
        }
    }

    fn var(&self, v: &str, k: Option<(&str, i64)>) -> BigRational {
        if let Some((name, i)) = k {
            if v == name {
                return rat(i);
            }
            let fam = match v {
                "binom2k" => Some(binom(2 * i, i)),
                "binom3k" => Some(binom(3 * i, i)),
                "binom4k" => Some(binom(4 * i, 2 * i)),
                "binom6k" => Some(binom(6 * i, 3 * i)),
                _ => None,
            };
            if let Some(b) = fam {
                return BigRational::from_integer(b);
            }
        }
        match v {
            "p" => rat(self.p),
            "x" => rat(self.x.expect("x without representation")),
            "y" => rat(self.y.expect("y without representation")),
            name => self.go(self.defines.get(name).unwrap_or_else(|| panic!("unbound {name}")), None),
        }
    }

    fn call(&self, f: &str, args: &[Expr], k: Option<(&str, i64)>) -> BigRational {
        if f == "seq" {
            let ExprKind::Var(name) = &args[0].kind else { panic!("seq expects a name") };
            let (_, n) = k.expect("seq outside a sum");
            return BigRational::from_integer(sequence(name, n));
        }
        let vals: Vec<BigRational> = args.iter().map(|a| self.go(a, k)).collect();
        let as_int = |q: &BigRational| {
            assert!(q.is_integer(), "{f}: non-integral argument {q}");
            q.to_integer()
        };
        match f {
            "binom" => {
                let (n, r) = (as_int(&vals[0]).to_i64().unwrap(), as_int(&vals[1]).to_i64().unwrap());
                BigRational::from_integer(binom(n, r))
            }
            "floor" => BigRational::from_integer(vals[0].floor().to_integer()),
            "legendre" => {
                let (a, q) = (as_int(&vals[0]), as_int(&vals[1]));
                rat(legendre(&a, &q.abs()))
            }
            "harmonic" => {
                let n = as_int(&vals[0]).to_i64().unwrap();
                (1..=n).map(|j| BigRational::new(big(1), big(j))).sum()
            }
            "B" => bernoulli(as_int(&vals[0]).to_usize().unwrap()),
            "E" => euler_like(as_int(&vals[0]).to_usize().unwrap(), 1),
            "U" => euler_like(as_int(&vals[0]).to_usize().unwrap(), 2),
            other => panic!("oracle has no function {other}"),
        }
    }
}
