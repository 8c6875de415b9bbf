use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::rc::Rc;

use crate::error::EvalError;
use crate::modring::{ArithError, Modulus, Residue};
use crate::ntbase::{is_prime, legendre, QuadRep};
use crate::seqgen::{apery_like_recurrence, bernoulli_fast, euler_fast, u_fast, SeqName};
use crate::sumeval::{binom_floor, weighted_sum, BinomTables, SumSpec};

use super::ast::{BinOp, Define, Expr, ExprKind};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul};

use super::compile::{compile_sum, Q};

type SeqTable = Rc<Vec<Residue>>;

/// Per-prime tables shared by every entry checked at that prime.
pub struct PrimeServices {
    p: u64,
    memoize: bool,
    tables: RefCell<HashMap<u32, Rc<BinomTables>>>,
    seqs: RefCell<HashMap<(SeqName, u32), SeqTable>>,
    special: RefCell<HashMap<(char, u64), u64>>,
    sums: RefCell<HashMap<(SumSpec, u32), Residue>>,
}

impl PrimeServices {
    pub fn new(p: u64) -> Self {
        Self::with_memoization(p, true)
    }

    /// With `memoize = false` every request recomputes from scratch.
    pub fn with_memoization(p: u64, memoize: bool) -> Self {
        PrimeServices {
            p,
            memoize,
            tables: RefCell::default(),
            seqs: RefCell::default(),
            special: RefCell::default(),
            sums: RefCell::default(),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    fn cached<K: std::hash::Hash + Eq + Clone, V: Clone>(
        &self,
        map: &RefCell<HashMap<K, V>>,
        key: K,
        make: impl FnOnce() -> Result<V, EvalError>,
    ) -> Result<V, EvalError> {
        if self.memoize {
            if let Some(v) = map.borrow().get(&key) {
                return Ok(v.clone());
            }
        }
        let v = make()?;
        if self.memoize {
            map.borrow_mut().insert(key, v.clone());
        }
        Ok(v)
    }

    pub fn tables(&self, m: Modulus) -> Result<Rc<BinomTables>, EvalError> {
        self.cached(&self.tables, m.e(), || Ok(Rc::new(BinomTables::build(m))))
    }

    pub fn sequence(&self, seq: SeqName, m: Modulus) -> Result<Rc<Vec<Residue>>, EvalError> {
        self.cached(&self.seqs, (seq, m.e()), || Ok(Rc::new(apery_like_recurrence(seq, m, m.p())?)))
    }

    /// `B_n`, `E_n` or `U_n` modulo `p`.
    pub fn special(&self, which: char, n: u64) -> Result<u64, EvalError> {
        let p = self.p;
        self.cached(&self.special, (which, n), || {
            let r = match which {
                'B' => bernoulli_fast(n, p)?,
                'E' => euler_fast(n, p)?,
                _ => u_fast(n, p)?,
            };
            Ok(r.value())
        })
    }

    pub fn sum(&self, spec: &SumSpec, m: Modulus) -> Result<Residue, EvalError> {
        self.cached(&self.sums, (spec.clone(), m.e()), || {
            let seq = match spec.seq {
                Some(s) => Some(self.sequence(s, m)?),
                None => None,
            };
            let tables =
                if spec.binoms.iter().any(|&e| e > 0) { self.tables(m)? } else { Rc::new(BinomTables::empty(m)) };
            weighted_sum(spec, &tables, seq.as_deref().map(|v| v.as_slice()))
        })
    }
}

/// An intermediate value: an exact rational, or a residue modulo `p^e`
/// that is only known modulo `p^prec`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Exact(Q),
    Approx { r: Residue, prec: u32 },
}

const MAX_DEPTH: u32 = 64;

/// Evaluates expressions for one prime, one modulus and one representation.
pub struct Evaluator<'a> {
    services: &'a PrimeServices,
    m: Modulus,
    rep: Option<QuadRep>,
    defines: HashMap<&'a str, &'a Expr>,
    cache: RefCell<HashMap<&'a str, Value>>,
    depth: Cell<u32>,
}

fn overflow(what: &str) -> EvalError {
    EvalError::Overflow(what.to_string())
}

impl<'a> Evaluator<'a> {
    pub fn new(
        services: &'a PrimeServices,
        m: Modulus,
        rep: Option<QuadRep>,
        defines: impl IntoIterator<Item = &'a Define>,
    ) -> Self {
        Evaluator {
            services,
            m,
            rep,
            defines: defines.into_iter().map(|d| (d.name.as_str(), &d.expr)).collect(),
            cache: RefCell::default(),
            depth: Cell::new(0),
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.m
    }

    /// The value of `e` modulo `p^e`, failing if it is not known that finely.
    pub fn residue(&self, e: &Expr) -> Result<Residue, EvalError> {
        let (r, prec) = self.approx(self.value(e)?)?;
        if prec < self.m.e() {
            return Err(EvalError::InsufficientPrecision { have: prec, need: self.m.e() });
        }
        Ok(r)
    }

    fn approx(&self, v: Value) -> Result<(Residue, u32), EvalError> {
        match v {
            Value::Approx { r, prec } => Ok((r, prec)),
            Value::Exact(q) => Ok((Residue::from_rational(*q.numer(), *q.denom(), self.m)?, self.m.e())),
        }
    }

    /// Lower bound for the valuation of a residue known modulo `p^prec`.
    fn val_bound(&self, r: Residue, prec: u32) -> u32 {
        let known = r.value() % self.m.p_pow(prec);
        if known == 0 {
            prec
        } else {
            Residue::new(known, self.m).valuation().unwrap_or(prec).min(prec)
        }
    }

    fn int_arg(&self, v: &Value, what: &str) -> Result<i128, EvalError> {
        match v {
            Value::Exact(q) if q.is_integer() => Ok(q.to_integer()),
            Value::Exact(q) => Err(EvalError::NonIntegral { what: format!("{what} = {q}") }),
            Value::Approx { .. } => Err(EvalError::NonIntegral { what: format!("{what} (known only modulo p^e)") }),
        }
    }

    pub fn value(&self, e: &Expr) -> Result<Value, EvalError> {
        match &e.kind {
            ExprKind::Int(n) => Ok(Value::Exact(Q::from_integer(*n))),
            ExprKind::Var(v) => self.var(v),
            ExprKind::Neg(a) => self.neg(self.value(a)?),
            ExprKind::Binary(op, a, b) => {
                let (x, y) = (self.value(a)?, self.value(b)?);
                match op {
                    BinOp::Add => self.add(x, y),
                    BinOp::Sub => {
                        let y = self.neg(y)?;
                        self.add(x, y)
                    }
                    BinOp::Mul => self.mul(x, y),
                    BinOp::Div => self.div(x, y),
                    BinOp::Pow => self.pow(x, y),
                }
            }
            ExprKind::Call(f, args) => self.call(f, args),
            ExprKind::Sum { var, lo, hi, body } => {
                let compiled = compile_sum(var, lo, hi, body).map_err(|c| EvalError::Unsupported(c.message))?;
                let mut acc = Value::Exact(Q::from_integer(0));
                for (c, spec) in &compiled.terms {
                    let s = self.services.sum(spec, self.m)?;
                    let term = self.mul(Value::Exact(*c), Value::Approx { r: s, prec: self.m.e() })?;
                    acc = self.add(acc, term)?;
                }
                Ok(acc)
            }
        }
    }

    fn var(&self, v: &str) -> Result<Value, EvalError> {
        match v {
            "p" => Ok(Value::Exact(Q::from_integer(self.m.p() as i128))),
            "x" | "y" => {
                let rep = self.rep.ok_or(EvalError::MissingRepresentation)?;
                let n = if v == "x" { rep.x } else { rep.y };
                Ok(Value::Exact(Q::from_integer(n as i128)))
            }
            name => {
                if let Some(val) = self.cache.borrow().get(name) {
                    return Ok(val.clone());
                }
                let (key, expr) =
                    self.defines.get_key_value(name).ok_or_else(|| EvalError::Unbound(name.to_string()))?;
                if self.depth.get() >= MAX_DEPTH {
                    return Err(EvalError::Unsupported(format!("definition of `{name}` nests too deeply")));
                }
                self.depth.set(self.depth.get() + 1);
                let out = self.value(expr);
                self.depth.set(self.depth.get() - 1);
                let out = out?;
                self.cache.borrow_mut().insert(key, out.clone());
                Ok(out)
            }
        }
    }

    fn neg(&self, x: Value) -> Result<Value, EvalError> {
        Ok(match x {
            Value::Exact(q) => Value::Exact(-q),
            Value::Approx { r, prec } => Value::Approx { r: -r, prec },
        })
    }

    fn add(&self, x: Value, y: Value) -> Result<Value, EvalError> {
        if let (Value::Exact(a), Value::Exact(b)) = (&x, &y) {
            if let Some(s) = a.checked_add(b) {
                return Ok(Value::Exact(s));
            }
        }
        let (a, pa) = self.approx(x)?;
        let (b, pb) = self.approx(y)?;
        Ok(Value::Approx { r: a + b, prec: pa.min(pb) })
    }

    fn mul(&self, x: Value, y: Value) -> Result<Value, EvalError> {
        if let (Value::Exact(a), Value::Exact(b)) = (&x, &y) {
            if let Some(s) = a.checked_mul(b) {
                return Ok(Value::Exact(s));
            }
        }
        let x_exact = matches!(x, Value::Exact(_));
        let y_exact = matches!(y, Value::Exact(_));
        let (a, pa) = self.approx(x)?;
        let (b, pb) = self.approx(y)?;
        let e = self.m.e();
        let (va, vb) = (self.val_bound(a, pa), self.val_bound(b, pb));
        // An exact factor contributes no error of its own.
        let from_a = if x_exact { e } else { pa + vb };
        let from_b = if y_exact { e } else { pb + va };
        Ok(Value::Approx { r: a * b, prec: e.min(from_a).min(from_b) })
    }

    fn div(&self, x: Value, y: Value) -> Result<Value, EvalError> {
        if let (Value::Exact(a), Value::Exact(b)) = (&x, &y) {
            if *b == Q::from_integer(0) {
                return Err(ArithError::DivideByZero.into());
            }
            if let Some(s) = a.checked_div(b) {
                if s.denom() % self.m.p() as i128 == 0 {
                    return Err(ArithError::DenominatorNotUnit { den: *s.denom(), p: self.m.p() }.into());
                }
                return Ok(Value::Exact(s));
            }
        }
        if let Value::Exact(q) = &y {
            return self.div_exact(x, *q);
        }
        let (b, pb) = self.approx(y)?;
        let vb = self.val_bound(b, pb);
        if vb == 0 {
            let inv = b.inv()?;
            return self.mul(x, Value::Approx { r: inv, prec: pb });
        }
        if vb >= pb {
            return Err(ArithError::NotUnit { value: b.value(), p: self.m.p() }.into());
        }
        // Cancel p^vb from both sides.
        let (a, pa) = self.approx(x)?;
        let va = self.val_bound(a, pa);
        if va < vb {
            return Err(ArithError::NegativeValuation { v: va as i64 - vb as i64 }.into());
        }
        let scale = self.m.p_pow(vb);
        let a2 = Residue::new(a.value() / scale, self.m);
        let ub = Residue::new(b.value() / scale, self.m).inv()?;
        let pa2 = pa - vb;
        let pb2 = pb - vb;
        let va2 = self.val_bound(a2, pa2);
        Ok(Value::Approx { r: a2 * ub, prec: pa2.min(pb2 + va2) })
    }

    /// `x / q` for a nonzero rational `q`, cancelling the exact power of `p` in `q`.
    fn div_exact(&self, x: Value, q: Q) -> Result<Value, EvalError> {
        let p = self.m.p() as i128;
        if q == Q::from_integer(0) {
            return Err(ArithError::DivideByZero.into());
        }
        let (mut n, d) = (*q.numer(), *q.denom());
        let mut vn = 0u32;
        while n % p == 0 {
            n /= p;
            vn += 1;
        }
        let x = self.mul(x, Value::Exact(Q::new(d, n)))?;
        if vn == 0 {
            return Ok(x);
        }
        let (a, pa) = self.approx(x)?;
        let va = self.val_bound(a, pa);
        if va < vn {
            return Err(ArithError::NegativeValuation { v: va as i64 - vn as i64 }.into());
        }
        let a2 = Residue::new(a.value() / self.m.p_pow(vn), self.m);
        Ok(Value::Approx { r: a2, prec: pa - vn })
    }

    fn pow(&self, x: Value, y: Value) -> Result<Value, EvalError> {
        let n = self.int_arg(&y, "exponent")?;
        if let Value::Exact(q) = &x {
            if let Some(v) = exact_pow(*q, n) {
                return Ok(Value::Exact(v));
            }
            if *q == Q::from_integer(0) && n < 0 {
                return Err(ArithError::DivideByZero.into());
            }
        }
        let n = i64::try_from(n).map_err(|_| overflow("a power"))?;
        let exact = matches!(x, Value::Exact(_));
        let (a, pa) = self.approx(x)?;
        let e = self.m.e();
        let va = self.val_bound(a, pa);
        if n < 0 {
            if va > 0 {
                return Err(ArithError::NotUnit { value: a.value(), p: self.m.p() }.into());
            }
            return Ok(Value::Approx { r: a.pow(n)?, prec: if exact { e } else { pa } });
        }
        if n == 0 {
            return Ok(Value::Exact(Q::from_integer(1)));
        }
        let prec = if exact { e } else { e.min(pa + (n as u32 - 1).saturating_mul(va)) };
        Ok(Value::Approx { r: a.pow(n)?, prec })
    }

    fn call(&self, f: &str, args: &[Expr]) -> Result<Value, EvalError> {
        let vals: Vec<Value> = args.iter().map(|a| self.value(a)).collect::<Result<_, _>>()?;
        let p = self.m.p();
        match f {
            "binom" => {
                let n = self.int_arg(&vals[0], "binomial top")?;
                let r = self.int_arg(&vals[1], "binomial bottom")?;
                let n = i64::try_from(n).map_err(|_| overflow("a binomial"))?;
                let r = i64::try_from(r).map_err(|_| overflow("a binomial"))?;
                Ok(Value::Approx { r: binom_floor(n, r, self.m)?, prec: self.m.e() })
            }
            "floor" => match &vals[0] {
                Value::Exact(q) => Ok(Value::Exact(Q::from_integer(q.floor().to_integer()))),
                Value::Approx { .. } => Err(EvalError::NonIntegral { what: "argument of floor".into() }),
            },
            "legendre" => {
                let a = self.int_arg(&vals[0], "Legendre numerator")?;
                let q = self.int_arg(&vals[1], "Legendre modulus")?;
                if q <= 2 || !(q as u128 <= u64::MAX as u128 && is_prime(q as u64)) {
                    return Err(EvalError::Unsupported(format!("Legendre symbol modulo {q}")));
                }
                let a = a.rem_euclid(q) as i64;
                Ok(Value::Exact(Q::from_integer(legendre(a, q as u64) as i128)))
            }
            "B" | "E" | "U" => {
                let n = self.int_arg(&vals[0], "index")?;
                let n = u64::try_from(n).map_err(|_| EvalError::OutOfRange { index: n as i64, limit: 0 })?;
                let v = self.services.special(f.chars().next().unwrap(), n)?;
                Ok(Value::Approx { r: Residue::new(v, self.m), prec: 1 })
            }
            "harmonic" => {
                let n = self.int_arg(&vals[0], "harmonic index")?;
                if n < 0 || n >= p as i128 {
                    return Err(EvalError::OutOfRange { index: n as i64, limit: p as i64 - 1 });
                }
                let mut s = Residue::zero(self.m);
                for k in 1..=n {
                    s += Residue::from_int(k, self.m).inv()?;
                }
                Ok(Value::Approx { r: s, prec: self.m.e() })
            }
            other => Err(EvalError::Unbound(other.to_string())),
        }
    }
}

fn exact_pow(q: Q, n: i128) -> Option<Q> {
    if n < 0 {
        if q == Q::from_integer(0) {
            return None;
        }
        return exact_pow(q.recip(), n.checked_neg()?);
    }
    let mut acc = Q::from_integer(1);
    let mut base = q;
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            acc = acc.checked_mul(&base)?;
        }
        n >>= 1;
        if n > 0 {
            base = base.checked_mul(&base)?;
        }
    }
    Some(acc)
}
