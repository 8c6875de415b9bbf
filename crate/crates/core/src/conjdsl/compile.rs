use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub};

use crate::seqgen::SeqName;
use crate::sumeval::{Denom, Family, SumSpec, Upper};

use super::ast::{BinOp, Expr, ExprKind, Span};

pub type Q = Ratio<i128>;

/// A sum as a rational combination of [`SumSpec`]s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledSum {
    pub terms: Vec<(Q, SumSpec)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileError {
    pub span: Span,
    pub message: String,
}

type CResult<T> = Result<T, CompileError>;

fn err<T>(span: Span, message: impl Into<String>) -> CResult<T> {
    Err(CompileError { span, message: message.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Shape {
    binoms: [u32; 4],
    seq: Option<SeqName>,
    base: i64,
    denom: (u8, u32),
}

const UNIT: Shape = Shape { binoms: [0; 4], seq: None, base: 1, denom: (0, 0) };

fn denom_of(d: (u8, u32)) -> Denom {
    match d {
        (1, j) => Denom::KPlusOne(j),
        (2, j) => Denom::TwoKMinusOne(j),
        _ => Denom::None,
    }
}

#[derive(Debug, Clone)]
struct Mono {
    poly: Vec<Q>,
    shape: Shape,
}

fn poly_mul(a: &[Q], b: &[Q], span: Span) -> CResult<Vec<Q>> {
    let mut out = vec![Q::from_integer(0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let t = x.checked_mul(y).and_then(|t| out[i + j].checked_add(&t));
            match t {
                Some(t) => out[i + j] = t,
                None => return err(span, "coefficient overflow in sum term"),
            }
        }
    }
    Ok(out)
}

fn trim(mut v: Vec<Q>) -> Vec<Q> {
    while v.len() > 1 && *v.last().unwrap() == Q::from_integer(0) {
        v.pop();
    }
    v
}

fn combine(a: Shape, b: Shape, span: Span) -> CResult<Shape> {
    let mut binoms = a.binoms;
    for (x, y) in binoms.iter_mut().zip(b.binoms) {
        *x += y;
    }
    let seq = match (a.seq, b.seq) {
        (Some(_), Some(_)) => return err(span, "a sum term may contain at most one sequence factor"),
        (s, None) | (None, s) => s,
    };
    let Some(base) = a.base.checked_mul(b.base) else {
        return err(span, "sum base overflows");
    };
    let denom = match (a.denom, b.denom) {
        ((0, _), d) | (d, (0, _)) => d,
        ((x, i), (y, j)) if x == y => (x, i + j),
        _ => return err(span, "a sum term may contain only one kind of linear denominator"),
    };
    Ok(Shape { binoms, seq, base, denom })
}

/// Exact value of a constant expression at `p` (if given).
pub fn const_eval(e: &Expr, p: Option<i128>) -> Option<Q> {
    match &e.kind {
        ExprKind::Int(n) => Some(Q::from_integer(*n)),
        ExprKind::Var(v) if v == "p" => p.map(Q::from_integer),
        ExprKind::Var(_) | ExprKind::Sum { .. } => None,
        ExprKind::Neg(a) => const_eval(a, p).map(|x| -x),
        ExprKind::Binary(op, a, b) => {
            let (x, y) = (const_eval(a, p)?, const_eval(b, p)?);
            match op {
                BinOp::Add => x.checked_add(&y),
                BinOp::Sub => x.checked_sub(&y),
                BinOp::Mul => x.checked_mul(&y),
                BinOp::Div => (y != Q::from_integer(0)).then(|| x.checked_div(&y)).flatten(),
                BinOp::Pow => {
                    if !y.is_integer() || y.to_integer().abs() > 64 {
                        return None;
                    }
                    let n = y.to_integer() as i32;
                    if n < 0 && x == Q::from_integer(0) {
                        return None;
                    }
                    let mut acc = Q::from_integer(1);
                    for _ in 0..n.unsigned_abs() {
                        acc = acc.checked_mul(&x)?;
                    }
                    Some(if n < 0 { acc.recip() } else { acc })
                }
            }
        }
        ExprKind::Call(f, args) if f == "floor" && args.len() == 1 => {
            const_eval(&args[0], p).map(|x| Q::from_integer(x.floor().to_integer()))
        }
        ExprKind::Call(..) => None,
    }
}

const PROBE: [i128; 2] = [1009, 1013];

fn classify_upper(hi: &Expr) -> CResult<Upper> {
    let vals: Option<Vec<Q>> = PROBE.iter().map(|&p| const_eval(hi, Some(p))).collect();
    let Some(vals) = vals else {
        return err(hi.span, "upper summation limit must be p-1 or (p-1)/2");
    };
    if vals.iter().zip(PROBE).all(|(v, p)| *v == Q::from_integer(p - 1)) {
        Ok(Upper::Full)
    } else if vals.iter().zip(PROBE).all(|(v, p)| *v == Q::from_integer((p - 1) / 2)) {
        Ok(Upper::Half)
    } else {
        err(hi.span, "upper summation limit must be p-1 or (p-1)/2")
    }
}

struct Compiler<'a> {
    var: &'a str,
}

impl Compiler<'_> {
    fn mentions_var(&self, e: &Expr) -> bool {
        let mut found = false;
        e.walk(&mut |x| found |= matches!(&x.kind, ExprKind::Var(v) if v == self.var));
        found
    }

    fn constant(&self, e: &Expr) -> Option<Q> {
        const_eval(e, None)
    }

    fn body(&self, e: &Expr) -> CResult<Vec<Mono>> {
        let one = |poly: Vec<Q>, shape: Shape| Ok(vec![Mono { poly, shape }]);
        match &e.kind {
            ExprKind::Int(n) => one(vec![Q::from_integer(*n)], UNIT),
            ExprKind::Var(v) if v == self.var => one(vec![Q::from_integer(0), Q::from_integer(1)], UNIT),
            ExprKind::Var(v) => match Family::from_ident(v) {
                Some(f) => {
                    let mut s = UNIT;
                    s.binoms[f.index()] = 1;
                    one(vec![Q::from_integer(1)], s)
                }
                None => err(e.span, format!("`{v}` cannot appear inside a sum term")),
            },
            ExprKind::Call(f, args) if f == "seq" => {
                let name = match args.as_slice() {
                    [Expr { kind: ExprKind::Var(n), .. }] => n,
                    _ => return err(e.span, "seq expects one sequence name"),
                };
                let Ok(seq) = name.parse::<SeqName>() else {
                    return err(args[0].span, format!("unknown sequence `{name}`"));
                };
                one(vec![Q::from_integer(1)], Shape { seq: Some(seq), ..UNIT })
            }
            ExprKind::Call(f, _) => err(e.span, format!("`{f}` cannot appear inside a sum term")),
            ExprKind::Sum { .. } => err(e.span, "nested sums are not supported"),
            ExprKind::Neg(a) => Ok(self
                .body(a)?
                .into_iter()
                .map(|m| Mono { poly: m.poly.into_iter().map(|c| -c).collect(), shape: m.shape })
                .collect()),
            ExprKind::Binary(BinOp::Add, a, b) => {
                let mut v = self.body(a)?;
                v.extend(self.body(b)?);
                Ok(v)
            }
            ExprKind::Binary(BinOp::Sub, a, b) => {
                let mut v = self.body(a)?;
                v.extend(self.body(&Expr::new(ExprKind::Neg(b.clone()), b.span))?);
                Ok(v)
            }
            ExprKind::Binary(BinOp::Mul, a, b) => self.product(&self.body(a)?, &self.body(b)?, e.span),
            ExprKind::Binary(BinOp::Div, a, b) => {
                let (c, shape) = self.divisor(b)?;
                let num = self.body(a)?;
                num.into_iter()
                    .map(|m| {
                        let poly = m.poly.into_iter().map(|x| x / c).collect();
                        Ok(Mono { poly, shape: combine(m.shape, shape, e.span)? })
                    })
                    .collect()
            }
            ExprKind::Binary(BinOp::Pow, a, b) => {
                if self.mentions_var(b) {
                    let step = self.linear_step(b)?;
                    match self.constant(a) {
                        Some(m) if m == Q::from_integer(1) => one(vec![Q::from_integer(1)], UNIT),
                        Some(m) if m == Q::from_integer(-1) => {
                            let base = if step % 2 == 0 { 1 } else { -1 };
                            one(vec![Q::from_integer(1)], Shape { base, ..UNIT })
                        }
                        _ => err(e.span, "only (-1)^k powers may appear in a sum numerator; divide by base^k instead"),
                    }
                } else {
                    let j = self.small_exponent(b)?;
                    let base = self.body(a)?;
                    let mut acc = vec![Mono { poly: vec![Q::from_integer(1)], shape: UNIT }];
                    for _ in 0..j {
                        acc = self.product(&acc, &base, e.span)?;
                    }
                    Ok(acc)
                }
            }
        }
    }

    fn product(&self, a: &[Mono], b: &[Mono], span: Span) -> CResult<Vec<Mono>> {
        let mut out = Vec::with_capacity(a.len() * b.len());
        for x in a {
            for y in b {
                out.push(Mono { poly: poly_mul(&x.poly, &y.poly, span)?, shape: combine(x.shape, y.shape, span)? });
            }
        }
        Ok(out)
    }

    fn small_exponent(&self, b: &Expr) -> CResult<u32> {
        match self.constant(b) {
            Some(q) if q.is_integer() && (0..=16).contains(&q.to_integer()) => Ok(q.to_integer() as u32),
            _ => err(b.span, "exponent in a sum term must be an integer in 0..=16"),
        }
    }

    /// `c` for an exponent of the form `c*k`, `c >= 1`.
    fn linear_step(&self, b: &Expr) -> CResult<i64> {
        let monos = self.body(b)?;
        if let [Mono { poly, shape }] = monos.as_slice() {
            let poly = trim(poly.clone());
            if *shape == UNIT && poly.len() == 2 && poly[0] == Q::from_integer(0) && poly[1].is_integer() {
                let c = poly[1].to_integer();
                if (1..=64).contains(&c) {
                    return Ok(c as i64);
                }
            }
        }
        err(b.span, "exponent must have the form c*k with c >= 1")
    }

    /// Linear factor kind: 1 for `k+1`, 2 for `2k-1`.
    fn linear_factor(&self, e: &Expr) -> Option<u8> {
        let monos = self.body(e).ok()?;
        let mut total = vec![Q::from_integer(0)];
        for m in monos {
            if m.shape != UNIT {
                return None;
            }
            let len = total.len().max(m.poly.len());
            total.resize(len, Q::from_integer(0));
            for (i, c) in m.poly.into_iter().enumerate() {
                total[i] += c;
            }
        }
        let total = trim(total);
        let q = |n| Q::from_integer(n);
        if total == [q(1), q(1)] {
            Some(1)
        } else if total == [q(-1), q(2)] {
            Some(2)
        } else {
            None
        }
    }

    /// Divisor as a constant times a shape factor.
    fn divisor(&self, e: &Expr) -> CResult<(Q, Shape)> {
        if let Some(c) = self.constant(e) {
            if c == Q::from_integer(0) {
                return err(e.span, "division by zero");
            }
            return Ok((c, UNIT));
        }
        match &e.kind {
            ExprKind::Binary(BinOp::Mul, a, b) => {
                let (c1, s1) = self.divisor(a)?;
                let (c2, s2) = self.divisor(b)?;
                Ok((c1 * c2, combine(s1, s2, e.span)?))
            }
            ExprKind::Neg(a) => {
                let (c, s) = self.divisor(a)?;
                Ok((-c, s))
            }
            ExprKind::Binary(BinOp::Pow, a, b) if self.mentions_var(b) => {
                let step = self.linear_step(b)?;
                let Some(m) = self.constant(a).filter(|m| m.is_integer() && *m != Q::from_integer(0)) else {
                    return err(a.span, "base of a k-th power must be a nonzero integer");
                };
                let mut base: i64 = 1;
                for _ in 0..step {
                    base = match i64::try_from(m.to_integer()).ok().and_then(|m| base.checked_mul(m)) {
                        Some(b) => b,
                        None => return err(e.span, "sum base overflows"),
                    };
                }
                Ok((Q::from_integer(1), Shape { base, ..UNIT }))
            }
            ExprKind::Binary(BinOp::Pow, a, b) => {
                let j = self.small_exponent(b)?;
                match self.linear_factor(a) {
                    Some(kind) if j > 0 => Ok((Q::from_integer(1), Shape { denom: (kind, j), ..UNIT })),
                    _ => err(e.span, "unsupported divisor in sum term"),
                }
            }
            _ => match self.linear_factor(e) {
                Some(kind) => Ok((Q::from_integer(1), Shape { denom: (kind, 1), ..UNIT })),
                None => {
                    err(e.span, "unsupported divisor in sum term; allowed are constants, m^(c*k), (k+1)^j, (2k-1)^j")
                }
            },
        }
    }
}

/// Lower `sum(var, lo, hi, body)` to a combination of [`SumSpec`]s.
pub fn compile_sum(var: &str, lo: &Expr, hi: &Expr, body: &Expr) -> CResult<CompiledSum> {
    let lo_ok = PROBE.iter().all(|&p| const_eval(lo, Some(p)) == Some(Q::from_integer(0)));
    if !lo_ok {
        return err(lo.span, "lower summation limit must be 0");
    }
    let upper = classify_upper(hi)?;
    let c = Compiler { var };
    let monos = c.body(body)?;

    let mut grouped: BTreeMap<Shape, Vec<Q>> = BTreeMap::new();
    for m in monos {
        let acc = grouped.entry(m.shape).or_insert_with(|| vec![Q::from_integer(0)]);
        if acc.len() < m.poly.len() {
            acc.resize(m.poly.len(), Q::from_integer(0));
        }
        for (i, x) in m.poly.into_iter().enumerate() {
            acc[i] += x;
        }
    }

    let mut terms = Vec::new();
    for (shape, poly) in grouped {
        let poly = trim(poly);
        if poly.iter().all(|c| *c == Q::from_integer(0)) {
            continue;
        }
        if shape.seq.is_some() && (shape.binoms.iter().any(|&e| e > 0) || shape.denom.0 != 0) {
            return err(body.span, "a sequence factor cannot be combined with binomials or denominators");
        }
        let l = poly.iter().fold(1i128, |acc, c| acc.lcm(c.denom()));
        let weight: Option<Vec<i64>> =
            poly.iter().map(|c| i64::try_from((c * Q::from_integer(l)).to_integer()).ok()).collect();
        let Some(weight) = weight else {
            return err(body.span, "weight coefficient overflows");
        };
        let spec = SumSpec {
            weight,
            base: shape.base,
            binoms: shape.binoms,
            seq: shape.seq,
            denom: denom_of(shape.denom),
            upper,
        };
        terms.push((Q::new(1, l), spec));
    }
    Ok(CompiledSum { terms })
}
