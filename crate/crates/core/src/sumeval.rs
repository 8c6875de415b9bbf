//! Binomial tables with p-adic valuation tracking and the weighted-sum
//! evaluator behind every left-hand side.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::modring::{Modulus, Residue, ValUnit};
use crate::seqgen::{apery_like_recurrence, SeqName};

/// The four central-type binomial families `C(a k, b k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// `C(2k, k)`
    Two,
    /// `C(3k, k)`
    Three,
    /// `C(4k, 2k)`
    Four,
    /// `C(6k, 3k)`
    Six,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Two, Family::Three, Family::Four, Family::Six];

    /// `(a, b)` with the family being `C(a k, b k)`.
    pub fn shape(&self) -> (i128, i128) {
        match self {
            Family::Two => (2, 1),
            Family::Three => (3, 1),
            Family::Four => (4, 2),
            Family::Six => (6, 3),
        }
    }

    pub fn index(&self) -> usize {
        match self {
            Family::Two => 0,
            Family::Three => 1,
            Family::Four => 2,
            Family::Six => 3,
        }
    }

    /// Identifier used inside sum terms.
    pub fn ident(&self) -> &'static str {
        match self {
            Family::Two => "binom2k",
            Family::Three => "binom3k",
            Family::Four => "binom4k",
            Family::Six => "binom6k",
        }
    }

    pub fn from_ident(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.ident() == s)
    }
}

/// `C(2k,k)`, `C(3k,k)`, `C(4k,2k)`, `C(6k,3k)` for `0 <= k < p`, as scaled values mod `p^e`.
#[derive(Debug, Clone)]
pub struct BinomTables {
    m: Modulus,
    rows: [Vec<ValUnit>; 4],
}

impl BinomTables {
    /// Built by the ratio `C(a(k+1), b(k+1)) / C(ak, bk)`, a quotient of
    /// products of integers below `6p`, each factored through [`ValUnit::from_int`].
    pub fn build(m: Modulus) -> Self {
        let p = m.p() as usize;
        let rows = Family::ALL.map(|fam| {
            let (a, b) = fam.shape();
            let c = a - b;
            let mut row = Vec::with_capacity(p);
            let mut cur = ValUnit::one(m);
            row.push(cur);
            for k in 0..(p as i128 - 1) {
                let mut num = ValUnit::one(m);
                for i in 1..=a {
                    num = num.try_mul(ValUnit::from_int(a * k + i, m)).expect("same modulus");
                }
                let mut den = ValUnit::one(m);
                for i in 1..=b {
                    den = den.try_mul(ValUnit::from_int(b * k + i, m)).expect("same modulus");
                }
                for i in 1..=c {
                    den = den.try_mul(ValUnit::from_int(c * k + i, m)).expect("same modulus");
                }
                cur = cur.try_mul(num).and_then(|x| x.try_div(den)).expect("binomials are integers");
                row.push(cur);
            }
            row
        });
        BinomTables { m, rows }
    }

    /// Tables with no rows, for sums without binomial factors.
    pub fn empty(m: Modulus) -> Self {
        BinomTables { m, rows: [vec![], vec![], vec![], vec![]] }
    }

    pub fn modulus(&self) -> Modulus {
        self.m
    }

    pub fn get(&self, fam: Family, k: usize) -> ValUnit {
        self.rows[fam.index()][k]
    }
}

/// `C(n, r) mod p^e` for `0 <= n < p` via `prod (n-r+i)/i`.
pub fn binom_floor(n: i64, r: i64, m: Modulus) -> Result<Residue, EvalError> {
    if n < 0 || n as u64 >= m.p() {
        return Err(EvalError::OutOfRange { index: n, limit: m.p() as i64 - 1 });
    }
    if r < 0 || r > n {
        return Ok(Residue::zero(m));
    }
    let r = r.min(n - r);
    let mut num = Residue::one(m);
    let mut den = Residue::one(m);
    for i in 1..=r {
        num *= Residue::from_int((n - r + i) as i128, m);
        den *= Residue::from_int(i as i128, m);
    }
    Ok(num * den.inv()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Denom {
    None,
    /// `(k+1)^j`
    KPlusOne(u32),
    /// `(2k-1)^j`
    TwoKMinusOne(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Upper {
    /// `p - 1`
    Full,
    /// `(p - 1) / 2`
    Half,
}

impl Upper {
    pub fn limit(&self, p: u64) -> u64 {
        match self {
            Upper::Full => p - 1,
            Upper::Half => (p - 1) / 2,
        }
    }
}

/// `sum_{k=0}^{upper} weight(k) * F(k) / (base^k * denom(k))`, where `F` is a
/// product of binomial families or a single Apéry-like sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SumSpec {
    /// Coefficients of `k^0, k^1, ...`.
    pub weight: Vec<i64>,
    /// The term is divided by `base^k`.
    pub base: i64,
    /// Exponents of `C(2k,k)`, `C(3k,k)`, `C(4k,2k)`, `C(6k,3k)`.
    pub binoms: [u32; 4],
    pub seq: Option<SeqName>,
    pub denom: Denom,
    pub upper: Upper,
}

impl SumSpec {
    /// `sum_k binom2k^n2 / base^k` over the full range.
    pub fn binomial(binoms: [u32; 4], base: i64) -> Self {
        SumSpec { weight: vec![1], base, binoms, seq: None, denom: Denom::None, upper: Upper::Full }
    }

    pub fn with_weight(mut self, weight: Vec<i64>) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_denom(mut self, denom: Denom) -> Self {
        self.denom = denom;
        self
    }

    pub fn with_upper(mut self, upper: Upper) -> Self {
        self.upper = upper;
        self
    }

    pub fn sequence(seq: SeqName, base: i64) -> Self {
        SumSpec { weight: vec![1], base, binoms: [0; 4], seq: Some(seq), denom: Denom::None, upper: Upper::Full }
    }

    fn weight_at(&self, k: i128) -> i128 {
        self.weight.iter().rev().fold(0i128, |acc, c| acc * k + *c as i128)
    }
}

impl fmt::Display for SumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.weight.iter().map(|c| c.to_string()).collect();
        write!(f, "sum[w=({})", w.join(","))?;
        if let Some(s) = self.seq {
            write!(f, " {s}")?;
        }
        for fam in Family::ALL {
            let e = self.binoms[fam.index()];
            if e > 0 {
                write!(f, " {}^{e}", fam.ident())?;
            }
        }
        write!(f, " /{}^k {:?} {:?}]", self.base, self.denom, self.upper)
    }
}

/// Per-term residues of a weighted sum, in ascending `k`.
///
/// `seq_values` must hold the sequence modulo the same `p^e` when `spec`
/// names a sequence.
pub fn weighted_sum_terms(
    spec: &SumSpec,
    tables: &BinomTables,
    seq_values: Option<&[Residue]>,
) -> Result<Vec<Residue>, EvalError> {
    let m = tables.modulus();
    let p = m.p();
    if spec.base == 0 || (spec.base as i128).rem_euclid(p as i128) == 0 {
        return Err(EvalError::BaseDivisibleByP { base: spec.base.to_string(), p });
    }
    let limit = spec.upper.limit(p);
    let base_inv = Residue::from_int(spec.base as i128, m).inv()?;
    let mut scale = Residue::one(m);
    let mut out = Vec::with_capacity(limit as usize + 1);

    if let Some(seq) = spec.seq {
        if spec.denom != Denom::None || spec.binoms.iter().any(|&e| e > 0) {
            return Err(EvalError::Unsupported(format!(
                "sequence {seq} combined with binomial factors or denominators"
            )));
        }
        let values = seq_values.ok_or_else(|| EvalError::Unbound(seq.symbol().to_string()))?;
        for n in 0..=limit {
            let w = Residue::from_int(spec.weight_at(n as i128), m);
            out.push(w * values[n as usize] * scale);
            scale *= base_inv;
        }
        return Ok(out);
    }

    for k in 0..=limit {
        let mut num = ValUnit::from_int(spec.weight_at(k as i128), m);
        for fam in Family::ALL {
            let e = spec.binoms[fam.index()];
            if e > 0 {
                num = num.try_mul(tables.get(fam, k as usize).pow(e))?;
            }
        }
        num = num.try_mul(ValUnit::from_residue(scale))?;
        let term = match spec.denom {
            Denom::None => num,
            Denom::KPlusOne(j) => num.try_div(ValUnit::from_int(k as i128 + 1, m).pow(j))?,
            Denom::TwoKMinusOne(j) => num.try_div(ValUnit::from_int(2 * k as i128 - 1, m).pow(j))?,
        };
        out.push(term.to_residue());
        scale *= base_inv;
    }
    Ok(out)
}

pub fn weighted_sum(
    spec: &SumSpec,
    tables: &BinomTables,
    seq_values: Option<&[Residue]>,
) -> Result<Residue, EvalError> {
    let m = tables.modulus();
    Ok(weighted_sum_terms(spec, tables, seq_values)?.into_iter().fold(Residue::zero(m), |a, b| a + b))
}

/// `sum_{n=0}^{p-1} weight(n) u_n / base^n mod p^e`.
pub fn sequence_weighted_sum(seq: SeqName, weight: &[i64], base: i64, m: Modulus) -> Result<Residue, EvalError> {
    let values = apery_like_recurrence(seq, m, m.p())?;
    let spec = SumSpec::sequence(seq, base).with_weight(weight.to_vec());
    let tables = BinomTables::empty(m);
    weighted_sum(&spec, &tables, Some(&values))
}
