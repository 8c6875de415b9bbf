use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::modring::Modulus;
use crate::ntbase::{check_condition, represent_form};

use super::ast::{Case, ConjectureSpec, Define};
use super::eval::{Evaluator, PrimeServices};

/// Result of checking one case at one prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail { lhs: u64, rhs: u64, modulus: u64 },
    Skipped { reason: String },
    Error { kind: String, message: String },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail { .. } => "fail",
            Outcome::Skipped { .. } => "skipped",
            Outcome::Error { .. } => "error",
        }
    }

    fn from_error(e: &EvalError) -> Outcome {
        if e.is_skip() {
            Outcome::Skipped { reason: e.kind().to_string() }
        } else {
            Outcome::Error { kind: e.kind().to_string(), message: e.to_string() }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub id: String,
    pub case: usize,
    pub prime: u64,
    /// Exponent of the comparison modulus actually used.
    pub exponent: u32,
    #[serde(flatten)]
    pub outcome: Outcome,
}

/// Options for [`check_conjecture`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Compare modulo `p^min(e, cap)`.
    pub exponent_cap: Option<u32>,
    /// Evaluate entries tagged `unsupported` instead of skipping them.
    pub include_unsupported: bool,
}

fn check_case(
    spec: &ConjectureSpec,
    case: &Case,
    p: u64,
    e: u32,
    services: &PrimeServices,
    globals: &[Define],
) -> Outcome {
    let run = || -> Result<Outcome, EvalError> {
        let m = Modulus::new(p, e)?;
        let rep = match case.rep {
            Some(r) => Some(represent_form(r.t, r.alpha, r.beta, p)?),
            None => None,
        };
        let ev = Evaluator::new(services, m, rep, globals.iter().chain(&spec.defines));
        let lhs = ev.residue(&case.lhs)?;
        let rhs = ev.residue(&case.rhs)?;
        Ok(if lhs == rhs {
            Outcome::Pass
        } else {
            Outcome::Fail { lhs: lhs.value(), rhs: rhs.value(), modulus: m.pe() }
        })
    };
    run().unwrap_or_else(|err| Outcome::from_error(&err))
}

/// One record per case whose guard holds at `p`.
pub fn check_conjecture(
    spec: &ConjectureSpec,
    p: u64,
    services: &PrimeServices,
    globals: &[Define],
    opts: CheckOptions,
) -> Vec<VerificationRecord> {
    let excluded = spec.exclusions.contains(&p);
    let unsupported = spec.has_tag("unsupported") && !opts.include_unsupported;
    let mut out = Vec::new();
    for (i, case) in spec.cases.iter().enumerate() {
        let exponent = opts.exponent_cap.map_or(case.exponent, |c| case.exponent.min(c.max(1)));
        let outcome = if excluded {
            Outcome::Skipped { reason: "excluded".into() }
        } else if !check_condition(&case.cond, p) {
            continue;
        } else if unsupported {
            Outcome::Skipped { reason: "unsupported".into() }
        } else {
            check_case(spec, case, p, exponent, services, globals)
        };
        out.push(VerificationRecord { id: spec.id.clone(), case: i, prime: p, exponent, outcome });
    }
    out
}
