//! The conjecture language: parsing, printing, evaluation and the builtin registry.

pub mod ast;
pub mod check;
pub mod compile;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod registry;
pub mod semantic;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ast::{Case, ConjectureSpec, Define, Expr, SourceFile, Span, Status};
pub use check::{check_conjecture, CheckOptions, Outcome, VerificationRecord};
pub use eval::{Evaluator, PrimeServices, Value};
pub use printer::{print_expr, print_file, print_spec};
pub use registry::{builtin_registry, natural_cmp, Registry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Syntax,
    Semantic,
}

/// A located syntax or semantic error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ParseError {
    pub fn syntax(span: Span, message: impl Into<String>) -> Self {
        ParseError { kind: ErrorKind::Syntax, line: span.line, col: span.col, message: message.into() }
    }

    pub fn semantic(span: Span, message: impl Into<String>) -> Self {
        ParseError { kind: ErrorKind::Semantic, line: span.line, col: span.col, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Syntax => "syntax error",
            ErrorKind::Semantic => "semantic error",
        };
        write!(f, "{}:{}: {kind}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Parse and check `src`, with `external` defines in scope.
pub fn parse_with(src: &str, external: &[Define]) -> Result<SourceFile, ParseError> {
    let file = parser::parse_syntax(src)?;
    semantic::check_file(&file, external)?;
    Ok(file)
}

/// Parse and check `src` with the builtin shared defines (`R1`, `R2`, ...) in scope.
pub fn parse(src: &str) -> Result<SourceFile, ParseError> {
    parse_with(src, &builtin_registry().globals)
}

/// Parse with no external defines.
pub fn parse_standalone(src: &str) -> Result<SourceFile, ParseError> {
    parse_with(src, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntbase::PrimeCondition;

    const MINIMAL: &str = "conjecture \"t\" { exclude {2}; case p mod 4 in {1} with rep p = x^2 + 4*y^2: sum(k,0,p-1, binom2k^3 / 64^k) === 4*x^2 - 2*p - p^2/(4*x^2) (mod p^3); }";

    #[test]
    fn minimal_source() {
        let f = parse_standalone(MINIMAL).unwrap();
        assert_eq!(f.entries.len(), 1);
        let s = &f.entries[0];
        assert_eq!(s.id, "t");
        assert_eq!(s.exclusions, vec![2]);
        assert_eq!(s.cases.len(), 1);
        assert_eq!(s.cases[0].exponent, 3);
        assert_eq!(s.cases[0].cond, PrimeCondition::ModIn { modulus: 4, residues: vec![1] });
    }

    #[test]
    fn minimal_source_checks_out() {
        let f = parse_standalone(MINIMAL).unwrap();
        for p in [5u64, 13, 17, 29, 37, 41] {
            let s = PrimeServices::new(p);
            let recs = check_conjecture(&f.entries[0], p, &s, &[], CheckOptions::default());
            assert_eq!(recs.len(), 1);
            assert_eq!(recs[0].outcome, Outcome::Pass, "p = {p}");
        }
        let s = PrimeServices::new(7);
        assert!(check_conjecture(&f.entries[0], 7, &s, &[], CheckOptions::default()).is_empty());
    }

    #[test]
    fn semantic_errors() {
        let e = parse_standalone("conjecture \"t\" { case all: x === 1 (mod p); }").unwrap_err();
        assert_eq!(e.kind, ErrorKind::Semantic);
        assert_eq!((e.line, e.col), (1, 28));
        let e = parse_standalone("conjecture \"t\" { case all: 1 === 1 (mod p^6); }").unwrap_err();
        assert_eq!(e.kind, ErrorKind::Semantic);
        let e = parse_standalone("conjecture \"t\" { define A = x; case all: A === 1 (mod p); }").unwrap_err();
        assert!(e.message.contains("with rep"), "{e}");
        assert!(
            parse_standalone("conjecture \"t\" { define A = B; define B = A; case all: A === 1 (mod p); }").is_err()
        );
        assert!(parse_standalone("conjecture \"t\" { case all: frob(p) === 1 (mod p); }").is_err());
        assert!(parse_standalone("conjecture \"t\" { case all: binom(p) === 1 (mod p); }").is_err());
    }

    #[test]
    fn excluded_and_unmatched_primes() {
        let f = parse_standalone(
            "conjecture \"u\" { exclude {7}; case p mod 3 in {1}: 0 === 0 (mod p); case p mod 3 in {2}: 0 === 0 (mod p); }",
        )
        .unwrap();
        let s = PrimeServices::new(7);
        let recs = check_conjecture(&f.entries[0], 7, &s, &[], CheckOptions::default());
        assert_eq!(recs.len(), 2);
        assert!(recs.iter().all(|r| r.outcome == Outcome::Skipped { reason: "excluded".into() }));
        let g = parse_standalone("conjecture \"v\" { case p mod 3 in {1}: 0 === 0 (mod p); }").unwrap();
        let s = PrimeServices::new(5);
        assert!(check_conjecture(&g.entries[0], 5, &s, &[], CheckOptions::default()).is_empty());
    }

    #[test]
    fn failures_carry_residues() {
        let f = parse_standalone("conjecture \"w\" { case all: p + 1 === 1 (mod p^2); }").unwrap();
        let s = PrimeServices::new(5);
        let recs = check_conjecture(&f.entries[0], 5, &s, &[], CheckOptions::default());
        assert_eq!(recs[0].outcome, Outcome::Fail { lhs: 6, rhs: 1, modulus: 25 });
        let capped = CheckOptions { exponent_cap: Some(1), ..Default::default() };
        let recs = check_conjecture(&f.entries[0], 5, &s, &[], capped);
        assert_eq!(recs[0].outcome, Outcome::Pass);
        assert_eq!(recs[0].exponent, 1);
    }
}
