use thiserror::Error;

use crate::modring::ArithError;
use crate::ntbase::FormError;

/// Errors raised while evaluating sequences, sums and expressions for one prime.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("index {index} is out of range (limit {limit})")]
    OutOfRange { index: i64, limit: i64 },
    #[error("base {base} is divisible by {p}")]
    BaseDivisibleByP { base: String, p: u64 },
    #[error("x or y used without a bound representation")]
    MissingRepresentation,
    #[error("value is known modulo p^{have}, comparison needs p^{need}")]
    InsufficientPrecision { have: u32, need: u32 },
    #[error("{what} is not an integer")]
    NonIntegral { what: String },
    #[error("integer overflow while evaluating {0}")]
    Overflow(String),
    #[error("alternative formulas for {name} disagree at n = {n}")]
    FormulaMismatch { name: &'static str, n: u64 },
    #[error("unknown name `{0}`")]
    Unbound(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl EvalError {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            EvalError::Arith(a) => match a {
                ArithError::NotOddPrime { .. } => "not_odd_prime",
                ArithError::ExponentOutOfRange { .. } => "exponent_out_of_range",
                ArithError::ModulusTooLarge { .. } => "modulus_too_large",
                ArithError::ModulusMismatch { .. } => "modulus_mismatch",
                ArithError::NotUnit { .. } => "not_unit",
                ArithError::DenominatorNotUnit { .. } => "denominator_not_unit",
                ArithError::DivideByZero => "divide_by_zero",
                ArithError::NegativeValuation { .. } => "negative_valuation",
            },
            EvalError::Form(f) => match f {
                FormError::NotRepresentable { .. } => "not_representable",
                FormError::AmbiguousRepresentation { .. } => "ambiguous_representation",
                FormError::WitnessNotCoprime { .. } => "witness_not_coprime",
            },
            EvalError::OutOfRange { .. } => "out_of_range",
            EvalError::BaseDivisibleByP { .. } => "base_divisible_by_p",
            EvalError::MissingRepresentation => "missing_representation",
            EvalError::InsufficientPrecision { .. } => "insufficient_precision",
            EvalError::NonIntegral { .. } => "non_integral",
            EvalError::Overflow(_) => "overflow",
            EvalError::FormulaMismatch { .. } => "formula_mismatch",
            EvalError::Unbound(_) => "unbound",
            EvalError::Unsupported(_) => "unsupported",
        }
    }

    /// Whether the failure means "this prime is outside the statement's
    /// scope" rather than an engine problem. Such outcomes become skips.
    pub fn is_skip(&self) -> bool {
        matches!(
            self,
            EvalError::Arith(ArithError::DenominatorNotUnit { .. })
                | EvalError::Arith(ArithError::NotUnit { .. })
                | EvalError::BaseDivisibleByP { .. }
        )
    }
}
