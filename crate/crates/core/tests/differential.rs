mod common;

use common::{reduce, Oracle};
use proptest::prelude::*;
use supercong::conjdsl::parser::parse_expr;
use supercong::conjdsl::{Evaluator, PrimeServices};
use supercong::modring::Modulus;
use supercong::ntbase::{is_prime, primes_between};

/// Random p-integral expressions in `p` and small constants. Binomial tops stay below `p`.
fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (-40i64..40).prop_map(|n| format!("({n})")),
        Just("p".to_string()),
        (1i64..8).prop_map(|k| format!("binom(p-1, {k})")),
        (0i64..6, 1i64..8).prop_map(|(j, k)| format!("binom((p-1)/2 - {j}, {k})")),
        (1i64..6).prop_map(|k| format!("harmonic({k})")),
        (1i64..29).prop_map(|d| format!("1/{d}")),
        (2i64..7).prop_map(|b| format!("{b}^(p-1)")),
        Just("legendre(-3, p)".to_string()),
        Just("floor(p/3)".to_string()),
        sum_expr(),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), 1i64..29).prop_map(|(a, d)| format!("({a} / {d})")),
            (inner.clone(), 0u32..4).prop_map(|(a, e)| format!("({a})^{e}")),
        ]
    })
}

/// Sums in the supported term shape: binomial families times a polynomial in
/// `k`, over a power of a constant and optionally a power of `k+1`. Each family
/// factor is divisible by `p` exactly once at `k = p-1`, so full-range sums with
/// `j` at most the number of family factors are p-integral.
fn sum_expr() -> impl Strategy<Value = String> {
    let fam = prop::sample::select(vec![
        ("binom2k", 1u32),
        ("binom2k^2", 2),
        ("binom2k^3", 3),
        ("binom2k*binom3k", 2),
        ("binom4k", 1),
        ("binom2k*binom3k*binom6k", 3),
        ("binom2k^2*binom4k", 3),
    ]);
    let base = prop::sample::select(vec![1i64, -1, 2, -4, 8, 16, -27, 64, -3, 12]);
    let half = any::<bool>();
    (fam, -9i64..9, -9i64..9, -3i64..3, base, 0u32..4, half).prop_map(|((f, v), c0, c1, c2, b, j, half)| {
        let (hi, j) = if half { ("(p-1)/2", j) } else { ("p-1", j.min(v)) };
        let den = if j == 0 { String::new() } else { format!("*(k+1)^{j}") };
        format!("sum(k, 0, {hi}, {f}*({c0} + {c1}*k + {c2}*k^2)/(({b})^k{den}))")
    })
}

fn prime_above_28() -> impl Strategy<Value = u64> {
    prop::sample::select(primes_between(31, 400))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn engine_matches_exact_arithmetic(src in expr(), p in prime_above_28(), e in 1u32..4) {
        let ast = parse_expr(&src).unwrap();
        let services = PrimeServices::new(p);
        let m = Modulus::new(p, e).unwrap();
        let got = Evaluator::new(&services, m, None, []).residue(&ast).map(|r| r.value());
        let want = reduce(&Oracle::new(p, None, []).eval(&ast), m.pe());
        prop_assert_eq!(got.ok(), want, "{} at p={}", src, p);
    }

    #[test]
    fn central_binomial_sums_match(p in prime_above_28(), base in prop::sample::select(vec![-4i64, 4, 8, 16, -32, 64])) {
        let src = format!("sum(k, 0, p-1, binom2k^2/({base})^k)");
        let ast = parse_expr(&src).unwrap();
        let services = PrimeServices::new(p);
        let m = Modulus::new(p, 3).unwrap();
        let got = Evaluator::new(&services, m, None, []).residue(&ast).unwrap().value();
        prop_assert_eq!(Some(got), reduce(&Oracle::new(p, None, []).eval(&ast), m.pe()));
        prop_assert!(is_prime(p));
    }
}

#[test]
fn sums_that_are_not_p_integral_are_rejected() {
    use supercong::error::EvalError;
    use supercong::modring::ArithError;
    let services = PrimeServices::new(31);
    let m = Modulus::new(31, 2).unwrap();
    for (src, v) in [("p * sum(k, 0, p-1, binom4k*k^2/(k+1)^2)", -1), ("sum(k, 0, p-1, binom2k/(k+1)^3)", -2)] {
        let got = Evaluator::new(&services, m, None, []).residue(&parse_expr(src).unwrap());
        assert_eq!(got, Err(EvalError::Arith(ArithError::NegativeValuation { v })), "{src}");
    }
}
