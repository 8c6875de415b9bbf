use std::fmt::Write;

use super::ast::*;

const ADD: u8 = 1;
const MUL: u8 = 2;
const UNARY: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => ADD,
        ExprKind::Binary(BinOp::Mul | BinOp::Div, ..) => MUL,
        ExprKind::Neg(_) => UNARY,
        ExprKind::Binary(BinOp::Pow, ..) => POW,
        _ => ATOM,
    }
}

fn child(out: &mut String, e: &Expr, min: u8) {
    if prec(e) < min {
        out.push('(');
        expr_into(out, e);
        out.push(')');
    } else {
        expr_into(out, e);
    }
}

fn expr_into(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Int(n) => write!(out, "{n}").unwrap(),
        ExprKind::Var(v) => out.push_str(v),
        ExprKind::Neg(a) => {
            out.push('-');
            child(out, a, UNARY);
        }
        ExprKind::Binary(op, a, b) => {
            let (sym, lmin, rmin) = match op {
                BinOp::Add => (" + ", ADD, MUL),
                BinOp::Sub => (" - ", ADD, MUL),
                BinOp::Mul => ("*", MUL, UNARY),
                BinOp::Div => ("/", MUL, UNARY),
                BinOp::Pow => ("^", ATOM, UNARY),
            };
            child(out, a, lmin);
            out.push_str(sym);
            child(out, b, rmin);
        }
        ExprKind::Call(f, args) => {
            out.push_str(f);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr_into(out, a);
            }
            out.push(')');
        }
        ExprKind::Sum { var, lo, hi, body } => {
            write!(out, "sum({var}, ").unwrap();
            expr_into(out, lo);
            out.push_str(", ");
            expr_into(out, hi);
            out.push_str(", ");
            expr_into(out, body);
            out.push(')');
        }
    }
}

/// Render an expression in source syntax with minimal parentheses.
pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    expr_into(&mut s, e);
    s
}

fn coeff(c: u64) -> String {
    if c == 1 {
        String::new()
    } else {
        format!("{c}*")
    }
}

pub fn print_rep(r: &RepClause) -> String {
    format!("{}p = {}x^2 + {}y^2", coeff(r.t), coeff(r.alpha), coeff(r.beta))
}

fn print_define(out: &mut String, d: &Define, indent: &str) {
    writeln!(out, "{indent}define {} = {};", d.name, print_expr(&d.expr)).unwrap();
}

pub fn print_case(c: &Case) -> String {
    let mut s = format!("case {}", c.cond);
    if let Some(r) = &c.rep {
        write!(s, " with rep {}", print_rep(r)).unwrap();
    }
    let modulus = if c.exponent == 1 { "p".to_string() } else { format!("p^{}", c.exponent) };
    write!(s, ":\n    {}\n    === {} (mod {modulus});", print_expr(&c.lhs), print_expr(&c.rhs)).unwrap();
    s
}

pub fn print_spec(spec: &ConjectureSpec) -> String {
    let mut out = format!("{} \"{}\" {{\n", spec.status.keyword(), spec.id);
    if !spec.tags.is_empty() {
        writeln!(out, "  tag {};", spec.tags.join(", ")).unwrap();
    }
    if !spec.exclusions.is_empty() {
        let ex: Vec<String> = spec.exclusions.iter().map(|e| e.to_string()).collect();
        writeln!(out, "  exclude {{{}}};", ex.join(", ")).unwrap();
    }
    for d in &spec.defines {
        print_define(&mut out, d, "  ");
    }
    for c in &spec.cases {
        for line in print_case(c).lines() {
            writeln!(out, "  {line}").unwrap();
        }
    }
    out.push_str("}\n");
    out
}

pub fn print_file(f: &SourceFile) -> String {
    let mut out = String::new();
    for d in &f.defines {
        print_define(&mut out, d, "");
    }
    for s in &f.entries {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&print_spec(s));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjdsl::parser::{parse_expr, parse_syntax};
    use proptest::prelude::*;

    fn roundtrip(src: &str) {
        let e = parse_expr(src).unwrap();
        let printed = print_expr(&e);
        assert_eq!(parse_expr(&printed).unwrap(), e, "{src} -> {printed}");
    }

    #[test]
    fn expression_roundtrips() {
        for src in [
            "1 - (2 - 3)",
            "(1 - 2) - 3",
            "a/(b*c)",
            "(a^b)^c",
            "a^b^c",
            "-(a + b)",
            "-a^2",
            "(-a)^2",
            "a^-2",
            "a^(-2)*b",
            "--a",
            "sum(k, 0, (p-1)/2, (4*k+1)*binom2k^3/(-64)^k)*legendre(p, 3)",
        ] {
            roundtrip(src);
        }
    }

    #[test]
    fn file_roundtrip() {
        let src = "define Q = p^2;\nconjecture \"a\" { tag low_confidence; exclude {2,3}; define W = 2*Q;\n case p mod 4 in {1} and legendre(-2, p) == -1 with rep 3*p = x^2 + 2*y^2: 1 === W (mod p); }";
        let f = parse_syntax(src).unwrap();
        assert_eq!(parse_syntax(&print_file(&f)).unwrap(), f);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0i128..50).prop_map(Expr::int),
            prop::sample::select(vec!["p", "x", "k"]).prop_map(Expr::var),
        ];
        leaf.prop_recursive(4, 32, 3, |inner| {
            prop_oneof![
                (
                    inner.clone(),
                    inner.clone(),
                    prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow])
                )
                    .prop_map(|(a, b, op)| Expr::binary(op, a, b)),
                inner.clone().prop_map(|a| Expr::new(ExprKind::Neg(Box::new(a)), Span::default())),
                (inner.clone(), inner)
                    .prop_map(|(a, b)| Expr::new(ExprKind::Call("legendre".into(), vec![a, b]), Span::default())),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in arb_expr()) {
            let printed = print_expr(&e);
            prop_assert_eq!(parse_expr(&printed).unwrap(), e);
        }
    }
}
