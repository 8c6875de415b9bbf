use std::collections::{BTreeMap, BTreeSet};

use crate::modring::MAX_EXPONENT;
use crate::ntbase::{is_prime, LegArg, PrimeCondition};

use super::ast::*;
use super::compile::compile_sum;
use super::ParseError;

/// Builtin functions and their arities.
pub const FUNCTIONS: [(&str, usize); 7] =
    [("binom", 2), ("floor", 1), ("legendre", 2), ("B", 1), ("E", 1), ("U", 1), ("harmonic", 1)];

const RESERVED: [&str; 4] = ["p", "x", "y", "sum"];

fn arity(name: &str) -> Option<usize> {
    FUNCTIONS.iter().find(|(n, _)| *n == name).map(|(_, a)| *a)
}

/// What an expression refers to.
#[derive(Default)]
struct Uses {
    defines: BTreeSet<String>,
    rep_vars: BTreeSet<String>,
}

fn sem(span: Span, msg: impl Into<String>) -> ParseError {
    ParseError::semantic(span, msg)
}

fn scan(e: &Expr, names: &BTreeSet<String>, bound: Option<&str>, uses: &mut Uses) -> Result<(), ParseError> {
    match &e.kind {
        ExprKind::Int(_) => Ok(()),
        ExprKind::Var(v) => {
            if v == "p" || Some(v.as_str()) == bound {
                Ok(())
            } else if v == "x" || v == "y" {
                uses.rep_vars.insert(v.clone());
                Ok(())
            } else if names.contains(v) {
                uses.defines.insert(v.clone());
                Ok(())
            } else {
                Err(sem(e.span, format!("unbound name `{v}`")))
            }
        }
        ExprKind::Neg(a) => scan(a, names, bound, uses),
        ExprKind::Binary(_, a, b) => {
            scan(a, names, bound, uses)?;
            scan(b, names, bound, uses)
        }
        ExprKind::Call(f, args) => {
            if f == "seq" {
                return Err(sem(e.span, "seq(...) may only appear inside a sum term"));
            }
            match arity(f) {
                None => Err(sem(e.span, format!("unknown function `{f}`"))),
                Some(n) if n != args.len() => {
                    Err(sem(e.span, format!("`{f}` takes {n} argument(s), got {}", args.len())))
                }
                Some(_) => args.iter().try_for_each(|a| scan(a, names, bound, uses)),
            }
        }
        ExprKind::Sum { var, lo, hi, body } => {
            if bound.is_some() {
                return Err(sem(e.span, "nested sums are not supported"));
            }
            if RESERVED.contains(&var.as_str()) || names.contains(var) {
                return Err(sem(e.span, format!("summation variable `{var}` shadows another name")));
            }
            scan(lo, names, None, uses)?;
            scan(hi, names, None, uses)?;
            compile_sum(var, lo, hi, body).map_err(|c| sem(c.span, c.message))?;
            Ok(())
        }
    }
}

fn check_condition(c: &PrimeCondition, span: Span) -> Result<(), ParseError> {
    match c {
        PrimeCondition::ModIn { modulus, residues } => {
            if *modulus == 0 {
                return Err(sem(span, "modulus in a guard must be positive"));
            }
            if let Some(r) = residues.iter().find(|r| **r >= *modulus) {
                return Err(sem(span, format!("residue {r} is not reduced modulo {modulus}")));
            }
            Ok(())
        }
        PrimeCondition::Legendre { bottom, .. } => match bottom {
            LegArg::P => Ok(()),
            LegArg::Int(q) if *q > 2 && is_prime(*q as u64) => Ok(()),
            LegArg::Int(q) => Err(sem(span, format!("Legendre symbol modulo {q}: modulus must be p or an odd prime"))),
        },
        PrimeCondition::And(parts) => parts.iter().try_for_each(|c| check_condition(c, span)),
        _ => Ok(()),
    }
}

/// Check a file against defines supplied from elsewhere (e.g. the prelude).
pub fn check_file(file: &SourceFile, external: &[Define]) -> Result<(), ParseError> {
    let mut global_names = BTreeSet::new();
    let mut direct: BTreeMap<String, Uses> = BTreeMap::new();
    for d in external.iter().chain(&file.defines) {
        if RESERVED.contains(&d.name.as_str()) || arity(&d.name).is_some() {
            return Err(sem(d.span, format!("`{}` is reserved", d.name)));
        }
        if !global_names.insert(d.name.clone()) {
            return Err(sem(d.span, format!("`{}` is defined twice", d.name)));
        }
    }
    for d in external.iter().chain(&file.defines) {
        let mut u = Uses::default();
        scan(&d.expr, &global_names, None, &mut u)?;
        direct.insert(d.name.clone(), u);
    }

    let mut ids = BTreeSet::new();
    for spec in &file.entries {
        if !ids.insert(spec.id.clone()) {
            return Err(sem(spec.span, format!("duplicate entry id \"{}\"", spec.id)));
        }
        check_entry(spec, &global_names, &direct)?;
    }
    Ok(())
}

fn check_entry(
    spec: &ConjectureSpec,
    globals: &BTreeSet<String>,
    global_uses: &BTreeMap<String, Uses>,
) -> Result<(), ParseError> {
    if spec.cases.is_empty() {
        return Err(sem(spec.span, format!("entry \"{}\" has no cases", spec.id)));
    }
    let mut names = globals.clone();
    let mut local: BTreeMap<String, Uses> = BTreeMap::new();
    for d in &spec.defines {
        if RESERVED.contains(&d.name.as_str()) || arity(&d.name).is_some() {
            return Err(sem(d.span, format!("`{}` is reserved", d.name)));
        }
        if !names.insert(d.name.clone()) {
            return Err(sem(d.span, format!("`{}` is defined twice", d.name)));
        }
    }
    for d in &spec.defines {
        let mut u = Uses::default();
        scan(&d.expr, &names, None, &mut u)?;
        local.insert(d.name.clone(), u);
    }
    let lookup = |n: &str| local.get(n).or_else(|| global_uses.get(n));

    // Reject cyclic defines.
    for d in &spec.defines {
        let mut stack = vec![d.name.clone()];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            for dep in &lookup(&n).map(|u| &u.defines).cloned().unwrap_or_default() {
                if *dep == d.name {
                    return Err(sem(d.span, format!("`{}` is defined in terms of itself", d.name)));
                }
                if seen.insert(dep.clone()) {
                    stack.push(dep.clone());
                }
            }
        }
    }

    for c in &spec.cases {
        if c.exponent == 0 || c.exponent > MAX_EXPONENT {
            return Err(sem(c.span, format!("modulus exponent {} is outside 1..={MAX_EXPONENT}", c.exponent)));
        }
        check_condition(&c.cond, c.span)?;
        if let Some(r) = c.rep {
            if r.t == 0 || r.alpha == 0 || r.beta == 0 {
                return Err(sem(c.span, "representation coefficients must be positive"));
            }
        }
        for side in [&c.lhs, &c.rhs] {
            let mut u = Uses::default();
            scan(side, &names, None, &mut u)?;
            let mut rep_vars = u.rep_vars.clone();
            let mut stack: Vec<String> = u.defines.into_iter().collect();
            let mut seen = BTreeSet::new();
            while let Some(n) = stack.pop() {
                if !seen.insert(n.clone()) {
                    continue;
                }
                if let Some(du) = lookup(&n) {
                    rep_vars.extend(du.rep_vars.iter().cloned());
                    stack.extend(du.defines.iter().cloned());
                }
            }
            if c.rep.is_none() {
                if let Some(v) = rep_vars.iter().next() {
                    let span = first_use(side, v).unwrap_or(c.span);
                    return Err(sem(span, format!("`{v}` is used without a `with rep` clause")));
                }
            }
        }
    }
    Ok(())
}

fn first_use(e: &Expr, name: &str) -> Option<Span> {
    let mut found = None;
    e.walk(&mut |x| {
        if found.is_none() && matches!(&x.kind, ExprKind::Var(v) if v == name) {
            found = Some(x.span);
        }
    });
    found
}
