//! Acceptance criteria 1 to 8, one line of output per criterion.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;

use common::{reduce, sequence, Oracle};
use num_bigint::BigInt;
use num_integer::Integer;
use supercong::conjdsl::{
    builtin_registry, parse_standalone, parse_with, print_file, registry::BUILTIN_SOURCES, ConjectureSpec, ErrorKind,
    Evaluator, Outcome, PrimeServices, Registry, Status,
};
use supercong::harness::{render, run_sweep_with, ReportFormat, SweepConfig};
use supercong::modring::Modulus;
use supercong::ntbase::{check_condition, isqrt, primes_between, represent_form};
use supercong::seqgen::{apery_like_direct, apery_like_recurrence, SeqName};

/// A criterion is met, or met except for a documented, pinned shortfall.
enum Met {
    Pass(String),
    Deviation(String),
}

type Verdict = Result<Met, String>;

/// Theorem entries that must be present and pass.
const REQUIRED_THEOREMS: [&str; 8] = [
    "theorem-beukers",
    "theorem-mortenson",
    "theorem-guillera-zudilin",
    "theorem-sun-21k8",
    "theorem-guo-zudilin",
    "theorem-guo-zeng",
    "theorem-sun-t4",
    "theorem-sun-t4-2n1",
];

/// `(id, case, prime, exponent, lhs, rhs)` of every failure for `2.*,3.*` and p < 500.
const PINNED_FAILURES: [(&str, usize, u64, u32, u64, u64); 5] = [
    ("2.11", 5, 5, 2, 19, 24),
    ("2.16", 5, 5, 2, 14, 19),
    ("3.1", 2, 3, 3, 22, 13),
    ("3.6", 3, 5, 2, 4, 9),
    ("3.7", 2, 3, 3, 4, 13),
];

fn sweep(lo: u64, hi: u64, pats: &[&str]) -> SweepConfig {
    SweepConfig { lo, hi, conjectures: pats.iter().map(|s| s.to_string()).collect(), jobs: 1, ..Default::default() }
}

fn oracle_for<'a>(spec: &'a ConjectureSpec, reg: &'a Registry, p: u64, xy: Option<(u64, u64)>) -> Oracle<'a> {
    Oracle::new(p, xy, reg.globals.iter().chain(&spec.defines))
}

fn criterion_1() -> Verdict {
    let reg = builtin_registry();
    let ids: Vec<String> = reg
        .entries
        .iter()
        .filter(|e| e.status == Status::Theorem && !e.has_tag("unsupported"))
        .map(|e| e.id.clone())
        .collect();
    for want in REQUIRED_THEOREMS {
        if !ids.iter().any(|i| i == want) {
            return Err(format!("missing {want}"));
        }
    }
    let pats: Vec<&str> = ids.iter().map(String::as_str).collect();
    let report = run_sweep_with(reg, &sweep(5, 999, &pats)).map_err(|e| e.to_string())?;
    let s = &report.summary;
    if s.failures != 0 || s.errors != 0 {
        return Err(format!("{} failures, {} errors", s.failures, s.errors));
    }
    if s.passes == 0 {
        return Err("nothing was checked".into());
    }
    Ok(Met::Pass(format!("{} theorem entries, 5..999: {} passes, 0 failures, 0 errors", ids.len(), s.passes)))
}

fn criterion_2() -> Verdict {
    let src = r#"
theorem "morley" {
  case p > 3: binom(p-1, (p-1)/2) === (-1)^((p-1)/2) * 4^(p-1) (mod p^3);
}
theorem "wolstenholme" {
  case p > 3: harmonic(p-1) === 0 (mod p^2);
}
"#;
    let reg = Registry::load([("classical.cdsl", src)]).map_err(|(f, e)| format!("{f}: {e}"))?;
    let report = run_sweep_with(&reg, &sweep(3, 1999, &[])).map_err(|e| e.to_string())?;
    let s = &report.summary;
    let expected = 2 * primes_between(5, 1999).len();
    if s.failures != 0 || s.errors != 0 || s.passes != expected {
        return Err(format!("{} passes of {expected}, {} failures, {} errors", s.passes, s.failures, s.errors));
    }
    Ok(Met::Pass(format!("Morley and Wolstenholme for 3 < p < 2000: {} passes", s.passes)))
}

fn criterion_3() -> Verdict {
    let reg = builtin_registry();
    let report = run_sweep_with(reg, &sweep(3, 499, &["2.*,3.*"])).map_err(|e| e.to_string())?;
    if report.summary.errors != 0 {
        return Err(format!("{} errors", report.summary.errors));
    }
    let got: Vec<(String, usize, u64, u32, u64, u64)> = report
        .results
        .iter()
        .filter_map(|r| match r.outcome {
            Outcome::Fail { lhs, rhs, .. } => Some((r.id.clone(), r.case, r.prime, r.exponent, lhs, rhs)),
            _ => None,
        })
        .collect();
    let mut got = got;
    got.sort();
    let want: Vec<(String, usize, u64, u32, u64, u64)> =
        PINNED_FAILURES.iter().map(|&(i, c, p, e, l, r)| (i.to_string(), c, p, e, l, r)).collect();
    if got != want {
        return Err(format!("failures {got:?}, expected {want:?}"));
    }
    for (id, case, p, e, l, r) in &want {
        let spec = reg.get(id).ok_or(format!("no entry {id}"))?;
        let c = &spec.cases[*case];
        let xy = c.rep.map(|q| represent_form(q.t, q.alpha, q.beta, *p).map(|w| (w.x, w.y)).unwrap());
        let o = oracle_for(spec, reg, *p, xy);
        let m = p.pow(*e);
        let (ol, or) = (reduce(&o.eval(&c.lhs), m), reduce(&o.eval(&c.rhs), m));
        if ol != Some(*l) || or != Some(*r) {
            return Err(format!("oracle disagrees on {id} case {case} p={p}: {ol:?} vs {or:?}"));
        }
    }
    Ok(Met::Deviation(format!(
        "zero failures is unattainable: for p < 500 the only failures are the {} pinned small-prime \
         counterexamples, each confirmed by exact arithmetic; 0 errors",
        want.len()
    )))
}

fn criterion_4() -> Verdict {
    let reg = builtin_registry();
    let (mut agree, mut undefined, mut declined) = (0usize, 0usize, Vec::new());
    let mut bad = Vec::new();
    for p in [5u64, 7, 11, 13] {
        let services = PrimeServices::new(p);
        for spec in &reg.entries {
            if spec.exclusions.contains(&p) {
                continue;
            }
            for (i, c) in spec.cases.iter().enumerate() {
                if !check_condition(&c.cond, p) {
                    continue;
                }
                let rep = match c.rep {
                    Some(q) => match represent_form(q.t, q.alpha, q.beta, p) {
                        Ok(w) => Some(w),
                        Err(_) => {
                            undefined += 1;
                            continue;
                        }
                    },
                    None => None,
                };
                let m = Modulus::new(p, c.exponent).map_err(|e| e.to_string())?;
                let ev = Evaluator::new(&services, m, rep, reg.globals.iter().chain(&spec.defines));
                let oracle = oracle_for(spec, reg, p, rep.map(|w| (w.x, w.y)));
                for (side, e) in [("lhs", &c.lhs), ("rhs", &c.rhs)] {
                    let engine = ev.residue(e);
                    let exact = reduce(&oracle.eval(e), m.pe());
                    let here = format!("{} case {i} {side} p={p}", spec.id);
                    match (engine, exact) {
                        (Ok(a), Some(b)) if a.value() == b => agree += 1,
                        (Err(_), None) => undefined += 1,
                        // The engine may decline a right-hand side whose exact value is
                        // p-integral only after cancellation.
                        (Err(err), Some(_)) if side == "rhs" && err.is_skip() => declined.push(here),
                        (engine, exact) => bad.push(format!("{here}: engine {engine:?}, exact {exact:?}")),
                    }
                }
            }
        }
    }
    if !bad.is_empty() {
        return Err(format!("{} disagreements, first: {}", bad.len(), bad[0]));
    }
    Ok(Met::Pass(format!(
        "both sides at p = 5, 7, 11, 13: {agree} agree exactly, {undefined} undefined in both, \
         right side declined by the engine at [{}]",
        declined.join("; ")
    )))
}

fn criterion_5() -> Verdict {
    let mut n_checked = 0;
    for p in primes_between(3, 17) {
        let m = Modulus::new(p, 3).map_err(|e| e.to_string())?;
        for name in SeqName::ALL {
            let rec = apery_like_recurrence(name, m, p).map_err(|e| e.to_string())?;
            for (n, r) in rec.iter().enumerate() {
                let direct = apery_like_direct(name, n as u64, m).map_err(|e| e.to_string())?;
                let exact = sequence(name.symbol(), n as i64).mod_floor(&BigInt::from(m.pe()));
                if r.value() != direct.value() || BigInt::from(r.value()) != exact {
                    return Err(format!("{name} n={n} p={p}: {} / {} / {exact}", r.value(), direct.value()));
                }
                n_checked += 1;
            }
        }
    }
    Ok(Met::Pass(format!("8 sequences, primes 3..17 mod p^3: {n_checked} terms agree three ways")))
}

/// All values of `x^2` with `t*p = alpha*x^2 + beta*y^2`, by scanning `x`.
fn brute_force_squares(t: u64, alpha: u64, beta: u64, p: u64) -> BTreeSet<u64> {
    let target = t * p;
    (0..)
        .map(|x: u64| x * x)
        .take_while(|x2| alpha * x2 <= target)
        .filter(|x2| {
            let rest = target - alpha * x2;
            rest.is_multiple_of(beta) && {
                let q = rest / beta;
                isqrt(q) * isqrt(q) == q
            }
        })
        .collect()
}

fn criterion_6() -> Verdict {
    let reg = builtin_registry();
    let mut forms = BTreeSet::new();
    let mut checked = BTreeSet::new();
    for spec in &reg.entries {
        for c in &spec.cases {
            let Some(q) = c.rep else { continue };
            forms.insert((q.t, q.alpha, q.beta));
            for p in primes_between(3, 1999) {
                if spec.exclusions.contains(&p) || !check_condition(&c.cond, p) {
                    continue;
                }
                if !checked.insert((q.t, q.alpha, q.beta, p)) {
                    continue;
                }
                let w = represent_form(q.t, q.alpha, q.beta, p).map_err(|e| format!("{} at p={p}: {e}", spec.id))?;
                let squares = brute_force_squares(q.t, q.alpha, q.beta, p);
                if squares.len() != 1 || !squares.contains(&(w.x * w.x)) {
                    return Err(format!("{}x^2+{}y^2 = {}p at p={p}: x^2 in {squares:?}", q.alpha, q.beta, q.t));
                }
                if q.alpha * w.x * w.x + q.beta * w.y * w.y != q.t * p || w.x.gcd(&p) != 1 {
                    return Err(format!("bad witness {w:?}"));
                }
            }
        }
    }
    Ok(Met::Pass(format!(
        "{} forms, {} (form, prime) pairs below 2000: unique x^2, p does not divide x",
        forms.len(),
        checked.len()
    )))
}

/// Malformed inputs with the pinned location of the first error.
const MALFORMED: [(&str, ErrorKind, u32, u32); 10] = [
    ("conjecture \"a\" { case all: p === 1 (mod p^2) }", ErrorKind::Syntax, 1, 46),
    ("conjecture a { case all: p === 1 (mod p); }", ErrorKind::Syntax, 1, 12),
    ("conjecture \"a\" {\n  case all: p == 1 (mod p);\n}", ErrorKind::Syntax, 2, 15),
    ("conjecture \"a\" {\n  case all: q === 1 (mod p);\n}", ErrorKind::Semantic, 2, 13),
    ("conjecture \"a\" {\n  case all: frob(p) === 1 (mod p);\n}", ErrorKind::Semantic, 2, 13),
    ("conjecture \"a\" {\n  case all: p === 1 (mod p^0);\n}", ErrorKind::Semantic, 2, 3),
    ("conjecture \"a\" {\n  case p mod 4 in {}: p === 1 (mod p);\n}", ErrorKind::Syntax, 2, 20),
    ("conjecture \"a\" {\n  case all: x === 1 (mod p);\n}", ErrorKind::Semantic, 2, 13),
    ("conjecture \"a\" {\n  case all: (p + 1 === 1 (mod p);\n}", ErrorKind::Syntax, 2, 20),
    ("conjecture \"a\" {\n  define N = N + 1;\n  case all: N === 1 (mod p);\n}", ErrorKind::Semantic, 2, 10),
];

fn criterion_7() -> Verdict {
    let mut entries = 0;
    let reg = builtin_registry();
    for (name, src) in BUILTIN_SOURCES {
        let scope = if name == "prelude.cdsl" { &[][..] } else { &reg.globals[..] };
        let file = parse_with(src, scope).map_err(|e| format!("{name}: {e}"))?;
        let printed = print_file(&file);
        let again = parse_with(&printed, scope).map_err(|e| format!("{name} reprint: {e}"))?;
        if again != file {
            return Err(format!("{name}: printing and reparsing changes the tree"));
        }
        entries += file.entries.len();
    }
    for (src, kind, line, col) in MALFORMED {
        match parse_standalone(src) {
            Ok(_) => return Err(format!("accepted malformed input {src:?}")),
            Err(e) if e.kind != kind || e.line != line || e.col != col => {
                return Err(format!("{src:?}: got {e} ({:?}), expected {kind:?} at {line}:{col}", e.kind))
            }
            Err(_) => {}
        }
    }
    let primes = primes_between(3, 9999);
    let mut pairs = 0;
    for spec in &reg.entries {
        for (i, a) in spec.cases.iter().enumerate() {
            for b in &spec.cases[i + 1..] {
                if a.lhs != b.lhs || a.exponent != b.exponent {
                    continue;
                }
                pairs += 1;
                if let Some(p) = primes.iter().find(|&&p| check_condition(&a.cond, p) && check_condition(&b.cond, p)) {
                    return Err(format!("{}: two cases with the same left side both apply at p={p}", spec.id));
                }
            }
        }
    }
    Ok(Met::Pass(format!(
        "{} files ({entries} entries) round-trip, {} malformed inputs located, {pairs} same-LHS case pairs exclusive below 10^4",
        BUILTIN_SOURCES.len(),
        MALFORMED.len()
    )))
}

fn criterion_8() -> Verdict {
    let reg = builtin_registry();
    let run = |jobs| {
        let cfg = SweepConfig { jobs, ..sweep(3, 199, &[]) };
        let mut r = run_sweep_with(reg, &cfg).map_err(|e| e.to_string())?.without_timings();
        r.config.jobs = 0;
        let json = render(&r, ReportFormat::Json).map_err(|e| e.to_string())?;
        Ok::<_, String>((r, json))
    };
    let (a, ja) = run(1)?;
    let (b, jb) = run(4)?;
    let (c, jc) = run(1)?;
    if a != b || a != c || ja != jb || ja != jc {
        return Err("reports differ between runs".into());
    }
    Ok(Met::Pass(format!("p < 200: jobs 1, jobs 4 and a repeat give identical reports ({} records)", a.results.len())))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Verdict); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let mut ok = true;
    for (n, f) in criteria {
        match f() {
            Ok(Met::Pass(msg)) => println!("criterion {n}: PASS ({msg})"),
            Ok(Met::Deviation(msg)) => println!("criterion {n}: DEVIATION ({msg})"),
            Err(msg) => {
                ok = false;
                println!("criterion {n}: FAIL ({msg})");
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
