use crate::ntbase::{LegArg, PrimeCondition};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

/// Syntax-only parse. Semantic checks live in [`super::semantic`].
pub fn parse_syntax(src: &str) -> Result<SourceFile, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    p.file()
}

/// Parse a single expression.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        Err(ParseError::syntax(self.span(), format!("expected {wanted}, found {}", self.peek().describe())))
    }

    fn expect(&mut self, t: Tok) -> Result<Span, ParseError> {
        if *self.peek() == t {
            Ok(self.bump().span)
        } else {
            self.unexpected(&t.describe())
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Span, ParseError> {
        if self.is_kw(kw) {
            Ok(self.bump().span)
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => self.unexpected("an identifier"),
        }
    }

    fn uint(&mut self) -> Result<u64, ParseError> {
        match *self.peek() {
            Tok::Int(n) if n <= u64::MAX as i128 => {
                self.bump();
                Ok(n as u64)
            }
            _ => self.unexpected("a non-negative integer"),
        }
    }

    fn signed(&mut self) -> Result<i64, ParseError> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let span = self.span();
        let n = self.uint()?;
        let n = i64::try_from(n).map_err(|_| ParseError::syntax(span, "integer out of range"))?;
        Ok(if neg { -n } else { n })
    }

    fn file(&mut self) -> Result<SourceFile, ParseError> {
        let mut out = SourceFile::default();
        loop {
            match self.peek() {
                Tok::Eof => return Ok(out),
                Tok::Ident(s) if s == "define" => out.defines.push(self.define()?),
                Tok::Ident(s) if s == "conjecture" || s == "theorem" => out.entries.push(self.entry()?),
                _ => return self.unexpected("`conjecture`, `theorem` or `define`"),
            }
        }
    }

    fn define(&mut self) -> Result<Define, ParseError> {
        self.expect_kw("define")?;
        let (name, span) = self.ident()?;
        self.expect(Tok::Assign)?;
        let expr = self.expr()?;
        self.expect(Tok::Semi)?;
        Ok(Define { name, expr, span })
    }

    fn entry(&mut self) -> Result<ConjectureSpec, ParseError> {
        let span = self.span();
        let status = if self.is_kw("theorem") { Status::Theorem } else { Status::Conjecture };
        self.bump();
        let id = match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                s
            }
            _ => return self.unexpected("a quoted entry id"),
        };
        self.expect(Tok::LBrace)?;
        let mut spec =
            ConjectureSpec { id, status, tags: vec![], exclusions: vec![], defines: vec![], cases: vec![], span };
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(spec);
                }
                Tok::Ident(s) if s == "tag" => {
                    self.bump();
                    loop {
                        spec.tags.push(self.ident()?.0);
                        if *self.peek() != Tok::Comma {
                            break;
                        }
                        self.bump();
                    }
                    self.expect(Tok::Semi)?;
                }
                Tok::Ident(s) if s == "exclude" => {
                    self.bump();
                    spec.exclusions.extend(self.int_set()?);
                    self.expect(Tok::Semi)?;
                }
                Tok::Ident(s) if s == "define" => spec.defines.push(self.define()?),
                Tok::Ident(s) if s == "case" => spec.cases.push(self.case()?),
                _ => return self.unexpected("`tag`, `exclude`, `define`, `case` or `}`"),
            }
        }
    }

    fn int_set(&mut self) -> Result<Vec<u64>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut out = vec![self.uint()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.uint()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(out)
    }

    fn case(&mut self) -> Result<Case, ParseError> {
        let span = self.expect_kw("case")?;
        let cond = self.condition()?;
        let rep = if self.is_kw("with") {
            self.bump();
            self.expect_kw("rep")?;
            Some(self.rep()?)
        } else {
            None
        };
        self.expect(Tok::Colon)?;
        let lhs = self.expr()?;
        self.expect(Tok::Congruent)?;
        let rhs = self.expr()?;
        self.expect(Tok::LParen)?;
        self.expect_kw("mod")?;
        self.expect_kw("p")?;
        let exponent = if *self.peek() == Tok::Caret {
            self.bump();
            let s = self.span();
            u32::try_from(self.uint()?).map_err(|_| ParseError::semantic(s, "modulus exponent out of range"))?
        } else {
            1
        };
        self.expect(Tok::RParen)?;
        self.expect(Tok::Semi)?;
        Ok(Case { cond, rep, lhs, rhs, exponent, span })
    }

    fn coeff(&mut self) -> Result<u64, ParseError> {
        if matches!(self.peek(), Tok::Int(_)) && *self.peek_at(1) == Tok::Star {
            let c = self.uint()?;
            self.bump();
            Ok(c)
        } else {
            Ok(1)
        }
    }

    fn square_of(&mut self, var: &str) -> Result<(), ParseError> {
        self.expect_kw(var)?;
        self.expect(Tok::Caret)?;
        match self.peek() {
            Tok::Int(2) => {
                self.bump();
                Ok(())
            }
            _ => self.unexpected("`2`"),
        }
    }

    fn rep(&mut self) -> Result<RepClause, ParseError> {
        let t = self.coeff()?;
        self.expect_kw("p")?;
        self.expect(Tok::Assign)?;
        let alpha = self.coeff()?;
        self.square_of("x")?;
        self.expect(Tok::Plus)?;
        let beta = self.coeff()?;
        self.square_of("y")?;
        Ok(RepClause { t, alpha, beta })
    }

    fn condition(&mut self) -> Result<PrimeCondition, ParseError> {
        let mut parts = vec![self.cond_atom()?];
        while self.is_kw("and") {
            self.bump();
            parts.push(self.cond_atom()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { PrimeCondition::And(parts) })
    }

    fn leg_arg(&mut self) -> Result<LegArg, ParseError> {
        if self.is_kw("p") {
            self.bump();
            Ok(LegArg::P)
        } else {
            Ok(LegArg::Int(self.signed()?))
        }
    }

    fn cond_atom(&mut self) -> Result<PrimeCondition, ParseError> {
        if self.is_kw("all") {
            self.bump();
            return Ok(PrimeCondition::All);
        }
        if self.is_kw("legendre") {
            self.bump();
            self.expect(Tok::LParen)?;
            let top = self.leg_arg()?;
            self.expect(Tok::Comma)?;
            let bottom = self.leg_arg()?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::EqEq)?;
            let s = self.span();
            let sign = self.signed()?;
            if sign != 1 && sign != -1 {
                return Err(ParseError::semantic(s, "a Legendre guard compares with 1 or -1"));
            }
            return Ok(PrimeCondition::Legendre { top, bottom, sign: sign as i8 });
        }
        self.expect_kw("p")?;
        match self.peek() {
            Tok::Ident(s) if s == "mod" => {
                self.bump();
                let modulus = self.uint()?;
                self.expect_kw("in")?;
                let residues = self.int_set()?;
                Ok(PrimeCondition::ModIn { modulus, residues })
            }
            Tok::NotEq => {
                self.bump();
                Ok(PrimeCondition::NotEqual(self.uint()?))
            }
            Tok::Gt => {
                self.bump();
                Ok(PrimeCondition::Greater(self.uint()?))
            }
            _ => self.unexpected("`mod`, `!=` or `>`"),
        }
    }

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.term()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.unary()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            let span = self.bump().span;
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), span));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            let span = self.bump().span;
            let exp = self.unary()?;
            return Ok(Expr::new(ExprKind::Binary(BinOp::Pow, Box::new(base), Box::new(exp)), span));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(n), span))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                // A call needs `(` directly after the name, so `W (mod p)` ends an expression.
                if *self.peek() != Tok::LParen || self.toks[self.pos].spaced {
                    return Ok(Expr::new(ExprKind::Var(name), span));
                }
                self.bump();
                if name == "sum" {
                    let (var, _) = self.ident()?;
                    self.expect(Tok::Comma)?;
                    let lo = self.expr()?;
                    self.expect(Tok::Comma)?;
                    let hi = self.expr()?;
                    self.expect(Tok::Comma)?;
                    let body = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::new(
                        ExprKind::Sum { var, lo: Box::new(lo), hi: Box::new(hi), body: Box::new(body) },
                        span,
                    ));
                }
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    args.push(self.expr()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(Expr::new(ExprKind::Call(name, args), span))
            }
            _ => self.unexpected("an expression"),
        }
    }
}
