//! Lexer and recursive-descent parsers for types, terms, expressions, LTCs and formulae.

use thiserror::Error;

use crate::logic::{Expr, Formula, Ltc, LtcEntry, Triple};
use crate::term::{ident, Ident, Term, Type, HOLE};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u32),
    Name(u32),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: &[&str] = &[
    "==>", "[.]", ":=", "|-", "=>", "->", "!=", "/\\", "\\/", "(", ")", "<", ">", ",", ".", ":", "\\",
    "=", "*", "~", "[", "]", "{", "}", ";", "#",
];

const KEYWORDS: &[&str] = &[
    "let", "in", "if", "then", "else", "true", "false", "gensym", "pi1", "pi2", "all", "ex", "allctx",
    "exctx", "T", "F", "Unit", "Bool", "Nm",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let s: String = chars[i..]
                .iter()
                .take_while(|c| c.is_ascii_alphanumeric() || **c == '_' || **c == '\'')
                .collect();
            i += s.chars().count();
            col += s.chars().count();
            out.push(Token { tok: Tok::Ident(s), line: start_line, col: start_col });
            continue;
        }
        if c.is_ascii_digit() || (c == '#' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let is_name = c == '#';
            let from = if is_name { i + 1 } else { i };
            let s: String = chars[from..].iter().take_while(|c| c.is_ascii_digit()).collect();
            let n: u32 = s.parse().map_err(|_| ParseError {
                line,
                col,
                message: format!("number `{s}` out of range"),
            })?;
            let len = s.len() + usize::from(is_name);
            i += len;
            col += len;
            out.push(Token { tok: if is_name { Tok::Name(n) } else { Tok::Num(n) }, line: start_line, col: start_col });
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            col += 1;
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\n' {
                    line += 1;
                    col = 0;
                }
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            if i >= chars.len() {
                return Err(ParseError { line: start_line, col: start_col, message: "unterminated string".into() });
            }
            i += 1;
            col += 1;
            out.push(Token { tok: Tok::Str(s), line: start_line, col: start_col });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Token { tok: Tok::Sym(s), line: start_line, col: start_col });
            }
            None => {
                return Err(ParseError { line, col, message: format!("unexpected character `{c}`") });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    allow_hole: bool,
}

impl Parser {
    pub fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0, allow_hole: false })
    }

    pub fn from_tokens(mut toks: Vec<Token>) -> Parser {
        let (line, col) = toks.last().map(|t| (t.line, t.col)).unwrap_or((1, 1));
        if !matches!(toks.last().map(|t| &t.tok), Some(Tok::Eof)) {
            toks.push(Token { tok: Tok::Eof, line, col });
        }
        Parser { toks, pos: 0, allow_hole: false }
    }

    pub fn allow_hole(mut self) -> Parser {
        self.allow_hole = true;
        self
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn reset(&mut self, pos: usize) {
        self.pos = pos;
    }

    pub fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, col: t.col, message: message.into() }
    }

    pub fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub fn at_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn eat_kw(&mut self, k: &str) -> bool {
        if self.at_kw(k) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`, found {}", describe(self.peek()))))
        }
    }

    pub fn expect_kw(&mut self, k: &str) -> Result<(), ParseError> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{k}`, found {}", describe(self.peek()))))
        }
    }

    pub fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected {}", describe(self.peek()))))
        }
    }

    pub fn ident(&mut self) -> Result<Ident, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.advance();
                Ok(ident(&s))
            }
            other => Err(self.error(format!("expected identifier, found {}", describe(&other)))),
        }
    }

    // Types.

    pub fn ty(&mut self) -> Result<Type, ParseError> {
        let lhs = self.prod_ty()?;
        if self.eat_sym("->") {
            Ok(Type::arrow(lhs, self.ty()?))
        } else {
            Ok(lhs)
        }
    }

    fn prod_ty(&mut self) -> Result<Type, ParseError> {
        let mut t = self.atom_ty()?;
        while self.eat_sym("*") {
            t = Type::prod(t, self.atom_ty()?);
        }
        Ok(t)
    }

    fn atom_ty(&mut self) -> Result<Type, ParseError> {
        if self.eat_kw("Unit") {
            Ok(Type::Unit)
        } else if self.eat_kw("Bool") {
            Ok(Type::Bool)
        } else if self.eat_kw("Nm") {
            Ok(Type::Nm)
        } else if self.eat_sym("(") {
            let t = self.ty()?;
            self.expect_sym(")")?;
            Ok(t)
        } else {
            Err(self.error(format!("expected a type, found {}", describe(self.peek()))))
        }
    }

    // Terms.

    pub fn term(&mut self) -> Result<Term, ParseError> {
        if self.eat_kw("let") {
            let x = self.ident()?;
            self.expect_sym("=")?;
            let m = self.term()?;
            self.expect_kw("in")?;
            let n = self.term()?;
            return Ok(Term::Let(x, Box::new(m), Box::new(n)));
        }
        if self.eat_sym("\\") {
            let x = self.ident()?;
            self.expect_sym(":")?;
            let ty = self.ty()?;
            self.expect_sym(".")?;
            let b = self.term()?;
            return Ok(Term::Lam(x, ty, Box::new(b)));
        }
        if self.eat_kw("if") {
            let c = self.term()?;
            self.expect_kw("then")?;
            let a = self.term()?;
            self.expect_kw("else")?;
            let b = self.term()?;
            return Ok(Term::if_(c, a, b));
        }
        let lhs = self.app_term()?;
        if self.eat_sym("=") {
            let rhs = self.app_term()?;
            if self.at_sym("=") {
                return Err(self.error("`=` is non-associative"));
            }
            return Ok(Term::eq(lhs, rhs));
        }
        Ok(lhs)
    }

    fn app_term(&mut self) -> Result<Term, ParseError> {
        let mut t = if self.at_kw("pi1") || self.at_kw("pi2") {
            let i = if self.eat_kw("pi1") {
                1
            } else {
                self.advance();
                2
            };
            Term::proj(i, self.atom_term()?)
        } else {
            self.atom_term()?
        };
        while self.starts_atom_term() {
            let a = self.atom_term()?;
            t = Term::app(t, a);
        }
        Ok(t)
    }

    fn starts_atom_term(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !is_keyword(s) || matches!(s.as_str(), "true" | "false" | "gensym"),
            Tok::Name(_) => true,
            Tok::Sym(s) => matches!(*s, "(" | "<" | "[.]"),
            _ => false,
        }
    }

    fn atom_term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                self.advance();
                Ok(Term::bool(true))
            }
            Tok::Ident(s) if s == "false" => {
                self.advance();
                Ok(Term::bool(false))
            }
            Tok::Ident(s) if s == "gensym" => {
                self.advance();
                Ok(Term::Gensym)
            }
            Tok::Ident(_) => Ok(Term::Var(self.ident()?)),
            Tok::Name(n) => {
                self.advance();
                Ok(Term::Name(n))
            }
            Tok::Sym("[.]") => {
                if !self.allow_hole {
                    return Err(self.error("hole `[.]` is only allowed in contexts"));
                }
                self.advance();
                Ok(Term::var(HOLE))
            }
            Tok::Sym("(") => {
                self.advance();
                if self.eat_sym(")") {
                    return Ok(Term::unit());
                }
                let t = self.term()?;
                if !self.eat_sym(")") {
                    return Err(self.error(format!("unclosed `(`: found {}", describe(self.peek()))));
                }
                Ok(t)
            }
            Tok::Sym("<") => {
                self.advance();
                let a = self.term()?;
                self.expect_sym(",")?;
                let b = self.term()?;
                self.expect_sym(">")?;
                Ok(Term::pair(a, b))
            }
            other => Err(self.error(format!("expected a term, found {}", describe(&other)))),
        }
    }

    // Expressions.

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        if self.at_kw("pi1") || self.at_kw("pi2") {
            let i = if self.eat_kw("pi1") {
                1
            } else {
                self.advance();
                2
            };
            return Ok(Expr::proj(i, self.atom_expr()?));
        }
        self.atom_expr()
    }

    fn atom_expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                self.advance();
                Ok(Expr::bool(true))
            }
            Tok::Ident(s) if s == "false" => {
                self.advance();
                Ok(Expr::bool(false))
            }
            Tok::Ident(_) => Ok(Expr::Var(self.ident()?)),
            Tok::Sym("(") => {
                self.advance();
                if self.eat_sym(")") {
                    return Ok(Expr::unit());
                }
                let a = self.expr()?;
                if self.eat_sym("=") {
                    let b = self.expr()?;
                    self.expect_sym(")")?;
                    return Ok(Expr::eq_test(a, b));
                }
                self.expect_sym(")")?;
                Ok(a)
            }
            Tok::Sym("<") => {
                self.advance();
                let a = self.expr()?;
                self.expect_sym(",")?;
                let b = self.expr()?;
                self.expect_sym(">")?;
                Ok(Expr::pair(a, b))
            }
            other => Err(self.error(format!("expected an expression, found {}", describe(&other)))),
        }
    }

    // LTCs.

    pub fn ltc(&mut self) -> Result<Ltc, ParseError> {
        self.expect_sym("(")?;
        let mut entries = Vec::new();
        if self.eat_sym(")") {
            return Ok(Ltc(entries));
        }
        loop {
            let x = self.ident()?;
            if self.eat_sym(":") {
                entries.push(LtcEntry::Var(x, self.ty()?));
            } else {
                entries.push(LtcEntry::Tcv(x));
            }
            if self.eat_sym(")") {
                break;
            }
            self.expect_sym(",")?;
        }
        Ok(Ltc(entries))
    }

    // Formulae.

    pub fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or_formula()?;
        if self.eat_sym("->") {
            Ok(Formula::implies(lhs, self.formula()?))
        } else {
            Ok(lhs)
        }
    }

    fn or_formula(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.and_formula()?];
        while self.eat_sym("\\/") {
            parts.push(self.and_formula()?);
        }
        Ok(right_fold(parts, Formula::or))
    }

    fn and_formula(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unary_formula()?];
        while self.eat_sym("/\\") {
            parts.push(self.unary_formula()?);
        }
        Ok(right_fold(parts, Formula::and))
    }

    fn unary_formula(&mut self) -> Result<Formula, ParseError> {
        if self.eat_sym("~") {
            return Ok(Formula::not(self.unary_formula()?));
        }
        if self.eat_sym("[") {
            let fun = self.expr()?;
            let arg = self.expr()?;
            self.expect_sym("=>")?;
            let m = self.ident()?;
            self.expect_sym("]")?;
            let body = self.unary_formula()?;
            return Ok(Formula::Eval { fun, arg, anchor: m, body: Box::new(body) });
        }
        if self.at_kw("all") || self.at_kw("ex") {
            let is_all = self.at_kw("all");
            self.advance();
            let x = self.ident()?;
            self.expect_sym(":")?;
            let ty = self.ty()?;
            self.expect_kw("in")?;
            let g = self.ltc()?;
            self.expect_sym(".")?;
            let body = Box::new(self.formula()?);
            return Ok(if is_all {
                Formula::ForallIn { var: x, ty, ltc: g, body }
            } else {
                Formula::ExistsIn { var: x, ty, ltc: g, body }
            });
        }
        if self.at_kw("allctx") || self.at_kw("exctx") {
            let is_all = self.at_kw("allctx");
            self.advance();
            let d = self.ident()?;
            self.expect_sym(".")?;
            let body = Box::new(self.formula()?);
            return Ok(if is_all {
                Formula::ForallTcv { tcv: d, body }
            } else {
                Formula::ExistsTcv { tcv: d, body }
            });
        }
        if self.eat_kw("T") {
            return Ok(Formula::True);
        }
        if self.eat_kw("F") {
            return Ok(Formula::False);
        }
        if self.at_sym("(") {
            let save = self.pos;
            self.advance();
            if let Ok(f) = self.formula() {
                if self.eat_sym(")") && !(self.at_sym("=") || self.at_sym("!=") || self.at_sym("#")) {
                    return Ok(f);
                }
            }
            self.pos = save;
        }
        self.atom_formula()
    }

    fn atom_formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.expr()?;
        if self.eat_sym("=") {
            return Ok(Formula::Eq(lhs, self.expr()?));
        }
        if self.eat_sym("!=") {
            return Ok(Formula::neq(lhs, self.expr()?));
        }
        if self.eat_sym("#") {
            return Ok(Formula::Fresh(lhs, self.ltc()?));
        }
        Err(self.error(format!("expected `=`, `!=` or `#`, found {}", describe(self.peek()))))
    }

    /// `{A} M :m {B}`
    pub fn triple(&mut self) -> Result<Triple, ParseError> {
        self.expect_sym("{")?;
        let pre = self.formula()?;
        self.expect_sym("}")?;
        let program = self.term()?;
        self.expect_sym(":")?;
        let anchor = self.ident()?;
        self.expect_sym("{")?;
        let post = self.formula()?;
        self.expect_sym("}")?;
        Ok(Triple { pre, program, anchor, post })
    }
}

fn right_fold(mut parts: Vec<Formula>, f: fn(Formula, Formula) -> Formula) -> Formula {
    let mut acc = parts.pop().expect("non-empty");
    while let Some(p) = parts.pop() {
        acc = f(p, acc);
    }
    acc
}

pub fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(n) => format!("`{n}`"),
        Tok::Name(n) => format!("`#{n}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

fn whole<T>(src: &str, hole: bool, f: impl FnOnce(&mut Parser) -> Result<T, ParseError>) -> Result<T, ParseError> {
    let mut p = Parser::new(src)?;
    if hole {
        p = p.allow_hole();
    }
    let v = f(&mut p)?;
    p.expect_eof()?;
    Ok(v)
}

pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    whole(src, false, |p| p.ty())
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    whole(src, false, |p| p.term())
}

/// A term that may contain the hole `[.]`.
pub fn parse_context(src: &str) -> Result<Term, ParseError> {
    whole(src, true, |p| p.term())
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    whole(src, false, |p| p.expr())
}

pub fn parse_ltc(src: &str) -> Result<Ltc, ParseError> {
    whole(src, false, |p| p.ltc())
}

/// Parse a formula; bare LTC identifiers stay TCVs until resolved against an ambient LTC.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    whole(src, false, |p| p.formula())
}

/// Parse a formula and resolve LTC references against `ambient`.
pub fn parse_formula_in(ambient: &Ltc, src: &str) -> Result<Formula, ParseError> {
    Ok(crate::logic::resolve_ltc_refs(ambient, &parse_formula(src)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::alpha_eq;

    #[test]
    fn gensym_call() {
        assert_eq!(parse_term("gensym ()").unwrap(), Term::app(Term::Gensym, Term::unit()));
    }

    #[test]
    fn introduction_program() {
        let t = parse_term("let x = gensym () in \\y:Nm. x = y").unwrap();
        let want = Term::let_(
            "x",
            Term::gensym_call(),
            Term::lam("y", Type::Nm, Term::eq(Term::var("x"), Term::var("y"))),
        );
        assert_eq!(t, want);
    }

    #[test]
    fn unclosed_lambda_is_error() {
        let e = parse_term("(\\x:Nm.").unwrap_err();
        assert!(e.message.contains("term") || e.message.contains("unclosed"), "{e}");
    }

    #[test]
    fn application_is_left_associative() {
        let t = parse_term("f a b").unwrap();
        assert_eq!(t, Term::app(Term::app(Term::var("f"), Term::var("a")), Term::var("b")));
    }

    #[test]
    fn equality_is_non_associative() {
        assert!(parse_term("a = b = c").is_err());
    }

    #[test]
    fn types_parse_with_precedence() {
        let t = parse_type("Nm * (Nm -> Bool) -> Bool").unwrap();
        assert_eq!(
            t,
            Type::arrow(Type::prod(Type::Nm, Type::arrow(Type::Nm, Type::Bool)), Type::Bool)
        );
        assert_eq!(parse_type("A").is_err(), true);
        let r = parse_type("Nm -> Nm -> Bool").unwrap();
        assert_eq!(r, Type::arrow(Type::Nm, Type::arrow(Type::Nm, Type::Bool)));
    }

    #[test]
    fn context_with_hole() {
        let c = parse_context("let p = [.] in (pi2 p) (pi1 p)").unwrap();
        assert_eq!(c.hole_count(), 1);
        assert!(parse_term("[.]").is_err());
    }

    #[test]
    fn print_parse_round_trip_samples() {
        for src in [
            "let x = gensym () in \\y:Nm. x = y",
            "<gensym (), \\y:Nm. false>",
            "if #0 = #1 then (\\x:Bool. x) true else false",
            "pi1 <(), true>",
            "(\\f:Unit -> Nm. f ()) gensym",
            "let p = <#0, #1> in pi2 p = pi1 p",
        ] {
            let t = parse_term(src).unwrap();
            let back = parse_term(&t.to_string()).unwrap();
            assert!(alpha_eq(&t, &back), "{src} -> {t}");
        }
    }

    #[test]
    fn formulas_parse() {
        let f = parse_formula("allctx d. [u () => m] m # (d)").unwrap();
        assert!(matches!(f, Formula::ForallTcv { .. }));
        let f = parse_formula("m = (x = y)").unwrap();
        assert_eq!(f, Formula::Eq(Expr::var("m"), Expr::eq_test(Expr::var("x"), Expr::var("y"))));
        let f = parse_formula("(x = y) = m").unwrap();
        assert_eq!(f, Formula::Eq(Expr::eq_test(Expr::var("x"), Expr::var("y")), Expr::var("m")));
        let f = parse_formula("(x = y /\\ T) -> F").unwrap();
        assert!(matches!(f, Formula::Implies(..)));
        let f = parse_formula("pi1 a # (G)").unwrap();
        assert!(matches!(f, Formula::Fresh(Expr::Proj(1, _), _)));
        let f = parse_formula("[pi2 a y => d] d = (pi1 a = y)").unwrap();
        assert!(matches!(f, Formula::Eval { .. }));
    }

    #[test]
    fn formula_round_trip() {
        for src in [
            "x # (G) /\\ allctx d. all y:Nm in (d). T -> [u y => m] m = (x = y)",
            "ex z:Nm in (u:Nm -> Bool). x = z",
            "~(a = b \\/ b = c) /\\ [f () => m] (m # (G, f:Unit -> Nm) /\\ T)",
            "all x:Nm in (). (x != y -> F) -> T",
        ] {
            let f = parse_formula(src).unwrap();
            let back = parse_formula(&f.to_string()).unwrap();
            assert_eq!(f, back, "{src} -> {f}");
        }
    }
}
