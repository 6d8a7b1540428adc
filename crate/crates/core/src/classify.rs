//! Syntactic side conditions: extension independence, thinness, `Nm`-freeness, and the
//! embedding of the simply-typed logic.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Expr, Formula, Ltc, LtcEntry, Triple};
use crate::parse::{describe, ParseError, Parser};
use crate::term::{Ident, Term, Type};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub verdict: bool,
    /// Definition item that matched at the root, e.g. `ext-ind/3` or `thin/5`.
    pub clause: Option<String>,
    /// Innermost subformula no item applies to.
    pub failing: Option<Formula>,
}

impl ClassifierReport {
    fn from(r: Result<String, Formula>) -> ClassifierReport {
        match r {
            Ok(c) => ClassifierReport { verdict: true, clause: Some(c), failing: None },
            Err(f) => ClassifierReport { verdict: false, clause: None, failing: Some(f) },
        }
    }
}

impl fmt::Display for ClassifierReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.clause, &self.failing) {
            (Some(c), _) => write!(f, "yes ({c})"),
            (None, Some(a)) => write!(f, "no (no item applies to `{a}`)"),
            (None, None) => write!(f, "no"),
        }
    }
}

pub fn is_nm_free(ty: &Type) -> bool {
    ty.is_nm_free()
}

// Extension independence.

/// Classify `a` with no TCVs in scope. A free TCV can only be fixed by an ambient LTC,
/// so any free TCV makes the formula unclassifiable here.
pub fn is_syn_ext_ind(a: &Formula) -> ClassifierReport {
    is_syn_ext_ind_in(a, &Ltc::empty())
}

/// Classify `a` under `ambient`; TCVs declared by the ambient denote fixed snapshots.
pub fn is_syn_ext_ind_in(a: &Formula, ambient: &Ltc) -> ClassifierReport {
    let fixed: BTreeSet<Ident> = ambient.ftcv();
    ClassifierReport::from(ext_ind(&a.core(), &fixed).map(|c| format!("ext-ind/{c}")))
}

fn ltc_ok(g: &Ltc, fixed: &BTreeSet<Ident>) -> bool {
    g.ftcv().is_subset(fixed)
}

fn ext_ind(a: &Formula, fixed: &BTreeSet<Ident>) -> Result<u8, Formula> {
    if specific_case(a) {
        return Ok(4);
    }
    if let Formula::ForallTcv { tcv, body } = a {
        let inner = match &**body {
            Formula::ForallIn { ltc, body: c, .. } if ltc.0 == [LtcEntry::Tcv(tcv.clone())] => c,
            other => other,
        };
        if !mentions_tcv(inner, tcv) {
            ext_ind(inner, fixed)?;
            return Ok(3);
        }
        return Err(a.clone());
    }
    match a {
        Formula::True | Formula::False | Formula::Eq(..) => Ok(1),
        Formula::Fresh(_, g) => {
            if ltc_ok(g, fixed) {
                Ok(1)
            } else {
                Err(a.clone())
            }
        }
        Formula::Not(b) | Formula::Eval { body: b, .. } => ext_ind(b, fixed).map(|_| 2),
        Formula::And(b, c) | Formula::Or(b, c) | Formula::Implies(b, c) => {
            ext_ind(b, fixed)?;
            ext_ind(c, fixed).map(|_| 2)
        }
        Formula::ForallIn { ltc, body, .. } | Formula::ExistsIn { ltc, body, .. } => {
            if !ltc_ok(ltc, fixed) {
                return Err(a.clone());
            }
            ext_ind(body, fixed).map(|_| 2)
        }
        Formula::ForallTcv { .. } | Formula::ExistsTcv { .. } => Err(a.clone()),
    }
}

fn mentions_tcv(a: &Formula, d: &str) -> bool {
    a.ftcv().iter().any(|t| &**t == d)
}

/// `∀δ f•()=b{b#δ}` and `∀δ ∀x∈δ f•x=b{b#δ+x}`.
fn specific_case(a: &Formula) -> bool {
    let Formula::ForallTcv { tcv, body } = a else { return false };
    let d = LtcEntry::Tcv(tcv.clone());
    match &**body {
        Formula::Eval { arg: Expr::Const(crate::term::Const::Unit), anchor, body, .. } => {
            matches!(&**body, Formula::Fresh(Expr::Var(b), g) if b == anchor && g.0 == [d.clone()])
        }
        Formula::ForallIn { var, ltc, body, .. } if ltc.0 == [d.clone()] => match &**body {
            Formula::Eval { fun, arg: Expr::Var(y), anchor, body } if y == var && !fun.mentions(var) => {
                matches!(&**body, Formula::Fresh(Expr::Var(b), g)
                    if b == anchor && g.0.len() == 2 && g.0[0] == d && g.0[1].name() == var && !g.0[1].is_tcv())
            }
            _ => false,
        },
        _ => false,
    }
}

// Thinness.

struct ThinCtx<'a> {
    x: &'a str,
    x_ty: Option<&'a Type>,
    /// The part of the ambient before `x`.
    prefix: Ltc,
}

/// Is `a` thin with respect to `x` under `ambient`? Works on the surface syntax, because
/// the closure items admit `∨` and `∃` but not negation.
pub fn is_thin(a: &Formula, x: &str, ambient: &Ltc) -> ClassifierReport {
    let cx = ThinCtx {
        x,
        x_ty: ambient.var_type(x),
        prefix: ambient.prefix_before(x).unwrap_or_else(|| ambient.clone()),
    };
    if cx.x_ty.is_some_and(Type::is_base) && !a.fv().contains(x) {
        return ClassifierReport::from(Ok("thin/1".into()));
    }
    ClassifierReport::from(thin(a, &cx).map(|c| format!("thin/{c}")))
}

fn thin(a: &Formula, cx: &ThinCtx) -> Result<u8, Formula> {
    let x_free = a.fv().contains(cx.x);
    match a {
        Formula::True | Formula::False | Formula::Eq(..) if !x_free => Ok(2),
        Formula::Not(b) if matches!(**b, Formula::Eq(..)) && !x_free => Ok(2),
        Formula::Fresh(_, g) if !x_free => {
            if g.is_tcv_free() {
                Ok(2)
            } else if cx.prefix.subsumes(g) {
                Ok(3)
            } else if thin_item4(g, cx) {
                Ok(4)
            } else {
                Err(a.clone())
            }
        }
        Formula::And(b, c) | Formula::Or(b, c) => {
            thin(b, cx)?;
            thin(c, cx).map(|_| 5)
        }
        Formula::Eval { fun, arg, body, .. } if !fun.mentions(cx.x) && !arg.mentions(cx.x) => {
            thin(body, cx).map(|_| 5)
        }
        Formula::ForallIn { ltc, body, .. } if !ltc.contains(cx.x) => thin(body, cx).map(|_| 5),
        Formula::ExistsIn { ty, ltc, body, .. } if !ltc.contains(cx.x) && (ty.is_base() || ltc.is_tcv_free()) => {
            thin(body, cx).map(|_| 5)
        }
        Formula::ForallTcv { tcv, body } => {
            if let Formula::ForallIn { ltc, body: inner, .. } = &**body {
                if item7_ltc(ltc, tcv, cx) && !mentions_tcv(inner, tcv) {
                    return thin(inner, cx).map(|_| 7);
                }
            }
            if !mentions_tcv(body, tcv) {
                return thin(body, cx).map(|_| 6);
            }
            Err(a.clone())
        }
        _ => Err(a.clone()),
    }
}

/// `Γ0 + b` with `Γ0` inside the prefix and `b:Nm` declared after `x`.
fn thin_item4(g: &Ltc, cx: &ThinCtx) -> bool {
    if cx.x_ty != Some(&Type::Nm) {
        return false;
    }
    match g.0.split_last() {
        Some((LtcEntry::Var(b, Type::Nm), rest)) => {
            &**b != cx.x && !cx.prefix.contains(b) && cx.prefix.subsumes(&Ltc(rest.to_vec()))
        }
        _ => false,
    }
}

/// `(δ)` or `Γ1 + δ` with `Γ1` inside the prefix.
fn item7_ltc(g: &Ltc, d: &Ident, cx: &ThinCtx) -> bool {
    match g.0.split_last() {
        Some((LtcEntry::Tcv(e), rest)) if e == d => cx.prefix.subsumes(&Ltc(rest.to_vec())),
        _ => false,
    }
}

// The simply-typed fragment.

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StlcFormula {
    True,
    False,
    Eq(Expr, Expr),
    Not(Box<StlcFormula>),
    And(Box<StlcFormula>, Box<StlcFormula>),
    Or(Box<StlcFormula>, Box<StlcFormula>),
    Implies(Box<StlcFormula>, Box<StlcFormula>),
    Eval { fun: Expr, arg: Expr, anchor: Ident, body: Box<StlcFormula> },
    Forall { var: Ident, ty: Type, body: Box<StlcFormula> },
    Exists { var: Ident, ty: Type, body: Box<StlcFormula> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StlcTriple {
    pub pre: StlcFormula,
    pub program: Term,
    pub anchor: Ident,
    pub post: StlcFormula,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StlcError {
    #[error("not in the simply-typed fragment: {0}")]
    NotStlc(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

fn check_type(ty: &Type) -> Result<(), StlcError> {
    if ty.is_nm_free() {
        Ok(())
    } else {
        Err(StlcError::NotStlc(format!("type {ty} mentions Nm")))
    }
}

fn check_program(m: &Term) -> Result<(), StlcError> {
    fn go(m: &Term) -> Result<(), StlcError> {
        match m {
            Term::Gensym => Err(StlcError::NotStlc("program uses gensym".into())),
            Term::Name(n) => Err(StlcError::NotStlc(format!("program mentions name #{n}"))),
            Term::Var(_) | Term::Const(_) => Ok(()),
            Term::Lam(_, ty, b) => {
                check_type(ty)?;
                go(b)
            }
            Term::App(a, b) | Term::Let(_, a, b) | Term::Eq(a, b) | Term::Pair(a, b) => {
                go(a)?;
                go(b)
            }
            Term::If(c, a, b) => {
                go(c)?;
                go(a)?;
                go(b)
            }
            Term::Proj(_, a) => go(a),
        }
    }
    go(m)
}

pub fn translate_stlc(a: &StlcFormula) -> Result<Formula, StlcError> {
    Ok(match a {
        StlcFormula::True => Formula::True,
        StlcFormula::False => Formula::False,
        StlcFormula::Eq(l, r) => Formula::Eq(l.clone(), r.clone()),
        StlcFormula::Not(b) => Formula::not(translate_stlc(b)?),
        StlcFormula::And(b, c) => Formula::and(translate_stlc(b)?, translate_stlc(c)?),
        StlcFormula::Or(b, c) => Formula::or(translate_stlc(b)?, translate_stlc(c)?),
        StlcFormula::Implies(b, c) => Formula::implies(translate_stlc(b)?, translate_stlc(c)?),
        StlcFormula::Eval { fun, arg, anchor, body } => Formula::Eval {
            fun: fun.clone(),
            arg: arg.clone(),
            anchor: anchor.clone(),
            body: Box::new(translate_stlc(body)?),
        },
        StlcFormula::Forall { var, ty, body } => {
            check_type(ty)?;
            Formula::ForallIn { var: var.clone(), ty: ty.clone(), ltc: Ltc::empty(), body: Box::new(translate_stlc(body)?) }
        }
        StlcFormula::Exists { var, ty, body } => {
            check_type(ty)?;
            Formula::ExistsIn { var: var.clone(), ty: ty.clone(), ltc: Ltc::empty(), body: Box::new(translate_stlc(body)?) }
        }
    })
}

pub fn translate_stlc_triple(t: &StlcTriple) -> Result<Triple, StlcError> {
    check_program(&t.program)?;
    Ok(Triple {
        pre: translate_stlc(&t.pre)?,
        program: t.program.clone(),
        anchor: t.anchor.clone(),
        post: translate_stlc(&t.post)?,
    })
}

/// Parse a simply-typed formula; quantifiers are written `all x:T. A` without an LTC.
pub fn parse_stlc_formula(src: &str) -> Result<StlcFormula, StlcError> {
    let mut p = Parser::new(src)?;
    let a = stlc_formula(&mut p)?;
    p.expect_eof()?;
    Ok(a)
}

/// `{A} M :m {B}` over the simply-typed fragment.
pub fn parse_stlc_triple(src: &str) -> Result<StlcTriple, StlcError> {
    let mut p = Parser::new(src)?;
    p.expect_sym("{")?;
    let pre = stlc_formula(&mut p)?;
    p.expect_sym("}")?;
    let program = p.term()?;
    p.expect_sym(":")?;
    let anchor = p.ident()?;
    p.expect_sym("{")?;
    let post = stlc_formula(&mut p)?;
    p.expect_sym("}")?;
    p.expect_eof()?;
    check_program(&program)?;
    Ok(StlcTriple { pre, program, anchor, post })
}

fn stlc_formula(p: &mut Parser) -> Result<StlcFormula, StlcError> {
    let lhs = stlc_or(p)?;
    if p.eat_sym("->") {
        Ok(StlcFormula::Implies(Box::new(lhs), Box::new(stlc_formula(p)?)))
    } else {
        Ok(lhs)
    }
}

fn stlc_or(p: &mut Parser) -> Result<StlcFormula, StlcError> {
    let first = stlc_and(p)?;
    if p.eat_sym("\\/") {
        return Ok(StlcFormula::Or(Box::new(first), Box::new(stlc_or(p)?)));
    }
    Ok(first)
}

fn stlc_and(p: &mut Parser) -> Result<StlcFormula, StlcError> {
    let first = stlc_unary(p)?;
    if p.eat_sym("/\\") {
        return Ok(StlcFormula::And(Box::new(first), Box::new(stlc_and(p)?)));
    }
    Ok(first)
}

fn stlc_unary(p: &mut Parser) -> Result<StlcFormula, StlcError> {
    if p.eat_sym("~") {
        return Ok(StlcFormula::Not(Box::new(stlc_unary(p)?)));
    }
    if p.eat_sym("[") {
        let fun = p.expr()?;
        let arg = p.expr()?;
        p.expect_sym("=>")?;
        let anchor = p.ident()?;
        p.expect_sym("]")?;
        let body = Box::new(stlc_unary(p)?);
        return Ok(StlcFormula::Eval { fun, arg, anchor, body });
    }
    if p.at_kw("all") || p.at_kw("ex") {
        let is_all = p.at_kw("all");
        p.advance();
        let var = p.ident()?;
        p.expect_sym(":")?;
        let ty = p.ty()?;
        check_type(&ty)?;
        if p.at_kw("in") {
            return Err(StlcError::NotStlc("quantifier restricted to an LTC".into()));
        }
        p.expect_sym(".")?;
        let body = Box::new(stlc_formula(p)?);
        return Ok(if is_all { StlcFormula::Forall { var, ty, body } } else { StlcFormula::Exists { var, ty, body } });
    }
    if p.at_kw("allctx") || p.at_kw("exctx") {
        return Err(StlcError::NotStlc("quantifier over type-context variables".into()));
    }
    if p.eat_kw("T") {
        return Ok(StlcFormula::True);
    }
    if p.eat_kw("F") {
        return Ok(StlcFormula::False);
    }
    if p.at_sym("(") {
        let save = p.pos();
        p.advance();
        if let Ok(f) = stlc_formula(p) {
            if p.eat_sym(")") && !(p.at_sym("=") || p.at_sym("!=") || p.at_sym("#")) {
                return Ok(f);
            }
        }
        p.reset(save);
    }
    let lhs = p.expr()?;
    if p.eat_sym("=") {
        return Ok(StlcFormula::Eq(lhs, p.expr()?));
    }
    if p.eat_sym("!=") {
        return Ok(StlcFormula::Not(Box::new(StlcFormula::Eq(lhs, p.expr()?))));
    }
    if p.at_sym("#") {
        return Err(StlcError::NotStlc("freshness assertion".into()));
    }
    let found = describe(p.peek());
    Err(StlcError::Parse(p.error(format!("expected `=` or `!=`, found {found}"))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_formula_in, parse_ltc};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn ext_ind_atoms_and_closure() {
        let r = is_syn_ext_ind(&f("x # ()"));
        assert_eq!((r.verdict, r.clause.as_deref()), (true, Some("ext-ind/1")));
        let r = is_syn_ext_ind(&f("x = y /\\ ~(y # (y:Nm))"));
        assert_eq!((r.verdict, r.clause.as_deref()), (true, Some("ext-ind/2")));
    }

    #[test]
    fn ext_ind_specific_cases() {
        let r = is_syn_ext_ind(&f("allctx d. [f () => b] b # (d)"));
        assert_eq!(r.clause.as_deref(), Some("ext-ind/4"));
        let r = is_syn_ext_ind(&f("allctx d. all x:Nm in (d). [f x => b] b # (d, x:Nm)"));
        assert_eq!(r.clause.as_deref(), Some("ext-ind/4"));
        // anchor differs from the fresh subject
        assert!(!is_syn_ext_ind(&f("allctx d. [f () => b] c # (d)")).verdict);
    }

    #[test]
    fn ext_ind_tcv_quantifiers() {
        let r = is_syn_ext_ind(&f("allctx d. all y:Bool in (d). y = y"));
        assert_eq!(r.clause.as_deref(), Some("ext-ind/3"));
        let r = is_syn_ext_ind(&f("allctx d. x = y"));
        assert_eq!(r.clause.as_deref(), Some("ext-ind/3"));
        let r = is_syn_ext_ind(&f("allctx d. all y:Nm in (d). y # (d)"));
        assert!(!r.verdict);
        assert_eq!(r.failing, Some(f("allctx d. all y:Nm in (d). y # (d)")));
    }

    #[test]
    fn free_tcv_needs_ambient() {
        let a = f("all x:Nm in (d). x = x");
        assert!(!is_syn_ext_ind(&a).verdict);
        assert!(is_syn_ext_ind_in(&a, &parse_ltc("(d)").unwrap()).verdict);
    }

    #[test]
    fn derived_connectives_are_normalized() {
        let r = is_syn_ext_ind(&f("exctx d. x = y"));
        assert!(r.verdict);
        assert_eq!(r.clause.as_deref(), Some("ext-ind/2"));
    }

    #[test]
    fn thin_base_type() {
        let g = parse_ltc("(b:Bool, y:Nm)").unwrap();
        let r = is_thin(&f("y = y"), "b", &g);
        assert_eq!(r.clause.as_deref(), Some("thin/1"));
    }

    #[test]
    fn thin_atoms() {
        let g = parse_ltc("(x:Nm, y:Nm)").unwrap();
        assert_eq!(is_thin(&f("y = y"), "x", &g).clause.as_deref(), Some("thin/2"));
        assert!(!is_thin(&f("x = y"), "x", &g).verdict);
    }

    #[test]
    fn thin_fresh_items() {
        let g = parse_ltc("(G, z:Nm, x:Nm, b:Nm, y:Nm)").unwrap();
        let a = parse_formula_in(&g, "y # (G, z)").unwrap();
        assert_eq!(is_thin(&a, "x", &g).clause.as_deref(), Some("thin/3"));
        let a = parse_formula_in(&g, "y # (G, b)").unwrap();
        assert_eq!(is_thin(&a, "x", &g).clause.as_deref(), Some("thin/4"));
        let a = parse_formula_in(&g, "y # (G, x)").unwrap();
        assert!(!is_thin(&a, "x", &g).verdict);
        let a = parse_formula_in(&g, "y # (G, b, z)").unwrap();
        assert!(!is_thin(&a, "x", &g).verdict);
    }

    #[test]
    fn thin_closure_and_tcv_items() {
        let g = parse_ltc("(G, x:Nm, u:Nm -> Bool)").unwrap();
        let a = parse_formula_in(&g, "allctx d. all y:Nm in (d). [u y => m] (m = m /\\ y # (G))").unwrap();
        assert_eq!(is_thin(&a, "x", &g).clause.as_deref(), Some("thin/7"));
        let a = parse_formula_in(&g, "allctx d. all y:Nm in (G, d). [u y => m] m = m").unwrap();
        assert_eq!(is_thin(&a, "x", &g).clause.as_deref(), Some("thin/7"));
        let a = parse_formula_in(&g, "allctx d. T").unwrap();
        assert_eq!(is_thin(&a, "x", &g).clause.as_deref(), Some("thin/6"));
        // negation is outside the closure list
        let a = parse_formula_in(&g, "~(T /\\ T)").unwrap();
        assert!(!is_thin(&a, "x", &g).verdict);
        // the quantifier's LTC must not mention x
        let a = parse_formula_in(&g, "all y:Nm in (x). T").unwrap();
        assert!(!is_thin(&a, "x", &g).verdict);
    }

    #[test]
    fn nm_freeness() {
        use crate::parse::parse_type;
        assert!(is_nm_free(&parse_type("Bool -> Bool").unwrap()));
        assert!(!is_nm_free(&parse_type("Unit -> Nm").unwrap()));
        assert!(is_nm_free(&parse_type("(Bool * Unit) -> Bool").unwrap()));
    }

    #[test]
    fn stlc_translation() {
        let a = parse_stlc_formula("all x:Bool. x = x").unwrap();
        assert_eq!(translate_stlc(&a).unwrap(), f("all x:Bool in (). x = x"));
        let a = parse_stlc_formula("e = e'").unwrap();
        assert_eq!(translate_stlc(&a).unwrap(), f("e = e'"));
        assert!(matches!(parse_stlc_formula("x # (g)"), Err(StlcError::NotStlc(_))));
        assert!(matches!(parse_stlc_formula("all x:Nm. x = x"), Err(StlcError::NotStlc(_))));
        assert!(matches!(parse_stlc_triple("{T} gensym () :m {T}"), Err(StlcError::NotStlc(_))));
        let t = parse_stlc_triple("{T} \\x:Bool. x :u {all x:Bool. [u x => m] m = x}").unwrap();
        let nu = translate_stlc_triple(&t).unwrap();
        assert!(is_syn_ext_ind(&nu.post).verdict);
    }
}
