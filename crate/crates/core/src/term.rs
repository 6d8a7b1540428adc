//! Types, terms and standard typing for the nu-calculus.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Ident = Arc<str>;

pub fn ident(s: &str) -> Ident {
    Arc::from(s)
}

/// Variable name used for the hole of a context.
pub const HOLE: &str = "[.]";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Type {
    Unit,
    Bool,
    Nm,
    Arrow(Box<Type>, Box<Type>),
    Prod(Box<Type>, Box<Type>),
}

impl Type {
    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn prod(a: Type, b: Type) -> Type {
        Type::Prod(Box::new(a), Box::new(b))
    }

    /// True iff `Nm` occurs nowhere in the type.
    pub fn is_nm_free(&self) -> bool {
        match self {
            Type::Unit | Type::Bool => true,
            Type::Nm => false,
            Type::Arrow(a, b) | Type::Prod(a, b) => a.is_nm_free() && b.is_nm_free(),
        }
    }

    /// Base types: `Unit | Bool | base * base`.
    pub fn is_base(&self) -> bool {
        match self {
            Type::Unit | Type::Bool => true,
            Type::Prod(a, b) => a.is_base() && b.is_base(),
            _ => false,
        }
    }

    /// Types at which program and logical equality are defined.
    pub fn admits_eq(&self) -> bool {
        matches!(self, Type::Nm | Type::Bool | Type::Unit)
    }

    pub fn size(&self) -> usize {
        match self {
            Type::Unit | Type::Bool | Type::Nm => 1,
            Type::Arrow(a, b) | Type::Prod(a, b) => 1 + a.size() + b.size(),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Type::Unit => write!(f, "Unit"),
            Type::Bool => write!(f, "Bool"),
            Type::Nm => write!(f, "Nm"),
            Type::Arrow(a, b) => {
                if prec > 0 {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 1)?;
                write!(f, " -> ")?;
                b.fmt_prec(f, 0)?;
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Type::Prod(a, b) => {
                if prec > 1 {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 1)?;
                write!(f, " * ")?;
                b.fmt_prec(f, 2)?;
                if prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Const {
    True,
    False,
    Unit,
}

impl Const {
    pub fn ty(self) -> Type {
        match self {
            Const::True | Const::False => Type::Bool,
            Const::Unit => Type::Unit,
        }
    }

    pub fn from_bool(b: bool) -> Const {
        if b {
            Const::True
        } else {
            Const::False
        }
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::True => write!(f, "true"),
            Const::False => write!(f, "false"),
            Const::Unit => write!(f, "()"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Name(u32),
    Gensym,
    Var(Ident),
    Const(Const),
    Lam(Ident, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    Let(Ident, Box<Term>, Box<Term>),
    Eq(Box<Term>, Box<Term>),
    If(Box<Term>, Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    Proj(u8, Box<Term>),
}

/// Standard type context: unordered map from variables to types.
pub type Stc = BTreeMap<Ident, Type>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    Unbound(Ident),
    #[error("type mismatch in `{term}`: expected {expected}, found {found}")]
    Mismatch { term: String, expected: Type, found: Type },
    #[error("`{term}` has type {found}, which is not a function type")]
    NotFunction { term: String, found: Type },
    #[error("`{term}` has type {found}, which is not a product type")]
    NotProduct { term: String, found: Type },
    #[error("equality is not defined at type {0}")]
    EqType(Type),
    #[error("projection index {0} is not 1 or 2")]
    BadProj(u8),
}

impl Term {
    pub fn var(x: &str) -> Term {
        Term::Var(ident(x))
    }
    pub fn lam(x: &str, ty: Type, body: Term) -> Term {
        Term::Lam(ident(x), ty, Box::new(body))
    }
    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }
    pub fn let_(x: &str, m: Term, n: Term) -> Term {
        Term::Let(ident(x), Box::new(m), Box::new(n))
    }
    pub fn eq(a: Term, b: Term) -> Term {
        Term::Eq(Box::new(a), Box::new(b))
    }
    pub fn if_(c: Term, a: Term, b: Term) -> Term {
        Term::If(Box::new(c), Box::new(a), Box::new(b))
    }
    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Box::new(a), Box::new(b))
    }
    pub fn proj(i: u8, a: Term) -> Term {
        Term::Proj(i, Box::new(a))
    }
    pub fn unit() -> Term {
        Term::Const(Const::Unit)
    }
    pub fn bool(b: bool) -> Term {
        Term::Const(Const::from_bool(b))
    }
    pub fn gensym_call() -> Term {
        Term::app(Term::Gensym, Term::unit())
    }
    pub fn hole() -> Term {
        Term::var(HOLE)
    }

    pub fn is_value(&self) -> bool {
        match self {
            Term::Name(_) | Term::Gensym | Term::Var(_) | Term::Const(_) | Term::Lam(..) => true,
            Term::Pair(a, b) => a.is_value() && b.is_value(),
            _ => false,
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Name(_) | Term::Gensym | Term::Var(_) | Term::Const(_) => 1,
            Term::Lam(_, _, b) | Term::Proj(_, b) => 1 + b.size(),
            Term::App(a, b) | Term::Let(_, a, b) | Term::Eq(a, b) | Term::Pair(a, b) => {
                1 + a.size() + b.size()
            }
            Term::If(a, b, c) => 1 + a.size() + b.size() + c.size(),
        }
    }

    pub fn fv(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.fv_into(&mut Vec::new(), &mut out);
        out
    }

    fn fv_into(&self, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Name(_) | Term::Gensym | Term::Const(_) => {}
            Term::Lam(x, _, b) => {
                bound.push(x.clone());
                b.fv_into(bound, out);
                bound.pop();
            }
            Term::Let(x, m, n) => {
                m.fv_into(bound, out);
                bound.push(x.clone());
                n.fv_into(bound, out);
                bound.pop();
            }
            Term::App(a, b) | Term::Eq(a, b) | Term::Pair(a, b) => {
                a.fv_into(bound, out);
                b.fv_into(bound, out);
            }
            Term::If(a, b, c) => {
                a.fv_into(bound, out);
                b.fv_into(bound, out);
                c.fv_into(bound, out);
            }
            Term::Proj(_, a) => a.fv_into(bound, out),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.fv().is_empty()
    }

    /// All names occurring in the term.
    pub fn an(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.an_into(&mut out);
        out
    }

    pub fn an_into(&self, out: &mut BTreeSet<u32>) {
        match self {
            Term::Name(n) => {
                out.insert(*n);
            }
            Term::Gensym | Term::Var(_) | Term::Const(_) => {}
            Term::Lam(_, _, b) | Term::Proj(_, b) => b.an_into(out),
            Term::App(a, b) | Term::Let(_, a, b) | Term::Eq(a, b) | Term::Pair(a, b) => {
                a.an_into(out);
                b.an_into(out);
            }
            Term::If(a, b, c) => {
                a.an_into(out);
                b.an_into(out);
                c.an_into(out);
            }
        }
    }

    /// Compile-time syntax: no names.
    pub fn is_compile_time(&self) -> bool {
        self.an().is_empty()
    }

    /// Capture-avoiding substitution `self[v/x]`.
    pub fn subst(&self, x: &str, v: &Term) -> Term {
        let fvv = v.fv();
        self.subst_with(x, v, &fvv)
    }

    fn subst_with(&self, x: &str, v: &Term, fvv: &BTreeSet<Ident>) -> Term {
        match self {
            Term::Var(y) => {
                if &**y == x {
                    v.clone()
                } else {
                    self.clone()
                }
            }
            Term::Name(_) | Term::Gensym | Term::Const(_) => self.clone(),
            Term::Lam(y, ty, b) => {
                if &**y == x {
                    return self.clone();
                }
                if fvv.contains(y) {
                    let fresh = fresh_ident(y, |c| fvv.contains(c) || b.fv().contains(c) || c == x);
                    let b2 = b.subst(y, &Term::Var(fresh.clone()));
                    Term::Lam(fresh, ty.clone(), Box::new(b2.subst_with(x, v, fvv)))
                } else {
                    Term::Lam(y.clone(), ty.clone(), Box::new(b.subst_with(x, v, fvv)))
                }
            }
            Term::Let(y, m, n) => {
                let m2 = m.subst_with(x, v, fvv);
                if &**y == x {
                    return Term::Let(y.clone(), Box::new(m2), n.clone());
                }
                if fvv.contains(y) {
                    let fresh = fresh_ident(y, |c| fvv.contains(c) || n.fv().contains(c) || c == x);
                    let n2 = n.subst(y, &Term::Var(fresh.clone()));
                    Term::Let(fresh, Box::new(m2), Box::new(n2.subst_with(x, v, fvv)))
                } else {
                    Term::Let(y.clone(), Box::new(m2), Box::new(n.subst_with(x, v, fvv)))
                }
            }
            Term::App(a, b) => Term::app(a.subst_with(x, v, fvv), b.subst_with(x, v, fvv)),
            Term::Eq(a, b) => Term::eq(a.subst_with(x, v, fvv), b.subst_with(x, v, fvv)),
            Term::Pair(a, b) => Term::pair(a.subst_with(x, v, fvv), b.subst_with(x, v, fvv)),
            Term::If(a, b, c) => Term::if_(
                a.subst_with(x, v, fvv),
                b.subst_with(x, v, fvv),
                c.subst_with(x, v, fvv),
            ),
            Term::Proj(i, a) => Term::proj(*i, a.subst_with(x, v, fvv)),
        }
    }

    /// Literal (non capture-avoiding) replacement of the hole variable.
    pub fn plug(&self, m: &Term) -> Term {
        match self {
            Term::Var(y) if &**y == HOLE => m.clone(),
            Term::Var(_) | Term::Name(_) | Term::Gensym | Term::Const(_) => self.clone(),
            Term::Lam(y, ty, b) => Term::Lam(y.clone(), ty.clone(), Box::new(b.plug(m))),
            Term::Let(y, a, b) => Term::Let(y.clone(), Box::new(a.plug(m)), Box::new(b.plug(m))),
            Term::App(a, b) => Term::app(a.plug(m), b.plug(m)),
            Term::Eq(a, b) => Term::eq(a.plug(m), b.plug(m)),
            Term::Pair(a, b) => Term::pair(a.plug(m), b.plug(m)),
            Term::If(a, b, c) => Term::if_(a.plug(m), b.plug(m), c.plug(m)),
            Term::Proj(i, a) => Term::proj(*i, a.plug(m)),
        }
    }

    pub fn hole_count(&self) -> usize {
        match self {
            Term::Var(y) => usize::from(&**y == HOLE),
            Term::Name(_) | Term::Gensym | Term::Const(_) => 0,
            Term::Lam(_, _, b) | Term::Proj(_, b) => b.hole_count(),
            Term::App(a, b) | Term::Let(_, a, b) | Term::Eq(a, b) | Term::Pair(a, b) => {
                a.hole_count() + b.hole_count()
            }
            Term::If(a, b, c) => a.hole_count() + b.hole_count() + c.hole_count(),
        }
    }

    /// Rename names through `f`.
    pub fn map_names(&self, f: &impl Fn(u32) -> u32) -> Term {
        match self {
            Term::Name(n) => Term::Name(f(*n)),
            Term::Var(_) | Term::Gensym | Term::Const(_) => self.clone(),
            Term::Lam(y, ty, b) => Term::Lam(y.clone(), ty.clone(), Box::new(b.map_names(f))),
            Term::Let(y, a, b) => {
                Term::Let(y.clone(), Box::new(a.map_names(f)), Box::new(b.map_names(f)))
            }
            Term::App(a, b) => Term::app(a.map_names(f), b.map_names(f)),
            Term::Eq(a, b) => Term::eq(a.map_names(f), b.map_names(f)),
            Term::Pair(a, b) => Term::pair(a.map_names(f), b.map_names(f)),
            Term::If(a, b, c) => Term::if_(a.map_names(f), b.map_names(f), c.map_names(f)),
            Term::Proj(i, a) => Term::proj(*i, a.map_names(f)),
        }
    }

    /// Names in order of first appearance (left to right).
    pub fn names_in_order(&self, out: &mut Vec<u32>) {
        match self {
            Term::Name(n) => {
                if !out.contains(n) {
                    out.push(*n)
                }
            }
            Term::Var(_) | Term::Gensym | Term::Const(_) => {}
            Term::Lam(_, _, b) | Term::Proj(_, b) => b.names_in_order(out),
            Term::App(a, b) | Term::Let(_, a, b) | Term::Eq(a, b) | Term::Pair(a, b) => {
                a.names_in_order(out);
                b.names_in_order(out);
            }
            Term::If(a, b, c) => {
                a.names_in_order(out);
                b.names_in_order(out);
                c.names_in_order(out);
            }
        }
    }
}

/// Pick a variant of `base` for which `taken` is false.
pub fn fresh_ident(base: &str, taken: impl Fn(&str) -> bool) -> Ident {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '\'');
    let stem = if stem.is_empty() { "v" } else { stem };
    for i in 1.. {
        let cand = format!("{stem}{i}");
        if !taken(&cand) {
            return ident(&cand);
        }
    }
    unreachable!()
}

/// Alpha-equivalence of terms.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn go<'a>(a: &'a Term, b: &'a Term, env: &mut Vec<(&'a str, &'a str)>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                for (l, r) in env.iter().rev() {
                    if *l == &**x || *r == &**y {
                        return *l == &**x && *r == &**y;
                    }
                }
                x == y
            }
            (Term::Name(x), Term::Name(y)) => x == y,
            (Term::Gensym, Term::Gensym) => true,
            (Term::Const(x), Term::Const(y)) => x == y,
            (Term::Lam(x, tx, bx), Term::Lam(y, ty, by)) => {
                if tx != ty {
                    return false;
                }
                env.push((x, y));
                let r = go(bx, by, env);
                env.pop();
                r
            }
            (Term::Let(x, mx, nx), Term::Let(y, my, ny)) => {
                if !go(mx, my, env) {
                    return false;
                }
                env.push((x, y));
                let r = go(nx, ny, env);
                env.pop();
                r
            }
            (Term::App(a1, b1), Term::App(a2, b2))
            | (Term::Eq(a1, b1), Term::Eq(a2, b2))
            | (Term::Pair(a1, b1), Term::Pair(a2, b2)) => go(a1, a2, env) && go(b1, b2, env),
            (Term::If(a1, b1, c1), Term::If(a2, b2, c2)) => {
                go(a1, a2, env) && go(b1, b2, env) && go(c1, c2, env)
            }
            (Term::Proj(i, x), Term::Proj(j, y)) => i == j && go(x, y, env),
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

/// Typing judgement `ctx |- t : T`; names are typed `Nm`.
pub fn typecheck_term(ctx: &Stc, t: &Term) -> Result<Type, TypeError> {
    match t {
        Term::Name(_) => Ok(Type::Nm),
        Term::Gensym => Ok(Type::arrow(Type::Unit, Type::Nm)),
        Term::Var(x) => ctx.get(x).cloned().ok_or_else(|| TypeError::Unbound(x.clone())),
        Term::Const(c) => Ok(c.ty()),
        Term::Lam(x, ty, b) => {
            let mut inner = ctx.clone();
            inner.insert(x.clone(), ty.clone());
            let tb = typecheck_term(&inner, b)?;
            Ok(Type::arrow(ty.clone(), tb))
        }
        Term::App(f, a) => {
            let tf = typecheck_term(ctx, f)?;
            let ta = typecheck_term(ctx, a)?;
            match tf {
                Type::Arrow(dom, cod) => {
                    if *dom == ta {
                        Ok(*cod)
                    } else {
                        Err(TypeError::Mismatch { term: a.to_string(), expected: *dom, found: ta })
                    }
                }
                other => Err(TypeError::NotFunction { term: f.to_string(), found: other }),
            }
        }
        Term::Let(x, m, n) => {
            let tm = typecheck_term(ctx, m)?;
            let mut inner = ctx.clone();
            inner.insert(x.clone(), tm);
            typecheck_term(&inner, n)
        }
        Term::Eq(a, b) => {
            let ta = typecheck_term(ctx, a)?;
            let tb = typecheck_term(ctx, b)?;
            if ta != tb {
                return Err(TypeError::Mismatch { term: b.to_string(), expected: ta, found: tb });
            }
            if !ta.admits_eq() {
                return Err(TypeError::EqType(ta));
            }
            Ok(Type::Bool)
        }
        Term::If(c, a, b) => {
            let tc = typecheck_term(ctx, c)?;
            if tc != Type::Bool {
                return Err(TypeError::Mismatch { term: c.to_string(), expected: Type::Bool, found: tc });
            }
            let ta = typecheck_term(ctx, a)?;
            let tb = typecheck_term(ctx, b)?;
            if ta != tb {
                return Err(TypeError::Mismatch { term: b.to_string(), expected: ta, found: tb });
            }
            Ok(ta)
        }
        Term::Pair(a, b) => Ok(Type::prod(typecheck_term(ctx, a)?, typecheck_term(ctx, b)?)),
        Term::Proj(i, a) => match typecheck_term(ctx, a)? {
            Type::Prod(l, r) => match i {
                1 => Ok(*l),
                2 => Ok(*r),
                _ => Err(TypeError::BadProj(*i)),
            },
            other => Err(TypeError::NotProduct { term: a.to_string(), found: other }),
        },
    }
}

// Printing. Levels: 0 binders and if, 1 equality, 2 application, 3 atoms.
fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Lam(..) | Term::Let(..) | Term::If(..) => 0,
        Term::Eq(..) => 1,
        Term::App(..) | Term::Proj(..) => 2,
        _ => 3,
    }
}

fn fmt_term(t: &Term, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
    let paren = term_prec(t) < ctx;
    if paren {
        write!(f, "(")?;
    }
    match t {
        Term::Name(n) => write!(f, "#{n}")?,
        Term::Gensym => write!(f, "gensym")?,
        Term::Var(x) => write!(f, "{x}")?,
        Term::Const(c) => write!(f, "{c}")?,
        Term::Lam(x, ty, b) => {
            write!(f, "\\{x}:{ty}. ")?;
            fmt_term(b, f, 0)?;
        }
        Term::Let(x, m, n) => {
            write!(f, "let {x} = ")?;
            fmt_term(m, f, 0)?;
            write!(f, " in ")?;
            fmt_term(n, f, 0)?;
        }
        Term::If(c, a, b) => {
            write!(f, "if ")?;
            fmt_term(c, f, 0)?;
            write!(f, " then ")?;
            fmt_term(a, f, 0)?;
            write!(f, " else ")?;
            fmt_term(b, f, 0)?;
        }
        Term::Eq(a, b) => {
            fmt_term(a, f, 2)?;
            write!(f, " = ")?;
            fmt_term(b, f, 2)?;
        }
        Term::App(a, b) => {
            fmt_term(a, f, 2)?;
            write!(f, " ")?;
            fmt_term(b, f, 3)?;
        }
        Term::Proj(i, a) => {
            write!(f, "pi{i} ")?;
            fmt_term(a, f, 3)?;
        }
        Term::Pair(a, b) => {
            write!(f, "<")?;
            fmt_term(a, f, 0)?;
            write!(f, ", ")?;
            fmt_term(b, f, 0)?;
            write!(f, ">")?;
        }
    }
    if paren {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self, f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gensym_has_unit_to_nm() {
        let ty = typecheck_term(&Stc::new(), &Term::Gensym).unwrap();
        assert_eq!(ty, Type::arrow(Type::Unit, Type::Nm));
    }

    #[test]
    fn lambda_equality_types() {
        let t = Term::lam("x", Type::Nm, Term::eq(Term::var("x"), Term::var("x")));
        assert_eq!(typecheck_term(&Stc::new(), &t).unwrap(), Type::arrow(Type::Nm, Type::Bool));
    }

    #[test]
    fn unbound_variable() {
        assert_eq!(
            typecheck_term(&Stc::new(), &Term::var("x")),
            Err(TypeError::Unbound(ident("x")))
        );
    }

    #[test]
    fn equality_rejected_at_function_type() {
        let f = Term::lam("x", Type::Nm, Term::var("x"));
        let t = Term::eq(f.clone(), f);
        assert!(matches!(typecheck_term(&Stc::new(), &t), Err(TypeError::EqType(_))));
    }

    #[test]
    fn nm_freeness() {
        assert!(Type::arrow(Type::Bool, Type::Bool).is_nm_free());
        assert!(!Type::arrow(Type::Unit, Type::Nm).is_nm_free());
        assert!(Type::arrow(Type::prod(Type::Bool, Type::Unit), Type::Bool).is_nm_free());
    }

    #[test]
    fn subst_avoids_capture() {
        let t = Term::lam("y", Type::Nm, Term::eq(Term::var("x"), Term::var("y")));
        let r = t.subst("x", &Term::var("y"));
        match &r {
            Term::Lam(b, _, body) => {
                assert_ne!(&**b, "y");
                assert_eq!(**body, Term::eq(Term::var("y"), Term::Var(b.clone())));
            }
            _ => panic!("{r}"),
        }
    }

    #[test]
    fn alpha_equivalence_respects_binders() {
        let a = Term::lam("x", Type::Nm, Term::var("x"));
        let b = Term::lam("y", Type::Nm, Term::var("y"));
        let c = Term::lam("y", Type::Nm, Term::var("x"));
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&a, &c));
    }

    #[test]
    fn printing_parenthesizes() {
        let t = Term::app(Term::proj(2, Term::var("p")), Term::proj(1, Term::var("p")));
        assert_eq!(t.to_string(), "pi2 p (pi1 p)");
        let t = Term::app(Term::lam("x", Type::Nm, Term::var("x")), Term::Name(0));
        assert_eq!(t.to_string(), "(\\x:Nm. x) #0");
        let ty = Type::arrow(Type::prod(Type::Nm, Type::arrow(Type::Nm, Type::Bool)), Type::Bool);
        assert_eq!(ty.to_string(), "Nm * (Nm -> Bool) -> Bool");
    }
}
