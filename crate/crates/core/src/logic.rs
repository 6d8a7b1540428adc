//! Logical expressions, LTCs, formulae, triples and their typing.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{ident, Const, Ident, Stc, Term, Type};

/// Logical expressions. `EqTest` is the equality expression `(e = e')` of type Bool.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Expr {
    Var(Ident),
    Const(Const),
    Pair(Box<Expr>, Box<Expr>),
    Proj(u8, Box<Expr>),
    EqTest(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(x: &str) -> Expr {
        Expr::Var(ident(x))
    }
    pub fn pair(a: Expr, b: Expr) -> Expr {
        Expr::Pair(Box::new(a), Box::new(b))
    }
    pub fn proj(i: u8, a: Expr) -> Expr {
        Expr::Proj(i, Box::new(a))
    }
    pub fn eq_test(a: Expr, b: Expr) -> Expr {
        Expr::EqTest(Box::new(a), Box::new(b))
    }
    pub fn bool(b: bool) -> Expr {
        Expr::Const(Const::from_bool(b))
    }
    pub fn unit() -> Expr {
        Expr::Const(Const::Unit)
    }

    pub fn fv(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.fv_into(&mut out);
        out
    }

    pub fn fv_into(&self, out: &mut BTreeSet<Ident>) {
        match self {
            Expr::Var(x) => {
                out.insert(x.clone());
            }
            Expr::Const(_) => {}
            Expr::Pair(a, b) | Expr::EqTest(a, b) => {
                a.fv_into(out);
                b.fv_into(out);
            }
            Expr::Proj(_, a) => a.fv_into(out),
        }
    }

    pub fn mentions(&self, x: &str) -> bool {
        match self {
            Expr::Var(y) => &**y == x,
            Expr::Const(_) => false,
            Expr::Pair(a, b) | Expr::EqTest(a, b) => a.mentions(x) || b.mentions(x),
            Expr::Proj(_, a) => a.mentions(x),
        }
    }

    /// Contains a projection or an equality test.
    pub fn has_destructor(&self) -> bool {
        match self {
            Expr::Var(_) | Expr::Const(_) => false,
            Expr::Pair(a, b) => a.has_destructor() || b.has_destructor(),
            Expr::Proj(..) | Expr::EqTest(..) => true,
        }
    }

    pub fn subst(&self, x: &str, e: &Expr) -> Expr {
        match self {
            Expr::Var(y) if &**y == x => e.clone(),
            Expr::Var(_) | Expr::Const(_) => self.clone(),
            Expr::Pair(a, b) => Expr::pair(a.subst(x, e), b.subst(x, e)),
            Expr::EqTest(a, b) => Expr::eq_test(a.subst(x, e), b.subst(x, e)),
            Expr::Proj(i, a) => Expr::proj(*i, a.subst(x, e)),
        }
    }

    /// The program term denoted by the expression (variables stay variables).
    pub fn to_term(&self) -> Term {
        match self {
            Expr::Var(x) => Term::Var(x.clone()),
            Expr::Const(c) => Term::Const(*c),
            Expr::Pair(a, b) => Term::pair(a.to_term(), b.to_term()),
            Expr::Proj(i, a) => Term::proj(*i, a.to_term()),
            Expr::EqTest(a, b) => Term::eq(a.to_term(), b.to_term()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 1,
            Expr::Pair(a, b) | Expr::EqTest(a, b) => 1 + a.size() + b.size(),
            Expr::Proj(_, a) => 1 + a.size(),
        }
    }
}

fn fmt_expr(e: &Expr, f: &mut fmt::Formatter<'_>, atomic: bool) -> fmt::Result {
    match e {
        Expr::Var(x) => write!(f, "{x}"),
        Expr::Const(c) => write!(f, "{c}"),
        Expr::Pair(a, b) => {
            write!(f, "<")?;
            fmt_expr(a, f, false)?;
            write!(f, ", ")?;
            fmt_expr(b, f, false)?;
            write!(f, ">")
        }
        Expr::EqTest(a, b) => {
            write!(f, "(")?;
            fmt_expr(a, f, false)?;
            write!(f, " = ")?;
            fmt_expr(b, f, false)?;
            write!(f, ")")
        }
        Expr::Proj(i, a) => {
            if atomic {
                write!(f, "(")?;
            }
            write!(f, "pi{i} ")?;
            fmt_expr(a, f, true)?;
            if atomic {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, f, false)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LtcEntry {
    Var(Ident, Type),
    Tcv(Ident),
}

impl LtcEntry {
    pub fn name(&self) -> &Ident {
        match self {
            LtcEntry::Var(x, _) | LtcEntry::Tcv(x) => x,
        }
    }
    pub fn is_tcv(&self) -> bool {
        matches!(self, LtcEntry::Tcv(_))
    }
}

/// Ordered logical type context.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ltc(pub Vec<LtcEntry>);

impl Ltc {
    pub fn empty() -> Ltc {
        Ltc(Vec::new())
    }

    pub fn entries(&self) -> &[LtcEntry] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn with_var(&self, x: &str, ty: Type) -> Ltc {
        let mut v = self.0.clone();
        v.push(LtcEntry::Var(ident(x), ty));
        Ltc(v)
    }

    pub fn with_tcv(&self, d: &str) -> Ltc {
        let mut v = self.0.clone();
        v.push(LtcEntry::Tcv(ident(d)));
        Ltc(v)
    }

    /// Ordered concatenation `self + other`.
    pub fn concat(&self, other: &Ltc) -> Result<Ltc, LogicError> {
        let mut v = self.0.clone();
        for e in &other.0 {
            if self.contains(e.name()) {
                return Err(LogicError::DuplicateEntry(e.name().clone()));
            }
            v.push(e.clone());
        }
        Ok(Ltc(v))
    }

    pub fn contains(&self, x: &str) -> bool {
        self.0.iter().any(|e| &**e.name() == x)
    }

    pub fn contains_var(&self, x: &str) -> bool {
        self.0.iter().any(|e| matches!(e, LtcEntry::Var(y, _) if &**y == x))
    }

    pub fn contains_tcv(&self, d: &str) -> bool {
        self.0.iter().any(|e| matches!(e, LtcEntry::Tcv(y) if &**y == d))
    }

    pub fn position(&self, x: &str) -> Option<usize> {
        self.0.iter().position(|e| &**e.name() == x)
    }

    pub fn var_type(&self, x: &str) -> Option<&Type> {
        self.0.iter().find_map(|e| match e {
            LtcEntry::Var(y, t) if &**y == x => Some(t),
            _ => None,
        })
    }

    /// `Γ \ x`
    pub fn remove_var(&self, x: &str) -> Ltc {
        Ltc(self.0.iter().filter(|e| !matches!(e, LtcEntry::Var(y, _) if &**y == x)).cloned().collect())
    }

    pub fn remove_tcv(&self, d: &str) -> Ltc {
        Ltc(self.0.iter().filter(|e| !matches!(e, LtcEntry::Tcv(y) if &**y == d)).cloned().collect())
    }

    /// Drop every TCV entry.
    pub fn remove_tcvs(&self) -> Ltc {
        Ltc(self.0.iter().filter(|e| !e.is_tcv()).cloned().collect())
    }

    pub fn is_tcv_free(&self) -> bool {
        self.0.iter().all(|e| !e.is_tcv())
    }

    /// The underlying standard type context.
    pub fn to_stc(&self) -> Stc {
        self.0
            .iter()
            .filter_map(|e| match e {
                LtcEntry::Var(x, t) => Some((x.clone(), t.clone())),
                LtcEntry::Tcv(_) => None,
            })
            .collect()
    }

    pub fn fv(&self) -> BTreeSet<Ident> {
        self.0
            .iter()
            .filter_map(|e| match e {
                LtcEntry::Var(x, _) => Some(x.clone()),
                LtcEntry::Tcv(_) => None,
            })
            .collect()
    }

    pub fn ftcv(&self) -> BTreeSet<Ident> {
        self.0
            .iter()
            .filter_map(|e| match e {
                LtcEntry::Tcv(d) => Some(d.clone()),
                LtcEntry::Var(..) => None,
            })
            .collect()
    }

    pub fn has_duplicates(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.0.iter().any(|e| !seen.insert(e.name().clone()))
    }

    /// `self ⊢ sub`: `sub` is an ordered subsequence of `self`.
    pub fn subsumes(&self, sub: &Ltc) -> bool {
        let mut it = self.0.iter();
        'outer: for want in &sub.0 {
            for have in it.by_ref() {
                if have == want {
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }

    /// Reorder the given entries by their position in `self`; entries absent from `self` keep
    /// their relative order and go last.
    pub fn order_by(&self, entries: Vec<LtcEntry>) -> Ltc {
        let mut known: Vec<(usize, LtcEntry)> = Vec::new();
        let mut unknown = Vec::new();
        for e in entries {
            match self.position(e.name()) {
                Some(p) => known.push((p, e)),
                None => unknown.push(e),
            }
        }
        known.sort_by_key(|(p, _)| *p);
        let mut out: Vec<LtcEntry> = known.into_iter().map(|(_, e)| e).collect();
        for e in unknown {
            if !out.iter().any(|o| o.name() == e.name()) {
                out.push(e);
            }
        }
        Ltc(out)
    }

    /// Prefix of the LTC strictly before `x`.
    pub fn prefix_before(&self, x: &str) -> Option<Ltc> {
        self.position(x).map(|p| Ltc(self.0[..p].to_vec()))
    }

    pub fn rename(&self, from: &str, to: &Ident) -> Ltc {
        Ltc(self
            .0
            .iter()
            .map(|e| match e {
                LtcEntry::Var(x, t) if &**x == from => LtcEntry::Var(to.clone(), t.clone()),
                LtcEntry::Tcv(d) if &**d == from => LtcEntry::Tcv(to.clone()),
                other => other.clone(),
            })
            .collect())
    }
}

impl fmt::Display for Ltc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match e {
                LtcEntry::Var(x, t) => write!(f, "{x}:{t}")?,
                LtcEntry::Tcv(d) => write!(f, "{d}")?,
            }
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    Eq(Expr, Expr),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Eval { fun: Expr, arg: Expr, anchor: Ident, body: Box<Formula> },
    ForallIn { var: Ident, ty: Type, ltc: Ltc, body: Box<Formula> },
    ExistsIn { var: Ident, ty: Type, ltc: Ltc, body: Box<Formula> },
    ForallTcv { tcv: Ident, body: Box<Formula> },
    ExistsTcv { tcv: Ident, body: Box<Formula> },
    /// `e # Γ0`; the subject is an expression so that substitution stays closed.
    Fresh(Expr, Ltc),
}

impl Formula {
    pub fn eq(a: Expr, b: Expr) -> Formula {
        Formula::Eq(a, b)
    }
    pub fn neq(a: Expr, b: Expr) -> Formula {
        Formula::not(Formula::Eq(a, b))
    }
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn eval(fun: Expr, arg: Expr, anchor: &str, body: Formula) -> Formula {
        Formula::Eval { fun, arg, anchor: ident(anchor), body: Box::new(body) }
    }
    /// `e1 • e2 = e3`
    pub fn eval_short(fun: Expr, arg: Expr, anchor: &str, res: Expr) -> Formula {
        Formula::eval(fun, arg, anchor, Formula::Eq(Expr::var(anchor), res))
    }
    pub fn forall_in(x: &str, ty: Type, ltc: Ltc, body: Formula) -> Formula {
        Formula::ForallIn { var: ident(x), ty, ltc, body: Box::new(body) }
    }
    pub fn exists_in(x: &str, ty: Type, ltc: Ltc, body: Formula) -> Formula {
        Formula::ExistsIn { var: ident(x), ty, ltc, body: Box::new(body) }
    }
    pub fn forall_tcv(d: &str, body: Formula) -> Formula {
        Formula::ForallTcv { tcv: ident(d), body: Box::new(body) }
    }
    pub fn exists_tcv(d: &str, body: Formula) -> Formula {
        Formula::ExistsTcv { tcv: ident(d), body: Box::new(body) }
    }
    pub fn fresh(e: Expr, ltc: Ltc) -> Formula {
        Formula::Fresh(e, ltc)
    }
    pub fn conj(parts: Vec<Formula>) -> Formula {
        let mut it = parts.into_iter().rev();
        match it.next() {
            None => Formula::True,
            Some(last) => it.fold(last, |acc, f| Formula::and(f, acc)),
        }
    }

    /// Expand derived connectives into the `~ /\ ∀` core.
    pub fn core(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Fresh(..) => self.clone(),
            Formula::Not(a) => Formula::not(a.core()),
            Formula::And(a, b) => Formula::and(a.core(), b.core()),
            Formula::Or(a, b) => {
                Formula::not(Formula::and(Formula::not(a.core()), Formula::not(b.core())))
            }
            Formula::Implies(a, b) => Formula::not(Formula::and(a.core(), Formula::not(b.core()))),
            Formula::Eval { fun, arg, anchor, body } => Formula::Eval {
                fun: fun.clone(),
                arg: arg.clone(),
                anchor: anchor.clone(),
                body: Box::new(body.core()),
            },
            Formula::ForallIn { var, ty, ltc, body } => Formula::ForallIn {
                var: var.clone(),
                ty: ty.clone(),
                ltc: ltc.clone(),
                body: Box::new(body.core()),
            },
            Formula::ExistsIn { var, ty, ltc, body } => Formula::not(Formula::ForallIn {
                var: var.clone(),
                ty: ty.clone(),
                ltc: ltc.clone(),
                body: Box::new(Formula::not(body.core())),
            }),
            Formula::ForallTcv { tcv, body } => {
                Formula::ForallTcv { tcv: tcv.clone(), body: Box::new(body.core()) }
            }
            Formula::ExistsTcv { tcv, body } => Formula::not(Formula::ForallTcv {
                tcv: tcv.clone(),
                body: Box::new(Formula::not(body.core())),
            }),
        }
    }

    /// Replace every freshness atom `e # Γ0` by `∀z:Nm∈Γ0. e ≠ z`.
    pub fn expand_fresh(&self) -> Formula {
        self.map_children(&|f| f.expand_fresh(), &|f| match f {
            Formula::Fresh(e, g) => {
                let mut taken = e.fv();
                taken.extend(g.fv());
                let z = crate::term::fresh_ident("z", |c| taken.contains(c));
                Some(Formula::ForallIn {
                    var: z.clone(),
                    ty: Type::Nm,
                    ltc: g.clone(),
                    body: Box::new(Formula::neq(e.clone(), Expr::Var(z))),
                })
            }
            _ => None,
        })
    }

    fn map_children(
        &self,
        rec: &dyn Fn(&Formula) -> Formula,
        leaf: &dyn Fn(&Formula) -> Option<Formula>,
    ) -> Formula {
        if let Some(r) = leaf(self) {
            return r;
        }
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Fresh(..) => self.clone(),
            Formula::Not(a) => Formula::not(rec(a)),
            Formula::And(a, b) => Formula::and(rec(a), rec(b)),
            Formula::Or(a, b) => Formula::or(rec(a), rec(b)),
            Formula::Implies(a, b) => Formula::implies(rec(a), rec(b)),
            Formula::Eval { fun, arg, anchor, body } => Formula::Eval {
                fun: fun.clone(),
                arg: arg.clone(),
                anchor: anchor.clone(),
                body: Box::new(rec(body)),
            },
            Formula::ForallIn { var, ty, ltc, body } => Formula::ForallIn {
                var: var.clone(),
                ty: ty.clone(),
                ltc: ltc.clone(),
                body: Box::new(rec(body)),
            },
            Formula::ExistsIn { var, ty, ltc, body } => Formula::ExistsIn {
                var: var.clone(),
                ty: ty.clone(),
                ltc: ltc.clone(),
                body: Box::new(rec(body)),
            },
            Formula::ForallTcv { tcv, body } => {
                Formula::ForallTcv { tcv: tcv.clone(), body: Box::new(rec(body)) }
            }
            Formula::ExistsTcv { tcv, body } => {
                Formula::ExistsTcv { tcv: tcv.clone(), body: Box::new(rec(body)) }
            }
        }
    }

    pub fn fv(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.fv_into(&mut out);
        out
    }

    fn fv_into(&self, out: &mut BTreeSet<Ident>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => {
                a.fv_into(out);
                b.fv_into(out);
            }
            Formula::Fresh(e, g) => {
                e.fv_into(out);
                out.extend(g.fv());
            }
            Formula::Not(a) => a.fv_into(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.fv_into(out);
                b.fv_into(out);
            }
            Formula::Eval { fun, arg, anchor, body } => {
                fun.fv_into(out);
                arg.fv_into(out);
                let mut inner = body.fv();
                inner.remove(anchor);
                out.extend(inner);
            }
            Formula::ForallIn { var, ltc, body, .. } | Formula::ExistsIn { var, ltc, body, .. } => {
                out.extend(ltc.fv());
                let mut inner = body.fv();
                inner.remove(var);
                out.extend(inner);
            }
            Formula::ForallTcv { body, .. } | Formula::ExistsTcv { body, .. } => body.fv_into(out),
        }
    }

    pub fn ftcv(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.ftcv_into(&mut out);
        out
    }

    fn ftcv_into(&self, out: &mut BTreeSet<Ident>) {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) => {}
            Formula::Fresh(_, g) => out.extend(g.ftcv()),
            Formula::Not(a) => a.ftcv_into(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.ftcv_into(out);
                b.ftcv_into(out);
            }
            Formula::Eval { body, .. } => body.ftcv_into(out),
            Formula::ForallIn { ltc, body, .. } | Formula::ExistsIn { ltc, body, .. } => {
                out.extend(ltc.ftcv());
                body.ftcv_into(out);
            }
            Formula::ForallTcv { tcv, body } | Formula::ExistsTcv { tcv, body } => {
                let mut inner = body.ftcv();
                inner.remove(tcv);
                out.extend(inner);
            }
        }
    }

    /// All identifiers bound anywhere inside the formula.
    pub fn bound_names(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.bound_into(&mut out);
        out
    }

    fn bound_into(&self, out: &mut BTreeSet<Ident>) {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Fresh(..) => {}
            Formula::Not(a) => a.bound_into(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.bound_into(out);
                b.bound_into(out);
            }
            Formula::Eval { anchor, body, .. } => {
                out.insert(anchor.clone());
                body.bound_into(out);
            }
            Formula::ForallIn { var, body, .. } | Formula::ExistsIn { var, body, .. } => {
                out.insert(var.clone());
                body.bound_into(out);
            }
            Formula::ForallTcv { tcv, body } | Formula::ExistsTcv { tcv, body } => {
                out.insert(tcv.clone());
                body.bound_into(out);
            }
        }
    }

    /// Every identifier occurring in the formula, free or bound.
    pub fn all_names(&self) -> BTreeSet<Ident> {
        let mut out = self.bound_names();
        out.extend(self.fv());
        out.extend(self.ftcv());
        out
    }

    /// Rename free occurrences of a variable (never captured: `to` must be fresh).
    pub fn rename_var(&self, from: &str, to: &Ident) -> Formula {
        let e = Expr::Var(to.clone());
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Eq(a, b) => Formula::Eq(a.subst(from, &e), b.subst(from, &e)),
            Formula::Fresh(s, g) => Formula::Fresh(s.subst(from, &e), rename_ltc_var(g, from, to)),
            Formula::Not(a) => Formula::not(a.rename_var(from, to)),
            Formula::And(a, b) => Formula::and(a.rename_var(from, to), b.rename_var(from, to)),
            Formula::Or(a, b) => Formula::or(a.rename_var(from, to), b.rename_var(from, to)),
            Formula::Implies(a, b) => {
                Formula::implies(a.rename_var(from, to), b.rename_var(from, to))
            }
            Formula::Eval { fun, arg, anchor, body } => Formula::Eval {
                fun: fun.subst(from, &e),
                arg: arg.subst(from, &e),
                anchor: anchor.clone(),
                body: if &**anchor == from { body.clone() } else { Box::new(body.rename_var(from, to)) },
            },
            Formula::ForallIn { var, ty, ltc, body } => Formula::ForallIn {
                var: var.clone(),
                ty: ty.clone(),
                ltc: rename_ltc_var(ltc, from, to),
                body: if &**var == from { body.clone() } else { Box::new(body.rename_var(from, to)) },
            },
            Formula::ExistsIn { var, ty, ltc, body } => Formula::ExistsIn {
                var: var.clone(),
                ty: ty.clone(),
                ltc: rename_ltc_var(ltc, from, to),
                body: if &**var == from { body.clone() } else { Box::new(body.rename_var(from, to)) },
            },
            Formula::ForallTcv { tcv, body } => {
                Formula::ForallTcv { tcv: tcv.clone(), body: Box::new(body.rename_var(from, to)) }
            }
            Formula::ExistsTcv { tcv, body } => {
                Formula::ExistsTcv { tcv: tcv.clone(), body: Box::new(body.rename_var(from, to)) }
            }
        }
    }

    /// Rename free occurrences of a TCV.
    pub fn rename_tcv(&self, from: &str, to: &Ident) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) => self.clone(),
            Formula::Fresh(s, g) => Formula::Fresh(s.clone(), rename_ltc_tcv(g, from, to)),
            Formula::Not(a) => Formula::not(a.rename_tcv(from, to)),
            Formula::And(a, b) => Formula::and(a.rename_tcv(from, to), b.rename_tcv(from, to)),
            Formula::Or(a, b) => Formula::or(a.rename_tcv(from, to), b.rename_tcv(from, to)),
            Formula::Implies(a, b) => {
                Formula::implies(a.rename_tcv(from, to), b.rename_tcv(from, to))
            }
            Formula::Eval { fun, arg, anchor, body } => Formula::Eval {
                fun: fun.clone(),
                arg: arg.clone(),
                anchor: anchor.clone(),
                body: Box::new(body.rename_tcv(from, to)),
            },
            Formula::ForallIn { var, ty, ltc, body } => Formula::ForallIn {
                var: var.clone(),
                ty: ty.clone(),
                ltc: rename_ltc_tcv(ltc, from, to),
                body: Box::new(body.rename_tcv(from, to)),
            },
            Formula::ExistsIn { var, ty, ltc, body } => Formula::ExistsIn {
                var: var.clone(),
                ty: ty.clone(),
                ltc: rename_ltc_tcv(ltc, from, to),
                body: Box::new(body.rename_tcv(from, to)),
            },
            Formula::ForallTcv { tcv, body } => Formula::ForallTcv {
                tcv: tcv.clone(),
                body: if &**tcv == from { body.clone() } else { Box::new(body.rename_tcv(from, to)) },
            },
            Formula::ExistsTcv { tcv, body } => Formula::ExistsTcv {
                tcv: tcv.clone(),
                body: if &**tcv == from { body.clone() } else { Box::new(body.rename_tcv(from, to)) },
            },
        }
    }

    /// Canonical representative of the alpha-equivalence class.
    pub fn canon(&self) -> Formula {
        self.canon_at(0)
    }

    fn canon_at(&self, depth: usize) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Fresh(..) => self.clone(),
            Formula::Not(a) => Formula::not(a.canon_at(depth)),
            Formula::And(a, b) => Formula::and(a.canon_at(depth), b.canon_at(depth)),
            Formula::Or(a, b) => Formula::or(a.canon_at(depth), b.canon_at(depth)),
            Formula::Implies(a, b) => Formula::implies(a.canon_at(depth), b.canon_at(depth)),
            Formula::Eval { fun, arg, anchor, body } => {
                let c = canon_name(depth);
                Formula::Eval {
                    fun: fun.clone(),
                    arg: arg.clone(),
                    anchor: c.clone(),
                    body: Box::new(body.rename_var(anchor, &c).canon_at(depth + 1)),
                }
            }
            Formula::ForallIn { var, ty, ltc, body } => {
                let c = canon_name(depth);
                Formula::ForallIn {
                    var: c.clone(),
                    ty: ty.clone(),
                    ltc: ltc.clone(),
                    body: Box::new(body.rename_var(var, &c).canon_at(depth + 1)),
                }
            }
            Formula::ExistsIn { var, ty, ltc, body } => {
                let c = canon_name(depth);
                Formula::ExistsIn {
                    var: c.clone(),
                    ty: ty.clone(),
                    ltc: ltc.clone(),
                    body: Box::new(body.rename_var(var, &c).canon_at(depth + 1)),
                }
            }
            Formula::ForallTcv { tcv, body } => {
                let c = canon_name(depth);
                Formula::ForallTcv {
                    tcv: c.clone(),
                    body: Box::new(body.rename_tcv(tcv, &c).canon_at(depth + 1)),
                }
            }
            Formula::ExistsTcv { tcv, body } => {
                let c = canon_name(depth);
                Formula::ExistsTcv {
                    tcv: c.clone(),
                    body: Box::new(body.rename_tcv(tcv, &c).canon_at(depth + 1)),
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False => 1,
            Formula::Eq(a, b) => 1 + a.size() + b.size(),
            Formula::Fresh(e, g) => 1 + e.size() + g.len(),
            Formula::Not(a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Eval { fun, arg, body, .. } => 1 + fun.size() + arg.size() + body.size(),
            Formula::ForallIn { ltc, body, .. } | Formula::ExistsIn { ltc, body, .. } => {
                1 + ltc.len() + body.size()
            }
            Formula::ForallTcv { body, .. } | Formula::ExistsTcv { body, .. } => 1 + body.size(),
        }
    }
}

fn canon_name(depth: usize) -> Ident {
    ident(&format!("%{depth}"))
}

fn rename_ltc_var(g: &Ltc, from: &str, to: &Ident) -> Ltc {
    Ltc(g
        .0
        .iter()
        .map(|e| match e {
            LtcEntry::Var(x, t) if &**x == from => LtcEntry::Var(to.clone(), t.clone()),
            other => other.clone(),
        })
        .collect())
}

fn rename_ltc_tcv(g: &Ltc, from: &str, to: &Ident) -> Ltc {
    Ltc(g
        .0
        .iter()
        .map(|e| match e {
            LtcEntry::Tcv(d) if &**d == from => LtcEntry::Tcv(to.clone()),
            other => other.clone(),
        })
        .collect())
}

/// Alpha-equivalence of formulae.
pub fn alpha_eq_formula(a: &Formula, b: &Formula) -> bool {
    a == b || a.canon() == b.canon()
}

// Printing. Levels: 0 implication and quantifiers, 1 disjunction, 2 conjunction, 3 unary.
fn formula_prec(a: &Formula) -> u8 {
    match a {
        Formula::Implies(..)
        | Formula::ForallIn { .. }
        | Formula::ExistsIn { .. }
        | Formula::ForallTcv { .. }
        | Formula::ExistsTcv { .. } => 0,
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        _ => 3,
    }
}

fn fmt_formula(a: &Formula, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
    let paren = formula_prec(a) < ctx;
    if paren {
        write!(f, "(")?;
    }
    match a {
        Formula::True => write!(f, "T")?,
        Formula::False => write!(f, "F")?,
        Formula::Eq(x, y) => write!(f, "{x} = {y}")?,
        Formula::Not(inner) => match &**inner {
            Formula::Eq(x, y) => write!(f, "{x} != {y}")?,
            _ => {
                write!(f, "~")?;
                fmt_formula(inner, f, 3)?;
            }
        },
        Formula::And(x, y) => {
            fmt_formula(x, f, 3)?;
            write!(f, " /\\ ")?;
            fmt_formula(y, f, 2)?;
        }
        Formula::Or(x, y) => {
            fmt_formula(x, f, 2)?;
            write!(f, " \\/ ")?;
            fmt_formula(y, f, 1)?;
        }
        Formula::Implies(x, y) => {
            fmt_formula(x, f, 1)?;
            write!(f, " -> ")?;
            fmt_formula(y, f, 0)?;
        }
        Formula::Eval { fun, arg, anchor, body } => {
            write!(f, "[")?;
            fmt_expr(fun, f, true)?;
            write!(f, " ")?;
            fmt_expr(arg, f, true)?;
            write!(f, " => {anchor}] ")?;
            fmt_formula(body, f, 3)?;
        }
        Formula::ForallIn { var, ty, ltc, body } => {
            write!(f, "all {var}:{ty} in {ltc}. ")?;
            fmt_formula(body, f, 0)?;
        }
        Formula::ExistsIn { var, ty, ltc, body } => {
            write!(f, "ex {var}:{ty} in {ltc}. ")?;
            fmt_formula(body, f, 0)?;
        }
        Formula::ForallTcv { tcv, body } => {
            write!(f, "allctx {tcv}. ")?;
            fmt_formula(body, f, 0)?;
        }
        Formula::ExistsTcv { tcv, body } => {
            write!(f, "exctx {tcv}. ")?;
            fmt_formula(body, f, 0)?;
        }
        Formula::Fresh(e, g) => {
            fmt_expr(e, f, true)?;
            write!(f, " # {g}")?;
        }
    }
    if paren {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_formula(self, f, 0)
    }
}

/// `{pre} program :anchor {post}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub pre: Formula,
    pub program: Term,
    pub anchor: Ident,
    pub post: Formula,
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}} {} :{} {{{}}}", self.pre, self.program, self.anchor, self.post)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("unbound variable `{0}`")]
    Unbound(Ident),
    #[error("unbound type-context variable `{0}`")]
    UnboundTcv(Ident),
    #[error("duplicate LTC entry `{0}`")]
    DuplicateEntry(Ident),
    #[error("`{expr}` has type {found}, expected {expected}")]
    Mismatch { expr: String, expected: Type, found: Type },
    #[error("`{expr}` has type {found}, which is not a product")]
    NotProduct { expr: String, found: Type },
    #[error("`{expr}` has type {found}, which is not a function")]
    NotFunction { expr: String, found: Type },
    #[error("equality is not defined at type {0}")]
    EqType(Type),
    #[error("LTC {inner} is not subsumed by {outer} in `{formula}`")]
    NotSubsumed { outer: Ltc, inner: Ltc, formula: String },
    #[error("binder `{0}` clashes with an LTC entry")]
    BinderClash(Ident),
    #[error("program contains names: {0}")]
    NameInProgram(Term),
    #[error("program: {0}")]
    Program(#[from] crate::term::TypeError),
}

pub fn typecheck_expression(ltc: &Ltc, e: &Expr) -> Result<Type, LogicError> {
    match e {
        Expr::Var(x) => ltc.var_type(x).cloned().ok_or_else(|| LogicError::Unbound(x.clone())),
        Expr::Const(c) => Ok(c.ty()),
        Expr::Pair(a, b) => Ok(Type::prod(typecheck_expression(ltc, a)?, typecheck_expression(ltc, b)?)),
        Expr::Proj(i, a) => match typecheck_expression(ltc, a)? {
            Type::Prod(l, r) => Ok(if *i == 1 { *l } else { *r }),
            other => Err(LogicError::NotProduct { expr: a.to_string(), found: other }),
        },
        Expr::EqTest(a, b) => {
            let ta = typecheck_expression(ltc, a)?;
            let tb = typecheck_expression(ltc, b)?;
            if ta != tb {
                return Err(LogicError::Mismatch { expr: b.to_string(), expected: ta, found: tb });
            }
            if !ta.admits_eq() {
                return Err(LogicError::EqType(ta));
            }
            Ok(Type::Bool)
        }
    }
}

/// Check `ltc` is well formed: no duplicates.
pub fn check_ltc(ltc: &Ltc) -> Result<(), LogicError> {
    let mut seen = BTreeSet::new();
    for e in &ltc.0 {
        if !seen.insert(e.name().clone()) {
            return Err(LogicError::DuplicateEntry(e.name().clone()));
        }
    }
    Ok(())
}

fn check_sub_ltc(ltc: &Ltc, inner: &Ltc, a: &Formula) -> Result<(), LogicError> {
    check_ltc(inner)?;
    if ltc.subsumes(inner) {
        Ok(())
    } else {
        Err(LogicError::NotSubsumed { outer: ltc.clone(), inner: inner.clone(), formula: a.to_string() })
    }
}

fn extend(ltc: &Ltc, entry: LtcEntry) -> Result<Ltc, LogicError> {
    if ltc.contains(entry.name()) {
        return Err(LogicError::BinderClash(entry.name().clone()));
    }
    let mut v = ltc.0.clone();
    v.push(entry);
    Ok(Ltc(v))
}

/// `ltc ⊩ a`
pub fn typecheck_formula(ltc: &Ltc, a: &Formula) -> Result<(), LogicError> {
    check_ltc(ltc)?;
    tc_formula(ltc, a)
}

fn tc_formula(ltc: &Ltc, a: &Formula) -> Result<(), LogicError> {
    match a {
        // T, F, ~ and the binary connectives are completed structurally.
        Formula::True | Formula::False => Ok(()),
        Formula::Eq(x, y) => {
            let tx = typecheck_expression(ltc, x)?;
            let ty = typecheck_expression(ltc, y)?;
            if tx != ty {
                return Err(LogicError::Mismatch { expr: y.to_string(), expected: tx, found: ty });
            }
            Ok(())
        }
        Formula::Fresh(e, g) => {
            let te = typecheck_expression(ltc, e)?;
            if te != Type::Nm {
                return Err(LogicError::Mismatch { expr: e.to_string(), expected: Type::Nm, found: te });
            }
            check_sub_ltc(ltc, g, a)
        }
        Formula::Not(x) => tc_formula(ltc, x),
        Formula::And(x, y) | Formula::Or(x, y) | Formula::Implies(x, y) => {
            tc_formula(ltc, x)?;
            tc_formula(ltc, y)
        }
        Formula::Eval { fun, arg, anchor, body } => {
            let tf = typecheck_expression(ltc, fun)?;
            let ta = typecheck_expression(ltc, arg)?;
            match tf {
                Type::Arrow(dom, cod) => {
                    if *dom != ta {
                        return Err(LogicError::Mismatch { expr: arg.to_string(), expected: *dom, found: ta });
                    }
                    let inner = extend(ltc, LtcEntry::Var(anchor.clone(), *cod))?;
                    tc_formula(&inner, body)
                }
                other => Err(LogicError::NotFunction { expr: fun.to_string(), found: other }),
            }
        }
        Formula::ForallIn { var, ty, ltc: g, body } | Formula::ExistsIn { var, ty, ltc: g, body } => {
            check_sub_ltc(ltc, g, a)?;
            let inner = extend(ltc, LtcEntry::Var(var.clone(), ty.clone()))?;
            tc_formula(&inner, body)
        }
        Formula::ForallTcv { tcv, body } | Formula::ExistsTcv { tcv, body } => {
            let inner = extend(ltc, LtcEntry::Tcv(tcv.clone()))?;
            tc_formula(&inner, body)
        }
    }
}

/// `ltc ⊩ {pre} M :m {post}`; returns the program's type.
pub fn typecheck_triple(ltc: &Ltc, t: &Triple) -> Result<Type, LogicError> {
    if !t.program.is_compile_time() {
        return Err(LogicError::NameInProgram(t.program.clone()));
    }
    typecheck_formula(ltc, &t.pre)?;
    let ty = crate::term::typecheck_term(&ltc.to_stc(), &t.program)?;
    let post_ltc = extend(ltc, LtcEntry::Var(t.anchor.clone(), ty.clone()))?;
    typecheck_formula(&post_ltc, &t.post)?;
    Ok(ty)
}

/// Resolve LTC references in a triple: the precondition against `ltc`, the
/// postcondition against `ltc` plus the anchor when the program typechecks.
pub fn resolve_triple(ltc: &Ltc, mut t: Triple) -> Triple {
    t.pre = resolve_ltc_refs(ltc, &t.pre);
    let post_ltc = match crate::term::typecheck_term(&ltc.to_stc(), &t.program) {
        Ok(ty) => ltc.with_var(&t.anchor, ty),
        Err(_) => ltc.clone(),
    };
    t.post = resolve_ltc_refs(&post_ltc, &t.post);
    t
}

/// Resolve bare LTC identifiers (parsed as TCVs) that name variables in scope.
pub fn resolve_ltc_refs(ltc: &Ltc, a: &Formula) -> Formula {
    fn fix(scope: &HashMap<Ident, Type>, g: &Ltc) -> Ltc {
        Ltc(g
            .0
            .iter()
            .map(|e| match e {
                LtcEntry::Tcv(d) => match scope.get(d) {
                    Some(t) => LtcEntry::Var(d.clone(), t.clone()),
                    None => e.clone(),
                },
                other => other.clone(),
            })
            .collect())
    }
    fn go(scope: &mut HashMap<Ident, Type>, tcvs: &BTreeSet<Ident>, a: &Formula) -> Formula {
        match a {
            Formula::True | Formula::False | Formula::Eq(..) => a.clone(),
            Formula::Fresh(e, g) => Formula::Fresh(e.clone(), fix(scope, g)),
            Formula::Not(x) => Formula::not(go(scope, tcvs, x)),
            Formula::And(x, y) => Formula::and(go(scope, tcvs, x), go(scope, tcvs, y)),
            Formula::Or(x, y) => Formula::or(go(scope, tcvs, x), go(scope, tcvs, y)),
            Formula::Implies(x, y) => Formula::implies(go(scope, tcvs, x), go(scope, tcvs, y)),
            Formula::Eval { fun, arg, anchor, body } => {
                // The anchor's type is only known after typing the function; use a scope
                // lookup on the function expression when it is a variable.
                let cod = match expr_type_in(scope, fun) {
                    Some(Type::Arrow(_, cod)) => Some(*cod),
                    _ => None,
                };
                let saved = scope.remove(anchor);
                if let Some(c) = cod {
                    scope.insert(anchor.clone(), c);
                }
                let b = go(scope, tcvs, body);
                scope.remove(anchor);
                if let Some(s) = saved {
                    scope.insert(anchor.clone(), s);
                }
                Formula::Eval { fun: fun.clone(), arg: arg.clone(), anchor: anchor.clone(), body: Box::new(b) }
            }
            Formula::ForallIn { var, ty, ltc, body } | Formula::ExistsIn { var, ty, ltc, body } => {
                let g = fix(scope, ltc);
                let saved = scope.insert(var.clone(), ty.clone());
                let b = go(scope, tcvs, body);
                scope.remove(var);
                if let Some(s) = saved {
                    scope.insert(var.clone(), s);
                }
                if matches!(a, Formula::ForallIn { .. }) {
                    Formula::ForallIn { var: var.clone(), ty: ty.clone(), ltc: g, body: Box::new(b) }
                } else {
                    Formula::ExistsIn { var: var.clone(), ty: ty.clone(), ltc: g, body: Box::new(b) }
                }
            }
            Formula::ForallTcv { tcv, body } | Formula::ExistsTcv { tcv, body } => {
                let saved = scope.remove(tcv);
                let b = go(scope, tcvs, body);
                if let Some(s) = saved {
                    scope.insert(tcv.clone(), s);
                }
                if matches!(a, Formula::ForallTcv { .. }) {
                    Formula::ForallTcv { tcv: tcv.clone(), body: Box::new(b) }
                } else {
                    Formula::ExistsTcv { tcv: tcv.clone(), body: Box::new(b) }
                }
            }
        }
    }
    let mut scope: HashMap<Ident, Type> = ltc.to_stc().into_iter().collect();
    go(&mut scope, &ltc.ftcv(), a)
}

fn expr_type_in(scope: &HashMap<Ident, Type>, e: &Expr) -> Option<Type> {
    match e {
        Expr::Var(x) => scope.get(x).cloned(),
        Expr::Const(c) => Some(c.ty()),
        Expr::Pair(a, b) => Some(Type::prod(expr_type_in(scope, a)?, expr_type_in(scope, b)?)),
        Expr::Proj(i, a) => match expr_type_in(scope, a)? {
            Type::Prod(l, r) => Some(if *i == 1 { *l } else { *r }),
            _ => None,
        },
        Expr::EqTest(..) => Some(Type::Bool),
    }
}

/// Resolve a bare-identifier LTC literal against an ambient LTC.
pub fn resolve_ltc(ambient: &Ltc, g: &Ltc) -> Ltc {
    Ltc(g
        .0
        .iter()
        .map(|e| match e {
            LtcEntry::Tcv(d) => match ambient.var_type(d) {
                Some(t) => LtcEntry::Var(d.clone(), t.clone()),
                None => e.clone(),
            },
            other => other.clone(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nm_ltc(names: &[&str]) -> Ltc {
        Ltc(names.iter().map(|n| LtcEntry::Var(ident(n), Type::Nm)).collect())
    }

    #[test]
    fn projection_of_pair_types() {
        let g = nm_ltc(&["x"]);
        let e = Expr::proj(1, Expr::pair(Expr::var("x"), Expr::bool(true)));
        assert_eq!(typecheck_expression(&g, &e).unwrap(), Type::Nm);
        assert_eq!(typecheck_expression(&g, &Expr::var("x")).unwrap(), Type::Nm);
        assert!(matches!(typecheck_expression(&Ltc::empty(), &Expr::var("x")), Err(LogicError::Unbound(_))));
    }

    #[test]
    fn fresh_typing() {
        let g = nm_ltc(&["x"]);
        typecheck_formula(&g, &Formula::fresh(Expr::var("x"), Ltc::empty())).unwrap();
        let b = Ltc(vec![LtcEntry::Var(ident("x"), Type::Bool)]);
        assert!(typecheck_formula(&b, &Formula::fresh(Expr::var("x"), Ltc::empty())).is_err());
    }

    #[test]
    fn gensym_post_types() {
        let g = Ltc::empty().with_var("u", Type::arrow(Type::Unit, Type::Nm));
        let post = Formula::forall_tcv(
            "d",
            Formula::eval(Expr::var("u"), Expr::unit(), "m", Formula::fresh(Expr::var("m"), Ltc::empty().with_tcv("d"))),
        );
        typecheck_formula(&g, &post).unwrap();
    }

    #[test]
    fn triple_rejects_names() {
        let t = Triple { pre: Formula::True, program: Term::Name(0), anchor: ident("m"), post: Formula::True };
        assert!(matches!(typecheck_triple(&Ltc::empty(), &t), Err(LogicError::NameInProgram(_))));
        let t = Triple {
            pre: Formula::True,
            program: Term::unit(),
            anchor: ident("m"),
            post: Formula::eq(Expr::var("m"), Expr::unit()),
        };
        typecheck_triple(&Ltc::empty(), &t).unwrap();
    }

    #[test]
    fn subsumption_is_ordered_subset() {
        let g = Ltc::empty().with_tcv("G").with_var("x", Type::Nm).with_var("u", Type::Nm);
        assert!(g.subsumes(&Ltc::empty()));
        assert!(g.subsumes(&Ltc::empty().with_tcv("G").with_var("u", Type::Nm)));
        assert!(!g.subsumes(&Ltc::empty().with_var("u", Type::Nm).with_tcv("G")));
        assert!(!g.subsumes(&Ltc::empty().with_var("u", Type::Bool)));
    }

    #[test]
    fn free_variables() {
        let g = Ltc::empty().with_var("y", Type::Nm);
        let a = Formula::forall_in("z", Type::Nm, g.clone(), Formula::neq(Expr::var("x"), Expr::var("z")));
        let fv = a.fv();
        assert!(fv.contains("x") && fv.contains("y") && !fv.contains("z"));
        let f = Formula::fresh(Expr::var("x"), g);
        assert_eq!(f.fv(), a.fv());
    }

    #[test]
    fn canon_identifies_alpha_variants() {
        let a = Formula::forall_tcv("d", Formula::fresh(Expr::var("x"), Ltc::empty().with_tcv("d")));
        let b = Formula::forall_tcv("e", Formula::fresh(Expr::var("x"), Ltc::empty().with_tcv("e")));
        assert!(alpha_eq_formula(&a, &b));
        let c = Formula::forall_tcv("e", Formula::fresh(Expr::var("x"), Ltc::empty().with_tcv("d")));
        assert!(!alpha_eq_formula(&a, &c));
    }

    #[test]
    fn fresh_expansion_typechecks_iff_primitive_does() {
        let g = nm_ltc(&["x", "y"]);
        let f = Formula::fresh(Expr::var("x"), nm_ltc(&["y"]));
        assert!(typecheck_formula(&g, &f).is_ok());
        assert!(typecheck_formula(&g, &f.expand_fresh()).is_ok());
        let bad = Formula::fresh(Expr::var("x"), nm_ltc(&["q"]));
        assert!(typecheck_formula(&g, &bad).is_err());
        assert!(typecheck_formula(&g, &bad.expand_fresh()).is_err());
    }
}
