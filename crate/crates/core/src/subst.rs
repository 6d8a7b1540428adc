//! Logical substitution of expressions for variables and of LTCs for TCVs.
//!
//! Both substitutions rewrite the LTCs embedded in quantifiers and freshness atoms:
//! replacing `x` by `e` turns an LTC mentioning `x` into one over `fv(e)` and the rest,
//! and replacing `δ` by `Γ0` splices `dom(Γ0)` in. New LTCs are ordered by the ambient.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{typecheck_expression, Expr, Formula, Ltc, LtcEntry};
use crate::term::{fresh_ident, Ident, Type};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("`{e}` is not free for `{x}` in `{formula}`")]
    NotFreeFor { e: Expr, x: Ident, formula: String },
    #[error("variable `{0}` of the substituent is not typed by the ambient LTC")]
    Untyped(Ident),
    #[error("bound name `{0}` clashes with the substituted LTC")]
    BoundClash(Ident),
}

/// A substitution together with the LTC it is applied under.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstWitness {
    pub target: SubstTarget,
    pub ambient: Ltc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubstTarget {
    ExprForVar { e: Expr, x: Ident },
    LtcForTcv { g0: Ltc, d: Ident },
}

impl SubstWitness {
    pub fn apply(&self, a: &Formula) -> Result<Formula, SubstError> {
        match &self.target {
            SubstTarget::ExprForVar { e, x } => subst_expr(a, e, x, &self.ambient),
            SubstTarget::LtcForTcv { g0, d } => subst_tcv(a, g0, d, &self.ambient),
        }
    }
}

/// `e` is free for `x` in `a`: no capture, and when `e` has a destructor, every embedded
/// LTC containing a free `x` already types `e` at the type of `x`.
pub fn free_for(e: &Expr, x: &str, a: &Formula) -> bool {
    let fve = e.fv();
    ff(e, &fve, x, a, false)
}

// `under` records that some enclosing binder captures a variable of `e`.
fn ff(e: &Expr, fve: &BTreeSet<Ident>, x: &str, a: &Formula, under: bool) -> bool {
    let ltc_ok = |g: &Ltc| -> bool {
        match g.var_type(x) {
            None => true,
            Some(ty) => {
                if under {
                    return false;
                }
                !e.has_destructor() || typecheck_expression(g, e).ok().as_ref() == Some(ty)
            }
        }
    };
    match a {
        Formula::True | Formula::False => true,
        Formula::Eq(l, r) => !(under && (l.mentions(x) || r.mentions(x))),
        Formula::Fresh(s, g) => !(under && s.mentions(x)) && ltc_ok(g),
        Formula::Not(p) => ff(e, fve, x, p, under),
        Formula::And(p, q) | Formula::Or(p, q) | Formula::Implies(p, q) => {
            ff(e, fve, x, p, under) && ff(e, fve, x, q, under)
        }
        Formula::Eval { fun, arg, anchor, body } => {
            if under && (fun.mentions(x) || arg.mentions(x)) {
                return false;
            }
            &**anchor == x || ff(e, fve, x, body, under || fve.contains(anchor))
        }
        Formula::ForallIn { var, ltc, body, .. } | Formula::ExistsIn { var, ltc, body, .. } => {
            ltc_ok(ltc) && (&**var == x || ff(e, fve, x, body, under || fve.contains(var)))
        }
        Formula::ForallTcv { body, .. } | Formula::ExistsTcv { body, .. } => ff(e, fve, x, body, under),
    }
}

/// Alpha-rename every binder of `a` whose name is in `avoid`.
pub fn rename_bound(a: &Formula, avoid: &BTreeSet<Ident>) -> Formula {
    let mut taken = a.all_names();
    taken.extend(avoid.iter().cloned());
    rb(a, avoid, &mut taken)
}

fn rb(a: &Formula, avoid: &BTreeSet<Ident>, taken: &mut BTreeSet<Ident>) -> Formula {
    let pick = |name: &Ident, taken: &mut BTreeSet<Ident>| -> Ident {
        let n = fresh_ident(name, |c| taken.contains(c));
        taken.insert(n.clone());
        n
    };
    match a {
        Formula::True | Formula::False | Formula::Eq(..) | Formula::Fresh(..) => a.clone(),
        Formula::Not(p) => Formula::not(rb(p, avoid, taken)),
        Formula::And(p, q) => Formula::and(rb(p, avoid, taken), rb(q, avoid, taken)),
        Formula::Or(p, q) => Formula::or(rb(p, avoid, taken), rb(q, avoid, taken)),
        Formula::Implies(p, q) => Formula::implies(rb(p, avoid, taken), rb(q, avoid, taken)),
        Formula::Eval { fun, arg, anchor, body } => {
            let (anchor, body) = if avoid.contains(anchor) {
                let n = pick(anchor, taken);
                (n.clone(), body.rename_var(anchor, &n))
            } else {
                (anchor.clone(), (**body).clone())
            };
            Formula::Eval { fun: fun.clone(), arg: arg.clone(), anchor, body: Box::new(rb(&body, avoid, taken)) }
        }
        Formula::ForallIn { var, ty, ltc, body } | Formula::ExistsIn { var, ty, ltc, body } => {
            let (var, body) = if avoid.contains(var) {
                let n = pick(var, taken);
                (n.clone(), body.rename_var(var, &n))
            } else {
                (var.clone(), (**body).clone())
            };
            let body = Box::new(rb(&body, avoid, taken));
            if matches!(a, Formula::ForallIn { .. }) {
                Formula::ForallIn { var, ty: ty.clone(), ltc: ltc.clone(), body }
            } else {
                Formula::ExistsIn { var, ty: ty.clone(), ltc: ltc.clone(), body }
            }
        }
        Formula::ForallTcv { tcv, body } | Formula::ExistsTcv { tcv, body } => {
            let (tcv, body) = if avoid.contains(tcv) {
                let n = pick(tcv, taken);
                (n.clone(), body.rename_tcv(tcv, &n))
            } else {
                (tcv.clone(), (**body).clone())
            };
            let body = Box::new(rb(&body, avoid, taken));
            if matches!(a, Formula::ForallTcv { .. }) {
                Formula::ForallTcv { tcv, body }
            } else {
                Formula::ExistsTcv { tcv, body }
            }
        }
    }
}

/// `a{|e/x|}` under `ambient`. Binders clashing with `fv(e)` are renamed first.
pub fn subst_expr(a: &Formula, e: &Expr, x: &str, ambient: &Ltc) -> Result<Formula, SubstError> {
    let fve = e.fv();
    let a = rename_bound(a, &fve);
    if !free_for(e, x, &a) {
        return Err(SubstError::NotFreeFor { e: e.clone(), x: x.into(), formula: a.to_string() });
    }
    let mut types = Vec::new();
    for y in &fve {
        match ambient.var_type(y) {
            Some(t) => types.push(LtcEntry::Var(y.clone(), t.clone())),
            None => return Err(SubstError::Untyped(y.clone())),
        }
    }
    Ok(se(&a, e, x, &types, ambient))
}

fn subst_ltc_expr(g: &Ltc, x: &str, fresh_entries: &[LtcEntry], ambient: &Ltc) -> Ltc {
    if !g.contains_var(x) {
        return g.clone();
    }
    let mut entries: Vec<LtcEntry> = g.remove_var(x).0;
    for en in fresh_entries {
        if !entries.iter().any(|o| o.name() == en.name()) {
            entries.push(en.clone());
        }
    }
    ambient.order_by(entries)
}

fn se(a: &Formula, e: &Expr, x: &str, fe: &[LtcEntry], amb: &Ltc) -> Formula {
    match a {
        Formula::True | Formula::False => a.clone(),
        Formula::Eq(l, r) => Formula::Eq(l.subst(x, e), r.subst(x, e)),
        Formula::Fresh(s, g) => Formula::Fresh(s.subst(x, e), subst_ltc_expr(g, x, fe, amb)),
        Formula::Not(p) => Formula::not(se(p, e, x, fe, amb)),
        Formula::And(p, q) => Formula::and(se(p, e, x, fe, amb), se(q, e, x, fe, amb)),
        Formula::Or(p, q) => Formula::or(se(p, e, x, fe, amb), se(q, e, x, fe, amb)),
        Formula::Implies(p, q) => Formula::implies(se(p, e, x, fe, amb), se(q, e, x, fe, amb)),
        Formula::Eval { fun, arg, anchor, body } => {
            let fun2 = fun.subst(x, e);
            let arg2 = arg.subst(x, e);
            let body2 = if &**anchor == x {
                (**body).clone()
            } else {
                let inner = match typecheck_expression(amb, &fun2) {
                    Ok(Type::Arrow(_, cod)) => amb.with_var(anchor, *cod),
                    _ => amb.clone(),
                };
                se(body, e, x, fe, &inner)
            };
            Formula::Eval { fun: fun2, arg: arg2, anchor: anchor.clone(), body: Box::new(body2) }
        }
        Formula::ForallIn { var, ty, ltc, body } | Formula::ExistsIn { var, ty, ltc, body } => {
            let g = subst_ltc_expr(ltc, x, fe, amb);
            let body2 = if &**var == x {
                (**body).clone()
            } else {
                se(body, e, x, fe, &amb.with_var(var, ty.clone()))
            };
            if matches!(a, Formula::ForallIn { .. }) {
                Formula::ForallIn { var: var.clone(), ty: ty.clone(), ltc: g, body: Box::new(body2) }
            } else {
                Formula::ExistsIn { var: var.clone(), ty: ty.clone(), ltc: g, body: Box::new(body2) }
            }
        }
        Formula::ForallTcv { tcv, body } | Formula::ExistsTcv { tcv, body } => {
            let body2 = Box::new(se(body, e, x, fe, &amb.with_tcv(tcv)));
            if matches!(a, Formula::ForallTcv { .. }) {
                Formula::ForallTcv { tcv: tcv.clone(), body: body2 }
            } else {
                Formula::ExistsTcv { tcv: tcv.clone(), body: body2 }
            }
        }
    }
}

/// `a{|g0/d|}` under `ambient`. A binder named in `dom(g0)` is an error; use
/// [`rename_bound`] beforehand to avoid it.
pub fn subst_tcv(a: &Formula, g0: &Ltc, d: &str, ambient: &Ltc) -> Result<Formula, SubstError> {
    let dom: BTreeSet<Ident> = g0.0.iter().map(|e| e.name().clone()).collect();
    st(a, g0, &dom, d, ambient)
}

fn subst_ltc_tcv(g: &Ltc, g0: &Ltc, d: &str, ambient: &Ltc) -> Ltc {
    if !g.contains_tcv(d) {
        return g.clone();
    }
    let mut entries = g0.0.clone();
    for en in g.remove_tcv(d).0 {
        if !entries.iter().any(|o| o.name() == en.name()) {
            entries.push(en);
        }
    }
    ambient.order_by(entries)
}

fn st(a: &Formula, g0: &Ltc, dom: &BTreeSet<Ident>, d: &str, amb: &Ltc) -> Result<Formula, SubstError> {
    let clash = |n: &Ident| -> Result<(), SubstError> {
        if dom.contains(n) {
            Err(SubstError::BoundClash(n.clone()))
        } else {
            Ok(())
        }
    };
    Ok(match a {
        Formula::True | Formula::False | Formula::Eq(..) => a.clone(),
        Formula::Fresh(s, g) => Formula::Fresh(s.clone(), subst_ltc_tcv(g, g0, d, amb)),
        Formula::Not(p) => Formula::not(st(p, g0, dom, d, amb)?),
        Formula::And(p, q) => Formula::and(st(p, g0, dom, d, amb)?, st(q, g0, dom, d, amb)?),
        Formula::Or(p, q) => Formula::or(st(p, g0, dom, d, amb)?, st(q, g0, dom, d, amb)?),
        Formula::Implies(p, q) => Formula::implies(st(p, g0, dom, d, amb)?, st(q, g0, dom, d, amb)?),
        Formula::Eval { fun, arg, anchor, body } => {
            clash(anchor)?;
            let inner = match typecheck_expression(amb, fun) {
                Ok(Type::Arrow(_, cod)) => amb.with_var(anchor, *cod),
                _ => amb.clone(),
            };
            Formula::Eval {
                fun: fun.clone(),
                arg: arg.clone(),
                anchor: anchor.clone(),
                body: Box::new(st(body, g0, dom, d, &inner)?),
            }
        }
        Formula::ForallIn { var, ty, ltc, body } | Formula::ExistsIn { var, ty, ltc, body } => {
            clash(var)?;
            let g = subst_ltc_tcv(ltc, g0, d, amb);
            let body2 = Box::new(st(body, g0, dom, d, &amb.with_var(var, ty.clone()))?);
            if matches!(a, Formula::ForallIn { .. }) {
                Formula::ForallIn { var: var.clone(), ty: ty.clone(), ltc: g, body: body2 }
            } else {
                Formula::ExistsIn { var: var.clone(), ty: ty.clone(), ltc: g, body: body2 }
            }
        }
        Formula::ForallTcv { tcv, .. } | Formula::ExistsTcv { tcv, .. } if &**tcv == d => a.clone(),
        Formula::ForallTcv { tcv, body } | Formula::ExistsTcv { tcv, body } => {
            clash(tcv)?;
            let body2 = Box::new(st(body, g0, dom, d, &amb.with_tcv(tcv))?);
            if matches!(a, Formula::ForallTcv { .. }) {
                Formula::ForallTcv { tcv: tcv.clone(), body: body2 }
            } else {
                Formula::ExistsTcv { tcv: tcv.clone(), body: body2 }
            }
        }
    })
}
