//! Axiom schemas and their side conditions.
//!
//! Each schema is checked as `lhs ⟹ rhs` at an ambient LTC. Schemas stated as
//! equivalences are accepted in either direction.

use std::collections::BTreeSet;

use super::{mismatch, side, AxiomId, KernelError, Witness, Witnesses};
use crate::classify::is_syn_ext_ind_in;
use crate::logic::{alpha_eq_formula, resolve_ltc, typecheck_expression, Expr, Formula, Ltc, LtcEntry};
use crate::subst::{rename_bound, subst_expr, subst_tcv};
use crate::term::{Ident, Type};

type Check = Result<(), KernelError>;

fn is_iff(id: AxiomId) -> bool {
    use AxiomId::*;
    matches!(id, Eq2 | Eq3 | U3 | U4 | U5 | F2 | Utc2 | Utc3 | Utc4 | E1 | E2 | E3 | Ext)
}

/// Check `ambient ⊩ lhs ⟹ rhs` is an instance of axiom `id` under the given witnesses.
pub fn check_axiom_instance(id: AxiomId, ambient: &Ltc, lhs: &Formula, rhs: &Formula, w: &Witnesses) -> Check {
    let forward = check_directed(id, ambient, lhs, rhs, w);
    if forward.is_err() && is_iff(id) {
        if check_directed(id, ambient, rhs, lhs, w).is_ok() {
            return Ok(());
        }
    }
    forward
}

fn check_directed(id: AxiomId, amb: &Ltc, l: &Formula, r: &Formula, w: &Witnesses) -> Check {
    use AxiomId::*;
    match id {
        Eq1 => eq1(amb, l, r, w),
        Eq2 => match r {
            Formula::Eq(a, b) if *l == Formula::True && a == b => Ok(()),
            _ => Err(mismatch("(eq2) expects T and e = e")),
        },
        Eq3 => match (l, r) {
            (Formula::Eq(a, b), Formula::Eq(c, d)) if a == d && b == c => Ok(()),
            _ => Err(mismatch("(eq3) expects a = b and b = a")),
        },
        Eq4 => match (l, r) {
            (Formula::And(p, q), Formula::Eq(a2, c2)) => match (&**p, &**q) {
                (Formula::Eq(a, b), Formula::Eq(b2, c)) if b == b2 && a == a2 && c == c2 => Ok(()),
                _ => Err(mismatch("(eq4) expects a = b /\\ b = c on the left")),
            },
            _ => Err(mismatch("(eq4) expects a = b /\\ b = c and a = c")),
        },
        U1 => u1(amb, l, r, w),
        U2 => u2(l, r),
        U3 => u3(amb, l, r),
        U4 => u4(l, r),
        U5 => u5(l, r),
        Ex1 => ex1(amb, l, r, w),
        Ex2 => ex2(amb, l, r),
        Ex3 => ex3(l, r),
        F1 => f1(amb, l, r),
        F2 => f2(l, r),
        F3 => f3(amb, l, r, w),
        F4 => f4(l, r),
        Utc1 => utc1(amb, l, r),
        Utc2 => utc2(amb, l, r),
        Utc3 => utc3(amb, l, r),
        Utc4 => utc4(l, r),
        E1 => e1(amb, l, r),
        E2 => e2(l, r),
        E3 => e3(amb, l, r),
        Ext => ext(amb, l, r),
    }
}

fn same(a: &Formula, b: &Formula) -> bool {
    alpha_eq_formula(a, b)
}

fn expr_witness<'a>(w: &'a Witnesses, key: &str) -> Result<Option<&'a Expr>, KernelError> {
    match w.get(key) {
        None => Ok(None),
        Some(Witness::Expr(e)) => Ok(Some(e)),
        Some(other) => Err(mismatch(format!("witness `{key}` must be an expression, got {other}"))),
    }
}

fn required_expr<'a>(w: &'a Witnesses, key: &str, id: &str) -> Result<&'a Expr, KernelError> {
    expr_witness(w, key)?.ok_or_else(|| mismatch(format!("({id}) needs the witness `{key}`")))
}

fn ext_ind(a: &Formula, amb: &Ltc, what: &str) -> Check {
    let r = is_syn_ext_ind_in(a, amb);
    if r.verdict {
        Ok(())
    } else {
        Err(side(format!("{what} is not Ext-Ind: {r}")))
    }
}

/// Rename the binder `from` of a body to `to`, so two quantifiers can be compared.
fn body_as(body: &Formula, from: &Ident, to: &Ident) -> Formula {
    if from == to {
        body.clone()
    } else {
        body.rename_var(from, to)
    }
}

fn tcv_body_as(body: &Formula, from: &Ident, to: &Ident) -> Formula {
    if from == to {
        body.clone()
    } else {
        body.rename_tcv(from, to)
    }
}

/// `g` splits into the ordered subsequences `g0` and `g1` with every entry in exactly one.
fn is_partition(g: &Ltc, g0: &Ltc, g1: &Ltc) -> bool {
    if g0.len() + g1.len() != g.len() {
        return false;
    }
    let (mut i, mut j) = (0, 0);
    for e in &g.0 {
        if g0.0.get(i) == Some(e) {
            i += 1;
        } else if g1.0.get(j) == Some(e) {
            j += 1;
        } else {
            return false;
        }
    }
    true
}

fn eq1(amb: &Ltc, l: &Formula, r: &Formula, w: &Witnesses) -> Check {
    let Formula::And(p, q) = l else { return Err(mismatch("(eq1) expects A /\\ x = e on the left")) };
    let want_x = expr_witness(w, "x")?;
    let want_e = expr_witness(w, "e")?;
    let mut last = mismatch("(eq1) found no equation x = e next to A");
    for (a, eqn) in [(&**p, &**q), (&**q, &**p)] {
        let Formula::Eq(s, t) = eqn else { continue };
        for (x, e) in [(s, t), (t, s)] {
            let Expr::Var(xn) = x else { continue };
            if want_x.is_some_and(|wx| wx != x) || want_e.is_some_and(|we| we != e) {
                continue;
            }
            match subst_expr(a, e, xn, amb) {
                Ok(s) if same(&s, r) => return Ok(()),
                Ok(s) => last = mismatch(format!("(eq1): A{{|{e}/{xn}|}} is `{s}`, not `{r}`")),
                Err(err) => last = side(format!("(eq1): {err}")),
            }
        }
    }
    Err(last)
}

fn u1(amb: &Ltc, l: &Formula, r: &Formula, w: &Witnesses) -> Check {
    let Formula::ForallIn { var, ty, ltc, body } = l else {
        return Err(mismatch("(u1) expects a universal quantifier on the left"));
    };
    let e = required_expr(w, "e", "u1")?;
    let g0 = resolve_ltc(amb, ltc);
    match typecheck_expression(&g0, e) {
        Ok(t) if &t == ty => {}
        Ok(t) => return Err(side(format!("(u1): {g0} types `{e}` at {t}, not {ty}"))),
        Err(err) => return Err(side(format!("(u1): `{e}` is not typable from {g0}: {err}"))),
    }
    let s = subst_expr(body, e, var, &amb.with_var(var, ty.clone())).map_err(|err| side(format!("(u1): {err}")))?;
    if same(&s, r) {
        Ok(())
    } else {
        Err(mismatch(format!("(u1): A{{|{e}/{var}|}} is `{s}`, not `{r}`")))
    }
}

fn u2(l: &Formula, r: &Formula) -> Check {
    let (Formula::ForallIn { var, ty, ltc, body }, Formula::And(p, q)) = (l, r) else {
        return Err(mismatch("(u2) expects a quantifier and a conjunction of two"));
    };
    let (
        Formula::ForallIn { var: v0, ty: t0, ltc: g0, body: b0 },
        Formula::ForallIn { var: v1, ty: t1, ltc: g1, body: b1 },
    ) = (&**p, &**q)
    else {
        return Err(mismatch("(u2) expects two quantifiers on the right"));
    };
    if t0 != ty || t1 != ty {
        return Err(mismatch("(u2): binder types differ"));
    }
    if !same(&body_as(b0, v0, var), body) || !same(&body_as(b1, v1, var), body) {
        return Err(mismatch("(u2): bodies differ"));
    }
    if !is_partition(ltc, g0, g1) {
        return Err(side(format!("(u2): {g0} and {g1} do not split {ltc}")));
    }
    Ok(())
}

fn u3(amb: &Ltc, l: &Formula, r: &Formula) -> Check {
    let Formula::ForallIn { var, body, .. } = r else {
        return Err(mismatch("(u3) expects A and a quantifier over A"));
    };
    if !same(body, l) {
        return Err(mismatch("(u3): the quantified body differs from A"));
    }
    if l.fv().contains(var) {
        return Err(side(format!("(u3): `{var}` is free in A")));
    }
    ext_ind(l, amb, "A")
}

fn u4(l: &Formula, r: &Formula) -> Check {
    let (Formula::ForallIn { var, ty, ltc, body }, Formula::And(p, q)) = (l, r) else {
        return Err(mismatch("(u4) expects a quantified conjunction and a conjunction"));
    };
    let Formula::And(a, b) = &**body else { return Err(mismatch("(u4) expects a conjunction under the quantifier")) };
    for (part, want) in [(p, a), (q, b)] {
        match &**part {
            Formula::ForallIn { var: v, ty: t, ltc: g, body: c } if t == ty && g == ltc => {
                if !same(&body_as(c, v, var), want) {
                    return Err(mismatch("(u4): conjunct bodies differ"));
                }
            }
            _ => return Err(mismatch("(u4) expects quantifiers over the same LTC")),
        }
    }
    Ok(())
}

fn u5(l: &Formula, r: &Formula) -> Check {
    match (l, r) {
        (
            Formula::ForallIn { var, ty, body, .. },
            Formula::ForallIn { var: v2, ty: t2, ltc: g2, body: b2 },
        ) if ty == t2 && g2.is_empty() => {
            if !same(&body_as(b2, v2, var), body) {
                return Err(mismatch("(u5): bodies differ"));
            }
            if !ty.is_nm_free() {
                return Err(side(format!("(u5): {ty} is not Nm-free")));
            }
            Ok(())
        }
        _ => Err(mismatch("(u5) expects a quantifier and the same quantifier over ()")),
    }
}

fn ex1(amb: &Ltc, l: &Formula, r: &Formula, w: &Witnesses) -> Check {
    let Formula::ExistsIn { var, ty, ltc, body } = r else {
        return Err(mismatch("(ex1) expects an existential on the right"));
    };
    let e = required_expr(w, "e", "ex1")?;
    if !amb.subsumes(ltc) && !ltc.0.iter().all(|en| amb.contains(en.name())) {
        return Err(side(format!("(ex1): {ltc} is not typed by {amb}")));
    }
    match typecheck_expression(ltc, e) {
        Ok(t) if &t == ty => {}
        Ok(t) => return Err(side(format!("(ex1): {ltc} types `{e}` at {t}, not {ty}"))),
        Err(err) => return Err(side(format!("(ex1): `{e}` is not typable from {ltc}: {err}"))),
    }
    let s = subst_expr(body, e, var, &amb.with_var(var, ty.clone())).map_err(|err| side(format!("(ex1): {err}")))?;
    if same(&s, l) {
        Ok(())
    } else {
        Err(mismatch(format!("(ex1): A{{|{e}/{var}|}} is `{s}`, not `{l}`")))
    }
}

fn var_eq(f: &Formula, c: &Ident) -> Option<Expr> {
    match f {
        Formula::Eq(Expr::Var(a), other) | Formula::Eq(other, Expr::Var(a)) if a == c => Some(other.clone()),
        _ => None,
    }
}

fn ex2(amb: &Ltc, l: &Formula, r: &Formula) -> Check {
    let Formula::Eval { fun, arg, anchor, body } = l else {
        return Err(mismatch("(ex2) expects an evaluation formula on the left"));
    };
    let Some(x) = var_eq(body, anchor) else { return Err(mismatch("(ex2) expects c = x under the evaluation")) };
    let Expr::Var(xn) = &x else { return Err(mismatch("(ex2): the result must be compared with a variable")) };
    let Formula::ExistsIn { var, ltc: g0, body: rb, .. } = r else {
        return Err(mismatch("(ex2) expects an existential on the right"));
    };
    if **rb != Formula::eq(x.clone(), Expr::Var(var.clone())) {
        return Err(mismatch(format!("(ex2) expects {xn} = {var} under the existential")));
    }
    if !amb.contains_var(xn) {
        return Err(side(format!("(ex2): `{xn}` is not in the ambient LTC")));
    }
    let in_g0 = |e: &Expr| match e {
        Expr::Var(v) => g0.contains_var(v),
        Expr::Const(_) => true,
        _ => false,
    };
    if !matches!(fun, Expr::Var(_)) || !in_g0(fun) || !in_g0(arg) {
        return Err(side(format!("(ex2): `{fun}` and `{arg}` must be in {g0}")));
    }
    if g0.contains_var(xn) {
        return Err(side(format!("(ex2): `{xn}` must not be in {g0}")));
    }
    Ok(())
}

fn ex3(l: &Formula, r: &Formula) -> Check {
    let Formula::ForallIn { var: y, ltc: empty, body, .. } = l else {
        return Err(mismatch("(ex3) expects a quantifier over () on the left"));
    };
    if !empty.is_empty() {
        return Err(side("(ex3): the outer quantifier must range over ()"));
    }
    let Formula::ExistsIn { var: z, ty: Type::Nm, ltc: g, body: inner } = &**body else {
        return Err(mismatch("(ex3) expects an existential over Nm"));
    };
    let Some(LtcEntry::Var(last, _)) = g.0.last() else { return Err(mismatch("(ex3): the LTC must end in y")) };
    if last != y {
        return Err(mismatch(format!("(ex3): the LTC must end in `{y}`")));
    }
    let g0 = Ltc(g.0[..g.0.len() - 1].to_vec());
    let Some(x) = var_eq(inner, z) else { return Err(mismatch("(ex3) expects x = z")) };
    if x.mentions(y) {
        return Err(side(format!("(ex3): `{x}` mentions `{y}`")));
    }
    match r {
        Formula::ExistsIn { var: z2, ty: Type::Nm, ltc: g2, body: b2 } if *g2 == g0 => {
            if var_eq(b2, z2).as_ref() == Some(&x) {
                Ok(())
            } else {
                Err(mismatch("(ex3): right-hand body differs"))
            }
        }
        _ => Err(mismatch(format!("(ex3) expects an existential over {g0} on the right"))),
    }
}

fn f1(amb: &Ltc, l: &Formula, r: &Formula) -> Check {
    let (Formula::Fresh(Expr::Var(x), g0), Formula::Fresh(Expr::Var(x2), g)) = (l, r) else {
        return Err(mismatch("(f1) expects x#Γ0 and x#Γ0+f"));
    };
    if x != x2 || g.len() != g0.len() + 1 || g.0[..g0.len()] != g0.0[..] {
        return Err(mismatch("(f1): the right LTC must be the left one plus f"));
    }
    let Some(LtcEntry::Var(f, fty)) = g.0.last() else { return Err(mismatch("(f1): f must be a variable")) };
    let Type::Arrow(_, cod) = fty else { return Err(side(format!("(f1): `{f}` is not a function"))) };
    if !cod.is_base() {
        return Err(side(format!("(f1): `{f}` returns {cod}, which is not a base type")));
    }
    let (Some(px), Some(pf)) = (amb.position(x), amb.position(f)) else {
        return Err(side("(f1): x and f must be in the ambient LTC"));
    };
    if pf < px {
        return Err(side(format!("(f1): `{f}` must come after `{x}`")));
    }
    let prefix = Ltc(amb.0[..px].to_vec());
    if !prefix.subsumes(g0) {
        return Err(side(format!("(f1): {g0} is not before `{x}`")));
    }
    Ok(())
}

fn f2(l: &Formula, r: &Formula) -> Check {
    let Formula::And(p, q) = l else { return Err(mismatch("(f2) expects a conjunction on the left")) };
    let (Formula::Fresh(x, g0), Formula::ForallIn { var, ty, ltc, body }) = (&**p, &**q) else {
        return Err(mismatch("(f2) expects x#Γ0 /\\ all y in Γ0"));
    };
    if ltc != g0 {
        return Err(mismatch("(f2): the freshness and quantifier LTCs differ"));
    }
    if x.mentions(var) {
        return Err(side(format!("(f2): `{x}` mentions `{var}`")));
    }
    let Formula::ForallIn { var: v2, ty: t2, ltc: g2, body: b2 } = r else {
        return Err(mismatch("(f2) expects a quantifier on the right"));
    };
    if t2 != ty || g2 != g0 {
        return Err(mismatch("(f2): quantifiers differ"));
    }
    let Formula::And(fr, a) = body_as(b2, v2, var) else {
        return Err(mismatch("(f2) expects a conjunction under the right quantifier"));
    };
    let want = Formula::fresh(x.clone(), g0.with_var(var, ty.clone()));
    if *fr != want || !same(&a, body) {
        return Err(mismatch(format!("(f2) expects `{want} /\\ A` under the quantifier")));
    }
    Ok(())
}

fn f3(amb: &Ltc, l: &Formula, r: &Formula, w: &Witnesses) -> Check {
    let Formula::Fresh(x, g0) = l else { return Err(mismatch("(f3) expects x#Γ0 on the left")) };
    let e = required_expr(w, "e", "f3")?;
    if *r != Formula::neq(x.clone(), e.clone()) {
        return Err(mismatch(format!("(f3) expects `{x} != {e}` on the right")));
    }
    let g0 = resolve_ltc(amb, g0);
    match typecheck_expression(&g0, e) {
        Ok(Type::Nm) => Ok(()),
        Ok(t) => Err(side(format!("(f3): {g0} types `{e}` at {t}, not Nm"))),
        Err(err) => Err(side(format!("(f3): `{e}` is not typable from {g0}: {err}"))),
    }
}

fn f4(l: &Formula, r: &Formula) -> Check {
    let (Formula::Fresh(x, g), Formula::And(p, q)) = (l, r) else {
        return Err(mismatch("(f4) expects x#Γ and a conjunction"));
    };
    match (&**p, &**q) {
        (Formula::Fresh(x0, g0), Formula::Fresh(x1, g1)) if x0 == x && x1 == x => {
            if is_partition(g, g0, g1) {
                Ok(())
            } else {
                Err(side(format!("(f4): {g0} and {g1} do not split {g}")))
            }
        }
        _ => Err(mismatch("(f4) expects two freshness atoms on the right")),
    }
}

fn utc1(amb: &Ltc, l: &Formula, r: &Formula) -> Check {
    let Formula::ForallTcv { tcv, body } = l else { return Err(mismatch("(utc1) expects allctx on the left")) };
    let avoid: BTreeSet<Ident> = amb.0.iter().map(|e| e.name().clone()).collect();
    let body = rename_bound(body, &avoid);
    let s = subst_tcv(&body, amb, tcv, amb).map_err(|err| side(format!("(utc1): {err}")))?;
    if same(&s, r) {
        Ok(())
    } else {
        Err(mismatch(format!("(utc1): A{{|{amb}/{tcv}|}} is `{s}`, not `{r}`")))
    }
}

fn utc2(amb: &Ltc, l: &Formula, r: &Formula) -> Check {
    let Formula::ForallIn { var, ty: Type::Nm, ltc, body } = l else {
        return Err(mismatch("(utc2) expects a quantifier over Nm on the left"));
    };
    if ltc != amb {
        return Err(side(format!("(utc2): the quantifier must range over the ambient {amb}")));
    }
    let Formula::ForallTcv { tcv, body: rb } = r else { return Err(mismatch("(utc2) expects allctx on the right")) };
    let Formula::ForallIn { var: v2, ty: Type::Nm, ltc: g2, body: b2 } = &**rb else {
        return Err(mismatch("(utc2) expects allctx d. all x:Nm in (Γ, d)"));
    };
    if *g2 != amb.with_tcv(tcv) {
        return Err(mismatch(format!("(utc2): the inner quantifier must range over {amb} + {tcv}")));
    }
    if !same(&body_as(b2, v2, var), body) {
        return Err(mismatch("(utc2): bodies differ"));
    }
    if body.ftcv().contains(tcv) {
        return Err(side(format!("(utc2): `{tcv}` occurs in A")));
    }
    ext_ind(body, &amb.with_var(var, Type::Nm), "A")
}

fn utc3(amb: &Ltc, l: &Formula, r: &Formula) -> Check {
    let Formula::ForallTcv { tcv, body } = r else { return Err(mismatch("(utc3) expects A and allctx d. A")) };
    if !same(body, l) {
        return Err(mismatch("(utc3): bodies differ"));
    }
    if l.ftcv().contains(tcv) {
        return Err(side(format!("(utc3): `{tcv}` occurs in A")));
    }
    ext_ind(l, amb, "A")
}

fn utc4(l: &Formula, r: &Formula) -> Check {
    let (Formula::ForallTcv { tcv, body }, Formula::And(p, q)) = (l, r) else {
        return Err(mismatch("(utc4) expects allctx over a conjunction and a conjunction"));
    };
    let Formula::And(a, b) = &**body else { return Err(mismatch("(utc4) expects a conjunction under allctx")) };
    for (part, want) in [(p, a), (q, b)] {
        match &**part {
            Formula::ForallTcv { tcv: d, body: c } if same(&tcv_body_as(c, d, tcv), want) => {}
            _ => return Err(mismatch("(utc4): conjuncts differ")),
        }
    }
    Ok(())
}

fn e1(amb: &Ltc, l: &Formula, r: &Formula) -> Check {
    let Formula::Eval { fun, arg, anchor, body } = l else {
        return Err(mismatch("(e1) expects an evaluation formula on the left"));
    };
    let Formula::And(a, b) = &**body else { return Err(mismatch("(e1) expects a conjunction under the evaluation")) };
    let Formula::And(a2, ev) = r else { return Err(mismatch("(e1) expects A /\\ [e1 e2 => m] B on the right")) };
    match &**ev {
        Formula::Eval { fun: f2, arg: x2, anchor: m2, body: b2 } if f2 == fun && x2 == arg => {
            if !same(&body_as(b2, m2, anchor), b) {
                return Err(mismatch("(e1): B differs"));
            }
        }
        _ => return Err(mismatch("(e1) expects the same evaluation on the right")),
    }
    if !same(a, a2) {
        return Err(mismatch("(e1): A differs"));
    }
    if a.fv().contains(anchor) {
        return Err(side(format!("(e1): `{anchor}` is free in A")));
    }
    ext_ind(a, amb, "A")
}

fn e2(l: &Formula, r: &Formula) -> Check {
    let Formula::Eval { fun, arg, anchor, body } = l else {
        return Err(mismatch("(e2) expects an evaluation formula on the left"));
    };
    let Formula::ForallIn { var, ty, ltc, body: a } = &**body else {
        return Err(mismatch("(e2) expects a quantifier under the evaluation"));
    };
    let Formula::ForallIn { var: v2, ty: t2, ltc: g2, body: rb } = r else {
        return Err(mismatch("(e2) expects a quantifier on the right"));
    };
    if t2 != ty || g2 != ltc {
        return Err(mismatch("(e2): quantifiers differ"));
    }
    match body_as(rb, v2, var) {
        Formula::Eval { fun: f2, arg: x2, anchor: m2, body: b2 } if f2 == *fun && x2 == *arg => {
            if !same(&body_as(&b2, &m2, anchor), a) {
                return Err(mismatch("(e2): bodies differ"));
            }
        }
        _ => return Err(mismatch("(e2) expects the same evaluation under the quantifier")),
    }
    let mut used = fun.fv();
    used.extend(arg.fv());
    used.insert(anchor.clone());
    let mut dom: BTreeSet<Ident> = ltc.0.iter().map(|e| e.name().clone()).collect();
    dom.insert(var.clone());
    if let Some(c) = used.intersection(&dom).next() {
        return Err(side(format!("(e2): `{c}` is in both the evaluation and the quantifier")));
    }
    Ok(())
}

fn e3(amb: &Ltc, l: &Formula, r: &Formula) -> Check {
    let Formula::Eval { fun, arg, anchor, body } = l else {
        return Err(mismatch("(e3) expects an evaluation formula on the left"));
    };
    let Formula::ForallTcv { tcv, body: a } = &**body else {
        return Err(mismatch("(e3) expects allctx under the evaluation"));
    };
    let Formula::ForallTcv { tcv: d2, body: rb } = r else { return Err(mismatch("(e3) expects allctx on the right")) };
    match tcv_body_as(rb, d2, tcv) {
        Formula::Eval { fun: f2, arg: x2, anchor: m2, body: b2 } if f2 == *fun && x2 == *arg => {
            if !same(&body_as(&b2, &m2, anchor), a) {
                return Err(mismatch("(e3): bodies differ"));
            }
        }
        _ => return Err(mismatch("(e3) expects the same evaluation under allctx")),
    }
    let cod = match typecheck_expression(amb, fun) {
        Ok(Type::Arrow(_, cod)) => *cod,
        _ => return Err(side(format!("(e3): `{fun}` is not a function in {amb}"))),
    };
    if !cod.is_base() {
        return Err(side(format!("(e3): the anchor has type {cod}, which is not a base type")));
    }
    ext_ind(a, &amb.with_var(anchor, cod).with_tcv(tcv), "A")
}

fn ext(amb: &Ltc, l: &Formula, r: &Formula) -> Check {
    let Formula::Eq(e1, e2) = r else { return Err(mismatch("(ext) expects e1 = e2 on the right")) };
    let Formula::ForallIn { var, ltc, body, .. } = l else {
        return Err(mismatch("(ext) expects a quantifier over () on the left"));
    };
    if !ltc.is_empty() {
        return Err(mismatch("(ext): the quantifier must range over ()"));
    }
    let x = Expr::Var(var.clone());
    let ok = match &**body {
        Formula::Eval { fun: f1, arg: a1, anchor: m1, body: inner } if f1 == e1 && *a1 == x => match &**inner {
            Formula::Eval { fun: f2, arg: a2, anchor: m2, body: eq } if f2 == e2 && *a2 == x => {
                **eq == Formula::eq(Expr::Var(m1.clone()), Expr::Var(m2.clone()))
            }
            _ => false,
        },
        _ => false,
    };
    if !ok {
        return Err(mismatch("(ext) expects all x in (). [e1 x => m1][e2 x => m2] m1 = m2"));
    }
    match typecheck_expression(amb, e1) {
        Ok(t @ Type::Arrow(..)) if t.is_nm_free() => Ok(()),
        Ok(t) => Err(side(format!("(ext): {t} is not an Nm-free function type"))),
        Err(err) => Err(side(format!("(ext): {err}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_expr, parse_formula_in, parse_ltc};

    fn chk(id: AxiomId, amb: &str, l: &str, r: &str, w: &[(&str, &str)]) -> Check {
        let g = parse_ltc(amb).unwrap();
        let ws: Witnesses = w
            .iter()
            .map(|(k, v)| {
                let wit = if k.starts_with('g') {
                    Witness::Ltc(parse_ltc(v).unwrap())
                } else {
                    Witness::Expr(parse_expr(v).unwrap())
                };
                (k.to_string(), wit)
            })
            .collect();
        check_axiom_instance(id, &g, &parse_formula_in(&g, l).unwrap(), &parse_formula_in(&g, r).unwrap(), &ws)
    }

    #[test]
    fn f3_instance() {
        assert!(chk(AxiomId::F3, "(G, a:Nm, b:Nm)", "b # (G, a)", "b != a", &[("e", "a")]).is_ok());
        // `b` is not typable from (G, a).
        let r = chk(AxiomId::F3, "(G, a:Nm, b:Nm)", "b # (G, a)", "b != b", &[("e", "b")]);
        assert!(matches!(r, Err(KernelError::SideCondition(_))), "{r:?}");
    }

    #[test]
    fn u1_instance() {
        let amb = "(G, a:Nm, f:Nm->Bool)";
        assert!(chk(AxiomId::U1, amb, "all y:Nm in (a). [f y => m] m = true", "[f a => m] m = true", &[("e", "a")])
            .is_ok());
        assert!(chk(AxiomId::U1, amb, "all y:Nm in (f). y = y", "a = a", &[("e", "a")]).is_err());
    }

    #[test]
    fn u5_needs_nm_free() {
        let amb = "(G)";
        assert!(chk(AxiomId::U5, amb, "all y:Bool in (G). y = y", "all y:Bool in (). y = y", &[]).is_ok());
        let r = chk(AxiomId::U5, amb, "all y:Nm in (G). y = y", "all y:Nm in (). y = y", &[]);
        assert!(matches!(r, Err(KernelError::SideCondition(_))));
    }

    #[test]
    fn utc1_then_f4_as_in_gensym_example() {
        let amb = "(G, b:Unit->Nm)";
        assert!(chk(AxiomId::Utc1, amb, "allctx d. [b () => a] a # (d)", "[b () => a] a # (G, b)", &[]).is_ok());
        assert!(chk(AxiomId::F4, amb, "a # (G, b)", "a # (G) /\\ a # (b)", &[]).is_ok());
        assert!(chk(AxiomId::F4, amb, "a # (G, b)", "a # (b) /\\ a # (G)", &[]).is_ok());
        assert!(chk(AxiomId::F4, amb, "a # (G, b)", "a # (G) /\\ a # (G)", &[]).is_err());
    }

    #[test]
    fn iff_axioms_go_both_ways() {
        let amb = "(x:Nm, y:Nm)";
        assert!(chk(AxiomId::Eq3, amb, "x = y", "y = x", &[]).is_ok());
        assert!(chk(AxiomId::Eq2, amb, "x = x", "T", &[]).is_ok());
        assert!(chk(AxiomId::Eq4, amb, "x = y", "x = y /\\ y = x", &[]).is_err());
    }

    #[test]
    fn eq1_substitutes() {
        let amb = "(G, x:Nm, z:Nm)";
        assert!(chk(AxiomId::Eq1, amb, "x # (G) /\\ x = z", "z # (G)", &[]).is_ok());
        assert!(chk(AxiomId::Eq1, amb, "x # (G)", "z # (G)", &[]).is_err());
    }

    #[test]
    fn e1_requires_anchor_free_ext_ind() {
        let amb = "(G, x:Nm, u:Nm->Bool, y:Nm)";
        assert!(chk(AxiomId::E1, amb, "[u y => m] (x != y /\\ m = (x = y))", "x != y /\\ [u y => m] m = (x = y)", &[])
            .is_ok());
        assert!(chk(AxiomId::E1, amb, "[u y => m] (m = m /\\ T)", "m = m /\\ [u y => m] T", &[]).is_err());
    }

    #[test]
    fn ex2_ex3() {
        let amb = "(G, x:Nm, u:Unit->Nm, y:Unit)";
        assert!(chk(AxiomId::Ex2, amb, "[u y => m] m = x", "ex z:Nm in (u, y). x = z", &[]).is_ok());
        assert!(chk(AxiomId::Ex2, amb, "[u y => m] m = x", "ex z:Nm in (u). x = z", &[]).is_err());
        let amb = "(G, x:Nm, u:Unit->Nm)";
        assert!(chk(
            AxiomId::Ex3,
            amb,
            "all y:Unit in (). ex z:Nm in (u, y). x = z",
            "ex z:Nm in (u). x = z",
            &[]
        )
        .is_ok());
    }

    #[test]
    fn utc2_extends_to_future() {
        let amb = "(G, u:Nm->Bool)";
        let l = "all y:Nm in (G, u). [u y => m] m = false";
        assert!(chk(AxiomId::Utc2, amb, l, "allctx d. all y:Nm in (G, u, d). [u y => m] m = false", &[]).is_ok());
        assert!(chk(AxiomId::Utc2, amb, l, "allctx d. all y:Nm in (G, d). [u y => m] m = false", &[]).is_err());
    }

    #[test]
    fn f1_f2() {
        let amb = "(G, x:Nm, u:Nm->Bool)";
        assert!(chk(AxiomId::F1, amb, "x # (G)", "x # (G, u)", &[]).is_ok());
        let amb2 = "(G, u:Nm->Bool, x:Nm)";
        assert!(chk(AxiomId::F1, amb2, "x # (G)", "x # (G, u)", &[]).is_err());
        assert!(chk(
            AxiomId::F2,
            amb,
            "x # (G, u) /\\ all y:Nm in (G, u). [u y => m] m = (x = y)",
            "all y:Nm in (G, u). (x # (G, u, y) /\\ [u y => m] m = (x = y))",
            &[]
        )
        .is_ok());
    }
}
