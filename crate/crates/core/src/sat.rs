//! Bounded three-valued satisfaction of formulae and triples in models.
//!
//! `Holds` and `Fails` are only reported when every quantifier on the way was decided:
//! either its value space was enumerated exhaustively, or a counterexample was found.
//! Anything else is `Unknown`, tagged with the bound that stopped the search.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equiv::{check_equiv, EquivVerdict};
use crate::eval::eval_with;
use crate::logic::{typecheck_formula, typecheck_triple, Formula, LogicError, Ltc, Triple};
use crate::model::{derivable_names, derived_values, value_type, DeriveBudget, Model, ModelError};
use crate::reduce::NameAllocator;
use crate::term::{alpha_eq, Ident, Term, Type};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    TermSize,
    ExtensionDepth,
    ContextSize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "bound", rename_all = "snake_case")]
pub enum SatVerdict {
    Holds,
    Fails,
    Unknown(Bound),
}

impl SatVerdict {
    pub fn not(self) -> SatVerdict {
        match self {
            SatVerdict::Holds => SatVerdict::Fails,
            SatVerdict::Fails => SatVerdict::Holds,
            u => u,
        }
    }

    pub fn and(self, other: SatVerdict) -> SatVerdict {
        match (self, other) {
            (SatVerdict::Fails, _) | (_, SatVerdict::Fails) => SatVerdict::Fails,
            (SatVerdict::Holds, SatVerdict::Holds) => SatVerdict::Holds,
            (SatVerdict::Unknown(b), _) | (_, SatVerdict::Unknown(b)) => SatVerdict::Unknown(b),
        }
    }

    pub fn is_decided(self) -> bool {
        !matches!(self, SatVerdict::Unknown(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SatError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("model LTC {model} does not type {required}")]
    Untyped { model: Ltc, required: Ltc },
    #[error("freshness subject `{0}` is not a name")]
    NotName(Term),
}

/// `ξ ⊨ A`, bounded.
pub fn satisfies(xi: &Model, a: &Formula, budget: &DeriveBudget) -> Result<SatVerdict, SatError> {
    typecheck_formula(&xi.ltc()?, a)?;
    sat(xi, &a.core(), budget)
}

/// `ξ ⊨ {A} M :m {B}` for a model typed by `ltc`: if the precondition holds, run `M`
/// and check the postcondition with the result bound to the anchor.
pub fn check_triple(xi: &Model, ltc: &Ltc, t: &Triple, budget: &DeriveBudget) -> Result<SatVerdict, SatError> {
    typecheck_triple(ltc, t)?;
    let model_ltc = xi.ltc()?;
    if !model_ltc.subsumes(&ltc.remove_tcvs()) || !ltc.ftcv().iter().all(|d| model_ltc.contains_tcv(d)) {
        return Err(SatError::Untyped { model: model_ltc, required: ltc.clone() });
    }
    match sat(xi, &t.pre.core(), budget)? {
        SatVerdict::Fails => return Ok(SatVerdict::Holds),
        SatVerdict::Unknown(b) => return Ok(SatVerdict::Unknown(b)),
        SatVerdict::Holds => {}
    }
    let bindings: Vec<(Ident, Term)> =
        t.program.fv().into_iter().filter_map(|x| xi.value(&x).map(|v| (x, v.clone()))).collect();
    let mut g = xi.generated().clone();
    let v = eval_with(&t.program, &bindings, &mut g, &mut NameAllocator::default()).map_err(ModelError::from)?;
    let xi2 = xi.clone().with_generated(g).push_val(&t.anchor, v, &BTreeSet::new())?;
    sat(&xi2, &t.post.core(), budget)
}

fn sat(xi: &Model, a: &Formula, budget: &DeriveBudget) -> Result<SatVerdict, SatError> {
    use SatVerdict::*;
    Ok(match a {
        Formula::True => Holds,
        Formula::False => Fails,
        Formula::Eq(l, r) => {
            let lv = xi.interpret_expr(l)?;
            let rv = xi.interpret_expr(r)?;
            let ty = value_type(&lv).map_err(ModelError::from)?;
            if is_function_free(&ty) {
                if lv == rv { Holds } else { Fails }
            } else if alpha_eq(&lv, &rv) {
                Holds
            } else {
                let ctx = budget.ctx_size.max(1);
                match check_equiv(&lv, &rv, &ty, xi.generated(), ctx) {
                    Ok(EquivVerdict::Distinguished { .. }) => Fails,
                    _ => Unknown(Bound::ContextSize),
                }
            }
        }
        Formula::Not(p) => sat(xi, p, budget)?.not(),
        Formula::And(p, q) => {
            let l = sat(xi, p, budget)?;
            if l == Fails {
                Fails
            } else {
                l.and(sat(xi, q, budget)?)
            }
        }
        Formula::Eval { fun, arg, anchor, body } => {
            let f = xi.interpret_expr(fun)?;
            let x = xi.interpret_expr(arg)?;
            let mut g = xi.generated().clone();
            let v = eval_with(&Term::app(f, x), &[], &mut g, &mut NameAllocator::default())
                .map_err(ModelError::from)?;
            let xi2 = xi.clone().with_generated(g).push_val(anchor, v, &BTreeSet::new())?;
            sat(&xi2, body, budget)?
        }
        Formula::ForallIn { var, ty, ltc, body } => {
            let vars = xi.interpret_ltc(ltc)?;
            let set = derived_values(xi, &vars, ty, budget);
            let mut acc = if set.exhaustive { Holds } else { Unknown(Bound::TermSize) };
            for d in &set.items {
                let xi2 = xi.clone().with_generated(d.generated.iter().copied()).push_val(var, d.value.clone(), &BTreeSet::new())?;
                acc = acc.and(sat(&xi2, body, budget)?);
                if acc == Fails {
                    break;
                }
            }
            acc
        }
        Formula::ForallTcv { tcv, body } => {
            let mut types = vec![Type::Nm];
            binder_types(body, &mut types);
            let invariant = extension_invariant(body);
            forall_ext(xi, tcv, body, &types, budget.ext_depth, invariant, budget)?
        }
        Formula::Fresh(e, g0) => {
            let n = match xi.interpret_expr(e)? {
                Term::Name(n) => n,
                other => return Err(SatError::NotName(other)),
            };
            let vars = xi.interpret_ltc(g0)?;
            match derivable_names(&vars) {
                Some(ns) => {
                    if ns.contains(&n) { Fails } else { Holds }
                }
                None => {
                    let set = derived_values(xi, &vars, &Type::Nm, budget);
                    if set.items.iter().any(|d| d.value == Term::Name(n)) {
                        Fails
                    } else if vars.iter().all(|(_, _, v)| !v.an().contains(&n)) {
                        Holds
                    } else {
                        Unknown(Bound::TermSize)
                    }
                }
            }
        }
        Formula::Or(..) | Formula::Implies(..) | Formula::ExistsIn { .. } | Formula::ExistsTcv { .. } => {
            sat(xi, &a.core(), budget)?
        }
    })
}

fn is_function_free(t: &Type) -> bool {
    match t {
        Type::Unit | Type::Bool | Type::Nm => true,
        Type::Prod(a, b) => is_function_free(a) && is_function_free(b),
        Type::Arrow(..) => false,
    }
}

// First-order types of restricted quantifiers inside `a`; extensions add values of these.
fn binder_types(a: &Formula, out: &mut Vec<Type>) {
    match a {
        Formula::True | Formula::False | Formula::Eq(..) | Formula::Fresh(..) => {}
        Formula::Not(p) => binder_types(p, out),
        Formula::And(p, q) | Formula::Or(p, q) | Formula::Implies(p, q) => {
            binder_types(p, out);
            binder_types(q, out);
        }
        Formula::Eval { body, .. } | Formula::ForallTcv { body, .. } | Formula::ExistsTcv { body, .. } => {
            binder_types(body, out)
        }
        Formula::ForallIn { ty, body, .. } | Formula::ExistsIn { ty, body, .. } => {
            if is_function_free(ty) && !out.contains(ty) {
                out.push(ty.clone());
            }
            binder_types(body, out);
        }
    }
}

/// Propositional combinations of equations: their truth only depends on the values of
/// their free variables, which no extension changes.
fn extension_invariant(a: &Formula) -> bool {
    match a {
        Formula::True | Formula::False | Formula::Eq(..) => true,
        Formula::Not(p) => extension_invariant(p),
        Formula::And(p, q) | Formula::Or(p, q) | Formula::Implies(p, q) => {
            extension_invariant(p) && extension_invariant(q)
        }
        _ => false,
    }
}

fn forall_ext(
    xi: &Model,
    tcv: &Ident,
    body: &Formula,
    types: &[Type],
    depth: usize,
    invariant: bool,
    budget: &DeriveBudget,
) -> Result<SatVerdict, SatError> {
    let here = sat(&xi.push_tcv(tcv)?, body, budget)?;
    if here == SatVerdict::Fails || invariant {
        return Ok(here);
    }
    let mut acc = SatVerdict::Unknown(Bound::ExtensionDepth);
    if depth == 0 {
        return Ok(acc);
    }
    let all = xi.ltc()?.remove_tcvs();
    let vars = xi.interpret_ltc(&all)?;
    let fresh: Ident = format!("%e{}", xi.entries().len()).into();
    for ty in types {
        for d in derived_values(xi, &vars, ty, budget).items {
            let xi2 = xi.clone().with_generated(d.generated.iter().copied()).push_val(&fresh, d.value, &BTreeSet::new())?;
            let v = forall_ext(&xi2, tcv, body, types, depth - 1, invariant, budget)?;
            if v == SatVerdict::Fails {
                return Ok(v);
            }
            acc = acc.and(v);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;
    use crate::parse::{parse_formula_in, parse_ltc, Parser};

    fn check(model: &str, formula: &str) -> SatVerdict {
        let xi = parse_model(model).unwrap();
        let a = parse_formula_in(&xi.ltc().unwrap(), formula).unwrap();
        satisfies(&xi, &a, &DeriveBudget { ctx_size: 6, ..DeriveBudget::default() }).unwrap()
    }

    #[test]
    fn stored_name_is_fresh_for_empty() {
        assert_eq!(check("x := #0;", "x # ()"), SatVerdict::Holds);
        assert_eq!(check("x := #0;", "x # (x)"), SatVerdict::Fails);
    }

    #[test]
    fn equal_values() {
        assert_eq!(check("x := #0; y := #0;", "x = y"), SatVerdict::Holds);
        assert_eq!(check("x := #0; y := #1;", "x = y"), SatVerdict::Fails);
    }

    #[test]
    fn gensym_postcondition_holds_up_to_bound() {
        let v = check("u := gensym;", "allctx d. [u () => m] m # (d)");
        assert_eq!(v, SatVerdict::Unknown(Bound::ExtensionDepth));
    }

    #[test]
    fn hidden_name_behind_closure() {
        // The name tested by f is not derivable from f.
        assert_eq!(check("f := \\y:Nm. #0 = y;", "all x:Nm in (f). [f x => b] b = false"), SatVerdict::Holds);
        let m = "n := #0; f := \\y:Nm. #0 = y;";
        assert_eq!(check(m, "all x:Nm in (n, f). [f x => b] b = false"), SatVerdict::Fails);
    }

    #[test]
    fn function_equality_uses_contexts() {
        assert_eq!(check("f := \\y:Nm. true; g := \\y:Nm. false;", "f = g"), SatVerdict::Fails);
        assert_eq!(
            check("f := \\y:Nm. #0 = y; g := \\y:Nm. false;", "f = g"),
            SatVerdict::Fails,
            "#0 is in AN, so contexts can use it"
        );
        assert_eq!(check("f := \\y:Nm. y = y; g := \\y:Nm. true;", "f = g"), SatVerdict::Unknown(Bound::ContextSize));
    }

    #[test]
    fn triple_semantics() {
        let xi = parse_model("").unwrap();
        let ltc = Ltc::empty();
        let mut p = Parser::new("{T} gensym () = gensym () :u {u = false}").unwrap();
        let t = p.triple().unwrap();
        assert_eq!(check_triple(&xi, &ltc, &t, &DeriveBudget::default()).unwrap(), SatVerdict::Holds);
        let mut p = Parser::new("{T} gensym () = gensym () :u {u = true}").unwrap();
        let t = p.triple().unwrap();
        assert_eq!(check_triple(&xi, &ltc, &t, &DeriveBudget::default()).unwrap(), SatVerdict::Fails);
        let _ = parse_ltc("()").unwrap();
    }

    #[test]
    fn three_valued_connectives() {
        use SatVerdict::*;
        let u = Unknown(Bound::TermSize);
        assert_eq!(u.and(Fails), Fails);
        assert_eq!(u.and(Holds), u);
        assert_eq!(u.not(), u);
        assert_eq!(Holds.not(), Fails);
    }
}
