//! Entailment checking: single axiom steps located inside a formula, chains of them,
//! the first-order decider and the bounded oracle.

use super::{check_axiom_instance, mismatch, AxiomId, ChainStep, Justification, KernelError, StepKind, Witnesses};
use crate::fol;
use crate::logic::{alpha_eq_formula, typecheck_expression, typecheck_formula, Formula, Ltc};
use crate::model::{enumerate_models, DeriveBudget};
use crate::sat::{satisfies, SatVerdict};
use crate::term::Type;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntailStatus {
    /// Mechanically proved.
    Proved,
    /// Held on every enumerated model; evidence only.
    OracleHolds,
}

/// A place where `cur` and `next` differ, with the LTC and polarity there.
struct Site<'a> {
    cur: &'a Formula,
    next: &'a Formula,
    ambient: Ltc,
    positive: bool,
}

/// Descend while both formulae share their top constructor and all but one child.
fn sites<'a>(cur: &'a Formula, next: &'a Formula, ambient: Ltc, positive: bool, out: &mut Vec<Site<'a>>) {
    out.push(Site { cur, next, ambient: ambient.clone(), positive });
    use Formula::*;
    let pick = |a: &'a Formula, b: &'a Formula, c: &'a Formula, d: &'a Formula| {
        // Children (a, b) against (c, d): exactly one pair may differ.
        let (s1, s2) = (a == c, b == d);
        match (s1, s2) {
            (true, false) => Some((b, d, 1)),
            (false, true) => Some((a, c, 0)),
            _ => None,
        }
    };
    match (cur, next) {
        (Not(a), Not(b)) => sites(a, b, ambient, !positive, out),
        (And(a, b), And(c, d)) | (Or(a, b), Or(c, d)) => {
            if let Some((x, y, _)) = pick(a, b, c, d) {
                sites(x, y, ambient, positive, out);
            }
        }
        (Implies(a, b), Implies(c, d)) => {
            if let Some((x, y, i)) = pick(a, b, c, d) {
                sites(x, y, ambient, if i == 0 { !positive } else { positive }, out);
            }
        }
        (
            Eval { fun, arg, anchor, body },
            Eval { fun: f2, arg: a2, anchor: m2, body: b2 },
        ) if fun == f2 && arg == a2 && anchor == m2 => {
            let cod = match typecheck_expression(&ambient, fun) {
                Ok(Type::Arrow(_, cod)) => *cod,
                _ => return,
            };
            sites(body, b2, ambient.with_var(anchor, cod), positive, out);
        }
        (ForallIn { var, ty, ltc, body }, ForallIn { var: v2, ty: t2, ltc: g2, body: b2 })
        | (ExistsIn { var, ty, ltc, body }, ExistsIn { var: v2, ty: t2, ltc: g2, body: b2 })
            if var == v2 && ty == t2 && ltc == g2 =>
        {
            sites(body, b2, ambient.with_var(var, ty.clone()), positive, out);
        }
        (ForallTcv { tcv, body }, ForallTcv { tcv: d2, body: b2 })
        | (ExistsTcv { tcv, body }, ExistsTcv { tcv: d2, body: b2 })
            if tcv == d2 =>
        {
            sites(body, b2, ambient.with_tcv(tcv), positive, out);
        }
        _ => {}
    }
}

/// One axiom step from `cur` to `next`: the axiom must account for the single place
/// where the two differ, read in the direction the polarity there demands.
pub fn check_axiom_step(id: AxiomId, ambient: &Ltc, cur: &Formula, next: &Formula, w: &Witnesses) -> Result<(), KernelError> {
    let mut found = Vec::new();
    sites(cur, next, ambient.clone(), true, &mut found);
    let mut first_err = None;
    for s in found.iter().rev() {
        let r = if s.positive {
            check_axiom_instance(id, &s.ambient, s.cur, s.next, w)
        } else {
            check_axiom_instance(id, &s.ambient, s.next, s.cur, w)
        };
        match r {
            Ok(()) => return Ok(()),
            Err(e) => {
                // Report the error at the deepest site; it names the real mismatch.
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or_else(|| mismatch(format!("({id}) does not apply"))))
}

fn check_chain(ambient: &Ltc, a: &Formula, b: &Formula, steps: &[ChainStep]) -> Result<(), KernelError> {
    if steps.is_empty() {
        return if alpha_eq_formula(a, b) {
            Ok(())
        } else {
            Err(mismatch("an empty chain only proves A ==> A"))
        };
    }
    let mut cur = a.clone();
    for (i, s) in steps.iter().enumerate() {
        let last = i + 1 == steps.len();
        let next = match (&s.target, last) {
            (Some(t), _) => t.clone(),
            (None, true) => b.clone(),
            (None, false) => return Err(mismatch(format!("chain step {} has no target", i + 1))),
        };
        typecheck_formula(ambient, &next).map_err(|e| KernelError::Type(format!("chain step {}: {e}", i + 1)))?;
        let r = match &s.kind {
            StepKind::Axiom(id) => check_axiom_step(*id, ambient, &cur, &next, &s.witnesses),
            StepKind::Fol => {
                if fol::entails(&cur, &next) {
                    Ok(())
                } else {
                    Err(mismatch("not a first-order consequence"))
                }
            }
        };
        let name = match &s.kind {
            StepKind::Axiom(id) => id.to_string(),
            StepKind::Fol => "fol".to_string(),
        };
        r.map_err(|e| mismatch(format!("chain step {} ({name}): {e}", i + 1)))?;
        cur = next;
    }
    if alpha_eq_formula(&cur, b) {
        Ok(())
    } else {
        Err(mismatch(format!("chain ends in `{cur}`, not `{b}`")))
    }
}

/// Enumerated models for the oracle.
const ORACLE_MODELS: usize = 60;

fn oracle(ambient: &Ltc, a: &Formula, b: &Formula) -> Result<EntailStatus, KernelError> {
    let imp = Formula::implies(a.clone(), b.clone());
    let budget = DeriveBudget::default();
    let models = enumerate_models(ambient, &budget, 3, ORACLE_MODELS);
    if models.is_empty() {
        return Err(mismatch(format!("no models of {ambient} to check")));
    }
    let mut unknown = false;
    for xi in &models {
        match satisfies(xi, &imp, &budget) {
            Ok(SatVerdict::Holds) => {}
            Ok(SatVerdict::Fails) => return Err(mismatch(format!("oracle: fails in model {xi}"))),
            Ok(SatVerdict::Unknown(_)) => unknown = true,
            Err(e) => return Err(mismatch(format!("oracle: {e}"))),
        }
    }
    if unknown {
        Err(mismatch("oracle: undecided within the bounds"))
    } else {
        Ok(EntailStatus::OracleHolds)
    }
}

/// Check `ambient ⊩ a ⟹ b` under the given justification.
pub fn check_entailment(ambient: &Ltc, a: &Formula, b: &Formula, j: &Justification) -> Result<EntailStatus, KernelError> {
    match j {
        Justification::Axiom { id, witnesses } => {
            check_axiom_step(*id, ambient, a, b, witnesses).map(|_| EntailStatus::Proved)
        }
        Justification::Chain(steps) => check_chain(ambient, a, b, steps).map(|_| EntailStatus::Proved),
        Justification::Fol => {
            if fol::entails(a, b) {
                Ok(EntailStatus::Proved)
            } else {
                Err(mismatch("not a first-order consequence"))
            }
        }
        Justification::Oracle => oracle(ambient, a, b),
        Justification::Admit(note) => Err(mismatch(format!("admitted: {note}"))),
        Justification::Rule { rule, .. } => Err(mismatch(format!("[{rule}] does not prove an entailment"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula_in, parse_ltc};

    fn f(g: &Ltc, s: &str) -> Formula {
        parse_formula_in(g, s).unwrap()
    }

    #[test]
    fn empty_chain_is_reflexive() {
        let g = parse_ltc("(x:Nm)").unwrap();
        let a = f(&g, "x = x");
        assert_eq!(check_entailment(&g, &a, &a, &Justification::Chain(vec![])), Ok(EntailStatus::Proved));
        let b = f(&g, "T");
        assert!(check_entailment(&g, &a, &b, &Justification::Chain(vec![])).is_err());
    }

    #[test]
    fn step_found_under_binders() {
        let g = parse_ltc("(G, b:Unit->Nm)").unwrap();
        let a = f(&g, "[b () => a] a # (G, b)");
        let b = f(&g, "[b () => a] (a # (G) /\\ a # (b))");
        assert!(check_axiom_step(AxiomId::F4, &g, &a, &b, &Witnesses::new()).is_ok());
    }

    #[test]
    fn negative_position_reverses_direction() {
        let g = parse_ltc("(G, x:Nm, y:Nm)").unwrap();
        // f3 weakens; under negation only the converse direction is sound.
        let a = f(&g, "~(x # (G, y))");
        let b = f(&g, "~(x != y)");
        let mut w = Witnesses::new();
        w.insert("e".into(), super::super::Witness::Expr(crate::logic::Expr::var("y")));
        assert!(check_axiom_step(AxiomId::F3, &g, &a, &b, &w).is_err());
        assert!(check_axiom_step(AxiomId::F3, &g, &b, &a, &w).is_ok());
    }

    #[test]
    fn oracle_refutes_t_implies_f() {
        let g = Ltc::empty();
        let r = check_entailment(&g, &Formula::True, &Formula::False, &Justification::Oracle);
        assert!(matches!(r, Err(KernelError::Mismatch(m)) if m.contains("fails in model")));
    }

    #[test]
    fn fol_justification() {
        let g = parse_ltc("(a:Nm, b:Nm)").unwrap();
        let a = f(&g, "~(a = b)");
        let b = f(&g, "(a = b) = false");
        assert_eq!(check_entailment(&g, &a, &b, &Justification::Fol), Ok(EntailStatus::Proved));
    }
}
