//! Bounded contextual-equivalence search.
//!
//! Closed Boolean contexts with one hole are enumerated by size; the first context whose
//! results differ on the two programs is a proof of inequivalence. Exhausting the bound
//! proves nothing and is reported as such.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumerate::{GenConfig, Generator};
use crate::eval::eval_bool_plugged;
use crate::reduce::ReduceError;
use crate::term::{typecheck_term, Stc, Term, Type, TypeError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum EquivVerdict {
    Distinguished { context: Term, left: bool, right: bool },
    NotDistinguishedUpTo { bound: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("context budget must be at least 1")]
    Budget,
    #[error("program `{0}` is not closed")]
    Open(Term),
    #[error("program `{0}` mentions names outside the generated set")]
    Names(Term),
    #[error("program `{term}` has type {found}, expected {expected}")]
    WrongType { term: Term, expected: Type, found: Type },
    #[error(transparent)]
    Type(#[from] TypeError),
}

fn validate(m: &Term, ty: &Type, generated: &BTreeSet<u32>) -> Result<(), EquivError> {
    if !m.is_closed() {
        return Err(EquivError::Open(m.clone()));
    }
    if !m.an().is_subset(generated) {
        return Err(EquivError::Names(m.clone()));
    }
    let found = typecheck_term(&Stc::new(), m)?;
    if &found != ty {
        return Err(EquivError::WrongType { term: m.clone(), expected: ty.clone(), found });
    }
    Ok(())
}

/// Run both programs in `context` and return the two Boolean results.
pub fn replay(
    context: &Term,
    m1: &Term,
    m2: &Term,
    generated: &BTreeSet<u32>,
) -> Result<(bool, bool), ReduceError> {
    Ok((eval_bool_plugged(context, Some(m1), generated)?, eval_bool_plugged(context, Some(m2), generated)?))
}

/// Search contexts of at most `budget` nodes. Contexts may use names from `generated`
/// and intermediate types built from the base types and the components of `ty`.
pub fn check_equiv(
    m1: &Term,
    m2: &Term,
    ty: &Type,
    generated: &BTreeSet<u32>,
    budget: usize,
) -> Result<EquivVerdict, EquivError> {
    if budget == 0 {
        return Err(EquivError::Budget);
    }
    validate(m1, ty, generated)?;
    validate(m2, ty, generated)?;
    let mut gen = Generator::new(GenConfig {
        free: vec![],
        names: generated.iter().copied().collect(),
        hole: Some(ty.clone()),
        universe: GenConfig::universe_for(&[ty.clone()]),
        gensym: true,
    });
    for size in 1..=budget {
        let ctxs = gen.contexts(&Type::Bool, size);
        let hit = ctxs.par_iter().find_map_first(|c| match replay(c, m1, m2, generated) {
            Ok((l, r)) if l != r => Some((c.clone(), l, r)),
            _ => None,
        });
        if let Some((context, left, right)) = hit {
            return Ok(EquivVerdict::Distinguished { context, left, right });
        }
    }
    Ok(EquivVerdict::NotDistinguishedUpTo { bound: budget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_context, parse_term, parse_type};
    use crate::term::alpha_eq;

    #[test]
    fn hidden_name_is_not_distinguished() {
        let m1 = parse_term("let x = gensym () in \\y:Nm. x = y").unwrap();
        let m2 = parse_term("\\y:Nm. false").unwrap();
        let ty = parse_type("Nm -> Bool").unwrap();
        let v = check_equiv(&m1, &m2, &ty, &BTreeSet::new(), 6).unwrap();
        assert_eq!(v, EquivVerdict::NotDistinguishedUpTo { bound: 6 });
    }

    #[test]
    fn exported_name_is_distinguished() {
        let m1 = parse_term("let x = gensym () in <x, \\y:Nm. x = y>").unwrap();
        let m2 = parse_term("<gensym (), \\y:Nm. false>").unwrap();
        let ty = parse_type("Nm * (Nm -> Bool)").unwrap();
        match check_equiv(&m1, &m2, &ty, &BTreeSet::new(), 7).unwrap() {
            EquivVerdict::Distinguished { context, left, right } => {
                assert!(alpha_eq(&context, &parse_context("let p = [.] in pi2 p (pi1 p)").unwrap()), "{context}");
                assert_eq!((left, right), (true, false));
                assert_eq!(replay(&context, &m1, &m2, &BTreeSet::new()).unwrap(), (true, false));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reflexive() {
        let m = parse_term("<true, gensym>").unwrap();
        let ty = parse_type("Bool * (Unit -> Nm)").unwrap();
        for b in 1..=5 {
            assert_eq!(
                check_equiv(&m, &m, &ty, &BTreeSet::new(), b).unwrap(),
                EquivVerdict::NotDistinguishedUpTo { bound: b }
            );
        }
    }

    #[test]
    fn names_from_generated_set_are_usable() {
        let m1 = Term::Name(0);
        let m2 = Term::Name(1);
        let v = check_equiv(&m1, &m2, &Type::Nm, &[0, 1].into(), 3).unwrap();
        assert!(matches!(v, EquivVerdict::Distinguished { .. }));
    }

    #[test]
    fn zero_budget_rejected() {
        let m = parse_term("true").unwrap();
        assert_eq!(check_equiv(&m, &m, &Type::Bool, &BTreeSet::new(), 0), Err(EquivError::Budget));
    }
}
