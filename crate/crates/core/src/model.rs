//! Models, derived values and model extension.
//!
//! A model is an ordered list of variable bindings to closed values and of TCV snapshots,
//! together with the set of names generated so far. A value is derivable from an LTC when
//! some name-free term typed by that LTC evaluates to it; derivation is the only way a
//! name stored in the model can become visible.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumerate::{GenConfig, Generator};
use crate::eval::eval_with;
use crate::logic::{Expr, Ltc, LtcEntry};
use crate::parse::{ParseError, Parser, Tok};
use crate::reduce::{canonicalize_fresh, fmt_names, NameAllocator, ReduceError};
use crate::term::{alpha_eq, typecheck_term, Const, Ident, Stc, Term, Type, TypeError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelEntry {
    Val(Ident, Term),
    Tcv(Ident, Ltc),
}

impl ModelEntry {
    pub fn name(&self) -> &Ident {
        match self {
            ModelEntry::Val(x, _) | ModelEntry::Tcv(x, _) => x,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model {
    entries: Vec<ModelEntry>,
    generated: BTreeSet<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeriveBudget {
    /// Largest derivation term explored.
    pub term_size: usize,
    /// Longest extension chain explored under `∀δ`.
    pub ext_depth: usize,
    /// Context size for equality at function types.
    pub ctx_size: usize,
}

impl Default for DeriveBudget {
    fn default() -> Self {
        DeriveBudget { term_size: 5, ext_depth: 2, ctx_size: 9 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("`{0}` is not bound in the model")]
    Unbound(Ident),
    #[error("`{0}` is already bound in the model")]
    Duplicate(Ident),
    #[error("value `{0}` is not a closed value")]
    NotValue(Term),
    #[error("TCV `{0}` must map to a TCV-free LTC")]
    TcvInSnapshot(Ident),
    #[error("witness `{0}` contains names")]
    NamedWitness(Term),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Model {
    pub fn empty() -> Model {
        Model::default()
    }

    pub fn entries(&self) -> &[ModelEntry] {
        &self.entries
    }

    /// `AN(ξ)`
    pub fn generated(&self) -> &BTreeSet<u32> {
        &self.generated
    }

    pub fn contains(&self, x: &str) -> bool {
        self.entries.iter().any(|e| &**e.name() == x)
    }

    pub fn value(&self, x: &str) -> Option<&Term> {
        self.entries.iter().rev().find_map(|e| match e {
            ModelEntry::Val(y, v) if &**y == x => Some(v),
            _ => None,
        })
    }

    pub fn snapshot(&self, d: &str) -> Option<&Ltc> {
        self.entries.iter().rev().find_map(|e| match e {
            ModelEntry::Tcv(y, g) if &**y == d => Some(g),
            _ => None,
        })
    }

    /// Add a binding; `extra` are names generated while deriving the value.
    pub fn push_val(&self, x: &str, v: Term, extra: &BTreeSet<u32>) -> Result<Model, ModelError> {
        if self.contains(x) {
            return Err(ModelError::Duplicate(x.into()));
        }
        if !v.is_value() || !v.is_closed() {
            return Err(ModelError::NotValue(v));
        }
        let mut m = self.clone();
        m.generated.extend(extra.iter().copied());
        v.an_into(&mut m.generated);
        m.entries.push(ModelEntry::Val(x.into(), v));
        Ok(m)
    }

    /// `ξ · δ : Γ(ξ)⨸`
    pub fn push_tcv(&self, d: &str) -> Result<Model, ModelError> {
        if self.contains(d) {
            return Err(ModelError::Duplicate(d.into()));
        }
        let snap = self.ltc()?.remove_tcvs();
        let mut m = self.clone();
        m.entries.push(ModelEntry::Tcv(d.into(), snap));
        Ok(m)
    }

    fn push_raw_tcv(&mut self, d: &str, g: Ltc) -> Result<(), ModelError> {
        if self.contains(d) {
            return Err(ModelError::Duplicate(d.into()));
        }
        if !g.is_tcv_free() {
            return Err(ModelError::TcvInSnapshot(d.into()));
        }
        self.entries.push(ModelEntry::Tcv(d.into(), g));
        Ok(())
    }

    /// `ξ \ x`: drop a variable binding, keeping the generated set.
    pub fn remove_var(&self, x: &str) -> Model {
        let mut m = self.clone();
        m.entries.retain(|e| !matches!(e, ModelEntry::Val(y, _) if &**y == x));
        m
    }

    /// The LTC typing the model.
    pub fn ltc(&self) -> Result<Ltc, ModelError> {
        let mut out = Vec::new();
        for e in &self.entries {
            match e {
                ModelEntry::Val(x, v) => out.push(LtcEntry::Var(x.clone(), value_type(v)?)),
                ModelEntry::Tcv(d, _) => out.push(LtcEntry::Tcv(d.clone())),
            }
        }
        Ok(Ltc(out))
    }

    /// `⟦Γ0⟧ξ`: the variables an LTC denotes, with TCVs expanded to their snapshots.
    pub fn interpret_ltc(&self, g: &Ltc) -> Result<Vec<(Ident, Type, Term)>, ModelError> {
        let mut out: Vec<(Ident, Type, Term)> = Vec::new();
        let add = |x: &Ident, out: &mut Vec<(Ident, Type, Term)>| -> Result<(), ModelError> {
            if out.iter().any(|(y, ..)| y == x) {
                return Ok(());
            }
            let v = self.value(x).ok_or_else(|| ModelError::Unbound(x.clone()))?;
            out.push((x.clone(), value_type(v)?, v.clone()));
            Ok(())
        };
        for e in &g.0 {
            match e {
                LtcEntry::Var(x, _) => add(x, &mut out)?,
                LtcEntry::Tcv(d) => {
                    let snap = self.snapshot(d).ok_or_else(|| ModelError::Unbound(d.clone()))?;
                    for inner in &snap.0 {
                        if let LtcEntry::Var(x, _) = inner {
                            add(x, &mut out)?;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `⟦e⟧ξ`
    pub fn interpret_expr(&self, e: &Expr) -> Result<Term, ModelError> {
        let mut bindings = Vec::new();
        for x in e.fv() {
            let v = self.value(&x).ok_or_else(|| ModelError::Unbound(x.clone()))?;
            bindings.push((x, v.clone()));
        }
        let mut g = self.generated.clone();
        Ok(eval_with(&e.to_term(), &bindings, &mut g, &mut NameAllocator::default())?)
    }

    /// Every name occurring in any bound value.
    pub fn names_in_values(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        for e in &self.entries {
            if let ModelEntry::Val(_, v) = e {
                v.an_into(&mut out);
            }
        }
        out
    }

    pub fn with_generated(mut self, extra: impl IntoIterator<Item = u32>) -> Model {
        self.generated.extend(extra);
        self
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match e {
                ModelEntry::Val(x, v) => write!(f, "{x} := {v}")?,
                ModelEntry::Tcv(d, g) => write!(f, "{d} := ctx {g}")?,
            }
        }
        write!(f, "}} with {}", fmt_names(&self.generated))
    }
}

pub fn value_type(v: &Term) -> Result<Type, TypeError> {
    typecheck_term(&Stc::new(), v)
}

/// Result type of a function type, or the type itself, can carry a name.
fn yields_nm(t: &Type) -> bool {
    match t {
        Type::Nm => true,
        Type::Unit | Type::Bool => false,
        Type::Prod(a, b) => yields_nm(a) || yields_nm(b),
        Type::Arrow(_, b) => yields_nm(b),
    }
}

fn is_first_order(t: &Type) -> bool {
    match t {
        Type::Unit | Type::Bool | Type::Nm => true,
        Type::Prod(a, b) => is_first_order(a) && is_first_order(b),
        Type::Arrow(..) => false,
    }
}

/// A closure holding names that could hand one back. Name-free closures can only
/// return names they are given or fresh ones.
fn reveals_names(v: &Term) -> bool {
    match v {
        Term::Pair(a, b) => reveals_names(a) || reveals_names(b),
        Term::Lam(..) => {
            !v.an().is_empty()
                && match value_type(v) {
                    Ok(Type::Arrow(_, b)) => yields_nm(&b),
                    _ => true,
                }
        }
        _ => false,
    }
}

/// Names stored in first-order positions, reachable by projections alone.
fn first_order_names(v: &Term, out: &mut BTreeSet<u32>) {
    match v {
        Term::Name(n) => {
            out.insert(*n);
        }
        Term::Pair(a, b) => {
            first_order_names(a, out);
            first_order_names(b, out);
        }
        _ => {}
    }
}

/// The names derivable from `vars`, when this can be decided exactly.
pub fn derivable_names(vars: &[(Ident, Type, Term)]) -> Option<BTreeSet<u32>> {
    if vars.iter().any(|(_, _, v)| reveals_names(v)) {
        return None;
    }
    let mut out = BTreeSet::new();
    for (_, _, v) in vars {
        first_order_names(v, &mut out);
    }
    Some(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derived {
    pub value: Term,
    /// `AN(ξ)` plus the fresh names the derivation produced.
    pub generated: BTreeSet<u32>,
    /// A derivation term, when one was enumerated.
    pub witness: Option<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedSet {
    pub items: Vec<Derived>,
    /// Every derivable value (up to fresh-name renaming) is listed.
    pub exhaustive: bool,
}

fn first_order_values(ty: &Type, existing: &[u32], base: u32, k: u32) -> Vec<(Term, u32)> {
    match ty {
        Type::Unit => vec![(Term::unit(), k)],
        Type::Bool => vec![(Term::bool(true), k), (Term::bool(false), k)],
        Type::Nm => {
            let mut out: Vec<(Term, u32)> = existing.iter().map(|n| (Term::Name(*n), k)).collect();
            for j in 0..=k {
                out.push((Term::Name(base + j), k.max(j + 1)));
            }
            out
        }
        Type::Prod(a, b) => {
            let mut out = Vec::new();
            for (l, k1) in first_order_values(a, existing, base, k) {
                for (r, k2) in first_order_values(b, existing, base, k1) {
                    out.push((Term::pair(l.clone(), r), k2));
                }
            }
            out
        }
        Type::Arrow(..) => Vec::new(),
    }
}

/// Values of type `ty` derivable from `vars` (an interpreted LTC) in model `xi`.
///
/// First-order types are enumerated exactly when the derivable names are known; other
/// types fall back to evaluating every derivation term up to the budget.
pub fn derived_values(xi: &Model, vars: &[(Ident, Type, Term)], ty: &Type, budget: &DeriveBudget) -> DerivedSet {
    let an = xi.generated();
    let base = an.iter().next_back().map_or(0, |m| m + 1);
    if is_first_order(ty) {
        if let Some(names) = derivable_names(vars) {
            let existing: Vec<u32> = names.into_iter().collect();
            let items = first_order_values(ty, &existing, base, 0)
                .into_iter()
                .map(|(value, k)| {
                    let mut generated = an.clone();
                    generated.extend(base..base + k);
                    Derived { value, generated, witness: None }
                })
                .collect();
            return DerivedSet { items, exhaustive: true };
        }
    }
    let mut items: Vec<Derived> = Vec::new();
    let mut gen = generator_for(vars, ty);
    let bindings: Vec<(Ident, Term)> = vars.iter().map(|(x, _, v)| (x.clone(), v.clone())).collect();
    for size in 1..=budget.term_size {
        for t in gen.terms(ty, size).iter() {
            let mut g = an.clone();
            let Ok(v) = eval_with(t, &bindings, &mut g, &mut NameAllocator::default()) else { continue };
            let v = canonicalize_fresh(&v, an);
            if items.iter().any(|d| alpha_eq(&d.value, &v)) {
                continue;
            }
            let mut generated = an.clone();
            v.an_into(&mut generated);
            items.push(Derived { value: v, generated, witness: Some(t.clone()) });
        }
    }
    DerivedSet { items, exhaustive: false }
}

fn generator_for(vars: &[(Ident, Type, Term)], ty: &Type) -> Generator {
    let mut types: Vec<Type> = vars.iter().map(|(_, t, _)| t.clone()).collect();
    types.push(ty.clone());
    Generator::new(GenConfig {
        free: vars.iter().map(|(x, t, _)| (x.clone(), t.clone())).collect(),
        names: vec![],
        hole: None,
        universe: GenConfig::universe_for(&types),
        gensym: true,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum DeriveResult {
    Found { witness: Term },
    NotFoundUpTo { bound: usize },
}

/// Search for the smallest name-free term typed by `g0` that evaluates in `xi` to
/// `target`, up to renaming of freshly generated names.
pub fn derive_value(g0: &Ltc, xi: &Model, target: &Term, budget: &DeriveBudget) -> Result<DeriveResult, ModelError> {
    let vars = xi.interpret_ltc(g0)?;
    let ty = value_type(target)?;
    let an = xi.generated();
    let want = canonicalize_fresh(target, an);
    let mut gen = generator_for(&vars, &ty);
    let bindings: Vec<(Ident, Term)> = vars.iter().map(|(x, _, v)| (x.clone(), v.clone())).collect();
    for size in 1..=budget.term_size {
        for t in gen.terms(&ty, size).iter() {
            let mut g = an.clone();
            let Ok(v) = eval_with(t, &bindings, &mut g, &mut NameAllocator::default()) else { continue };
            if alpha_eq(&canonicalize_fresh(&v, an), &want) {
                return Ok(DeriveResult::Found { witness: t.clone() });
            }
        }
    }
    Ok(DeriveResult::NotFoundUpTo { bound: budget.term_size })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtendStep {
    AddVal(Ident, Term),
    AddTcv(Ident),
}

/// One model-extension step. An `AddVal` witness must be a name-free term typed by the
/// model's LTC; it is evaluated in the model.
pub fn extend(xi: &Model, step: &ExtendStep) -> Result<Model, ModelError> {
    match step {
        ExtendStep::AddTcv(d) => xi.push_tcv(d),
        ExtendStep::AddVal(x, w) => {
            if !w.is_compile_time() {
                return Err(ModelError::NamedWitness(w.clone()));
            }
            if xi.contains(x) {
                return Err(ModelError::Duplicate(x.clone()));
            }
            let ltc = xi.ltc()?;
            typecheck_term(&ltc.to_stc(), w)?;
            let bindings: Vec<(Ident, Term)> =
                w.fv().into_iter().filter_map(|y| xi.value(&y).map(|v| (y, v.clone()))).collect();
            let mut g = xi.generated().clone();
            let v = eval_with(w, &bindings, &mut g, &mut NameAllocator::default())?;
            xi.push_val(x, v, &g)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Construction {
    Yes { ltc: Ltc },
    Unknown { reason: String },
}

/// Replay the construction of `xi`: every value must be derivable from the bindings
/// before it, and every TCV must snapshot the LTC before it.
pub fn well_constructed(xi: &Model, budget: &DeriveBudget) -> Construction {
    let mut cur = Model::empty();
    for e in xi.entries() {
        match e {
            ModelEntry::Val(x, v) => {
                let unknown = |reason: String| Construction::Unknown { reason };
                let ltc = match cur.ltc() {
                    Ok(l) => l.remove_tcvs(),
                    Err(err) => return unknown(err.to_string()),
                };
                match derive_value(&ltc, &cur, v, budget) {
                    Ok(DeriveResult::Found { .. }) => {}
                    Ok(DeriveResult::NotFoundUpTo { bound }) => {
                        return unknown(format!("no witness for `{x}` up to size {bound}"))
                    }
                    Err(err) => return unknown(err.to_string()),
                }
                match cur.push_val(x, v.clone(), &BTreeSet::new()) {
                    Ok(m) => cur = m,
                    Err(err) => return unknown(err.to_string()),
                }
            }
            ModelEntry::Tcv(d, g) => {
                let expected = match cur.ltc() {
                    Ok(l) => l.remove_tcvs(),
                    Err(err) => return Construction::Unknown { reason: err.to_string() },
                };
                if &expected != g {
                    return Construction::Unknown {
                        reason: format!("snapshot of `{d}` is {g}, expected {expected}"),
                    };
                }
                match cur.push_tcv(d) {
                    Ok(m) => cur = m,
                    Err(err) => return Construction::Unknown { reason: err.to_string() },
                }
            }
        }
    }
    match xi.ltc() {
        Ok(ltc) => Construction::Yes { ltc },
        Err(err) => Construction::Unknown { reason: err.to_string() },
    }
}

/// Parse a model file: `x := <value>;` and `d := ctx (<ltc>);` in order. A parenthesized
/// list of bindings after `:=` is also read as a snapshot; `()` is the unit value.
pub fn parse_model(src: &str) -> Result<Model, ModelError> {
    let mut p = Parser::new(src)?;
    let mut m = Model::empty();
    while !p.at_eof() {
        let x = p.ident()?;
        p.expect_sym(":=")?;
        let is_ctx = matches!(p.peek(), Tok::Ident(s) if s == "ctx")
            || (p.at_sym("(")
                && matches!(p.peek_at(1), Tok::Ident(_))
                && matches!(p.peek_at(2), Tok::Sym(":") | Tok::Sym(",") | Tok::Sym(")")));
        if is_ctx {
            if matches!(p.peek(), Tok::Ident(s) if s == "ctx") {
                p.advance();
            }
            let g = p.ltc()?;
            let g = crate::logic::resolve_ltc(&m.ltc()?, &g);
            m.push_raw_tcv(&x, g)?;
        } else {
            let v = p.term()?;
            m = m.push_val(&x, v, &BTreeSet::new())?;
        }
        if !p.eat_sym(";") {
            p.expect_eof()?;
        }
    }
    Ok(m)
}

/// Prefixes used when enumerating models: nothing, one or two names, the generator,
/// and a name behind a name test.
fn hidden_prefixes() -> Vec<Model> {
    let none = Model::empty();
    let name = none.push_val("%h", Term::Name(0), &BTreeSet::new()).expect("fresh");
    let two = name.push_val("%k", Term::Name(1), &BTreeSet::new()).expect("fresh");
    let gen = none.push_val("%h", Term::Gensym, &BTreeSet::new()).expect("fresh");
    let test = none
        .push_val(
            "%h",
            Term::lam("y", Type::Nm, Term::eq(Term::Name(0), Term::var("y"))),
            &BTreeSet::new(),
        )
        .expect("fresh");
    vec![none, name, two, gen, test]
}

/// Well-constructed models typed by `ltc`, built by deriving each binding from the
/// model so far, after one of a few hidden prefixes. At most `per_var` values are
/// tried per binding and at most `limit` models are returned.
pub fn enumerate_models(ltc: &Ltc, budget: &DeriveBudget, per_var: usize, limit: usize) -> Vec<Model> {
    let mut frontier = hidden_prefixes();
    for e in &ltc.0 {
        let mut next = Vec::new();
        for m in &frontier {
            match e {
                LtcEntry::Tcv(d) => {
                    if let Ok(m2) = m.push_tcv(d) {
                        next.push(m2);
                    }
                }
                LtcEntry::Var(x, ty) => {
                    let Ok(all) = m.ltc() else { continue };
                    let Ok(vars) = m.interpret_ltc(&all.remove_tcvs()) else { continue };
                    let set = derived_values(m, &vars, ty, budget);
                    for d in set.items.iter().take(per_var) {
                        if let Ok(m2) = m.push_val(x, d.value.clone(), &d.generated) {
                            next.push(m2);
                        }
                    }
                }
            }
        }
        frontier = next;
        if frontier.len() > limit * 4 {
            frontier = spread(frontier, limit * 4);
        }
    }
    spread(frontier, limit)
}

// Keep an evenly spaced selection so every hidden prefix stays represented.
fn spread(v: Vec<Model>, limit: usize) -> Vec<Model> {
    if v.len() <= limit {
        return v;
    }
    let n = v.len();
    (0..limit).map(|i| v[i * n / limit].clone()).collect()
}

pub fn bool_term(b: bool) -> Term {
    Term::Const(Const::from_bool(b))
}
