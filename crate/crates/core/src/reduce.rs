//! Call-by-value small-step reduction over configurations `(G, M)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{typecheck_term, Const, Stc, Term, Type, TypeError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    pub generated: BTreeSet<u32>,
    pub term: Term,
}

impl Configuration {
    pub fn new(term: Term) -> Configuration {
        let generated = term.an();
        Configuration { generated, term }
    }

    pub fn with_names(generated: BTreeSet<u32>, term: Term) -> Configuration {
        Configuration { generated, term }
    }

    /// Closed, names covered by `generated`, and well typed.
    pub fn check(&self) -> Result<Type, ReduceError> {
        if !self.term.is_closed() {
            return Err(ReduceError::Open(self.term.clone()));
        }
        if !self.term.an().is_subset(&self.generated) {
            return Err(ReduceError::UnknownName(self.term.clone()));
        }
        Ok(typecheck_term(&Stc::new(), &self.term)?)
    }
}

pub fn fmt_names(g: &BTreeSet<u32>) -> String {
    let inner: Vec<String> = g.iter().map(|n| format!("#{n}")).collect();
    format!("{{{}}}", inner.join(", "))
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_names(&self.generated), self.term)
    }
}

/// Allocates fresh names as consecutive integers above the generated set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameAllocator {
    pub next: u32,
}

impl NameAllocator {
    pub fn new(seed: u32) -> NameAllocator {
        NameAllocator { next: seed }
    }

    pub fn fresh(&mut self, generated: &BTreeSet<u32>) -> u32 {
        let floor = generated.iter().next_back().map_or(0, |m| m + 1);
        let n = self.next.max(floor);
        self.next = n + 1;
        n
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("stuck on non-value `{0}`")]
    Stuck(Term),
    #[error("open term `{0}`")]
    Open(Term),
    #[error("term `{0}` mentions names outside the generated set")]
    UnknownName(Term),
    #[error("ill-typed configuration: {0}")]
    Type(#[from] TypeError),
    #[error("step limit exceeded")]
    StepLimit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Next(Configuration),
    /// The term is a value.
    Value,
    /// The term is not a value and no rule applies.
    Stuck,
}

enum Local {
    Reduced(Term),
    Value,
    Stuck,
}

fn step_term(t: &Term, g: &mut BTreeSet<u32>, alloc: &mut NameAllocator) -> Local {
    use Local::*;
    // Reduce inside the leftmost non-value position, else contract the redex at the root.
    macro_rules! sub {
        ($x:expr, $rebuild:expr) => {
            match step_term($x, g, alloc) {
                Reduced(r) => return Reduced($rebuild(r)),
                Stuck => return Stuck,
                Value => {}
            }
        };
    }
    match t {
        Term::Name(_) | Term::Gensym | Term::Var(_) | Term::Const(_) | Term::Lam(..) => Value,
        Term::Pair(a, b) => {
            sub!(a, |r| Term::pair(r, (**b).clone()));
            sub!(b, |r| Term::pair((**a).clone(), r));
            Value
        }
        Term::App(f, a) => {
            sub!(f, |r| Term::app(r, (**a).clone()));
            sub!(a, |r| Term::app((**f).clone(), r));
            match &**f {
                Term::Lam(x, _, body) => Reduced(body.subst(x, a)),
                Term::Gensym if **a == Term::unit() => {
                    let n = alloc.fresh(g);
                    g.insert(n);
                    Reduced(Term::Name(n))
                }
                _ => Stuck,
            }
        }
        Term::Let(x, m, n) => {
            sub!(m, |r| Term::Let(x.clone(), Box::new(r), n.clone()));
            Reduced(n.subst(x, m))
        }
        Term::Eq(a, b) => {
            sub!(a, |r| Term::eq(r, (**b).clone()));
            sub!(b, |r| Term::eq((**a).clone(), r));
            match (&**a, &**b) {
                (Term::Name(x), Term::Name(y)) => Reduced(Term::bool(x == y)),
                (Term::Const(x), Term::Const(y)) => Reduced(Term::bool(x == y)),
                _ => Stuck,
            }
        }
        Term::If(c, a, b) => {
            sub!(c, |r| Term::if_(r, (**a).clone(), (**b).clone()));
            match &**c {
                Term::Const(Const::True) => Reduced((**a).clone()),
                Term::Const(Const::False) => Reduced((**b).clone()),
                _ => Stuck,
            }
        }
        Term::Proj(i, p) => {
            sub!(p, |r| Term::proj(*i, r));
            match &**p {
                Term::Pair(l, r) => Reduced(if *i == 1 { (**l).clone() } else { (**r).clone() }),
                _ => Stuck,
            }
        }
    }
}

/// One reduction step.
pub fn step(cfg: &Configuration, alloc: &mut NameAllocator) -> Step {
    let mut g = cfg.generated.clone();
    match step_term(&cfg.term, &mut g, alloc) {
        Local::Reduced(t) => Step::Next(Configuration { generated: g, term: t }),
        Local::Value => Step::Value,
        Local::Stuck => Step::Stuck,
    }
}

/// Reduce to a value.
pub fn evaluate(cfg: &Configuration, alloc: &mut NameAllocator) -> Result<Configuration, ReduceError> {
    let mut cur = cfg.clone();
    loop {
        match step(&cur, alloc) {
            Step::Next(n) => cur = n,
            Step::Value => return Ok(cur),
            Step::Stuck => return Err(ReduceError::Stuck(cur.term)),
        }
    }
}

/// Every configuration along the reduction, starting with `cfg`.
pub fn trace(cfg: &Configuration, alloc: &mut NameAllocator) -> Result<Vec<Configuration>, ReduceError> {
    let mut out = vec![cfg.clone()];
    loop {
        let cur = out.last().expect("non-empty");
        match step(cur, alloc) {
            Step::Next(n) => out.push(n),
            Step::Value => return Ok(out),
            Step::Stuck => return Err(ReduceError::Stuck(cur.term.clone())),
        }
    }
}

/// Rename names not in `keep` to consecutive ids above `keep`, in order of first appearance.
pub fn canonicalize_fresh(v: &Term, keep: &BTreeSet<u32>) -> Term {
    let mut order = Vec::new();
    v.names_in_order(&mut order);
    let base = keep.iter().next_back().map_or(0, |m| m + 1);
    let mut map = std::collections::BTreeMap::new();
    let mut next = base;
    for n in order {
        if !keep.contains(&n) {
            map.insert(n, next);
            next += 1;
        }
    }
    v.map_names(&|n| *map.get(&n).unwrap_or(&n))
}
