//! Size-indexed enumeration of well-typed terms, optionally with exactly one hole.
//!
//! Used for contextual-equivalence search and for derived-value search. Results are
//! memoized per (binder types, target type, size, hole) and returned in a fixed order,
//! so enumeration is deterministic.

use std::collections::HashMap;
use std::sync::Arc;

use itertools::Itertools;

use crate::term::{ident, Const, Ident, Term, Type};

#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Free variables available to generated terms.
    pub free: Vec<(Ident, Type)>,
    /// Name constants allowed in generated terms.
    pub names: Vec<u32>,
    /// Type of the hole, when generating contexts.
    pub hole: Option<Type>,
    /// Types allowed for binders, application functions and arguments, and projected
    /// pairs. Keeping intermediate types inside a finite set bounds the search.
    pub universe: Vec<Type>,
    /// Allow `gensym` in generated terms.
    pub gensym: bool,
}

impl GenConfig {
    /// Base universe plus every component of the given types.
    pub fn universe_for(types: &[Type]) -> Vec<Type> {
        let mut out = vec![Type::Unit, Type::Bool, Type::Nm, Type::arrow(Type::Unit, Type::Nm)];
        fn walk(t: &Type, out: &mut Vec<Type>) {
            if !out.contains(t) {
                out.push(t.clone());
            }
            match t {
                Type::Arrow(a, b) | Type::Prod(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                _ => {}
            }
        }
        for t in types {
            walk(t, &mut out);
        }
        out
    }
}

type Key = (Vec<Type>, Type, usize, bool);

pub struct Generator {
    cfg: GenConfig,
    prefix: String,
    memo: HashMap<Key, Arc<Vec<Term>>>,
}

impl Generator {
    pub fn new(cfg: GenConfig) -> Generator {
        // Binder names are `<prefix><depth>`; pick a prefix no free variable can collide with.
        let mut prefix = String::from("p");
        while cfg.free.iter().any(|(x, _)| {
            x.strip_prefix(prefix.as_str()).is_some_and(|r| r.chars().all(|c| c.is_ascii_digit()))
        }) {
            prefix.push('_');
        }
        Generator { cfg, prefix, memo: HashMap::new() }
    }

    pub fn config(&self) -> &GenConfig {
        &self.cfg
    }

    fn binder(&self, depth: usize) -> Ident {
        ident(&format!("{}{}", self.prefix, depth))
    }

    /// Closed-over-free-variables terms of type `ty` and exactly `size` nodes.
    pub fn terms(&mut self, ty: &Type, size: usize) -> Arc<Vec<Term>> {
        self.gen(&[], ty, size, false)
    }

    /// Contexts of type `ty`, exactly `size` nodes and exactly one hole.
    pub fn contexts(&mut self, ty: &Type, size: usize) -> Arc<Vec<Term>> {
        self.gen(&[], ty, size, true)
    }

    fn gen(&mut self, env: &[Type], ty: &Type, size: usize, hole: bool) -> Arc<Vec<Term>> {
        let key = (env.to_vec(), ty.clone(), size, hole);
        if let Some(r) = self.memo.get(&key) {
            return r.clone();
        }
        let r = Arc::new(self.build(env, ty, size, hole));
        self.memo.insert(key, r.clone());
        r
    }

    fn build(&mut self, env: &[Type], ty: &Type, size: usize, hole: bool) -> Vec<Term> {
        let mut out = Vec::new();
        if size == 0 {
            return out;
        }
        if size == 1 {
            if hole {
                if self.cfg.hole.as_ref() == Some(ty) {
                    out.push(Term::hole());
                }
                return out;
            }
            for (x, t) in &self.cfg.free {
                if t == ty {
                    out.push(Term::Var(x.clone()));
                }
            }
            for (i, t) in env.iter().enumerate() {
                if t == ty {
                    out.push(Term::Var(self.binder(i)));
                }
            }
            match ty {
                Type::Unit => out.push(Term::Const(Const::Unit)),
                Type::Bool => {
                    out.push(Term::Const(Const::True));
                    out.push(Term::Const(Const::False));
                }
                Type::Nm => out.extend(self.cfg.names.iter().map(|n| Term::Name(*n))),
                Type::Arrow(a, b) if **a == Type::Unit && **b == Type::Nm && self.cfg.gensym => {
                    out.push(Term::Gensym)
                }
                _ => {}
            }
            return out;
        }
        let universe = self.cfg.universe.clone();
        let holes: &[(bool, bool)] = if hole { &[(true, false), (false, true)] } else { &[(false, false)] };
        let holes3: &[(bool, bool, bool)] = if hole {
            &[(true, false, false), (false, true, false), (false, false, true)]
        } else {
            &[(false, false, false)]
        };

        // Lambda
        if let Type::Arrow(a, b) = ty {
            if universe.contains(a) {
                let mut env2 = env.to_vec();
                env2.push((**a).clone());
                let x = self.binder(env.len());
                for body in self.gen(&env2, b, size - 1, hole).iter() {
                    out.push(Term::Lam(x.clone(), (**a).clone(), Box::new(body.clone())));
                }
            }
        }
        // Application. A function that is itself a lambda would be a beta-redex, which is
        // observationally a smaller `let`, so those are skipped.
        for alpha in &universe {
            let fty = Type::arrow(alpha.clone(), ty.clone());
            if !universe.contains(&fty) {
                continue;
            }
            for s1 in 1..size - 1 {
                let s2 = size - 1 - s1;
                for &(h1, h2) in holes {
                    let fs = self.gen(env, &fty, s1, h1);
                    if fs.is_empty() {
                        continue;
                    }
                    let args = self.gen(env, alpha, s2, h2);
                    for (f, a) in fs.iter().filter(|f| !matches!(f, Term::Lam(..))).cartesian_product(args.iter()) {
                        out.push(Term::app(f.clone(), a.clone()));
                    }
                }
            }
        }
        // Let
        for alpha in &universe {
            let mut env2 = env.to_vec();
            env2.push(alpha.clone());
            let x = self.binder(env.len());
            for s1 in 1..size - 1 {
                let s2 = size - 1 - s1;
                for &(h1, h2) in holes {
                    let ms = self.gen(env, alpha, s1, h1);
                    if ms.is_empty() {
                        continue;
                    }
                    let ns = self.gen(&env2, ty, s2, h2);
                    for (m, n) in ms.iter().cartesian_product(ns.iter()) {
                        out.push(Term::Let(x.clone(), Box::new(m.clone()), Box::new(n.clone())));
                    }
                }
            }
        }
        // Equality
        if *ty == Type::Bool {
            for alpha in [Type::Nm, Type::Bool, Type::Unit] {
                for s1 in 1..size - 1 {
                    let s2 = size - 1 - s1;
                    for &(h1, h2) in holes {
                        let ls = self.gen(env, &alpha, s1, h1);
                        if ls.is_empty() {
                            continue;
                        }
                        let rs = self.gen(env, &alpha, s2, h2);
                        for (l, r) in ls.iter().cartesian_product(rs.iter()) {
                            out.push(Term::eq(l.clone(), r.clone()));
                        }
                    }
                }
            }
        }
        // Conditional
        for s1 in 1..size {
            for s2 in 1..size {
                if s1 + s2 + 1 >= size {
                    continue;
                }
                let s3 = size - 1 - s1 - s2;
                for &(h1, h2, h3) in holes3 {
                    let cs = self.gen(env, &Type::Bool, s1, h1);
                    if cs.is_empty() {
                        continue;
                    }
                    let as_ = self.gen(env, ty, s2, h2);
                    if as_.is_empty() {
                        continue;
                    }
                    let bs = self.gen(env, ty, s3, h3);
                    for ((c, a), b) in cs.iter().cartesian_product(as_.iter()).cartesian_product(bs.iter()) {
                        out.push(Term::if_(c.clone(), a.clone(), b.clone()));
                    }
                }
            }
        }
        // Pair
        if let Type::Prod(a, b) = ty {
            for s1 in 1..size - 1 {
                let s2 = size - 1 - s1;
                for &(h1, h2) in holes {
                    let ls = self.gen(env, a, s1, h1);
                    if ls.is_empty() {
                        continue;
                    }
                    let rs = self.gen(env, b, s2, h2);
                    for (l, r) in ls.iter().cartesian_product(rs.iter()) {
                        out.push(Term::pair(l.clone(), r.clone()));
                    }
                }
            }
        }
        // Projection
        for gamma in &universe {
            for (i, pty) in [(1u8, Type::prod(ty.clone(), gamma.clone())), (2u8, Type::prod(gamma.clone(), ty.clone()))] {
                if !universe.contains(&pty) {
                    continue;
                }
                for p in self.gen(env, &pty, size - 1, hole).iter() {
                    out.push(Term::proj(i, p.clone()));
                }
            }
        }
        out
    }
}
