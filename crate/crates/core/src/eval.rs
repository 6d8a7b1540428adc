//! Environment-based big-step evaluator.
//!
//! Agrees with the small-step relation in [`crate::reduce`] (checked by property tests) but
//! avoids re-traversing the term after every step, which matters for context enumeration.

use std::collections::BTreeSet;
use std::rc::Rc;

use crate::reduce::{NameAllocator, ReduceError};
use crate::term::{Const, Ident, Term, Type, HOLE};

#[derive(Clone, Debug)]
pub enum Val<'a> {
    Name(u32),
    Gensym,
    Const(Const),
    Clo(Rc<Closure<'a>>),
    Pair(Rc<Val<'a>>, Rc<Val<'a>>),
}

#[derive(Debug)]
pub struct Closure<'a> {
    env: Env<'a>,
    param: &'a Ident,
    ty: &'a Type,
    body: &'a Term,
}

pub type Env<'a> = Option<Rc<Frame<'a>>>;

#[derive(Debug)]
pub struct Frame<'a> {
    name: &'a str,
    val: Val<'a>,
    next: Env<'a>,
}

fn lookup<'a>(env: &Env<'a>, x: &str) -> Option<Val<'a>> {
    let mut cur = env;
    while let Some(f) = cur {
        if f.name == x {
            return Some(f.val.clone());
        }
        cur = &f.next;
    }
    None
}

fn bind<'a>(env: &Env<'a>, name: &'a str, val: Val<'a>) -> Env<'a> {
    Some(Rc::new(Frame { name, val, next: env.clone() }))
}

pub struct Machine<'g, 'a> {
    pub generated: &'g mut BTreeSet<u32>,
    pub alloc: &'g mut NameAllocator,
    /// Remaining evaluation fuel; guards against ill-typed inputs.
    pub fuel: usize,
    /// Closed program evaluated wherever the hole variable is reached.
    pub hole: Option<&'a Term>,
}

impl<'g, 'a> Machine<'g, 'a> {
    pub fn new(generated: &'g mut BTreeSet<u32>, alloc: &'g mut NameAllocator) -> Self {
        Machine { generated, alloc, fuel: DEFAULT_FUEL, hole: None }
    }

    pub fn eval(&mut self, t: &'a Term, env: &Env<'a>) -> Result<Val<'a>, ReduceError> {
        if self.fuel == 0 {
            return Err(ReduceError::StepLimit);
        }
        self.fuel -= 1;
        match t {
            Term::Name(n) => Ok(Val::Name(*n)),
            Term::Gensym => Ok(Val::Gensym),
            Term::Const(c) => Ok(Val::Const(*c)),
            Term::Var(x) => match (self.hole, &**x == HOLE) {
                (Some(m), true) => self.eval(m, &None),
                _ => lookup(env, x).ok_or_else(|| ReduceError::Open(t.clone())),
            },
            Term::Lam(x, ty, b) => Ok(Val::Clo(Rc::new(Closure { env: env.clone(), param: x, ty, body: b }))),
            Term::App(f, a) => {
                let fv = self.eval(f, env)?;
                let av = self.eval(a, env)?;
                self.apply(fv, av, t)
            }
            Term::Let(x, m, n) => {
                let mv = self.eval(m, env)?;
                let env2 = bind(env, x, mv);
                self.eval(n, &env2)
            }
            Term::Eq(a, b) => {
                let av = self.eval(a, env)?;
                let bv = self.eval(b, env)?;
                match (&av, &bv) {
                    (Val::Name(x), Val::Name(y)) => Ok(Val::Const(Const::from_bool(x == y))),
                    (Val::Const(x), Val::Const(y)) => Ok(Val::Const(Const::from_bool(x == y))),
                    _ => Err(ReduceError::Stuck(t.clone())),
                }
            }
            Term::If(c, a, b) => match self.eval(c, env)? {
                Val::Const(Const::True) => self.eval(a, env),
                Val::Const(Const::False) => self.eval(b, env),
                _ => Err(ReduceError::Stuck(t.clone())),
            },
            Term::Pair(a, b) => {
                let av = self.eval(a, env)?;
                let bv = self.eval(b, env)?;
                Ok(Val::Pair(Rc::new(av), Rc::new(bv)))
            }
            Term::Proj(i, p) => match self.eval(p, env)? {
                Val::Pair(l, r) => Ok(if *i == 1 { (*l).clone() } else { (*r).clone() }),
                _ => Err(ReduceError::Stuck(t.clone())),
            },
        }
    }

    pub fn apply(&mut self, f: Val<'a>, a: Val<'a>, at: &Term) -> Result<Val<'a>, ReduceError> {
        match f {
            Val::Clo(c) => {
                let env2 = bind(&c.env, c.param, a);
                self.eval(c.body, &env2)
            }
            Val::Gensym => {
                let n = self.alloc.fresh(self.generated);
                self.generated.insert(n);
                Ok(Val::Name(n))
            }
            _ => Err(ReduceError::Stuck(at.clone())),
        }
    }
}

/// Read a value back as a closed term.
pub fn readback(v: &Val<'_>) -> Term {
    match v {
        Val::Name(n) => Term::Name(*n),
        Val::Gensym => Term::Gensym,
        Val::Const(c) => Term::Const(*c),
        Val::Pair(a, b) => Term::pair(readback(a), readback(b)),
        Val::Clo(c) => {
            let mut body = c.body.clone();
            let mut shadow: Vec<&str> = vec![c.param.as_ref()];
            let mut cur = &c.env;
            let fv = c.body.fv();
            while let Some(fr) = cur {
                if fv.contains(fr.name) && !shadow.contains(&fr.name) {
                    body = body.subst(fr.name, &readback(&fr.val));
                    shadow.push(fr.name);
                }
                cur = &fr.next;
            }
            Term::Lam(c.param.clone(), c.ty.clone(), Box::new(body))
        }
    }
}

/// Default fuel: generous for the strongly normalizing calculus.
pub const DEFAULT_FUEL: usize = 1_000_000;

/// Evaluate a closed term to a closed value, updating the generated set.
pub fn eval_closed(
    t: &Term,
    generated: &mut BTreeSet<u32>,
    alloc: &mut NameAllocator,
) -> Result<Term, ReduceError> {
    let mut m = Machine::new(generated, alloc);
    let v = m.eval(t, &None)?;
    Ok(readback(&v))
}

/// Evaluate a closed Boolean term.
pub fn eval_bool(t: &Term, generated: &BTreeSet<u32>) -> Result<bool, ReduceError> {
    eval_bool_plugged(t, None, generated)
}

/// Evaluate the Boolean context `ctx` with `program` standing in for its hole.
pub fn eval_bool_plugged(
    ctx: &Term,
    program: Option<&Term>,
    generated: &BTreeSet<u32>,
) -> Result<bool, ReduceError> {
    let mut g = generated.clone();
    let mut alloc = NameAllocator::default();
    let mut m = Machine::new(&mut g, &mut alloc);
    m.hole = program;
    match m.eval(ctx, &None)? {
        Val::Const(Const::True) => Ok(true),
        Val::Const(Const::False) => Ok(false),
        _ => Err(ReduceError::Stuck(ctx.clone())),
    }
}

/// Evaluate `t` under an environment of closed values for its free variables.
pub fn eval_with(
    t: &Term,
    bindings: &[(Ident, Term)],
    generated: &mut BTreeSet<u32>,
    alloc: &mut NameAllocator,
) -> Result<Term, ReduceError> {
    let mut closed = t.clone();
    for (x, v) in bindings {
        closed = closed.subst(x, v);
    }
    eval_closed(&closed, generated, alloc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;
    use crate::reduce::{evaluate, Configuration};
    use crate::term::alpha_eq;

    fn both(src: &str) -> (Term, Term) {
        let t = parse_term(src).unwrap();
        let small = evaluate(&Configuration::new(t.clone()), &mut NameAllocator::new(0)).unwrap().term;
        let mut g = t.an();
        let big = eval_closed(&t, &mut g, &mut NameAllocator::new(0)).unwrap();
        (small, big)
    }

    #[test]
    fn agrees_with_small_step() {
        for src in [
            "gensym () = gensym ()",
            "let x = gensym () in x = x",
            "let x = gensym () in \\y:Nm. x = y",
            "let f = \\x:Nm. \\y:Nm. x = y in f (gensym ())",
            "pi2 <gensym (), gensym ()>",
            "if true then <(), false> else <(), true>",
        ] {
            let (s, b) = both(src);
            assert!(alpha_eq(&s, &b), "{src}: {s} vs {b}");
        }
    }

    #[test]
    fn readback_substitutes_environment() {
        let (_, b) = both("let x = gensym () in \\y:Nm. x = y");
        assert_eq!(b, parse_term("\\y:Nm. #0 = y").unwrap());
    }

    #[test]
    fn readback_respects_shadowing() {
        let (_, b) = both("let x = true in \\x:Bool. x");
        assert_eq!(b, parse_term("\\x:Bool. x").unwrap());
    }
}
