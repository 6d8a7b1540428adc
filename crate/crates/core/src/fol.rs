//! Decision procedure for the propositional-modal fragment of the assertion language.
//!
//! Quantifiers are read as modal operators: `∀x∈Γ` and `∀δ` are boxes whose successor
//! worlds bind the quantified variable, and evaluation formulae are a total functional
//! modality (every application terminates with exactly one result). Atoms are equalities
//! over logical expressions, decided by congruence closure with pairs, projections and
//! equality tests, and freshness atoms, which are opaque apart from the rule that a name
//! typable from `Γ0` is never fresh for `Γ0`.
//!
//! The procedure is sound for validity: `valid` returning true means the formula holds in
//! every model. It is incomplete for the quantifiers.

use std::cell::Cell;
use std::collections::HashMap;

use crate::logic::{Expr, Formula, Ltc, LtcEntry};
use crate::term::{ident, Const, Ident, Type};

#[derive(Clone, Debug)]
enum Kind {
    Eval(Expr, Expr),
    In(Type, Ltc),
    Ctx,
}

#[derive(Clone, Debug)]
struct Modal {
    kind: Kind,
    binder: Ident,
    body: Formula,
    sign: bool,
    /// Universal (box) or existential (diamond). Evaluation is always universal.
    boxed: bool,
}

#[derive(Clone, Debug, Default)]
struct Branch {
    eqs: Vec<(Expr, Expr, bool)>,
    fresh: Vec<(Expr, Ltc, bool)>,
    modals: Vec<Modal>,
}

struct Decider {
    counter: Cell<usize>,
    budget: Cell<usize>,
}

const STEP_BUDGET: usize = 200_000;

/// True iff `a` is valid. Exhausting the internal step budget answers false.
pub fn valid(a: &Formula) -> bool {
    let d = Decider { counter: Cell::new(0), budget: Cell::new(STEP_BUDGET) };
    !d.sat(vec![(a.clone(), false)])
}

pub fn entails(a: &Formula, b: &Formula) -> bool {
    valid(&Formula::implies(a.clone(), b.clone()))
}

pub fn equivalent(a: &Formula, b: &Formula) -> bool {
    crate::logic::alpha_eq_formula(a, b) || (entails(a, b) && entails(b, a))
}

impl Decider {
    fn fresh_name(&self) -> Ident {
        let n = self.counter.get();
        self.counter.set(n + 1);
        ident(&format!("%w{n}"))
    }

    fn tick(&self) -> bool {
        let b = self.budget.get();
        if b == 0 {
            return false;
        }
        self.budget.set(b - 1);
        true
    }

    fn sat(&self, todo: Vec<(Formula, bool)>) -> bool {
        self.expand(todo, Branch::default())
    }

    fn expand(&self, mut todo: Vec<(Formula, bool)>, mut br: Branch) -> bool {
        if !self.tick() {
            // Out of budget: claim satisfiable, which can only make `valid` answer false.
            return true;
        }
        while let Some((f, s)) = todo.pop() {
            let implies_tag = matches!(f, Formula::Implies(..));
            match (f, s) {
                (Formula::True, true) | (Formula::False, false) => {}
                (Formula::True, false) | (Formula::False, true) => return false,
                (Formula::Eq(a, b), s) => br.eqs.push((a, b, s)),
                (Formula::Fresh(e, g), s) => br.fresh.push((e, g, s)),
                (Formula::Not(a), s) => todo.push((*a, !s)),
                (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
                    todo.push((*a, s));
                    todo.push((*b, s));
                }
                (Formula::Implies(a, b), false) => {
                    todo.push((*a, true));
                    todo.push((*b, false));
                }
                (Formula::And(a, b), false) | (Formula::Or(a, b), true) | (Formula::Implies(a, b), true) => {
                    // For implication the left disjunct is the negated antecedent.
                    let (l, r) = if implies_tag { ((*a, false), (*b, true)) } else { ((*a, s), (*b, s)) };
                    let mut left = todo.clone();
                    left.push(l);
                    if self.expand(left, br.clone()) {
                        return true;
                    }
                    todo.push(r);
                }
                (Formula::Eval { fun, arg, anchor, body }, s) => br.modals.push(Modal {
                    kind: Kind::Eval(fun, arg),
                    binder: anchor,
                    body: *body,
                    sign: s,
                    boxed: true,
                }),
                (Formula::ForallIn { var, ty, ltc, body }, s) => br.modals.push(Modal {
                    kind: Kind::In(ty, ltc),
                    binder: var,
                    body: *body,
                    sign: s,
                    boxed: s,
                }),
                (Formula::ExistsIn { var, ty, ltc, body }, s) => br.modals.push(Modal {
                    kind: Kind::In(ty, ltc),
                    binder: var,
                    body: *body,
                    sign: s,
                    boxed: !s,
                }),
                (Formula::ForallTcv { tcv, body }, s) => {
                    br.modals.push(Modal { kind: Kind::Ctx, binder: tcv, body: *body, sign: s, boxed: s })
                }
                (Formula::ExistsTcv { tcv, body }, s) => {
                    br.modals.push(Modal { kind: Kind::Ctx, binder: tcv, body: *body, sign: s, boxed: !s })
                }
            }
        }
        self.close_atoms(&br)
    }

    /// Check the literals of a fully expanded branch, splitting on undecided equality
    /// tests, then check the successor worlds.
    fn close_atoms(&self, br: &Branch) -> bool {
        let mut cc = Cc::default();
        for (a, b, _) in &br.eqs {
            cc.intern(a);
            cc.intern(b);
        }
        for (e, _, _) in &br.fresh {
            cc.intern(e);
        }
        for m in &br.modals {
            if let Kind::Eval(f, a) = &m.kind {
                cc.intern(f);
                cc.intern(a);
            }
        }
        for (a, b, s) in &br.eqs {
            let (x, y) = (cc.intern(a), cc.intern(b));
            if *s {
                cc.union(x, y);
            } else {
                cc.diseq.push((x, y));
            }
        }
        self.split(cc, br)
    }

    fn split(&self, mut cc: Cc, br: &Branch) -> bool {
        if !self.tick() {
            return true;
        }
        if !cc.saturate() {
            return false;
        }
        if !fresh_consistent(&mut cc, br) {
            return false;
        }
        if let Some((t, a, b)) = cc.undecided_test() {
            let mut yes = cc.clone();
            let tt = yes.constant(Const::True);
            yes.union(t, tt);
            yes.union(a, b);
            if self.split(yes, br) {
                return true;
            }
            let ff = cc.constant(Const::False);
            cc.union(t, ff);
            cc.diseq.push((a, b));
            return self.split(cc, br);
        }
        self.worlds(&mut cc, br)
    }

    fn worlds(&self, cc: &mut Cc, br: &Branch) -> bool {
        // Evaluation: one successor per application, holding every body.
        let mut groups: Vec<((usize, usize), Vec<&Modal>)> = Vec::new();
        for m in &br.modals {
            if let Kind::Eval(f, a) = &m.kind {
                let key = (cc.find_expr(f), cc.find_expr(a));
                match groups.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, v)) => v.push(m),
                    None => groups.push((key, vec![m])),
                }
            }
        }
        for (_, ms) in &groups {
            let w = self.fresh_name();
            let mut todo = carried(br);
            todo.extend(ms.iter().map(|m| (m.body.rename_var(&m.binder, &w), m.sign)));
            if !self.sat(todo) {
                return false;
            }
        }
        // Quantifiers: one successor per diamond, or one for the boxes alone.
        let others: Vec<&Modal> = br.modals.iter().filter(|m| !matches!(m.kind, Kind::Eval(..))).collect();
        let mut seen_idx: Vec<usize> = Vec::new();
        for (i, m) in others.iter().enumerate() {
            let boxes: Vec<&&Modal> = others.iter().filter(|b| b.boxed && same_kind(&b.kind, &m.kind)).collect();
            if m.boxed {
                if seen_idx.iter().any(|&j| same_kind(&others[j].kind, &m.kind)) {
                    continue;
                }
                seen_idx.push(i);
                let has_dia = others.iter().any(|d| !d.boxed && same_kind(&d.kind, &m.kind));
                if has_dia {
                    continue;
                }
            }
            let w = self.fresh_name();
            let mut todo = carried(br);
            todo.extend(boxes.iter().map(|b| (rename(b, &w), b.sign)));
            if !m.boxed {
                todo.push((rename(m, &w), m.sign));
            }
            if !self.sat(todo) {
                return false;
            }
        }
        true
    }
}

/// Literals of the current world stay true in every successor, which only binds a fresh
/// variable.
fn carried(br: &Branch) -> Vec<(Formula, bool)> {
    let eqs = br.eqs.iter().map(|(a, b, s)| (Formula::Eq(a.clone(), b.clone()), *s));
    let fresh = br.fresh.iter().map(|(e, g, s)| (Formula::Fresh(e.clone(), g.clone()), *s));
    eqs.chain(fresh).collect()
}

fn rename(m: &Modal, w: &Ident) -> Formula {
    match m.kind {
        Kind::Ctx => m.body.rename_tcv(&m.binder, w),
        _ => m.body.rename_var(&m.binder, w),
    }
}

fn same_kind(a: &Kind, b: &Kind) -> bool {
    match (a, b) {
        (Kind::In(t1, g1), Kind::In(t2, g2)) => t1 == t2 && g1 == g2,
        (Kind::Ctx, Kind::Ctx) => true,
        _ => false,
    }
}

fn fresh_consistent(cc: &mut Cc, br: &Branch) -> bool {
    for (i, (e, g, s)) in br.fresh.iter().enumerate() {
        let c = cc.find_expr(e);
        if *s {
            // A term built from variables of `g` is derivable from `g`.
            let vars: Vec<&Ident> = g.0.iter().filter_map(|x| match x {
                LtcEntry::Var(v, _) => Some(v),
                LtcEntry::Tcv(_) => None,
            }).collect();
            for t in cc.terms_in_class(c) {
                if t.fv().iter().all(|v| vars.contains(&v)) && !matches!(t, Expr::Const(_)) {
                    return false;
                }
            }
        }
        for (e2, g2, s2) in &br.fresh[i + 1..] {
            if s != s2 && g == g2 && cc.find_expr(e2) == c {
                return false;
            }
        }
    }
    true
}

// Congruence closure over logical expressions.

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Leaf(Expr),
    Pair(usize, usize),
    Proj(u8, usize),
    Test(usize, usize),
}

#[derive(Clone, Debug, Default)]
struct Cc {
    nodes: Vec<Node>,
    exprs: Vec<Expr>,
    index: HashMap<Node, usize>,
    parent: Vec<usize>,
    diseq: Vec<(usize, usize)>,
}

impl Cc {
    fn intern(&mut self, e: &Expr) -> usize {
        let node = match e {
            Expr::Var(_) | Expr::Const(_) => Node::Leaf(e.clone()),
            Expr::Pair(a, b) => Node::Pair(self.intern(a), self.intern(b)),
            Expr::Proj(i, a) => Node::Proj(*i, self.intern(a)),
            Expr::EqTest(a, b) => Node::Test(self.intern(a), self.intern(b)),
        };
        if let Some(&i) = self.index.get(&node) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(node.clone());
        self.exprs.push(e.clone());
        self.index.insert(node, i);
        self.parent.push(i);
        i
    }

    fn constant(&mut self, c: Const) -> usize {
        self.intern(&Expr::Const(c))
    }

    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut j = i;
        while self.parent[j] != r {
            let next = self.parent[j];
            self.parent[j] = r;
            j = next;
        }
        r
    }

    fn find_expr(&mut self, e: &Expr) -> usize {
        let i = self.intern(e);
        self.find(i)
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    fn terms_in_class(&mut self, c: usize) -> Vec<Expr> {
        let members: Vec<usize> = (0..self.nodes.len()).filter(|&i| self.find(i) == c).collect();
        members.into_iter().map(|i| self.exprs[i].clone()).collect()
    }

    /// Close under the theory; false on contradiction.
    fn saturate(&mut self) -> bool {
        let (t, f) = (self.constant(Const::True), self.constant(Const::False));
        self.diseq.push((t, f));
        loop {
            let mut changed = false;
            let n = self.nodes.len();
            // Congruence.
            let mut sig: HashMap<Node, usize> = HashMap::new();
            for i in 0..n {
                let key = match self.nodes[i].clone() {
                    Node::Leaf(_) => continue,
                    Node::Pair(a, b) => Node::Pair(self.find(a), self.find(b)),
                    Node::Proj(k, a) => Node::Proj(k, self.find(a)),
                    Node::Test(a, b) => Node::Test(self.find(a), self.find(b)),
                };
                if let Some(&j) = sig.get(&key) {
                    if self.find(i) != self.find(j) {
                        self.union(i, j);
                        changed = true;
                    }
                } else {
                    sig.insert(key, i);
                }
            }
            // Pairs: projections and injectivity.
            let pairs: Vec<(usize, usize, usize)> = (0..n)
                .filter_map(|i| match self.nodes[i] {
                    Node::Pair(a, b) => Some((i, a, b)),
                    _ => None,
                })
                .collect();
            for i in 0..n {
                if let Node::Proj(k, a) = self.nodes[i] {
                    let ra = self.find(a);
                    for &(p, l, r) in &pairs {
                        if self.find(p) == ra {
                            let target = if k == 1 { l } else { r };
                            if self.find(i) != self.find(target) {
                                self.union(i, target);
                                changed = true;
                            }
                        }
                    }
                }
            }
            for (x, &(p, a, b)) in pairs.iter().enumerate() {
                for &(q, c, d) in &pairs[x + 1..] {
                    if self.find(p) == self.find(q) && (self.find(a) != self.find(c) || self.find(b) != self.find(d)) {
                        self.union(a, c);
                        self.union(b, d);
                        changed = true;
                    }
                }
            }
            // Equality tests.
            for i in 0..n {
                if let Node::Test(a, b) = self.nodes[i] {
                    let (ri, ra, rb) = (self.find(i), self.find(a), self.find(b));
                    let (rt, rf) = (self.find(t), self.find(f));
                    if ra == rb && ri != rt {
                        self.union(i, t);
                        changed = true;
                    } else if ri == rt && ra != rb {
                        self.union(a, b);
                        changed = true;
                    } else if ri == rf && !self.is_diseq(a, b) {
                        self.diseq.push((a, b));
                        changed = true;
                    } else if ri != rf && self.is_diseq(a, b) {
                        self.union(i, f);
                        changed = true;
                    }
                }
            }
            let ds = self.diseq.clone();
            if ds.iter().any(|&(a, b)| self.find(a) == self.find(b)) {
                return false;
            }
            // Distinct constants.
            let consts: Vec<usize> = (0..n).filter(|&i| matches!(self.nodes[i], Node::Leaf(Expr::Const(_)))).collect();
            for (x, &i) in consts.iter().enumerate() {
                for &j in &consts[x + 1..] {
                    if self.nodes[i] != self.nodes[j] && self.find(i) == self.find(j) {
                        return false;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn is_diseq(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        let ds = self.diseq.clone();
        ds.iter().any(|&(x, y)| {
            let (rx, ry) = (self.find(x), self.find(y));
            (rx == ra && ry == rb) || (rx == rb && ry == ra)
        })
    }

    fn undecided_test(&mut self) -> Option<(usize, usize, usize)> {
        let t = self.constant(Const::True);
        let f = self.constant(Const::False);
        for i in 0..self.nodes.len() {
            if let Node::Test(a, b) = self.nodes[i] {
                let r = self.find(i);
                if r != self.find(t) && r != self.find(f) {
                    return Some((i, a, b));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;

    fn v(s: &str) -> bool {
        valid(&parse_formula(s).unwrap())
    }

    #[test]
    fn propositional() {
        assert!(v("T"));
        assert!(!v("F"));
        assert!(v("x = y \\/ ~(x = y)"));
        assert!(v("(x = y /\\ y = z) -> x = z"));
        assert!(!v("x = y -> x = z"));
    }

    #[test]
    fn equality_theory() {
        assert!(v("x != y /\\ m = (x = y) -> m = false"));
        assert!(v("(x = y) = (x = y)"));
        assert!(v("false = true -> a = b"));
        assert!(v("x = b -> x = pi1 <b, c>"));
        assert!(v("c = pi2 <b, c>"));
        assert!(!v("m = (x = y) -> m = false"));
        assert!(v("~(x = y) -> (x = y) = false"));
    }

    #[test]
    fn modal_reasoning() {
        assert!(v("(allctx d. all y:Nm in (d). (T -> [u y => m] m = n)) -> allctx e. all z:Nm in (e). [u z => k] k = n"));
        assert!(v("[u y => m] (m = a /\\ m = b) -> [u y => k] k = a"));
        assert!(v("[u y => m] m = a /\\ [u y => m] m = b -> [u y => k] a = b"));
        assert!(v("(all x:Nm in (g). A = B) /\\ (ex x:Nm in (g). C = D) -> ex x:Nm in (g). (A = B /\\ C = D)"));
        assert!(!v("(ex x:Nm in (g). C = D) -> all x:Nm in (g). C = D"));
        assert!(v("~[u y => m] m = a -> [u y => m] m != a"));
        assert!(!v("[u y => m] m = a -> [v y => m] m = a"));
        assert!(v("u = v /\\ [u y => m] m = a -> [v y => m] m = a"));
    }

    #[test]
    fn freshness_atoms() {
        assert!(v("x # (g:Nm) -> x # (g:Nm)"));
        assert!(v("~(x # (x:Nm))"));
        assert!(v("x # (g:Nm) /\\ x = y -> y # (g:Nm)"));
        assert!(!v("x # (g:Nm) -> x # (h:Nm)"));
    }
}
