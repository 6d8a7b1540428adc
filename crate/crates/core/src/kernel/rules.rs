//! Rules of inference for triples.

use super::{mismatch, side, Judgement, Justification, KernelError, ProofLine, RuleId, Witness, Witnesses};
use crate::classify::{is_syn_ext_ind_in, is_thin};
use crate::fol;
use crate::logic::{alpha_eq_formula, resolve_ltc_refs, Expr, Formula, Ltc, LtcEntry, Triple};
use crate::subst::subst_expr;
use crate::term::{alpha_eq, typecheck_term, Const, Ident, Term, Type};

type Check = Result<(), KernelError>;

fn equiv(a: &Formula, b: &Formula) -> bool {
    alpha_eq_formula(a, b) || fol::equivalent(a, b)
}

fn triple(line: &ProofLine) -> Result<&Triple, KernelError> {
    match &line.judgement {
        Judgement::Triple(t) => Ok(t),
        Judgement::Entail(..) => Err(mismatch(format!("`{}` is not a triple", line.label))),
    }
}

fn program_type(ltc: &Ltc, m: &Term) -> Result<Type, KernelError> {
    typecheck_term(&ltc.to_stc(), m).map_err(|e| KernelError::Type(e.to_string()))
}

fn expect(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(mismatch(msg()))
    }
}

fn same_formula(what: &str, got: &Formula, want: &Formula) -> Check {
    expect(equiv(got, want), || format!("{what} is `{got}`, expected `{want}`"))
}

fn thin(c: &Formula, x: &str, amb: &Ltc) -> Check {
    let r = is_thin(c, x, amb);
    if r.verdict {
        Ok(())
    } else {
        Err(side(format!("postcondition is not thin with respect to `{x}`: {r}")))
    }
}

fn ext_ind(a: &Formula, amb: &Ltc, what: &str) -> Check {
    let r = is_syn_ext_ind_in(a, amb);
    if r.verdict {
        Ok(())
    } else {
        Err(side(format!("{what} is not Ext-Ind: {r}")))
    }
}

fn premises<'a>(ps: &[&'a ProofLine], n: usize, rule: RuleId) -> Result<Vec<&'a ProofLine>, KernelError> {
    if ps.len() == n {
        Ok(ps.to_vec())
    } else {
        Err(mismatch(format!("[{rule}] takes {n} premise(s), got {}", ps.len())))
    }
}

/// A premise `ltc ⊩ {pre} program :anchor {post}` with the expected LTC and program.
fn premise_triple<'a>(p: &'a ProofLine, ltc: &Ltc, program: &Term) -> Result<&'a Triple, KernelError> {
    let t = triple(p)?;
    expect(p.ltc == *ltc, || format!("premise `{}` is under {}, expected {ltc}", p.label, p.ltc))?;
    expect(alpha_eq(&t.program, program), || {
        format!("premise `{}` is about `{}`, expected `{program}`", p.label, t.program)
    })?;
    Ok(t)
}

fn fresh_anchor(ltc: &Ltc, m: &Ident, what: &str) -> Check {
    expect(!ltc.contains(m), || format!("{what} `{m}` clashes with the LTC"))
}

fn formula_witness(w: &Witnesses, key: &str, amb: &Ltc) -> Result<Option<Formula>, KernelError> {
    match w.get(key) {
        None => Ok(None),
        Some(Witness::Formula(f)) => Ok(Some(resolve_ltc_refs(amb, f))),
        Some(other) => Err(mismatch(format!("witness `{key}` must be a formula, got {other}"))),
    }
}

fn check_witness_keys(w: &Witnesses, allowed: &[&str], rule: RuleId) -> Check {
    match w.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(mismatch(format!("[{rule}] takes no witness `{k}`"))),
        None => Ok(()),
    }
}

/// Check a rule application on `line` from resolved `premises`.
pub fn check_rule(line: &ProofLine, premises_in: &[&ProofLine]) -> Check {
    let Justification::Rule { rule, witnesses, .. } = &line.justification else {
        return Err(mismatch("not a rule application"));
    };
    let rule = *rule;
    let g = &line.ltc;
    let t = triple(line)?;
    let ty = program_type(g, &t.program)?;
    let u = &t.anchor;
    let post_ltc = g.with_var(u, ty.clone());
    let allowed: &[&str] = match rule {
        RuleId::Lam => &["B"],
        RuleId::Invar => &["C"],
        _ => &[],
    };
    check_witness_keys(witnesses, allowed, rule)?;
    match rule {
        RuleId::Var | RuleId::Const => {
            premises(premises_in, 0, rule)?;
            let e = match (&t.program, rule) {
                (Term::Var(x), RuleId::Var) => Expr::Var(x.clone()),
                (Term::Const(c), RuleId::Const) => Expr::Const(*c),
                (m, _) => return Err(mismatch(format!("[{rule}] does not apply to `{m}`"))),
            };
            let want = subst_expr(&t.post, &e, u, &post_ltc).map_err(|e| side(e.to_string()))?;
            same_formula("precondition", &t.pre, &want)
        }
        RuleId::Gensym => {
            premises(premises_in, 0, rule)?;
            expect(t.program == Term::Gensym, || format!("[Gensym] does not apply to `{}`", t.program))?;
            expect(t.pre == Formula::True, || "[Gensym] has precondition T".into())?;
            let ok = match &t.post {
                Formula::ForallTcv { tcv, body } => match &**body {
                    Formula::Eval { fun: Expr::Var(f), arg: Expr::Const(Const::Unit), anchor, body } => {
                        f == u && **body == Formula::fresh(Expr::Var(anchor.clone()), Ltc(vec![LtcEntry::Tcv(tcv.clone())]))
                    }
                    _ => false,
                },
                _ => false,
            };
            expect(ok, || format!("[Gensym] postcondition must be `allctx d. [{u} () => n] n # (d)`"))
        }
        RuleId::Eq | RuleId::App | RuleId::Pair => {
            let (m1, m2) = match (&t.program, rule) {
                (Term::Eq(a, b), RuleId::Eq) | (Term::App(a, b), RuleId::App) | (Term::Pair(a, b), RuleId::Pair) => (a, b),
                (m, _) => return Err(mismatch(format!("[{rule}] does not apply to `{m}`"))),
            };
            let ps = premises(premises_in, 2, rule)?;
            let p1 = premise_triple(ps[0], g, m1)?;
            same_formula("first premise precondition", &p1.pre, &t.pre)?;
            let m = &p1.anchor;
            fresh_anchor(g, m, "anchor")?;
            let t1 = program_type(g, m1)?;
            let g_m = g.with_var(m, t1.clone());
            let p2 = premise_triple(ps[1], &g_m, m2)?;
            same_formula("second premise precondition", &p2.pre, &p1.post)?;
            let n = &p2.anchor;
            fresh_anchor(&g_m, n, "anchor")?;
            let t2 = program_type(&g_m, m2)?;
            let full = g_m.with_var(n, t2).with_var(u, ty.clone());
            let (vm, vn) = (Expr::Var(m.clone()), Expr::Var(n.clone()));
            let want = match rule {
                RuleId::App => Formula::eval(vm, vn, u, t.post.clone()),
                RuleId::Eq => subst_expr(&t.post, &Expr::eq_test(vm, vn), u, &full).map_err(|e| side(e.to_string()))?,
                _ => subst_expr(&t.post, &Expr::pair(vm, vn), u, &full).map_err(|e| side(e.to_string()))?,
            };
            same_formula("second premise postcondition", &p2.post, &want)?;
            thin(&t.post, m, &full)?;
            thin(&t.post, n, &full)
        }
        RuleId::ProjI => {
            let Term::Proj(i, m1) = &t.program else {
                return Err(mismatch(format!("[ProjI] does not apply to `{}`", t.program)));
            };
            let ps = premises(premises_in, 1, rule)?;
            let p1 = premise_triple(ps[0], g, m1)?;
            same_formula("premise precondition", &p1.pre, &t.pre)?;
            let m = &p1.anchor;
            fresh_anchor(g, m, "anchor")?;
            let full = g.with_var(m, program_type(g, m1)?).with_var(u, ty.clone());
            let want = subst_expr(&t.post, &Expr::proj(*i, Expr::Var(m.clone())), u, &full)
                .map_err(|e| side(e.to_string()))?;
            same_formula("premise postcondition", &p1.post, &want)?;
            thin(&t.post, m, &full)
        }
        RuleId::If => {
            let Term::If(c, a, b) = &t.program else {
                return Err(mismatch(format!("[If] does not apply to `{}`", t.program)));
            };
            let ps = premises(premises_in, 3, rule)?;
            let p1 = premise_triple(ps[0], g, c)?;
            same_formula("guard precondition", &p1.pre, &t.pre)?;
            let bvar = &p1.anchor;
            fresh_anchor(g, bvar, "anchor")?;
            let gb = g.with_var(bvar, Type::Bool);
            for (p, branch, val) in [(ps[1], a, true), (ps[2], b, false)] {
                let pt = premise_triple(p, g, branch)?;
                let want = subst_expr(&p1.post, &Expr::bool(val), bvar, &gb).map_err(|e| side(e.to_string()))?;
                same_formula(&format!("{val} branch precondition"), &pt.pre, &want)?;
                expect(pt.anchor == *u, || format!("branch anchor `{}` differs from `{u}`", pt.anchor))?;
                same_formula(&format!("{val} branch postcondition"), &pt.post, &t.post)?;
            }
            Ok(())
        }
        RuleId::Let => {
            let Term::Let(x, m1, m2) = &t.program else {
                return Err(mismatch(format!("[Let] does not apply to `{}`", t.program)));
            };
            let ps = premises(premises_in, 2, rule)?;
            let p1 = premise_triple(ps[0], g, m1)?;
            same_formula("first premise precondition", &p1.pre, &t.pre)?;
            expect(p1.anchor == *x, || format!("first premise anchor must be `{x}`"))?;
            fresh_anchor(g, x, "bound variable")?;
            let gx = g.with_var(x, program_type(g, m1)?);
            let p2 = premise_triple(ps[1], &gx, m2)?;
            same_formula("second premise precondition", &p2.pre, &p1.post)?;
            expect(p2.anchor == *u, || format!("second premise anchor must be `{u}`"))?;
            same_formula("second premise postcondition", &p2.post, &t.post)?;
            thin(&t.post, x, &gx.with_var(u, ty.clone()))
        }
        RuleId::LetFresh => {
            let Term::Let(x, m1, n) = &t.program else {
                return Err(mismatch(format!("[LetFresh] does not apply to `{}`", t.program)));
            };
            expect(**m1 == Term::app(Term::Gensym, Term::unit()), || {
                format!("[LetFresh] binds `gensym ()`, not `{m1}`")
            })?;
            let ps = premises(premises_in, 1, rule)?;
            fresh_anchor(g, x, "bound variable")?;
            let gx = g.with_var(x, Type::Nm);
            let p1 = premise_triple(ps[0], &gx, n)?;
            let want = Formula::and(t.pre.clone(), Formula::fresh(Expr::Var(x.clone()), g.clone()));
            same_formula("premise precondition", &p1.pre, &want)?;
            expect(p1.anchor == *u, || format!("premise anchor must be `{u}`"))?;
            same_formula("premise postcondition", &p1.post, &t.post)?;
            ext_ind(&t.pre, g, "precondition")?;
            thin(&t.post, x, &gx.with_var(u, ty.clone()))
        }
        RuleId::Lam => {
            let Term::Lam(x, alpha, body) = &t.program else {
                return Err(mismatch(format!("[Lam] does not apply to `{}`", t.program)));
            };
            let ps = premises(premises_in, 1, rule)?;
            let p = ps[0];
            let n = g.len();
            let shape_ok = p.ltc.len() == n + 2
                && p.ltc.0[..n] == g.0[..]
                && p.ltc.0[n].is_tcv()
                && p.ltc.0[n + 1] == LtcEntry::Var(x.clone(), alpha.clone());
            expect(shape_ok, || format!("premise LTC must be {g} + d + {x}:{alpha}, got {}", p.ltc))?;
            let d = p.ltc.0[n].name().clone();
            fresh_anchor(g, &d, "TCV")?;
            let pt = premise_triple(p, &p.ltc, body)?;
            let b = formula_witness(witnesses, "B", &p.ltc)?.unwrap_or(Formula::True);
            same_formula("premise precondition", &pt.pre, &Formula::and(t.pre.clone(), b.clone()))?;
            expect(!t.pre.fv().contains(x), || format!("`{x}` is free in the precondition"))?;
            ext_ind(&t.pre, g, "precondition")?;
            let m = &pt.anchor;
            let want = Formula::forall_tcv(
                &d,
                Formula::forall_in(
                    x,
                    alpha.clone(),
                    Ltc(vec![LtcEntry::Tcv(d.clone())]),
                    Formula::implies(b, Formula::eval(Expr::Var(u.clone()), Expr::Var(x.clone()), m, pt.post.clone())),
                ),
            );
            same_formula("postcondition", &t.post, &want)
        }
        RuleId::Invar => {
            let ps = premises(premises_in, 1, rule)?;
            let pt = premise_triple(ps[0], g, &t.program)?;
            expect(pt.anchor == *u, || format!("premise anchor must be `{u}`"))?;
            let c = formula_witness(witnesses, "C", g)?.ok_or_else(|| mismatch("[Invar] needs the witness C"))?;
            same_formula("precondition", &t.pre, &Formula::and(pt.pre.clone(), c.clone()))?;
            same_formula("postcondition", &t.post, &Formula::and(pt.post.clone(), c.clone()))?;
            expect(!c.fv().contains(u), || format!("`{u}` is free in C"))?;
            ext_ind(&c, g, "C")
        }
        RuleId::Conseq => {
            let triples: Vec<&&ProofLine> =
                premises_in.iter().filter(|p| matches!(p.judgement, Judgement::Triple(_))).collect();
            expect(triples.len() == 1, || "[Conseq] takes exactly one triple premise".into())?;
            let pt = premise_triple(triples[0], g, &t.program)?;
            expect(pt.anchor == *u, || format!("premise anchor must be `{u}`"))?;
            let entails: Vec<&&ProofLine> =
                premises_in.iter().filter(|p| matches!(p.judgement, Judgement::Entail(..))).collect();
            discharge(g, &t.pre, &pt.pre, &entails, "precondition")?;
            discharge(&post_ltc, &pt.post, &t.post, &entails, "postcondition")
        }
        RuleId::AndPost => {
            let ps = premises(premises_in, 2, rule)?;
            let p1 = premise_triple(ps[0], g, &t.program)?;
            let p2 = premise_triple(ps[1], g, &t.program)?;
            for p in [p1, p2] {
                expect(p.anchor == *u, || format!("premise anchor must be `{u}`"))?;
                same_formula("premise precondition", &p.pre, &t.pre)?;
            }
            same_formula("postcondition", &t.post, &Formula::and(p1.post.clone(), p2.post.clone()))
        }
        RuleId::AndImplies => {
            let ps = premises(premises_in, 1, rule)?;
            let pt = premise_triple(ps[0], g, &t.program)?;
            expect(pt.anchor == *u, || format!("premise anchor must be `{u}`"))?;
            let Formula::Implies(b, c) = &t.post else {
                return Err(mismatch("[AndImplies] concludes a postcondition B -> C"));
            };
            same_formula("premise precondition", &pt.pre, &Formula::and(t.pre.clone(), (**b).clone()))?;
            same_formula("premise postcondition", &pt.post, c)?;
            expect(!b.fv().contains(u), || format!("`{u}` is free in B"))?;
            ext_ind(b, g, "B")
        }
    }
}

/// `ltc ⊩ a ⟹ b`, by α-equivalence, by a cited entailment line, or by the decider.
fn discharge(ltc: &Ltc, a: &Formula, b: &Formula, cited: &[&&ProofLine], what: &str) -> Check {
    if alpha_eq_formula(a, b) {
        return Ok(());
    }
    for p in cited {
        if let Judgement::Entail(l, r) = &p.judgement {
            if p.ltc == *ltc && alpha_eq_formula(l, a) && alpha_eq_formula(r, b) {
                return Ok(());
            }
        }
    }
    if fol::entails(a, b) {
        return Ok(());
    }
    Err(mismatch(format!("{what}: no cited entailment {ltc} |- {a} ==> {b}")))
}
