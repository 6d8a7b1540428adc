//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if any criterion
//! fails. Run with `cargo test -p nu-hoare --test acceptance`.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRng, TestRunner};
use rayon::prelude::*;

use nu_core::classify::{is_syn_ext_ind_in, is_thin, parse_stlc_triple, translate_stlc_triple};
use nu_core::equiv::{check_equiv, replay, EquivVerdict};
use nu_core::kernel::{check_axiom_instance, check_script, parse_script, AxiomId, Judgement, Mode, Witness, Witnesses};
use nu_core::logic::{typecheck_formula, Formula, Ltc};
use nu_core::model::{enumerate_models, extend, DeriveBudget, ExtendStep, Model};
use nu_core::parse::{parse_context, parse_expr, parse_formula_in, parse_ltc, parse_term, parse_type};
use nu_core::sat::{check_triple, satisfies, SatVerdict};
use nu_core::term::{alpha_eq, ident, Type};

type Verdict = Result<String, String>;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nu-hoare"));
    c.current_dir(manifest());
    c
}

const SCRIPTS: [&str; 8] = [
    "ex1.nuproof",
    "ex2.nuproof",
    "ex3.nuproof",
    "ex4.nuproof",
    "ex5.nuproof",
    "ex6.nuproof",
    "f1.nuproof",
    "f0.nuproof",
];

fn script_source(name: &str) -> String {
    std::fs::read_to_string(manifest().join("examples").join(name)).expect("bundled script")
}

/// `None` when the script fails to parse; otherwise whether strict checking accepts it,
/// with the label of the first failing line.
fn strict_verdict(src: &str) -> Option<(bool, Option<String>)> {
    let lines = parse_script(src).ok()?;
    let rep = check_script(&lines, Mode::Strict);
    Some((rep.accepted, rep.first_failure().map(|l| l.label.clone())))
}

// 1. Proof replay and mutation suite.

/// Single-point mutations: (script, text to replace, replacement, what changed).
const MUTATIONS: &[(&str, &str, &str, &str)] = &[
    ("ex1.nuproof", "BY Conseq FROM L1, E2", "BY Conseq FROM L1", "premise dropped"),
    ("ex1.nuproof", "BY App FROM L2, L3", "BY App FROM L3, L2", "premise order"),
    ("ex1.nuproof", "BY Const", "BY Var", "rule name"),
    ("ex1.nuproof", "utc1 {", "utc2 {", "axiom id"),
    ("ex1.nuproof", "f4 {", "f2 {", "axiom id"),
    ("ex1.nuproof", "BY Gensym", "BY Const", "rule name"),
    ("ex2.nuproof", "f3 [e=a]", "f3 [e=b]", "witness"),
    ("ex2.nuproof", "; eq3)", "; eq2)", "axiom id"),
    ("ex2.nuproof", "BY Eq FROM L4, L5", "BY Pair FROM L4, L5", "rule name"),
    ("ex2.nuproof", "{u = false} BY Eq", "{u = true} BY Eq", "conclusion"),
    ("ex2.nuproof", "BY Conseq FROM M4, N5", "BY Conseq FROM L4, N5", "premise label"),
    ("ex3.nuproof", "BY Lam FROM L4", "BY Lam FROM L2", "premise label"),
    ("ex3.nuproof", "all y:Nm in (d). [u y => m]", "all y:Nm in (G). [u y => m]", "quantifier range"),
    ("ex4.nuproof", "u3 {", "u4 {", "axiom id"),
    ("ex4.nuproof", "ex3 {", "ex2 {", "axiom id"),
    ("ex4.nuproof", "BY LetFresh FROM L3", "BY Let FROM L3", "rule name"),
    ("ex4.nuproof", "x = m} BY Var", "x = m} BY Const", "rule name"),
    ("ex4.nuproof", "ex z:Nm in (u, y). x = z", "ex z:Nm in (u). x = z", "side condition"),
    ("ex5.nuproof", "WITH C={x # (G)}", "WITH C={x = x}", "witness"),
    ("ex5.nuproof", "f1 {", "f2 {", "axiom id"),
    ("ex5.nuproof", "f3 [e=y]", "f3 [e=x]", "witness"),
    ("ex5.nuproof", "e1 {", "e2 {", "axiom id"),
    ("ex5.nuproof", "BY AXIOM utc2", "BY AXIOM utc3", "axiom id"),
    ("ex5.nuproof", "BY Invar FROM L5", "BY AndPost FROM L5", "rule name"),
    ("ex5.nuproof", "BY Eq FROM L1, L3", "BY Eq FROM L1, L2", "premise label"),
    ("ex6.nuproof", "BY Pair FROM L1, L4", "BY App FROM L1, L4", "rule name"),
    ("ex6.nuproof", "eq1 {P(x, pi2 <b, c>)", "eq2 {P(x, pi2 <b, c>)", "axiom id"),
    ("ex6.nuproof", "WITH C={x = b /\\ x # (G)}", "WITH C={x # (G)}", "witness"),
    ("ex6.nuproof", "BY LetFresh FROM L5", "BY LetFresh FROM L4", "premise label"),
    ("f1.nuproof", "BY If FROM K4, T2, F2", "BY If FROM K4, F2, T2", "premise order"),
    ("f1.nuproof", "u2 {", "u4 {", "axiom id"),
    ("f1.nuproof", "BY LetFresh FROM K8", "BY Let FROM K8", "rule name"),
    ("f0.nuproof", "BY Gensym", "BY Var", "rule name"),
    ("f0.nuproof", "BY Conseq FROM G5", "BY Conseq FROM T1", "premise label"),
    ("f0.nuproof", "{n0 # (G)} x :p", "{n0 # (G, x)} x :p", "side condition"),
    ("f0.nuproof", "BY LetFresh FROM K7", "BY ADMIT \"later\"", "admitted line"),
];

fn criterion_1() -> Verdict {
    let mut slowest = Duration::ZERO;
    for name in SCRIPTS {
        let src = script_source(name);
        let t = Instant::now();
        let (accepted, failure) = strict_verdict(&src).ok_or(format!("{name} does not parse"))?;
        let dt = t.elapsed();
        slowest = slowest.max(dt);
        if !accepted {
            return Err(format!("{name} rejected at {failure:?}"));
        }
        if dt >= Duration::from_secs(1) {
            return Err(format!("{name} took {dt:?}"));
        }
    }
    let out = bin().args(["check-proof", "examples/ex1.nuproof", "--strict"]).output().map_err(|e| e.to_string())?;
    if out.status.code() != Some(0) {
        return Err(format!("CLI check-proof ex1 exited {:?}", out.status.code()));
    }
    // Removing the cited entailment from line 2 of Example 1 rejects exactly there.
    let ex1 = script_source("ex1.nuproof").replacen("BY Conseq FROM L1, E2", "BY Conseq FROM L1", 1);
    if strict_verdict(&ex1) != Some((false, Some("L2".into()))) {
        return Err("ex1 without its line-2 citation is not rejected at L2".into());
    }
    let mut survivors = Vec::new();
    for (name, from, to, what) in MUTATIONS {
        let src = script_source(name);
        if !src.contains(from) {
            return Err(format!("mutation target `{from}` not found in {name}"));
        }
        let mutated = src.replacen(from, to, 1);
        match strict_verdict(&mutated) {
            Some((false, _)) => {}
            Some((true, _)) => survivors.push(format!("{name}: {what} `{from}` -> `{to}` still accepted")),
            // A mutation must be rejected by the checker, not the parser.
            None => survivors.push(format!("{name}: {what} `{from}` -> `{to}` does not parse")),
        }
    }
    if !survivors.is_empty() {
        return Err(format!("{} mutation(s) not rejected by the checker: {}", survivors.len(), survivors.join("; ")));
    }
    Ok(format!(
        "8 scripts accepted in strict mode, slowest {:.1} ms; {} of {} mutations rejected",
        slowest.as_secs_f64() * 1e3,
        MUTATIONS.len(),
        MUTATIONS.len()
    ))
}

// 2. Operational semantics.

fn run_eval(args: &[&str]) -> Result<String, String> {
    let out = bin().args(args).output().map_err(|e| e.to_string())?;
    if out.status.code() != Some(0) {
        return Err(format!("{args:?} exited {:?}", out.status.code()));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn criterion_2() -> Verdict {
    let v = run_eval(&["eval", "examples/ex2.nu"])?;
    if v.trim() != "false" {
        return Err(format!("gensym () = gensym () evaluated to {v}"));
    }
    let dir = manifest().join("tests/golden");
    let let_eq = dir.join("let_eq.nu");
    let v = run_eval(&["eval", let_eq.to_str().unwrap()])?;
    if v.trim() != "true" {
        return Err(format!("let x = gensym () in x = x evaluated to {v}"));
    }
    let mut checked = 0;
    for g in ["gensym_neq", "let_eq", "beta", "if_pair"] {
        let program = dir.join(format!("{g}.nu"));
        let expected = std::fs::read(dir.join(format!("{g}.trace"))).map_err(|e| e.to_string())?;
        let out = bin()
            .args(["--seed", "0", "eval", "--trace", program.to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?;
        if out.stdout != expected {
            return Err(format!("trace of {g} differs from the golden file:\n{}", String::from_utf8_lossy(&out.stdout)));
        }
        checked += 1;
    }
    Ok(format!("eval gives false and true; {checked} traces match their golden files byte for byte"))
}

// 3. Hidden-name separation.

fn criterion_3() -> Verdict {
    let t = Instant::now();
    let budget = 9;
    let hidden = parse_term("let x = gensym () in \\y:Nm. x = y").unwrap();
    let constant = parse_term("\\y:Nm. false").unwrap();
    let v = check_equiv(&hidden, &constant, &parse_type("Nm -> Bool").unwrap(), &BTreeSet::new(), budget)
        .map_err(|e| e.to_string())?;
    if v != (EquivVerdict::NotDistinguishedUpTo { bound: budget }) {
        return Err(format!("hidden-name test was distinguished: {v:?}"));
    }
    let exported = parse_term("let x = gensym () in <x, \\y:Nm. x = y>").unwrap();
    let fake = parse_term("<gensym (), \\y:Nm. false>").unwrap();
    let reference = parse_context("let p = [.] in (pi2 p) (pi1 p)").unwrap();
    let v = check_equiv(&exported, &fake, &parse_type("Nm * (Nm -> Bool)").unwrap(), &BTreeSet::new(), budget)
        .map_err(|e| e.to_string())?;
    let EquivVerdict::Distinguished { context, left, right } = v else {
        return Err("pair-exporting program was not distinguished".into());
    };
    if context.size() > reference.size() {
        return Err(format!("witness {context} is larger than {reference}"));
    }
    if (left, right) != (true, false) {
        return Err(format!("witness {context} gives ({left}, {right})"));
    }
    let replayed = replay(&context, &exported, &fake, &BTreeSet::new()).map_err(|e| e.to_string())?;
    if replayed != (true, false) {
        return Err(format!("replaying {context} gives {replayed:?}"));
    }
    let dt = t.elapsed();
    if dt >= Duration::from_secs(60) {
        return Err(format!("took {dt:?}"));
    }
    let same = if alpha_eq(&context, &reference) { " (the reference context)" } else { "" };
    Ok(format!("budget {budget}: hidden test not distinguished; pair distinguished by {context}{same}, replays to (true, false); {:.1} s", dt.as_secs_f64()))
}

// 4. Oracle against the logic.

fn criterion_4() -> Verdict {
    let t = Instant::now();
    let budget = DeriveBudget { term_size: 5, ext_depth: 2, ..DeriveBudget::default() };
    let mut triples = Vec::new();
    for name in SCRIPTS {
        for line in parse_script(&script_source(name)).map_err(|e| e.to_string())? {
            if let Judgement::Triple(tr) = line.judgement {
                triples.push((format!("{name}:{}", line.label), line.ltc, tr));
            }
        }
    }
    let results: Vec<Result<(usize, usize, usize), String>> = triples
        .par_iter()
        .map(|(label, ltc, tr)| {
            let models = enumerate_models(ltc, &budget, 3, 60);
            let (mut holds, mut unknown) = (0, 0);
            for xi in &models {
                match check_triple(xi, ltc, tr, &budget) {
                    Ok(SatVerdict::Holds) => holds += 1,
                    Ok(SatVerdict::Unknown(_)) => unknown += 1,
                    Ok(SatVerdict::Fails) => return Err(format!("{label} fails in {xi}")),
                    Err(e) => return Err(format!("{label}: {e}")),
                }
            }
            Ok((models.len(), holds, unknown))
        })
        .collect();
    let (mut models, mut holds, mut unknown) = (0, 0, 0);
    for r in results {
        let (m, h, u) = r?;
        models += m;
        holds += h;
        unknown += u;
    }
    let dt = t.elapsed();
    if models < 50 {
        return Err(format!("only {models} models enumerated"));
    }
    if dt >= Duration::from_secs(300) {
        return Err(format!("took {dt:?}"));
    }
    Ok(format!(
        "{} corpus triples over {models} model checks: {holds} hold, {unknown} unknown, 0 fail; {:.1} s",
        triples.len(),
        dt.as_secs_f64()
    ))
}

// 5. Classifier soundness.

/// Variables of the generated formulae, with their types.
const VARS: [(&str, Type); 3] = [("x", Type::Nm), ("y", Type::Nm), ("b", Type::Bool)];

fn classifier_ambient() -> Ltc {
    parse_ltc("(x:Nm, y:Nm, b:Bool, f:Nm->Bool)").unwrap()
}

fn atom(scope: Vec<&'static str>) -> impl Strategy<Value = String> {
    let names: Vec<String> = scope.iter().map(|s| s.to_string()).collect();
    let nm = prop::sample::select(names.clone());
    let sub = prop::sample::subsequence(names, 0..=2);
    prop_oneof![
        Just("T".to_string()),
        Just("F".to_string()),
        (nm.clone(), nm.clone()).prop_map(|(a, c)| format!("{a} = {c}")),
        (nm.clone(), sub.clone()).prop_map(|(a, g)| format!("{a} # ({})", g.join(", "))),
        (nm.clone(), sub).prop_map(|(a, g)| format!("{a} # ({}{}f)", g.join(", "), if g.is_empty() { "" } else { ", " })),
        Just("b = true".to_string()),
        nm.clone().prop_map(|a| format!("[f {a} => r] r = b")),
        (nm.clone(), nm).prop_map(|(a, c)| format!("(a0 = a1) = b").replace("a0", &a).replace("a1", &c)),
    ]
}

/// Formulae over the classifier ambient: atoms closed under the connectives, LTC
/// quantifiers and the two TCV shapes.
fn formula() -> impl Strategy<Value = String> {
    let leaf = atom(vec!["x", "y"]);
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| format!("~({a})")),
            (inner.clone(), inner.clone()).prop_map(|(a, c)| format!("({a}) /\\ ({c})")),
            (inner.clone(), inner.clone()).prop_map(|(a, c)| format!("({a}) \\/ ({c})")),
            (inner.clone(), inner.clone()).prop_map(|(a, c)| format!("({a}) -> ({c})")),
            (prop::sample::select(vec!["()", "(x)", "(x, y)", "(f)"]), inner.clone())
                .prop_map(|(g, a)| format!("all z:Nm in {g}. (({a}) \\/ z = x)")),
            (prop::sample::select(vec!["()", "(y)", "(x, f)"]), inner.clone())
                .prop_map(|(g, a)| format!("ex z:Nm in {g}. (({a}) /\\ z != y)")),
            inner.clone().prop_map(|a| format!("allctx d. all z:Nm in (d). (({a}) \\/ z # (x))")),
            inner.prop_map(|a| format!("allctx d. x # (d) -> ({a})")),
        ]
    })
}

/// Extension witnesses: name-free terms over the ambient.
fn witness() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec![
        "gensym ()",
        "x",
        "y",
        "\\z:Nm. z = x",
        "\\z:Nm. z = y",
        "let n = gensym () in \\z:Nm. z = n",
        "gensym",
        "<x, gensym ()>",
        "true",
        "()",
    ])
}

fn sample<T: std::fmt::Debug>(s: &impl Strategy<Value = T>, runner: &mut TestRunner) -> T {
    s.new_tree(runner).expect("strategy").current()
}

fn decided_flip(a: SatVerdict, b: SatVerdict) -> bool {
    a.is_decided() && b.is_decided() && a != b
}

fn criterion_5() -> Verdict {
    let amb = classifier_ambient();
    let budget = DeriveBudget { term_size: 4, ext_depth: 1, ctx_size: 6 };
    let models = enumerate_models(&amb, &budget, 2, 24);
    if models.is_empty() {
        return Err("no models of the classifier ambient".into());
    }
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::deterministic_rng(Config::default().rng_algorithm));
    let strat = formula();
    let wit = witness();

    // Ext-Ind: the decided verdict never changes along an extension chain.
    let mut ext_cases = 0;
    let mut ext_decided = 0;
    let mut violations = Vec::new();
    let mut attempts = 0;
    while ext_cases < 1000 && attempts < 50_000 {
        attempts += 1;
        let src = sample(&strat, &mut runner);
        let a = parse_formula_in(&amb, &src).map_err(|e| format!("{src}: {e}"))?;
        if typecheck_formula(&amb, &a).is_err() || !is_syn_ext_ind_in(&a, &amb).verdict {
            continue;
        }
        ext_cases += 1;
        let xi = &models[attempts % models.len()];
        let len = 1 + attempts % 3;
        let mut chain = xi.clone();
        let mut ok = true;
        for i in 0..len {
            let step = if i == 1 && attempts % 2 == 0 {
                ExtendStep::AddTcv(ident(&format!("e{i}")))
            } else {
                ExtendStep::AddVal(ident(&format!("w{i}")), parse_term(sample(&wit, &mut runner)).unwrap())
            };
            match extend(&chain, &step) {
                Ok(m) => chain = m,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let before = satisfies(xi, &a, &budget).map_err(|e| format!("{src}: {e}"))?;
        let after = satisfies(&chain, &a, &budget).map_err(|e| format!("{src}: {e}"))?;
        if before.is_decided() && after.is_decided() {
            ext_decided += 1;
        }
        if decided_flip(before, after) {
            violations.push(format!("ext-ind `{src}`: {before:?} in {xi}, {after:?} in {chain}"));
        }
    }

    // Thinness: dropping the variable never turns Holds into Fails.
    let mut thin_cases = 0;
    let mut thin_holds = 0;
    attempts = 0;
    while thin_cases < 1000 && attempts < 50_000 {
        attempts += 1;
        let src = sample(&strat, &mut runner);
        let a = parse_formula_in(&amb, &src).map_err(|e| format!("{src}: {e}"))?;
        if typecheck_formula(&amb, &a).is_err() {
            continue;
        }
        let (x, _) = &VARS[attempts % VARS.len()];
        if !is_thin(&a, x, &amb).verdict {
            continue;
        }
        thin_cases += 1;
        let xi = &models[attempts % models.len()];
        if satisfies(xi, &a, &budget).map_err(|e| format!("{src}: {e}"))? != SatVerdict::Holds {
            continue;
        }
        thin_holds += 1;
        match satisfies(&xi.remove_var(x), &a, &budget) {
            Ok(SatVerdict::Fails) => violations.push(format!("thin `{src}` wrt {x}: fails once {x} is dropped from {xi}")),
            Ok(_) => {}
            Err(e) => violations.push(format!("thin `{src}` wrt {x}: {e} once {x} is dropped")),
        }
    }
    if ext_cases < 1000 || thin_cases < 1000 {
        return Err(format!("only {ext_cases} ext-ind and {thin_cases} thin cases generated"));
    }
    if !violations.is_empty() {
        return Err(format!("{} violation(s), first: {}", violations.len(), violations[0]));
    }
    Ok(format!(
        "{ext_cases} ext-ind pairs ({ext_decided} decided both ways), {thin_cases} thin pairs ({thin_holds} holding before removal); 0 violations"
    ))
}

// 6. Axiom validity sweep.

fn w(pairs: &[(&str, &str)]) -> Witnesses {
    pairs.iter().map(|(k, v)| (k.to_string(), Witness::Expr(parse_expr(v).unwrap()))).collect()
}

/// (axiom, LHS, RHS, witnesses) under the sweep ambient.
fn axiom_instances() -> Vec<(AxiomId, &'static str, &'static str, Witnesses)> {
    use AxiomId::*;
    vec![
        (Eq2, "T", "x = x", w(&[])),
        (Eq2, "T", "<x, b> = <x, b>", w(&[])),
        (Eq2, "T", "f = f", w(&[])),
        (Eq3, "x = y", "y = x", w(&[])),
        (Eq3, "pi1 <x, b> = z", "z = pi1 <x, b>", w(&[])),
        (Eq3, "(x = y) = b", "b = (x = y)", w(&[])),
        (Eq4, "x = y /\\ y = z", "x = z", w(&[])),
        (Eq4, "(x = y) = b /\\ b = (y = z)", "(x = y) = (y = z)", w(&[])),
        (F3, "x # (y, z)", "x != y", w(&[("e", "y")])),
        (F3, "x # (y, z)", "x != z", w(&[("e", "z")])),
        (F3, "x # (y, f)", "x != y", w(&[("e", "y")])),
        (F4, "x # (y, z)", "x # (y) /\\ x # (z)", w(&[])),
        (F4, "x # (y, f, d)", "x # (y, d) /\\ x # (f)", w(&[])),
        (F4, "x # ()", "x # () /\\ x # ()", w(&[])),
        (U2, "all v:Nm in (x, y, f). v != z", "(all v:Nm in (x). v != z) /\\ (all v:Nm in (y, f). v != z)", w(&[])),
        (U2, "all v:Nm in (y, d). [f v => m] m = b", "(all v:Nm in (d). [f v => m] m = b) /\\ (all v:Nm in (y). [f v => m] m = b)", w(&[])),
        (U2, "all c:Bool in (x, b). c = c", "(all c:Bool in (). c = c) /\\ (all c:Bool in (x, b). c = c)", w(&[])),
        (U4, "all v:Nm in (x, y). (v = x /\\ v != z)", "(all v:Nm in (x, y). v = x) /\\ (all v:Nm in (x, y). v != z)", w(&[])),
        (U4, "all v:Nm in (f, d). (v # (x) /\\ [f v => m] m = b)", "(all v:Nm in (f, d). v # (x)) /\\ (all v:Nm in (f, d). [f v => m] m = b)", w(&[])),
        (Ex1, "y = x", "ex v:Nm in (y). v = x", w(&[("e", "y")])),
        (Ex1, "pi1 <y, z> = x", "ex v:Nm in (y, z). v = x", w(&[("e", "pi1 <y, z>")])),
        (Ex1, "x # (z)", "ex v:Nm in (x, f). v # (z)", w(&[("e", "x")])),
        (Utc4, "allctx e. (x # (e) /\\ all v:Nm in (e). v != x)", "(allctx e. x # (e)) /\\ (allctx e. all v:Nm in (e). v != x)", w(&[])),
        (Utc4, "allctx e. (T /\\ y # (x, e))", "(allctx e. T) /\\ (allctx e. y # (x, e))", w(&[])),
    ]
}

fn criterion_6() -> Verdict {
    let t = Instant::now();
    let amb = parse_ltc("(x:Nm, y:Nm, z:Nm, b:Bool, f:Nm->Bool, d)").unwrap();
    let budget = DeriveBudget::default();
    let models: Vec<Model> = enumerate_models(&amb, &budget, 3, 60);
    let iff = [AxiomId::Eq2, AxiomId::Eq3, AxiomId::U4, AxiomId::Utc4];
    let mut jobs = Vec::new();
    for (id, l, r, wit) in axiom_instances() {
        let lf = parse_formula_in(&amb, l).map_err(|e| format!("{l}: {e}"))?;
        let rf = parse_formula_in(&amb, r).map_err(|e| format!("{r}: {e}"))?;
        check_axiom_instance(id, &amb, &lf, &rf, &wit).map_err(|e| format!("({id}) `{l}` ==> `{r}` is not an instance: {e}"))?;
        jobs.push((id, Formula::implies(lf.clone(), rf.clone())));
        if iff.contains(&id) {
            jobs.push((id, Formula::implies(rf, lf)));
        }
    }
    let checks: Vec<Result<SatVerdict, String>> = jobs
        .par_iter()
        .flat_map_iter(|(id, f)| {
            models.iter().map(move |xi| match satisfies(xi, f, &budget) {
                Ok(SatVerdict::Fails) => Err(format!("({id}) `{f}` fails in {xi}")),
                Ok(v) => Ok(v),
                Err(e) => Err(format!("({id}) `{f}`: {e}")),
            })
        })
        .collect();
    let mut holds = 0;
    for c in &checks {
        if c.clone()? == SatVerdict::Holds {
            holds += 1;
        }
    }
    let dt = t.elapsed();
    if dt >= Duration::from_secs(300) {
        return Err(format!("took {dt:?}"));
    }
    Ok(format!(
        "{} instances, {} models, {} checks: {holds} hold, {} unknown, 0 fail; {:.1} s",
        axiom_instances().len(),
        models.len(),
        checks.len(),
        checks.len() - holds,
        dt.as_secs_f64()
    ))
}

// 7. Conservativity.

/// A derivation line: either an STLC triple to translate or a line written directly.
enum Line {
    Stlc { label: &'static str, ltc: &'static str, triple: &'static str, by: &'static str },
    Raw(&'static str),
}

fn render(lines: &[Line]) -> Result<String, String> {
    let mut out = String::new();
    for l in lines {
        match l {
            Line::Stlc { label, ltc, triple, by } => {
                let t = parse_stlc_triple(triple).map_err(|e| format!("{triple}: {e}"))?;
                let nu = translate_stlc_triple(&t).map_err(|e| format!("{triple}: {e}"))?;
                out.push_str(&format!("{label}: {ltc} |- {nu} BY {by}\n"));
            }
            Line::Raw(s) => {
                out.push_str(s);
                out.push('\n');
            }
        }
    }
    Ok(out)
}

fn stlc_derivations() -> Vec<(&'static str, Vec<Line>)> {
    use Line::*;
    vec![
        ("Var", vec![Stlc { label: "L1", ltc: "(x:Bool)", triple: "{x = true} x :u {u = true}", by: "Var" }]),
        ("Const", vec![Stlc { label: "L1", ltc: "()", triple: "{true = true} true :u {u = true}", by: "Const" }]),
        (
            "Eq",
            vec![
                Stlc { label: "L1", ltc: "(x:Bool)", triple: "{T} x :m {m = x}", by: "Var" },
                Stlc { label: "L2", ltc: "(x:Bool, m:Bool)", triple: "{m = x} true :n {(m = n) = (x = true)}", by: "Conseq FROM L3" },
                Raw("L3: (x:Bool, m:Bool) |- {(m = true) = (x = true)} true :n {(m = n) = (x = true)} BY Const"),
                Stlc { label: "L4", ltc: "(x:Bool)", triple: "{T} x = true :u {u = (x = true)}", by: "Eq FROM L1, L2" },
            ],
        ),
        (
            "Lam",
            vec![
                Stlc { label: "L1", ltc: "(d, x:Bool)", triple: "{T /\\ x = true} x :m {m = true}", by: "Var" },
                Raw("L2: () |- {T} \\x:Bool. x :u {allctx d. all x:Bool in (d). (x = true -> [u x => m] m = true)} BY Lam FROM L1 WITH B={x = true}"),
                Raw("E3: (u:Bool->Bool) |- allctx d. all x:Bool in (d). (x = true -> [u x => m] m = true)"),
                Raw("      ==> all x:Bool in (). (x = true -> [u x => m] m = true)"),
                Raw("    BY CHAIN (utc1 {all x:Bool in (u). (x = true -> [u x => m] m = true)}; u5)"),
                Stlc { label: "L3", ltc: "()", triple: "{T} \\x:Bool. x :u {all x:Bool. (x = true -> [u x => m] m = true)}", by: "Conseq FROM L2, E3" },
            ],
        ),
        (
            "App",
            vec![
                Stlc { label: "L1", ltc: "(g:Bool->Bool)", triple: "{[g true => r] r = false} g :m {[m true => r] r = false}", by: "Var" },
                Stlc { label: "L2", ltc: "(g:Bool->Bool, m:Bool->Bool)", triple: "{[m true => r] r = false} true :n {[m n => u] u = false}", by: "Const" },
                Stlc { label: "L3", ltc: "(g:Bool->Bool)", triple: "{[g true => r] r = false} g true :u {u = false}", by: "App FROM L1, L2" },
            ],
        ),
        (
            "If",
            vec![
                Stlc { label: "L1", ltc: "(x:Bool)", triple: "{T} x :m {m = x}", by: "Var" },
                Stlc { label: "L2", ltc: "(x:Bool)", triple: "{true = x} true :u {u = x}", by: "Const" },
                Stlc { label: "L3", ltc: "(x:Bool)", triple: "{false = x} false :u {u = x}", by: "Const" },
                Stlc { label: "L4", ltc: "(x:Bool)", triple: "{T} if x then true else false :u {u = x}", by: "If FROM L1, L2, L3" },
            ],
        ),
        (
            "Pair",
            vec![
                Stlc { label: "L1", ltc: "(x:Bool)", triple: "{T} x :m {m = x}", by: "Var" },
                Stlc { label: "L2", ltc: "(x:Bool, m:Bool)", triple: "{m = x} () :n {<m, n> = <x, ()>}", by: "Conseq FROM L3" },
                Raw("L3: (x:Bool, m:Bool) |- {<m, ()> = <x, ()>} () :n {<m, n> = <x, ()>} BY Const"),
                Stlc { label: "L4", ltc: "(x:Bool)", triple: "{T} <x, ()> :u {u = <x, ()>}", by: "Pair FROM L1, L2" },
            ],
        ),
        (
            "Proj",
            vec![
                Stlc { label: "L1", ltc: "(p:Bool*Unit)", triple: "{pi1 p = true} p :m {pi1 m = true}", by: "Var" },
                Stlc { label: "L2", ltc: "(p:Bool*Unit)", triple: "{pi1 p = true} pi1 p :u {u = true}", by: "ProjI FROM L1" },
            ],
        ),
        (
            "Let+App+Lam",
            vec![
                Stlc { label: "L1", ltc: "(d, x:Bool)", triple: "{T /\\ T} x :m {m = x}", by: "Var" },
                Raw("L2: () |- {T} \\x:Bool. x :f {allctx d. all x:Bool in (d). (T -> [f x => m] m = x)} BY Lam FROM L1"),
                Raw("E3: (f:Bool->Bool) |- allctx d. all x:Bool in (d). (T -> [f x => m] m = x) ==> [f false => u] u = false"),
                Raw("    BY CHAIN (utc1 {all x:Bool in (f). (T -> [f x => m] m = x)}; u5 {all x:Bool in (). (T -> [f x => m] m = x)}; fol {all x:Bool in (). [f x => m] m = x}; u1 [e=false])"),
                Raw("L3: () |- {T} \\x:Bool. x :f {[f false => u] u = false} BY Conseq FROM L2, E3"),
                Stlc { label: "L4", ltc: "(f:Bool->Bool)", triple: "{[f false => u] u = false} f :m {[m false => u] u = false}", by: "Var" },
                Stlc { label: "L5", ltc: "(f:Bool->Bool, m:Bool->Bool)", triple: "{[m false => u] u = false} false :n {[m n => u] u = false}", by: "Const" },
                Stlc { label: "L6", ltc: "(f:Bool->Bool)", triple: "{[f false => u] u = false} f false :u {u = false}", by: "App FROM L4, L5" },
                Stlc { label: "L7", ltc: "()", triple: "{T} let f = \\x:Bool. x in f false :u {u = false}", by: "Let FROM L3, L6" },
            ],
        ),
        (
            "If+Eq",
            vec![
                Stlc { label: "L1", ltc: "()", triple: "{T} true :m {m = true}", by: "Conseq FROM L0" },
                Raw("L0: () |- {true = true} true :m {m = true} BY Const"),
                Stlc { label: "L2", ltc: "(m:Bool)", triple: "{m = true} true :n {(m = n) = true}", by: "Conseq FROM L3" },
                Raw("L3: (m:Bool) |- {(m = true) = true} true :n {(m = n) = true} BY Const"),
                Stlc { label: "L4", ltc: "()", triple: "{T} true = true :c {c = true}", by: "Eq FROM L1, L2" },
                Stlc { label: "L5", ltc: "()", triple: "{true = true} () :u {T}", by: "Conseq FROM L6" },
                Raw("L6: () |- {T} () :u {T} BY Const"),
                Stlc { label: "L7", ltc: "()", triple: "{false = true} () :u {T}", by: "Conseq FROM L6" },
                Stlc { label: "L8", ltc: "()", triple: "{T} if true = true then () else () :u {T}", by: "If FROM L4, L5, L7" },
            ],
        ),
    ]
}

fn criterion_7() -> Verdict {
    let derivations = stlc_derivations();
    let mut failures = Vec::new();
    for (name, lines) in &derivations {
        let src = render(lines)?;
        // Lines refer to later helper lines in the table above; put helpers first.
        let script = reorder(&src);
        match parse_script(&script) {
            Ok(s) => {
                let rep = check_script(&s, Mode::Strict);
                if !rep.accepted {
                    failures.push(format!("{name}: {}", rep.to_string().replace('\n', "; ")));
                }
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    if failures.is_empty() {
        Ok(format!("{} translated derivations accepted", derivations.len()))
    } else {
        Err(failures.join(" | "))
    }
}

/// Order statements so that each one comes after the lines it cites.
fn reorder(src: &str) -> String {
    let mut stmts: Vec<String> = Vec::new();
    for line in src.lines() {
        if line.starts_with(' ') {
            let last = stmts.last_mut().expect("continuation after a statement");
            last.push('\n');
            last.push_str(line);
        } else {
            stmts.push(line.to_string());
        }
    }
    let label = |s: &str| s.split(':').next().unwrap_or("").to_string();
    let cites = |s: &str| -> Vec<String> {
        s.split(" FROM ")
            .nth(1)
            .map(|rest| rest.split(" WITH ").next().unwrap_or("").split(',').map(|p| p.trim().to_string()).collect())
            .unwrap_or_default()
    };
    let mut done: Vec<String> = Vec::new();
    let mut out = Vec::new();
    while out.len() < stmts.len() {
        let before = out.len();
        for s in &stmts {
            let l = label(s);
            if !done.contains(&l) && cites(s).iter().all(|c| done.contains(c)) {
                done.push(l);
                out.push(s.clone());
            }
        }
        if out.len() == before {
            // A cycle or a missing label; let the checker report it.
            out.extend(stmts.iter().filter(|s| !done.contains(&label(s))).cloned());
            break;
        }
    }
    out.join("\n")
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Verdict); 7] = [
        ("1 proof replay and mutations", criterion_1),
        ("2 operational semantics", criterion_2),
        ("3 hidden-name separation", criterion_3),
        ("4 oracle vs logic", criterion_4),
        ("5 classifier soundness", criterion_5),
        ("6 axiom validity sweep", criterion_6),
        ("7 conservativity", criterion_7),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        match f() {
            // Written to the raw handle so the lines show even when output is captured.
            Ok(detail) => writeln!(std::io::stderr(), "PASS criterion {name}: {detail}").unwrap(),
            Err(why) => {
                writeln!(std::io::stderr(), "FAIL criterion {name}: {why}").unwrap();
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
