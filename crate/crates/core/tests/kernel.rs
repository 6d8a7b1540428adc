use nu_core::kernel::{check_script, parse_script, LineStatus, Mode};

const GENSYM_APP: &str = r"
L1: (G) |- {T} gensym :b {allctx d. [b () => a] a # (d)} BY Gensym
E2: (G, b:Unit->Nm) |- allctx d. [b () => a] a # (d) ==> [b () => a] a # (G)
    BY CHAIN (utc1 {[b () => a] a # (G, b)}; f4 {[b () => a] (a # (G) /\ a # (b))}; fol)
L2: (G) |- {T} gensym :b {[b () => a] a # (G)} BY Conseq FROM L1, E2
L3: (G, b:Unit->Nm) |- {[b () => a] a # (G)} () :c {[b c => a] a # (G)} BY Const
L4: (G) |- {T} gensym () :a {a # (G)} BY App FROM L2, L3
";

#[test]
fn derivation_is_accepted_in_both_modes() {
    let s = parse_script(GENSYM_APP).unwrap();
    assert_eq!(s.len(), 5);
    for mode in [Mode::Strict, Mode::Permissive] {
        let r = check_script(&s, mode);
        assert!(r.accepted, "{r}");
    }
}

#[test]
fn checking_is_deterministic() {
    let s = parse_script(GENSYM_APP).unwrap();
    let first = check_script(&s, Mode::Strict);
    for _ in 0..5 {
        assert_eq!(check_script(&s, Mode::Strict), first);
    }
}

#[test]
fn admitted_line_splits_the_modes() {
    let src = GENSYM_APP.replace("BY Const", "BY ADMIT \"todo\"");
    let s = parse_script(&src).unwrap();
    let strict = check_script(&s, Mode::Strict);
    assert!(!strict.accepted);
    assert_eq!(strict.first_failure().unwrap().label, "L3");
    let permissive = check_script(&s, Mode::Permissive);
    assert!(permissive.accepted, "{permissive}");
    assert!(matches!(permissive.lines[3].status, LineStatus::Admitted(_)));
}

#[test]
fn failure_is_reported_at_the_broken_line() {
    let src = GENSYM_APP.replace("FROM L1, E2", "FROM L1");
    let r = check_script(&parse_script(&src).unwrap(), Mode::Strict);
    assert!(!r.accepted);
    assert_eq!(r.first_failure().unwrap().label, "L2");
    // Later lines citing L2 are still checked on their own terms.
    assert_eq!(r.lines[4].status, LineStatus::Ok);
}

#[test]
fn wrong_axiom_in_chain_is_rejected() {
    let src = GENSYM_APP.replace("f4 {", "f3 {");
    let r = check_script(&parse_script(&src).unwrap(), Mode::Strict);
    assert_eq!(r.first_failure().unwrap().label, "E2");
}
