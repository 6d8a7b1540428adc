//! Proof checker for derivation scripts.
//!
//! A script is a list of labelled lines, each a judgement (a triple or an entailment under
//! an LTC) with a justification: a rule applied to earlier lines, a single axiom instance,
//! a chain of axiom steps, the first-order decider, the bounded oracle, or an admitted hole.
//! The kernel only verifies; every witness a rule needs is given in the script.
//!
//! [LetFresh] is checked natively. It is derivable: from a premise
//! `Γ+x ⊩ {A ∧ x#Γ} N :u {C}`, [Gensym] and [Conseq] with (utc1) give
//! `Γ ⊩ {A} gensym() :x {x#Γ}` once `A` is Ext-Ind ([Invar]), and [Let] closes the
//! derivation using the thinness of `C` with respect to `x`.

mod axioms;
mod chain;
mod rules;
mod script;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{typecheck_formula, typecheck_triple, Expr, Formula, Ltc, Triple};

pub use axioms::check_axiom_instance;
pub use chain::{check_entailment, EntailStatus};
pub use rules::check_rule;
pub use script::{parse_script, ScriptError};

macro_rules! id_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal),* $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name { $($variant),* }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),* }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str() == s)
                    .ok_or_else(|| format!("unknown {} `{s}`", stringify!($name)))
            }
        }
    };
}

id_enum!(AxiomId {
    Eq1 => "eq1", Eq2 => "eq2", Eq3 => "eq3", Eq4 => "eq4",
    U1 => "u1", U2 => "u2", U3 => "u3", U4 => "u4", U5 => "u5",
    Ex1 => "ex1", Ex2 => "ex2", Ex3 => "ex3",
    F1 => "f1", F2 => "f2", F3 => "f3", F4 => "f4",
    Utc1 => "utc1", Utc2 => "utc2", Utc3 => "utc3", Utc4 => "utc4",
    E1 => "e1", E2 => "e2", E3 => "e3", Ext => "ext",
});

id_enum!(RuleId {
    Var => "Var", Const => "Const", Eq => "Eq", Gensym => "Gensym", Lam => "Lam", App => "App",
    Pair => "Pair", ProjI => "ProjI", If => "If", Let => "Let", LetFresh => "LetFresh",
    Conseq => "Conseq", Invar => "Invar", AndPost => "AndPost", AndImplies => "AndImplies",
});

/// A metavariable assignment given in a script.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    Formula(Formula),
    Ltc(Ltc),
    Expr(Expr),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Formula(a) => write!(f, "{{{a}}}"),
            Witness::Ltc(g) => write!(f, "{g}"),
            Witness::Expr(e) => write!(f, "{e}"),
        }
    }
}

pub type Witnesses = BTreeMap<String, Witness>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Judgement {
    Triple(Triple),
    Entail(Formula, Formula),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    Axiom(AxiomId),
    Fol,
}

/// One step of an axiom chain. The last step of a chain may omit its target, which is
/// then the right-hand side of the entailment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub kind: StepKind,
    pub witnesses: Witnesses,
    pub target: Option<Formula>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Justification {
    Rule { rule: RuleId, premises: Vec<String>, witnesses: Witnesses },
    Axiom { id: AxiomId, witnesses: Witnesses },
    Chain(Vec<ChainStep>),
    Fol,
    Oracle,
    Admit(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofLine {
    pub label: String,
    pub ltc: Ltc,
    pub judgement: Judgement,
    pub justification: Justification,
    /// Source line, for diagnostics.
    pub line: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Strict,
    Permissive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum LineStatus {
    Ok,
    Failed(String),
    Admitted(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineReport {
    pub label: String,
    pub line: usize,
    #[serde(flatten)]
    pub status: LineStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub mode: Mode,
    pub lines: Vec<LineReport>,
    pub accepted: bool,
}

impl CheckReport {
    pub fn first_failure(&self) -> Option<&LineReport> {
        self.lines.iter().find(|l| !matches!(l.status, LineStatus::Ok))
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            match &l.status {
                LineStatus::Ok => writeln!(f, "{}: ok", l.label)?,
                LineStatus::Failed(r) => writeln!(f, "{}: FAILED (line {}): {r}", l.label, l.line)?,
                LineStatus::Admitted(n) => writeln!(f, "{}: admitted: {n}", l.label)?,
            }
        }
        write!(f, "{}", if self.accepted { "accepted" } else { "rejected" })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("{0}")]
    Mismatch(String),
    #[error("side condition failed: {0}")]
    SideCondition(String),
    #[error("ill-typed: {0}")]
    Type(String),
    #[error("premise `{0}` is not an earlier line")]
    UnknownPremise(String),
}

pub(crate) fn mismatch(msg: impl Into<String>) -> KernelError {
    KernelError::Mismatch(msg.into())
}

pub(crate) fn side(msg: impl Into<String>) -> KernelError {
    KernelError::SideCondition(msg.into())
}

fn typecheck_line(line: &ProofLine) -> Result<(), KernelError> {
    let r = match &line.judgement {
        Judgement::Triple(t) => typecheck_triple(&line.ltc, t).map(|_| ()),
        Judgement::Entail(a, b) => typecheck_formula(&line.ltc, a).and_then(|_| typecheck_formula(&line.ltc, b)),
    };
    r.map_err(|e| KernelError::Type(e.to_string()))
}

/// Check every line in order. A line citing a premise that failed is checked as usual;
/// the script as a whole is rejected either way.
pub fn check_script(script: &[ProofLine], mode: Mode) -> CheckReport {
    let mut seen: HashMap<&str, &ProofLine> = HashMap::new();
    let mut lines = Vec::new();
    for line in script {
        let status = if seen.contains_key(line.label.as_str()) {
            LineStatus::Failed(format!("duplicate label `{}`", line.label))
        } else {
            check_line(line, &seen, mode)
        };
        lines.push(LineReport { label: line.label.clone(), line: line.line, status });
        seen.insert(&line.label, line);
    }
    let accepted = !lines.is_empty() && !lines.iter().any(|l| matches!(l.status, LineStatus::Failed(_)));
    CheckReport { mode, lines, accepted }
}

fn check_line(line: &ProofLine, earlier: &HashMap<&str, &ProofLine>, mode: Mode) -> LineStatus {
    if let Err(e) = typecheck_line(line) {
        return LineStatus::Failed(e.to_string());
    }
    let result = match (&line.judgement, &line.justification) {
        (_, Justification::Admit(note)) => {
            return match mode {
                Mode::Strict => LineStatus::Failed(format!("admitted in strict mode: {note}")),
                Mode::Permissive => LineStatus::Admitted(note.clone()),
            }
        }
        (Judgement::Triple(_), Justification::Rule { premises, .. }) => {
            let resolved: Result<Vec<&ProofLine>, KernelError> = premises
                .iter()
                .map(|p| earlier.get(p.as_str()).copied().ok_or_else(|| KernelError::UnknownPremise(p.clone())))
                .collect();
            resolved.and_then(|ps| check_rule(line, &ps))
        }
        (Judgement::Triple(_), _) => Err(mismatch("a triple must be justified by a rule")),
        (Judgement::Entail(..), Justification::Rule { .. }) => {
            Err(mismatch("an entailment must be justified by an axiom, a chain, FOL or the oracle"))
        }
        (Judgement::Entail(a, b), j) => match check_entailment(&line.ltc, a, b, j) {
            Ok(EntailStatus::Proved) => Ok(()),
            Ok(EntailStatus::OracleHolds) if mode == Mode::Permissive => Ok(()),
            Ok(EntailStatus::OracleHolds) => Err(mismatch("bounded oracle evidence is not accepted in strict mode")),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => LineStatus::Ok,
        Err(e) => LineStatus::Failed(e.to_string()),
    }
}
