//! `nu-hoare`: command-line front end for the nu-calculus toolkit.
//!
//! Exit codes: 0 success or accepted, 1 definite failure or rejection, 2 undecided
//! within the bounds, 3 usage error.

mod report;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use nu_core::classify::{
    is_syn_ext_ind_in, is_thin, parse_stlc_formula, parse_stlc_triple, translate_stlc, translate_stlc_triple,
};
use nu_core::equiv::{check_equiv, EquivVerdict};
use nu_core::kernel::{check_script, parse_script, Mode};
use nu_core::logic::{resolve_triple, typecheck_formula, typecheck_triple, Ltc, Triple};
use nu_core::model::{parse_model, DeriveBudget};
use nu_core::parse::{parse_formula_in, parse_ltc, parse_term, parse_type, ParseError, Parser as TokParser};
use nu_core::reduce::{evaluate, trace, Configuration, NameAllocator};
use nu_core::sat::{check_triple, satisfies, SatVerdict};
use nu_core::term::typecheck_term;

use report::{InputDigest, Outcome, RunReport};

#[derive(Parser, Debug)]
#[command(name = "nu-hoare", version, about = "Interpreter, logic tools and proof checker for the nu-calculus")]
struct Cli {
    /// Print a JSON run report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// First name id handed out by gensym.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Typecheck a program, or a formula or triple under an LTC.
    Typecheck {
        file: PathBuf,
        /// Ambient LTC for formulae and triples.
        #[arg(long, default_value = "()")]
        ltc: String,
    },
    /// Evaluate a closed program.
    Eval {
        file: PathBuf,
        /// Print every configuration along the reduction.
        #[arg(long)]
        trace: bool,
    },
    /// Search for a Boolean context telling two programs apart.
    Equiv {
        left: PathBuf,
        right: PathBuf,
        #[arg(long = "type")]
        ty: String,
        /// Largest context, in AST nodes.
        #[arg(long, default_value_t = 9)]
        budget: usize,
    },
    /// Bounded satisfaction in a model.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Syntactic side-condition classifiers.
    Classify {
        #[command(subcommand)]
        command: ClassifyCommand,
    },
    /// Check derivation scripts.
    CheckProof {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Reject ADMIT lines and oracle evidence.
        #[arg(long)]
        strict: bool,
        /// Worker threads; scripts are checked in parallel, reported in order.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Translate a simply-typed formula or triple into the full logic.
    TranslateStlc { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Does the model satisfy the formula (or triple) in the file?
    Sat {
        model: PathBuf,
        formula: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Args, Debug)]
struct BudgetArgs {
    #[arg(long, default_value_t = DeriveBudget::default().term_size)]
    term_size: usize,
    #[arg(long, default_value_t = DeriveBudget::default().ext_depth)]
    ext_depth: usize,
    #[arg(long, default_value_t = DeriveBudget::default().ctx_size)]
    ctx_size: usize,
}

#[derive(Subcommand, Debug)]
enum ClassifyCommand {
    /// SYN-EXT-IND membership.
    ExtInd {
        file: PathBuf,
        #[arg(long, default_value = "()")]
        ltc: String,
    },
    /// Syntactic thinness with respect to a variable.
    Thin {
        file: PathBuf,
        #[arg(long)]
        var: String,
        #[arg(long, default_value = "()")]
        ltc: String,
    },
}

/// Errors that map to the usage exit code rather than a failed verdict.
#[derive(Debug, Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// What a command found, before the report is assembled.
struct Found {
    verdicts: Value,
    text: String,
    outcome: Outcome,
    budgets: Vec<(&'static str, usize)>,
    timings: Vec<(String, f64)>,
}

impl Found {
    fn new(verdicts: Value, text: impl Into<String>, outcome: Outcome) -> Found {
        Found { verdicts, text: text.into(), outcome, budgets: Vec::new(), timings: Vec::new() }
    }
}

#[derive(Default)]
struct Inputs(Vec<InputDigest>);

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        self.0.push(InputDigest::of(path, &bytes));
        String::from_utf8(bytes).map_err(|_| usage(format!("{} is not UTF-8", path.display())))
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn ambient(src: &str) -> Result<Ltc> {
    parse_ltc(src).map_err(|e| usage(format!("--ltc: {e}")))
}

fn parse_triple_in(g: &Ltc, src: &str) -> Result<Triple, ParseError> {
    let mut p = TokParser::new(src)?;
    let t = p.triple()?;
    p.expect_eof()?;
    Ok(resolve_triple(g, t))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Typecheck { .. } => "typecheck",
        Command::Eval { .. } => "eval",
        Command::Equiv { .. } => "equiv",
        Command::Oracle { .. } => "oracle sat",
        Command::Classify { command: ClassifyCommand::ExtInd { .. } } => "classify ext-ind",
        Command::Classify { command: ClassifyCommand::Thin { .. } } => "classify thin",
        Command::CheckProof { .. } => "check-proof",
        Command::TranslateStlc { .. } => "translate-stlc",
    }
}

fn dispatch(cli: &Cli, inputs: &mut Inputs) -> Result<Found> {
    match &cli.command {
        Command::Typecheck { file, ltc } => {
            let g = ambient(ltc)?;
            Ok(typecheck(&inputs.read(file)?, &g))
        }
        Command::Eval { file, trace } => eval(&inputs.read(file)?, *trace, cli.seed),
        Command::Equiv { left, right, ty, budget } => {
            if *budget == 0 {
                return Err(usage("--budget must be at least 1"));
            }
            let ty = parse_type(ty).map_err(|e| usage(format!("--type: {e}")))?;
            let l = parse_term(&inputs.read(left)?).context("left program")?;
            let r = parse_term(&inputs.read(right)?).context("right program")?;
            let mut generated = l.an();
            generated.extend(r.an());
            let v = check_equiv(&l, &r, &ty, &generated, *budget)?;
            let mut found = match &v {
                EquivVerdict::Distinguished { context, left, right } => Found::new(
                    json!(v),
                    format!("distinguished by {context}\n  left: {left}\n  right: {right}"),
                    Outcome::Failed,
                ),
                EquivVerdict::NotDistinguishedUpTo { bound } => Found::new(
                    json!(v),
                    format!("not distinguished by any context of size <= {bound}"),
                    Outcome::Unknown,
                ),
            };
            found.budgets.push(("context_size", *budget));
            Ok(found)
        }
        Command::Oracle { command: OracleCommand::Sat { model, formula, budget } } => {
            let b = DeriveBudget { term_size: budget.term_size, ext_depth: budget.ext_depth, ctx_size: budget.ctx_size };
            if b.term_size == 0 || b.ctx_size == 0 {
                return Err(usage("--term-size and --ctx-size must be at least 1"));
            }
            let xi = parse_model(&inputs.read(model)?).context("model")?;
            let src = inputs.read(formula)?;
            let g = xi.ltc()?;
            let verdict = if src.trim_start().starts_with('{') {
                check_triple(&xi, &g, &parse_triple_in(&g, &src)?, &b)?
            } else {
                satisfies(&xi, &parse_formula_in(&g, &src)?, &b)?
            };
            let (text, outcome) = match verdict {
                SatVerdict::Holds => ("holds".to_string(), Outcome::Ok),
                SatVerdict::Fails => ("fails".to_string(), Outcome::Failed),
                SatVerdict::Unknown(bound) => (format!("unknown ({} bound hit)", json!(bound).as_str().unwrap_or("?")), Outcome::Unknown),
            };
            let mut v = json!(verdict);
            v["model"] = json!(xi.to_string());
            let mut found = Found::new(v, text, outcome);
            found.budgets = vec![("term_size", b.term_size), ("ext_depth", b.ext_depth), ("ctx_size", b.ctx_size)];
            Ok(found)
        }
        Command::Classify { command } => {
            let (file, ltc, var) = match command {
                ClassifyCommand::ExtInd { file, ltc } => (file, ltc, None),
                ClassifyCommand::Thin { file, var, ltc } => (file, ltc, Some(var)),
            };
            let g = ambient(ltc)?;
            let a = parse_formula_in(&g, &inputs.read(file)?)?;
            typecheck_formula(&g, &a)?;
            let rep = match var {
                None => is_syn_ext_ind_in(&a, &g),
                Some(x) if g.var_type(x).is_none() => return Err(usage(format!("--var {x} is not declared by --ltc"))),
                Some(x) => is_thin(&a, x, &g),
            };
            let outcome = if rep.verdict { Outcome::Ok } else { Outcome::Failed };
            Ok(Found::new(json!(rep), rep.to_string(), outcome))
        }
        Command::CheckProof { files, strict, jobs } => check_proofs(files, *strict, *jobs, inputs),
        Command::TranslateStlc { file } => {
            let src = inputs.read(file)?;
            let out = if src.trim_start().starts_with('{') {
                translate_stlc_triple(&parse_stlc_triple(&src)?)?.to_string()
            } else {
                translate_stlc(&parse_stlc_formula(&src)?)?.to_string()
            };
            Ok(Found::new(json!({ "translation": out }), out, Outcome::Ok))
        }
    }
}

fn typecheck(src: &str, g: &Ltc) -> Found {
    let fail = |e: String| Found::new(json!({ "ok": false, "error": e }), e, Outcome::Failed);
    if let Ok(m) = parse_term(src) {
        return match typecheck_term(&g.to_stc(), &m) {
            Ok(ty) => Found::new(json!({ "ok": true, "kind": "program", "type": ty.to_string() }), ty.to_string(), Outcome::Ok),
            Err(e) => fail(e.to_string()),
        };
    }
    if src.trim_start().starts_with('{') {
        return match parse_triple_in(g, src).map_err(|e| e.to_string()).and_then(|t| typecheck_triple(g, &t).map_err(|e| e.to_string())) {
            Ok(ty) => Found::new(json!({ "ok": true, "kind": "triple", "type": ty.to_string() }), format!("ok: {ty}"), Outcome::Ok),
            Err(e) => fail(e),
        };
    }
    match parse_formula_in(g, src).map_err(|e| e.to_string()).and_then(|a| typecheck_formula(g, &a).map_err(|e| e.to_string())) {
        Ok(()) => Found::new(json!({ "ok": true, "kind": "formula" }), "ok", Outcome::Ok),
        Err(e) => fail(e),
    }
}

fn eval(src: &str, with_trace: bool, seed: u32) -> Result<Found> {
    let cfg = Configuration::new(parse_term(src)?);
    let ty = cfg.check()?;
    let mut alloc = NameAllocator::new(seed);
    if with_trace {
        let steps = trace(&cfg, &mut alloc)?;
        let lines: Vec<String> = steps.iter().map(|c| c.to_string()).collect();
        let value = steps.last().expect("trace is non-empty").term.to_string();
        let v = json!({ "value": value, "type": ty.to_string(), "trace": lines });
        Ok(Found::new(v, lines.join("\n"), Outcome::Ok))
    } else {
        let end = evaluate(&cfg, &mut alloc)?;
        let v = json!({ "value": end.term.to_string(), "type": ty.to_string(), "generated": end.generated });
        Ok(Found::new(v, end.term.to_string(), Outcome::Ok))
    }
}

fn check_proofs(files: &[PathBuf], strict: bool, jobs: Option<usize>, inputs: &mut Inputs) -> Result<Found> {
    let mode = if strict { Mode::Strict } else { Mode::Permissive };
    let sources = files.iter().map(|f| Ok((f, inputs.read(f)?))).collect::<Result<Vec<_>>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| usage(format!("--jobs: {e}")))?;
    // par_iter().collect() keeps input order, so output does not depend on scheduling.
    let results: Vec<_> = pool.install(|| {
        sources
            .par_iter()
            .map(|(f, src)| {
                let t = Instant::now();
                let r = parse_script(src).map(|s| check_script(&s, mode));
                (f.display().to_string(), r, ms(t))
            })
            .collect()
    });
    let mut outcome = Outcome::Ok;
    let mut text = Vec::new();
    let mut scripts = Vec::new();
    let mut timings = Vec::new();
    for (name, r, t) in results {
        if files.len() > 1 {
            text.push(format!("== {name}"));
        }
        match r {
            Ok(rep) => {
                if !rep.accepted {
                    outcome = outcome.meet(Outcome::Failed);
                }
                text.push(rep.to_string());
                scripts.push(json!({ "file": name, "accepted": rep.accepted, "report": rep }));
            }
            Err(e) => {
                outcome = outcome.meet(Outcome::Failed);
                text.push(format!("parse error: {e}"));
                scripts.push(json!({ "file": name, "accepted": false, "error": e.to_string() }));
            }
        }
        timings.push((name, t));
    }
    let mut found = Found::new(json!({ "mode": mode, "scripts": scripts }), text.join("\n"), outcome);
    found.timings = timings;
    Ok(found)
}

fn run(cli: &Cli) -> RunReport {
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let mut report = RunReport::new(command_name(&cli.command), cli.seed);
    let (outcome, text) = match dispatch(cli, &mut inputs) {
        Ok(found) => {
            report.verdicts = found.verdicts;
            report.budgets = found.budgets.into_iter().map(|(k, v)| (k.to_string(), v as u64)).collect();
            report.timings_ms = found.timings.into_iter().collect::<BTreeMap<_, _>>();
            (found.outcome, found.text)
        }
        Err(e) => {
            let outcome = if e.downcast_ref::<UsageError>().is_some() { Outcome::Usage } else { Outcome::Failed };
            report.messages.push(format!("{e:#}"));
            (outcome, format!("error: {e:#}"))
        }
    };
    report.inputs = inputs.0;
    report.timings_ms.insert("total".into(), ms(start));
    report.text = text;
    report.finish(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => Outcome::Usage.exit_code(),
            };
            return ExitCode::from(code);
        }
    };
    let report = run(&cli);
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else if report.outcome == Outcome::Usage {
        eprintln!("{}", report.text);
        eprintln!("usage: nu-hoare [--json] [--seed N] <COMMAND> [ARGS]; see nu-hoare --help");
    } else {
        println!("{}", report.text);
    }
    ExitCode::from(report.exit_code)
}
