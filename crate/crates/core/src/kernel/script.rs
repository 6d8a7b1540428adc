//! Reader for `.nuproof` scripts.
//!
//! A statement starts in column one; indented lines continue it. `//` starts a comment.
//!
//! ```text
//! DEF A4(p) := allctx d. all y:Unit in (d). [u y => m] (m # (G) /\ p = m)
//! L1: (G, x:Nm) |- {x # (G)} x :m {m # (G) /\ x = m} BY Var
//! L2: (G, x:Nm) |- {x # (G)} \y:Unit. x :u {A4(x)} BY Lam FROM L1 WITH B={T}
//! L3: (G, x:Nm, u:Unit->Nm) |- A4(x) ==> ex z:Nm in (u). A4(z)
//!       BY CHAIN (utc1 {...}; u2 {...}; fol)
//! ```
//!
//! `DEF` introduces a token-level macro. Arguments of more than one token are
//! parenthesised, and so is the expanded body.

use std::collections::HashMap;

use thiserror::Error;

use super::{AxiomId, ChainStep, Judgement, Justification, ProofLine, RuleId, StepKind, Witness, Witnesses};
use crate::logic::{resolve_ltc_refs, resolve_triple};
use crate::parse::{describe, lex, ParseError, Parser, Tok, Token};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

impl From<ParseError> for ScriptError {
    fn from(e: ParseError) -> Self {
        ScriptError { line: e.line, message: format!("col {}: {}", e.col, e.message) }
    }
}

struct Def {
    params: Vec<String>,
    body: Vec<Token>,
}

/// Split into statements, keeping the 1-based line each one starts on.
fn statements(src: &str) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with("//") {
            continue;
        }
        let continues = raw.starts_with(char::is_whitespace);
        match out.last_mut() {
            Some((_, s)) if continues => {
                s.push('\n');
                s.push_str(raw);
            }
            _ => out.push((i + 1, raw.to_string())),
        }
    }
    out
}

fn err(line: usize, message: impl Into<String>) -> ScriptError {
    ScriptError { line, message: message.into() }
}

fn shift(mut toks: Vec<Token>, line: usize) -> Vec<Token> {
    for t in &mut toks {
        t.line += line - 1;
    }
    toks
}

fn is_open(t: &Tok) -> bool {
    matches!(t, Tok::Sym("(" | "[" | "{" | "<"))
}

fn is_close(t: &Tok) -> bool {
    matches!(t, Tok::Sym(")" | "]" | "}" | ">"))
}

fn paren(line: usize, toks: Vec<Token>) -> Vec<Token> {
    let mk = |s: &'static str| Token { tok: Tok::Sym(s), line, col: 0 };
    let mut v = vec![mk("(")];
    v.extend(toks);
    v.push(mk(")"));
    v
}

fn expand(toks: &[Token], defs: &HashMap<String, Def>) -> Result<Vec<Token>, ScriptError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let t = &toks[i];
        let Tok::Ident(name) = &t.tok else {
            out.push(t.clone());
            i += 1;
            continue;
        };
        let Some(def) = defs.get(name) else {
            out.push(t.clone());
            i += 1;
            continue;
        };
        i += 1;
        let mut args: Vec<Vec<Token>> = Vec::new();
        if !def.params.is_empty() {
            if toks.get(i).map(|t| &t.tok) != Some(&Tok::Sym("(")) {
                return Err(err(t.line, format!("`{name}` expects {} argument(s)", def.params.len())));
            }
            i += 1;
            let mut depth = 0usize;
            let mut cur = Vec::new();
            loop {
                let Some(a) = toks.get(i) else {
                    return Err(err(t.line, format!("unclosed argument list for `{name}`")));
                };
                i += 1;
                if depth == 0 && matches!(a.tok, Tok::Sym(")")) {
                    args.push(std::mem::take(&mut cur));
                    break;
                }
                if depth == 0 && matches!(a.tok, Tok::Sym(",")) {
                    args.push(std::mem::take(&mut cur));
                    continue;
                }
                if is_open(&a.tok) {
                    depth += 1;
                } else if is_close(&a.tok) {
                    depth = depth.saturating_sub(1);
                }
                cur.push(a.clone());
            }
            if args.len() != def.params.len() {
                return Err(err(
                    t.line,
                    format!("`{name}` expects {} argument(s), got {}", def.params.len(), args.len()),
                ));
            }
        }
        let args: Vec<Vec<Token>> = args
            .into_iter()
            .map(|a| {
                let a = expand(&a, defs)?;
                Ok(if a.len() > 1 { paren(t.line, a) } else { a })
            })
            .collect::<Result<_, ScriptError>>()?;
        let mut body = Vec::new();
        for b in &def.body {
            match &b.tok {
                Tok::Ident(p) if def.params.contains(p) => {
                    let k = def.params.iter().position(|q| q == p).expect("param");
                    body.extend(args[k].iter().map(|a| Token { line: t.line, ..a.clone() }));
                }
                _ => body.push(Token { line: t.line, ..b.clone() }),
            }
        }
        out.extend(paren(t.line, body));
    }
    Ok(out)
}

fn parse_def(line: usize, toks: &[Token], defs: &mut HashMap<String, Def>) -> Result<(), ScriptError> {
    let mut p = Parser::from_tokens(toks.to_vec());
    p.advance();
    let name = p.ident()?.to_string();
    let mut params = Vec::new();
    if p.eat_sym("(") {
        loop {
            params.push(p.ident()?.to_string());
            if p.eat_sym(")") {
                break;
            }
            p.expect_sym(",")?;
        }
    }
    p.expect_sym(":=")?;
    let start = p.pos();
    let body: Vec<Token> = toks[start..].iter().filter(|t| t.tok != Tok::Eof).cloned().collect();
    if body.is_empty() {
        return Err(err(line, format!("empty definition `{name}`")));
    }
    let body = expand(&body, defs)?;
    defs.insert(name, Def { params, body });
    Ok(())
}

fn at_word(p: &Parser, w: &str) -> bool {
    matches!(p.peek(), Tok::Ident(s) if s == w)
}

fn eat_word(p: &mut Parser, w: &str) -> bool {
    if at_word(p, w) {
        p.advance();
        true
    } else {
        false
    }
}

fn word(p: &mut Parser) -> Result<String, ParseError> {
    match p.peek().clone() {
        Tok::Ident(s) => {
            p.advance();
            Ok(s)
        }
        other => Err(p.error(format!("expected a name, found {}", describe(&other)))),
    }
}

fn braced_formula(p: &mut Parser) -> Result<crate::logic::Formula, ParseError> {
    p.expect_sym("{")?;
    let f = p.formula()?;
    p.expect_sym("}")?;
    Ok(f)
}

fn witness(p: &mut Parser) -> Result<(String, Witness), ParseError> {
    let key = word(p)?;
    p.expect_sym("=")?;
    let w = if p.at_sym("{") {
        Witness::Formula(braced_formula(p)?)
    } else if key.starts_with(['g', 'G']) {
        Witness::Ltc(p.ltc()?)
    } else {
        Witness::Expr(p.expr()?)
    };
    Ok((key, w))
}

fn witness_list(p: &mut Parser, close: Option<&str>) -> Result<Witnesses, ParseError> {
    let mut ws = Witnesses::new();
    loop {
        let (k, w) = witness(p)?;
        if ws.insert(k.clone(), w).is_some() {
            return Err(p.error(format!("witness `{k}` given twice")));
        }
        if let Some(c) = close {
            if p.eat_sym(c) {
                break;
            }
        }
        if !p.eat_sym(",") {
            if close.is_some() {
                return Err(p.error(format!("expected `,` or `]`, found {}", describe(p.peek()))));
            }
            break;
        }
    }
    Ok(ws)
}

fn chain(p: &mut Parser) -> Result<Vec<ChainStep>, ParseError> {
    p.expect_sym("(")?;
    let mut steps = Vec::new();
    if p.eat_sym(")") {
        return Ok(steps);
    }
    loop {
        let name = word(p)?;
        let kind = if name == "fol" {
            StepKind::Fol
        } else {
            StepKind::Axiom(name.parse::<AxiomId>().map_err(|e| p.error(e))?)
        };
        let witnesses = if p.eat_sym("[") { witness_list(p, Some("]"))? } else { Witnesses::new() };
        let target = if p.at_sym("{") { Some(braced_formula(p)?) } else { None };
        steps.push(ChainStep { kind, witnesses, target });
        if p.eat_sym(")") {
            break;
        }
        p.expect_sym(";")?;
    }
    Ok(steps)
}

fn justification(p: &mut Parser) -> Result<Justification, ParseError> {
    if !eat_word(p, "BY") {
        return Err(p.error(format!("expected `BY`, found {}", describe(p.peek()))));
    }
    let head = word(p)?;
    let j = match head.as_str() {
        "AXIOM" => {
            let id = word(p)?.parse::<AxiomId>().map_err(|e| p.error(e))?;
            let witnesses = if p.eat_sym("[") {
                witness_list(p, Some("]"))?
            } else if eat_word(p, "WITH") {
                witness_list(p, None)?
            } else {
                Witnesses::new()
            };
            Justification::Axiom { id, witnesses }
        }
        "CHAIN" => Justification::Chain(chain(p)?),
        "FOL" => Justification::Fol,
        "ORACLE" => Justification::Oracle,
        "ADMIT" => match p.advance() {
            Tok::Str(s) => Justification::Admit(s),
            other => return Err(p.error(format!("expected a quoted note, found {}", describe(&other)))),
        },
        rule => {
            let rule = rule.parse::<RuleId>().map_err(|e| p.error(e))?;
            let mut premises = Vec::new();
            if eat_word(p, "FROM") {
                loop {
                    premises.push(word(p)?);
                    if !p.eat_sym(",") {
                        break;
                    }
                }
            }
            let witnesses = if eat_word(p, "WITH") { witness_list(p, None)? } else { Witnesses::new() };
            Justification::Rule { rule, premises, witnesses }
        }
    };
    p.expect_eof()?;
    Ok(j)
}

fn proof_line(line: usize, toks: Vec<Token>) -> Result<ProofLine, ScriptError> {
    let mut p = Parser::from_tokens(toks);
    let label = word(&mut p)?;
    p.expect_sym(":")?;
    let ltc = p.ltc()?;
    p.expect_sym("|-")?;
    let judgement = if p.at_sym("{") {
        Judgement::Triple(resolve_triple(&ltc, p.triple()?))
    } else {
        let a = p.formula()?;
        p.expect_sym("==>")?;
        let b = p.formula()?;
        Judgement::Entail(resolve_ltc_refs(&ltc, &a), resolve_ltc_refs(&ltc, &b))
    };
    let mut justification = justification(&mut p)?;
    if let Justification::Chain(steps) = &mut justification {
        for s in steps {
            s.target = s.target.as_ref().map(|f| resolve_ltc_refs(&ltc, f));
        }
    }
    Ok(ProofLine { label, ltc, judgement, justification, line })
}

/// Parse a whole script.
pub fn parse_script(src: &str) -> Result<Vec<ProofLine>, ScriptError> {
    let mut defs: HashMap<String, Def> = HashMap::new();
    let mut out = Vec::new();
    for (line, text) in statements(src) {
        let toks = shift(lex(&text)?, line);
        if matches!(&toks[0].tok, Tok::Ident(s) if s == "DEF") {
            parse_def(line, &toks, &mut defs)?;
            continue;
        }
        let toks = expand(&toks, &defs)?;
        out.push(proof_line(line, toks)?);
    }
    Ok(out)
}
