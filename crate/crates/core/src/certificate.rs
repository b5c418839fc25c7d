//! Text certificates for assembly plans.
//!
//! ```text
//! # comments and blank lines are ignored; '#' also starts a trailing comment
//! target 11221122110001100110011
//! mode templated
//! m 1            # step 1: monomer
//! m *            # step 2: wildcard monomer
//! c 1 1          # step 3: concatenate steps 1 and 1
//! t 3 {1,2} 1    # instantiate wildcards (1-based ordinals) of step 3
//! ```
//!
//! Step lines are numbered implicitly, starting at 1.  All step references
//! must point at strictly earlier steps.

use crate::plan::{AssemblyPlan, PlanMode, PlanStep};
use crate::universe::TargetString;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("line {line}, column {column}: {reason}")]
    Syntax { line: usize, column: usize, reason: String },
    #[error("line {line}: reference to a step that is not strictly earlier")]
    ForwardReference { line: usize },
    #[error("certificate target {found:?} does not match expected target {expected:?}")]
    TargetMismatch { expected: String, found: String },
}

fn syntax(line: usize, column: usize, reason: impl Into<String>) -> CertificateError {
    CertificateError::Syntax { line, column, reason: reason.into() }
}

/// A token with its 1-based column.
struct Tok<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let mut toks = Vec::new();
    let mut rest = line;
    let mut offset = 0;
    loop {
        let trimmed = rest.trim_start();
        offset += rest.len() - trimmed.len();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            break;
        }
        let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        toks.push(Tok { text: &trimmed[..end], column: offset + 1 });
        rest = &trimmed[end..];
        offset += end;
    }
    toks
}

/// Parses a certificate, taking the target from its `target` line.
pub fn parse_plan(text: &str) -> Result<AssemblyPlan, CertificateError> {
    let mut target: Option<(TargetString, usize)> = None;
    let mut mode: Option<PlanMode> = None;
    let mut steps: Vec<PlanStep> = Vec::new();
    let mut step_lines: Vec<usize> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let toks = tokenize(raw);
        if toks.is_empty() {
            continue;
        }
        let head = &toks[0];
        match head.text {
            "target" => {
                if target.is_some() {
                    return Err(syntax(line, head.column, "duplicate target line"));
                }
                if !steps.is_empty() || mode.is_some() {
                    return Err(syntax(line, head.column, "target line must come first"));
                }
                let tok = expect_arg(&toks, 1, line, "target string")?;
                let t = TargetString::new(tok.text)
                    .map_err(|e| syntax(line, tok.column, format!("invalid target: {e}")))?;
                expect_end(&toks, 2, line)?;
                target = Some((t, line));
            }
            "mode" => {
                if target.is_none() {
                    return Err(syntax(line, head.column, "mode line must follow the target line"));
                }
                if mode.is_some() {
                    return Err(syntax(line, head.column, "duplicate mode line"));
                }
                let tok = expect_arg(&toks, 1, line, "mode")?;
                let m: PlanMode = tok
                    .text
                    .parse()
                    .map_err(|e: String| syntax(line, tok.column, e))?;
                expect_end(&toks, 2, line)?;
                mode = Some(m);
            }
            "m" | "c" | "t" => {
                if target.is_none() || mode.is_none() {
                    return Err(syntax(
                        line,
                        head.column,
                        "step lines must follow the target and mode lines",
                    ));
                }
                let current = steps.len() + 1; // 1-based number of this step
                let step = match head.text {
                    "m" => {
                        let tok = expect_arg(&toks, 1, line, "monomer symbol")?;
                        if tok.text.len() != 1 {
                            return Err(syntax(line, tok.column, "monomer symbol must be a single character"));
                        }
                        expect_end(&toks, 2, line)?;
                        PlanStep::Monomer { symbol: tok.text.as_bytes()[0] }
                    }
                    "c" => {
                        let left = parse_ref(&toks, 1, line, current)?;
                        let right = parse_ref(&toks, 2, line, current)?;
                        expect_end(&toks, 3, line)?;
                        PlanStep::Concat { left, right }
                    }
                    _ => {
                        let template = parse_ref(&toks, 1, line, current)?;
                        let sel_tok = expect_arg(&toks, 2, line, "wildcard selection {o1,o2,...}")?;
                        let selection = parse_selection(sel_tok, line)?;
                        let filler = parse_ref(&toks, 3, line, current)?;
                        expect_end(&toks, 4, line)?;
                        PlanStep::Instantiate { template, selection, filler }
                    }
                };
                steps.push(step);
                step_lines.push(line);
            }
            other => {
                return Err(syntax(
                    line,
                    head.column,
                    format!("unknown directive {other:?} (expected target, mode, m, c, or t)"),
                ));
            }
        }
    }

    let (target, target_line) = target.ok_or_else(|| syntax(1, 1, "missing target line"))?;
    let mode = mode.ok_or_else(|| syntax(target_line, 1, "missing mode line"))?;
    Ok(AssemblyPlan::new(target, mode, steps))
}

/// Parses a certificate and checks it is for the expected target.
pub fn parse_plan_for_target(
    text: &str,
    expected: &TargetString,
) -> Result<AssemblyPlan, CertificateError> {
    let plan = parse_plan(text)?;
    if plan.target != *expected {
        return Err(CertificateError::TargetMismatch {
            expected: expected.as_str().to_string(),
            found: plan.target.as_str().to_string(),
        });
    }
    Ok(plan)
}

fn expect_arg<'t, 'a>(
    toks: &'t [Tok<'a>],
    idx: usize,
    line: usize,
    what: &str,
) -> Result<&'t Tok<'a>, CertificateError> {
    toks.get(idx).ok_or_else(|| {
        let column = toks.last().map(|t| t.column + t.text.len()).unwrap_or(1);
        syntax(line, column, format!("missing {what}"))
    })
}

fn expect_end(toks: &[Tok<'_>], idx: usize, line: usize) -> Result<(), CertificateError> {
    match toks.get(idx) {
        None => Ok(()),
        Some(t) => Err(syntax(line, t.column, format!("unexpected trailing token {:?}", t.text))),
    }
}

/// Parses a 1-based step reference and converts it to a 0-based index.
fn parse_ref(
    toks: &[Tok<'_>],
    idx: usize,
    line: usize,
    current: usize,
) -> Result<usize, CertificateError> {
    let tok = expect_arg(toks, idx, line, "step reference")?;
    let n: usize = tok
        .text
        .parse()
        .map_err(|_| syntax(line, tok.column, format!("invalid step reference {:?}", tok.text)))?;
    if n == 0 {
        return Err(syntax(line, tok.column, "step references are 1-based"));
    }
    if n >= current {
        return Err(CertificateError::ForwardReference { line });
    }
    Ok(n - 1)
}

fn parse_selection(tok: &Tok<'_>, line: usize) -> Result<Vec<usize>, CertificateError> {
    let inner = tok
        .text
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| syntax(line, tok.column, "selection must look like {1,2}"))?;
    if inner.is_empty() {
        return Err(syntax(line, tok.column, "selection must not be empty"));
    }
    let mut ordinals = Vec::new();
    for part in inner.split(',') {
        let o: usize = part.parse().map_err(|_| {
            syntax(line, tok.column, format!("invalid wildcard ordinal {part:?}"))
        })?;
        if o == 0 {
            return Err(syntax(line, tok.column, "wildcard ordinals are 1-based"));
        }
        ordinals.push(o);
    }
    ordinals.sort_unstable();
    ordinals.dedup();
    Ok(ordinals)
}

/// Serializes a plan in the certificate format; `parse_plan` of the output
/// reproduces the plan exactly.
pub fn serialize_plan(plan: &AssemblyPlan) -> String {
    let mut out = String::new();
    out.push_str("target ");
    out.push_str(plan.target.as_str());
    out.push('\n');
    out.push_str("mode ");
    out.push_str(&plan.mode.to_string());
    out.push('\n');
    for step in &plan.steps {
        match step {
            PlanStep::Monomer { symbol } => {
                out.push('m');
                out.push(' ');
                out.push(*symbol as char);
            }
            PlanStep::Concat { left, right } => {
                out.push_str(&format!("c {} {}", left + 1, right + 1));
            }
            PlanStep::Instantiate { template, selection, filler } => {
                let sel: Vec<String> = selection.iter().map(|o| o.to_string()).collect();
                out.push_str(&format!("t {} {{{}}} {}", template + 1, sel.join(","), filler + 1));
            }
        }
        out.push('\n');
    }
    out
}
