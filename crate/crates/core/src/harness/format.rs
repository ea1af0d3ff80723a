//! Line-oriented scenario text format.
//!
//! ```text
//! # full-line comments start with '#'
//! [objectives]
//! income
//! excitement
//!
//! [options]
//! A: 10 2
//! B: 4 8
//!
//! [jury]
//! alpha: linear 0.8 0.2 epsilon 0.000000001
//! beta: linear 0.3 0.7
//!
//! [tolerances]
//! epsilon_default: 0.000000001
//! tau: 0.5
//! delta: 0.01
//!
//! [context]
//! career
//!
//! [ground_truth]
//! A B: incommensurable
//!
//! [reference_model]
//! linear 0.5 0.5
//! ```
//!
//! Numbers are plain decimals (`-12`, `0.25`); no exponents. Names are any
//! run of characters other than whitespace, `:`, `#`, `[` and `]`. A juror
//! without an `epsilon` clause takes `epsilon_default`. `[gate1]` and
//! `[generator]` blocks use the same `key: value` layout and may live in a
//! file of their own.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::baselines::ScalarisedModel;
use crate::error::{Error, Result};
use crate::harness::Scenario;
use crate::metapolicy::GateOneModel;
use crate::model::{ChoiceProblem, Juror, Jury, Objective, OptionPoint, Relation, Tolerances, UtilityForm};

const SECTIONS: &[&str] = &[
    "objectives",
    "options",
    "jury",
    "tolerances",
    "context",
    "ground_truth",
    "reference_model",
    "gate1",
    "generator",
];

#[derive(Debug, Clone)]
struct Line<'a> {
    number: usize,
    indent: usize,
    text: &'a str,
}

impl<'a> Line<'a> {
    fn syntax(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.number,
            column: self.indent + column,
            message: message.into(),
        }
    }

    /// Whitespace-separated tokens with their 1-based columns.
    fn tokens(&self) -> Vec<(usize, &'a str)> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, ch) in self.text.char_indices() {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    out.push((s + 1, &self.text[s..i]));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            out.push((s + 1, &self.text[s..]));
        }
        out
    }

    /// Splits `head: rest` at the first colon.
    fn split_colon(&self) -> Result<(Line<'a>, Line<'a>)> {
        let pos = self
            .text
            .find(':')
            .ok_or_else(|| self.syntax(self.text.len() + 1, "expected `:`"))?;
        let head = Line {
            number: self.number,
            indent: self.indent,
            text: &self.text[..pos],
        };
        let rest = Line {
            number: self.number,
            indent: self.indent + pos + 1,
            text: &self.text[pos + 1..],
        };
        Ok((head, rest))
    }
}

#[derive(Debug)]
struct Section<'a> {
    name: &'a str,
    header: usize,
    lines: Vec<Line<'a>>,
}

#[derive(Debug)]
struct Document<'a> {
    sections: Vec<Section<'a>>,
}

impl<'a> Document<'a> {
    fn parse(text: &'a str) -> Result<Self> {
        let mut sections: Vec<Section<'a>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let number = idx + 1;
            let trimmed = raw.trim_start();
            let indent = raw.len() - trimmed.len();
            let trimmed = trimmed.trim_end();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let line = Line {
                number,
                indent,
                text: trimmed,
            };
            if let Some(inner) = trimmed.strip_prefix('[') {
                let name = inner
                    .strip_suffix(']')
                    .ok_or_else(|| line.syntax(trimmed.len() + 1, "expected `]`"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(line.syntax(2, format!("unknown section `{name}`")));
                }
                if sections.iter().any(|s| s.name == name) {
                    return Err(line.syntax(2, format!("duplicate section `{name}`")));
                }
                sections.push(Section {
                    name,
                    header: number,
                    lines: Vec::new(),
                });
                continue;
            }
            match sections.last_mut() {
                Some(s) => s.lines.push(line),
                None => return Err(line.syntax(1, "content before any section header")),
            }
        }
        if sections.is_empty() {
            return Err(Error::Syntax {
                line: 1,
                column: 1,
                message: "empty document".into(),
            });
        }
        Ok(Self { sections })
    }

    fn section(&self, name: &str) -> Option<&Section<'a>> {
        self.sections.iter().find(|s| s.name == name)
    }

    fn require(&self, name: &str) -> Result<&Section<'a>> {
        self.section(name)
            .ok_or_else(|| Error::Semantic(format!("missing [{name}] section")))
    }
}

fn is_name(s: &str) -> bool {
    !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ':' | '#' | '[' | ']'))
}

fn name_token<'a>(line: &Line<'a>, column: usize, s: &'a str) -> Result<&'a str> {
    if is_name(s) {
        Ok(s)
    } else {
        Err(line.syntax(column, format!("invalid name `{s}`")))
    }
}

/// Strict decimal numeral: optional sign, digits, optional fraction.
fn number(line: &Line, column: usize, s: &str) -> Result<f64> {
    let body = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || frac.is_some_and(|f| !digits(f)) {
        return Err(line.syntax(column, format!("invalid number `{s}`")));
    }
    s.parse::<f64>()
        .map_err(|_| line.syntax(column, format!("invalid number `{s}`")))
}

fn single_name<'a>(line: &Line<'a>) -> Result<&'a str> {
    let toks = line.tokens();
    match toks.as_slice() {
        [(col, name)] => name_token(line, *col, name),
        [] => Err(line.syntax(1, "expected a name")),
        [_, (col, _), ..] => Err(line.syntax(*col, "expected a single name")),
    }
}

fn key_values<'a>(section: &Section<'a>) -> Result<Vec<(Line<'a>, &'a str, f64)>> {
    section
        .lines
        .iter()
        .map(|line| {
            let (head, rest) = line.split_colon()?;
            let key = single_name(&head)?;
            let toks = rest.tokens();
            match toks.as_slice() {
                [(col, v)] => Ok((line.clone(), key, number(&rest, *col, v)?)),
                [] => Err(rest.syntax(1, "expected a value")),
                [_, (col, _), ..] => Err(rest.syntax(*col, "expected a single value")),
            }
        })
        .collect()
}

fn key_value_map<'a>(section: &Section<'a>, allowed: &[&str]) -> Result<BTreeMap<&'a str, f64>> {
    let mut map = BTreeMap::new();
    for (line, key, value) in key_values(section)? {
        if !allowed.contains(&key) {
            return Err(line.syntax(1, format!("unknown key `{key}` in [{}]", section.name)));
        }
        if map.insert(key, value).is_some() {
            return Err(line.syntax(1, format!("duplicate key `{key}`")));
        }
    }
    Ok(map)
}

fn semantic(e: Error) -> Error {
    match e {
        Error::Semantic(_) | Error::Syntax { .. } => e,
        other => Error::Semantic(other.to_string()),
    }
}

fn parse_form(line: &Line, column: usize, s: &str) -> Result<UtilityForm> {
    UtilityForm::parse(s).ok_or_else(|| line.syntax(column, format!("unknown utility form `{s}`")))
}

fn parse_tolerances(doc: &Document) -> Result<Tolerances> {
    let Some(section) = doc.section("tolerances") else {
        return Ok(Tolerances::default());
    };
    let map = key_value_map(section, &["epsilon_default", "tau", "delta"])?;
    let defaults = Tolerances::default();
    Tolerances::new(
        map.get("epsilon_default")
            .copied()
            .unwrap_or(defaults.epsilon_default),
        map.get("tau").copied(),
        map.get("delta").copied().unwrap_or(defaults.delta),
    )
    .map_err(semantic)
}

fn parse_jury(doc: &Document, epsilon_default: f64) -> Result<Jury> {
    let section = doc.require("jury")?;
    let mut jurors = Vec::new();
    for line in &section.lines {
        let (head, rest) = line.split_colon()?;
        let id = single_name(&head)?;
        let toks = rest.tokens();
        let Some((form_col, form)) = toks.first() else {
            return Err(rest.syntax(1, "expected a utility form"));
        };
        let form = parse_form(&rest, *form_col, form)?;
        let mut weights = Vec::new();
        let mut epsilon = None;
        let mut i = 1;
        while i < toks.len() {
            let (col, tok) = toks[i];
            if tok == "epsilon" {
                let (vcol, v) = toks
                    .get(i + 1)
                    .ok_or_else(|| rest.syntax(col + tok.len(), "expected epsilon value"))?;
                epsilon = Some(number(&rest, *vcol, v)?);
                if let Some((extra, _)) = toks.get(i + 2) {
                    return Err(rest.syntax(*extra, "unexpected token after epsilon"));
                }
                break;
            }
            weights.push(number(&rest, col, tok)?);
            i += 1;
        }
        let juror = Juror::new(id, weights, form, epsilon.unwrap_or(epsilon_default)).map_err(semantic)?;
        jurors.push(juror);
    }
    Jury::new(jurors).map_err(semantic)
}

fn parse_problem(doc: &Document) -> Result<ChoiceProblem> {
    let objectives = doc
        .require("objectives")?
        .lines
        .iter()
        .map(|l| single_name(l).map(Objective::new))
        .collect::<Result<Vec<_>>>()?;
    let mut options = Vec::new();
    for line in &doc.require("options")?.lines {
        let (head, rest) = line.split_colon()?;
        let name = single_name(&head)?;
        let scores = rest
            .tokens()
            .into_iter()
            .map(|(col, t)| number(&rest, col, t))
            .collect::<Result<Vec<_>>>()?;
        options.push(OptionPoint::new(name, scores));
    }
    ChoiceProblem::new(objectives, options).map_err(semantic)
}

fn parse_context(doc: &Document) -> Result<String> {
    let section = doc.require("context")?;
    match section.lines.as_slice() {
        [line] => Ok(single_name(line)?.to_string()),
        [] => Err(Error::Semantic("[context] needs one tag".into())),
        [_, second, ..] => Err(second.syntax(1, "[context] holds a single tag")),
    }
}

fn parse_ground_truth(
    doc: &Document,
    problem: &ChoiceProblem,
) -> Result<Option<BTreeMap<(String, String), Relation>>> {
    let Some(section) = doc.section("ground_truth") else {
        return Ok(None);
    };
    let mut map = BTreeMap::new();
    for line in &section.lines {
        let (head, rest) = line.split_colon()?;
        let toks = head.tokens();
        let [(ca, a), (cb, b)] = toks.as_slice() else {
            return Err(head.syntax(1, "expected two option names"));
        };
        let a = name_token(&head, *ca, a)?;
        let b = name_token(&head, *cb, b)?;
        let rel_tok = single_name(&rest)?;
        let relation = Relation::parse(rel_tok)
            .ok_or_else(|| rest.syntax(1, format!("unknown relation `{rel_tok}`")))?;
        for n in [a, b] {
            if problem.option_index(n).is_none() {
                return Err(Error::Semantic(format!(
                    "ground truth on line {} names unknown option `{n}`",
                    line.number
                )));
            }
        }
        if a == b {
            return Err(Error::Semantic(format!(
                "ground truth on line {} pairs `{a}` with itself",
                line.number
            )));
        }
        let key = (a.to_string(), b.to_string());
        let mirrored = (b.to_string(), a.to_string());
        if map.contains_key(&key) || map.contains_key(&mirrored) {
            return Err(Error::Semantic(format!(
                "duplicate ground truth for pair {a} {b}"
            )));
        }
        map.insert(key, relation);
    }
    Ok(Some(map))
}

fn parse_reference(doc: &Document) -> Result<Option<ScalarisedModel>> {
    let Some(section) = doc.section("reference_model") else {
        return Ok(None);
    };
    let [line] = section.lines.as_slice() else {
        return Err(Error::Semantic("[reference_model] holds exactly one line".into()));
    };
    let toks = line.tokens();
    let (form_col, form) = toks[0];
    let form = parse_form(line, form_col, form)?;
    let weights = toks[1..]
        .iter()
        .map(|(c, t)| number(line, *c, t))
        .collect::<Result<Vec<_>>>()?;
    ScalarisedModel::new(weights, form)
        .map(Some)
        .map_err(|e| Error::Semantic(format!("reference model: {e}")))
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let doc = Document::parse(text)?;
    let tolerances = parse_tolerances(&doc)?;
    let problem = parse_problem(&doc)?;
    let jury = parse_jury(&doc, tolerances.epsilon_default)?;
    let context_tag = parse_context(&doc)?;
    let ground_truth = parse_ground_truth(&doc, &problem)?;
    let reference_model = parse_reference(&doc)?;
    Scenario::new(
        problem,
        jury,
        tolerances,
        context_tag,
        ground_truth,
        reference_model,
    )
    .map_err(semantic)
}

fn weights_text(weights: &[f64]) -> String {
    weights
        .iter()
        .map(|w| w.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Writes a scenario in the canonical layout. `f64`'s `Display` never uses
/// exponents and round-trips exactly.
pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    out.push_str("[objectives]\n");
    for o in &s.problem.objectives {
        let _ = writeln!(out, "{}", o.name);
    }
    out.push_str("\n[options]\n");
    for o in &s.problem.options {
        let _ = writeln!(out, "{}: {}", o.name, weights_text(&o.scores));
    }
    out.push_str("\n[jury]\n");
    for j in s.jury.jurors() {
        let _ = writeln!(
            out,
            "{}: {} {} epsilon {}",
            j.id,
            j.form,
            weights_text(j.weights.as_slice()),
            j.epsilon
        );
    }
    out.push_str("\n[tolerances]\n");
    let _ = writeln!(out, "epsilon_default: {}", s.tolerances.epsilon_default);
    if let Some(tau) = s.tolerances.tau {
        let _ = writeln!(out, "tau: {tau}");
    }
    let _ = writeln!(out, "delta: {}", s.tolerances.delta);
    let _ = writeln!(out, "\n[context]\n{}", s.context_tag);
    if let Some(gt) = &s.ground_truth {
        out.push_str("\n[ground_truth]\n");
        for ((a, b), r) in gt {
            let _ = writeln!(out, "{a} {b}: {r}");
        }
    }
    if let Some(m) = &s.reference_model {
        let _ = writeln!(
            out,
            "\n[reference_model]\n{} {}",
            m.form,
            weights_text(m.weights.as_slice())
        );
    }
    out
}

const GATE1_KEYS: &[&str] = &[
    "context_weight",
    "dispersion_weight",
    "disagreement_weight",
    "bias",
    "threshold",
];

pub fn parse_gate1(text: &str) -> Result<GateOneModel> {
    let doc = Document::parse(text)?;
    let section = doc.require("gate1")?;
    let map = key_value_map(section, GATE1_KEYS)?;
    let get = |k: &str| {
        map.get(k)
            .copied()
            .ok_or_else(|| Error::Semantic(format!("[gate1] on line {} is missing `{k}`", section.header)))
    };
    GateOneModel::new(
        get("context_weight")?,
        get("dispersion_weight")?,
        get("disagreement_weight")?,
        get("bias")?,
        get("threshold")?,
    )
    .map_err(semantic)
}

pub fn serialize_gate1(m: &GateOneModel) -> String {
    format!(
        "[gate1]\ncontext_weight: {}\ndispersion_weight: {}\ndisagreement_weight: {}\nbias: {}\nthreshold: {}\n",
        m.context_weight, m.dispersion_weight, m.disagreement_weight, m.bias, m.threshold
    )
}

/// Raw `[generator]` block, interpreted by [`crate::harness::generator`].
pub(crate) fn parse_generator_block(text: &str, keys: &[&str]) -> Result<BTreeMap<String, f64>> {
    let doc = Document::parse(text)?;
    let section = doc.require("generator")?;
    Ok(key_value_map(section, keys)?
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect())
}
