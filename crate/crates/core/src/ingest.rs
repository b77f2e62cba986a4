//! Turns pre-parsed dependency triples into ASP facts and queries through a
//! data-driven pattern table.
//!
//! Parsing itself happens out of process: this module reads a TSV of
//! dependency triples (`sentence_id<TAB>head_token<TAB>head_lemma<TAB>
//! head_pos<TAB>relation<TAB>dep_token<TAB>dep_lemma<TAB>dep_pos`) with the
//! closed label set `nsubj, dobj, nmod_of, nmod_in, amod, cop, case, root,
//! wh`. Question files use the `wh` label to mark the question word.
//!
//! Patterns live in `.patterns` files (see [`parse_patterns`]):
//!
//! ```text
//! pattern of_part:
//!   match nmod_of(X, Y)
//!   emit part_of(X, Y)
//!
//! pattern event_intrans:
//!   match nsubj(V, S)
//!   where V.pos = v
//!   unless event(V, S, _)
//!   emit event(V, S)
//! ```
//!
//! `match` templates bind pattern variables to sentence tokens (a variable
//! used twice must hit the same token); `where` constrains a bound token's
//! coarse POS or lemma; `emit` produces a semantic relation from bound
//! lemmas. Patterns with an `unless` clause run in a second pass and are
//! suppressed when a relation matching the clause was already emitted, so
//! extraction itself is a small default theory. Unmatched triples are
//! dropped but counted, and the coverage ratio is reported.
//!
//! Emitted constants are sanitized lemmas; multi-word lemmas such as
//! `break down` become `break_down`, which keeps particle-verb events
//! stable.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::ast::{Atom, BodyLiteral, Literal, Program, Rule, Term};
use crate::parser::Query;
use crate::token::sanitize_constant;

/// Closed set of dependency labels this pipeline understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DepLabel {
    Nsubj,
    Dobj,
    NmodOf,
    NmodIn,
    Amod,
    Cop,
    Case,
    Root,
    Wh,
}

impl DepLabel {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "nsubj" => Some(DepLabel::Nsubj),
            "dobj" => Some(DepLabel::Dobj),
            "nmod_of" => Some(DepLabel::NmodOf),
            "nmod_in" => Some(DepLabel::NmodIn),
            "amod" => Some(DepLabel::Amod),
            "cop" => Some(DepLabel::Cop),
            "case" => Some(DepLabel::Case),
            "root" => Some(DepLabel::Root),
            "wh" => Some(DepLabel::Wh),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DepLabel::Nsubj => "nsubj",
            DepLabel::Dobj => "dobj",
            DepLabel::NmodOf => "nmod_of",
            DepLabel::NmodIn => "nmod_in",
            DepLabel::Amod => "amod",
            DepLabel::Cop => "cop",
            DepLabel::Case => "case",
            DepLabel::Root => "root",
            DepLabel::Wh => "wh",
        }
    }
}

/// One token occurrence: surface form, lemma, coarse part of speech.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenInfo {
    pub token: String,
    pub lemma: String,
    pub pos: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyTriple {
    pub sentence_id: String,
    pub head: TokenInfo,
    pub relation: DepLabel,
    pub dependent: TokenInfo,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestDiagnostic {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for IngestDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("pattern file line {line}: {message}")]
    PatternParse { line: usize, message: String },
    #[error("pattern `{pattern}`: emit/unless variable {var} is not bound by any match template")]
    UnboundVar { pattern: String, var: String },
    #[error("question has multiple wh tokens: {}", tokens.join(", "))]
    MultipleWh { tokens: Vec<String> },
    #[error("question matched no pattern; cannot derive a query")]
    NoQueryDerived,
    #[error("the question word is not reachable by any pattern; no answer variable in the query")]
    AnswerVarMissing,
}

/// Load dependency triples from TSV text.
pub fn parse_dep_triples(text: &str) -> Result<Vec<DependencyTriple>, Vec<IngestDiagnostic>> {
    let mut out = Vec::new();
    let mut diags = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 8 {
            diags.push(IngestDiagnostic {
                line,
                message: format!("expected 8 tab-separated columns, got {}", cols.len()),
            });
            continue;
        }
        let Some(relation) = DepLabel::parse(cols[4].trim()) else {
            diags.push(IngestDiagnostic {
                line,
                message: format!("unknown dependency label `{}`", cols[4].trim()),
            });
            continue;
        };
        let tok = |t: &str, l: &str, p: &str| TokenInfo {
            token: t.trim().to_string(),
            lemma: l.trim().to_lowercase(),
            pos: p.trim().to_lowercase(),
        };
        out.push(DependencyTriple {
            sentence_id: cols[0].trim().to_string(),
            head: tok(cols[1], cols[2], cols[3]),
            relation,
            dependent: tok(cols[5], cols[6], cols[7]),
        });
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(diags)
    }
}

/// What a relation argument is: a sanitized constant, or the answer slot of
/// a question.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum RelationArg {
    Const(String),
    Answer,
}

impl fmt::Display for RelationArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationArg::Const(c) => write!(f, "{c}"),
            RelationArg::Answer => write!(f, "X"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKind {
    PartOf,
    Isa,
    Property,
    Event,
    Location,
}

impl RelationKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "part_of" => Some(RelationKind::PartOf),
            "isa" => Some(RelationKind::Isa),
            "property" => Some(RelationKind::Property),
            "event" => Some(RelationKind::Event),
            "location" => Some(RelationKind::Location),
            _ => None,
        }
    }

    pub fn predicate(&self) -> &'static str {
        match self {
            RelationKind::PartOf => "part_of",
            RelationKind::Isa => "isa",
            RelationKind::Property => "property",
            RelationKind::Event => "event",
            RelationKind::Location => "location",
        }
    }

    fn arity_ok(&self, n: usize) -> bool {
        match self {
            RelationKind::Event => n == 2 || n == 3,
            _ => n == 2,
        }
    }
}

/// An extracted semantic relation with its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticRelation {
    pub kind: RelationKind,
    pub args: Vec<RelationArg>,
    pub sentence_id: String,
    pub pattern_id: String,
}

impl SemanticRelation {
    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|a| matches!(a, RelationArg::Const(_)))
    }

    fn shape(&self) -> (RelationKind, Vec<RelationArg>) {
        (self.kind, self.args.clone())
    }
}

impl fmt::Display for SemanticRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind.predicate())?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepTemplate {
    pub relation: DepLabel,
    pub head_var: String,
    pub dep_var: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    Pos { var: String, value: String },
    Lemma { var: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmitArg {
    Var(String),
    Const(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnlessArg {
    Var(String),
    Const(String),
    Wildcard,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnlessClause {
    pub kind: RelationKind,
    pub args: Vec<UnlessArg>,
}

/// A single extraction rule: match templates, token constraints, an
/// optional suppression condition over already-emitted relations, and the
/// relation to emit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternRule {
    pub id: String,
    pub matches: Vec<DepTemplate>,
    pub constraints: Vec<Constraint>,
    pub unless: Option<UnlessClause>,
    pub emit_kind: RelationKind,
    pub emit_args: Vec<EmitArg>,
}

const DEFAULT_PATTERNS_RAW: &str = include_str!("../assets/default.patterns");

/// The pattern table shipped with this crate.
pub fn builtin_patterns() -> &'static [PatternRule] {
    static PATTERNS: OnceLock<Vec<PatternRule>> = OnceLock::new();
    PATTERNS
        .get_or_init(|| parse_patterns(DEFAULT_PATTERNS_RAW).expect("builtin pattern table parses"))
}

fn is_var_token(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase())
}

fn parse_call<'t>(
    text: &'t str,
    line: usize,
    what: &str,
) -> Result<(&'t str, Vec<&'t str>), IngestError> {
    let text = text.trim();
    let open = text.find('(').ok_or_else(|| IngestError::PatternParse {
        line,
        message: format!("expected `name(args)` in {what}"),
    })?;
    if !text.ends_with(')') {
        return Err(IngestError::PatternParse {
            line,
            message: format!("unterminated argument list in {what}"),
        });
    }
    let name = text[..open].trim();
    let args = text[open + 1..text.len() - 1]
        .split(',')
        .map(str::trim)
        .filter(|a| !a.is_empty())
        .collect();
    Ok((name, args))
}

/// Parse a `.patterns` file.
pub fn parse_patterns(text: &str) -> Result<Vec<PatternRule>, IngestError> {
    struct Draft {
        id: String,
        line: usize,
        matches: Vec<DepTemplate>,
        constraints: Vec<Constraint>,
        unless: Option<UnlessClause>,
        emit: Option<(RelationKind, Vec<EmitArg>)>,
    }

    let mut patterns = Vec::new();
    let mut draft: Option<Draft> = None;

    let finish = |d: Draft, patterns: &mut Vec<PatternRule>| -> Result<(), IngestError> {
        let Some((emit_kind, emit_args)) = d.emit else {
            return Err(IngestError::PatternParse {
                line: d.line,
                message: format!("pattern `{}` has no emit clause", d.id),
            });
        };
        if d.matches.is_empty() {
            return Err(IngestError::PatternParse {
                line: d.line,
                message: format!("pattern `{}` has no match clause", d.id),
            });
        }
        let rule = PatternRule {
            id: d.id,
            matches: d.matches,
            constraints: d.constraints,
            unless: d.unless,
            emit_kind,
            emit_args,
        };
        validate_pattern(&rule)?;
        patterns.push(rule);
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let stmt = match raw.find('%') {
            Some(pos) => raw[..pos].trim(),
            None => raw.trim(),
        };
        if stmt.is_empty() {
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("pattern ") {
            if let Some(d) = draft.take() {
                finish(d, &mut patterns)?;
            }
            let id = rest.trim_end_matches(':').trim().to_string();
            if id.is_empty() {
                return Err(IngestError::PatternParse {
                    line,
                    message: "pattern needs a name".to_string(),
                });
            }
            draft = Some(Draft {
                id,
                line,
                matches: Vec::new(),
                constraints: Vec::new(),
                unless: None,
                emit: None,
            });
            continue;
        }
        let Some(d) = draft.as_mut() else {
            return Err(IngestError::PatternParse {
                line,
                message: "expected `pattern <id>:`".to_string(),
            });
        };
        if let Some(rest) = stmt.strip_prefix("match ") {
            for part in split_top_level(rest) {
                let (name, args) = parse_call(&part, line, "match template")?;
                let Some(relation) = DepLabel::parse(name) else {
                    return Err(IngestError::PatternParse {
                        line,
                        message: format!("unknown dependency label `{name}`"),
                    });
                };
                if args.len() != 2 || !args.iter().all(|a| is_var_token(a)) {
                    return Err(IngestError::PatternParse {
                        line,
                        message: format!("template `{name}` needs two variables"),
                    });
                }
                d.matches.push(DepTemplate {
                    relation,
                    head_var: args[0].to_string(),
                    dep_var: args[1].to_string(),
                });
            }
        } else if let Some(rest) = stmt.strip_prefix("where ") {
            for part in split_top_level(rest) {
                let (lhs, rhs) = part
                    .split_once('=')
                    .ok_or_else(|| IngestError::PatternParse {
                        line,
                        message: format!(
                            "expected `Var.pos = value` or `Var.lemma = value`, got `{part}`"
                        ),
                    })?;
                let (var, field) =
                    lhs.trim()
                        .split_once('.')
                        .ok_or_else(|| IngestError::PatternParse {
                            line,
                            message: format!(
                                "expected `Var.pos` or `Var.lemma`, got `{}`",
                                lhs.trim()
                            ),
                        })?;
                let value = rhs.trim().to_string();
                let c = match field.trim() {
                    "pos" => Constraint::Pos {
                        var: var.trim().to_string(),
                        value,
                    },
                    "lemma" => Constraint::Lemma {
                        var: var.trim().to_string(),
                        value,
                    },
                    other => {
                        return Err(IngestError::PatternParse {
                            line,
                            message: format!("unknown token field `{other}`"),
                        })
                    }
                };
                d.constraints.push(c);
            }
        } else if let Some(rest) = stmt.strip_prefix("unless ") {
            let (name, args) = parse_call(rest, line, "unless clause")?;
            let Some(kind) = RelationKind::parse(name) else {
                return Err(IngestError::PatternParse {
                    line,
                    message: format!("unknown relation kind `{name}`"),
                });
            };
            let args = args
                .iter()
                .map(|a| {
                    if *a == "_" {
                        UnlessArg::Wildcard
                    } else if is_var_token(a) {
                        UnlessArg::Var(a.to_string())
                    } else {
                        UnlessArg::Const(a.to_string())
                    }
                })
                .collect();
            d.unless = Some(UnlessClause { kind, args });
        } else if let Some(rest) = stmt.strip_prefix("emit ") {
            let (name, args) = parse_call(rest, line, "emit clause")?;
            let Some(kind) = RelationKind::parse(name) else {
                return Err(IngestError::PatternParse {
                    line,
                    message: format!("unknown relation kind `{name}`"),
                });
            };
            if !kind.arity_ok(args.len()) {
                return Err(IngestError::PatternParse {
                    line,
                    message: format!("`{name}` cannot take {} arguments", args.len()),
                });
            }
            let args = args
                .iter()
                .map(|a| {
                    if is_var_token(a) {
                        EmitArg::Var(a.to_string())
                    } else {
                        EmitArg::Const(a.to_string())
                    }
                })
                .collect();
            d.emit = Some((kind, args));
        } else {
            return Err(IngestError::PatternParse {
                line,
                message: format!("unknown clause `{stmt}`"),
            });
        }
    }
    if let Some(d) = draft.take() {
        finish(d, &mut patterns)?;
    }
    Ok(patterns)
}

fn split_top_level(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(c);
            }
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
            }
            _ => cur.push(c),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn validate_pattern(p: &PatternRule) -> Result<(), IngestError> {
    let bound: Vec<&String> = p
        .matches
        .iter()
        .flat_map(|t| [&t.head_var, &t.dep_var])
        .collect();
    let check = |v: &String| -> Result<(), IngestError> {
        if bound.contains(&v) {
            Ok(())
        } else {
            Err(IngestError::UnboundVar {
                pattern: p.id.clone(),
                var: v.clone(),
            })
        }
    };
    for a in &p.emit_args {
        if let EmitArg::Var(v) = a {
            check(v)?;
        }
    }
    for c in &p.constraints {
        match c {
            Constraint::Pos { var, .. } | Constraint::Lemma { var, .. } => check(var)?,
        }
    }
    if let Some(u) = &p.unless {
        for a in &u.args {
            if let UnlessArg::Var(v) = a {
                check(v)?;
            }
        }
    }
    Ok(())
}

/// Extraction output: the relations plus how much of the input was
/// actually consumed by some pattern.
#[derive(Debug, Clone)]
pub struct ExtractionReport {
    pub relations: Vec<SemanticRelation>,
    pub consumed_triples: usize,
    pub total_triples: usize,
}

impl ExtractionReport {
    pub fn coverage(&self) -> f64 {
        if self.total_triples == 0 {
            1.0
        } else {
            self.consumed_triples as f64 / self.total_triples as f64
        }
    }
}

type Binding<'t> = BTreeMap<&'t str, &'t TokenInfo>;

fn match_pattern<'t>(
    pattern: &'t PatternRule,
    triples: &'t [&DependencyTriple],
    out: &mut Vec<(Binding<'t>, Vec<usize>)>,
) {
    fn go<'t>(
        pattern: &'t PatternRule,
        triples: &'t [&DependencyTriple],
        i: usize,
        binding: Binding<'t>,
        used: Vec<usize>,
        out: &mut Vec<(Binding<'t>, Vec<usize>)>,
    ) {
        if i == pattern.matches.len() {
            for c in &pattern.constraints {
                let ok = match c {
                    Constraint::Pos { var, value } => {
                        binding.get(var.as_str()).is_some_and(|t| &t.pos == value)
                    }
                    Constraint::Lemma { var, value } => {
                        binding.get(var.as_str()).is_some_and(|t| &t.lemma == value)
                    }
                };
                if !ok {
                    return;
                }
            }
            out.push((binding, used));
            return;
        }
        let template = &pattern.matches[i];
        for (ti, triple) in triples.iter().enumerate() {
            if triple.relation != template.relation {
                continue;
            }
            let mut b = binding.clone();
            if !bind(&mut b, &template.head_var, &triple.head) {
                continue;
            }
            if !bind(&mut b, &template.dep_var, &triple.dependent) {
                continue;
            }
            let mut u = used.clone();
            u.push(ti);
            go(pattern, triples, i + 1, b, u, out);
        }
    }
    fn bind<'t>(b: &mut Binding<'t>, var: &'t str, tok: &'t TokenInfo) -> bool {
        match b.get(var) {
            // Tokens are identified by surface form within a sentence.
            Some(existing) => existing.token == tok.token,
            None => {
                b.insert(var, tok);
                true
            }
        }
    }
    go(pattern, triples, 0, BTreeMap::new(), Vec::new(), out);
}

fn emit_relation(
    pattern: &PatternRule,
    binding: &Binding<'_>,
    sentence_id: &str,
    wh_token: Option<&str>,
) -> SemanticRelation {
    let args = pattern
        .emit_args
        .iter()
        .map(|a| match a {
            EmitArg::Const(c) => RelationArg::Const(c.clone()),
            EmitArg::Var(v) => {
                let tok = binding.get(v.as_str()).expect("validated binding");
                if wh_token.is_some_and(|w| w == tok.token) {
                    RelationArg::Answer
                } else {
                    RelationArg::Const(sanitize_constant(&tok.lemma))
                }
            }
        })
        .collect();
    SemanticRelation {
        kind: pattern.emit_kind,
        args,
        sentence_id: sentence_id.to_string(),
        pattern_id: pattern.id.clone(),
    }
}

fn unless_matches(
    clause: &UnlessClause,
    binding: &Binding<'_>,
    emitted: &[SemanticRelation],
    wh_token: Option<&str>,
) -> bool {
    emitted.iter().any(|r| {
        if r.kind != clause.kind || r.args.len() != clause.args.len() {
            return false;
        }
        clause.args.iter().zip(&r.args).all(|(ua, ra)| match ua {
            UnlessArg::Wildcard => true,
            UnlessArg::Const(c) => matches!(ra, RelationArg::Const(rc) if rc == c),
            UnlessArg::Var(v) => {
                let tok = binding.get(v.as_str()).expect("validated binding");
                if wh_token.is_some_and(|w| w == tok.token) {
                    matches!(ra, RelationArg::Answer)
                } else {
                    matches!(ra, RelationArg::Const(rc) if *rc == sanitize_constant(&tok.lemma))
                }
            }
        })
    })
}

fn extract_sentence(
    triples: &[&DependencyTriple],
    patterns: &[PatternRule],
    sentence_id: &str,
    wh_token: Option<&str>,
    consumed: &mut Vec<bool>,
) -> Vec<SemanticRelation> {
    let mut emitted: Vec<SemanticRelation> = Vec::new();
    let run =
        |pattern: &PatternRule, emitted: &mut Vec<SemanticRelation>, consumed: &mut Vec<bool>| {
            let mut matches = Vec::new();
            match_pattern(pattern, triples, &mut matches);
            for (binding, used) in matches {
                if let Some(u) = &pattern.unless {
                    if unless_matches(u, &binding, emitted, wh_token) {
                        continue;
                    }
                }
                let rel = emit_relation(pattern, &binding, sentence_id, wh_token);
                for ti in used {
                    consumed[ti] = true;
                }
                if !emitted.iter().any(|e| e.shape() == rel.shape()) {
                    emitted.push(rel);
                }
            }
        };
    for pattern in patterns.iter().filter(|p| p.unless.is_none()) {
        run(pattern, &mut emitted, consumed);
    }
    for pattern in patterns.iter().filter(|p| p.unless.is_some()) {
        run(pattern, &mut emitted, consumed);
    }
    emitted
}

fn by_sentence(triples: &[DependencyTriple]) -> Vec<(String, Vec<&DependencyTriple>)> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<&str, Vec<&DependencyTriple>> = HashMap::new();
    for t in triples {
        if !groups.contains_key(t.sentence_id.as_str()) {
            order.push(t.sentence_id.clone());
        }
        groups.entry(t.sentence_id.as_str()).or_default().push(t);
    }
    order
        .into_iter()
        .map(|id| {
            let g = groups.remove(id.as_str()).unwrap();
            (id, g)
        })
        .collect()
}

/// Apply the pattern table sentence-by-sentence and collect deduplicated
/// relations plus the coverage report.
pub fn extract_relations(
    triples: &[DependencyTriple],
    patterns: &[PatternRule],
) -> ExtractionReport {
    let mut relations: Vec<SemanticRelation> = Vec::new();
    let mut consumed_total = 0usize;
    for (sid, group) in by_sentence(triples) {
        let mut consumed = vec![false; group.len()];
        let rels = extract_sentence(&group, patterns, &sid, None, &mut consumed);
        consumed_total += consumed.iter().filter(|&&c| c).count();
        for r in rels {
            if !relations.iter().any(|e| e.shape() == r.shape()) {
                relations.push(r);
            }
        }
    }
    ExtractionReport {
        relations,
        consumed_triples: consumed_total,
        total_triples: triples.len(),
    }
}

fn relation_to_literal(rel: &SemanticRelation, answer_var: &str) -> Literal {
    let args = rel
        .args
        .iter()
        .map(|a| match a {
            RelationArg::Const(c) => Term::constant(c.clone()),
            RelationArg::Answer => Term::var(answer_var),
        })
        .collect();
    Literal::positive(Atom::new(rel.kind.predicate(), args))
}

/// Turn extracted relations into ground facts, keeping provenance per rule.
/// `isa` and `part_of` facts get an `_edge` twin so they join the knowledge
/// importer's transitive-closure layer as first steps.
pub fn relations_to_program(rels: &[SemanticRelation]) -> Program {
    let mut rules = Vec::new();
    let mut origins = Vec::new();
    for r in rels.iter().filter(|r| r.is_ground()) {
        let origin = crate::ast::Origin::new(format!(
            "sentence {} via pattern {}",
            r.sentence_id, r.pattern_id
        ));
        let lit = relation_to_literal(r, "X");
        rules.push(Rule::fact(lit.clone()));
        origins.push(origin.clone());
        if matches!(r.kind, RelationKind::Isa | RelationKind::PartOf) {
            let twin = Literal::positive(Atom::new(
                format!("{}_edge", r.kind.predicate()),
                lit.atom.args.clone(),
            ));
            rules.push(Rule::fact(twin));
            origins.push(origin);
        }
    }
    Program::from_parts(rules, origins)
}

/// Program text with one provenance comment per rule, the on-disk form of
/// ingested passages.
pub fn program_with_comments(p: &Program) -> String {
    let mut out = String::new();
    for (rule, origin) in p.iter().zip(p.origins()) {
        if !origin.0.is_empty() {
            out.push_str(&format!("% {}\n", origin.0));
        }
        out.push_str(&format!("{rule}\n"));
    }
    out
}

/// Translate a question's dependency triples into a query. The `wh`-marked
/// token becomes the answer variable; the remaining triples run through the
/// same pattern table that handles passages. Yes/no questions (no `wh`
/// row) yield ground queries.
pub fn translate_question(
    triples: &[DependencyTriple],
    patterns: &[PatternRule],
) -> Result<Query, IngestError> {
    let mut wh_tokens: Vec<String> = Vec::new();
    for t in triples {
        if t.relation == DepLabel::Wh && !wh_tokens.contains(&t.dependent.token) {
            wh_tokens.push(t.dependent.token.clone());
        }
    }
    if wh_tokens.len() > 1 {
        return Err(IngestError::MultipleWh { tokens: wh_tokens });
    }
    let wh_token = wh_tokens.first().map(String::as_str);

    let mut body: Vec<BodyLiteral> = Vec::new();
    for (sid, group) in by_sentence(triples) {
        let mut consumed = vec![false; group.len()];
        let rels = extract_sentence(&group, patterns, &sid, wh_token, &mut consumed);
        for r in &rels {
            let lit = BodyLiteral::plain(relation_to_literal(r, "X"));
            if !body.contains(&lit) {
                body.push(lit);
            }
        }
    }
    if body.is_empty() {
        return Err(IngestError::NoQueryDerived);
    }
    if wh_token.is_some() && body.iter().all(|b| b.literal.is_ground()) {
        return Err(IngestError::AnswerVarMissing);
    }
    Ok(Query::new(body))
}
