//! File-based commonsense knowledge import: concept triples, word-sense
//! disambiguation, and compilation of the context-relevant slice into facts
//! plus inheritance defaults.
//!
//! Triples come from TSV snapshots (`subject<TAB>relation<TAB>object[<TAB>
//! weight]`) with relations from a closed set. The sense index is a TSV of
//! `word<TAB>sense_id<TAB>gloss terms<TAB>domain tags` with space-separated
//! term lists. Disambiguation is bag-overlap scoring with a domain-tag
//! bonus: auditable, deterministic, and tested against fixed fixtures.
//!
//! Compilation first keeps only triples reachable within a hop budget from
//! the context terms, then emits ground facts plus the support rules the
//! kept relations need (transitive `isa`/`part_of`, symmetric `synonym`,
//! and a guarded inheritance rule routed through the defaults machinery so
//! exceptions compose with imported knowledge).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::ast::{Atom, BodyLiteral, Literal, Program, Rule, Term};
use crate::defaults::default_rule;
use crate::token::{is_stopword, sanitize_constant};

pub const DEFAULT_DOMAIN_BONUS: usize = 2;
pub const DEFAULT_HOPS: usize = 2;

/// The closed relation vocabulary for concept triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConceptRelation {
    Isa,
    PartOf,
    Synonym,
    HasProperty,
    InstanceOf,
}

impl ConceptRelation {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "isa" => Some(ConceptRelation::Isa),
            "part_of" => Some(ConceptRelation::PartOf),
            "synonym" => Some(ConceptRelation::Synonym),
            "has_property" => Some(ConceptRelation::HasProperty),
            "instance_of" => Some(ConceptRelation::InstanceOf),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConceptRelation::Isa => "isa",
            ConceptRelation::PartOf => "part_of",
            ConceptRelation::Synonym => "synonym",
            ConceptRelation::HasProperty => "has_property",
            ConceptRelation::InstanceOf => "instance_of",
        }
    }
}

impl fmt::Display for ConceptRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptTriple {
    pub subject: String,
    pub relation: ConceptRelation,
    pub object: String,
    pub weight: f64,
}

/// One sense of a surface word, with the gloss and domain vocabulary used
/// for disambiguation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenseEntry {
    pub word: String,
    pub sense_id: String,
    pub gloss_terms: Vec<String>,
    pub domain_tags: BTreeSet<String>,
}

/// Bag of lowercased, stop-word-free tokens harvested from the passage and
/// question.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContextProfile {
    counts: BTreeMap<String, usize>,
}

impl ContextProfile {
    pub fn new(tokens: impl IntoIterator<Item = String>) -> Self {
        let mut counts = BTreeMap::new();
        for t in tokens {
            let t = t.to_lowercase();
            if t.is_empty() || is_stopword(&t) {
                continue;
            }
            *counts.entry(t).or_insert(0) += 1;
        }
        ContextProfile { counts }
    }

    /// Context harvested from every constant in a program, split on `_` so
    /// compound constants such as `break_down` contribute their words too.
    pub fn from_program(p: &Program) -> Self {
        let mut tokens = Vec::new();
        for t in p.constants() {
            if let Term::Const(c) = t {
                tokens.push(c.clone());
                tokens.extend(c.split('_').map(str::to_string));
            }
        }
        ContextProfile::new(tokens)
    }

    pub fn merged(&self, other: &ContextProfile) -> ContextProfile {
        let mut counts = self.counts.clone();
        for (t, n) in &other.counts {
            *counts.entry(t.clone()).or_insert(0) += n;
        }
        ContextProfile { counts }
    }

    pub fn terms(&self) -> impl Iterator<Item = &String> {
        self.counts.keys()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    fn count(&self, token: &str) -> usize {
        // A compound token like `computer_science` matches when all of its
        // parts occur, as often as the scarcest part.
        if token.contains('_') {
            token
                .split('_')
                .filter(|p| !p.is_empty())
                .map(|p| self.counts.get(p).copied().unwrap_or(0))
                .min()
                .unwrap_or(0)
        } else {
            self.counts.get(token).copied().unwrap_or(0)
        }
    }
}

/// A line-level problem while loading a TSV snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KbDiagnostic {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for KbDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KbError {
    #[error("word `{word}` has no senses in the index")]
    NoSenses { word: String },
    #[error("hops must be at least 1, got {0}")]
    InvalidHops(usize),
}

/// Load concept triples from TSV text. Duplicate (subject, relation,
/// object) rows collapse, keeping the maximum weight. Any malformed line
/// fails the whole load, with one diagnostic per offending line.
pub fn load_triples(text: &str) -> Result<Vec<ConceptTriple>, Vec<KbDiagnostic>> {
    let mut triples: Vec<ConceptTriple> = Vec::new();
    let mut index: HashMap<(String, ConceptRelation, String), usize> = HashMap::new();
    let mut diags = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 3 && cols.len() != 4 {
            diags.push(KbDiagnostic {
                line,
                message: format!("expected 3 or 4 tab-separated columns, got {}", cols.len()),
            });
            continue;
        }
        let subject = cols[0].trim().to_lowercase();
        let object = cols[2].trim().to_lowercase();
        if subject.is_empty() || object.is_empty() {
            diags.push(KbDiagnostic {
                line,
                message: "empty concept token".to_string(),
            });
            continue;
        }
        let Some(relation) = ConceptRelation::parse(cols[1].trim()) else {
            diags.push(KbDiagnostic {
                line,
                message: format!(
                    "unknown relation `{}`; expected one of isa, part_of, synonym, has_property, instance_of",
                    cols[1].trim()
                ),
            });
            continue;
        };
        let weight = if cols.len() == 4 {
            match cols[3].trim().parse::<f64>() {
                Ok(w) if w >= 0.0 => w,
                Ok(w) => {
                    diags.push(KbDiagnostic {
                        line,
                        message: format!("negative weight {w}"),
                    });
                    continue;
                }
                Err(_) => {
                    diags.push(KbDiagnostic {
                        line,
                        message: format!("cannot parse weight `{}`", cols[3].trim()),
                    });
                    continue;
                }
            }
        } else {
            1.0
        };
        let key = (subject.clone(), relation, object.clone());
        match index.get(&key) {
            Some(&at) => {
                if weight > triples[at].weight {
                    triples[at].weight = weight;
                }
            }
            None => {
                index.insert(key, triples.len());
                triples.push(ConceptTriple {
                    subject,
                    relation,
                    object,
                    weight,
                });
            }
        }
    }
    if diags.is_empty() {
        Ok(triples)
    } else {
        Err(diags)
    }
}

/// Load a sense index from TSV text (`word<TAB>sense_id<TAB>gloss terms
/// <TAB>domain tags`, term lists space-separated).
pub fn load_senses(text: &str) -> Result<Vec<SenseEntry>, Vec<KbDiagnostic>> {
    let mut senses = Vec::new();
    let mut seen_ids = BTreeSet::new();
    let mut diags = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 4 {
            diags.push(KbDiagnostic {
                line,
                message: format!("expected 4 tab-separated columns, got {}", cols.len()),
            });
            continue;
        }
        let word = cols[0].trim().to_lowercase();
        let sense_id = cols[1].trim().to_lowercase();
        let gloss_terms: Vec<String> = cols[2]
            .split_whitespace()
            .map(|t| t.to_lowercase())
            .collect();
        let domain_tags: BTreeSet<String> = cols[3]
            .split_whitespace()
            .map(|t| t.to_lowercase())
            .collect();
        if word.is_empty() || sense_id.is_empty() {
            diags.push(KbDiagnostic {
                line,
                message: "empty word or sense id".to_string(),
            });
            continue;
        }
        if gloss_terms.is_empty() {
            diags.push(KbDiagnostic {
                line,
                message: format!("sense `{sense_id}` has no gloss terms"),
            });
            continue;
        }
        if !seen_ids.insert(sense_id.clone()) {
            diags.push(KbDiagnostic {
                line,
                message: format!("duplicate sense id `{sense_id}`"),
            });
            continue;
        }
        senses.push(SenseEntry {
            word,
            sense_id,
            gloss_terms,
            domain_tags,
        });
    }
    if diags.is_empty() {
        Ok(senses)
    } else {
        Err(diags)
    }
}

/// The chosen sense and its score, reported for audit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WsdChoice {
    pub sense_id: String,
    pub score: usize,
}

/// Pick the sense of `word` that best overlaps the context:
/// `score = |gloss ∩ ctx| + bonus * |domains ∩ ctx|`, counted with context
/// multiplicity. Ties go to the lexicographically smallest sense id.
pub fn disambiguate(
    word: &str,
    senses: &[SenseEntry],
    ctx: &ContextProfile,
) -> Result<WsdChoice, KbError> {
    disambiguate_with_bonus(word, senses, ctx, DEFAULT_DOMAIN_BONUS)
}

pub fn disambiguate_with_bonus(
    word: &str,
    senses: &[SenseEntry],
    ctx: &ContextProfile,
    domain_bonus: usize,
) -> Result<WsdChoice, KbError> {
    let word = word.to_lowercase();
    let mut candidates: Vec<&SenseEntry> = senses.iter().filter(|s| s.word == word).collect();
    if candidates.is_empty() {
        return Err(KbError::NoSenses { word });
    }
    candidates.sort_by(|a, b| a.sense_id.cmp(&b.sense_id));
    let mut best: Option<WsdChoice> = None;
    for sense in candidates {
        let gloss: BTreeSet<&String> = sense.gloss_terms.iter().collect();
        let score: usize = gloss.iter().map(|g| ctx.count(g)).sum::<usize>()
            + domain_bonus
                * sense
                    .domain_tags
                    .iter()
                    .map(|d| ctx.count(d))
                    .sum::<usize>();
        let better = match &best {
            None => true,
            Some(b) => score > b.score,
        };
        if better {
            best = Some(WsdChoice {
                sense_id: sense.sense_id.clone(),
                score,
            });
        }
    }
    Ok(best.unwrap())
}

/// An imported "members of `class` normally have `property`" default,
/// reported alongside the compiled program so exceptions can be attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InheritedDefault {
    pub class: String,
    pub property: String,
}

#[derive(Debug, Clone)]
pub struct CompiledKb {
    pub program: Program,
    pub inherited: Vec<InheritedDefault>,
    pub warnings: Vec<String>,
    /// Triples that survived the relevance filter.
    pub kept: usize,
}

fn concept_term(token: &str) -> Term {
    Term::constant(sanitize_constant(token))
}

/// Compile the context-relevant part of a triple snapshot into a program.
///
/// A triple is kept when one of its endpoints lies within `hops - 1`
/// undirected steps of a context term, so the whole edge is crossed within
/// `hops` steps. Growing the context or the hop budget never removes rules.
pub fn compile_kb(
    triples: &[ConceptTriple],
    ctx: &ContextProfile,
    hops: usize,
) -> Result<CompiledKb, KbError> {
    if hops == 0 {
        return Err(KbError::InvalidHops(hops));
    }

    // Undirected concept graph for the relevance filter.
    let mut neighbors: HashMap<&str, Vec<&str>> = HashMap::new();
    for t in triples {
        neighbors.entry(&t.subject).or_default().push(&t.object);
        neighbors.entry(&t.object).or_default().push(&t.subject);
    }
    let mut dist: HashMap<&str, usize> = HashMap::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    for term in ctx.terms() {
        if neighbors.contains_key(term.as_str()) && !dist.contains_key(term.as_str()) {
            dist.insert(term.as_str(), 0);
            queue.push_back(term.as_str());
        }
    }
    while let Some(node) = queue.pop_front() {
        let d = dist[node];
        if let Some(nexts) = neighbors.get(node) {
            for n in nexts {
                if !dist.contains_key(n) {
                    dist.insert(n, d + 1);
                    queue.push_back(n);
                }
            }
        }
    }
    let kept: Vec<&ConceptTriple> = triples
        .iter()
        .filter(|t| {
            let ds = dist.get(t.subject.as_str()).copied().unwrap_or(usize::MAX);
            let do_ = dist.get(t.object.as_str()).copied().unwrap_or(usize::MAX);
            ds.min(do_) < hops
        })
        .collect();

    let mut warnings = Vec::new();
    if let Some(cycle) = isa_cycle(&kept) {
        warnings.push(format!("isa cycle: {}", cycle.join(" -> ")));
    }

    let mut rules = Vec::new();
    let mut inherited = Vec::new();
    let mut seen_inherited = BTreeSet::new();
    let (mut any_isa, mut any_part_of, mut any_synonym, mut any_property) =
        (false, false, false, false);
    for t in &kept {
        let s = concept_term(&t.subject);
        let o = concept_term(&t.object);
        match t.relation {
            ConceptRelation::Isa => {
                any_isa = true;
                rules.push(Rule::fact(Literal::positive(Atom::new(
                    "isa",
                    vec![s.clone(), o.clone()],
                ))));
                rules.push(Rule::fact(Literal::positive(Atom::new(
                    "isa_edge",
                    vec![s, o],
                ))));
            }
            ConceptRelation::PartOf => {
                any_part_of = true;
                rules.push(Rule::fact(Literal::positive(Atom::new(
                    "part_of",
                    vec![s.clone(), o.clone()],
                ))));
                rules.push(Rule::fact(Literal::positive(Atom::new(
                    "part_of_edge",
                    vec![s, o],
                ))));
            }
            ConceptRelation::Synonym => {
                any_synonym = true;
                rules.push(Rule::fact(Literal::positive(Atom::new(
                    "synonym",
                    vec![s, o],
                ))));
            }
            ConceptRelation::InstanceOf => {
                any_isa = true;
                rules.push(Rule::fact(Literal::positive(Atom::new(
                    "instance_of",
                    vec![s, o],
                ))));
            }
            ConceptRelation::HasProperty => {
                any_property = true;
                rules.push(Rule::fact(Literal::positive(Atom::new(
                    "holds_class",
                    vec![s, o],
                ))));
                if seen_inherited.insert((t.subject.clone(), t.object.clone())) {
                    inherited.push(InheritedDefault {
                        class: sanitize_constant(&t.subject),
                        property: sanitize_constant(&t.object),
                    });
                }
            }
        }
    }

    // Transitive closure goes through an edge layer so that goal-directed
    // evaluation always grounds one step before recursing; a left-recursive
    // `isa(X, Z) :- isa(X, Y), isa(Y, Z).` would be pruned incomplete by
    // the solver's loop check.
    let var = |n: &str| Term::var(n);
    let pos2 = |p: &str, x: Term, y: Term| Literal::positive(Atom::new(p, vec![x, y]));
    if any_isa || any_property {
        rules.push(Rule::new(
            pos2("isa_edge", var("X"), var("Y")),
            vec![BodyLiteral::plain(pos2("instance_of", var("X"), var("Y")))],
        ));
        rules.push(Rule::new(
            pos2("isa", var("X"), var("Y")),
            vec![BodyLiteral::plain(pos2("isa_edge", var("X"), var("Y")))],
        ));
        rules.push(Rule::new(
            pos2("isa", var("X"), var("Z")),
            vec![
                BodyLiteral::plain(pos2("isa_edge", var("X"), var("Y"))),
                BodyLiteral::plain(pos2("isa", var("Y"), var("Z"))),
            ],
        ));
    }
    if any_part_of {
        rules.push(Rule::new(
            pos2("part_of", var("X"), var("Y")),
            vec![BodyLiteral::plain(pos2("part_of_edge", var("X"), var("Y")))],
        ));
        rules.push(Rule::new(
            pos2("part_of", var("X"), var("Z")),
            vec![
                BodyLiteral::plain(pos2("part_of_edge", var("X"), var("Y"))),
                BodyLiteral::plain(pos2("part_of", var("Y"), var("Z"))),
            ],
        ));
    }
    if any_synonym {
        rules.push(Rule::new(
            Literal::positive(Atom::new("synonym", vec![var("X"), var("Y")])),
            vec![BodyLiteral::plain(Literal::positive(Atom::new(
                "synonym",
                vec![var("Y"), var("X")],
            )))],
        ));
    }
    if any_property {
        rules.push(default_rule(
            Literal::positive(Atom::new("holds", vec![var("X"), var("P")])),
            vec![
                BodyLiteral::plain(Literal::positive(Atom::new(
                    "isa",
                    vec![var("X"), var("C")],
                ))),
                BodyLiteral::plain(Literal::positive(Atom::new(
                    "holds_class",
                    vec![var("C"), var("P")],
                ))),
            ],
            Term::compound("inh", vec![var("X"), var("P")]),
        ));
    }

    Ok(CompiledKb {
        program: Program::with_origin(rules, "kb-import"),
        inherited,
        warnings,
        kept: kept.len(),
    })
}

fn isa_cycle(kept: &[&ConceptTriple]) -> Option<Vec<String>> {
    let mut edges: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for t in kept {
        if t.relation == ConceptRelation::Isa {
            edges.entry(&t.subject).or_default().push(&t.object);
        }
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    fn dfs<'g>(
        node: &'g str,
        edges: &BTreeMap<&'g str, Vec<&'g str>>,
        marks: &mut BTreeMap<&'g str, Mark>,
        path: &mut Vec<&'g str>,
    ) -> Option<Vec<String>> {
        marks.insert(node, Mark::Grey);
        path.push(node);
        for next in edges.get(node).into_iter().flatten() {
            match marks.get(next).copied().unwrap_or(Mark::White) {
                Mark::Grey => {
                    let start = path.iter().position(|n| n == next).unwrap();
                    let mut cycle: Vec<String> =
                        path[start..].iter().map(|s| s.to_string()).collect();
                    cycle.push(next.to_string());
                    return Some(cycle);
                }
                Mark::White => {
                    if let Some(c) = dfs(next, edges, marks, path) {
                        return Some(c);
                    }
                }
                Mark::Black => {}
            }
        }
        path.pop();
        marks.insert(node, Mark::Black);
        None
    }
    let mut marks = BTreeMap::new();
    let nodes: Vec<&str> = edges.keys().copied().collect();
    for node in nodes {
        if marks.get(node).copied().unwrap_or(Mark::White) == Mark::White {
            let mut path = Vec::new();
            if let Some(c) = dfs(node, &edges, &mut marks, &mut path) {
                return Some(c);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{self, OracleConfig};
    use crate::parser::{parse_program, parse_query};
    use crate::solver::{self, SolverConfig};

    fn ctx(words: &[&str]) -> ContextProfile {
        ContextProfile::new(words.iter().map(|s| s.to_string()))
    }

    #[test]
    fn loads_triples() {
        let triples = load_triples("engine\tpart_of\ttrain\npenguin\tisa\tbird\n").unwrap();
        assert_eq!(triples.len(), 2);
        assert_eq!(triples[0].subject, "engine");
        assert_eq!(triples[0].relation, ConceptRelation::PartOf);
        assert_eq!(triples[0].object, "train");
        assert_eq!(triples[0].weight, 1.0);
    }

    #[test]
    fn unknown_relation_is_diagnosed_with_line() {
        let err = load_triples("penguin\tisa\tbird\ntree\tfoo\tplant\n").unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].line, 2);
        assert!(err[0].message.contains("foo"));
    }

    #[test]
    fn empty_file_is_empty_list() {
        assert!(load_triples("").unwrap().is_empty());
    }

    #[test]
    fn duplicates_keep_max_weight() {
        let triples =
            load_triples("ant\tisa\tbee\t0.5\nant\tisa\tbee\t0.9\nant\tisa\tbee\t0.2\n").unwrap();
        assert_eq!(triples.len(), 1);
        assert_eq!(triples[0].weight, 0.9);
    }

    fn tree_senses() -> Vec<SenseEntry> {
        load_senses(
            "tree\ttree#data_structure\tnode edge root child\tcomputer_science\n\
             tree\ttree#plant\tleaf trunk forest\tbotany\n",
        )
        .unwrap()
    }

    #[test]
    fn wsd_picks_data_structure_in_cs_context() {
        let senses = tree_senses();
        let choice = disambiguate(
            "tree",
            &senses,
            &ctx(&["computer", "science", "node", "algorithm"]),
        )
        .unwrap();
        assert_eq!(choice.sense_id, "tree#data_structure");
        assert_eq!(choice.score, 3); // gloss overlap 1 + 2 * domain match 1
    }

    #[test]
    fn wsd_picks_plant_in_botany_context() {
        let senses = tree_senses();
        let choice = disambiguate("tree", &senses, &ctx(&["forest", "leaf", "botany"])).unwrap();
        assert_eq!(choice.sense_id, "tree#plant");
    }

    #[test]
    fn wsd_single_sense_wins_regardless_of_context() {
        let senses = load_senses("engine\tengine#machine\tpiston fuel\tmechanics\n").unwrap();
        let choice = disambiguate("engine", &senses, &ctx(&["unrelated"])).unwrap();
        assert_eq!(choice.sense_id, "engine#machine");
    }

    #[test]
    fn wsd_empty_context_breaks_ties_lexicographically() {
        let senses = tree_senses();
        let choice = disambiguate("tree", &senses, &ContextProfile::default()).unwrap();
        assert_eq!(choice.sense_id, "tree#data_structure");
        assert_eq!(choice.score, 0);
    }

    #[test]
    fn wsd_unknown_word_errors() {
        assert!(matches!(
            disambiguate("rock", &tree_senses(), &ContextProfile::default()),
            Err(KbError::NoSenses { .. })
        ));
    }

    #[test]
    fn wsd_scale_invariance() {
        let senses = tree_senses();
        let base = ["computer", "science", "node", "algorithm"];
        for k in 1..5usize {
            let mut tokens = Vec::new();
            for _ in 0..k {
                tokens.extend(base.iter().map(|s| s.to_string()));
            }
            let choice = disambiguate("tree", &senses, &ContextProfile::new(tokens)).unwrap();
            assert_eq!(choice.sense_id, "tree#data_structure");
            assert_eq!(choice.score, 3 * k);
        }
    }

    #[test]
    fn compile_kb_supports_inheritance() {
        let triples = load_triples("penguin\tisa\tbird\nbird\thas_property\tflies\n").unwrap();
        let kb = compile_kb(&triples, &ctx(&["penguin"]), 2).unwrap();
        assert_eq!(
            kb.inherited,
            vec![InheritedDefault {
                class: "bird".into(),
                property: "flies".into()
            }]
        );
        let passage = parse_program("instance_of(tweety, penguin).", "t").unwrap();
        let combined = passage.extended(&kb.program);
        let q = parse_query("?- holds(tweety, flies).").unwrap();
        assert!(solver::solve(&combined, &q, &SolverConfig::default()).succeeded());
        assert!(oracle::brave_entails(
            &combined,
            &parse_program("holds(tweety, flies).", "t").unwrap().rules()[0]
                .head
                .clone()
                .unwrap(),
            &OracleConfig::default()
        )
        .unwrap());
    }

    #[test]
    fn inheritance_blocked_by_abnormality() {
        let triples = load_triples("penguin\tisa\tbird\nbird\thas_property\tflies\n").unwrap();
        let kb = compile_kb(&triples, &ctx(&["penguin"]), 2).unwrap();
        let passage = parse_program(
            "instance_of(tweety, penguin). ab(inh(X, flies)) :- instance_of(X, penguin).",
            "t",
        )
        .unwrap();
        let combined = passage.extended(&kb.program);
        let q = parse_query("?- holds(tweety, flies).").unwrap();
        assert!(!solver::solve(&combined, &q, &SolverConfig::default()).succeeded());
    }

    #[test]
    fn unreachable_context_compiles_to_empty_program() {
        let triples = load_triples("penguin\tisa\tbird\n").unwrap();
        let kb = compile_kb(&triples, &ctx(&["galaxy"]), 2).unwrap();
        assert!(kb.program.is_empty());
        assert_eq!(kb.kept, 0);
    }

    #[test]
    fn hop_monotonicity() {
        let triples =
            load_triples("ant\tisa\tbee\nbee\tisa\tcow\ncow\tisa\tdog\ndog\tisa\telk\n").unwrap();
        let c = ctx(&["ant"]);
        let mut previous: Vec<String> = Vec::new();
        for hops in 1..5 {
            let kb = compile_kb(&triples, &c, hops).unwrap();
            let rules: Vec<String> = kb.program.iter().map(|r| r.to_string()).collect();
            assert!(
                previous.iter().all(|r| rules.contains(r)),
                "hops {hops} dropped a rule"
            );
            previous = rules;
        }
    }

    #[test]
    fn isa_transitivity_matches_reachability() {
        // A fixed small DAG; reachability computed independently.
        let triples = load_triples(
            "ant\tisa\tbee\nbee\tisa\tcow\nbee\tisa\tdog\ndog\tisa\telk\nfox\tisa\tgnu\n",
        )
        .unwrap();
        let kb = compile_kb(&triples, &ctx(&["ant", "fox"]), 10).unwrap();
        let edges: Vec<(&str, &str)> = vec![
            ("ant", "bee"),
            ("bee", "cow"),
            ("bee", "dog"),
            ("dog", "elk"),
            ("fox", "gnu"),
        ];
        let nodes = ["ant", "bee", "cow", "dog", "elk", "fox", "gnu"];
        let reach = |from: &str, to: &str| -> bool {
            let mut seen = BTreeSet::new();
            let mut work = vec![from];
            while let Some(n) = work.pop() {
                if !seen.insert(n) {
                    continue;
                }
                for (x, y) in &edges {
                    if *x == n {
                        work.push(y);
                    }
                }
            }
            from != to && seen.contains(to)
        };
        let cfg = SolverConfig::default();
        for from in nodes {
            for to in nodes {
                let q = parse_query(&format!("?- isa({from}, {to}).")).unwrap();
                let got = solver::solve(&kb.program, &q, &cfg).succeeded();
                assert_eq!(got, reach(from, to), "isa({from}, {to})");
            }
        }
    }

    #[test]
    fn context_growth_never_removes_rules() {
        let triples = load_triples("ant\tisa\tbee\nbee\tisa\tcow\nfox\tisa\tgnu\n").unwrap();
        let small = compile_kb(&triples, &ctx(&["ant"]), 2).unwrap();
        let grown = compile_kb(&triples, &ctx(&["ant", "fox"]), 2).unwrap();
        let small_rules: Vec<String> = small.program.iter().map(|r| r.to_string()).collect();
        let grown_rules: Vec<String> = grown.program.iter().map(|r| r.to_string()).collect();
        assert!(small_rules.iter().all(|r| grown_rules.contains(r)));
        assert!(grown_rules.len() > small_rules.len());
    }

    #[test]
    fn isa_cycle_warns_but_keeps_triples() {
        let triples = load_triples("ant\tisa\tbee\nbee\tisa\tant\n").unwrap();
        let kb = compile_kb(&triples, &ctx(&["ant"]), 2).unwrap();
        assert_eq!(kb.warnings.len(), 1);
        assert!(kb.warnings[0].contains("cycle"));
        assert_eq!(kb.kept, 2);
        // Queries still terminate under the loop cut, and the closure is
        // complete on the cycle.
        let cfg = SolverConfig::default();
        for q in [
            "?- isa(ant, bee).",
            "?- isa(ant, ant).",
            "?- isa(bee, bee).",
        ] {
            let q = parse_query(q).unwrap();
            assert!(solver::solve(&kb.program, &q, &cfg).succeeded(), "{q:?}");
        }
    }

    #[test]
    fn compiled_kb_round_trips_and_grounds() {
        let triples = load_triples(
            "penguin\tisa\tbird\nbird\thas_property\tflies\nengine\tpart_of\ttrain\ncar\tsynonym\tautomobile\n",
        )
        .unwrap();
        let kb = compile_kb(&triples, &ctx(&["penguin", "engine", "car"]), 3).unwrap();
        let printed = kb.program.to_string();
        let reparsed = parse_program(&printed, "t").unwrap();
        assert_eq!(reparsed.rules(), kb.program.rules());
        oracle::ground(&kb.program, kb.program.max_term_depth(), 1_000_000).unwrap();
    }
}
