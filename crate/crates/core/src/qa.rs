//! Question-answering harness: assemble passage facts, imported knowledge
//! and the default layer into one program, answer translated questions with
//! justifications, and score batch runs.
//!
//! The scoring table mirrors the usual per-article accounting: one row per
//! article with `percent = 100 * correct / count` (two decimals), a total
//! row computed from summed counts (micro average), and an
//! average-of-percents row (macro average). Both summary statistics are
//! emitted and labeled.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{Program, Term};
use crate::defaults::{self, DefaultsError, DefaultsSet};
use crate::ingest::DependencyTriple;
use crate::kb::{self, CompiledKb, ConceptTriple, ContextProfile, SenseEntry, WsdChoice};
use crate::parser::Query;
use crate::solver::{solve, Justification, SolveOutcome, SolverConfig};

pub const NO_ANSWER: &str = "no-answer";

/// One answered question.
#[derive(Debug, Clone, Serialize)]
pub struct QARecord {
    pub qid: String,
    pub predicted: String,
    pub gold: Vec<String>,
    pub correct: bool,
    /// Why there was no answer (solver rejection, no binding), if so.
    pub reason: String,
    #[serde(skip)]
    pub justification: Option<Justification>,
}

/// Normalize for answer matching: lowercase, trim, drop article tokens and
/// terminal punctuation, collapse whitespace.
fn normalize(text: &str) -> String {
    let lowered = text.to_lowercase();
    let trimmed = lowered.trim().trim_end_matches(['.', '!', '?', ',', ';']);
    trimmed
        .split_whitespace()
        .filter(|w| !matches!(*w, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// True when the prediction matches any gold answer after normalization:
/// equal, substring of it, or containing it.
pub fn match_answer(predicted: &str, gold: &[String]) -> bool {
    let p = normalize(predicted);
    if p.is_empty() {
        return false;
    }
    gold.iter().any(|g| {
        let g = normalize(g);
        !g.is_empty() && (p == g || g.contains(&p) || p.contains(&g))
    })
}

fn render_term(t: &Term) -> String {
    // Constants such as `break_down` read better with spaces restored.
    match t {
        Term::Const(c) => c.replace('_', " "),
        other => other.to_string(),
    }
}

/// Answer one query against the assembled program. Wh-queries report the
/// first answer binding in solver order; ground queries report yes/no;
/// rejections and missing bindings report [`NO_ANSWER`] with the reason.
pub fn answer_question(
    program: &Program,
    qid: &str,
    query: &Query,
    gold: &[String],
    cfg: &SolverConfig,
) -> QARecord {
    let (predicted, reason, justification) = match solve(program, query, cfg) {
        SolveOutcome::Success(mut answers) => {
            let (subst, just) = answers.remove(0);
            if query.free_vars.is_empty() {
                ("yes".to_string(), String::new(), Some(just))
            } else {
                match subst.get(&query.free_vars[0]) {
                    Some(t) => (render_term(t), String::new(), Some(just)),
                    None => (
                        NO_ANSWER.to_string(),
                        "answer variable left unbound".to_string(),
                        Some(just),
                    ),
                }
            }
        }
        SolveOutcome::Failure => {
            if query.free_vars.is_empty() {
                ("no".to_string(), String::new(), None)
            } else {
                (
                    NO_ANSWER.to_string(),
                    "no binding satisfies the query".to_string(),
                    None,
                )
            }
        }
        SolveOutcome::FallbackUsed(fb) => {
            let reason = format!("oracle fallback over {} rules", fb.slice_rules);
            if query.free_vars.is_empty() {
                (
                    if fb.verdict { "yes" } else { "no" }.to_string(),
                    reason,
                    None,
                )
            } else {
                match fb.answers.first().and_then(|s| s.get(&query.free_vars[0])) {
                    Some(t) => (render_term(t), reason, None),
                    None => (NO_ANSWER.to_string(), reason, None),
                }
            }
        }
        SolveOutcome::Rejected(r) => (NO_ANSWER.to_string(), r.to_string(), None),
    };
    let correct = match_answer(&predicted, gold);
    QARecord {
        qid: qid.to_string(),
        predicted,
        gold: gold.to_vec(),
        correct,
        reason,
        justification,
    }
}

#[derive(Debug, Error)]
pub enum QaError {
    #[error("defaults: {0}")]
    Defaults(#[from] DefaultsError),
    #[error("knowledge base: {0}")]
    Kb(#[from] kb::KbError),
    #[error("results line {line}: {message}")]
    Results { line: usize, message: String },
}

/// The combined program for a QA run, plus what went into it.
#[derive(Debug)]
pub struct Assembled {
    pub program: Program,
    pub warnings: Vec<String>,
    pub wsd_choices: Vec<(String, WsdChoice)>,
    pub kb: Option<CompiledKb>,
}

/// Context tokens from the passage program and the batch's queries.
pub fn build_context(passage: &Program, queries: &[Query]) -> ContextProfile {
    let mut ctx = ContextProfile::from_program(passage);
    for q in queries {
        let mut tokens = Vec::new();
        for b in &q.body {
            for t in &b.literal.atom.args {
                if let Term::Const(c) = t {
                    tokens.push(c.clone());
                    tokens.extend(c.split('_').map(str::to_string));
                }
            }
            tokens.push(b.literal.atom.predicate.clone());
        }
        ctx = ctx.merged(&ContextProfile::new(tokens));
    }
    ctx
}

/// Assemble passage ⊕ imported knowledge ⊕ default layer.
///
/// When a sense index is supplied, every context word with known senses is
/// disambiguated first and the chosen sense ids join the context, so the
/// relevance filter can reach sense-tagged concepts.
pub fn assemble(
    passage: &Program,
    kb_triples: &[ConceptTriple],
    senses: &[SenseEntry],
    specs: &DefaultsSet,
    ctx: &ContextProfile,
    hops: usize,
) -> Result<Assembled, QaError> {
    let mut ctx = ctx.clone();
    let mut wsd_choices = Vec::new();
    if !senses.is_empty() {
        let words: Vec<String> = ctx.terms().cloned().collect();
        for word in words {
            if senses.iter().any(|s| s.word == word) {
                let choice = kb::disambiguate(&word, senses, &ctx)?;
                ctx = ctx.merged(&ContextProfile::new([choice.sense_id.clone()]));
                wsd_choices.push((word, choice));
            }
        }
    }

    let (combined, kb_out) = if kb_triples.is_empty() {
        (passage.clone(), None)
    } else {
        let compiled = kb::compile_kb(kb_triples, &ctx, hops)?;
        (passage.extended(&compiled.program), Some(compiled))
    };
    let augmented = defaults::augment(&combined, specs)?;
    let mut warnings = augmented.warnings;
    if let Some(k) = &kb_out {
        warnings.extend(k.warnings.iter().cloned());
    }
    Ok(Assembled {
        program: augmented.program,
        warnings,
        wsd_choices,
        kb: kb_out,
    })
}

/// Answer a batch. Records come back sorted by question id.
pub fn answer_batch(
    program: &Program,
    questions: &[(String, Query)],
    gold: &BTreeMap<String, Vec<String>>,
    cfg: &SolverConfig,
) -> Vec<QARecord> {
    let mut records: Vec<QARecord> = questions
        .iter()
        .map(|(qid, q)| {
            let empty = Vec::new();
            let g = gold.get(qid).unwrap_or(&empty);
            answer_question(program, qid, q, g, cfg)
        })
        .collect();
    records.sort_by(|a, b| a.qid.cmp(&b.qid));
    records
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Report CSV: `qid,predicted,gold,correct,reason` with `|`-joined gold.
pub fn report_csv(records: &[QARecord]) -> String {
    let mut out = String::from("qid,predicted,gold,correct,reason\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_field(&r.qid),
            csv_field(&r.predicted),
            csv_field(&r.gold.join("|")),
            r.correct,
            csv_field(&r.reason),
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub article: String,
    pub correct: u64,
    pub count: u64,
    pub percent: f64,
}

/// Per-article results with both summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
    pub total_correct: u64,
    pub total_count: u64,
    /// Micro average: 100 * total correct / total count.
    pub total_percent: f64,
    /// Macro average: arithmetic mean of the per-article percents.
    pub average_percent: f64,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn percent(correct: u64, count: u64) -> f64 {
    if count == 0 {
        0.0
    } else {
        round2(100.0 * correct as f64 / count as f64)
    }
}

/// Parse a per-article results CSV (`article,correct,count`, optional
/// header) and compute the score table.
pub fn score_run(text: &str) -> Result<ScoreTable, QaError> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if line == 1 && trimmed.to_lowercase().replace(' ', "") == "article,correct,count" {
            continue;
        }
        let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(QaError::Results {
                line,
                message: format!("expected `article,correct,count`, got `{trimmed}`"),
            });
        }
        let correct: u64 = cols[1].parse().map_err(|_| QaError::Results {
            line,
            message: format!("bad correct count `{}`", cols[1]),
        })?;
        let count: u64 = cols[2].parse().map_err(|_| QaError::Results {
            line,
            message: format!("bad question count `{}`", cols[2]),
        })?;
        if correct > count {
            return Err(QaError::Results {
                line,
                message: format!("correct {correct} exceeds count {count}"),
            });
        }
        rows.push(ScoreRow {
            article: cols[0].to_string(),
            correct,
            count,
            percent: percent(correct, count),
        });
    }
    let total_correct: u64 = rows.iter().map(|r| r.correct).sum();
    let total_count: u64 = rows.iter().map(|r| r.count).sum();
    let average_percent = if rows.is_empty() {
        0.0
    } else {
        round2(rows.iter().map(|r| r.percent).sum::<f64>() / rows.len() as f64)
    };
    Ok(ScoreTable {
        rows,
        total_correct,
        total_count,
        total_percent: percent(total_correct, total_count),
        average_percent,
    })
}

/// Score a batch of answered questions as a single-article table.
pub fn score_records(article: &str, records: &[QARecord]) -> ScoreTable {
    let correct = records.iter().filter(|r| r.correct).count() as u64;
    let count = records.len() as u64;
    let row = ScoreRow {
        article: article.to_string(),
        correct,
        count,
        percent: percent(correct, count),
    };
    ScoreTable {
        rows: vec![row],
        total_correct: correct,
        total_count: count,
        total_percent: percent(correct, count),
        average_percent: percent(correct, count),
    }
}

impl fmt::Display for ScoreTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .rows
            .iter()
            .map(|r| r.article.len())
            .chain(["total (micro)".len()])
            .max()
            .unwrap_or(10);
        writeln!(
            f,
            "{:<width$}  {:>7}  {:>5}  {:>7}",
            "article", "correct", "count", "percent"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<width$}  {:>7}  {:>5}  {:>7.2}",
                r.article, r.correct, r.count, r.percent
            )?;
        }
        writeln!(
            f,
            "{:<width$}  {:>7}  {:>5}  {:>7.2}",
            "total (micro)", self.total_correct, self.total_count, self.total_percent
        )?;
        writeln!(
            f,
            "{:<width$}  {:>7}  {:>5}  {:>7.2}",
            "average (macro)", "", "", self.average_percent
        )
    }
}

/// A question: its id and the dependency triples of its text.
pub type QuestionTriples = (String, Vec<DependencyTriple>);

/// Parse a questions file. Each line is either `qid<TAB>path` (a triples
/// file relative to `base_dir`) or an inline triple row `qid<TAB><8 triple
/// columns>`.
pub fn parse_questions(
    text: &str,
    base_dir: &std::path::Path,
) -> Result<Vec<QuestionTriples>, String> {
    let mut order: Vec<String> = Vec::new();
    let mut by_qid: BTreeMap<String, Vec<DependencyTriple>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        match cols.len() {
            2 => {
                let qid = cols[0].trim().to_string();
                let path = base_dir.join(cols[1].trim());
                let content = std::fs::read_to_string(&path)
                    .map_err(|e| format!("line {line}: cannot read {}: {e}", path.display()))?;
                let triples = crate::ingest::parse_dep_triples(&content).map_err(|ds| {
                    format!(
                        "line {line}: {}: {}",
                        path.display(),
                        ds.iter()
                            .map(|d| d.to_string())
                            .collect::<Vec<_>>()
                            .join("; ")
                    )
                })?;
                if !by_qid.contains_key(&qid) {
                    order.push(qid.clone());
                }
                by_qid.entry(qid).or_default().extend(triples);
            }
            9 => {
                let qid = cols[0].trim().to_string();
                let row = cols[1..].join("\t");
                let triples = crate::ingest::parse_dep_triples(&row)
                    .map_err(|ds| format!("line {line}: {}", ds[0].message))?;
                if !by_qid.contains_key(&qid) {
                    order.push(qid.clone());
                }
                by_qid.entry(qid).or_default().extend(triples);
            }
            n => {
                return Err(format!(
                    "line {line}: expected `qid<TAB>path` or an inline triple row, got {n} columns"
                ))
            }
        }
    }
    Ok(order
        .into_iter()
        .map(|qid| {
            let t = by_qid.remove(&qid).unwrap();
            (qid, t)
        })
        .collect())
}

/// Parse a gold answers file: `qid<TAB>answer1|answer2|...`.
pub fn parse_gold(text: &str) -> Result<BTreeMap<String, Vec<String>>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let Some((qid, answers)) = raw.split_once('\t') else {
            return Err(format!("line {line}: expected `qid<TAB>answers`"));
        };
        out.insert(
            qid.trim().to_string(),
            answers.split('|').map(|a| a.trim().to_string()).collect(),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_query};

    #[test]
    fn match_strips_articles() {
        assert!(match_answer("the engine", &["engine".to_string()]));
    }

    #[test]
    fn match_substring_rule() {
        assert!(match_answer("engine", &["train engine".to_string()]));
        assert!(match_answer("train engine", &["engine".to_string()]));
    }

    #[test]
    fn match_rejects_unrelated() {
        assert!(!match_answer("caboose", &["engine".to_string()]));
        assert!(!match_answer("", &["engine".to_string()]));
    }

    #[test]
    fn answer_question_renders_first_binding() {
        let p = parse_program("part_of(engine, train). event(break_down, engine).", "t").unwrap();
        let q = parse_query("?- event(break_down, X).").unwrap();
        let rec = answer_question(
            &p,
            "q1",
            &q,
            &["engine".to_string()],
            &SolverConfig::default(),
        );
        assert_eq!(rec.predicted, "engine");
        assert!(rec.correct);
        assert!(rec.justification.is_some());
    }

    #[test]
    fn answer_question_yes_no() {
        let p = parse_program("isa(tweety, bird).", "t").unwrap();
        let q = parse_query("?- isa(tweety, bird).").unwrap();
        let rec = answer_question(&p, "q1", &q, &["yes".to_string()], &SolverConfig::default());
        assert_eq!(rec.predicted, "yes");
        assert!(rec.correct);
    }

    #[test]
    fn answer_question_unanswerable() {
        let p = parse_program("isa(tweety, bird).", "t").unwrap();
        let q = parse_query("?- event(explode, X).").unwrap();
        let rec = answer_question(&p, "q1", &q, &[], &SolverConfig::default());
        assert_eq!(rec.predicted, NO_ANSWER);
        assert!(!rec.correct);
        assert!(!rec.reason.is_empty());
    }

    #[test]
    fn multiword_constants_render_with_spaces() {
        let p = parse_program("event(break_down, steam_engine).", "t").unwrap();
        let q = parse_query("?- event(break_down, X).").unwrap();
        let rec = answer_question(
            &p,
            "q1",
            &q,
            &["steam engine".to_string()],
            &SolverConfig::default(),
        );
        assert_eq!(rec.predicted, "steam engine");
        assert!(rec.correct);
    }

    #[test]
    fn score_reproduces_published_arithmetic() {
        let csv = "\
ABC,5,5
Amazon Rainforest,12,14
Apollo,4,5
Chloroplasts,4,5
Computational Complexity,3,3
Ctenophora,9,12
European Union Law,13,13
Genghis Khan,3,5
Geology,4,5
Immune System,13,15
Kenya,5,5
Martin Luther,2,5
Nikola Tesla,6,7
Normans,4,5
Oxygen,8,15
Rhine,5,8
Southern California,3,5
Steam Engine,4,5
Super Bowl 50,25,29
Warsaw,3,5
";
        let table = score_run(csv).unwrap();
        assert_eq!(table.rows.len(), 20);
        assert_eq!(table.total_correct, 135);
        assert_eq!(table.total_count, 171);
        assert_eq!(table.total_percent, 78.95);
        assert_eq!(table.average_percent, 77.76);
        let expected = [
            100.00, 85.71, 80.00, 80.00, 100.00, 75.00, 100.00, 60.00, 80.00, 86.67, 100.00, 40.00,
            85.71, 80.00, 53.33, 62.50, 60.00, 80.00, 86.21, 60.00,
        ];
        for (row, want) in table.rows.iter().zip(expected) {
            assert_eq!(row.percent, want, "{}", row.article);
        }
    }

    #[test]
    fn score_single_perfect_row() {
        let table = score_run("x,3,3\n").unwrap();
        assert_eq!(table.total_percent, 100.00);
        assert_eq!(table.average_percent, 100.00);
    }

    #[test]
    fn micro_and_macro_can_differ_and_here_agree() {
        let table = score_run("a,1,2\nb,0,2\n").unwrap();
        assert_eq!(table.total_percent, 25.00);
        assert_eq!(table.average_percent, 25.00);
    }

    #[test]
    fn score_rejects_correct_above_count() {
        assert!(score_run("a,4,3\n").is_err());
    }

    #[test]
    fn report_csv_escapes_commas() {
        let rec = QARecord {
            qid: "q1".into(),
            predicted: "part_of(engine, train)".into(),
            gold: vec!["x".into()],
            correct: false,
            reason: String::new(),
            justification: None,
        };
        let csv = report_csv(&[rec]);
        assert!(csv.contains("\"part_of(engine, train)\""));
    }

    #[test]
    fn gold_file_parses() {
        let gold = parse_gold("q1\tengine|the engine\nq2\tyes\n").unwrap();
        assert_eq!(
            gold["q1"],
            vec!["engine".to_string(), "the engine".to_string()]
        );
        assert_eq!(gold["q2"], vec!["yes".to_string()]);
    }

    #[test]
    fn questions_file_supports_paths_and_inline_rows() {
        let dir = std::env::temp_dir().join(format!("caspr_qa_questions_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(
            dir.join("q1.tsv"),
            "q1\tbroke\tbreak down\tv\twh\twhat\twhat\tpron\n",
        )
        .unwrap();
        let text = "q1\tq1.tsv\nq2\tq2\tbird\tbird\tn\tnsubj\tTweety\ttweety\tn\n";
        let questions = parse_questions(text, &dir).unwrap();
        assert_eq!(questions.len(), 2);
        assert_eq!(questions[0].0, "q1");
        assert_eq!(questions[0].1[0].head.lemma, "break down");
        assert_eq!(questions[1].0, "q2");
        assert_eq!(questions[1].1[0].dependent.lemma, "tweety");
    }
}
