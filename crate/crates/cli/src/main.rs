//! `caspr` — solve ASP queries goal-directedly, enumerate stable models,
//! ingest dependency-parsed text into programs, run batch QA with
//! justifications, and score result tables.

mod render;
mod repl;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use caspr_core::ast::Program;
use caspr_core::defaults::{parse_defaults, DefaultsSet};
use caspr_core::ingest;
use caspr_core::kb;
use caspr_core::oracle::{self, OracleConfig};
use caspr_core::parser::{parse_program, parse_query, Query};
use caspr_core::qa;
use caspr_core::solver::SolverConfig;

#[derive(Parser)]
#[command(
    name = "caspr",
    version,
    about = "Goal-directed answer set programming with a commonsense QA pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Goal,
    Oracle,
}

#[derive(Subcommand)]
enum Command {
    /// Answer a query against a program.
    Solve {
        #[arg(long)]
        program: PathBuf,
        /// Query text, e.g. "?- flies(tweety)."
        #[arg(long)]
        query: String,
        #[arg(long, value_enum, default_value = "goal")]
        engine: Engine,
        /// Enumerate every answer instead of the first one.
        #[arg(long)]
        all: bool,
        /// Print a justification tree for each answer.
        #[arg(long)]
        justify: bool,
        /// Print one call/exit/fail/assume line per solver event.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = 10_000)]
        max_depth: usize,
        /// Disable oracle delegation on negation loops.
        #[arg(long)]
        no_fallback: bool,
    },
    /// Enumerate all stable models of a program.
    Models {
        #[arg(long)]
        program: PathBuf,
        /// Print at most this many models.
        #[arg(long)]
        max: Option<usize>,
        /// Depth bound for grounding (defaults to the deepest term).
        #[arg(long)]
        depth: Option<usize>,
        /// Instantiation ceiling for grounding.
        #[arg(long, default_value_t = 1_000_000)]
        ceiling: usize,
    },
    /// Convert dependency triples into an ASP program.
    Ingest {
        /// Dependency triple TSV.
        #[arg(long)]
        triples: PathBuf,
        /// Pattern table (defaults to the built-in table).
        #[arg(long)]
        patterns: Option<PathBuf>,
        /// Output .lp file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer a batch of questions against a passage.
    Qa {
        /// Passage facts (.lp), e.g. produced by `ingest`.
        #[arg(long)]
        facts: PathBuf,
        /// Concept triple snapshot (TSV).
        #[arg(long)]
        kb_triples: Option<PathBuf>,
        /// Word-sense index (TSV).
        #[arg(long)]
        senses: Option<PathBuf>,
        /// Defaults/preferences declarations (.defaults).
        #[arg(long)]
        defaults: Option<PathBuf>,
        /// Questions file: `qid<TAB>triples-path` or inline triple rows.
        #[arg(long)]
        questions: PathBuf,
        /// Gold answers: `qid<TAB>answer1|answer2|...`.
        #[arg(long)]
        gold: PathBuf,
        /// Where to write the report CSV (stdout when omitted).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Emit the records as JSON on stdout instead of a summary.
        #[arg(long)]
        json: bool,
        /// Relevance radius for imported knowledge.
        #[arg(long, default_value_t = kb::DEFAULT_HOPS)]
        hops: usize,
    },
    /// Recompute a per-article score table from a results CSV.
    Score {
        #[arg(long)]
        results: PathBuf,
        /// Emit the table as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Interactive query loop.
    Repl {
        #[arg(long)]
        program: Option<PathBuf>,
        #[arg(long)]
        kb_triples: Option<PathBuf>,
        #[arg(long)]
        defaults: Option<PathBuf>,
        #[arg(long, default_value_t = kb::DEFAULT_HOPS)]
        hops: usize,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_program(path: &Path) -> Result<Program> {
    let text = read(path)?;
    parse_program(&text, &path.display().to_string()).map_err(|diags| {
        let mut msg = String::new();
        for d in diags {
            msg.push_str(&format!("{}: {d}\n", path.display()));
        }
        anyhow!(msg.trim_end().to_string())
    })
}

fn load_query(text: &str) -> Result<Query> {
    parse_query(text).map_err(|diags| {
        let mut msg = String::new();
        for d in diags {
            msg.push_str(&format!("query: {d}\n"));
        }
        anyhow!(msg.trim_end().to_string())
    })
}

fn load_kb_triples(path: &Path) -> Result<Vec<kb::ConceptTriple>> {
    let text = read(path)?;
    kb::load_triples(&text).map_err(|diags| {
        let joined: Vec<String> = diags
            .iter()
            .map(|d| format!("{}: {d}", path.display()))
            .collect();
        anyhow!(joined.join("\n"))
    })
}

fn load_defaults(path: &Path) -> Result<DefaultsSet> {
    let text = read(path)?;
    parse_defaults(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_patterns(path: Option<&Path>) -> Result<Vec<ingest::PatternRule>> {
    match path {
        None => Ok(ingest::builtin_patterns().to_vec()),
        Some(p) => {
            let text = read(p)?;
            ingest::parse_patterns(&text).map_err(|e| anyhow!("{}: {e}", p.display()))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    program: &Path,
    query: &str,
    engine: Engine,
    all: bool,
    justify: bool,
    trace: bool,
    max_depth: usize,
    no_fallback: bool,
) -> Result<()> {
    let p = load_program(program)?;
    let q = load_query(query)?;
    match engine {
        Engine::Goal => {
            let cfg = SolverConfig {
                max_depth,
                max_answers: if all { None } else { Some(1) },
                fallback: !no_fallback,
                trace,
                ..SolverConfig::default()
            };
            let (outcome, trace_lines) = caspr_core::solver::solve_traced(&p, &q, &cfg);
            for line in &trace_lines {
                println!("{line}");
            }
            print!("{}", render::render_outcome(&outcome, justify));
            if outcome.is_rejection() {
                return Err(anyhow!("query rejected"));
            }
        }
        Engine::Oracle => {
            let models = oracle::stable_models(&p, &OracleConfig::default())
                .map_err(|e| anyhow!("oracle: {e}"))?;
            print!("{}", render::render_oracle_answers(&models, &q, all)?);
        }
    }
    Ok(())
}

fn cmd_models(
    program: &Path,
    max: Option<usize>,
    depth: Option<usize>,
    ceiling: usize,
) -> Result<()> {
    let p = load_program(program)?;
    let cfg = OracleConfig {
        depth_bound: depth,
        ceiling,
    };
    let models = oracle::stable_models(&p, &cfg).map_err(|e| anyhow!("oracle: {e}"))?;
    if models.is_empty() {
        println!("no stable models");
        return Ok(());
    }
    for m in models.iter().take(max.unwrap_or(usize::MAX)) {
        println!("{m}");
    }
    Ok(())
}

fn cmd_ingest(triples: &Path, patterns: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let text = read(triples)?;
    let deps = ingest::parse_dep_triples(&text).map_err(|diags| {
        let joined: Vec<String> = diags
            .iter()
            .map(|d| format!("{}: {d}", triples.display()))
            .collect();
        anyhow!(joined.join("\n"))
    })?;
    let table = load_patterns(patterns)?;
    let report = ingest::extract_relations(&deps, &table);
    let program = ingest::relations_to_program(&report.relations);
    let rendered = ingest::program_with_comments(&program);
    match out {
        Some(path) => {
            std::fs::write(path, &rendered)
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => print!("{rendered}"),
    }
    eprintln!(
        "consumed {}/{} triples ({:.1}% coverage), {} relations",
        report.consumed_triples,
        report.total_triples,
        100.0 * report.coverage(),
        report.relations.len()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_qa(
    facts: &Path,
    kb_triples: Option<&Path>,
    senses: Option<&Path>,
    defaults: Option<&Path>,
    questions: &Path,
    gold: &Path,
    report: Option<&Path>,
    json: bool,
    hops: usize,
) -> Result<()> {
    let passage = load_program(facts)?;
    let triples = match kb_triples {
        Some(p) => load_kb_triples(p)?,
        None => Vec::new(),
    };
    let senses = match senses {
        Some(p) => {
            let text = read(p)?;
            kb::load_senses(&text).map_err(|diags| {
                let joined: Vec<String> = diags
                    .iter()
                    .map(|d| format!("{}: {d}", p.display()))
                    .collect();
                anyhow!(joined.join("\n"))
            })?
        }
        None => Vec::new(),
    };
    let specs = match defaults {
        Some(p) => load_defaults(p)?,
        None => DefaultsSet::default(),
    };

    let qtext = read(questions)?;
    let base = questions.parent().unwrap_or(Path::new("."));
    let question_triples = qa::parse_questions(&qtext, base).map_err(|e| anyhow!(e))?;
    let gold_map = qa::parse_gold(&read(gold)?).map_err(|e| anyhow!(e))?;

    // Translate questions; failures become no-answer records.
    let mut queries: Vec<(String, Query)> = Vec::new();
    let mut failed: Vec<qa::QARecord> = Vec::new();
    for (qid, triples) in &question_triples {
        match ingest::translate_question(triples, ingest::builtin_patterns()) {
            Ok(q) => queries.push((qid.clone(), q)),
            Err(e) => failed.push(qa::QARecord {
                qid: qid.clone(),
                predicted: qa::NO_ANSWER.to_string(),
                gold: gold_map.get(qid).cloned().unwrap_or_default(),
                correct: gold_map
                    .get(qid)
                    .map(|g| qa::match_answer(qa::NO_ANSWER, g))
                    .unwrap_or(false),
                reason: e.to_string(),
                justification: None,
            }),
        }
    }

    let ctx = qa::build_context(
        &passage,
        &queries.iter().map(|(_, q)| q.clone()).collect::<Vec<_>>(),
    );
    let assembled = qa::assemble(&passage, &triples, &senses, &specs, &ctx, hops)?;
    for w in &assembled.warnings {
        eprintln!("warning: {w}");
    }
    for (word, choice) in &assembled.wsd_choices {
        eprintln!(
            "wsd: {word} -> {} (score {})",
            choice.sense_id, choice.score
        );
    }

    let cfg = SolverConfig::default();
    let mut records = qa::answer_batch(&assembled.program, &queries, &gold_map, &cfg);
    records.extend(failed);
    records.sort_by(|a, b| a.qid.cmp(&b.qid));

    let csv = qa::report_csv(&records);
    match report {
        Some(path) => std::fs::write(path, &csv)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{csv}"),
    }

    let correct = records.iter().filter(|r| r.correct).count();
    if json {
        let value = serde_json::json!({
            "records": records,
            "correct": correct,
            "count": records.len(),
        });
        println!("{}", serde_json::to_string_pretty(&value)?);
    } else {
        for r in &records {
            println!(
                "{}: {} ({})",
                r.qid,
                r.predicted,
                if r.correct { "correct" } else { "wrong" }
            );
        }
        println!("correct {}/{}", correct, records.len());
    }
    Ok(())
}

fn cmd_score(results: &Path, json: bool) -> Result<()> {
    let table =
        qa::score_run(&read(results)?).map_err(|e| anyhow!("{}: {e}", results.display()))?;
    if json {
        println!("{}", serde_json::to_string_pretty(&table)?);
    } else {
        print!("{table}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve {
            program,
            query,
            engine,
            all,
            justify,
            trace,
            max_depth,
            no_fallback,
        } => cmd_solve(
            program,
            query,
            *engine,
            *all,
            *justify,
            *trace,
            *max_depth,
            *no_fallback,
        ),
        Command::Models {
            program,
            max,
            depth,
            ceiling,
        } => cmd_models(program, *max, *depth, *ceiling),
        Command::Ingest {
            triples,
            patterns,
            out,
        } => cmd_ingest(triples, patterns.as_deref(), out.as_deref()),
        Command::Qa {
            facts,
            kb_triples,
            senses,
            defaults,
            questions,
            gold,
            report,
            json,
            hops,
        } => cmd_qa(
            facts,
            kb_triples.as_deref(),
            senses.as_deref(),
            defaults.as_deref(),
            questions,
            gold,
            report.as_deref(),
            *json,
            *hops,
        ),
        Command::Score { results, json } => cmd_score(results, *json),
        Command::Repl {
            program,
            kb_triples,
            defaults,
            hops,
        } => repl::run(
            program.as_deref(),
            kb_triples.as_deref(),
            defaults.as_deref(),
            *hops,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Shared loaders for the REPL.
pub(crate) struct Loaded {
    pub program: Program,
}

pub(crate) fn load_for_repl(
    program: Option<&Path>,
    kb_triples: Option<&Path>,
    defaults: Option<&Path>,
    hops: usize,
) -> Result<Loaded> {
    let base = match program {
        Some(p) => load_program(p)?,
        None => Program::new(vec![]),
    };
    let triples = match kb_triples {
        Some(p) => load_kb_triples(p)?,
        None => Vec::new(),
    };
    let specs = match defaults {
        Some(p) => load_defaults(p)?,
        None => DefaultsSet::default(),
    };
    let ctx = qa::build_context(&base, &[]);
    let assembled = qa::assemble(&base, &triples, &[], &specs, &ctx, hops)?;
    for w in &assembled.warnings {
        eprintln!("warning: {w}");
    }
    Ok(Loaded {
        program: assembled.program,
    })
}
