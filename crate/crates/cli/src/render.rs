//! Outcome rendering shared by `solve` and the REPL, so both print
//! byte-identical results for identical queries.

use anyhow::Result;

use caspr_core::oracle::{self, StableModel};
use caspr_core::parser::Query;
use caspr_core::solver::SolveOutcome;

pub fn render_outcome(outcome: &SolveOutcome, justify: bool) -> String {
    let mut out = String::new();
    match outcome {
        SolveOutcome::Success(answers) => {
            out.push_str(&format!(
                "yes ({} answer{})\n",
                answers.len(),
                if answers.len() == 1 { "" } else { "s" }
            ));
            for (i, (subst, just)) in answers.iter().enumerate() {
                if subst.is_empty() {
                    out.push_str(&format!("answer {}: true\n", i + 1));
                } else {
                    let bindings: Vec<String> =
                        subst.iter().map(|(v, t)| format!("{v} = {t}")).collect();
                    out.push_str(&format!("answer {}: {}\n", i + 1, bindings.join(", ")));
                }
                if justify {
                    out.push_str(&just.to_string());
                }
            }
        }
        SolveOutcome::Failure => out.push_str("no\n"),
        SolveOutcome::FallbackUsed(fb) => {
            out.push_str(&format!(
                "{} (oracle fallback over {} rules)\n",
                if fb.verdict { "yes" } else { "no" },
                fb.slice_rules
            ));
            for (i, subst) in fb.answers.iter().enumerate() {
                if !subst.is_empty() {
                    let bindings: Vec<String> =
                        subst.iter().map(|(v, t)| format!("{v} = {t}")).collect();
                    out.push_str(&format!("answer {}: {}\n", i + 1, bindings.join(", ")));
                }
            }
        }
        SolveOutcome::Rejected(r) => out.push_str(&format!("rejected: {r}\n")),
    }
    out
}

/// Answer a query bravely against enumerated stable models.
pub fn render_oracle_answers(models: &[StableModel], q: &Query, all: bool) -> Result<String> {
    let mut seen = std::collections::BTreeSet::new();
    let mut answers = Vec::new();
    let mut ground_holds = false;
    for m in models {
        let subs = oracle::answers_in_model(m, &q.body, &q.free_vars)
            .ok_or_else(|| anyhow::anyhow!("query has a naf literal that stays non-ground"))?;
        for s in subs {
            if q.free_vars.is_empty() {
                ground_holds = true;
            } else if seen.insert(s.to_string()) {
                answers.push(s);
            }
        }
    }
    let mut out = String::new();
    if q.free_vars.is_empty() {
        out.push_str(if ground_holds { "yes\n" } else { "no\n" });
        return Ok(out);
    }
    answers.sort_by_key(|s| s.to_string());
    if answers.is_empty() {
        out.push_str("no\n");
        return Ok(out);
    }
    let shown = if all { answers.len() } else { 1 };
    out.push_str(&format!(
        "yes ({} answer{})\n",
        answers.len(),
        if answers.len() == 1 { "" } else { "s" }
    ));
    for (i, s) in answers.iter().take(shown).enumerate() {
        let bindings: Vec<String> = s.iter().map(|(v, t)| format!("{v} = {t}")).collect();
        out.push_str(&format!("answer {}: {}\n", i + 1, bindings.join(", ")));
    }
    Ok(out)
}
