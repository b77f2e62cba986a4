//! End-to-end checks of the `caspr` binary: exit codes, output formats,
//! engine agreement, and REPL/batch parity.

use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_caspr"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn solve_tweety_succeeds_with_justification() {
    let program = fixtures().join("programs/tweety.lp");
    let out = run(&[
        "solve",
        "--program",
        program.to_str().unwrap(),
        "--query",
        "?- flies(tweety).",
        "--justify",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.starts_with("yes"));
    assert!(text.contains("bird(tweety)  [fact]"));
    assert!(text.contains("not ab(d1(tweety))  [assumed]"));
}

#[test]
fn solve_flips_after_penguin_fact() {
    let program = fixtures().join("programs/tweety_penguin.lp");
    let out = run(&[
        "solve",
        "--program",
        program.to_str().unwrap(),
        "--query",
        "?- flies(tweety).",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "no\n");

    let out2 = run(&[
        "solve",
        "--program",
        program.to_str().unwrap(),
        "--query",
        "?- -flies(tweety).",
    ]);
    assert!(out2.status.success());
    assert!(stdout_of(&out2).starts_with("yes"));
}

#[test]
fn trace_output_is_the_documented_golden() {
    let program = fixtures().join("programs/tweety.lp");
    let out = run(&[
        "solve",
        "--program",
        program.to_str().unwrap(),
        "--query",
        "?- flies(tweety).",
        "--trace",
    ]);
    assert!(out.status.success());
    let expected = "\
1\tcall\tflies(tweety)
2\tcall\tbird(tweety)
2\texit\tbird(tweety)
3\tcall\tab(d1(tweety))
3\tfail\tab(d1(tweety))
2\tassume\tnot ab(d1(tweety))
3\tcall\t-flies(tweety)
3\tfail\t-flies(tweety)
2\tassume\tnot -flies(tweety)
1\texit\tflies(tweety)
yes (1 answer)
answer 1: true
";
    assert_eq!(stdout_of(&out), expected);
}

#[test]
fn models_prints_both_even_loop_models() {
    let program = fixtures().join("programs/pq.lp");
    let out = run(&["models", "--program", program.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "{p}\n{q}\n");
}

#[test]
fn oracle_engine_agrees_with_goal_engine() {
    let program = fixtures().join("programs/tweety_penguin.lp");
    for (query, want) in [
        ("?- flies(tweety).", "no\n"),
        ("?- -flies(tweety).", "yes\n"),
    ] {
        let out = run(&[
            "solve",
            "--program",
            program.to_str().unwrap(),
            "--query",
            query,
            "--engine",
            "oracle",
        ]);
        assert!(out.status.success());
        assert_eq!(stdout_of(&out), want, "{query}");
    }
}

#[test]
fn unknown_flag_exits_2() {
    let out = run(&["solve", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_subcommand_exits_2() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_diagnostics_exit_1_with_position() {
    let dir = std::env::temp_dir().join(format!("caspr_cli_diag_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.lp");
    std::fs::write(&bad, "p :- not not q.\n").unwrap();
    let out = run(&[
        "solve",
        "--program",
        bad.to_str().unwrap(),
        "--query",
        "?- p.",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1:10"), "missing position in: {err}");
}

#[test]
fn score_human_and_json_carry_identical_data() {
    let results = fixtures().join("table1.csv");
    let human = run(&["score", "--results", results.to_str().unwrap()]);
    assert!(human.status.success());
    let text = stdout_of(&human);
    let json = run(&["score", "--results", results.to_str().unwrap(), "--json"]);
    assert!(json.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout_of(&json)).unwrap();

    assert_eq!(value["total_correct"], 135);
    assert_eq!(value["total_count"], 171);
    assert_eq!(value["total_percent"], 78.95);
    assert_eq!(value["average_percent"], 77.76);
    assert_eq!(value["rows"].as_array().unwrap().len(), 20);

    // Every row of the JSON appears in the human table with the same
    // numbers.
    for row in value["rows"].as_array().unwrap() {
        let article = row["article"].as_str().unwrap();
        let line = text
            .lines()
            .find(|l| l.starts_with(article))
            .unwrap_or_else(|| panic!("article {article} missing from table"));
        let percent = format!("{:.2}", row["percent"].as_f64().unwrap());
        assert!(line.ends_with(&percent), "{line} vs {percent}");
        assert!(line.contains(&row["correct"].to_string()));
        assert!(line.contains(&row["count"].to_string()));
    }
    assert!(text.contains("total (micro)"));
    assert!(text.contains("78.95"));
    assert!(text.contains("77.76"));
}

#[test]
fn ingest_writes_annotated_program() {
    let triples = fixtures().join("passages/train.tsv");
    let out = run(&["ingest", "--triples", triples.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("% sentence s1 via pattern of_part"));
    assert!(text.contains("part_of(engine, train)."));
    assert!(text.contains("event(break_down, engine)."));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("coverage"));
}

#[test]
fn qa_json_and_report_carry_identical_data() {
    let dir = std::env::temp_dir().join(format!("caspr_cli_qa_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let facts = dir.join("train.lp");
    let ingest = run(&[
        "ingest",
        "--triples",
        fixtures().join("passages/train.tsv").to_str().unwrap(),
        "--out",
        facts.to_str().unwrap(),
    ]);
    assert!(ingest.status.success());

    let report = dir.join("report.csv");
    let out = run(&[
        "qa",
        "--facts",
        facts.to_str().unwrap(),
        "--questions",
        fixtures().join("qa/train.questions").to_str().unwrap(),
        "--gold",
        fixtures().join("qa/train.gold").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
        "--json",
    ]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(value["correct"], 2);
    assert_eq!(value["count"], 2);

    let csv = std::fs::read_to_string(&report).unwrap();
    for rec in value["records"].as_array().unwrap() {
        let qid = rec["qid"].as_str().unwrap();
        let line = csv
            .lines()
            .find(|l| l.starts_with(qid))
            .unwrap_or_else(|| panic!("{qid} missing from report"));
        assert!(line.contains(rec["predicted"].as_str().unwrap()));
        assert!(line.contains(&rec["correct"].as_bool().unwrap().to_string()));
    }
}

#[test]
fn repl_matches_batch_solve() {
    let program = fixtures().join("programs/tweety_penguin.lp");
    let queries = ["?- flies(tweety).", "?- -flies(tweety).", "?- flies(X)."];

    let mut child = bin()
        .args(["repl", "--program", program.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    {
        use std::io::Write;
        let stdin = child.stdin.as_mut().unwrap();
        for q in &queries {
            writeln!(stdin, "{q}").unwrap();
        }
        writeln!(stdin, ":quit").unwrap();
    }
    let repl_out = child.wait_with_output().unwrap();
    assert!(repl_out.status.success());
    let repl_text = String::from_utf8_lossy(&repl_out.stdout).to_string();

    let mut batch_text = String::new();
    for q in &queries {
        let out = run(&[
            "solve",
            "--program",
            program.to_str().unwrap(),
            "--query",
            q,
        ]);
        assert!(out.status.success());
        batch_text.push_str(&stdout_of(&out));
    }
    assert_eq!(repl_text, batch_text);
}

#[test]
fn constraint_program_is_rejected_by_goal_engine_with_exit_1() {
    let dir = std::env::temp_dir().join(format!("caspr_cli_constraint_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("c.lp");
    std::fs::write(&f, "p :- not q.\n:- p.\n").unwrap();
    let out = run(&[
        "solve",
        "--program",
        f.to_str().unwrap(),
        "--query",
        "?- p.",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_of(&out).contains("rejected"));
    // The oracle engine accepts the same program.
    let out2 = run(&[
        "solve",
        "--program",
        f.to_str().unwrap(),
        "--query",
        "?- p.",
        "--engine",
        "oracle",
    ]);
    assert!(out2.status.success());
    assert_eq!(stdout_of(&out2), "no\n");
}
