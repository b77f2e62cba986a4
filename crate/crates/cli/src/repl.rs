//! Line-oriented interactive query loop. Prompts go to stderr so piped
//! sessions produce the same stdout as batch `solve`.

use std::io::{BufRead, Write};
use std::path::Path;

use anyhow::Result;

use caspr_core::parser::parse_query;
use caspr_core::solver::SolverConfig;

use crate::render::render_outcome;

const HELP: &str = "\
queries:   ?- flies(tweety).   (the `?-` and final `.` may be omitted)
commands:  :load FILE    load a program, replacing the current one
           :all on|off   enumerate every answer instead of the first
           :justify on|off
           :trace on|off
           :help
           :quit";

pub fn run(
    program: Option<&Path>,
    kb_triples: Option<&Path>,
    defaults: Option<&Path>,
    hops: usize,
) -> Result<()> {
    let mut loaded = crate::load_for_repl(program, kb_triples, defaults, hops)?;
    let mut justify = false;
    let mut trace = false;
    let mut all = false;

    let stdin = std::io::stdin();
    let mut stderr = std::io::stderr();
    eprintln!("caspr repl; :help for commands, :quit to leave");
    loop {
        write!(stderr, "?- ").ok();
        stderr.flush().ok();
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(cmd) = line.strip_prefix(':') {
            let mut parts = cmd.split_whitespace();
            match parts.next() {
                Some("quit") | Some("q") => break,
                Some("help") => eprintln!("{HELP}"),
                Some("all") => {
                    all = parts.next() != Some("off");
                    eprintln!("all {}", if all { "on" } else { "off" });
                }
                Some("justify") => {
                    justify = parts.next() != Some("off");
                    eprintln!("justify {}", if justify { "on" } else { "off" });
                }
                Some("trace") => {
                    trace = parts.next() != Some("off");
                    eprintln!("trace {}", if trace { "on" } else { "off" });
                }
                Some("load") => match parts.next() {
                    Some(path) => {
                        match crate::load_for_repl(Some(Path::new(path)), None, None, hops) {
                            Ok(l) => {
                                loaded = l;
                                eprintln!("loaded {} rules", loaded.program.len());
                            }
                            Err(e) => eprintln!("error: {e}"),
                        }
                    }
                    None => eprintln!("usage: :load FILE"),
                },
                other => eprintln!("unknown command {:?}; :help for help", other.unwrap_or("")),
            }
            continue;
        }

        let mut text = line.to_string();
        if !text.starts_with("?-") {
            text = format!("?- {text}");
        }
        if !text.ends_with('.') {
            text.push('.');
        }
        match parse_query(&text) {
            Ok(q) => {
                let cfg = SolverConfig {
                    trace,
                    max_answers: if all { None } else { Some(1) },
                    ..SolverConfig::default()
                };
                let (outcome, trace_lines) =
                    caspr_core::solver::solve_traced(&loaded.program, &q, &cfg);
                for t in &trace_lines {
                    println!("{t}");
                }
                print!("{}", render_outcome(&outcome, justify));
            }
            Err(diags) => {
                for d in diags {
                    eprintln!("query: {d}");
                }
            }
        }
    }
    Ok(())
}
