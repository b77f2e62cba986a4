//! Randomized properties of the symbolic core and the parser: most general
//! unifiers, print/parse round-trips, and diagnostic positions under
//! single-character corruption.

use caspr_core::ast::{unify_terms, Atom, BodyLiteral, Literal, Program, Rule, Substitution, Term};
use caspr_core::corpus::Rng;
use caspr_core::parser::{parse_program, scan_tokens};

fn random_term(rng: &mut Rng, depth: usize) -> Term {
    let consts = ["a", "b", "c"];
    let vars = ["X", "Y", "Z"];
    match rng.below(if depth == 0 { 2 } else { 4 }) {
        0 => Term::constant(consts[rng.below(3)]),
        1 => Term::var(vars[rng.below(3)]),
        2 => Term::compound("f", vec![random_term(rng, depth - 1)]),
        _ => Term::compound(
            "g",
            vec![random_term(rng, depth - 1), random_term(rng, depth - 1)],
        ),
    }
}

/// Ground instantiation universe for the factoring check: constants and
/// one level of `f`.
fn ground_universe() -> Vec<Term> {
    let mut u: Vec<Term> = ["a", "b", "c"].iter().map(|c| Term::constant(*c)).collect();
    let consts = u.clone();
    for c in consts {
        u.push(Term::compound("f", vec![c]));
    }
    u
}

fn term_vars(t: &Term, out: &mut Vec<String>) {
    t.variables(out);
}

#[test]
fn unifiers_are_most_general() {
    let mut rng = Rng::new(0xbead);
    let universe = ground_universe();
    let mut checked_some_unifier = 0;
    for _ in 0..400 {
        let t1 = random_term(&mut rng, 2);
        let t2 = random_term(&mut rng, 2);
        let mgu = unify_terms(&t1, &t2);

        let mut vars = Vec::new();
        term_vars(&t1, &mut vars);
        term_vars(&t2, &mut vars);

        // Enumerate every ground substitution over the shared universe.
        let mut idx = vec![0usize; vars.len()];
        loop {
            let mut sigma = Substitution::new();
            for (v, &i) in vars.iter().zip(idx.iter()) {
                sigma = sigma.compose(&Substitution::singleton(v.clone(), universe[i].clone()));
            }
            if sigma.apply_term(&t1) == sigma.apply_term(&t2) {
                // sigma is a unifier: the mgu must exist and sigma must
                // factor through it.
                let mgu = mgu.as_ref().unwrap_or_else(|| {
                    panic!("unify({t1}, {t2}) returned none but {sigma} unifies them")
                });
                for v in &vars {
                    let via_mgu = sigma.apply_term(&mgu.apply_term(&Term::var(v.clone())));
                    let direct = sigma.apply_term(&Term::var(v.clone()));
                    assert_eq!(via_mgu, direct, "sigma does not factor through the mgu");
                }
                checked_some_unifier += 1;
            }
            // Odometer.
            let mut slot = vars.len();
            loop {
                if slot == 0 {
                    break;
                }
                slot -= 1;
                idx[slot] += 1;
                if idx[slot] < universe.len() {
                    break;
                }
                idx[slot] = 0;
            }
            if vars.is_empty() || idx.iter().all(|&i| i == 0) {
                break;
            }
        }

        // Soundness of the mgu itself.
        if let Some(m) = &mgu {
            assert_eq!(m.apply_term(&t1), m.apply_term(&t2));
        }
    }
    assert!(
        checked_some_unifier > 50,
        "the corpus barely exercised unifiable pairs"
    );
}

fn random_program(rng: &mut Rng) -> Program {
    let preds = ["p", "q", "r", "ab"];
    let consts = ["a", "b", "tweety"];
    let vars = ["X", "Y"];
    let mut rules = Vec::new();
    for _ in 0..(1 + rng.below(6)) {
        let arg = |rng: &mut Rng| match rng.below(4) {
            0 => Term::var(vars[rng.below(2)]),
            1 => Term::compound("d1", vec![Term::var(vars[rng.below(2)])]),
            2 => Term::Int(rng.below(20) as i64),
            _ => Term::constant(consts[rng.below(3)]),
        };
        let literal = |rng: &mut Rng| {
            let nargs = rng.below(3);
            let args = (0..nargs).map(|_| arg(rng)).collect();
            let atom = Atom::new(preds[rng.below(4)], args);
            if rng.chance(1, 4) {
                Literal::negative(atom)
            } else {
                Literal::positive(atom)
            }
        };
        let head = literal(rng);
        let body: Vec<BodyLiteral> = (0..rng.below(3))
            .map(|_| {
                let l = literal(rng);
                if rng.chance(1, 2) {
                    BodyLiteral::naf(l)
                } else {
                    BodyLiteral::plain(l)
                }
            })
            .collect();
        rules.push(Rule::new(head, body));
    }
    Program::new(rules)
}

#[test]
fn print_parse_round_trip_on_random_programs() {
    let mut rng = Rng::new(0xc0ffee);
    for _ in 0..300 {
        let p = random_program(&mut rng);
        let printed = p.to_string();
        let parsed = parse_program(&printed, "round")
            .unwrap_or_else(|d| panic!("printed program failed to parse: {printed}\n{d:?}"));
        assert_eq!(
            parsed.rules(),
            p.rules(),
            "round trip changed the program:\n{printed}"
        );
        let reprinted = parsed.to_string();
        assert_eq!(reprinted, printed, "printing is not canonical");
    }
}

#[test]
fn corrupted_token_is_diagnosed_inside_that_token() {
    let mut rng = Rng::new(0xdead);
    let mut corruptions = 0;
    for _ in 0..200 {
        let p = random_program(&mut rng);
        let text = p.to_string();
        if text.is_empty() {
            continue;
        }
        let tokens = scan_tokens(&text).expect("printed program lexes");
        let tok = &tokens[rng.below(tokens.len())];
        let offset = rng.below(tok.text.len());

        // Locate the byte to corrupt (all printed output is ASCII).
        let mut corrupted = String::new();
        for (li, line) in text.lines().enumerate() {
            if li + 1 == tok.line {
                let col = tok.col - 1 + offset;
                corrupted.push_str(&line[..col]);
                corrupted.push('?');
                corrupted.push_str(&line[col + 1..]);
            } else {
                corrupted.push_str(line);
            }
            corrupted.push('\n');
        }

        let diags = parse_program(&corrupted, "bad").expect_err("corruption must be rejected");
        let d = &diags[0];
        assert_eq!(
            d.line, tok.line,
            "diagnostic on the wrong line for:\n{corrupted}"
        );
        assert!(
            d.col >= tok.col && d.col < tok.col + tok.text.len().max(1),
            "diagnostic at col {} outside token `{}` at col {} in:\n{corrupted}",
            d.col,
            tok.text,
            tok.col
        );
        corruptions += 1;
    }
    assert!(corruptions >= 100);
}

#[test]
fn parser_never_panics_on_garbage() {
    let alphabet: Vec<char> =
        "abcXY_01(),.:-?% \n\tnot~!@#".chars().collect();
    let mut rng = Rng::new(0xfab);
    for _ in 0..2000 {
        let len = rng.below(60);
        let text: String = (0..len).map(|_| alphabet[rng.below(alphabet.len())]).collect();
        // Must return, never unwind.
        let _ = parse_program(&text, "fuzz");
        let _ = caspr_core::parser::parse_query(&text);
    }
}
