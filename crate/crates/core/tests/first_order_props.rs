//! Randomized agreement between the goal-directed solver and the oracle on
//! safe first-order programs: unary/binary predicates over a small constant
//! pool, variables bound by plain body literals, naf over bound variables.
//! Ground queries must agree with brave entailment whenever the solver does
//! not reject, on every program with at least one stable model.

use caspr_core::ast::{Atom, BodyLiteral, Literal, Program, Rule, Term};
use caspr_core::corpus::Rng;
use caspr_core::oracle::{self, OracleConfig};
use caspr_core::parser::Query;
use caspr_core::solver::{self, SolveOutcome, SolverConfig};

const CONSTS: [&str; 3] = ["a", "b", "c"];
const UNARY: [&str; 2] = ["p", "q"];
const BINARY: [&str; 1] = ["r"];

fn random_rule(rng: &mut Rng) -> Rule {
    let vars = ["X", "Y"];
    // Plain body literals bind every variable the rule uses; naf literals
    // and the head draw only from those.
    let nvars = rng.below(3); // 0, 1 or 2 variables in play
    let bound: Vec<Term> = vars.iter().take(nvars).map(|v| Term::var(*v)).collect();

    let mut any_term = |rng: &mut Rng, bound: &[Term]| -> Term {
        if !bound.is_empty() && rng.chance(2, 3) {
            bound[rng.below(bound.len())].clone()
        } else {
            Term::constant(CONSTS[rng.below(CONSTS.len())])
        }
    };
    let mut atom_over = |rng: &mut Rng, bound: &[Term]| -> Atom {
        if rng.chance(1, 3) {
            let t1 = any_term(rng, bound);
            let t2 = any_term(rng, bound);
            Atom::new(BINARY[0], vec![t1, t2])
        } else {
            let t = any_term(rng, bound);
            Atom::new(UNARY[rng.below(UNARY.len())], vec![t])
        }
    };

    let mut body: Vec<BodyLiteral> = Vec::new();
    // Guards: one plain literal per variable, with the variable in it.
    for v in &bound {
        let guard = if rng.chance(1, 4) {
            Atom::new(BINARY[0], vec![v.clone(), any_term(rng, &[])])
        } else {
            Atom::new(UNARY[rng.below(UNARY.len())], vec![v.clone()])
        };
        body.push(BodyLiteral::plain(Literal::positive(guard)));
    }
    for _ in 0..rng.below(3) {
        let lit = Literal::positive(atom_over(rng, &bound));
        let b = if rng.chance(1, 2) { BodyLiteral::naf(lit) } else { BodyLiteral::plain(lit) };
        if !body.contains(&b) {
            body.push(b);
        }
    }
    let head = Literal::positive(atom_over(rng, &bound));
    Rule::new(head, body)
}

fn random_program(rng: &mut Rng) -> Program {
    let mut rules = Vec::new();
    // Some ground facts so guards can bind.
    for _ in 0..(1 + rng.below(4)) {
        let atom = if rng.chance(1, 3) {
            Atom::new(
                BINARY[0],
                vec![
                    Term::constant(CONSTS[rng.below(3)]),
                    Term::constant(CONSTS[rng.below(3)]),
                ],
            )
        } else {
            Atom::new(UNARY[rng.below(2)], vec![Term::constant(CONSTS[rng.below(3)])])
        };
        let rule = Rule::fact(Literal::positive(atom));
        if !rules.contains(&rule) {
            rules.push(rule);
        }
    }
    for _ in 0..(1 + rng.below(6)) {
        let rule = random_rule(rng);
        if !rules.contains(&rule) {
            rules.push(rule);
        }
    }
    Program::new(rules)
}

fn ground_queries() -> Vec<Literal> {
    let mut out = Vec::new();
    for p in UNARY {
        for c in CONSTS {
            out.push(Literal::positive(Atom::new(p, vec![Term::constant(c)])));
        }
    }
    for c1 in CONSTS {
        for c2 in CONSTS {
            out.push(Literal::positive(Atom::new(
                BINARY[0],
                vec![Term::constant(c1), Term::constant(c2)],
            )));
        }
    }
    out
}

#[test]
fn first_order_agreement_with_the_oracle() {
    let scfg = SolverConfig::default();
    let ocfg = OracleConfig::default();
    let mut rng = Rng::new(0xf1257);
    let mut kept = 0;
    let mut fallbacks = 0;
    let mut rejections = 0;
    while kept < 300 {
        let p = random_program(&mut rng);
        let models = match oracle::stable_models(&p, &ocfg) {
            Ok(m) => m,
            Err(_) => continue,
        };
        if models.is_empty() {
            continue;
        }
        kept += 1;
        for lit in ground_queries() {
            let want = models.iter().any(|m| m.contains(&lit));
            let q = Query::new(vec![BodyLiteral::plain(lit.clone())]);
            match solver::solve(&p, &q, &scfg) {
                SolveOutcome::Success(_) => {
                    assert!(want, "solver proves {lit}, oracle refutes, in:\n{p}")
                }
                SolveOutcome::Failure => {
                    assert!(!want, "solver fails {lit}, oracle proves, in:\n{p}")
                }
                SolveOutcome::FallbackUsed(fb) => {
                    fallbacks += 1;
                    assert_eq!(fb.verdict, want, "fallback misverdict on {lit} in:\n{p}");
                }
                SolveOutcome::Rejected(_) => rejections += 1,
            }
        }
    }
    // The corpus should exercise delegation but reject only rarely.
    assert!(fallbacks > 0, "no fallbacks were exercised");
    assert!(rejections < kept * 18 / 10, "too many rejections: {rejections}");
}

#[test]
fn first_order_open_queries_agree_with_model_answers() {
    // Open unary queries: the solver's answer set must equal the literals
    // holding in some stable model.
    let scfg = SolverConfig::default();
    let ocfg = OracleConfig::default();
    let mut rng = Rng::new(0x0be1);
    let mut kept = 0;
    while kept < 150 {
        let p = random_program(&mut rng);
        let models = match oracle::stable_models(&p, &ocfg) {
            Ok(m) if !m.is_empty() => m,
            _ => continue,
        };
        kept += 1;
        for pred in UNARY {
            let q = Query::new(vec![BodyLiteral::plain(Literal::positive(Atom::new(
                pred,
                vec![Term::var("X")],
            )))]);
            let got: Result<Vec<String>, _> = solver::answer_all(&p, &q, &scfg)
                .map(|answers| {
                    let mut v: Vec<String> = answers
                        .iter()
                        .filter_map(|s| s.get("X").map(|t| t.to_string()))
                        .collect();
                    v.sort();
                    v.dedup();
                    v
                });
            let Ok(got) = got else { continue };
            let mut want: Vec<String> = CONSTS
                .iter()
                .filter(|c| {
                    let lit = Literal::positive(Atom::new(pred, vec![Term::constant(**c)]));
                    models.iter().any(|m| m.contains(&lit))
                })
                .map(|c| c.to_string())
                .collect();
            want.sort();
            assert_eq!(got, want, "open query ?- {pred}(X) answers differ on:\n{p}");
        }
    }
}
