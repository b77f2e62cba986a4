//! Goal-directed solver properties on random corpora: agreement with the
//! oracle's brave verdicts on programs that have at least one stable model,
//! full completeness on stratified programs, justification replay, and
//! byte-level determinism. The acceptance suite runs the same checks at
//! full corpus size; these runs keep the crate's own tests fast.

use caspr_core::ast::{BodyLiteral, Program};
use caspr_core::corpus::{self, CorpusConfig, Rng};
use caspr_core::oracle::{self, OracleConfig};
use caspr_core::parser::Query;
use caspr_core::solver::{self, SolveOutcome, SolverConfig};

fn query_of(l: &caspr_core::ast::Literal) -> Query {
    Query::new(vec![BodyLiteral::plain(l.clone())])
}

fn consistent(p: &Program) -> bool {
    !oracle::stable_models(p, &OracleConfig::default())
        .unwrap()
        .is_empty()
}

#[test]
fn solver_agrees_with_brave_entailment_on_consistent_programs() {
    let cfg = CorpusConfig::default();
    let scfg = SolverConfig::default();
    let ocfg = OracleConfig::default();
    let mut rng = Rng::new(0xa11ce);
    let mut kept = 0;
    let mut fallbacks = 0;
    while kept < 200 {
        let p = corpus::random_ground_program(&mut rng, &cfg);
        if !consistent(&p) {
            continue;
        }
        kept += 1;
        for lit in corpus::all_literals(&cfg) {
            let want = oracle::brave_entails(&p, &lit, &ocfg).unwrap();
            match solver::solve(&p, &query_of(&lit), &scfg) {
                SolveOutcome::Success(_) => assert!(want, "false success on {lit} in:\n{p}"),
                SolveOutcome::Failure => assert!(!want, "false failure on {lit} in:\n{p}"),
                SolveOutcome::FallbackUsed(fb) => {
                    fallbacks += 1;
                    assert_eq!(fb.verdict, want, "fallback misverdict on {lit} in:\n{p}");
                }
                SolveOutcome::Rejected(_) => {}
            }
        }
    }
    assert!(
        fallbacks > 0,
        "the corpus never exercised the fallback path"
    );
}

#[test]
fn solver_is_complete_on_stratified_programs() {
    let cfg = CorpusConfig::default();
    let scfg = SolverConfig::default();
    let mut rng = Rng::new(0x5afe);
    for _ in 0..150 {
        let p = corpus::random_stratified_program(&mut rng, &cfg);
        let models = oracle::stable_models(&p, &OracleConfig::default()).unwrap();
        assert_eq!(models.len(), 1);
        for lit in corpus::all_literals(&cfg) {
            match solver::solve(&p, &query_of(&lit), &scfg) {
                SolveOutcome::Success(_) => {
                    assert!(models[0].contains(&lit), "{lit} not in the model of:\n{p}")
                }
                SolveOutcome::Failure => {
                    assert!(
                        !models[0].contains(&lit),
                        "{lit} missing from answers of:\n{p}"
                    )
                }
                other => {
                    panic!("stratified program rejected or delegated on {lit}: {other:?}\n{p}")
                }
            }
        }
    }
}

#[test]
fn justifications_replay_across_the_corpus() {
    let cfg = CorpusConfig::default();
    let scfg = SolverConfig::default();
    let mut rng = Rng::new(0x90d);
    let mut replayed = 0;
    for _ in 0..100 {
        let p = corpus::random_stratified_program(&mut rng, &cfg);
        for lit in corpus::all_literals(&cfg) {
            let q = query_of(&lit);
            if let SolveOutcome::Success(answers) = solver::solve(&p, &q, &scfg) {
                for (_, just) in &answers {
                    solver::verify_justification(&p, &q, just, &scfg)
                        .unwrap_or_else(|e| panic!("replay failed for {lit} in:\n{p}\n{e}"));
                    replayed += 1;
                }
            }
        }
    }
    assert!(replayed > 50, "only {replayed} successes replayed");
}

#[test]
fn outcomes_are_byte_identical_across_runs() {
    let cfg = CorpusConfig {
        classical: true,
        ..CorpusConfig::default()
    };
    let scfg = SolverConfig {
        trace: true,
        ..SolverConfig::default()
    };
    let mut rng = Rng::new(0xbeef);
    for _ in 0..40 {
        let p = corpus::random_ground_program(&mut rng, &cfg);
        for lit in corpus::all_literals(&cfg).iter().take(4) {
            let q = query_of(lit);
            let (o1, t1) = solver::solve_traced(&p, &q, &scfg);
            let (o2, t2) = solver::solve_traced(&p, &q, &scfg);
            assert_eq!(format!("{o1}"), format!("{o2}"));
            assert_eq!(t1, t2);
        }
    }
}
