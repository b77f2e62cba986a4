//! Query-driven (top-down) evaluation with negation as failure.
//!
//! Resolution is SLD-style over the program's rules, with most-general
//! unification and the occurs check. A naf-literal `not L` is evaluated
//! only once `L` is ground; it succeeds iff the sub-query for `L` finitely
//! fails, and the success is recorded as a naf-assumption in the
//! justification tree. Within a body, non-ground naf-literals are delayed
//! behind plain literals; if only non-ground naf-literals remain the query
//! is rejected rather than answered wrongly.
//!
//! Loops are handled by comparing each call against its proof-tree
//! ancestors (variants share a key). A ground call nested inside itself
//! with no naf boundary in between is a circular proof and fails that
//! branch, which loses nothing. Every other self-encounter — a loop
//! through negation, or a non-ground variant of an ancestor (left
//! recursion, where pruning would silently drop answers) — is beyond
//! plain top-down evaluation, so the solver delegates the whole query to
//! the stable-model oracle, restricted to the rules in the query's
//! dependency component, and adopts the oracle's brave verdict.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::ast::{unify_literals, Atom, BodyLiteral, Literal, Program, Rule, Substitution, Term};
use crate::oracle::{self, OracleConfig};
use crate::parser::Query;

/// Solver limits and switches.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_depth: usize,
    pub max_answers: Option<usize>,
    pub fallback: bool,
    pub trace: bool,
    /// Grounding ceiling used when a query is delegated to the oracle.
    pub fallback_ceiling: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_depth: 10_000,
            max_answers: None,
            fallback: true,
            trace: false,
            fallback_ceiling: 1_000_000,
        }
    }
}

/// What a proof node concludes: a classical literal, a naf assumption over
/// one, or (at the root) the instantiated query itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conclusion {
    Lit(Literal),
    Naf(Literal),
    Query(Vec<BodyLiteral>),
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conclusion::Lit(l) => write!(f, "{l}"),
            Conclusion::Naf(l) => write!(f, "not {l}"),
            Conclusion::Query(body) => {
                write!(f, "?- ")?;
                for (i, b) in body.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{b}")?;
                }
                write!(f, ".")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JustificationKind {
    /// Matched a fact with a positive head.
    Fact,
    /// Matched a fact with a classically negated head.
    ClassicalFact,
    /// Applied the rule at the given program index; `None` marks the
    /// synthetic root node standing for the query conjunction.
    RuleApplication(Option<usize>),
    /// `not L` assumed because the sub-query for `L` finitely failed.
    NafAssumption,
}

/// Proof tree for a successful query: leaves are facts or naf-assumptions,
/// and every rule-application node has exactly one child per body literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Justification {
    pub kind: JustificationKind,
    pub conclusion: Conclusion,
    pub children: Vec<Justification>,
}

impl Justification {
    fn fact(lit: Literal) -> Self {
        let kind = match lit.sign {
            crate::ast::Sign::Positive => JustificationKind::Fact,
            crate::ast::Sign::Negative => JustificationKind::ClassicalFact,
        };
        Justification {
            kind,
            conclusion: Conclusion::Lit(lit),
            children: Vec::new(),
        }
    }

    fn assumption(lit: Literal) -> Self {
        Justification {
            kind: JustificationKind::NafAssumption,
            conclusion: Conclusion::Naf(lit),
            children: Vec::new(),
        }
    }

    fn fmt_indented(&self, f: &mut fmt::Formatter<'_>, level: usize) -> fmt::Result {
        for _ in 0..level {
            write!(f, "  ")?;
        }
        let tag = match &self.kind {
            JustificationKind::Fact => "[fact]".to_string(),
            JustificationKind::ClassicalFact => "[classical-fact]".to_string(),
            JustificationKind::RuleApplication(None) => "[query]".to_string(),
            JustificationKind::RuleApplication(Some(i)) => format!("[rule {}]", i + 1),
            JustificationKind::NafAssumption => "[assumed]".to_string(),
        };
        writeln!(f, "{}  {}", self.conclusion, tag)?;
        for c in &self.children {
            c.fmt_indented(f, level + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_indented(f, 0)
    }
}

/// Why a query was refused rather than answered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    NonGroundNaf { literal: Literal },
    Constraint { rule: String },
    DepthExceeded { limit: usize, chain: Vec<String> },
    FallbackDisabled { cycle: Vec<String> },
    SliceTooLarge { detail: String },
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::NonGroundNaf { literal } => {
                write!(
                    f,
                    "non-ground naf: `not {literal}` was selected before its variables were bound"
                )
            }
            RejectReason::Constraint { rule } => {
                write!(f, "integrity constraint `{rule}` is not supported by the goal-directed engine; use the model enumerator")
            }
            RejectReason::DepthExceeded { limit, chain } => {
                write!(
                    f,
                    "depth limit {limit} exceeded; innermost calls: {}",
                    chain.join(" <- ")
                )
            }
            RejectReason::FallbackDisabled { cycle } => {
                write!(
                    f,
                    "negation loop through {} and fallback is disabled",
                    cycle.join(", ")
                )
            }
            RejectReason::SliceTooLarge { detail } => {
                write!(f, "oracle fallback failed: {detail}")
            }
        }
    }
}

/// Result of delegating a query to the oracle on its dependency slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FallbackOutcome {
    /// Brave verdict: the query holds in at least one stable model of the
    /// slice.
    pub verdict: bool,
    /// Answer substitutions found across the slice's stable models.
    pub answers: Vec<Substitution>,
    /// Number of rules in the delegated slice.
    pub slice_rules: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// Distinct answers in rule order, each with a justification tree.
    Success(Vec<(Substitution, Justification)>),
    Failure,
    FallbackUsed(FallbackOutcome),
    Rejected(RejectReason),
}

impl SolveOutcome {
    pub fn succeeded(&self) -> bool {
        match self {
            SolveOutcome::Success(_) => true,
            SolveOutcome::FallbackUsed(fb) => fb.verdict,
            _ => false,
        }
    }

    pub fn is_rejection(&self) -> bool {
        matches!(self, SolveOutcome::Rejected(_))
    }
}

impl fmt::Display for SolveOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveOutcome::Success(answers) => {
                writeln!(
                    f,
                    "yes ({} answer{})",
                    answers.len(),
                    if answers.len() == 1 { "" } else { "s" }
                )?;
                for (i, (s, _)) in answers.iter().enumerate() {
                    if s.is_empty() {
                        writeln!(f, "answer {}: true", i + 1)?;
                    } else {
                        writeln!(f, "answer {}: {}", i + 1, bindings_line(s))?;
                    }
                }
                Ok(())
            }
            SolveOutcome::Failure => writeln!(f, "no"),
            SolveOutcome::FallbackUsed(fb) => {
                writeln!(
                    f,
                    "{} (oracle fallback over {} rules)",
                    if fb.verdict { "yes" } else { "no" },
                    fb.slice_rules
                )?;
                for (i, s) in fb.answers.iter().enumerate() {
                    if !s.is_empty() {
                        writeln!(f, "answer {}: {}", i + 1, bindings_line(s))?;
                    }
                }
                Ok(())
            }
            SolveOutcome::Rejected(r) => writeln!(f, "rejected: {r}"),
        }
    }
}

fn bindings_line(s: &Substitution) -> String {
    s.iter()
        .map(|(v, t)| format!("{v} = {t}"))
        .collect::<Vec<_>>()
        .join(", ")
}

enum Frame {
    Call { key: String, literal: Literal },
    NafBoundary { literal: Literal },
}

enum Abort {
    Reject(RejectReason),
    NegLoop { cycle: Vec<Atom> },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Flow {
    Continue,
    Stop,
}

/// Canonical variable renaming, so `p(X)` and `p(Y)` share a key.
fn variant_key(l: &Literal) -> String {
    let mut vars = Vec::new();
    l.variables(&mut vars);
    let mut s = Substitution::new();
    for (i, v) in vars.iter().enumerate() {
        s = s.compose(&Substitution::singleton(
            v.clone(),
            Term::var(format!("_V{i}")),
        ));
    }
    s.apply_literal(l).to_string()
}

struct Session<'a> {
    program: &'a Program,
    cfg: &'a SolverConfig,
    stack: Vec<Frame>,
    naf_memo: HashMap<Literal, bool>,
    fresh: usize,
    trace: Vec<String>,
}

type Cont<'s, 'c> =
    dyn FnMut(&mut Session<'s>, &Substitution, Justification) -> Result<Flow, Abort> + 'c;

impl<'a> Session<'a> {
    fn new(program: &'a Program, cfg: &'a SolverConfig) -> Self {
        Session {
            program,
            cfg,
            stack: Vec::new(),
            naf_memo: HashMap::new(),
            fresh: 0,
            trace: Vec::new(),
        }
    }

    fn trace_event(&mut self, depth: usize, event: &str, text: impl fmt::Display) {
        if self.cfg.trace {
            self.trace.push(format!("{depth}\t{event}\t{text}"));
        }
    }

    fn rename_rule(&mut self, r: &Rule) -> Rule {
        self.fresh += 1;
        let n = self.fresh;
        let mut s = Substitution::new();
        for v in r.variables() {
            s = s.compose(&Substitution::singleton(
                v.clone(),
                Term::var(format!("{v}~{n}")),
            ));
        }
        s.apply_rule(r)
    }

    fn call_chain(&self) -> Vec<String> {
        let mut chain: Vec<String> = self
            .stack
            .iter()
            .rev()
            .map(|f| match f {
                Frame::Call { literal, .. } => literal.to_string(),
                Frame::NafBoundary { literal } => format!("not {literal}"),
            })
            .take(12)
            .collect();
        chain.dedup();
        chain
    }

    /// Solve a conjunction. `goals` carries each literal's position in the
    /// original body so justification children stay in body order.
    fn solve_conj(
        &mut self,
        goals: &[(usize, BodyLiteral)],
        subst: &Substitution,
        depth: usize,
        acc: &[(usize, Justification)],
        k: &mut Cont<'a, '_>,
    ) -> Result<Flow, Abort> {
        if goals.is_empty() {
            return k(self, subst, assemble(acc));
        }
        // Select the first plain literal or the first naf-literal that is
        // ground under the current bindings (non-ground naf is delayed).
        let selected = goals
            .iter()
            .position(|(_, g)| !g.naf || subst.apply_literal(&g.literal).is_ground());
        let Some(si) = selected else {
            let lit = subst.apply_literal(&goals[0].1.literal);
            return Err(Abort::Reject(RejectReason::NonGroundNaf { literal: lit }));
        };
        let (orig, goal) = goals[si].clone();
        let rest: Vec<(usize, BodyLiteral)> = goals
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != si)
            .map(|(_, g)| g.clone())
            .collect();

        if goal.naf {
            let lit = subst.apply_literal(&goal.literal);
            if self.eval_naf(&lit, depth)? {
                self.trace_event(depth, "assume", format!("not {lit}"));
                let mut acc2 = acc.to_vec();
                acc2.push((orig, Justification::assumption(lit)));
                self.solve_conj(&rest, subst, depth, &acc2, k)
            } else {
                self.trace_event(depth, "fail", format!("not {lit}"));
                Ok(Flow::Continue)
            }
        } else {
            let lit = subst.apply_literal(&goal.literal);
            let acc_owned = acc.to_vec();
            let subst_owned = subst.clone();
            let rest_owned = rest;
            let mut inner = |zelf: &mut Session<'a>,
                             delta: &Substitution,
                             just: Justification|
             -> Result<Flow, Abort> {
                let new_subst = subst_owned.compose(delta);
                let mut acc2 = acc_owned.clone();
                acc2.push((orig, just));
                zelf.solve_conj(&rest_owned, &new_subst, depth, &acc2, k)
            };
            self.solve_literal(&lit, depth, &mut inner)
        }
    }

    /// Resolve one literal against the program. The continuation receives
    /// the binding delta restricted to the goal's variables plus the proof
    /// of this call.
    fn solve_literal(
        &mut self,
        goal: &Literal,
        depth: usize,
        k: &mut Cont<'a, '_>,
    ) -> Result<Flow, Abort> {
        if depth > self.cfg.max_depth {
            return Err(Abort::Reject(RejectReason::DepthExceeded {
                limit: self.cfg.max_depth,
                chain: self.call_chain(),
            }));
        }
        let key = variant_key(goal);
        let mut crossed_naf = false;
        for frame in self.stack.iter().rev() {
            match frame {
                Frame::NafBoundary { .. } => crossed_naf = true,
                Frame::Call { key: k2, literal } => {
                    if *k2 == key {
                        if !crossed_naf && goal.is_ground() {
                            // A ground goal nested inside itself: circular
                            // proofs derive nothing new, so the branch
                            // fails outright.
                            self.trace_event(depth, "call", goal);
                            self.trace_event(depth, "fail", goal);
                            return Ok(Flow::Continue);
                        }
                        // Either the loop runs through negation or the
                        // recursion is a non-ground variant of its
                        // ancestor (left recursion), where pruning would
                        // silently lose answers. Both go to the oracle.
                        let mut cycle = vec![goal.atom.clone(), literal.atom.clone()];
                        cycle.dedup();
                        return Err(Abort::NegLoop { cycle });
                    }
                }
            }
        }

        self.trace_event(depth, "call", goal);
        self.stack.push(Frame::Call {
            key,
            literal: goal.clone(),
        });
        let mut exits = 0usize;
        let result = self.resolve_against_rules(goal, depth, k, &mut exits);
        self.stack.pop();
        let flow = result?;
        if exits == 0 {
            self.trace_event(depth, "fail", goal);
        }
        Ok(flow)
    }

    fn resolve_against_rules(
        &mut self,
        goal: &Literal,
        depth: usize,
        k: &mut Cont<'a, '_>,
        exits: &mut usize,
    ) -> Result<Flow, Abort> {
        let mut goal_vars = Vec::new();
        goal.variables(&mut goal_vars);

        for ri in 0..self.program.len() {
            let rule = &self.program.rules()[ri];
            let Some(head) = &rule.head else { continue };
            if head.sign != goal.sign
                || head.atom.predicate != goal.atom.predicate
                || head.atom.args.len() != goal.atom.args.len()
            {
                continue;
            }
            let renamed = self.rename_rule(rule);
            let head = renamed.head.as_ref().unwrap();
            let Some(mgu) = unify_literals(goal, head) else {
                continue;
            };

            let flow = if renamed.body.is_empty() {
                let conclusion = mgu.apply_literal(goal);
                self.trace_event(depth, "exit", &conclusion);
                *exits += 1;
                let delta = mgu.restricted(&goal_vars);
                // This call's proof is complete; the continuation solves
                // sibling goals, so this frame is no ancestor of theirs.
                let frame = self.stack.pop().expect("own call frame");
                let res = k(self, &delta, Justification::fact(conclusion));
                self.stack.push(frame);
                res?
            } else {
                let goals: Vec<(usize, BodyLiteral)> =
                    renamed.body.iter().cloned().enumerate().collect();
                let goal_lit = goal.clone();
                let goal_vars2 = goal_vars.clone();
                let k2: &mut Cont<'a, '_> = &mut *k;
                let exits2: &mut usize = &mut *exits;
                let mut per_solution = move |zelf: &mut Session<'a>,
                                             final_subst: &Substitution,
                                             conj_root: Justification|
                      -> Result<Flow, Abort> {
                    let conclusion = final_subst.apply_literal(&goal_lit);
                    zelf.trace_event(depth, "exit", &conclusion);
                    *exits2 += 1;
                    let just = Justification {
                        kind: JustificationKind::RuleApplication(Some(ri)),
                        conclusion: Conclusion::Lit(conclusion),
                        children: conj_root.children,
                    };
                    let delta = final_subst.restricted(&goal_vars2);
                    let frame = zelf.stack.pop().expect("own call frame");
                    let res = k2(zelf, &delta, just);
                    zelf.stack.push(frame);
                    res
                };
                self.solve_conj(&goals, &mgu, depth + 1, &[], &mut per_solution)?
            };
            if flow == Flow::Stop {
                return Ok(Flow::Stop);
            }
        }
        Ok(Flow::Continue)
    }

    /// Evaluate `not lit` for a ground `lit`: true iff the sub-query for
    /// `lit` finitely fails. Completed sub-queries are memoized per solve
    /// session.
    fn eval_naf(&mut self, lit: &Literal, depth: usize) -> Result<bool, Abort> {
        debug_assert!(lit.is_ground());
        if let Some(&provable) = self.naf_memo.get(lit) {
            return Ok(!provable);
        }
        for frame in self.stack.iter().rev() {
            if let Frame::NafBoundary { literal } = frame {
                if literal == lit {
                    return Err(Abort::NegLoop {
                        cycle: vec![lit.atom.clone()],
                    });
                }
            }
        }
        self.stack.push(Frame::NafBoundary {
            literal: lit.clone(),
        });
        let mut provable = false;
        let mut witness = |_: &mut Session<'a>, _: &Substitution, _: Justification| {
            provable = true;
            Ok(Flow::Stop)
        };
        let result = self.solve_literal(lit, depth + 1, &mut witness);
        self.stack.pop();
        result?;
        self.naf_memo.insert(lit.clone(), provable);
        Ok(!provable)
    }
}

fn assemble(acc: &[(usize, Justification)]) -> Justification {
    let mut children = acc.to_vec();
    children.sort_by_key(|(i, _)| *i);
    Justification {
        kind: JustificationKind::RuleApplication(None),
        conclusion: Conclusion::Query(Vec::new()),
        children: children.into_iter().map(|(_, j)| j).collect(),
    }
}

/// Solve `q` against `p`, also returning the trace lines produced when
/// `cfg.trace` is set (one `depth<TAB>event<TAB>literal` line per
/// call/exit/fail/assume event).
pub fn solve_traced(p: &Program, q: &Query, cfg: &SolverConfig) -> (SolveOutcome, Vec<String>) {
    if let Some(c) = p.iter().find(|r| r.is_constraint()) {
        return (
            SolveOutcome::Rejected(RejectReason::Constraint {
                rule: c.to_string(),
            }),
            Vec::new(),
        );
    }
    let mut session = Session::new(p, cfg);
    let mut answers: Vec<(Substitution, Justification)> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let goals: Vec<(usize, BodyLiteral)> = q.body.iter().cloned().enumerate().collect();
    let free_vars = q.free_vars.clone();
    let max_answers = cfg.max_answers;
    let query_body = q.body.clone();

    let mut collect = |_zelf: &mut Session, subst: &Substitution, root: Justification| {
        let restricted = subst.restricted(&free_vars);
        let key = variant_key_subst(&restricted);
        if seen.insert(key) {
            let instantiated: Vec<BodyLiteral> = query_body
                .iter()
                .map(|b| subst.apply_body_literal(b))
                .collect();
            let mut root = root;
            root.conclusion = Conclusion::Query(instantiated);
            answers.push((restricted, root));
            if let Some(max) = max_answers {
                if answers.len() >= max {
                    return Ok(Flow::Stop);
                }
            }
        }
        Ok(Flow::Continue)
    };

    let result = session.solve_conj(&goals, &Substitution::new(), 1, &[], &mut collect);
    let trace = std::mem::take(&mut session.trace);

    let outcome = match result {
        Ok(_) => {
            if answers.is_empty() {
                SolveOutcome::Failure
            } else {
                SolveOutcome::Success(answers)
            }
        }
        Err(Abort::Reject(r)) => SolveOutcome::Rejected(r),
        Err(Abort::NegLoop { cycle }) => {
            if cfg.fallback {
                match check_consistency_fallback(p, &cycle, q, cfg) {
                    Ok(fb) => SolveOutcome::FallbackUsed(fb),
                    Err(r) => SolveOutcome::Rejected(r),
                }
            } else {
                SolveOutcome::Rejected(RejectReason::FallbackDisabled {
                    cycle: cycle.iter().map(|a| a.to_string()).collect(),
                })
            }
        }
    };
    (outcome, trace)
}

/// Solve `q` against `p`.
pub fn solve(p: &Program, q: &Query, cfg: &SolverConfig) -> SolveOutcome {
    solve_traced(p, q, cfg).0
}

fn variant_key_subst(s: &Substitution) -> String {
    // Canonicalize any leftover free variables so alpha-equivalent answers
    // deduplicate.
    let mut vars = Vec::new();
    for (_, t) in s.iter() {
        t.variables(&mut vars);
    }
    let mut canon = Substitution::new();
    for (i, v) in vars.iter().enumerate() {
        canon = canon.compose(&Substitution::singleton(
            v.clone(),
            Term::var(format!("_V{i}")),
        ));
    }
    s.iter()
        .map(|(v, t)| format!("{v}={}", canon.apply_term(t)))
        .collect::<Vec<_>>()
        .join(",")
}

/// All distinct answer substitutions for the query's free variables, up to
/// `cfg.max_answers`.
pub fn answer_all(
    p: &Program,
    q: &Query,
    cfg: &SolverConfig,
) -> Result<Vec<Substitution>, RejectReason> {
    match solve(p, q, cfg) {
        SolveOutcome::Success(answers) => Ok(answers.into_iter().map(|(s, _)| s).collect()),
        SolveOutcome::Failure => Ok(Vec::new()),
        SolveOutcome::FallbackUsed(fb) => {
            let mut answers = if q.free_vars.is_empty() {
                if fb.verdict {
                    vec![Substitution::new()]
                } else {
                    Vec::new()
                }
            } else {
                fb.answers
            };
            if let Some(max) = cfg.max_answers {
                answers.truncate(max);
            }
            Ok(answers)
        }
        SolveOutcome::Rejected(r) => Err(r),
    }
}

/// Delegate a query to the oracle after a negation loop. The slice is every
/// rule whose head predicate lies in the undirected dependency component of
/// the query's predicates (which always contains the cycle atoms); its
/// stable models are enumerated and the query is answered bravely against
/// them.
pub fn check_consistency_fallback(
    p: &Program,
    cycle_atoms: &[Atom],
    q: &Query,
    cfg: &SolverConfig,
) -> Result<FallbackOutcome, RejectReason> {
    let mut seeds: BTreeSet<String> = q
        .body
        .iter()
        .map(|b| b.literal.atom.predicate.clone())
        .collect();
    seeds.extend(cycle_atoms.iter().map(|a| a.predicate.clone()));
    let slice = dependency_slice(p, &seeds);
    let slice_rules = slice.len();

    let mut extras: Vec<Term> = Vec::new();
    for b in &q.body {
        extras.extend(
            b.literal
                .atom
                .args
                .iter()
                .filter(|t| t.is_ground())
                .cloned(),
        );
    }
    let ocfg = OracleConfig {
        depth_bound: None,
        ceiling: cfg.fallback_ceiling,
    };
    let models = oracle::stable_models_with_extras(&slice, &extras, &ocfg).map_err(|e| {
        RejectReason::SliceTooLarge {
            detail: e.to_string(),
        }
    })?;

    let mut answers: Vec<Substitution> = Vec::new();
    let mut seen = BTreeSet::new();
    for m in &models {
        let Some(subs) = oracle::answers_in_model(m, &q.body, &q.free_vars) else {
            return Err(RejectReason::NonGroundNaf {
                literal: q.body[0].literal.clone(),
            });
        };
        for s in subs {
            if seen.insert(s.to_string()) {
                answers.push(s);
            }
        }
    }
    answers.sort_by_key(|s| s.to_string());
    let verdict = !answers.is_empty();
    Ok(FallbackOutcome {
        verdict,
        answers,
        slice_rules,
    })
}

/// Rules whose head predicate lies in the undirected component of `seeds`
/// in the predicate dependency graph. Classical complements share a node.
fn dependency_slice(p: &Program, seeds: &BTreeSet<String>) -> Program {
    let mut adjacency: HashMap<String, BTreeSet<String>> = HashMap::new();
    for rule in p.iter() {
        let Some(h) = &rule.head else { continue };
        let hp = h.atom.predicate.clone();
        adjacency.entry(hp.clone()).or_default();
        for b in &rule.body {
            let bp = b.literal.atom.predicate.clone();
            adjacency.entry(hp.clone()).or_default().insert(bp.clone());
            adjacency.entry(bp).or_default().insert(hp.clone());
        }
    }
    let mut component: BTreeSet<String> = BTreeSet::new();
    let mut work: Vec<String> = seeds.iter().cloned().collect();
    while let Some(pred) = work.pop() {
        if !component.insert(pred.clone()) {
            continue;
        }
        if let Some(next) = adjacency.get(&pred) {
            work.extend(next.iter().cloned());
        }
    }
    let mut rules = Vec::new();
    let mut origins = Vec::new();
    for (rule, origin) in p.iter().zip(p.origins()) {
        if let Some(h) = &rule.head {
            if component.contains(&h.atom.predicate) {
                rules.push(rule.clone());
                origins.push(origin.clone());
            }
        }
    }
    Program::from_parts(rules, origins)
}

/// Replay a justification tree against the program: every fact leaf must
/// match a program fact, every rule application must unify with its rule
/// and carry one child per body literal, and every naf assumption must
/// survive a fresh solve of the negated sub-goal.
pub fn verify_justification(
    p: &Program,
    q: &Query,
    root: &Justification,
    cfg: &SolverConfig,
) -> Result<(), String> {
    match (&root.kind, &root.conclusion) {
        (JustificationKind::RuleApplication(None), Conclusion::Query(body)) => {
            if body.len() != q.body.len() {
                return Err(format!(
                    "query root has {} conclusions for {} query literals",
                    body.len(),
                    q.body.len()
                ));
            }
            if root.children.len() != body.len() {
                return Err(format!(
                    "query root has {} children for {} literals",
                    root.children.len(),
                    body.len()
                ));
            }
            for (b, child) in body.iter().zip(&root.children) {
                check_child_matches(b, child)?;
                verify_node(p, child, cfg)?;
            }
            Ok(())
        }
        _ => Err("root must be the query node".to_string()),
    }
}

fn check_child_matches(b: &BodyLiteral, child: &Justification) -> Result<(), String> {
    match (&child.conclusion, b.naf) {
        (Conclusion::Naf(l), true) => {
            // The child assumes exactly the instantiated body literal.
            if unify_literals(l, &b.literal).is_none() {
                return Err(format!(
                    "assumption `not {l}` does not match body literal `not {}`",
                    b.literal
                ));
            }
            Ok(())
        }
        (Conclusion::Lit(l), false) => {
            if unify_literals(l, &b.literal).is_none() {
                return Err(format!(
                    "conclusion `{l}` does not match body literal `{}`",
                    b.literal
                ));
            }
            Ok(())
        }
        _ => Err(format!("child kind does not match body literal `{b}`")),
    }
}

fn verify_node(p: &Program, node: &Justification, cfg: &SolverConfig) -> Result<(), String> {
    match &node.kind {
        JustificationKind::Fact | JustificationKind::ClassicalFact => {
            let Conclusion::Lit(l) = &node.conclusion else {
                return Err("fact node without a literal conclusion".into());
            };
            if !node.children.is_empty() {
                return Err(format!("fact node for {l} has children"));
            }
            let expected_sign = if node.kind == JustificationKind::Fact {
                crate::ast::Sign::Positive
            } else {
                crate::ast::Sign::Negative
            };
            if l.sign != expected_sign {
                return Err(format!("fact node sign mismatch for {l}"));
            }
            let found = p
                .iter()
                .any(|r| r.is_fact() && unify_literals(r.head.as_ref().unwrap(), l).is_some());
            if found {
                Ok(())
            } else {
                Err(format!("no program fact matches {l}"))
            }
        }
        JustificationKind::NafAssumption => {
            let Conclusion::Naf(l) = &node.conclusion else {
                return Err("assumption node without a naf conclusion".into());
            };
            if !node.children.is_empty() {
                return Err(format!("assumption node for not {l} has children"));
            }
            let sub = Query::new(vec![BodyLiteral::plain(l.clone())]);
            match solve(p, &sub, cfg) {
                SolveOutcome::Failure => Ok(()),
                SolveOutcome::FallbackUsed(fb) if !fb.verdict => Ok(()),
                SolveOutcome::Success(_) | SolveOutcome::FallbackUsed(_) => {
                    Err(format!("assumed `not {l}` but {l} is provable"))
                }
                SolveOutcome::Rejected(r) => Err(format!(
                    "assumed `not {l}` but re-solving was rejected: {r}"
                )),
            }
        }
        JustificationKind::RuleApplication(None) => Err("unexpected nested query node".into()),
        JustificationKind::RuleApplication(Some(ri)) => {
            let Conclusion::Lit(concl) = &node.conclusion else {
                return Err("rule node without a literal conclusion".into());
            };
            let Some(rule) = p.rules().get(*ri) else {
                return Err(format!("rule index {ri} out of range"));
            };
            let Some(head) = &rule.head else {
                return Err(format!("rule {ri} has no head"));
            };
            if node.children.len() != rule.body.len() {
                return Err(format!(
                    "rule {} application has {} children for {} body literals",
                    ri + 1,
                    node.children.len(),
                    rule.body.len()
                ));
            }
            let Some(mut theta) = unify_literals(head, concl) else {
                return Err(format!(
                    "conclusion {concl} does not unify with head of rule {}",
                    ri + 1
                ));
            };
            for (b, child) in rule.body.iter().zip(&node.children) {
                let expected = theta.apply_body_literal(b);
                match (&child.conclusion, expected.naf) {
                    (Conclusion::Naf(l), true) => {
                        let Some(mgu) = unify_literals(&expected.literal, l) else {
                            return Err(format!(
                                "child `not {l}` does not instantiate body literal `{expected}`"
                            ));
                        };
                        theta = theta.compose(&mgu);
                    }
                    (Conclusion::Lit(l), false) => {
                        let Some(mgu) = unify_literals(&expected.literal, l) else {
                            return Err(format!(
                                "child `{l}` does not instantiate body literal `{expected}`"
                            ));
                        };
                        theta = theta.compose(&mgu);
                    }
                    _ => return Err(format!("child kind mismatch under rule {}", ri + 1)),
                }
            }
            for child in &node.children {
                verify_node(p, child, cfg)?;
            }
            Ok(())
        }
    }
}
