//! Brute-force stable-model enumeration over small ground programs.
//!
//! This is the semantic ground truth for the goal-directed engine and the
//! fallback for non-stratified slices. It grounds a program over its
//! Herbrand universe, then enumerates candidate literal sets and keeps
//! exactly those equal to the least model of their own reduct. Only
//! literals that occur as rule heads can ever appear in a stable model, so
//! candidates range over head literals; when that space is too large the
//! enumerator guesses just the naf-relevant subset, which determines the
//! reduct and therefore the model. Both routes compute the same set of
//! models and are cross-checked in the test suite.
//!
//! None of this is meant to scale: grounding blows up exponentially and the
//! ceiling makes that failure mode loud instead of slow.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::ast::{complement, BodyLiteral, Literal, Program, Rule, Substitution, Term};

/// Hard cap on candidate-space exponents, past which enumeration is
/// refused rather than attempted.
const NAIVE_EXPONENT_LIMIT: u32 = 16;
const GUESS_EXPONENT_LIMIT: u32 = 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("grounding needs {instantiations} instantiations, over the ceiling of {ceiling}; the program is beyond oracle scale")]
    CeilingExceeded {
        instantiations: usize,
        ceiling: usize,
    },
    #[error("unsafe rule `{rule}`: variable {variable} occurs only in the head or under `not`; add a domain guard such as a class predicate over {variable}")]
    UnsafeRule { rule: String, variable: String },
    #[error("depth bound {given} is below the deepest term in the program ({required})")]
    DepthBoundTooSmall { given: usize, required: usize },
    #[error("candidate space of 2^{exponent} literal sets is beyond oracle scale")]
    CandidateSpaceTooLarge { exponent: u32 },
}

/// Limits for grounding and enumeration.
#[derive(Debug, Clone)]
pub struct OracleConfig {
    /// Maximum depth of terms created by instantiation. `None` uses the
    /// deepest term already present in the program.
    pub depth_bound: Option<usize>,
    /// Maximum number of rule instantiations attempted while grounding.
    pub ceiling: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            depth_bound: None,
            ceiling: 1_000_000,
        }
    }
}

/// A variable-free program together with its signed Herbrand base and the
/// number of instantiations grounding attempted.
#[derive(Debug, Clone)]
pub struct GroundProgram {
    pub rules: Vec<Rule>,
    pub base: BTreeSet<Literal>,
    pub instantiations: usize,
}

impl GroundProgram {
    pub fn atoms(&self) -> BTreeSet<crate::ast::Atom> {
        self.base.iter().map(|l| l.atom.clone()).collect()
    }
}

/// A consistent set of ground classical literals satisfying the fixpoint
/// condition of its own reduct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableModel {
    literals: BTreeSet<Literal>,
}

impl StableModel {
    pub fn new(literals: BTreeSet<Literal>) -> Self {
        StableModel { literals }
    }

    pub fn contains(&self, l: &Literal) -> bool {
        self.literals.contains(l)
    }

    pub fn literals(&self) -> &BTreeSet<Literal> {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    fn sorted_printed(&self) -> Vec<String> {
        let mut v: Vec<String> = self.literals.iter().map(|l| l.to_string()).collect();
        v.sort();
        v
    }
}

impl fmt::Display for StableModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.sorted_printed().join(", "))
    }
}

fn safety_check(p: &Program) -> Result<(), OracleError> {
    for rule in p.iter() {
        let mut bound = Vec::new();
        for b in &rule.body {
            if !b.naf {
                b.variables(&mut bound);
            }
        }
        let mut need = Vec::new();
        if let Some(h) = &rule.head {
            h.variables(&mut need);
        }
        for b in &rule.body {
            if b.naf {
                b.variables(&mut need);
            }
        }
        for v in need {
            if !bound.contains(&v) {
                return Err(OracleError::UnsafeRule {
                    rule: rule.to_string(),
                    variable: v,
                });
            }
        }
    }
    Ok(())
}

fn rule_max_depth(r: &Rule) -> usize {
    r.head
        .iter()
        .chain(r.body.iter().map(|b| &b.literal))
        .flat_map(|l| l.atom.args.iter())
        .map(Term::depth)
        .max()
        .unwrap_or(0)
}

type PredKey = (String, crate::ast::Sign, usize);

fn pred_key(l: &Literal) -> PredKey {
    (l.atom.predicate.clone(), l.sign, l.atom.args.len())
}

/// Ground `p` by relevance: rules are instantiated only with bindings under
/// which every plain body literal matches a derivable literal, where
/// "derivable" is the positive over-approximation that treats every `not`
/// as satisfied. Any stable-model computation only ever fires rules inside
/// that approximation, so the result is equivalent to full Herbrand
/// instantiation. Safety (every variable bound in a plain body literal)
/// makes every emitted instance ground. Instances that would create a term
/// deeper than `depth_bound` are dropped, so functor recursion cannot grow
/// terms past the bound, and the join is capped by `ceiling`.
pub fn ground(
    p: &Program,
    depth_bound: usize,
    ceiling: usize,
) -> Result<GroundProgram, OracleError> {
    ground_with_extras(p, &[], depth_bound, ceiling)
}

/// Like [`ground`], with extra ground terms (for example from a query)
/// raising the depth bound when they are deeper than anything in `p`.
pub fn ground_with_extras(
    p: &Program,
    extras: &[Term],
    depth_bound: usize,
    ceiling: usize,
) -> Result<GroundProgram, OracleError> {
    let required = p
        .max_term_depth()
        .max(extras.iter().map(Term::depth).max().unwrap_or(0));
    if depth_bound < required {
        return Err(OracleError::DepthBoundTooSmall {
            given: depth_bound,
            required,
        });
    }
    safety_check(p)?;

    struct Ground {
        derivable: Vec<Literal>,
        by_pred: HashMap<PredKey, Vec<usize>>,
        derivable_set: HashSet<Literal>,
        rules: Vec<Rule>,
        seen: HashSet<Rule>,
        attempts: usize,
        ceiling: usize,
        depth_bound: usize,
        changed: bool,
    }

    impl Ground {
        fn emit(&mut self, inst: Rule) -> Result<(), OracleError> {
            self.attempts += 1;
            if self.attempts > self.ceiling {
                return Err(OracleError::CeilingExceeded {
                    instantiations: self.attempts,
                    ceiling: self.ceiling,
                });
            }
            if rule_max_depth(&inst) > self.depth_bound {
                return Ok(());
            }
            if !self.seen.insert(inst.clone()) {
                return Ok(());
            }
            if let Some(h) = &inst.head {
                if self.derivable_set.insert(h.clone()) {
                    self.by_pred
                        .entry(pred_key(h))
                        .or_default()
                        .push(self.derivable.len());
                    self.derivable.push(h.clone());
                    self.changed = true;
                }
            }
            self.rules.push(inst);
            Ok(())
        }

        fn join(
            &mut self,
            rule: &Rule,
            plain: &[&BodyLiteral],
            subst: &Substitution,
        ) -> Result<(), OracleError> {
            let Some((first, rest)) = plain.split_first() else {
                return self.emit(subst.apply_rule(rule));
            };
            let goal = subst.apply_literal(&first.literal);
            let key = pred_key(&goal);
            // Snapshot: literals derived during this pass are joined on
            // the next pass, keeping the iteration order deterministic.
            let candidates = self.by_pred.get(&key).cloned().unwrap_or_default();
            for idx in candidates {
                let fact = self.derivable[idx].clone();
                if let Some(mgu) = crate::ast::unify_literals(&goal, &fact) {
                    self.join(rule, rest, &subst.compose(&mgu))?;
                }
            }
            Ok(())
        }
    }

    let mut g = Ground {
        derivable: Vec::new(),
        by_pred: HashMap::new(),
        derivable_set: HashSet::new(),
        rules: Vec::new(),
        seen: HashSet::new(),
        attempts: 0,
        ceiling,
        depth_bound,
        changed: false,
    };

    loop {
        g.changed = false;
        for rule in p.iter() {
            let plain: Vec<&BodyLiteral> = rule.body.iter().filter(|b| !b.naf).collect();
            g.join(rule, &plain, &Substitution::new())?;
        }
        if !g.changed {
            break;
        }
    }

    let mut base = BTreeSet::new();
    for rule in &g.rules {
        if let Some(h) = &rule.head {
            base.insert(h.clone());
        }
        for b in &rule.body {
            base.insert(b.literal.clone());
        }
    }
    Ok(GroundProgram {
        rules: g.rules,
        base,
        instantiations: g.attempts,
    })
}

/// The Gelfond–Lifschitz transform: drop every rule with a naf-literal
/// `not L` where `L` is in `candidate`, then delete the remaining
/// naf-literals. The result is naf-free.
pub fn reduct(g: &GroundProgram, candidate: &BTreeSet<Literal>) -> GroundProgram {
    let mut rules = Vec::new();
    'rule: for rule in &g.rules {
        for b in &rule.body {
            if b.naf && candidate.contains(&b.literal) {
                continue 'rule;
            }
        }
        rules.push(Rule {
            head: rule.head.clone(),
            body: rule.body.iter().filter(|b| !b.naf).cloned().collect(),
        });
    }
    let mut base = BTreeSet::new();
    for rule in &rules {
        if let Some(h) = &rule.head {
            base.insert(h.clone());
        }
        for b in &rule.body {
            base.insert(b.literal.clone());
        }
    }
    GroundProgram {
        rules,
        base,
        instantiations: g.instantiations,
    }
}

struct CompiledRule {
    head: Option<u32>,
    plain: Vec<u32>,
    naf: Vec<u32>,
}

struct Interned {
    literals: Vec<Literal>,
    rules: Vec<CompiledRule>,
    comp: Vec<Option<u32>>,
}

fn intern(g: &GroundProgram) -> Interned {
    let mut ids: HashMap<Literal, u32> = HashMap::new();
    let mut literals: Vec<Literal> = Vec::new();
    let id_of = |l: &Literal, literals: &mut Vec<Literal>, ids: &mut HashMap<Literal, u32>| {
        if let Some(&i) = ids.get(l) {
            i
        } else {
            let i = literals.len() as u32;
            literals.push(l.clone());
            ids.insert(l.clone(), i);
            i
        }
    };
    let mut rules = Vec::new();
    for rule in &g.rules {
        let head = rule
            .head
            .as_ref()
            .map(|h| id_of(h, &mut literals, &mut ids));
        let mut plain = Vec::new();
        let mut naf = Vec::new();
        for b in &rule.body {
            let i = id_of(&b.literal, &mut literals, &mut ids);
            if b.naf {
                naf.push(i);
            } else {
                plain.push(i);
            }
        }
        rules.push(CompiledRule { head, plain, naf });
    }
    let comp = literals
        .iter()
        .map(|l| ids.get(&complement(l)).copied())
        .collect();
    Interned {
        literals,
        rules,
        comp,
    }
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn get(&self, i: u32) -> bool {
        self.0[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: u32) {
        self.0[(i / 64) as usize] |= 1 << (i % 64);
    }
}

fn least_model_bits(rules: &[CompiledRule], guess: &Bits, nlits: usize) -> Bits {
    let mut model = Bits::empty(nlits);
    loop {
        let mut changed = false;
        for rule in rules {
            let Some(head) = rule.head else { continue };
            if model.get(head) {
                continue;
            }
            if rule.naf.iter().any(|&n| guess.get(n)) {
                continue;
            }
            if rule.plain.iter().all(|&p| model.get(p)) {
                model.set(head);
                changed = true;
            }
        }
        if !changed {
            return model;
        }
    }
}

fn constraints_ok(rules: &[CompiledRule], model: &Bits) -> bool {
    for rule in rules {
        if rule.head.is_some() {
            continue;
        }
        let body_true =
            rule.plain.iter().all(|&p| model.get(p)) && rule.naf.iter().all(|&n| !model.get(n));
        if body_true {
            return false;
        }
    }
    true
}

fn consistent(bits: &Bits, comp: &[Option<u32>]) -> bool {
    for (i, c) in comp.iter().enumerate() {
        if let Some(c) = c {
            if bits.get(i as u32) && bits.get(*c) && *c as usize > i {
                return false;
            }
        }
    }
    true
}

fn enumerate_models(g: &GroundProgram) -> Result<Vec<StableModel>, OracleError> {
    let interned = intern(g);
    let nlits = interned.literals.len();

    // Sorted by printed form so enumeration order is deterministic.
    let mut heads: Vec<u32> = {
        let mut set = BTreeSet::new();
        for r in &interned.rules {
            if let Some(h) = r.head {
                set.insert(h);
            }
        }
        set.into_iter().collect()
    };
    heads.sort_by_key(|&i| interned.literals[i as usize].to_string());

    let mut models: Vec<StableModel> = Vec::new();
    let mut push_model = |bits: &Bits| {
        let literals: BTreeSet<Literal> = interned
            .literals
            .iter()
            .enumerate()
            .filter(|(i, _)| bits.get(*i as u32))
            .map(|(_, l)| l.clone())
            .collect();
        models.push(StableModel::new(literals));
    };

    if (heads.len() as u32) <= NAIVE_EXPONENT_LIMIT {
        // Enumerate every consistent candidate over the head literals and
        // keep those equal to the least model of their reduct.
        for mask in 0u64..(1u64 << heads.len()) {
            let mut cand = Bits::empty(nlits);
            for (slot, &lit) in heads.iter().enumerate() {
                if mask >> slot & 1 == 1 {
                    cand.set(lit);
                }
            }
            if !consistent(&cand, &interned.comp) {
                continue;
            }
            let lm = least_model_bits(&interned.rules, &cand, nlits);
            if lm == cand && constraints_ok(&interned.rules, &lm) {
                push_model(&lm);
            }
        }
    } else {
        // Guess only naf-relevant head literals; the guess determines the
        // reduct, whose least model must reproduce the guess.
        let naf_relevant: Vec<u32> = {
            let mut naf_set = BTreeSet::new();
            for r in &interned.rules {
                naf_set.extend(r.naf.iter().copied());
            }
            let mut v: Vec<u32> = heads
                .iter()
                .copied()
                .filter(|h| naf_set.contains(h))
                .collect();
            v.sort_by_key(|&i| interned.literals[i as usize].to_string());
            v
        };
        if (naf_relevant.len() as u32) > GUESS_EXPONENT_LIMIT {
            return Err(OracleError::CandidateSpaceTooLarge {
                exponent: naf_relevant.len() as u32,
            });
        }
        for mask in 0u64..(1u64 << naf_relevant.len()) {
            let mut guess = Bits::empty(nlits);
            for (slot, &lit) in naf_relevant.iter().enumerate() {
                if mask >> slot & 1 == 1 {
                    guess.set(lit);
                }
            }
            let lm = least_model_bits(&interned.rules, &guess, nlits);
            let echoed = naf_relevant.iter().all(|&l| lm.get(l) == guess.get(l));
            if echoed && consistent(&lm, &interned.comp) && constraints_ok(&interned.rules, &lm) {
                push_model(&lm);
            }
        }
    }

    models.sort_by_key(|m| m.sorted_printed());
    models.dedup();
    Ok(models)
}

/// All stable models of `p`, sorted canonically by printed literals.
pub fn stable_models(p: &Program, cfg: &OracleConfig) -> Result<Vec<StableModel>, OracleError> {
    stable_models_with_extras(p, &[], cfg)
}

/// Like [`stable_models`], with extra ground terms added to the universe.
pub fn stable_models_with_extras(
    p: &Program,
    extras: &[Term],
    cfg: &OracleConfig,
) -> Result<Vec<StableModel>, OracleError> {
    let depth = cfg.depth_bound.unwrap_or_else(|| {
        p.max_term_depth()
            .max(extras.iter().map(Term::depth).max().unwrap_or(0))
    });
    let g = ground_with_extras(p, extras, depth, cfg.ceiling)?;
    enumerate_models(&g)
}

/// Stable models of an already-ground program.
pub fn stable_models_of_ground(g: &GroundProgram) -> Result<Vec<StableModel>, OracleError> {
    enumerate_models(g)
}

/// Brave entailment: `l` is a member of at least one stable model.
pub fn brave_entails(p: &Program, l: &Literal, cfg: &OracleConfig) -> Result<bool, OracleError> {
    let extras: Vec<Term> = l
        .atom
        .args
        .iter()
        .filter(|t| t.is_ground())
        .cloned()
        .collect();
    let models = stable_models_with_extras(p, &extras, cfg)?;
    Ok(models.iter().any(|m| m.contains(l)))
}

/// All substitutions (over `free_vars`) under which the query body holds in
/// the model. Plain literals match model members; naf literals must be
/// ground once the plain part is bound, and must be absent from the model.
/// Returns `None` if some naf literal stays non-ground.
pub fn answers_in_model(
    model: &StableModel,
    body: &[BodyLiteral],
    free_vars: &[String],
) -> Option<Vec<Substitution>> {
    let plain: Vec<&BodyLiteral> = body.iter().filter(|b| !b.naf).collect();
    let nafs: Vec<&BodyLiteral> = body.iter().filter(|b| b.naf).collect();
    let mut out = Vec::new();
    let mut non_ground_naf = false;
    match_plain(
        model,
        &plain,
        &nafs,
        Substitution::new(),
        free_vars,
        &mut out,
        &mut non_ground_naf,
    );
    if non_ground_naf {
        return None;
    }
    out.sort_by_key(|s| s.to_string());
    out.dedup();
    Some(out)
}

fn match_plain(
    model: &StableModel,
    plain: &[&BodyLiteral],
    nafs: &[&BodyLiteral],
    subst: Substitution,
    free_vars: &[String],
    out: &mut Vec<Substitution>,
    non_ground_naf: &mut bool,
) {
    match plain.split_first() {
        None => {
            for b in nafs {
                let lit = subst.apply_literal(&b.literal);
                if !lit.is_ground() {
                    *non_ground_naf = true;
                    return;
                }
                if model.contains(&lit) {
                    return;
                }
            }
            out.push(subst.restricted(free_vars));
        }
        Some((first, rest)) => {
            let goal = subst.apply_literal(&first.literal);
            for candidate in model.literals() {
                if let Some(mgu) = crate::ast::unify_literals(&goal, candidate) {
                    match_plain(
                        model,
                        rest,
                        nafs,
                        subst.compose(&mgu),
                        free_vars,
                        out,
                        non_ground_naf,
                    );
                }
            }
        }
    }
}

/// Stratification check for a ground program: no literal may depend on
/// itself through a path containing a naf edge.
pub fn is_stratified_ground(g: &GroundProgram) -> bool {
    let interned = intern(g);
    let n = interned.literals.len();
    // edges: head -> body literal, tagged with whether the edge is negative
    let mut edges: Vec<Vec<(u32, bool)>> = vec![Vec::new(); n];
    for rule in &interned.rules {
        let Some(h) = rule.head else { continue };
        for &p in &rule.plain {
            edges[h as usize].push((p, false));
        }
        for &q in &rule.naf {
            edges[h as usize].push((q, true));
        }
    }
    let sccs = tarjan_sccs(n, &edges);
    let mut comp_of = vec![0usize; n];
    for (ci, comp) in sccs.iter().enumerate() {
        for &v in comp {
            comp_of[v as usize] = ci;
        }
    }
    for (v, outs) in edges.iter().enumerate() {
        for &(w, neg) in outs {
            if neg && comp_of[v] == comp_of[w as usize] {
                // A negative edge inside a strongly connected component is
                // a cycle through negation, unless the component is a
                // single vertex with no self-loop.
                if v == w as usize || sccs[comp_of[v]].len() > 1 {
                    return false;
                }
            }
        }
    }
    true
}

fn tarjan_sccs(n: usize, edges: &[Vec<(u32, bool)>]) -> Vec<Vec<u32>> {
    struct State<'a> {
        edges: &'a [Vec<(u32, bool)>],
        index: Vec<Option<u32>>,
        low: Vec<u32>,
        on_stack: Vec<bool>,
        stack: Vec<u32>,
        counter: u32,
        sccs: Vec<Vec<u32>>,
    }
    fn strongconnect(v: u32, st: &mut State) {
        st.index[v as usize] = Some(st.counter);
        st.low[v as usize] = st.counter;
        st.counter += 1;
        st.stack.push(v);
        st.on_stack[v as usize] = true;
        let outs = st.edges[v as usize].to_vec();
        for (w, _) in outs {
            if st.index[w as usize].is_none() {
                strongconnect(w, st);
                st.low[v as usize] = st.low[v as usize].min(st.low[w as usize]);
            } else if st.on_stack[w as usize] {
                st.low[v as usize] = st.low[v as usize].min(st.index[w as usize].unwrap());
            }
        }
        if st.low[v as usize] == st.index[v as usize].unwrap() {
            let mut comp = Vec::new();
            loop {
                let w = st.stack.pop().unwrap();
                st.on_stack[w as usize] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            st.sccs.push(comp);
        }
    }
    let mut st = State {
        edges,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        counter: 0,
        sccs: Vec::new(),
    };
    for v in 0..n as u32 {
        if st.index[v as usize].is_none() {
            strongconnect(v, &mut st);
        }
    }
    st.sccs
}

/// Independent verification of enumerator output, implemented separately
/// from the enumeration path on purpose.
pub mod check {
    use super::*;

    /// Least model of a naf-free ground program, by naive fixpoint
    /// iteration over literal sets.
    pub fn least_model(rules: &[Rule]) -> BTreeSet<Literal> {
        let mut model: BTreeSet<Literal> = BTreeSet::new();
        loop {
            let mut added = false;
            for rule in rules {
                let Some(head) = &rule.head else { continue };
                if model.contains(head) {
                    continue;
                }
                let fires = rule.body.iter().all(|b| {
                    assert!(!b.naf, "least_model expects a naf-free program");
                    model.contains(&b.literal)
                });
                if fires {
                    model.insert(head.clone());
                    added = true;
                }
            }
            if !added {
                return model;
            }
        }
    }

    /// Check that `model` is consistent, satisfies every rule of the
    /// ground program classically, and equals the least model of its own
    /// reduct. Returns a description of the first failure.
    pub fn verify_stable_model(rules: &[Rule], model: &BTreeSet<Literal>) -> Result<(), String> {
        for l in model {
            if model.contains(&complement(l)) {
                return Err(format!(
                    "inconsistent: contains both {l} and {}",
                    complement(l)
                ));
            }
        }
        for rule in rules {
            let body_true = rule.body.iter().all(|b| {
                if b.naf {
                    !model.contains(&b.literal)
                } else {
                    model.contains(&b.literal)
                }
            });
            match &rule.head {
                Some(h) => {
                    if body_true && !model.contains(h) {
                        return Err(format!("rule not satisfied: {rule}"));
                    }
                }
                None => {
                    if body_true {
                        return Err(format!("constraint violated: {rule}"));
                    }
                }
            }
        }
        // Reduct, written out directly from the definition.
        let mut reduced: Vec<Rule> = Vec::new();
        'rule: for rule in rules {
            if rule.head.is_none() {
                continue;
            }
            for b in &rule.body {
                if b.naf && model.contains(&b.literal) {
                    continue 'rule;
                }
            }
            reduced.push(Rule {
                head: rule.head.clone(),
                body: rule.body.iter().filter(|b| !b.naf).cloned().collect(),
            });
        }
        let lm = least_model(&reduced);
        if &lm != model {
            return Err(format!(
                "not the least model of its reduct: model has {} literals, least model has {}",
                model.len(),
                lm.len()
            ));
        }
        Ok(())
    }
}
