//! Symbolic data model for ASP programs: terms, atoms, literals, rules and
//! programs, plus the substitution and unification machinery shared by every
//! solver in this crate.
//!
//! All values here are immutable once built. A [`Program`] is never mutated
//! in place; augmenting one (see the `defaults` module) produces a new value.

use std::collections::BTreeMap;
use std::fmt;

/// A first-order term. Variables are uppercase-initial (or `_`-initial),
/// constants and functors lowercase-initial, integers are inert constants
/// with no arithmetic attached.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
    Int(i64),
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Self {
        Term::Compound(functor.into(), args)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) | Term::Int(_) => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Functor nesting depth: constants and integers are depth 0,
    /// `f(t1..tn)` is one more than its deepest argument.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) | Term::Int(_) => 0,
            Term::Compound(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn variables(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.iter().any(|x| x == v) {
                    out.push(v.clone());
                }
            }
            Term::Const(_) | Term::Int(_) => {}
            Term::Compound(_, args) => {
                for a in args {
                    a.variables(out);
                }
            }
        }
    }

    fn occurs(&self, var: &str) -> bool {
        match self {
            Term::Var(v) => v == var,
            Term::Const(_) | Term::Int(_) => false,
            Term::Compound(_, args) => args.iter().any(|a| a.occurs(var)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Int(i) => write!(f, "{i}"),
            Term::Compound(functor, args) => {
                write!(f, "{functor}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A predicate applied to terms. `args` may be empty (propositional atom).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn variables(&self, out: &mut Vec<String>) {
        for a in &self.args {
            a.variables(out);
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            write!(f, "{}", self.predicate)
        } else {
            write!(f, "{}(", self.predicate)?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")
        }
    }
}

/// Polarity of a classical literal: `p(a)` or `-p(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

/// A classical literal: an atom or its strong negation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub sign: Sign,
    pub atom: Atom,
}

impl Literal {
    pub fn positive(atom: Atom) -> Self {
        Literal {
            sign: Sign::Positive,
            atom,
        }
    }

    pub fn negative(atom: Atom) -> Self {
        Literal {
            sign: Sign::Negative,
            atom,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.atom.is_ground()
    }

    pub fn variables(&self, out: &mut Vec<String>) {
        self.atom.variables(out);
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Positive => write!(f, "{}", self.atom),
            Sign::Negative => write!(f, "-{}", self.atom),
        }
    }
}

/// Flips the sign of a classical literal. Involution: applying it twice
/// yields the original literal.
pub fn complement(l: &Literal) -> Literal {
    Literal {
        sign: match l.sign {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        },
        atom: l.atom.clone(),
    }
}

/// A body occurrence of a literal, optionally under negation as failure.
/// `not` wraps exactly one classical literal; there is no nested `not`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BodyLiteral {
    pub naf: bool,
    pub literal: Literal,
}

impl BodyLiteral {
    pub fn plain(literal: Literal) -> Self {
        BodyLiteral {
            naf: false,
            literal,
        }
    }

    pub fn naf(literal: Literal) -> Self {
        BodyLiteral { naf: true, literal }
    }

    pub fn is_ground(&self) -> bool {
        self.literal.is_ground()
    }

    pub fn variables(&self, out: &mut Vec<String>) {
        self.literal.variables(out);
    }
}

impl fmt::Display for BodyLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.naf {
            write!(f, "not {}", self.literal)
        } else {
            write!(f, "{}", self.literal)
        }
    }
}

/// A rule `head :- body.` A fact is a rule with an empty body; an integrity
/// constraint is a rule with no head (accepted by the grounder, rejected by
/// the goal-directed engine).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub head: Option<Literal>,
    pub body: Vec<BodyLiteral>,
}

impl Rule {
    pub fn fact(head: Literal) -> Self {
        Rule {
            head: Some(head),
            body: Vec::new(),
        }
    }

    pub fn new(head: Literal, body: Vec<BodyLiteral>) -> Self {
        Rule {
            head: Some(head),
            body,
        }
    }

    pub fn constraint(body: Vec<BodyLiteral>) -> Self {
        Rule { head: None, body }
    }

    pub fn is_fact(&self) -> bool {
        self.head.is_some() && self.body.is_empty()
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }

    pub fn is_ground(&self) -> bool {
        self.head.as_ref().is_none_or(Literal::is_ground)
            && self.body.iter().all(BodyLiteral::is_ground)
    }

    /// Variables in first-occurrence order, head first.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(h) = &self.head {
            h.variables(&mut out);
        }
        for b in &self.body {
            b.variables(&mut out);
        }
        out
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.head, self.body.is_empty()) {
            (Some(h), true) => write!(f, "{h}."),
            (Some(h), false) => {
                write!(f, "{h} :- ")?;
                fmt_body(&self.body, f)?;
                write!(f, ".")
            }
            (None, _) => {
                write!(f, ":- ")?;
                fmt_body(&self.body, f)?;
                write!(f, ".")
            }
        }
    }
}

fn fmt_body(body: &[BodyLiteral], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, b) in body.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{b}")?;
    }
    Ok(())
}

/// Where a rule came from: a source file, the ingestion pipeline, or the
/// compiled default layer. Carried alongside each rule of a [`Program`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Origin(pub String);

impl Origin {
    pub fn new(s: impl Into<String>) -> Self {
        Origin(s.into())
    }
}

/// An immutable, ordered collection of rules with per-rule provenance.
/// Extending a program yields a new value; nothing in this crate mutates a
/// loaded program.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    rules: Vec<Rule>,
    origins: Vec<Origin>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        let origins = vec![Origin::default(); rules.len()];
        Program { rules, origins }
    }

    pub fn with_origin(rules: Vec<Rule>, origin: &str) -> Self {
        let origins = vec![Origin::new(origin); rules.len()];
        Program { rules, origins }
    }

    pub fn from_parts(rules: Vec<Rule>, origins: Vec<Origin>) -> Self {
        assert_eq!(rules.len(), origins.len());
        Program { rules, origins }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn origins(&self) -> &[Origin] {
        &self.origins
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter()
    }

    pub fn has_constraints(&self) -> bool {
        self.rules.iter().any(Rule::is_constraint)
    }

    /// New program with `other`'s rules appended after `self`'s.
    pub fn extended(&self, other: &Program) -> Program {
        let mut rules = self.rules.clone();
        rules.extend(other.rules.iter().cloned());
        let mut origins = self.origins.clone();
        origins.extend(other.origins.iter().cloned());
        Program { rules, origins }
    }

    /// All constants and integers occurring anywhere in the program.
    pub fn constants(&self) -> Vec<Term> {
        let mut out = Vec::new();
        for rule in &self.rules {
            for lit in rule.head.iter().chain(rule.body.iter().map(|b| &b.literal)) {
                for t in &lit.atom.args {
                    collect_constants(t, &mut out);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// All (functor, arity) pairs occurring anywhere in the program.
    pub fn functors(&self) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        for rule in &self.rules {
            for lit in rule.head.iter().chain(rule.body.iter().map(|b| &b.literal)) {
                for t in &lit.atom.args {
                    collect_functors(t, &mut out);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Maximum functor nesting depth over every term in the program.
    pub fn max_term_depth(&self) -> usize {
        self.rules
            .iter()
            .flat_map(|r| r.head.iter().chain(r.body.iter().map(|b| &b.literal)))
            .flat_map(|l| l.atom.args.iter())
            .map(Term::depth)
            .max()
            .unwrap_or(0)
    }
}

fn collect_constants(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::Const(_) | Term::Int(_) => out.push(t.clone()),
        Term::Var(_) => {}
        Term::Compound(_, args) => {
            for a in args {
                collect_constants(a, out);
            }
        }
    }
}

fn collect_functors(t: &Term, out: &mut Vec<(String, usize)>) {
    if let Term::Compound(f, args) = t {
        out.push((f.clone(), args.len()));
        for a in args {
            collect_functors(a, out);
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}

/// A finite map from variable names to terms. Kept resolved (idempotent):
/// no bound variable occurs inside any bound term.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Substitution {
    bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn singleton(var: impl Into<String>, term: Term) -> Self {
        let mut s = Substitution::new();
        s.bindings.insert(var.into(), term);
        s.resolve();
        s
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.bindings.iter()
    }

    /// Composition: applying the result equals applying `self` then `other`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut bindings = BTreeMap::new();
        for (v, t) in &self.bindings {
            bindings.insert(v.clone(), other.apply_term(t));
        }
        for (v, t) in &other.bindings {
            bindings.entry(v.clone()).or_insert_with(|| t.clone());
        }
        let mut s = Substitution { bindings };
        s.resolve();
        s
    }

    /// Keep only bindings for the given variables.
    pub fn restricted(&self, vars: &[String]) -> Substitution {
        let bindings = self
            .bindings
            .iter()
            .filter(|(v, _)| vars.iter().any(|x| x == *v))
            .map(|(v, t)| (v.clone(), t.clone()))
            .collect();
        Substitution { bindings }
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Const(_) | Term::Int(_) => t.clone(),
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.apply_term(a)).collect())
            }
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom {
            predicate: a.predicate.clone(),
            args: a.args.iter().map(|t| self.apply_term(t)).collect(),
        }
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        Literal {
            sign: l.sign,
            atom: self.apply_atom(&l.atom),
        }
    }

    pub fn apply_body_literal(&self, b: &BodyLiteral) -> BodyLiteral {
        BodyLiteral {
            naf: b.naf,
            literal: self.apply_literal(&b.literal),
        }
    }

    pub fn apply_rule(&self, r: &Rule) -> Rule {
        Rule {
            head: r.head.as_ref().map(|h| self.apply_literal(h)),
            body: r.body.iter().map(|b| self.apply_body_literal(b)).collect(),
        }
    }

    /// Substitute bound variables inside bound terms until a fixpoint, so
    /// that application is idempotent. Terminates because unification runs
    /// the occurs check.
    fn resolve(&mut self) {
        loop {
            let mut changed = false;
            let snapshot = self.bindings.clone();
            for term in self.bindings.values_mut() {
                let applied = apply_with(&snapshot, term);
                if applied != *term {
                    *term = applied;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn insert_raw(&mut self, var: String, term: Term) {
        self.bindings.insert(var, term);
    }
}

fn apply_with(bindings: &BTreeMap<String, Term>, t: &Term) -> Term {
    match t {
        Term::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Const(_) | Term::Int(_) => t.clone(),
        Term::Compound(f, args) => Term::Compound(
            f.clone(),
            args.iter().map(|a| apply_with(bindings, a)).collect(),
        ),
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v} = {t}")?;
        }
        write!(f, "}}")
    }
}

/// Most general unifier of two terms, with the occurs check. Returns `None`
/// on clash or occurs failure.
pub fn unify_terms(t1: &Term, t2: &Term) -> Option<Substitution> {
    let mut subst = Substitution::new();
    let mut work = vec![(t1.clone(), t2.clone())];
    while let Some((a, b)) = work.pop() {
        let a = subst.apply_term(&a);
        let b = subst.apply_term(&b);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if t.occurs(&x) {
                    return None;
                }
                bind(&mut subst, x, t);
            }
            (Term::Const(x), Term::Const(y)) => {
                if x != y {
                    return None;
                }
            }
            (Term::Int(x), Term::Int(y)) => {
                if x != y {
                    return None;
                }
            }
            (Term::Compound(f, fa), Term::Compound(g, ga)) => {
                if f != g || fa.len() != ga.len() {
                    return None;
                }
                work.extend(fa.into_iter().zip(ga));
            }
            _ => return None,
        }
    }
    Some(subst)
}

fn bind(subst: &mut Substitution, var: String, term: Term) {
    // Rewrite existing bindings so the substitution stays resolved.
    let single = {
        let mut s = Substitution::new();
        s.insert_raw(var.clone(), term.clone());
        s
    };
    let rewritten: Vec<(String, Term)> = subst
        .bindings
        .iter()
        .map(|(v, t)| (v.clone(), single.apply_term(t)))
        .collect();
    for (v, t) in rewritten {
        subst.insert_raw(v, t);
    }
    subst.insert_raw(var, term);
}

/// Most general unifier of two atoms: predicates and arities must match,
/// then arguments unify pairwise.
pub fn unify_atoms(a1: &Atom, a2: &Atom) -> Option<Substitution> {
    if a1.predicate != a2.predicate || a1.args.len() != a2.args.len() {
        return None;
    }
    let t1 = Term::Compound(a1.predicate.clone(), a1.args.clone());
    let t2 = Term::Compound(a2.predicate.clone(), a2.args.clone());
    if a1.args.is_empty() {
        return Some(Substitution::new());
    }
    unify_terms(&t1, &t2)
}

/// Most general unifier of two classical literals: signs must agree.
pub fn unify_literals(l1: &Literal, l2: &Literal) -> Option<Substitution> {
    if l1.sign != l2.sign {
        return None;
    }
    unify_atoms(&l1.atom, &l2.atom)
}
