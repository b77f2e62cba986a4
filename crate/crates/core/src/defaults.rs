//! Compiles high-level default, exception and preference declarations into
//! abnormality-guarded rules, so knowledge authors never hand-write the
//! `ab`/`not` plumbing.
//!
//! A default `d` ("normally, members of class `c` have property `p`")
//! becomes
//!
//! ```text
//! p(X) :- c(X), not ab(d(X)), not -p(X).
//! ```
//!
//! a weak exception `e` blocks the default without concluding anything,
//!
//! ```text
//! ab(d(X)) :- c(X), not -e(X).
//! ```
//!
//! and a strong exception refutes it,
//!
//! ```text
//! -p(X) :- c(X), e(X).
//! ```
//!
//! The `c(X)` conjunct on the exception rules is this crate's groundability
//! guard: without it the exception rules have no plain literal binding `X`,
//! so the grounder rejects them and top-down evaluation cannot ground the
//! naf check. Restricting the exception to the default's class keeps its
//! meaning on the class unchanged.
//!
//! A preference `prefer d2 over d1 [if cond(X)]` is encoded by injecting
//! abnormality into the dispreferred default:
//!
//! ```text
//! ab(d1(X)) :- c2(X)[, cond(X)].
//! ```
//!
//! # The `.defaults` file format
//!
//! Line-oriented, `%` comments, one declaration per line:
//!
//! ```text
//! default d1: bird(X) ~> flies(X).
//! default d2: penguin(X) ~> -flies(X) if observed(X).
//! weak d1: sick(X).
//! strong d1: penguin(X).
//! prefer d2 over d1.
//! prefer d2 over d1 if healthy(X).
//! ```
//!
//! Every template is over the single variable `X`; classes are unary.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::ast::{complement, Atom, BodyLiteral, Literal, Program, Rule, Sign, Term};
use crate::parser;

pub const TEMPLATE_VAR: &str = "X";

/// A named default: members of `class_pred` normally have `property`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefaultSpec {
    pub name: String,
    pub class_pred: String,
    pub property: Literal,
    pub weak_exceptions: Vec<Literal>,
    pub strong_exceptions: Vec<Literal>,
    pub guard: Option<Literal>,
}

impl DefaultSpec {
    pub fn new(name: impl Into<String>, class_pred: impl Into<String>, property: Literal) -> Self {
        DefaultSpec {
            name: name.into(),
            class_pred: class_pred.into(),
            property,
            weak_exceptions: Vec::new(),
            strong_exceptions: Vec::new(),
            guard: None,
        }
    }
}

/// `preferred` wins over `over` when both defaults apply, optionally only
/// under `condition`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceSpec {
    pub preferred: String,
    pub over: String,
    pub condition: Option<Literal>,
}

/// Defaults and preferences loaded from a `.defaults` file or built in
/// code.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DefaultsSet {
    pub defaults: Vec<DefaultSpec>,
    pub preferences: Vec<PreferenceSpec>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DefaultsError {
    #[error("duplicate default name `{0}`")]
    DuplicateName(String),
    #[error("default `{default}` is self-defeating: strong exception `{exception}` coincides with its property")]
    SelfDefeating { default: String, exception: String },
    #[error("preference of `{preferred}` over `{over}` is vacuous: properties `{p1}` and `{p2}` cannot conflict")]
    VacuousPreference {
        preferred: String,
        over: String,
        p1: String,
        p2: String,
    },
    #[error("preference refers to undeclared default `{0}`")]
    UnknownDefault(String),
    #[error("a default cannot be preferred over itself (`{0}`)")]
    SelfPreference(String),
    #[error("bad template: {0}")]
    BadTemplate(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// One emitted rule `head :- class_body..., not ab(ab_term), not <complement
/// of head>.` Shared with the knowledge importer, whose inheritance rule
/// uses a two-argument abnormality term.
pub fn default_rule(head: Literal, class_body: Vec<BodyLiteral>, ab_term: Term) -> Rule {
    let mut body = class_body;
    body.push(BodyLiteral::naf(Literal::positive(Atom::new(
        "ab",
        vec![ab_term],
    ))));
    body.push(BodyLiteral::naf(complement(&head)));
    Rule::new(head, body)
}

fn template_var() -> Term {
    Term::var(TEMPLATE_VAR)
}

fn check_template(l: &Literal, what: &str) -> Result<(), DefaultsError> {
    let mut vars = Vec::new();
    l.variables(&mut vars);
    if vars != vec![TEMPLATE_VAR.to_string()] {
        return Err(DefaultsError::BadTemplate(format!(
            "{what} `{l}` must be over exactly the variable {TEMPLATE_VAR}"
        )));
    }
    Ok(())
}

/// Compile one default into its rule set: the main rule, one rule per weak
/// exception, one per strong exception.
pub fn compile_default(d: &DefaultSpec) -> Result<Vec<Rule>, DefaultsError> {
    check_template(&d.property, "property")?;
    if let Some(g) = &d.guard {
        check_template(g, "guard")?;
    }
    for e in d.weak_exceptions.iter().chain(&d.strong_exceptions) {
        check_template(e, "exception")?;
    }
    for e in &d.strong_exceptions {
        if *e == d.property || *e == complement(&d.property) {
            return Err(DefaultsError::SelfDefeating {
                default: d.name.clone(),
                exception: e.to_string(),
            });
        }
    }

    let class = BodyLiteral::plain(Literal::positive(Atom::new(
        d.class_pred.clone(),
        vec![template_var()],
    )));
    let ab_term = Term::compound(d.name.clone(), vec![template_var()]);

    let mut rules = Vec::new();
    let mut main_body = vec![class.clone()];
    if let Some(g) = &d.guard {
        main_body.push(BodyLiteral::plain(g.clone()));
    }
    rules.push(default_rule(d.property.clone(), main_body, ab_term.clone()));

    for e in &d.weak_exceptions {
        rules.push(Rule::new(
            Literal::positive(Atom::new("ab", vec![ab_term.clone()])),
            vec![class.clone(), BodyLiteral::naf(complement(e))],
        ));
    }
    for e in &d.strong_exceptions {
        rules.push(Rule::new(
            complement(&d.property),
            vec![class.clone(), BodyLiteral::plain(e.clone())],
        ));
    }
    Ok(rules)
}

/// Compile a preference into an abnormality injection: the preferred
/// default's applicability disables the dispreferred one.
pub fn compile_preference(
    pref: &PreferenceSpec,
    kb: &[DefaultSpec],
) -> Result<Vec<Rule>, DefaultsError> {
    if pref.preferred == pref.over {
        return Err(DefaultsError::SelfPreference(pref.preferred.clone()));
    }
    let find = |name: &str| {
        kb.iter()
            .find(|d| d.name == name)
            .ok_or_else(|| DefaultsError::UnknownDefault(name.to_string()))
    };
    let preferred = find(&pref.preferred)?;
    let over = find(&pref.over)?;
    if preferred.property.atom.predicate != over.property.atom.predicate {
        return Err(DefaultsError::VacuousPreference {
            preferred: pref.preferred.clone(),
            over: pref.over.clone(),
            p1: preferred.property.to_string(),
            p2: over.property.to_string(),
        });
    }
    if let Some(c) = &pref.condition {
        check_template(c, "preference condition")?;
    }

    let mut body = vec![BodyLiteral::plain(Literal::positive(Atom::new(
        preferred.class_pred.clone(),
        vec![template_var()],
    )))];
    if let Some(c) = &pref.condition {
        body.push(BodyLiteral::plain(c.clone()));
    }
    let head = Literal::positive(Atom::new(
        "ab",
        vec![Term::compound(over.name.clone(), vec![template_var()])],
    ));
    Ok(vec![Rule::new(head, body)])
}

/// A program extended with a compiled default layer, plus any consistency
/// warnings raised while combining the two.
#[derive(Debug, Clone)]
pub struct Augmented {
    pub program: Program,
    pub warnings: Vec<String>,
}

/// Compile every declaration and append the rules to `p` (provenance
/// `default-layer`). Warns when `p` already states a fact that a strong
/// exception argues against.
pub fn augment(p: &Program, specs: &DefaultsSet) -> Result<Augmented, DefaultsError> {
    let mut names = BTreeSet::new();
    for d in &specs.defaults {
        if !names.insert(d.name.clone()) {
            return Err(DefaultsError::DuplicateName(d.name.clone()));
        }
    }

    let mut compiled = Vec::new();
    for d in &specs.defaults {
        compiled.extend(compile_default(d)?);
    }
    for pref in &specs.preferences {
        compiled.extend(compile_preference(pref, &specs.defaults)?);
    }

    let mut warnings = Vec::new();
    for d in &specs.defaults {
        if d.strong_exceptions.is_empty() {
            continue;
        }
        let contrary = complement(&d.property);
        for rule in p.iter() {
            if let Some(h) = rule.head.as_ref().filter(|_| rule.is_fact()) {
                if h.atom.predicate == contrary.atom.predicate && h.sign != contrary.sign {
                    warnings.push(format!(
                        "fact `{rule}` may conflict with the strong exception of default `{}`, which concludes `{contrary}`",
                        d.name
                    ));
                }
            }
        }
    }

    let layer = Program::with_origin(compiled, "default-layer");
    Ok(Augmented {
        program: p.extended(&layer),
        warnings,
    })
}

fn parse_literal_text(text: &str, line: usize) -> Result<Literal, DefaultsError> {
    let program = parser::parse_program(&format!("{}.", text.trim()), "defaults").map_err(|d| {
        DefaultsError::Parse {
            line,
            message: format!("cannot parse literal `{}`: {}", text.trim(), d[0].message),
        }
    })?;
    if program.len() != 1 || !program.rules()[0].is_fact() {
        return Err(DefaultsError::Parse {
            line,
            message: format!("expected a single literal, got `{}`", text.trim()),
        });
    }
    Ok(program.rules()[0].head.clone().unwrap())
}

fn class_pred_of(l: &Literal, line: usize) -> Result<String, DefaultsError> {
    if l.sign != Sign::Positive || l.atom.args != vec![Term::var(TEMPLATE_VAR)] {
        return Err(DefaultsError::Parse {
            line,
            message: format!(
                "class must be a positive unary literal over {TEMPLATE_VAR}, got `{l}`"
            ),
        });
    }
    Ok(l.atom.predicate.clone())
}

fn split_once_required<'t>(
    text: &'t str,
    sep: &str,
    line: usize,
    what: &str,
) -> Result<(&'t str, &'t str), DefaultsError> {
    text.split_once(sep).ok_or_else(|| DefaultsError::Parse {
        line,
        message: format!("expected `{sep}` in {what}"),
    })
}

/// Parse a `.defaults` file.
pub fn parse_defaults(text: &str) -> Result<DefaultsSet, DefaultsError> {
    let mut set = DefaultsSet::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let stripped = match raw.find('%') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let stmt = stripped.trim();
        if stmt.is_empty() {
            continue;
        }
        let stmt = stmt.strip_suffix('.').ok_or(DefaultsError::Parse {
            line,
            message: "declaration must end with `.`".to_string(),
        })?;

        if let Some(rest) = stmt.strip_prefix("default ") {
            let (name, decl) = split_once_required(rest, ":", line, "default declaration")?;
            let (class_text, rhs) = split_once_required(decl, "~>", line, "default declaration")?;
            let (property_text, guard_text) = match rhs.split_once(" if ") {
                Some((p, g)) => (p, Some(g)),
                None => (rhs, None),
            };
            let class = parse_literal_text(class_text, line)?;
            let mut d = DefaultSpec::new(
                name.trim(),
                class_pred_of(&class, line)?,
                parse_literal_text(property_text, line)?,
            );
            if let Some(g) = guard_text {
                d.guard = Some(parse_literal_text(g, line)?);
            }
            if set.defaults.iter().any(|x| x.name == d.name) {
                return Err(DefaultsError::DuplicateName(d.name));
            }
            set.defaults.push(d);
        } else if let Some(rest) = stmt.strip_prefix("weak ") {
            let (name, lit) = split_once_required(rest, ":", line, "weak exception")?;
            let e = parse_literal_text(lit, line)?;
            let name = name.trim();
            let d = set
                .defaults
                .iter_mut()
                .find(|d| d.name == name)
                .ok_or_else(|| DefaultsError::UnknownDefault(name.to_string()))?;
            d.weak_exceptions.push(e);
        } else if let Some(rest) = stmt.strip_prefix("strong ") {
            let (name, lit) = split_once_required(rest, ":", line, "strong exception")?;
            let e = parse_literal_text(lit, line)?;
            let name = name.trim();
            let d = set
                .defaults
                .iter_mut()
                .find(|d| d.name == name)
                .ok_or_else(|| DefaultsError::UnknownDefault(name.to_string()))?;
            d.strong_exceptions.push(e);
        } else if let Some(rest) = stmt.strip_prefix("prefer ") {
            let (winner, rhs) = split_once_required(rest, " over ", line, "preference")?;
            let (loser, condition_text) = match rhs.split_once(" if ") {
                Some((l, c)) => (l, Some(c)),
                None => (rhs, None),
            };
            let condition = match condition_text {
                Some(c) => Some(parse_literal_text(c, line)?),
                None => None,
            };
            set.preferences.push(PreferenceSpec {
                preferred: winner.trim().to_string(),
                over: loser.trim().to_string(),
                condition,
            });
        } else {
            return Err(DefaultsError::Parse {
                line,
                message: format!("unknown declaration `{stmt}`"),
            });
        }
    }
    Ok(set)
}

impl fmt::Display for DefaultSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "default {}: {}({}) ~> {}",
            self.name, self.class_pred, TEMPLATE_VAR, self.property
        )
    }
}
