//! Parser and pretty-printer for the textual ASP subset used across this
//! crate (`.lp` files).
//!
//! Grammar:
//!
//! ```text
//! program := rule*
//! rule    := head ":-" body "." | head "." | ":-" body "."
//! query   := "?-" body "."
//! head    := ["-"] atom
//! body    := blit ("," blit)*
//! blit    := ["not"] ["-"] atom
//! atom    := ident | ident "(" term ("," term)* ")"
//! term    := variable | integer | ident | ident "(" term ("," term)* ")"
//! ```
//!
//! Identifiers are `[a-z][A-Za-z0-9_]*` (constants, predicates, functors),
//! variables `[A-Z_][A-Za-z0-9_]*`. A bare `_` is an anonymous variable,
//! fresh per occurrence. `%` starts a line comment. `-` binds tighter than
//! `not`, so `not -p(X)` negates-as-failure the classically negated atom.
//! Headless rules are integrity constraints; the grounder accepts them, the
//! goal-directed engine rejects them.
//!
//! Printing is canonical: a single space after commas, ` :- ` between head
//! and body, and every printed program or query re-parses to an equal value.

use std::fmt;

use crate::ast::{Atom, BodyLiteral, Literal, Origin, Program, Rule, Term};

/// An ASP query: a conjunction of body literals plus its answer variables
/// (named variables in textual order; `_` occurrences are existential).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub body: Vec<BodyLiteral>,
    pub free_vars: Vec<String>,
}

impl Query {
    pub fn new(body: Vec<BodyLiteral>) -> Self {
        let mut free_vars = Vec::new();
        for b in &body {
            let mut vars = Vec::new();
            b.variables(&mut vars);
            for v in vars {
                if !v.starts_with('_') && !free_vars.contains(&v) {
                    free_vars.push(v);
                }
            }
        }
        Query { body, free_vars }
    }

    pub fn is_ground(&self) -> bool {
        self.body.iter().all(BodyLiteral::is_ground)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?- ")?;
        for (i, b) in self.body.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ".")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

/// A positioned parse diagnostic. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub token: String,
}

impl ParseDiagnostic {
    fn error(
        line: usize,
        col: usize,
        message: impl Into<String>,
        token: impl Into<String>,
    ) -> Self {
        ParseDiagnostic {
            severity: Severity::Error,
            line,
            col,
            message: message.into(),
            token: token.into(),
        }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.line, self.col, self.severity, self.message
        )?;
        if !self.token.is_empty() {
            write!(f, " (at `{}`)", self.token)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Not,
    Minus,
    LParen,
    RParen,
    Comma,
    Dot,
    ColonDash,
    QueryDash,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => s.clone(),
            Tok::Int(i) => i.to_string(),
            Tok::Not => "not".into(),
            Tok::Minus => "-".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Comma => ",".into(),
            Tok::Dot => ".".into(),
            Tok::ColonDash => ":-".into(),
            Tok::QueryDash => "?-".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

/// A lexed token with its 1-based position, exposed for tooling and tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan {
    pub line: usize,
    pub col: usize,
    pub text: String,
}

/// Tokenize `text`, returning positions and verbatim token text.
pub fn scan_tokens(text: &str) -> Result<Vec<TokenSpan>, Vec<ParseDiagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    Ok(toks
        .into_iter()
        .map(|s| TokenSpan {
            line: s.line,
            col: s.col,
            text: s.tok.describe(),
        })
        .collect())
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseDiagnostic> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&ch) = chars.peek() {
        let (tline, tcol) = (line, col);
        let advance = |chars: &mut std::iter::Peekable<std::str::Chars>,
                       line: &mut usize,
                       col: &mut usize| {
            let c = chars.next().unwrap();
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            c
        };
        match ch {
            c if c.is_whitespace() => {
                advance(&mut chars, &mut line, &mut col);
            }
            '%' => {
                while let Some(&c) = chars.peek() {
                    advance(&mut chars, &mut line, &mut col);
                    if c == '\n' {
                        break;
                    }
                }
            }
            '(' => {
                advance(&mut chars, &mut line, &mut col);
                out.push(Spanned {
                    tok: Tok::LParen,
                    line: tline,
                    col: tcol,
                });
            }
            ')' => {
                advance(&mut chars, &mut line, &mut col);
                out.push(Spanned {
                    tok: Tok::RParen,
                    line: tline,
                    col: tcol,
                });
            }
            ',' => {
                advance(&mut chars, &mut line, &mut col);
                out.push(Spanned {
                    tok: Tok::Comma,
                    line: tline,
                    col: tcol,
                });
            }
            '.' => {
                advance(&mut chars, &mut line, &mut col);
                out.push(Spanned {
                    tok: Tok::Dot,
                    line: tline,
                    col: tcol,
                });
            }
            '-' => {
                advance(&mut chars, &mut line, &mut col);
                out.push(Spanned {
                    tok: Tok::Minus,
                    line: tline,
                    col: tcol,
                });
            }
            ':' => {
                advance(&mut chars, &mut line, &mut col);
                if chars.peek() == Some(&'-') {
                    advance(&mut chars, &mut line, &mut col);
                    out.push(Spanned {
                        tok: Tok::ColonDash,
                        line: tline,
                        col: tcol,
                    });
                } else {
                    return Err(ParseDiagnostic::error(tline, tcol, "expected `:-`", ":"));
                }
            }
            '?' => {
                advance(&mut chars, &mut line, &mut col);
                if chars.peek() == Some(&'-') {
                    advance(&mut chars, &mut line, &mut col);
                    out.push(Spanned {
                        tok: Tok::QueryDash,
                        line: tline,
                        col: tcol,
                    });
                } else {
                    return Err(ParseDiagnostic::error(tline, tcol, "expected `?-`", "?"));
                }
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(advance(&mut chars, &mut line, &mut col));
                    } else {
                        break;
                    }
                }
                match s.parse::<i64>() {
                    Ok(i) => out.push(Spanned {
                        tok: Tok::Int(i),
                        line: tline,
                        col: tcol,
                    }),
                    Err(_) => {
                        return Err(ParseDiagnostic::error(
                            tline,
                            tcol,
                            "integer literal out of range",
                            s,
                        ))
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(advance(&mut chars, &mut line, &mut col));
                    } else {
                        break;
                    }
                }
                let tok = if s == "not" {
                    Tok::Not
                } else if s.starts_with(|c: char| c.is_ascii_uppercase() || c == '_') {
                    Tok::Var(s)
                } else {
                    Tok::Ident(s)
                };
                out.push(Spanned {
                    tok,
                    line: tline,
                    col: tcol,
                });
            }
            other => {
                return Err(ParseDiagnostic::error(
                    tline,
                    tcol,
                    format!("unexpected character `{other}`"),
                    other.to_string(),
                ));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    diags: Vec<ParseDiagnostic>,
    fresh: usize,
    end: (usize, usize),
}

impl Parser {
    fn new(toks: Vec<Spanned>, end: (usize, usize)) -> Self {
        Parser {
            toks,
            pos: 0,
            diags: Vec::new(),
            fresh: 0,
            end,
        }
    }

    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn error_at(&mut self, sp: Option<&Spanned>, message: impl Into<String>) {
        match sp {
            Some(s) => self.diags.push(ParseDiagnostic::error(
                s.line,
                s.col,
                message,
                s.tok.describe(),
            )),
            None => {
                let (l, c) = self.end;
                self.diags.push(ParseDiagnostic::error(l, c, message, ""));
            }
        }
    }

    fn error_here(&mut self, message: impl Into<String>) {
        let sp = self.peek().cloned();
        self.error_at(sp.as_ref(), message);
    }

    /// Skip forward past the next `.` so later rules still get diagnostics.
    fn recover(&mut self) {
        while let Some(t) = self.next() {
            if t.tok == Tok::Dot {
                break;
            }
        }
    }

    fn fresh_var(&mut self) -> String {
        let name = format!("_A{}", self.fresh);
        self.fresh += 1;
        name
    }

    fn parse_term(&mut self) -> Option<Term> {
        let sp = self.next();
        match sp {
            Some(Spanned {
                tok: Tok::Var(v), ..
            }) => {
                if v == "_" {
                    Some(Term::Var(self.fresh_var()))
                } else {
                    Some(Term::Var(v))
                }
            }
            Some(Spanned {
                tok: Tok::Int(i), ..
            }) => Some(Term::Int(i)),
            Some(Spanned {
                tok: Tok::Ident(name),
                ..
            }) => {
                if matches!(
                    self.peek(),
                    Some(Spanned {
                        tok: Tok::LParen,
                        ..
                    })
                ) {
                    self.next();
                    let args = self.parse_term_list()?;
                    Some(Term::Compound(name, args))
                } else {
                    Some(Term::Const(name))
                }
            }
            other => {
                self.error_at(other.as_ref(), "expected a term");
                None
            }
        }
    }

    fn parse_term_list(&mut self) -> Option<Vec<Term>> {
        let mut args = vec![self.parse_term()?];
        loop {
            match self.peek() {
                Some(Spanned {
                    tok: Tok::Comma, ..
                }) => {
                    self.next();
                    args.push(self.parse_term()?);
                }
                Some(Spanned {
                    tok: Tok::RParen, ..
                }) => {
                    self.next();
                    return Some(args);
                }
                _ => {
                    self.error_here("expected `,` or `)` in argument list");
                    return None;
                }
            }
        }
    }

    fn parse_atom(&mut self) -> Option<Atom> {
        let sp = self.next();
        match sp {
            Some(Spanned {
                tok: Tok::Ident(name),
                ..
            }) => {
                if matches!(
                    self.peek(),
                    Some(Spanned {
                        tok: Tok::LParen,
                        ..
                    })
                ) {
                    self.next();
                    let args = self.parse_term_list()?;
                    Some(Atom::new(name, args))
                } else {
                    Some(Atom::new(name, Vec::new()))
                }
            }
            Some(
                sp @ Spanned {
                    tok: Tok::Var(_), ..
                },
            ) => {
                self.error_at(
                    Some(&sp),
                    "predicate names must start with a lowercase letter",
                );
                None
            }
            other => {
                self.error_at(other.as_ref(), "expected a predicate");
                None
            }
        }
    }

    fn parse_literal(&mut self) -> Option<Literal> {
        if matches!(
            self.peek(),
            Some(Spanned {
                tok: Tok::Minus,
                ..
            })
        ) {
            self.next();
            Some(Literal::negative(self.parse_atom()?))
        } else {
            Some(Literal::positive(self.parse_atom()?))
        }
    }

    fn parse_body_literal(&mut self) -> Option<BodyLiteral> {
        if matches!(self.peek(), Some(Spanned { tok: Tok::Not, .. })) {
            self.next();
            if matches!(self.peek(), Some(Spanned { tok: Tok::Not, .. })) {
                self.error_here("nested `not` is not allowed");
                return None;
            }
            Some(BodyLiteral::naf(self.parse_literal()?))
        } else {
            Some(BodyLiteral::plain(self.parse_literal()?))
        }
    }

    fn parse_body(&mut self) -> Option<Vec<BodyLiteral>> {
        let mut body = vec![self.parse_body_literal()?];
        while matches!(
            self.peek(),
            Some(Spanned {
                tok: Tok::Comma,
                ..
            })
        ) {
            self.next();
            body.push(self.parse_body_literal()?);
        }
        Some(body)
    }

    fn expect_dot(&mut self) -> bool {
        match self.peek() {
            Some(Spanned { tok: Tok::Dot, .. }) => {
                self.next();
                true
            }
            Some(_) => {
                self.error_here("expected `.`, `,` or `:-`");
                false
            }
            None => {
                self.error_at(None, "unterminated rule: expected `.`");
                false
            }
        }
    }

    fn parse_rule(&mut self) -> Option<(Rule, usize)> {
        let line = self.peek().map(|s| s.line).unwrap_or(0);
        if matches!(
            self.peek(),
            Some(Spanned {
                tok: Tok::ColonDash,
                ..
            })
        ) {
            self.next();
            let body = self.parse_body()?;
            if !self.expect_dot() {
                return None;
            }
            return Some((Rule::constraint(body), line));
        }
        if matches!(self.peek(), Some(Spanned { tok: Tok::Not, .. })) {
            self.error_here("`not` cannot appear in a rule head");
            return None;
        }
        let head = self.parse_literal()?;
        match self.peek() {
            Some(Spanned { tok: Tok::Dot, .. }) => {
                self.next();
                Some((Rule::fact(head), line))
            }
            Some(Spanned {
                tok: Tok::ColonDash,
                ..
            }) => {
                self.next();
                let body = self.parse_body()?;
                if !self.expect_dot() {
                    return None;
                }
                Some((Rule::new(head, body), line))
            }
            Some(_) => {
                self.error_here("expected `:-` or `.` after rule head");
                None
            }
            None => {
                self.error_at(None, "unterminated rule: expected `.`");
                None
            }
        }
    }
}

fn end_position(text: &str) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

/// Parse a program. `origin` names the source (file name or a pipeline
/// stage) and is recorded per rule together with the line number.
pub fn parse_program(text: &str, origin: &str) -> Result<Program, Vec<ParseDiagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser::new(toks, end_position(text));
    let mut rules = Vec::new();
    let mut origins = Vec::new();
    while !p.at_end() {
        match p.parse_rule() {
            Some((rule, line)) => {
                origins.push(Origin::new(format!("{origin}:{line}")));
                rules.push(rule);
            }
            None => p.recover(),
        }
    }
    if p.diags.is_empty() {
        Ok(Program::from_parts(rules, origins))
    } else {
        Err(p.diags)
    }
}

/// Parse a query of the form `?- blit, ..., blit.`
pub fn parse_query(text: &str) -> Result<Query, Vec<ParseDiagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser::new(toks, end_position(text));
    match p.peek() {
        Some(Spanned {
            tok: Tok::QueryDash,
            ..
        }) => {
            p.next();
        }
        _ => {
            p.error_here("expected `?-`");
            return Err(p.diags);
        }
    }
    if matches!(p.peek(), Some(Spanned { tok: Tok::Dot, .. })) {
        p.error_here("empty query");
        return Err(p.diags);
    }
    let body = match p.parse_body() {
        Some(b) => b,
        None => return Err(p.diags),
    };
    if !p.expect_dot() {
        return Err(p.diags);
    }
    if !p.at_end() {
        p.error_here("unexpected input after query");
        return Err(p.diags);
    }
    Ok(Query::new(body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Sign;

    #[test]
    fn parses_naf_rule() {
        let p = parse_program("p(a) :- not q(a).", "test").unwrap();
        assert_eq!(p.len(), 1);
        let rule = &p.rules()[0];
        assert_eq!(rule.head.as_ref().unwrap().to_string(), "p(a)");
        assert_eq!(rule.body.len(), 1);
        assert!(rule.body[0].naf);
        assert_eq!(rule.body[0].literal.to_string(), "q(a)");
    }

    #[test]
    fn parses_default_pattern() {
        let p =
            parse_program("flies(X) :- bird(X), not ab(d1(X)), not -flies(X).", "test").unwrap();
        let rule = &p.rules()[0];
        assert_eq!(rule.body.len(), 3);
        let last = &rule.body[2];
        assert!(last.naf);
        assert_eq!(last.literal.sign, Sign::Negative);
        assert_eq!(last.literal.atom.to_string(), "flies(X)");
    }

    #[test]
    fn rejects_nested_not() {
        let err = parse_program("p :- not not q.", "test").unwrap_err();
        assert!(err[0].message.contains("nested"));
        // Position of the second `not`.
        assert_eq!((err[0].line, err[0].col), (1, 10));
    }

    #[test]
    fn rejects_not_in_head() {
        let err = parse_program("not p :- q.", "test").unwrap_err();
        assert!(err[0].message.contains("head"));
    }

    #[test]
    fn rejects_uppercase_predicate() {
        let err = parse_program("P(a).", "test").unwrap_err();
        assert!(err[0].message.contains("lowercase"));
    }

    #[test]
    fn rejects_unterminated_rule() {
        let err = parse_program("p(a) :- q(a)", "test").unwrap_err();
        assert!(err[0].message.contains("unterminated"));
    }

    #[test]
    fn parses_constraint() {
        let p = parse_program(":- p(a), not q(a).", "test").unwrap();
        assert!(p.rules()[0].is_constraint());
    }

    #[test]
    fn parses_ground_query() {
        let q = parse_query("?- flies(tweety).").unwrap();
        assert_eq!(q.body.len(), 1);
        assert!(q.free_vars.is_empty());
        assert!(q.is_ground());
    }

    #[test]
    fn query_free_vars_in_textual_order() {
        let q = parse_query("?- p(X, Y), not q(Y).").unwrap();
        assert_eq!(q.free_vars, vec!["X".to_string(), "Y".to_string()]);
    }

    #[test]
    fn query_single_variable() {
        let q = parse_query("?- flies(X).").unwrap();
        assert_eq!(q.free_vars, vec!["X".to_string()]);
    }

    #[test]
    fn rejects_empty_query() {
        let err = parse_query("?- .").unwrap_err();
        assert!(err[0].message.contains("empty"));
    }

    #[test]
    fn anonymous_variables_are_fresh() {
        let p = parse_program("pair(_, _).", "test").unwrap();
        let rule = &p.rules()[0];
        let head = rule.head.as_ref().unwrap();
        assert_ne!(head.atom.args[0], head.atom.args[1]);
    }

    #[test]
    fn prints_canonical_forms() {
        let p = parse_program("-p(X):-e(X).", "test").unwrap();
        assert_eq!(p.rules()[0].to_string(), "-p(X) :- e(X).");
        let f = parse_program("p(a).", "test").unwrap();
        assert_eq!(f.rules()[0].to_string(), "p(a).");
        let q = parse_query("?-not q(a).").unwrap();
        assert_eq!(q.to_string(), "?- not q(a).");
    }

    #[test]
    fn print_parse_round_trip() {
        let text =
            "flies(X) :- bird(X), not ab(d1(X)), not -flies(X).\nbird(tweety).\n:- p, not q.\n";
        let p1 = parse_program(text, "test").unwrap();
        let p2 = parse_program(&p1.to_string(), "test").unwrap();
        assert_eq!(p1.rules(), p2.rules());
        let q1 = parse_query("?- p(X, Y), not q(Y).").unwrap();
        let q2 = parse_query(&q1.to_string()).unwrap();
        assert_eq!(q1, q2);
    }

    #[test]
    fn comments_are_ignored() {
        let p = parse_program("% passage facts\np(a). % trailing\n", "test").unwrap();
        assert_eq!(p.len(), 1);
    }
}
