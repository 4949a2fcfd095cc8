//! Reader for the supported Prolog subset.
//!
//! A hand-written lexer feeds an operator-precedence parser driven by the
//! fixed table in [`crate::ops`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::engine::builtins;
use crate::format::{is_alnum, is_symbol_char};
use crate::ops::{self, ARG_PRIORITY, MAX_PRIORITY};
use crate::term::{Clause, PredKey, Program, Query, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnterminatedClause,
    UnknownOperator(String),
    UnterminatedQuoted,
    UnterminatedComment,
    NotCallable(String),
    Permission(String),
    EmptyQuery,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(m) => f.write_str(m),
            ParseErrorKind::UnterminatedClause => f.write_str("unterminated clause (missing '.')"),
            ParseErrorKind::UnknownOperator(op) => write!(f, "unknown operator '{op}'"),
            ParseErrorKind::UnterminatedQuoted => f.write_str("unterminated quoted atom"),
            ParseErrorKind::UnterminatedComment => f.write_str("unterminated block comment"),
            ParseErrorKind::NotCallable(t) => write!(f, "not callable: {t}"),
            ParseErrorKind::Permission(k) => write!(f, "cannot redefine built-in {k}"),
            ParseErrorKind::EmptyQuery => f.write_str("empty query"),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{line}:{column}: {kind} (at {found})")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    /// The offending token text, or `end of input`.
    pub found: String,
}

pub type Result<T> = std::result::Result<T, ParseError>;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Atom(String),
    QuotedAtom(String),
    Var(String),
    Int(BigInt),
    Float(f64),
    Punct(char),
    End,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    text: String,
    line: usize,
    column: usize,
    /// Whitespace or a comment precedes this token.
    spaced: bool,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0, line: 1, column: 1 }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, kind: ParseErrorKind, line: usize, column: usize, found: &str) -> ParseError {
        ParseError { kind, line, column, found: found.to_string() }
    }

    /// Skips layout and comments; reports whether anything was skipped.
    fn skip_layout(&mut self) -> Result<bool> {
        let start = self.pos;
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('/') if self.peek_at(1) == Some('*') => {
                    let (line, column) = (self.line, self.column);
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            None => return Err(self.error(ParseErrorKind::UnterminatedComment, line, column, "/*")),
                            Some('*') if self.peek() == Some('/') => {
                                self.bump();
                                break;
                            }
                            Some(_) => {}
                        }
                    }
                }
                _ => break,
            }
        }
        Ok(self.pos > start)
    }

    fn tokens(mut self) -> Result<Vec<Token>> {
        let mut out = Vec::new();
        loop {
            let spaced = self.skip_layout()? || self.pos == 0;
            let (line, column, start) = (self.line, self.column, self.pos);
            let Some(c) = self.peek() else {
                out.push(Token { tok: Tok::Eof, text: "end of input".into(), line, column, spaced });
                return Ok(out);
            };
            let tok = if c.is_ascii_digit() {
                self.number()
            } else if c == '_' || c.is_ascii_uppercase() {
                self.take_while(is_alnum);
                Tok::Var(self.src[start..self.pos].to_string())
            } else if c.is_ascii_lowercase() {
                self.take_while(is_alnum);
                Tok::Atom(self.src[start..self.pos].to_string())
            } else if c == '\'' {
                self.quoted(line, column)?
            } else if matches!(c, '(' | ')' | '[' | ']' | ',' | '|') {
                self.bump();
                Tok::Punct(c)
            } else if c == '!' || c == ';' {
                self.bump();
                Tok::Atom(c.to_string())
            } else if is_symbol_char(c) {
                while let Some(c) = self.peek() {
                    if !is_symbol_char(c) || (c == '/' && self.peek_at(1) == Some('*')) {
                        break;
                    }
                    self.bump();
                }
                let text = &self.src[start..self.pos];
                let ends = matches!(self.peek(), None | Some('%')) || self.peek().is_some_and(char::is_whitespace);
                if text == "." && ends {
                    Tok::End
                } else {
                    Tok::Atom(text.to_string())
                }
            } else {
                let found = c.to_string();
                let msg = match c {
                    '"' => "double-quoted strings are not supported".to_string(),
                    '{' | '}' => "curly-brace terms are not supported".to_string(),
                    _ => format!("unexpected character {c:?}"),
                };
                return Err(self.error(ParseErrorKind::Syntax(msg), line, column, &found));
            };
            let text = self.src[start..self.pos].to_string();
            out.push(Token { tok, text, line, column, spaced });
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }

    fn number(&mut self) -> Tok {
        let start = self.pos;
        self.take_while(|c| c.is_ascii_digit());
        let mut is_float = false;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            self.bump();
            self.take_while(|c| c.is_ascii_digit());
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let signed = matches!(self.peek_at(1), Some('+' | '-'));
            let digit_at = if signed { 2 } else { 1 };
            if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                is_float = true;
                for _ in 0..digit_at {
                    self.bump();
                }
                self.take_while(|c| c.is_ascii_digit());
            }
        }
        let text = &self.src[start..self.pos];
        if is_float {
            // Digit-only grammar: always a valid float literal; overflow gives inf.
            Tok::Float(f64::from_str(text).unwrap_or(f64::INFINITY))
        } else {
            Tok::Int(BigInt::from_str(text).expect("digits"))
        }
    }

    fn quoted(&mut self, line: usize, column: usize) -> Result<Tok> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error(ParseErrorKind::UnterminatedQuoted, line, column, "'")),
                Some('\'') => {
                    if self.peek() == Some('\'') {
                        self.bump();
                        s.push('\'');
                    } else {
                        return Ok(Tok::QuotedAtom(s));
                    }
                }
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('\\') => s.push('\\'),
                    Some('\'') => s.push('\''),
                    Some('"') => s.push('"'),
                    Some('\n') => {}
                    Some(c) => {
                        return Err(self.error(
                            ParseErrorKind::Syntax(format!("unknown escape \\{c}")),
                            self.line,
                            self.column,
                            &c.to_string(),
                        ))
                    }
                    None => return Err(self.error(ParseErrorKind::UnterminatedQuoted, line, column, "'")),
                },
                Some(c) => s.push(c),
            }
        }
    }
}

/// Per-clause variable naming; `_` is always fresh.
#[derive(Default)]
struct VarScope {
    ids: HashMap<String, usize>,
    names: Vec<Arc<str>>,
}

impl VarScope {
    fn get(&mut self, name: &str) -> Term {
        if name == "_" {
            let id = self.names.len();
            self.names.push(Arc::from("_"));
            return Term::var("_", id);
        }
        let id = match self.ids.get(name) {
            Some(&id) => id,
            None => {
                let id = self.names.len();
                self.ids.insert(name.to_string(), id);
                self.names.push(Arc::from(name));
                id
            }
        };
        Term::var(self.names[id].clone(), id)
    }

    fn take(&mut self) -> Vec<Arc<str>> {
        self.ids.clear();
        std::mem::take(&mut self.names)
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: VarScope,
}

impl Parser {
    fn new(src: &str) -> Result<Self> {
        Ok(Parser { toks: Lexer::new(src).tokens()?, pos: 0, vars: VarScope::default() })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek2(&self) -> Option<&Token> {
        self.toks.get(self.pos + 1)
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, tok: &Token, kind: ParseErrorKind) -> ParseError {
        ParseError { kind, line: tok.line, column: tok.column, found: tok.text.clone() }
    }

    fn unexpected(&self, tok: &Token, expected: &str) -> ParseError {
        let kind = if tok.tok == Tok::Eof {
            ParseErrorKind::Syntax(format!("unexpected end of input, expected {expected}"))
        } else {
            ParseErrorKind::Syntax(format!("unexpected token, expected {expected}"))
        };
        self.err_at(tok, kind)
    }

    fn expect_punct(&mut self, c: char) -> Result<()> {
        let t = self.next();
        if t.tok == Tok::Punct(c) {
            Ok(())
        } else {
            Err(self.unexpected(&t, &format!("'{c}'")))
        }
    }

    /// `(` immediately after the current token, with no layout between.
    fn functional_follows(&self) -> bool {
        matches!(self.peek2(), Some(t) if t.tok == Tok::Punct('(') && !t.spaced)
    }

    fn parse(&mut self, max: u16) -> Result<Term> {
        let (mut left, mut left_pri) = self.primary(max)?;
        loop {
            let tok = self.peek().clone();
            let name = match &tok.tok {
                Tok::Punct(',') => ",",
                Tok::Atom(a) => a.as_str(),
                _ => break,
            };
            let Some(op) = ops::infix(name) else {
                if matches!(tok.tok, Tok::Atom(_)) {
                    return Err(self.err_at(&tok, ParseErrorKind::UnknownOperator(name.to_string())));
                }
                break;
            };
            let (lmax, rmax) = op.arg_limits();
            if op.priority > max || left_pri > lmax {
                break;
            }
            let name = name.to_string();
            self.next();
            let right = self.parse(rmax)?;
            left = Term::compound(name, vec![left, right]);
            left_pri = op.priority;
        }
        Ok(left)
    }

    fn is_term_end(tok: &Token) -> bool {
        match &tok.tok {
            Tok::Punct(c) => matches!(c, ')' | ']' | '|' | ','),
            Tok::End | Tok::Eof => true,
            Tok::Atom(a) => ops::infix(a).is_some() && ops::prefix(a).is_none(),
            _ => false,
        }
    }

    fn primary(&mut self, max: u16) -> Result<(Term, u16)> {
        let tok = self.next();
        match tok.tok.clone() {
            Tok::Int(i) => Ok((Term::Int(i), 0)),
            Tok::Float(f) => self.float(f, &tok).map(|t| (t, 0)),
            Tok::Var(name) => Ok((self.vars.get(&name), 0)),
            Tok::Punct('(') => {
                let t = self.parse(MAX_PRIORITY)?;
                self.expect_punct(')')?;
                Ok((t, 0))
            }
            Tok::Punct('[') => {
                if self.peek().tok == Tok::Punct(']') {
                    self.next();
                    return Ok((Term::nil(), 0));
                }
                let mut items = vec![self.parse(ARG_PRIORITY)?];
                while self.peek().tok == Tok::Punct(',') {
                    self.next();
                    items.push(self.parse(ARG_PRIORITY)?);
                }
                let tail = if self.peek().tok == Tok::Punct('|') {
                    self.next();
                    Some(self.parse(ARG_PRIORITY)?)
                } else {
                    None
                };
                self.expect_punct(']')?;
                Ok((Term::list(items, tail), 0))
            }
            Tok::Punct(',') if !self.peek().spaced && self.peek().tok == Tok::Punct('(') => {
                self.pos -= 1;
                self.application(",".to_string()).map(|t| (t, 0))
            }
            Tok::QuotedAtom(name) => {
                self.pos -= 1;
                if self.functional_follows() {
                    return self.application(name).map(|t| (t, 0));
                }
                self.next();
                Ok((Term::atom(name), 0))
            }
            Tok::Atom(name) => {
                self.pos -= 1;
                if self.functional_follows() {
                    return self.application(name).map(|t| (t, 0));
                }
                self.next();
                if name == "-" && !self.peek().spaced {
                    match self.peek().tok.clone() {
                        Tok::Int(i) => {
                            self.next();
                            return Ok((Term::Int(-i), 0));
                        }
                        Tok::Float(f) => {
                            let t = self.next();
                            return self.float(-f, &t).map(|t| (t, 0));
                        }
                        _ => {}
                    }
                }
                if let Some(op) = ops::prefix(&name) {
                    if !Self::is_term_end(self.peek()) {
                        if op.priority > max {
                            return Err(self.err_at(
                                &tok,
                                ParseErrorKind::Syntax(format!(
                                    "operator priority clash: '{name}' ({}) in a context of priority {max}",
                                    op.priority
                                )),
                            ));
                        }
                        let (_, amax) = op.arg_limits();
                        let arg = self.parse(amax)?;
                        return Ok((Term::compound(name, vec![arg]), op.priority));
                    }
                }
                Ok((Term::atom(name), 0))
            }
            _ => Err(self.unexpected(&tok, "a term")),
        }
    }

    fn float(&self, f: f64, tok: &Token) -> Result<Term> {
        if f.is_finite() {
            Ok(Term::Float(f))
        } else {
            Err(self.err_at(tok, ParseErrorKind::Syntax("float literal out of range".into())))
        }
    }

    /// `name(` args `)`; the current token is the functor.
    fn application(&mut self, name: String) -> Result<Term> {
        self.next();
        self.expect_punct('(')?;
        let mut args = vec![self.parse(ARG_PRIORITY)?];
        loop {
            let t = self.next();
            match t.tok {
                Tok::Punct(',') => args.push(self.parse(ARG_PRIORITY)?),
                Tok::Punct(')') => break,
                _ => return Err(self.unexpected(&t, "',' or ')'")),
            }
        }
        Ok(Term::compound(name, args))
    }

    /// Parses one term followed by `.` (required) or end of input (when
    /// `end_optional`).
    fn terminated(&mut self, end_optional: bool) -> Result<Term> {
        let t = self.parse(MAX_PRIORITY)?;
        let tok = self.next();
        match tok.tok {
            Tok::End => Ok(t),
            Tok::Eof if end_optional => Ok(t),
            Tok::Eof => Err(self.err_at(&tok, ParseErrorKind::UnterminatedClause)),
            _ => Err(self.unexpected(&tok, "operator or '.'")),
        }
    }
}

fn check_goal(goal: &Term, tok: &Token) -> Result<()> {
    if goal.is_number() {
        return Err(ParseError {
            kind: ParseErrorKind::NotCallable(goal.to_string()),
            line: tok.line,
            column: tok.column,
            found: tok.text.clone(),
        });
    }
    Ok(())
}

fn clause_from_term(term: Term, var_names: Vec<Arc<str>>, tok: &Token) -> Result<Clause> {
    let (head, body) = match term.args_of(":-", 2) {
        Some([h, b]) => (h.clone(), b.conjuncts().into_iter().cloned().collect()),
        _ => (term, Vec::new()),
    };
    let err = |kind| ParseError { kind, line: tok.line, column: tok.column, found: tok.text.clone() };
    let Some(key) = PredKey::of(&head) else {
        return Err(err(ParseErrorKind::NotCallable(head.to_string())));
    };
    if builtins::is_protected(&key) {
        return Err(err(ParseErrorKind::Permission(key.to_string())));
    }
    for g in &body {
        check_goal(g, tok)?;
    }
    Ok(Clause { head, body, var_names })
}

/// Parses a program: clauses in source order, each terminated by `.`.
/// Directives (`:- Goal.`) are accepted and ignored.
pub fn parse_program(source: &str) -> Result<Program> {
    let mut p = Parser::new(source)?;
    let mut clauses = Vec::new();
    while p.peek().tok != Tok::Eof {
        let start = p.peek().clone();
        let term = p.terminated(false)?;
        let names = p.vars.take();
        if term.args_of(":-", 1).is_some() {
            continue;
        }
        clauses.push(clause_from_term(term, names, &start)?);
    }
    Ok(Program::new(clauses))
}

/// Parses a comma-separated query with an optional trailing `.`.
pub fn parse_query(source: &str) -> Result<Query> {
    let mut p = Parser::new(source)?;
    if p.peek().tok == Tok::Eof {
        let t = p.peek().clone();
        return Err(p.err_at(&t, ParseErrorKind::EmptyQuery));
    }
    let start = p.peek().clone();
    let term = p.terminated(true)?;
    let tail = p.next();
    if tail.tok != Tok::Eof {
        return Err(p.unexpected(&tail, "end of query"));
    }
    let goals: Vec<Term> = term.conjuncts().into_iter().cloned().collect();
    for g in &goals {
        check_goal(g, &start)?;
    }
    Ok(Query::new(goals, p.vars.take()))
}

/// Parses a single term, with an optional trailing `.`. Variable ids are
/// numbered from 0 in order of first occurrence.
pub fn parse_term(source: &str) -> Result<Term> {
    let mut p = Parser::new(source)?;
    let term = p.terminated(true)?;
    let tail = p.next();
    if tail.tok != Tok::Eof {
        return Err(p.unexpected(&tail, "end of input"));
    }
    Ok(term)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{format_program, format_term};

    fn t(s: &str) -> String {
        format_term(&parse_term(s).unwrap())
    }

    #[test]
    fn float_literal_with_trailing_zeros() {
        let p = parse_program("wage(18.00).").unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.clauses()[0].head, Term::compound("wage", vec![Term::Float(18.0)]));
        assert!(p.clauses()[0].is_fact());
    }

    #[test]
    fn comments_only_is_empty() {
        assert!(parse_program("").unwrap().is_empty());
        assert!(parse_program("/* Context */\n% nothing\n  ").unwrap().is_empty());
    }

    #[test]
    fn rule_body_with_arithmetic() {
        let p = parse_program("overtime_wage(W) :- wage(W1), W is 1.5 * W1.").unwrap();
        let c = &p.clauses()[0];
        assert_eq!(format_term(&c.head), "overtime_wage(W)");
        let body: Vec<_> = c.body.iter().map(format_term).collect();
        assert_eq!(body, vec!["wage(W1)", "is(W, *(1.5, W1))"]);
        assert_eq!(c.var_names.len(), 2);
    }

    #[test]
    fn operator_priorities() {
        assert_eq!(t("1 + 2 * 3"), "+(1, *(2, 3))");
        assert_eq!(t("1 - 2 - 3"), "-(-(1, 2), 3)");
        assert_eq!(t("a :- b, c ; d -> e"), ":-(a, ;(,(b, c), ->(d, e)))");
        assert_eq!(t("\\+ a = b"), "\\+(=(a, b))");
        assert_eq!(t("- a"), "-(a)");
        assert_eq!(t("- 1"), "-(1)");
        assert_eq!(t("-1"), "-1");
        assert_eq!(t("3 - -1"), "-(3, -1)");
        assert_eq!(t("X is 10 mod 3 // 2"), "is(X, //(mod(10, 3), 2))");
        assert_eq!(t("(2/3)"), "/(2, 3)");
    }

    #[test]
    fn functional_notation_for_operators() {
        assert_eq!(t(",(a, b)"), ",(a, b)");
        assert_eq!(t("=>(builtin(true), wage(18.0))"), "=>(builtin(true), wage(18.0))");
        assert_eq!(t("-(10, 8)"), "-(10, 8)");
        assert_eq!(t(";(->(=(a, a), b), c)"), ";(->(=(a, a), b), c)");
        assert_eq!(t("f(-, +, \\+)"), "f(-, +, \\+)");
    }

    #[test]
    fn lists() {
        assert_eq!(t("[20, 15, 18]"), "[20, 15, 18]");
        assert_eq!(t("[a|T]"), "[a|T]");
        assert_eq!(t("[]"), "[]");
        assert_eq!(t("'hello world'"), "'hello world'");
    }

    #[test]
    fn query_shares_variables() {
        let q = parse_query("p(X), q(X)").unwrap();
        assert_eq!(q.goals.len(), 2);
        assert_eq!(q.goals[0].as_compound().unwrap().args()[0], q.goals[1].as_compound().unwrap().args()[0]);
        assert_eq!(q.var_names.len(), 1);
        let q = parse_query("solve(Total).").unwrap();
        assert_eq!(q.goals, vec![Term::compound("solve", vec![Term::var("Total", 0)])]);
        assert_eq!(parse_query("true").unwrap().goals, vec![Term::atom("true")]);
    }

    #[test]
    fn empty_query_is_an_error() {
        assert_eq!(parse_query("  ").unwrap_err().kind, ParseErrorKind::EmptyQuery);
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let p = parse_program("p(_, _).").unwrap();
        let args = p.clauses()[0].head.as_compound().unwrap().args().to_vec();
        assert_ne!(args[0], args[1]);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_program("p(a).\nq(b) :- r(.").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));

        let e = parse_program("p(a)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnterminatedClause);

        let e = parse_program("p(X) :- X == 1.").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownOperator("==".into()));
        assert_eq!((e.line, e.column), (1, 11));

        let e = parse_program("p :- 'abc").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnterminatedQuoted);

        let e = parse_program("/* open").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnterminatedComment);
    }

    #[test]
    fn heads_must_be_callable_and_user_defined() {
        assert!(matches!(parse_program("X :- true.").unwrap_err().kind, ParseErrorKind::NotCallable(_)));
        assert!(matches!(parse_program("3.").unwrap_err().kind, ParseErrorKind::NotCallable(_)));
        assert!(matches!(parse_program("is(1, 1).").unwrap_err().kind, ParseErrorKind::Permission(_)));
        assert!(matches!(parse_program("p :- 1.").unwrap_err().kind, ParseErrorKind::NotCallable(_)));
        // library predicates may be redefined
        assert_eq!(parse_program("member(x, [x]).").unwrap().len(), 1);
    }

    #[test]
    fn directives_are_skipped() {
        let p = parse_program(":- use_module(library(lists)).\np.").unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn pretty_print_round_trip_on_exemplar_code() {
        let src = "remaining_avg(Person, Avg) :-\n    (Person = jesse -> a(Distance);\n    Person = mia -> b(Distance)),\n    total_distance(Total),\n    Remaining is Total - Distance,\n    Avg is Remaining / 3.\nx(- a, -(1), [a, b|_], 'A b', (-), \\+ (p, q)).\n";
        let p = parse_program(src).unwrap();
        let printed = format_program(&p);
        assert_eq!(parse_program(&printed).unwrap(), p, "{printed}");
    }
}
