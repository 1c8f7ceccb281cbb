//! Reader for the Prolog-like source syntax of abductive theories.
//!
//! A source file is a sequence of `.`-terminated items:
//!
//! * `abducible_predicate(name/arity).` declares an abducible;
//! * `ic :- B1, ..., Bn.` is an integrity constraint;
//! * anything else is a program clause or fact.

use std::collections::HashMap;
use std::fmt;

use crate::literal::{Clause, IntegrityConstraint, Literal, VarNames};
use crate::term::{infix_op, list, prefix_op, Assoc, PredKey, Sym, Term, Var, SYMBOL_CHARS};
use crate::theory::{AbductiveTheory, TheoryError};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ErrorCategory {
    Syntax,
    Validation,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    pub category: ErrorCategory,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.category {
            ErrorCategory::Syntax => "syntax error",
            ErrorCategory::Validation => "validation error",
        };
        write!(
            f,
            "{} at {} (offset {}): {}",
            kind, self.span, self.span.start, self.message
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, PartialEq, Debug)]
pub enum Item {
    Clause(Clause),
    Abducible(PredKey),
    Ic(IntegrityConstraint),
}

/// A parsed file: every item with the span it came from.
#[derive(Clone, Debug, Default)]
pub struct SourceUnit {
    pub path: Option<String>,
    pub text: String,
    pub items: Vec<(Span, Item)>,
}

/// A parsed query: its literals plus the names of its variables.
#[derive(Clone, PartialEq, Debug)]
pub struct Goal {
    pub lits: Vec<Literal>,
    pub var_names: VarNames,
}

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Name(String),
    /// Name immediately followed by `(`.
    Functor(String),
    Var(String),
    Int(i64),
    Open,
    Close,
    OpenList,
    CloseList,
    Comma,
    Bar,
    End,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: Span,
    /// Whitespace or a comment precedes this token.
    spaced: bool,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1usize, 0usize);
    let mut spaced = true;
    let span_at = |start: usize, end: usize, line: usize, line_start: usize| Span {
        start,
        end,
        line,
        col: start - line_start + 1,
    };
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c == '\n' {
            line += 1;
            line_start = i + 1;
            i += 1;
            spaced = true;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            spaced = true;
            continue;
        }
        if c == '%' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            spaced = true;
            continue;
        }
        if c == '/' && bytes.get(i + 1) == Some(&b'*') {
            let start = i;
            i += 2;
            loop {
                if i + 1 >= bytes.len() {
                    return Err(ParseError {
                        span: span_at(start, bytes.len(), line, line_start),
                        message: "unterminated block comment".into(),
                        category: ErrorCategory::Syntax,
                    });
                }
                if bytes[i] == b'\n' {
                    line += 1;
                    line_start = i + 1;
                }
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    i += 2;
                    break;
                }
                i += 1;
            }
            spaced = true;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let s = &text[start..i];
            Tok::Int(s.parse().map_err(|_| ParseError {
                span: span_at(start, i, line, line_start),
                message: format!("integer `{}` out of range", s),
                category: ErrorCategory::Syntax,
            })?)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let s = text[start..i].to_string();
            if c.is_ascii_uppercase() || c == '_' {
                Tok::Var(s)
            } else if bytes.get(i) == Some(&b'(') {
                Tok::Functor(s)
            } else {
                Tok::Name(s)
            }
        } else if c == '\'' {
            i += 1;
            let mut s = String::new();
            loop {
                match bytes.get(i) {
                    None => {
                        return Err(ParseError {
                            span: span_at(start, i, line, line_start),
                            message: "unterminated quoted atom".into(),
                            category: ErrorCategory::Syntax,
                        })
                    }
                    Some(b'\\') if i + 1 < bytes.len() => {
                        s.push(bytes[i + 1] as char);
                        i += 2;
                    }
                    Some(b'\'') => {
                        i += 1;
                        break;
                    }
                    Some(_) => {
                        let ch = text[i..].chars().next().unwrap();
                        s.push(ch);
                        i += ch.len_utf8();
                    }
                }
            }
            if bytes.get(i) == Some(&b'(') {
                Tok::Functor(s)
            } else {
                Tok::Name(s)
            }
        } else if SYMBOL_CHARS.contains(c) {
            while i < bytes.len() && SYMBOL_CHARS.contains(bytes[i] as char) {
                i += 1;
            }
            let s = &text[start..i];
            let at_end = i >= bytes.len() || (bytes[i] as char).is_whitespace() || bytes[i] == b'%';
            if s == "." && at_end {
                Tok::End
            } else if bytes.get(i) == Some(&b'(') {
                Tok::Functor(s.to_string())
            } else {
                Tok::Name(s.to_string())
            }
        } else {
            i += 1;
            match c {
                '(' => Tok::Open,
                ')' => Tok::Close,
                '[' => Tok::OpenList,
                ']' => Tok::CloseList,
                ',' => Tok::Comma,
                '|' => Tok::Bar,
                _ => {
                    return Err(ParseError {
                        span: span_at(start, i, line, line_start),
                        message: format!("unexpected character `{}`", c),
                        category: ErrorCategory::Syntax,
                    })
                }
            }
        };
        out.push(Token {
            tok,
            span: span_at(start, i, line, line_start),
            spaced,
        });
        spaced = false;
    }
    let end = text.len();
    out.push(Token {
        tok: Tok::Eof,
        span: span_at(end, end, line, line_start),
        spaced: true,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    vars: HashMap<String, Var>,
    names: VarNames,
}

impl<'a> Parser<'a> {
    fn new(toks: &'a [Token], pos: usize) -> Self {
        Parser {
            toks,
            pos,
            vars: HashMap::new(),
            names: Vec::new(),
        }
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, tok: &Token, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            span: tok.span,
            message: message.into(),
            category: ErrorCategory::Syntax,
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            self.err(&t, format!("expected {}, found {}", what, describe(&t.tok)))
        }
    }

    fn var(&mut self, name: &str) -> Term {
        if name == "_" {
            let v = Var(self.names.len() as u32);
            self.names.push(Sym::from(format!("_G{}", v.0)));
            return Term::Var(v);
        }
        if let Some(v) = self.vars.get(name) {
            return Term::Var(*v);
        }
        let v = Var(self.names.len() as u32);
        self.names.push(Sym::from(name));
        self.vars.insert(name.to_string(), v);
        Term::Var(v)
    }

    /// Whether the next token can start a term (used to decide if a prefix
    /// operator is applied or stands alone as an atom).
    fn starts_term(&self) -> bool {
        match &self.peek().tok {
            Tok::Name(n) => infix_op(n).is_none() || prefix_op(n).is_some(),
            Tok::Functor(_) | Tok::Var(_) | Tok::Int(_) | Tok::Open | Tok::OpenList => true,
            _ => false,
        }
    }

    fn parse(&mut self, max: u32) -> Result<Term, ParseError> {
        let (mut left, mut left_prec) = self.primary(max)?;
        loop {
            let name = match &self.peek().tok {
                Tok::Name(n) => n.clone(),
                Tok::Comma => ",".to_string(),
                _ => break,
            };
            let Some((p, assoc)) = infix_op(&name) else {
                break;
            };
            let (la, ra) = match assoc {
                Assoc::Xfx => (p - 1, p - 1),
                Assoc::Xfy => (p - 1, p),
                Assoc::Yfx => (p, p - 1),
            };
            if p > max || left_prec > la {
                break;
            }
            self.next();
            let right = self.parse(ra)?;
            left = Term::compound(&name, vec![left, right]);
            left_prec = p;
        }
        Ok(left)
    }

    fn primary(&mut self, max: u32) -> Result<(Term, u32), ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Int(i) => Ok((Term::Int(i), 0)),
            Tok::Var(ref name) => Ok((self.var(name), 0)),
            Tok::Open => {
                let inner = self.parse(1200)?;
                self.expect(Tok::Close, "`)`")?;
                Ok((inner, 0))
            }
            Tok::OpenList => {
                if self.peek().tok == Tok::CloseList {
                    self.next();
                    return Ok((Term::atom("[]"), 0));
                }
                let mut items = vec![self.parse(999)?];
                while self.peek().tok == Tok::Comma {
                    self.next();
                    items.push(self.parse(999)?);
                }
                let tail = if self.peek().tok == Tok::Bar {
                    self.next();
                    Some(self.parse(999)?)
                } else {
                    None
                };
                self.expect(Tok::CloseList, "`]`")?;
                let mut l = list(items.clone());
                if let Some(tail) = tail {
                    l = items
                        .into_iter()
                        .rev()
                        .fold(tail, |acc, h| Term::compound(".", vec![h, acc]));
                }
                Ok((l, 0))
            }
            Tok::Functor(ref name) => {
                self.expect(Tok::Open, "`(`")?;
                let mut args = vec![self.parse(999)?];
                while self.peek().tok == Tok::Comma {
                    self.next();
                    args.push(self.parse(999)?);
                }
                self.expect(Tok::Close, "`)` or `,`")?;
                Ok((Term::compound(name, args), 0))
            }
            Tok::Name(ref name) => {
                if name == "-" {
                    if let (Tok::Int(i), false) = (&self.peek().tok, self.peek().spaced) {
                        let i = *i;
                        self.next();
                        return Ok((Term::Int(-i), 0));
                    }
                }
                if let Some(p) = prefix_op(name) {
                    if self.starts_term() {
                        let p = p.min(max);
                        let arg = self.parse(p)?;
                        return Ok((Term::compound(name, vec![arg]), p));
                    }
                }
                Ok((Term::atom(name), 0))
            }
            _ => self.err(&t, format!("unexpected {}", describe(&t.tok))),
        }
    }

    fn take_names(&mut self) -> VarNames {
        self.vars.clear();
        std::mem::take(&mut self.names)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Name(n) | Tok::Functor(n) => format!("`{}`", n),
        Tok::Var(v) => format!("variable `{}`", v),
        Tok::Int(i) => format!("`{}`", i),
        Tok::Open => "`(`".into(),
        Tok::Close => "`)`".into(),
        Tok::OpenList => "`[`".into(),
        Tok::CloseList => "`]`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Bar => "`|`".into(),
        Tok::End => "end of clause `.`".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn flatten_conj(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::Compound(f, args) if &**f == "," && args.len() == 2 => {
            flatten_conj(&args[0], out);
            flatten_conj(&args[1], out);
        }
        other => out.push(other.clone()),
    }
}

fn body_literals(t: &Term) -> Result<Vec<Literal>, String> {
    let mut parts = Vec::new();
    flatten_conj(t, &mut parts);
    parts.iter().map(Literal::from_term).collect()
}

fn classify(t: Term, names: VarNames) -> Result<Item, String> {
    match &t {
        Term::Compound(f, args) if &**f == ":-" && args.len() == 2 => {
            let (head, body) = (&args[0], &args[1]);
            let body = body_literals(body)?;
            if head == &Term::atom("ic") {
                return Ok(Item::Ic(IntegrityConstraint {
                    body,
                    var_names: names,
                }));
            }
            check_head(head)?;
            Ok(Item::Clause(Clause {
                head: head.clone(),
                body,
                var_names: names,
            }))
        }
        Term::Compound(f, args) if &**f == ":-" && args.len() == 1 => {
            Err("directives are not supported".into())
        }
        Term::Compound(f, args) if &**f == "abducible_predicate" && args.len() == 1 => {
            let bad = || format!("expected abducible_predicate(name/arity), found `{}`", t);
            match &args[0] {
                Term::Compound(s, na) if &**s == "/" && na.len() == 2 => match (&na[0], &na[1]) {
                    (Term::Atom(n), Term::Int(a)) if *a >= 0 => {
                        Ok(Item::Abducible(PredKey::new(n.clone(), *a as usize)))
                    }
                    _ => Err(bad()),
                },
                _ => Err(bad()),
            }
        }
        Term::Atom(a) if &**a == "ic" => {
            Err("an integrity constraint needs at least one body literal".into())
        }
        _ => {
            check_head(&t)?;
            Ok(Item::Clause(Clause {
                head: t,
                body: Vec::new(),
                var_names: names,
            }))
        }
    }
}

fn check_head(head: &Term) -> Result<(), String> {
    match head {
        Term::Var(_) | Term::Int(_) => Err(format!("`{}` cannot be a clause head", head)),
        _ => match Literal::from_term(head)? {
            Literal::Atom(_) => Ok(()),
            _ => Err(format!(
                "cannot define `{}`: constraint and negation heads are reserved",
                head
            )),
        },
    }
}

/// Parses every item of a source text, collecting syntax errors and
/// resynchronizing at the next `.`.
pub fn parse_source(text: &str) -> Result<SourceUnit, Vec<ParseError>> {
    let toks = lex(text).map_err(|e| vec![e])?;
    let mut items = Vec::new();
    let mut errors = Vec::new();
    let mut pos = 0;
    while toks[pos].tok != Tok::Eof {
        let start = toks[pos].span;
        let mut p = Parser::new(&toks, pos);
        let res = p.parse(1200).and_then(|t| {
            let end = p.peek().clone();
            if end.tok != Tok::End {
                return p.err(
                    &end,
                    format!("expected `.` or an operator, found {}", describe(&end.tok)),
                );
            }
            p.next();
            let names = p.take_names();
            classify(t, names).map_err(|message| ParseError {
                span: Span {
                    end: end.span.end,
                    ..start
                },
                message,
                category: ErrorCategory::Syntax,
            })
        });
        match res {
            Ok(item) => {
                let end = toks[p.pos - 1].span.end;
                items.push((Span { end, ..start }, item));
                pos = p.pos;
            }
            Err(e) => {
                errors.push(e);
                pos = p.pos.max(pos + 1);
                while toks[pos - 1].tok != Tok::End && toks[pos].tok != Tok::Eof {
                    pos += 1;
                }
            }
        }
    }
    if errors.is_empty() {
        Ok(SourceUnit {
            path: None,
            text: text.to_string(),
            items,
        })
    } else {
        Err(errors)
    }
}

impl SourceUnit {
    /// Builds the theory and runs the structural validation, mapping every
    /// failure back to the offending item.
    pub fn to_theory(&self) -> Result<AbductiveTheory, Vec<ParseError>> {
        let mut theory = AbductiveTheory::default();
        let mut ic_spans = Vec::new();
        let mut clause_spans: HashMap<PredKey, Span> = HashMap::new();
        for (span, item) in &self.items {
            match item {
                Item::Clause(c) => {
                    clause_spans.entry(c.pred_key()).or_insert(*span);
                    theory.add_clause(c.clone());
                }
                Item::Abducible(k) => theory.add_abducible(k.clone()),
                Item::Ic(ic) => {
                    ic_spans.push(*span);
                    theory.add_ic(ic.clone());
                }
            }
        }
        let errs: Vec<ParseError> = theory
            .validate()
            .into_iter()
            .map(|e| {
                let span = match &e {
                    TheoryError::IcWithoutAbducible { index, .. } => ic_spans[*index],
                    TheoryError::AbducibleHasClauses(k) => {
                        clause_spans.get(k).copied().unwrap_or_default()
                    }
                    _ => Span::default(),
                };
                ParseError {
                    span,
                    message: e.to_string(),
                    category: ErrorCategory::Validation,
                }
            })
            .collect();
        if errs.is_empty() {
            Ok(theory)
        } else {
            Err(errs)
        }
    }
}

/// Parses and validates a theory.
pub fn parse_theory(text: &str) -> Result<AbductiveTheory, Vec<ParseError>> {
    parse_source(text)?.to_theory()
}

/// Parses a conjunctive query, with or without a final `.`.
pub fn parse_goal(text: &str) -> Result<Goal, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser::new(&toks, 0);
    if p.peek().tok == Tok::Eof {
        return p.err(&toks[0], "empty goal");
    }
    let t = p.parse(1200)?;
    if p.peek().tok == Tok::End {
        p.next();
    }
    let end = p.peek().clone();
    if end.tok != Tok::Eof {
        return p.err(
            &end,
            format!("unexpected {} after goal", describe(&end.tok)),
        );
    }
    let lits = body_literals(&t).map_err(|message| ParseError {
        span: toks[0].span,
        message,
        category: ErrorCategory::Syntax,
    })?;
    Ok(Goal {
        lits,
        var_names: p.take_names(),
    })
}

/// Parses a file of ground facts (one per item), as used for initial and
/// reference hypothesis sets.
pub fn parse_facts(text: &str) -> Result<Vec<Term>, Vec<ParseError>> {
    let unit = parse_source(text)?;
    let mut out = Vec::new();
    let mut errs = Vec::new();
    for (span, item) in unit.items {
        match item {
            Item::Clause(c) if c.body.is_empty() && c.head.is_ground() => out.push(c.head),
            _ => errs.push(ParseError {
                span,
                message: "expected a ground fact".into(),
                category: ErrorCategory::Syntax,
            }),
        }
    }
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(errs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::literal::{CLit, RelOp};

    #[test]
    fn operators_and_precedence() {
        let g = parse_goal("X + 1 #< Y * 2 #\\/ X #>= 3, Z :: 1..5").unwrap();
        assert_eq!(g.lits.len(), 2);
        match &g.lits[0] {
            Literal::Constraint(CLit::Or(a, b)) => {
                assert!(matches!(**a, CLit::Rel(RelOp::Lt, _, _)));
                assert!(matches!(**b, CLit::Rel(RelOp::Ge, _, _)));
            }
            other => panic!("{:?}", other),
        }
        assert!(matches!(g.lits[1], Literal::Constraint(CLit::In(..))));
    }

    #[test]
    fn goal_examples() {
        let g = parse_goal("holds_at(at(p1,c2), 10)").unwrap();
        assert_eq!(g.lits.len(), 1);
        assert!(matches!(g.lits[0], Literal::Atom(_)));
        let g = parse_goal("time(T), act(T,A)").unwrap();
        assert_eq!(g.lits.len(), 2);
        assert_eq!(g.lits[0].to_term().args()[0], g.lits[1].to_term().args()[0]);
        let e = parse_goal("p(").unwrap_err();
        assert_eq!(e.span.start, 2);
    }

    #[test]
    fn naf_forms() {
        let a = parse_goal("not q(X)").unwrap();
        let b = parse_goal("not(q(X))").unwrap();
        assert_eq!(a, b);
        assert!(matches!(a.lits[0], Literal::Naf(_)));
    }

    #[test]
    fn negative_numbers_and_minus() {
        let g = parse_goal("X #= -1, Y #= Z - 1, W #= - 1").unwrap();
        let rhs = |i: usize| match &g.lits[i] {
            Literal::Constraint(CLit::Rel(_, _, r)) => r.clone(),
            _ => unreachable!(),
        };
        assert_eq!(rhs(0), Term::Int(-1));
        assert!(matches!(rhs(1), Term::Compound(ref f, _) if &**f == "-"));
        assert!(matches!(rhs(2), Term::Compound(ref f, ref a) if &**f == "-" && a.len() == 1));
    }

    #[test]
    fn theory_items() {
        let src = "
            % comment
            abducible_predicate(a/1).
            p(X) :- a(X), X :: 1..3.
            ic :- a(X), X #> 2.
            q.
        ";
        let t = parse_theory(src).unwrap();
        assert_eq!(t.abducibles().len(), 1);
        assert_eq!(t.clauses().len(), 2);
        assert_eq!(t.ics().len(), 1);
        assert_eq!(t.domain_decls().count(), 1);
    }

    #[test]
    fn empty_file() {
        let t = parse_theory("").unwrap();
        assert!(t.clauses().is_empty() && t.abducibles().is_empty() && t.ics().is_empty());
    }

    #[test]
    fn ic_without_abducible_is_rejected() {
        let errs = parse_theory("p(1).\nic :- p(X).").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].category, ErrorCategory::Validation);
        assert!(errs[0].message.starts_with("IC_WITHOUT_ABDUCIBLE"));
        assert_eq!(errs[0].span.line, 2);
    }

    #[test]
    fn abducible_with_clauses_is_rejected() {
        let errs = parse_theory("abducible_predicate(a/0).\na.").unwrap_err();
        assert!(errs[0].message.starts_with("ABDUCIBLE_HAS_CLAUSES"));
    }

    #[test]
    fn syntax_errors_resynchronize() {
        let errs = parse_source("p(. q(a). r(,).").unwrap_err();
        assert_eq!(errs.len(), 2);
        assert!(errs.iter().all(|e| e.category == ErrorCategory::Syntax));
    }

    #[test]
    fn deep_term_equality_rejected() {
        assert!(parse_goal("f(g(X)) ##= Y").is_err());
        assert!(parse_goal("f(X, a) ##= Y").is_ok());
    }

    #[test]
    fn facts_file() {
        let fs = parse_facts("start(t1, 0).\nstart(t2, 5).\n").unwrap();
        assert_eq!(fs.len(), 2);
        assert!(parse_facts("start(t1, S).").is_err());
    }

    #[test]
    fn round_trip_simple() {
        let src = "abducible_predicate(act/2).\nabducible_predicate(not_clipped/3).\n\
                   p(X, [a, b|T]) :- X #>= -2, not q(X), 'Odd atom'(X), X :: [a, b].\n\
                   ic :- act(T, A), A ##= f(T, _), T #< 3 #/\\ T #> 1.\n";
        let t = parse_theory(src).unwrap();
        let printed = t.to_string();
        let again = parse_theory(&printed).unwrap();
        assert_eq!(t, again, "{}", printed);
    }
}
