//! Answer rendering: plain text for people, JSON for programs.
//!
//! The JSON document is built from the structs below, so field order is
//! fixed by declaration and a parsed document re-renders to the same bytes.

use std::fmt::Write as _;

use aclp_core::engine::{domain_text, Answer};
use aclp_core::term::Term;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Document {
    /// `"answers"` or `"no_answer"`.
    pub status: String,
    /// Some branch was cut by the depth limit, so the answers may not be
    /// all there are.
    pub incomplete: bool,
    pub answers: Vec<AnswerDoc>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct AnswerDoc {
    pub hypotheses: Vec<Hypothesis>,
    pub bindings: Vec<Binding>,
    pub constraints: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub changes: Option<usize>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Hypothesis {
    pub predicate: String,
    pub args: Vec<String>,
    /// One entry per distinct variable of the hypothesis, in order of
    /// appearance.
    pub domains: Vec<VarDomain>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct VarDomain {
    pub var: String,
    /// `None` for a variable with no finite domain.
    pub domain: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub value: String,
}

/// An answer to render, with its change count when one was computed.
pub struct Rendered<'a> {
    pub answer: &'a Answer,
    pub changes: Option<usize>,
}

fn hypothesis(a: &Answer, h: &Term) -> Hypothesis {
    let predicate = match h.functor() {
        Some((f, _)) => f.to_string(),
        None => a.write_term(h),
    };
    let mut domains = Vec::new();
    for v in h.vars() {
        let var = a.var_name(v);
        if domains.iter().any(|d: &VarDomain| d.var == var) {
            continue;
        }
        domains.push(VarDomain {
            var,
            domain: a.store.domain(v).map(domain_text),
        });
    }
    Hypothesis {
        predicate,
        args: h.args().iter().map(|t| a.write_term(t)).collect(),
        domains,
    }
}

pub fn answer_doc(r: &Rendered) -> AnswerDoc {
    let a = r.answer;
    AnswerDoc {
        hypotheses: a.delta.iter().map(|h| hypothesis(a, h)).collect(),
        bindings: a
            .bindings
            .iter()
            .map(|(n, t)| Binding {
                name: n.to_string(),
                value: a.write_term(t),
            })
            .collect(),
        constraints: a.constraints(),
        changes: r.changes,
    }
}

pub fn document(answers: &[Rendered], incomplete: bool) -> Document {
    Document {
        status: if answers.is_empty() { "no_answer" } else { "answers" }.into(),
        incomplete,
        answers: answers.iter().map(answer_doc).collect(),
    }
}

pub fn json(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document serializes");
    s.push('\n');
    s
}

pub fn text(answers: &[Rendered]) -> String {
    if answers.is_empty() {
        return "no answer\n".into();
    }
    let mut s = String::new();
    for (i, r) in answers.iter().enumerate() {
        let a = r.answer;
        if i > 0 {
            s.push('\n');
        }
        let _ = writeln!(s, "answer {}", i + 1);
        let hyps: Vec<String> = a.delta.iter().map(|h| a.write_term(h)).collect();
        let _ = writeln!(s, "  delta: {{{}}}", hyps.join(", "));
        for (n, t) in &a.bindings {
            let _ = writeln!(s, "  {} = {}", n, a.write_term(t));
        }
        for c in a.constraints() {
            let _ = writeln!(s, "  {}", c);
        }
        if let Some(c) = r.changes {
            let _ = writeln!(s, "  changes: {}", c);
        }
    }
    s
}
