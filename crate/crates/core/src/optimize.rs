//! Optimization over answers: minimizing a cost variable, and staying
//! close to a previous set of hypotheses.

use std::collections::BTreeSet;

use crate::engine::{Answer, EngineError};
use crate::fd::{Constraint, LabelStrategy, Operand, Store, Value};
use crate::literal::RelOp;
use crate::subst::{unify, Bindings};
use crate::term::{Term, Var};

pub const DEFAULT_MAX_ANSWERS: usize = 64;

/// Search nodes explored per answer by `min_changes` before settling for
/// the best found.
pub const NODE_LIMIT: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OptError {
    #[error("UNKNOWN_VARIABLE: {0} is not an integer variable of the answer")]
    UnknownVariable(String),
    #[error("EMPTY_STREAM: no answer to optimize over")]
    EmptyStream,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Branch and bound on the query variable `name`: each solution found
/// tightens `cost #< incumbent` and labelling restarts. `None` only if the
/// store has no solution.
pub fn minimize(
    answer: &Answer,
    name: &str,
    strategy: LabelStrategy,
) -> Result<Option<Answer>, OptError> {
    let unknown = || OptError::UnknownVariable(name.to_string());
    let term = answer
        .bindings
        .iter()
        .find(|(n, _)| &**n == name)
        .map(|b| b.1.clone())
        .ok_or_else(unknown)?;
    let cost = match term {
        Term::Int(_) => None,
        Term::Var(v) if matches!(answer.store.domain(v), Some(d) if d.is_int()) => Some(v),
        _ => return Err(unknown()),
    };
    let mut store = answer.store.clone();
    let order = answer.label_order();
    let mut best = None;
    while let Some(val) = store.first_solution(&order, strategy) {
        let Some(v) = cost else {
            return Ok(Some(answer.labelled(val)));
        };
        let Some((_, Value::Int(c))) = val.iter().find(|(x, _)| *x == v).cloned() else {
            return Err(unknown());
        };
        best = Some(val);
        if store
            .post(Constraint::rel(RelOp::Lt, Operand::var(v), Operand::int(c)))
            .is_err()
        {
            break;
        }
    }
    Ok(best.map(|val| answer.labelled(val)))
}

/// Size of the symmetric difference of two sets of ground atoms.
pub fn change_count(a: &[Term], b: &[Term]) -> usize {
    let x: BTreeSet<String> = a.iter().map(|t| t.to_string()).collect();
    let y: BTreeSet<String> = b.iter().map(|t| t.to_string()).collect();
    x.symmetric_difference(&y).count()
}

struct Search<'a> {
    delta: &'a [Term],
    reference: &'a [Term],
    order: Vec<Var>,
    strategy: LabelStrategy,
    nodes: usize,
    /// Score to beat, from earlier answers.
    cap: Option<usize>,
    best: Option<(usize, Vec<(Var, Value)>, Bindings)>,
}

impl Search<'_> {
    /// Hypothesis `i` is matched to an unused reference atom or left
    /// unmatched; leaves are labelled and scored exactly.
    fn go(&mut self, i: usize, used: &mut Vec<bool>, matched: usize, b: &Bindings, s: &mut Store) {
        if self.nodes >= NODE_LIMIT {
            return;
        }
        self.nodes += 1;
        // Every remaining hypothesis matching is the best this branch can do.
        let bound = (self.delta.len() + self.reference.len())
            .saturating_sub(2 * (matched + (self.delta.len() - i)));
        if self.cap.is_some_and(|c| bound >= c) {
            return;
        }
        if i == self.delta.len() {
            if let Some(val) = s.first_solution(&self.order, self.strategy) {
                let ground: Vec<Term> = self
                    .delta
                    .iter()
                    .map(|h| ground(&b.resolve(h), &val))
                    .collect();
                let c = change_count(&ground, self.reference);
                if self.cap.map_or(true, |best| c < best) {
                    self.cap = Some(c);
                    self.best = Some((c, val, b.clone()));
                }
            }
            return;
        }
        let h = &self.delta[i];
        for (j, r) in self.reference.iter().enumerate() {
            if used[j] || h.pred_key() != r.pred_key() {
                continue;
            }
            let mut b2 = b.clone();
            let m = s.snapshot();
            if unify(h, r, &mut b2, s).is_ok() {
                used[j] = true;
                self.go(i + 1, used, matched + 1, &b2, s);
                used[j] = false;
            }
            s.restore(m).expect("nested marks");
        }
        self.go(i + 1, used, matched, b, s);
    }
}

fn ground(t: &Term, val: &[(Var, Value)]) -> Term {
    t.map_vars(&mut |v| match val.iter().find(|(x, _)| *x == v) {
        Some((_, Value::Int(i))) => Term::Int(*i),
        Some((_, Value::Atom(a))) => Term::Atom(a.clone()),
        None => Term::Var(v),
    })
}

/// The labelled answer closest to `reference` (symmetric difference of
/// ground hypotheses) among the first `max_answers` answers and their
/// labellings; ties go to the first found.
pub fn min_changes(
    answers: impl IntoIterator<Item = Result<Answer, EngineError>>,
    reference: &[Term],
    max_answers: usize,
    strategy: LabelStrategy,
) -> Result<(Answer, usize), OptError> {
    let mut best: Option<(Answer, usize)> = None;
    for item in answers.into_iter().take(max_answers) {
        let answer = match item {
            Ok(a) => a,
            // A depth cut after some answers only means the stream is partial.
            Err(EngineError::DepthLimitExceeded(_)) if best.is_some() => break,
            Err(e) => return Err(e.into()),
        };
        let mut store = answer.store.clone();
        let mut search = Search {
            delta: &answer.delta,
            reference,
            order: answer.label_order(),
            strategy,
            nodes: 0,
            cap: best.as_ref().map(|(_, c)| *c),
            best: None,
        };
        search.go(
            0,
            &mut vec![false; reference.len()],
            0,
            &Bindings::new(),
            &mut store,
        );
        if let Some((c, val, b)) = search.best {
            let mut a = answer.labelled(val.clone());
            a.delta = answer
                .delta
                .iter()
                .map(|h| ground(&b.resolve(h), &val))
                .collect();
            a.bindings = answer
                .bindings
                .iter()
                .map(|(n, t)| (n.clone(), ground(&b.resolve(t), &val)))
                .collect();
            best = Some((a, c));
            if c == 0 {
                break;
            }
        }
    }
    best.ok_or(OptError::EmptyStream)
}
