use std::rc::Rc;

use rustc_hash::FxBuildHasher;

use crate::fd::Store;
use crate::literal::Literal;
use crate::subst::Bindings;
use crate::term::{PredKey, Term, Var};

/// A negative goal `← L1, ..., Ln`, read as `¬∃ univ. L1 ∧ ... ∧ Ln`.
/// Variables not in `univ` are shared with the rest of the derivation.
#[derive(Clone, Debug)]
pub struct Denial {
    pub lits: Vec<Literal>,
    pub univ: Vec<Var>,
}

impl Denial {
    pub fn is_univ(&self, v: Var) -> bool {
        self.univ.binary_search(&v).is_ok()
    }

    pub fn new(lits: Vec<Literal>, mut univ: Vec<Var>) -> Self {
        univ.sort_unstable();
        univ.dedup();
        Denial { lits, univ }
    }
}

#[derive(Clone, Debug)]
pub enum Goal {
    Lit(Literal),
    Deny(Rc<Denial>),
}

#[derive(Debug)]
struct Node {
    goal: Goal,
    next: GoalList,
}

/// Persistent goal stack; pushing shares the tail between branches.
#[derive(Clone, Debug, Default)]
pub struct GoalList(Option<Rc<Node>>);

impl GoalList {
    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn pop(&self) -> Option<(Goal, GoalList)> {
        self.0.as_ref().map(|n| (n.goal.clone(), n.next.clone()))
    }

    pub fn push(&self, g: Goal) -> GoalList {
        GoalList(Some(Rc::new(Node {
            goal: g,
            next: self.clone(),
        })))
    }

    /// Pushes `gs` so that `gs[0]` ends up on top.
    pub fn push_all(
        &self,
        gs: impl IntoIterator<Item = Goal, IntoIter: DoubleEndedIterator>,
    ) -> GoalList {
        gs.into_iter()
            .rev()
            .fold(self.clone(), |acc, g| acc.push(g))
    }

    pub fn len(&self) -> usize {
        let mut n = 0;
        let mut cur = &self.0;
        while let Some(node) = cur {
            n += 1;
            cur = &node.next.0;
        }
        n
    }
}

/// A denial waiting for future hypotheses on `lits[idx]`.
#[derive(Clone, Debug)]
pub struct Watch {
    pub denial: Rc<Denial>,
    pub idx: usize,
}

/// A pending `a ≠ b`. It can only change status once one of the
/// variables it is waiting on is bound or becomes a store variable.
#[derive(Clone, Debug)]
pub struct Diseq {
    pub a: Term,
    pub b: Term,
    /// Each variable with whether it was a store variable when recorded.
    pub(crate) watch: Rc<[(Var, bool)]>,
}

impl Diseq {
    pub(crate) fn stale(&self, st: &State) -> bool {
        self.watch
            .iter()
            .any(|&(v, declared)| st.bindings.get(v).is_some() || st.store.is_declared(v) != declared)
    }
}

/// One node of the derivation: remaining goals, hypotheses so far and the
/// constraint state.
#[derive(Clone, Debug)]
pub struct State {
    pub goals: GoalList,
    pub bindings: Bindings,
    pub store: Store,
    pub delta: im::Vector<Term>,
    pub watches: im::HashMap<PredKey, im::Vector<Watch>, FxBuildHasher>,
    /// Disequalities that could not yet be handed to the store.
    pub diseqs: im::Vector<Diseq>,
    /// Ground negation hypotheses this branch has committed to leaving out.
    pub excluded: im::Vector<Term>,
    pub next_var: u32,
    pub depth: usize,
}

impl State {
    pub fn fresh_var(&mut self) -> Var {
        let v = Var(self.next_var);
        self.next_var += 1;
        v
    }

    /// The hypotheses with their current bindings applied.
    pub fn hypotheses(&self) -> Vec<Term> {
        self.delta
            .iter()
            .map(|h| self.bindings.resolve(h))
            .collect()
    }
}
