use crate::literal::RelOp;
use crate::term::Var;

use super::constraint::{Constraint, Operand};
use super::domain::Value;
use super::store::{Mark, Store};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum LabelStrategy {
    /// Variables in the order given.
    #[default]
    InputOrder,
    /// Smallest domain first, ties broken by lowest variable id.
    FirstFail,
}

/// A ground assignment for the labelled variables, in the order requested.
pub type Valuation = Vec<(Var, Value)>;

pub(crate) fn fix(v: Var, val: &Value) -> Constraint {
    let rhs = match val {
        Value::Int(i) => Operand::int(*i),
        Value::Atom(a) => Operand::Atom(a.clone()),
    };
    Constraint::rel(RelOp::Eq, Operand::var(v), rhs)
}

struct Frame {
    var: Var,
    values: Vec<Value>,
    next: usize,
    mark: Option<Mark>,
}

/// Depth-first enumeration of the valuations of `vars` that satisfy the
/// store, propagating after every assignment. The store is returned to its
/// original state when the iterator is exhausted or dropped.
pub struct Labeling<'s> {
    store: &'s mut Store,
    vars: Vec<Var>,
    strategy: LabelStrategy,
    stack: Vec<Frame>,
    root: Option<Mark>,
    started: bool,
    done: bool,
}

impl Store {
    pub fn label(&mut self, vars: &[Var], strategy: LabelStrategy) -> Labeling<'_> {
        let mut vs: Vec<Var> = Vec::new();
        for v in vars {
            if !vs.contains(v) {
                vs.push(*v);
            }
        }
        Labeling {
            store: self,
            vars: vs,
            strategy,
            stack: Vec::new(),
            root: None,
            started: false,
            done: false,
        }
    }

    /// First valuation, if any, leaving the store untouched.
    pub fn first_solution(&mut self, vars: &[Var], strategy: LabelStrategy) -> Option<Valuation> {
        self.label(vars, strategy).next()
    }
}

impl Store {
    /// Whether some valuation of all store variables satisfies every
    /// constraint, searching first-fail with at most `budget` assignments.
    /// `None` when the budget runs out first.
    pub fn satisfiable(&mut self, budget: usize) -> Option<bool> {
        if self.is_failed() {
            return Some(false);
        }
        let vars = self.vars();
        let mut left = budget;
        let root = self.snapshot();
        let out = self.sat_search(&vars, &mut left);
        self.restore(root).expect("satisfiability marks are LIFO");
        out
    }

    fn sat_search(&mut self, vars: &[Var], left: &mut usize) -> Option<bool> {
        let Some(var) = vars
            .iter()
            .copied()
            .filter(|v| self.domain(*v).map_or(false, |d| d.size() > 1))
            .min_by_key(|v| (self.domain(*v).map_or(0, |d| d.size()), *v))
        else {
            return Some(true);
        };
        let values = self.domain(var).map(|d| d.values()).unwrap_or_default();
        let mut exhausted = true;
        for val in values {
            if *left == 0 {
                return None;
            }
            *left -= 1;
            let m = self.snapshot();
            let r = if self.post(fix(var, &val)).is_ok() { self.sat_search(vars, left) } else { Some(false) };
            self.restore(m).expect("satisfiability marks are LIFO");
            match r {
                Some(true) => return Some(true),
                None => exhausted = false,
                Some(false) => {}
            }
        }
        if exhausted {
            Some(false)
        } else {
            None
        }
    }
}

impl Labeling<'_> {
    fn select(&self) -> Option<Var> {
        let open = self
            .vars
            .iter()
            .copied()
            .filter(|v| self.store.domain(*v).map_or(false, |d| d.size() > 1));
        match self.strategy {
            LabelStrategy::InputOrder => open.into_iter().next(),
            LabelStrategy::FirstFail => {
                open.min_by_key(|v| (self.store.domain(*v).map_or(0, |d| d.size()), *v))
            }
        }
    }

    fn valuation(&self) -> Valuation {
        self.vars
            .iter()
            .filter_map(|v| self.store.value(*v).map(|val| (*v, val)))
            .collect()
    }

    /// Descends from the current node: either emits a leaf or pushes a frame.
    fn descend(&mut self) -> Option<Valuation> {
        match self.select() {
            None => Some(self.valuation()),
            Some(var) => {
                let values = self
                    .store
                    .domain(var)
                    .map(|d| d.values())
                    .unwrap_or_default();
                self.stack.push(Frame {
                    var,
                    values,
                    next: 0,
                    mark: None,
                });
                None
            }
        }
    }

    fn finish(&mut self) {
        self.done = true;
        self.stack.clear();
        if let Some(m) = self.root.take() {
            let _ = self.store.restore(m);
        }
    }
}

impl Iterator for Labeling<'_> {
    type Item = Valuation;

    fn next(&mut self) -> Option<Valuation> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if self.store.is_failed() {
                self.finish();
                return None;
            }
            self.root = Some(self.store.snapshot());
            // Undeclared variables cannot be enumerated.
            if self.vars.iter().any(|v| !self.store.is_declared(*v)) {
                self.vars.retain(|v| self.store.is_declared(*v));
            }
            if let Some(leaf) = self.descend() {
                // Nothing to branch on: a single valuation.
                self.stack.clear();
                let out = leaf;
                self.done = true;
                if let Some(m) = self.root.take() {
                    let _ = self.store.restore(m);
                }
                return Some(out);
            }
        }
        loop {
            let Some(top) = self.stack.last_mut() else {
                self.finish();
                return None;
            };
            if let Some(m) = top.mark.take() {
                self.store.restore(m).expect("labelling marks are LIFO");
            }
            if top.next >= top.values.len() {
                self.stack.pop();
                continue;
            }
            let val = top.values[top.next].clone();
            top.next += 1;
            let var = top.var;
            let m = self.store.snapshot();
            self.stack.last_mut().unwrap().mark = Some(m);
            if self.store.post(fix(var, &val)).is_err() {
                continue;
            }
            if let Some(leaf) = self.descend() {
                return Some(leaf);
            }
        }
    }
}

impl Drop for Labeling<'_> {
    fn drop(&mut self) {
        if !self.done {
            // Unwind frame marks innermost first, then the root.
            while let Some(mut f) = self.stack.pop() {
                if let Some(m) = f.mark.take() {
                    let _ = self.store.restore(m);
                }
            }
            self.finish();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::domain::{Domain, IntSet};

    fn int_store(doms: &[(u32, i64, i64)]) -> Store {
        let mut s = Store::new();
        for &(v, lo, hi) in doms {
            s.declare(Var(v), Domain::Int(IntSet::range(lo, hi)))
                .unwrap();
        }
        s
    }

    #[test]
    fn lt_pair_has_single_solution() {
        let mut s = int_store(&[(0, 1, 2), (1, 1, 2)]);
        s.post(Constraint::rel(
            RelOp::Lt,
            Operand::var(Var(0)),
            Operand::var(Var(1)),
        ))
        .unwrap();
        let sols: Vec<_> = s
            .label(&[Var(0), Var(1)], LabelStrategy::InputOrder)
            .collect();
        assert_eq!(
            sols,
            vec![vec![(Var(0), Value::Int(1)), (Var(1), Value::Int(2))]]
        );
    }

    #[test]
    fn singleton_and_empty() {
        let mut s = int_store(&[(0, 7, 7)]);
        let sols: Vec<_> = s.label(&[Var(0)], LabelStrategy::FirstFail).collect();
        assert_eq!(sols, vec![vec![(Var(0), Value::Int(7))]]);

        let mut s = int_store(&[(0, 1, 3)]);
        for k in 1..=3 {
            let _ = s.post(Constraint::rel(
                RelOp::Neq,
                Operand::var(Var(0)),
                Operand::int(k),
            ));
        }
        assert_eq!(s.label(&[Var(0)], LabelStrategy::InputOrder).count(), 0);
    }

    #[test]
    fn labelling_leaves_store_unchanged() {
        let mut s = int_store(&[(0, 1, 3), (1, 1, 3)]);
        s.post(Constraint::rel(
            RelOp::Neq,
            Operand::var(Var(0)),
            Operand::var(Var(1)),
        ))
        .unwrap();
        let before = s.clone();
        assert_eq!(
            s.label(&[Var(0), Var(1)], LabelStrategy::FirstFail).count(),
            6
        );
        assert_eq!(s, before);
        let mut it = s.label(&[Var(0), Var(1)], LabelStrategy::InputOrder);
        it.next();
        drop(it);
        assert_eq!(s, before);
    }

    #[test]
    fn first_fail_picks_smallest_domain() {
        let mut s = int_store(&[(0, 1, 5), (1, 1, 2)]);
        let first = s
            .first_solution(&[Var(0), Var(1)], LabelStrategy::FirstFail)
            .unwrap();
        assert_eq!(
            first,
            vec![(Var(0), Value::Int(1)), (Var(1), Value::Int(1))]
        );
        let mut order = Vec::new();
        let sols: Vec<_> = s
            .label(&[Var(0), Var(1)], LabelStrategy::FirstFail)
            .collect();
        for sol in &sols {
            order.push((sol[0].1.clone(), sol[1].1.clone()));
        }
        // Y (smaller domain) varies slowest.
        assert_eq!(order[0], (Value::Int(1), Value::Int(1)));
        assert_eq!(order[1], (Value::Int(2), Value::Int(1)));
    }
}
