use crate::fd::Value;
use crate::literal::{CLit, Literal, RelOp};
use crate::subst::{standardize_apart, unify, Bindings};
use crate::term::Term;

use super::lower::{domain, eq_pairs, is_arith_term, lower, pairs_to_store};
use super::state::{Diseq, Goal, State};
use super::{Engine, EngineError, Step};

/// Cheap pre-filter: can `pat` (whose variables are all fresh) possibly
/// unify with `t`? Repeated pattern variables are not checked.
pub(crate) fn may_match(pat: &Term, t: &Term, b: &Bindings) -> bool {
    match (pat, b.walk(t)) {
        (Term::Var(_), _) | (_, Term::Var(_)) => true,
        (Term::Int(i), Term::Int(j)) => *i == j,
        (Term::Atom(p), Term::Atom(q)) => *p == q,
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            *f == g
                && xs.len() == ys.len()
                && xs.iter().zip(ys.iter()).all(|(x, y)| may_match(x, y, b))
        }
        _ => false,
    }
}

/// Same as `may_match` but both sides live in the current derivation.
fn may_unify(a: &Term, c: &Term, b: &Bindings) -> bool {
    match (b.walk(a), b.walk(c)) {
        (Term::Var(_), _) | (_, Term::Var(_)) => true,
        (Term::Int(i), Term::Int(j)) => i == j,
        (Term::Atom(p), Term::Atom(q)) => p == q,
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g
                && xs.len() == ys.len()
                && xs.iter().zip(ys.iter()).all(|(x, y)| may_unify(x, y, b))
        }
        _ => false,
    }
}

fn non_arith(st: &State, a: &Term, b: &Term) -> bool {
    !is_arith_term(&st.bindings.walk(a)) && !is_arith_term(&st.bindings.walk(b))
}

impl Engine {
    /// Selects the first goal and reduces it.
    pub fn reduce_step(&self, mut st: State) -> Result<Step, EngineError> {
        let Some((goal, rest)) = st.goals.pop() else {
            return Ok(Step::Answer(st));
        };
        st.goals = rest;
        let branches = match goal {
            Goal::Lit(l) => self.positive(st, l)?,
            Goal::Deny(d) => self.denial(st, &d)?,
        };
        Ok(Step::Branches(branches))
    }

    fn positive(&self, mut st: State, lit: Literal) -> Result<Vec<State>, EngineError> {
        match lit {
            Literal::Constraint(c) => Ok(self.constrain(st, &c)?.into_iter().collect()),
            Literal::Naf(t) => Err(EngineError::Type(format!(
                "uncompiled negation `not {}`",
                t
            ))),
            Literal::Atom(t) => {
                let key = t
                    .pred_key()
                    .ok_or_else(|| EngineError::Type(format!("`{}` is not callable", t)))?;
                if let Some(holds) = self.builtin(&t) {
                    Ok(if holds { vec![st] } else { Vec::new() })
                } else if self.theory.is_abducible(&key) {
                    let budget = self.config.check_budget;
                    if budget > 0 && st.store.satisfiable(budget) == Some(false) {
                        return Ok(Vec::new());
                    }
                    Ok(self.abduce(st, &t))
                } else if self.theory.is_defined(&key) {
                    Ok(self.resolve(st, &t))
                } else if self.is_empty_pred(&key) {
                    Ok(Vec::new())
                } else {
                    Err(EngineError::UnknownPredicate(key))
                }
            }
        }
    }

    /// `true`, `fail` and `false`, unless the program defines them.
    pub(crate) fn builtin(&self, t: &Term) -> Option<bool> {
        let Term::Atom(a) = t else { return None };
        let key = t.pred_key()?;
        if self.theory.is_defined(&key) || self.theory.is_abducible(&key) {
            return None;
        }
        match &**a {
            "true" => Some(true),
            "fail" | "false" => Some(false),
            _ => None,
        }
    }

    /// One branch per clause whose head unifies with `t`, body goals first.
    fn resolve(&self, st: State, t: &Term) -> Vec<State> {
        let key = t.pred_key().unwrap();
        let mut out = Vec::new();
        for &ci in self.theory.clause_indices(&key) {
            let clause = self.theory.clause(ci);
            if !may_match(&clause.head, t, &st.bindings) {
                continue;
            }
            let mut s = st.clone();
            s.depth += 1;
            let c = standardize_apart(clause, &mut s.next_var);
            if unify(&c.head, t, &mut s.bindings, &mut s.store).is_err() || !recheck_diseqs(&mut s)
            {
                continue;
            }
            s.goals = s.goals.push_all(c.body.into_iter().map(Goal::Lit));
            out.push(s);
        }
        out
    }

    /// Reuse branches (one per unifiable hypothesis, in order of creation)
    /// followed by the branch that abduces a new hypothesis.
    pub(crate) fn abduce(&self, st: State, t: &Term) -> Vec<State> {
        let key = t.pred_key();
        let mut out = Vec::new();
        for h in st.delta.iter() {
            if h.pred_key() != key || !may_unify(h, t, &st.bindings) {
                continue;
            }
            let mut s = st.clone();
            if unify(h, t, &mut s.bindings, &mut s.store).is_ok() && recheck_diseqs(&mut s) {
                out.push(s);
            }
        }
        let mut s = st;
        if self.assume(&mut s, t) {
            out.push(s);
        }
        out
    }

    /// Adds `t` as a new hypothesis distinct from all existing ones of the
    /// same predicate, and schedules the denials it triggers. Returns false
    /// if it cannot be distinct.
    pub fn assume(&self, st: &mut State, t: &Term) -> bool {
        let t = st.bindings.resolve(t);
        if st.excluded.contains(&t) {
            return false;
        }
        let key = t.pred_key();
        let same: Vec<Term> = st
            .delta
            .iter()
            .filter(|h| h.pred_key() == key)
            .cloned()
            .collect();
        for h in &same {
            if !add_diseq(st, &t, h) {
                return false;
            }
        }
        st.delta.push_back(t.clone());
        let mut triggered = Vec::new();
        if let Some(ws) = key.as_ref().and_then(|k| st.watches.get(k)) {
            for w in ws.iter() {
                if let Some(d) = self.resolve_denial(st, &w.denial, w.idx, &t) {
                    if d.lits.is_empty() {
                        return false;
                    }
                    triggered.push(d);
                }
            }
        }
        // Shortest first: they are the likeliest to fail outright.
        triggered.sort_by_key(|d| d.lits.len());
        st.goals = st.goals.push_all(triggered.into_iter().map(Goal::Deny));
        true
    }

    /// Imposes a constraint literal. `None` when it is inconsistent.
    pub(crate) fn constrain(&self, mut st: State, c: &CLit) -> Result<Option<State>, EngineError> {
        let ok = match c {
            CLit::And(a, b) => match self.constrain(st, a)? {
                Some(s) => return self.constrain(s, b),
                None => return Ok(None),
            },
            CLit::TermEq(a, b) => unify_state(&mut st, a, b),
            CLit::Rel(RelOp::Eq, a, b) if non_arith(&st, a, b) => unify_state(&mut st, a, b),
            CLit::TermNeq(a, b) => add_diseq(&mut st, a, b) && recheck_diseqs(&mut st),
            CLit::Rel(RelOp::Neq, a, b) if non_arith(&st, a, b) => {
                add_diseq(&mut st, a, b) && recheck_diseqs(&mut st)
            }
            CLit::In(x, spec) => {
                let d = domain(spec, &st.bindings, &st.store)?;
                match st.bindings.resolve_fixed(x, &st.store) {
                    Term::Var(v) => st.store.declare(v, d).is_ok() && recheck_diseqs(&mut st),
                    Term::Int(i) => d.contains(&Value::Int(i)),
                    Term::Atom(a) => d.contains(&Value::Atom(a)),
                    other => {
                        return Err(EngineError::Type(format!(
                            "`{}` cannot have a domain",
                            other
                        )))
                    }
                }
            }
            _ => {
                let con = lower(c, &st.bindings, &st.store)?;
                st.store.post(con).is_ok() && recheck_diseqs(&mut st)
            }
        };
        Ok(if ok { Some(st) } else { None })
    }
}

pub(crate) fn unify_state(st: &mut State, a: &Term, b: &Term) -> bool {
    unify(a, b, &mut st.bindings, &mut st.store).is_ok() && recheck_diseqs(st)
}

/// Imposes `a ≠ b`. Disequalities that reduce to store variables go to the
/// store; the rest wait for more bindings.
pub(crate) fn add_diseq(st: &mut State, a: &Term, b: &Term) -> bool {
    let mut pairs = Vec::new();
    if !eq_pairs(a, b, &st.bindings, &mut pairs) {
        return true;
    }
    if pairs.is_empty() {
        return false;
    }
    if let Some(c) = pairs_to_store(&pairs, &st.store) {
        return st.store.post(c.negate()).is_ok();
    }
    let mut vars = Vec::new();
    for (x, y) in &pairs {
        x.collect_vars(&mut vars);
        y.collect_vars(&mut vars);
    }
    vars.sort_unstable();
    vars.dedup();
    let watch = vars.into_iter().map(|v| (v, st.store.is_declared(v))).collect();
    st.diseqs.push_back(Diseq { a: a.clone(), b: b.clone(), watch });
    true
}

/// Re-examines the pending disequalities affected by new bindings or
/// declarations.
pub(crate) fn recheck_diseqs(st: &mut State) -> bool {
    if !st.diseqs.iter().any(|d| d.stale(st)) {
        return true;
    }
    let pending = std::mem::take(&mut st.diseqs);
    for d in pending.iter() {
        if !d.stale(st) {
            st.diseqs.push_back(d.clone());
        } else if !add_diseq(st, &d.a, &d.b) {
            return false;
        }
    }
    true
}
