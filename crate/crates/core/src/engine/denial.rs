use std::collections::HashMap;
use std::rc::Rc;

use crate::fd::{Constraint, Domain, LabelStrategy, Operand, Truth};
use crate::literal::{CLit, Literal, RelOp};
use crate::subst::{standardize_apart, Bindings};
use crate::term::{Term, Var};

use super::lower::{eq_pairs, is_arith_term, lower, pairs_to_store};
use super::state::{Denial, Goal, State, Watch};
use super::step::{may_match, recheck_diseqs};
use super::{Engine, EngineError};

/// Largest domain split value by value when a denial flounders; larger
/// ones are bisected.
const SPLIT_LIMIT: u64 = 16;

/// Local unifier for a denial: universal variables are substituted inside
/// the denial only; equations on shared variables become literals.
struct DenialUnifier<'a> {
    denial: &'a Denial,
    bindings: &'a Bindings,
    local: HashMap<Var, Term>,
    pairs: Vec<(Term, Term)>,
}

impl<'a> DenialUnifier<'a> {
    fn new(denial: &'a Denial, bindings: &'a Bindings) -> Self {
        DenialUnifier {
            denial,
            bindings,
            local: HashMap::new(),
            pairs: Vec::new(),
        }
    }

    fn walk(&self, t: &Term) -> Term {
        let mut cur = t.clone();
        loop {
            match &cur {
                Term::Var(v) if self.denial.is_univ(*v) => match self.local.get(v) {
                    Some(next) => cur = next.clone(),
                    None => return cur,
                },
                Term::Var(_) => {
                    let next = self.bindings.walk(&cur);
                    if next == cur {
                        return cur;
                    }
                    cur = next;
                }
                _ => return cur,
            }
        }
    }

    fn occurs(&self, v: Var, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(w) => w == v,
            Term::Compound(_, args) => args.iter().any(|a| self.occurs(v, a)),
            _ => false,
        }
    }

    fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.walk(a);
        let b = self.walk(b);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(u), t) | (t, Term::Var(u)) if self.denial.is_univ(*u) => {
                if self.occurs(*u, t) {
                    return false;
                }
                self.local.insert(*u, t.clone());
                true
            }
            (Term::Var(_), _) | (_, Term::Var(_)) => {
                self.pairs.push((a.clone(), b.clone()));
                true
            }
            (Term::Int(i), Term::Int(j)) => i == j,
            (Term::Atom(p), Term::Atom(q)) => p == q,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys.iter()).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }

    fn apply(&self, t: &Term) -> Term {
        t.map_vars(&mut |v| match self.local.get(&v) {
            Some(next) => self.apply(next),
            None => Term::Var(v),
        })
    }

    /// The denial with literal `skip` removed, `extra` literals (and
    /// universals) added, and the substitution applied.
    fn build(self, skip: Option<usize>, extra: Vec<Literal>, extra_univ: Vec<Var>) -> Rc<Denial> {
        let mut lits: Vec<Literal> = Vec::new();
        for (x, y) in &self.pairs {
            lits.push(Literal::Constraint(CLit::TermEq(
                self.apply(x),
                self.apply(y),
            )));
        }
        lits.extend(
            extra
                .iter()
                .map(|l| l.map_vars(&mut |v| self.apply(&Term::Var(v)))),
        );
        for (i, l) in self.denial.lits.iter().enumerate() {
            if Some(i) != skip {
                lits.push(l.map_vars(&mut |v| self.apply(&Term::Var(v))));
            }
        }
        let mut univ: Vec<Var> = self
            .denial
            .univ
            .iter()
            .chain(extra_univ.iter())
            .copied()
            .collect();
        univ.retain(|v| !self.local.contains_key(v));
        Rc::new(Denial::new(lits, univ))
    }
}

enum Pick {
    Holds(usize),
    Fails,
    Bind(usize),
    Abducible(usize),
    Defined(usize),
    Undecided(usize),
    Naf(usize),
    Flounder,
}

fn has_univ(d: &Denial, l: &Literal) -> bool {
    let mut vs = Vec::new();
    l.collect_vars(&mut vs);
    vs.into_iter().any(|v| d.is_univ(v))
}

/// Equality sides for literals handled by unification.
fn eq_sides(st: &State, l: &Literal) -> Option<(Term, Term)> {
    match l {
        Literal::Constraint(CLit::TermEq(a, b)) => Some((a.clone(), b.clone())),
        Literal::Constraint(CLit::Rel(RelOp::Eq, a, b))
            if !is_arith_term(&st.bindings.walk(a)) && !is_arith_term(&st.bindings.walk(b)) =>
        {
            Some((a.clone(), b.clone()))
        }
        _ => None,
    }
}

fn neq_sides(st: &State, l: &CLit) -> Option<(Term, Term)> {
    match l {
        CLit::TermNeq(a, b) => Some((a.clone(), b.clone())),
        CLit::Rel(RelOp::Neq, a, b)
            if !is_arith_term(&st.bindings.walk(a)) && !is_arith_term(&st.bindings.walk(b)) =>
        {
            Some((a.clone(), b.clone()))
        }
        _ => None,
    }
}

fn eq_truth(st: &mut State, a: &Term, b: &Term) -> Truth {
    let mut pairs = Vec::new();
    if !eq_pairs(a, b, &st.bindings, &mut pairs) {
        return Truth::False;
    }
    if pairs.is_empty() {
        return Truth::True;
    }
    match pairs_to_store(&pairs, &st.store) {
        Some(c) => st.store.entails(&c),
        None => Truth::Unknown,
    }
}

fn has_plain_var(st: &State, c: &CLit) -> bool {
    let mut vs = Vec::new();
    c.collect_vars(&mut vs);
    vs.into_iter()
        .any(|v| match st.bindings.walk(&Term::Var(v)) {
            Term::Var(w) => !st.store.is_declared(w),
            t => t.vars().iter().any(|w| !st.store.is_declared(*w)),
        })
}

impl Engine {
    /// Truth of a constraint literal without universal variables.
    fn judge(&self, st: &mut State, c: &CLit) -> Result<Truth, EngineError> {
        let lit = Literal::Constraint(c.clone());
        if let Some((a, b)) = eq_sides(st, &lit) {
            return Ok(eq_truth(st, &a, &b));
        }
        if let Some((a, b)) = neq_sides(st, c) {
            return Ok(eq_truth(st, &a, &b).not());
        }
        if matches!(c, CLit::In(..) | CLit::NotIn(..)) && has_plain_var(st, c) {
            return Ok(Truth::Unknown);
        }
        let con = lower(c, &st.bindings, &st.store)?;
        Ok(st.store.entails(&con))
    }

    /// The store constraint equivalent to `c`, when all its variables are
    /// store variables.
    fn store_form(&self, st: &State, c: &CLit) -> Result<Option<Constraint>, EngineError> {
        let lit = Literal::Constraint(c.clone());
        let herbrand = eq_sides(st, &lit).map(|p| (p, false)).or_else(|| neq_sides(st, c).map(|p| (p, true)));
        if let Some(((a, b), neg)) = herbrand {
            let mut pairs = Vec::new();
            if !eq_pairs(&a, &b, &st.bindings, &mut pairs) || pairs.is_empty() {
                return Ok(None);
            }
            return Ok(pairs_to_store(&pairs, &st.store).map(|c| if neg { c.negate() } else { c }));
        }
        if has_plain_var(st, c) {
            return Ok(None);
        }
        Ok(Some(lower(c, &st.bindings, &st.store)?))
    }

    /// A denial made only of store constraints becomes the single
    /// constraint `not (c1 and ... and cn)`, with no branching.
    fn as_store_denial(&self, st: &State, d: &Denial) -> Result<Option<Constraint>, EngineError> {
        let mut conj: Option<Constraint> = None;
        for l in &d.lits {
            let Literal::Constraint(c) = l else { return Ok(None) };
            if has_univ(d, l) {
                return Ok(None);
            }
            let Some(c) = self.store_form(st, c)? else { return Ok(None) };
            conj = Some(match conj {
                None => c,
                Some(prev) => Constraint::and(prev, c),
            });
        }
        Ok(conj.map(|c| c.negate()))
    }

    /// Refutes abducible literal `i` against the current hypotheses and
    /// keeps the denial on watch for future ones.
    fn watch(&self, st: &mut State, d: &Rc<Denial>, i: usize) {
        let Literal::Atom(t) = &d.lits[i] else {
            unreachable!()
        };
        let key = t.pred_key().unwrap();
        let mut instances = Vec::new();
        for h in st.delta.iter() {
            if h.pred_key().as_ref() == Some(&key) {
                if let Some(nd) = self.resolve_denial(st, d, i, h) {
                    instances.push(Goal::Deny(nd));
                }
            }
        }
        let mut ws = st.watches.get(&key).cloned().unwrap_or_default();
        ws.push_back(Watch {
            denial: d.clone(),
            idx: i,
        });
        st.watches.insert(key, ws);
        st.goals = st.goals.push_all(instances);
    }

    fn pick(&self, st: &mut State, d: &Denial) -> Result<Pick, EngineError> {
        let mut bind = None;
        let mut abducible = None;
        let mut defined = None;
        let mut undecided = None;
        let mut naf = None;
        for (i, l) in d.lits.iter().enumerate() {
            let univ = has_univ(d, l);
            match l {
                Literal::Constraint(c) if !univ => match self.judge(st, c)? {
                    Truth::True => return Ok(Pick::Holds(i)),
                    Truth::False => return Ok(Pick::Fails),
                    Truth::Unknown => {
                        undecided.get_or_insert(i);
                    }
                },
                Literal::Constraint(_) => {
                    if bind.is_none() {
                        if let Some((a, b)) = eq_sides(st, l) {
                            let (a, b) = (st.bindings.walk(&a), st.bindings.walk(&b));
                            let univ_var = |t: &Term| matches!(t, Term::Var(v) if d.is_univ(*v));
                            if univ_var(&a)
                                || univ_var(&b)
                                || (a.as_var().is_none() && b.as_var().is_none())
                            {
                                bind = Some(i);
                            }
                        }
                    }
                }
                Literal::Atom(t) if self.builtin(t).is_some() => {
                    return Ok(if self.builtin(t) == Some(true) {
                        Pick::Holds(i)
                    } else {
                        Pick::Fails
                    });
                }
                Literal::Atom(t) => {
                    let key = t
                        .pred_key()
                        .ok_or_else(|| EngineError::Type(format!("`{}` is not callable", t)))?;
                    if self.theory.is_abducible(&key) {
                        if !univ && self.theory.naf_positive(&key).is_some() {
                            naf.get_or_insert(i);
                        } else {
                            abducible.get_or_insert(i);
                        }
                    } else if self.theory.is_defined(&key) {
                        defined.get_or_insert(i);
                    } else if self.is_empty_pred(&key) {
                        return Ok(Pick::Fails);
                    } else {
                        return Err(EngineError::UnknownPredicate(key));
                    }
                }
                Literal::Naf(t) => {
                    return Err(EngineError::Type(format!(
                        "uncompiled negation `not {}`",
                        t
                    )))
                }
            }
        }
        Ok(bind
            .map(Pick::Bind)
            .or(abducible.map(Pick::Abducible))
            .or(defined.map(Pick::Defined))
            .or(undecided.map(Pick::Undecided))
            .or(naf.map(Pick::Naf))
            .unwrap_or(Pick::Flounder))
    }

    /// Processes one literal of a denial. Returns the successor states:
    /// none when the denial is violated.
    pub(crate) fn denial(&self, mut st: State, d: &Rc<Denial>) -> Result<Vec<State>, EngineError> {
        if d.lits.is_empty() {
            return Ok(Vec::new());
        }
        match self.pick(&mut st, d)? {
            Pick::Fails => Ok(vec![st]),
            Pick::Holds(i) => {
                let rest =
                    DenialUnifier::new(d, &st.bindings).build(Some(i), Vec::new(), Vec::new());
                if rest.lits.is_empty() {
                    return Ok(Vec::new());
                }
                st.goals = st.goals.push(Goal::Deny(rest));
                Ok(vec![st])
            }
            Pick::Bind(i) => {
                let (a, b) = eq_sides(&st, &d.lits[i]).unwrap();
                let mut u = DenialUnifier::new(d, &st.bindings);
                if !u.unify(&a, &b) {
                    return Ok(vec![st]);
                }
                let next = u.build(Some(i), Vec::new(), Vec::new());
                if next.lits.is_empty() {
                    return Ok(Vec::new());
                }
                st.goals = st.goals.push(Goal::Deny(next));
                Ok(vec![st])
            }
            Pick::Abducible(i) => {
                self.watch(&mut st, d, i);
                Ok(vec![st])
            }
            Pick::Defined(i) => {
                let Literal::Atom(t) = &d.lits[i] else {
                    unreachable!()
                };
                let key = t.pred_key().unwrap();
                st.depth += 1;
                let mut instances = Vec::new();
                for &ci in self.theory.clause_indices(&key) {
                    let clause = self.theory.clause(ci);
                    if !may_match(&clause.head, t, &st.bindings) {
                        continue;
                    }
                    let base = st.next_var;
                    let c = standardize_apart(clause, &mut st.next_var);
                    // Clause variables are universal too.
                    let fresh = (base..st.next_var).map(Var);
                    let widened = Denial::new(
                        d.lits.clone(),
                        d.univ.iter().copied().chain(fresh).collect(),
                    );
                    let mut u = DenialUnifier::new(&widened, &st.bindings);
                    if !u.unify(t, &c.head) {
                        continue;
                    }
                    let nd = u.build(Some(i), c.body, Vec::new());
                    if nd.lits.is_empty() {
                        return Ok(Vec::new());
                    }
                    instances.push(Goal::Deny(nd));
                }
                st.goals = st.goals.push_all(instances);
                Ok(vec![st])
            }
            Pick::Undecided(i) => {
                let Literal::Constraint(c) = &d.lits[i] else {
                    unreachable!()
                };
                if let Some(neg) = self.as_store_denial(&st, d)? {
                    let ok = st.store.post(neg).is_ok() && recheck_diseqs(&mut st);
                    return Ok(if ok { vec![st] } else { Vec::new() });
                }
                let mut out = Vec::new();
                if let Some(s) = self.constrain(st.clone(), &c.negate())? {
                    out.push(s);
                }
                if d.lits.len() > 1 {
                    if let Some(mut s) = self.constrain(st, c)? {
                        let rest = DenialUnifier::new(d, &s.bindings).build(
                            Some(i),
                            Vec::new(),
                            Vec::new(),
                        );
                        s.goals = s.goals.push(Goal::Deny(rest));
                        out.push(s);
                    }
                }
                Ok(out)
            }
            Pick::Naf(i) => {
                let Literal::Atom(t) = &d.lits[i] else {
                    unreachable!()
                };
                let pos = self.theory.naf_positive(&t.pred_key().unwrap()).unwrap();
                let positive = Term::app(pos.name.clone(), t.args().to_vec());
                let ground = st.bindings.resolve(t);
                let ground = ground.is_ground().then_some(ground);
                if let Some(g) = &ground {
                    if st.excluded.contains(g) {
                        return Ok(vec![st]);
                    }
                    if st.hypotheses().contains(g) {
                        // Already assumed: only the rest of the denial is left.
                        let rest = DenialUnifier::new(d, &st.bindings).build(
                            Some(i),
                            Vec::new(),
                            Vec::new(),
                        );
                        if rest.lits.is_empty() {
                            return Ok(Vec::new());
                        }
                        st.goals = st.goals.push(Goal::Deny(rest));
                        return Ok(vec![st]);
                    }
                }
                let mut out = Vec::new();
                if d.lits.len() > 1 {
                    let rest =
                        DenialUnifier::new(d, &st.bindings).build(Some(i), Vec::new(), Vec::new());
                    for mut s in self.abduce(st.clone(), t) {
                        s.goals = s.goals.push(Goal::Deny(rest.clone()));
                        out.push(s);
                    }
                }
                // p holds, and `not_p` stays out of the hypotheses for good.
                match ground {
                    Some(g) => st.excluded.push_back(g),
                    None => self.watch(&mut st, d, i),
                }
                st.goals = st.goals.push(Goal::Lit(Literal::Atom(positive)));
                out.push(st);
                Ok(out)
            }
            Pick::Flounder => self.flounder(st, d),
        }
    }

    /// Resolves literal `idx` of `d` against hypothesis `h`.
    pub(crate) fn resolve_denial(
        &self,
        st: &State,
        d: &Rc<Denial>,
        idx: usize,
        h: &Term,
    ) -> Option<Rc<Denial>> {
        let Literal::Atom(t) = &d.lits[idx] else {
            return None;
        };
        let mut u = DenialUnifier::new(d, &st.bindings);
        if !u.unify(t, h) {
            return None;
        }
        Some(u.build(Some(idx), Vec::new(), Vec::new()))
    }

    /// Only constraints over universal variables remain: decide whether
    /// some values of the universals satisfy them, splitting the domains of
    /// the shared variables involved until that is settled.
    fn flounder(&self, st: State, d: &Rc<Denial>) -> Result<Vec<State>, EngineError> {
        let mut scratch = st.store.clone();
        let mut shared: Vec<Var> = Vec::new();
        for l in &d.lits {
            let Literal::Constraint(c) = l else {
                unreachable!()
            };
            let mut vs = Vec::new();
            c.collect_vars(&mut vs);
            for v in vs {
                if d.is_univ(v) {
                    continue;
                }
                for w in st.bindings.resolve(&Term::Var(v)).vars() {
                    if !st.store.is_declared(w) {
                        return Err(EngineError::Floundering(format!(
                            "denial `{}` constrains an unconstrained variable",
                            display_lits(&d.lits)
                        )));
                    }
                    if st.store.value(w).is_none() && !shared.contains(&w) {
                        shared.push(w);
                    }
                }
            }
            let con = lower(c, &st.bindings, &scratch)?;
            if scratch.post(con).is_err() {
                return Ok(vec![st]);
            }
        }
        if shared.is_empty() {
            let univ: Vec<Var> = d
                .univ
                .iter()
                .copied()
                .filter(|v| scratch.is_declared(*v))
                .collect();
            return Ok(
                if scratch
                    .first_solution(&univ, LabelStrategy::FirstFail)
                    .is_some()
                {
                    Vec::new()
                } else {
                    vec![st]
                },
            );
        }
        let v = *shared
            .iter()
            .min_by_key(|v| (st.store.domain(**v).map_or(0, |d| d.size()), **v))
            .unwrap();
        let dom = st.store.domain(v).unwrap().clone();
        let cuts: Vec<Constraint> = match &dom {
            Domain::Int(s) if s.size() > SPLIT_LIMIT => {
                let (lo, hi) = (s.min().unwrap(), s.max().unwrap());
                let mid = lo + (hi - lo) / 2;
                vec![
                    Constraint::rel(RelOp::Le, Operand::var(v), Operand::int(mid)),
                    Constraint::rel(RelOp::Gt, Operand::var(v), Operand::int(mid)),
                ]
            }
            _ => dom
                .values()
                .iter()
                .map(|val| crate::fd::fix(v, val))
                .collect(),
        };
        let mut out = Vec::new();
        for c in cuts {
            let mut s = st.clone();
            if s.store.post(c).is_ok() {
                s.goals = s.goals.push(Goal::Deny(d.clone()));
                out.push(s);
            }
        }
        Ok(out)
    }
}

fn display_lits(lits: &[Literal]) -> String {
    lits.iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
