//! Substitutions, renaming and store-aware unification.

use rustc_hash::FxBuildHasher;

use crate::fd::{Constraint, Operand, Store, Value};
use crate::literal::{Clause, Literal, RelOp};
use crate::term::{Term, Var};

/// Triangular substitution. `resolve` applies it fully, so applying the
/// result again is the identity.
#[derive(Clone, Default, Debug, PartialEq)]
pub struct Bindings {
    map: im::HashMap<Var, Term, FxBuildHasher>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.map.get(&v)
    }

    /// Follows variable bindings at the top level only.
    pub fn walk(&self, t: &Term) -> Term {
        let mut cur = t;
        while let Term::Var(v) = cur {
            match self.map.get(v) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur.clone()
    }

    pub fn resolve(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Compound(f, args) => {
                Term::Compound(f, args.iter().map(|a| self.resolve(a)).collect())
            }
            other => other,
        }
    }

    /// Like `resolve`, additionally replacing store variables whose domain
    /// is a singleton by their value.
    pub fn resolve_fixed(&self, t: &Term, store: &Store) -> Term {
        match self.walk(t) {
            Term::Var(v) => match store.value(v) {
                Some(Value::Int(i)) => Term::Int(i),
                Some(Value::Atom(a)) => Term::Atom(a),
                None => Term::Var(v),
            },
            Term::Compound(f, args) => Term::Compound(
                f,
                args.iter().map(|a| self.resolve_fixed(a, store)).collect(),
            ),
            other => other,
        }
    }

    pub fn resolve_lit(&self, l: &Literal) -> Literal {
        l.map_vars(&mut |v| self.resolve(&Term::Var(v)))
    }

    /// Binds an unbound variable. Callers guarantee `v` is unbound and the
    /// occurs check has passed.
    pub fn bind(&mut self, v: Var, t: Term) {
        debug_assert!(!self.map.contains_key(&v));
        self.map.insert(v, t);
    }

    fn occurs(&self, v: Var, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(w) => w == v,
            Term::Compound(_, args) => args.iter().any(|a| self.occurs(v, a)),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnifyFail;

fn const_operand(t: &Term) -> Option<Operand> {
    match t {
        Term::Int(i) => Some(Operand::int(*i)),
        Term::Atom(a) => Some(Operand::Atom(a.clone())),
        _ => None,
    }
}

/// Most general unifier for ordinary variables. Variables that have a
/// domain in `store` are never bound: equalities involving them are posted
/// as `#=` constraints. Occurs check is on.
pub fn unify(
    a: &Term,
    b: &Term,
    bindings: &mut Bindings,
    store: &mut Store,
) -> Result<(), UnifyFail> {
    let a = bindings.walk(a);
    let b = bindings.walk(b);
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) if x == y => Ok(()),
        (Term::Var(x), Term::Var(y)) => match (store.is_declared(*x), store.is_declared(*y)) {
            (true, true) => store
                .post(Constraint::rel(
                    RelOp::Eq,
                    Operand::var(*x),
                    Operand::var(*y),
                ))
                .map_err(|_| UnifyFail),
            (true, false) => {
                bindings.bind(*y, a.clone());
                Ok(())
            }
            (false, true) => {
                bindings.bind(*x, b.clone());
                Ok(())
            }
            (false, false) => {
                // Younger variable points at the older one.
                if x > y {
                    bindings.bind(*x, b.clone());
                } else {
                    bindings.bind(*y, a.clone());
                }
                Ok(())
            }
        },
        (Term::Var(x), t) | (t, Term::Var(x)) => {
            if store.is_declared(*x) {
                let op = const_operand(t).ok_or(UnifyFail)?;
                store
                    .post(Constraint::rel(RelOp::Eq, Operand::var(*x), op))
                    .map_err(|_| UnifyFail)
            } else if bindings.occurs(*x, t) {
                Err(UnifyFail)
            } else {
                bindings.bind(*x, t.clone());
                Ok(())
            }
        }
        (Term::Int(i), Term::Int(j)) if i == j => Ok(()),
        (Term::Atom(p), Term::Atom(q)) if p == q => Ok(()),
        (Term::Compound(f, xs), Term::Compound(g, ys)) if f == g && xs.len() == ys.len() => {
            for (x, y) in xs.iter().zip(ys.iter()) {
                unify(x, y, bindings, store)?;
            }
            Ok(())
        }
        _ => Err(UnifyFail),
    }
}

/// Renames a clause's local variables `0..n` to `counter..counter+n` and
/// advances the counter.
pub fn standardize_apart(clause: &Clause, counter: &mut u32) -> Clause {
    let base = *counter;
    *counter += clause.var_count().max(max_var_clause(clause));
    let mut shift = |v: Var| Term::Var(Var(base + v.0));
    Clause {
        head: clause.head.map_vars(&mut shift),
        body: clause.body.iter().map(|l| l.map_vars(&mut shift)).collect(),
        var_names: clause.var_names.clone(),
    }
}

fn max_var_clause(c: &Clause) -> u32 {
    let mut vs = c.head.vars();
    for l in &c.body {
        l.collect_vars(&mut vs);
    }
    vs.iter().map(|v| v.0 + 1).max().unwrap_or(0)
}

/// Renames literals whose variables are `0..n` by adding `base`.
pub fn shift_lits(lits: &[Literal], base: u32) -> Vec<Literal> {
    lits.iter()
        .map(|l| l.map_vars(&mut |v| Term::Var(Var(base + v.0))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::{Domain, IntSet};
    use crate::term::Sym;

    fn f(args: Vec<Term>) -> Term {
        Term::compound("f", args)
    }

    #[test]
    fn textbook_unification() {
        let mut b = Bindings::new();
        let mut s = Store::new();
        unify(
            &f(vec![Term::var(0)]),
            &f(vec![Term::atom("a")]),
            &mut b,
            &mut s,
        )
        .unwrap();
        assert_eq!(b.resolve(&Term::var(0)), Term::atom("a"));
    }

    #[test]
    fn self_unification_is_identity() {
        let mut b = Bindings::new();
        let mut s = Store::new();
        s.declare(Var(0), Domain::Int(IntSet::range(1, 3))).unwrap();
        let before = s.clone();
        unify(&Term::var(0), &Term::var(0), &mut b, &mut s).unwrap();
        assert!(b.is_empty());
        assert_eq!(s, before);
    }

    #[test]
    fn domain_variables_are_constrained_not_bound() {
        let mut b = Bindings::new();
        let mut s = Store::new();
        s.declare(Var(0), Domain::Int(IntSet::range(1, 2))).unwrap();
        assert_eq!(
            unify(&Term::var(0), &Term::Int(3), &mut b, &mut s),
            Err(UnifyFail)
        );
        let mut s = Store::new();
        s.declare(Var(0), Domain::Int(IntSet::range(1, 5))).unwrap();
        unify(&Term::var(0), &Term::Int(3), &mut b, &mut s).unwrap();
        assert!(b.is_empty());
        assert_eq!(s.value(Var(0)), Some(Value::Int(3)));
    }

    #[test]
    fn occurs_check() {
        let mut b = Bindings::new();
        let mut s = Store::new();
        assert_eq!(
            unify(&Term::var(0), &f(vec![Term::var(0)]), &mut b, &mut s),
            Err(UnifyFail)
        );
    }

    #[test]
    fn clash() {
        let mut b = Bindings::new();
        let mut s = Store::new();
        let g = Term::compound("g", vec![Term::var(0)]);
        assert_eq!(
            unify(&f(vec![Term::var(0)]), &g, &mut b, &mut s),
            Err(UnifyFail)
        );
        assert_eq!(
            unify(&Term::Int(1), &Term::atom("a"), &mut b, &mut s),
            Err(UnifyFail)
        );
    }

    #[test]
    fn renaming() {
        let c = Clause {
            head: Term::compound("p", vec![Term::var(0)]),
            body: vec![Literal::Atom(Term::compound("q", vec![Term::var(0)]))],
            var_names: vec![Sym::from("X")],
        };
        let mut counter = 7;
        let r = standardize_apart(&c, &mut counter);
        assert_eq!(r.head, Term::compound("p", vec![Term::var(7)]));
        assert_eq!(
            r.body[0],
            Literal::Atom(Term::compound("q", vec![Term::var(7)]))
        );
        let r2 = standardize_apart(&c, &mut counter);
        assert_eq!(r2.head, Term::compound("p", vec![Term::var(8)]));
        let ground = Clause::fact(Term::atom("g"));
        assert_eq!(standardize_apart(&ground, &mut counter), ground);
    }
}
