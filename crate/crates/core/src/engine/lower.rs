//! Translation of constraint literals into store constraints.

use crate::fd::{AtomSet, Constraint, Domain, DomainBox, FdTerm, IntSet, LinExpr, Operand, Store};
use crate::literal::{CLit, DomainSpec, RelOp};
use crate::subst::Bindings;
use crate::term::{Sym, Term};

use super::EngineError;

fn is_arith(f: &str, arity: usize) -> bool {
    matches!((f, arity), ("+", 2) | ("-", 2) | ("*", 2) | ("-", 1))
}

/// Whether `t` (already resolved) is an arithmetic expression rather than a
/// plain variable, constant or data term.
pub(crate) fn is_arith_term(t: &Term) -> bool {
    matches!(t, Term::Compound(f, args) if is_arith(f, args.len()))
}

fn lin(t: &Term) -> Result<LinExpr, EngineError> {
    match t {
        Term::Var(v) => Ok(LinExpr::var(*v)),
        Term::Int(i) => Ok(LinExpr::constant(*i)),
        Term::Compound(f, a) if is_arith(f, a.len()) => {
            if a.len() == 1 {
                return Ok(lin(&a[0])?.scale(-1));
            }
            let (x, y) = (lin(&a[0])?, lin(&a[1])?);
            match &**f {
                "+" => Ok(x.add(&y)),
                "-" => Ok(x.sub(&y)),
                _ => match (x.as_const(), y.as_const()) {
                    (Some(k), _) => Ok(y.scale(k)),
                    (_, Some(k)) => Ok(x.scale(k)),
                    _ => Err(EngineError::Type(format!("non-linear product `{}`", t))),
                },
            }
        }
        _ => Err(EngineError::Type(format!(
            "`{}` is not an integer expression",
            t
        ))),
    }
}

pub(crate) fn operand(t: &Term) -> Result<Operand, EngineError> {
    match t {
        Term::Atom(a) => Ok(Operand::Atom(a.clone())),
        _ => Ok(Operand::Lin(lin(t)?)),
    }
}

fn fd_term(t: &Term) -> Result<FdTerm, EngineError> {
    match t {
        Term::Compound(f, args) if !is_arith(f, args.len()) => {
            let ops = args
                .iter()
                .map(|a| match a {
                    Term::Compound(..) => Err(EngineError::Type(format!(
                        "term constraint argument `{}` must be a variable or constant",
                        a
                    ))),
                    _ => operand(a),
                })
                .collect::<Result<_, _>>()?;
            Ok(FdTerm::App(f.clone(), ops))
        }
        _ => Ok(FdTerm::Op(operand(t)?)),
    }
}

pub(crate) fn domain(spec: &DomainSpec, b: &Bindings, s: &Store) -> Result<Domain, EngineError> {
    let ground = |t: &Term| b.resolve_fixed(t, s);
    match spec {
        DomainSpec::Range(lo, hi) => match (ground(lo), ground(hi)) {
            (Term::Int(lo), Term::Int(hi)) => Ok(Domain::Int(IntSet::range(lo, hi))),
            (lo, hi) => Err(EngineError::Type(format!(
                "domain bounds `{}..{}` are not integers",
                lo, hi
            ))),
        },
        DomainSpec::Set(items) => {
            let items: Vec<Term> = items.iter().map(ground).collect();
            if items.iter().all(|t| matches!(t, Term::Int(_))) {
                Ok(Domain::Int(IntSet::from_values(items.iter().map(
                    |t| match t {
                        Term::Int(i) => *i,
                        _ => unreachable!(),
                    },
                ))))
            } else if items.iter().all(|t| matches!(t, Term::Atom(_))) {
                let atoms: Vec<Sym> = items
                    .into_iter()
                    .map(|t| match t {
                        Term::Atom(a) => a,
                        _ => unreachable!(),
                    })
                    .collect();
                Ok(Domain::Atom(AtomSet::new(atoms)))
            } else {
                Err(EngineError::Type(
                    "domain lists must be all integers or all atoms".into(),
                ))
            }
        }
    }
}

/// Store form of a constraint literal under the current bindings.
pub(crate) fn lower(c: &CLit, b: &Bindings, s: &Store) -> Result<Constraint, EngineError> {
    let r = |t: &Term| b.resolve_fixed(t, s);
    Ok(match c {
        CLit::Rel(op, x, y) => Constraint::Rel(*op, operand(&r(x))?, operand(&r(y))?),
        CLit::TermEq(x, y) => Constraint::TermEq(fd_term(&r(x))?, fd_term(&r(y))?),
        CLit::TermNeq(x, y) => Constraint::TermNeq(fd_term(&r(x))?, fd_term(&r(y))?),
        CLit::And(x, y) => Constraint::and(lower(x, b, s)?, lower(y, b, s)?),
        CLit::Or(x, y) => Constraint::or(lower(x, b, s)?, lower(y, b, s)?),
        CLit::In(x, d) => Constraint::In(operand(&r(x))?, DomainBox(domain(d, b, s)?)),
        CLit::NotIn(x, d) => Constraint::NotIn(operand(&r(x))?, DomainBox(domain(d, b, s)?)),
    })
}

/// The variable/term pairs that would have to be equal for `a = b`, or
/// `None` when the terms clash. Nothing is bound.
pub(crate) fn eq_pairs(a: &Term, b: &Term, bind: &Bindings, out: &mut Vec<(Term, Term)>) -> bool {
    let a = bind.walk(a);
    let b = bind.walk(b);
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) if x == y => true,
        (Term::Var(_), _) | (_, Term::Var(_)) => {
            out.push((a.clone(), b.clone()));
            true
        }
        (Term::Int(i), Term::Int(j)) => i == j,
        (Term::Atom(p), Term::Atom(q)) => p == q,
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g
                && xs.len() == ys.len()
                && xs
                    .iter()
                    .zip(ys.iter())
                    .all(|(x, y)| eq_pairs(x, y, bind, out))
        }
        _ => false,
    }
}

/// A pair lives entirely in the store when each side is a store variable or
/// a constant, with at least one store variable.
fn store_side(t: &Term, s: &Store) -> Option<Operand> {
    match t {
        Term::Var(v) if s.is_declared(*v) => Some(Operand::var(*v)),
        Term::Int(i) => Some(Operand::int(*i)),
        Term::Atom(a) => Some(Operand::Atom(a.clone())),
        _ => None,
    }
}

/// Store constraint equivalent to the conjunction of equalities, if every
/// pair is store-level.
pub(crate) fn pairs_to_store(pairs: &[(Term, Term)], s: &Store) -> Option<Constraint> {
    let mut out: Option<Constraint> = None;
    for (x, y) in pairs {
        let c = Constraint::rel(RelOp::Eq, store_side(x, s)?, store_side(y, s)?);
        out = Some(match out {
            None => c,
            Some(prev) => Constraint::and(prev, c),
        });
    }
    out
}
