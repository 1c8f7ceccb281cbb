//! Random constraint stores and a brute-force evaluator that knows nothing
//! about propagation.

use std::collections::{BTreeMap, BTreeSet};

use aclp_core::fd::{
    AtomSet, Constraint, Domain, DomainBox, FdTerm, IntSet, LabelStrategy, LinExpr, Operand,
    Store, Value,
};
use aclp_core::literal::RelOp;
use aclp_core::term::{Sym, Var};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Assignment = BTreeMap<Var, Value>;

const ATOMS: [&str; 3] = ["a", "b", "c"];
const OPS: [RelOp; 6] = [RelOp::Eq, RelOp::Neq, RelOp::Lt, RelOp::Le, RelOp::Gt, RelOp::Ge];

#[derive(Clone, Debug)]
pub struct RandomStore {
    pub vars: Vec<(Var, Domain)>,
    pub cons: Vec<Constraint>,
}

fn int_domain(rng: &mut impl Rng) -> IntSet {
    let size = rng.gen_range(1..=9);
    let mut vals: Vec<i64> = (0..9).collect();
    vals.shuffle(rng);
    IntSet::from_values(vals.into_iter().take(size))
}

fn atom_domain(rng: &mut impl Rng) -> AtomSet {
    let size = rng.gen_range(1..=3);
    let mut vals = ATOMS.to_vec();
    vals.shuffle(rng);
    AtomSet::new(vals.into_iter().take(size).map(Sym::from))
}

/// Up to four variables (a quarter of them atomic) and up to six
/// constraints from the whole catalogue.
pub fn random_store(rng: &mut impl Rng) -> RandomStore {
    let n = rng.gen_range(1..=4);
    let vars: Vec<(Var, Domain)> = (0..n)
        .map(|i| {
            let d = if rng.gen_bool(0.25) {
                Domain::Atom(atom_domain(rng))
            } else {
                Domain::Int(int_domain(rng))
            };
            (Var(i), d)
        })
        .collect();
    let k = rng.gen_range(0..=6);
    let cons = (0..k).map(|_| random_constraint(rng, &vars, 2)).collect();
    RandomStore { vars, cons }
}

fn ints(vars: &[(Var, Domain)]) -> Vec<Var> {
    vars.iter().filter(|(_, d)| d.is_int()).map(|(v, _)| *v).collect()
}

fn atoms(vars: &[(Var, Domain)]) -> Vec<Var> {
    vars.iter().filter(|(_, d)| !d.is_int()).map(|(v, _)| *v).collect()
}

fn lin(rng: &mut impl Rng, ints: &[Var]) -> LinExpr {
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        if let Some(v) = ints.choose(rng) {
            let c = *[-2, -1, 1, 1, 2].choose(rng).unwrap();
            terms.push((c, *v));
        }
    }
    LinExpr::new(terms, rng.gen_range(-3..=3))
}

fn any_operand(rng: &mut impl Rng, vars: &[(Var, Domain)]) -> Operand {
    match rng.gen_range(0..4) {
        0 | 1 => Operand::var(vars.choose(rng).unwrap().0),
        2 => Operand::int(rng.gen_range(0..9)),
        _ => Operand::atom(ATOMS.choose(rng).unwrap()),
    }
}

fn fd_term(rng: &mut impl Rng, vars: &[(Var, Domain)]) -> FdTerm {
    if rng.gen_bool(0.3) {
        return FdTerm::Op(any_operand(rng, vars));
    }
    let f = *["f", "g"].choose(rng).unwrap();
    let arity = if f == "f" { 2 } else { 1 };
    FdTerm::App(
        Sym::from(f),
        (0..arity).map(|_| any_operand(rng, vars)).collect(),
    )
}

pub fn random_constraint(rng: &mut impl Rng, vars: &[(Var, Domain)], depth: u32) -> Constraint {
    let (iv, av) = (ints(vars), atoms(vars));
    let pick = rng.gen_range(0..if depth > 0 { 9 } else { 6 });
    match pick {
        0..=2 if !iv.is_empty() => {
            let op = *OPS.choose(rng).unwrap();
            Constraint::rel(op, Operand::Lin(lin(rng, &iv)), Operand::Lin(lin(rng, &iv)))
        }
        0..=2 => {
            let op = *[RelOp::Eq, RelOp::Neq].choose(rng).unwrap();
            let b = if rng.gen_bool(0.5) {
                Operand::var(*av.choose(rng).unwrap())
            } else {
                Operand::atom(ATOMS.choose(rng).unwrap())
            };
            Constraint::rel(op, Operand::var(*av.choose(rng).unwrap()), b)
        }
        3 => {
            let (a, b) = (fd_term(rng, vars), fd_term(rng, vars));
            if rng.gen_bool(0.5) {
                Constraint::TermEq(a, b)
            } else {
                Constraint::TermNeq(a, b)
            }
        }
        4 | 5 => {
            let (v, d) = vars.choose(rng).unwrap();
            let d = match d {
                Domain::Int(_) => Domain::Int(int_domain(rng)),
                Domain::Atom(_) => Domain::Atom(atom_domain(rng)),
            };
            if pick == 4 {
                Constraint::In(Operand::var(*v), DomainBox(d))
            } else {
                Constraint::NotIn(Operand::var(*v), DomainBox(d))
            }
        }
        6 | 7 => {
            let a = random_constraint(rng, vars, depth - 1);
            let b = random_constraint(rng, vars, depth - 1);
            if pick == 6 {
                Constraint::and(a, b)
            } else {
                Constraint::or(a, b)
            }
        }
        _ => random_constraint(rng, vars, depth - 1).negate(),
    }
}

fn operand_value(o: &Operand, asg: &Assignment) -> Option<Value> {
    match o {
        Operand::Atom(a) => Some(Value::Atom(a.clone())),
        Operand::Lin(l) => {
            if let Some(v) = l.as_var() {
                return Some(asg[&v].clone());
            }
            let mut sum = l.constant;
            for (c, v) in &l.terms {
                match &asg[v] {
                    Value::Int(i) => sum += c * i,
                    Value::Atom(_) => return None,
                }
            }
            Some(Value::Int(sum))
        }
    }
}

#[derive(PartialEq)]
enum Shape {
    Val(Option<Value>),
    App(Sym, Vec<Option<Value>>),
}

fn shape(t: &FdTerm, asg: &Assignment) -> Shape {
    match t {
        FdTerm::Op(Operand::Atom(a)) => Shape::App(a.clone(), Vec::new()),
        FdTerm::Op(o) => match operand_value(o, asg) {
            Some(Value::Atom(a)) => Shape::App(a, Vec::new()),
            v => Shape::Val(v),
        },
        FdTerm::App(f, args) => Shape::App(
            f.clone(),
            args.iter().map(|a| operand_value(a, asg)).collect(),
        ),
    }
}

/// Truth of `c` under a total assignment. An atom in arithmetic, or an
/// ordering between an atom and anything, is false.
pub fn eval(c: &Constraint, asg: &Assignment) -> bool {
    match c {
        Constraint::Rel(op, a, b) => match (operand_value(a, asg), operand_value(b, asg)) {
            (Some(Value::Int(x)), Some(Value::Int(y))) => op.holds(x, y),
            (Some(x), Some(y)) => match op {
                RelOp::Eq => x == y,
                RelOp::Neq => x != y,
                _ => false,
            },
            _ => false,
        },
        Constraint::TermEq(a, b) => shape(a, asg) == shape(b, asg),
        Constraint::TermNeq(a, b) => shape(a, asg) != shape(b, asg),
        Constraint::And(a, b) => eval(a, asg) && eval(b, asg),
        Constraint::Or(a, b) => eval(a, asg) || eval(b, asg),
        Constraint::In(x, d) => operand_value(x, asg).is_some_and(|v| d.0.contains(&v)),
        Constraint::NotIn(x, d) => operand_value(x, asg).is_some_and(|v| !d.0.contains(&v)),
    }
}

fn all_assignments(vars: &[(Var, Domain)]) -> Vec<Assignment> {
    let mut out = vec![Assignment::new()];
    for (v, d) in vars {
        out = out
            .into_iter()
            .flat_map(|a| {
                d.values().into_iter().map(move |x| {
                    let mut b = a.clone();
                    b.insert(*v, x);
                    b
                })
            })
            .collect();
    }
    out
}

/// Solutions by enumerating every assignment of the declared domains.
pub fn brute(s: &RandomStore, extra: &[Constraint]) -> BTreeSet<Vec<Value>> {
    all_assignments(&s.vars)
        .into_iter()
        .filter(|a| s.cons.iter().chain(extra).all(|c| eval(c, a)))
        .map(|a| a.into_values().collect())
        .collect()
}

/// Solutions by posting to the store and labelling. Duplicate valuations
/// would collapse in the set, so their count is returned as well.
pub fn labelled(s: &RandomStore, extra: &[Constraint]) -> (BTreeSet<Vec<Value>>, usize) {
    let mut store = Store::new();
    for (v, d) in &s.vars {
        if store.declare(*v, d.clone()).is_err() {
            return (BTreeSet::new(), 0);
        }
    }
    for c in s.cons.iter().chain(extra) {
        if store.post(c.clone()).is_err() {
            return (BTreeSet::new(), 0);
        }
    }
    let order: Vec<Var> = s.vars.iter().map(|(v, _)| *v).collect();
    let mut n = 0;
    let mut out = BTreeSet::new();
    for val in store.label(&order, LabelStrategy::InputOrder) {
        n += 1;
        let m: BTreeMap<Var, Value> = val.into_iter().collect();
        out.insert(m.into_values().collect());
    }
    (out, n)
}
