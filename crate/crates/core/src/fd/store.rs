use std::collections::VecDeque;

use rustc_hash::FxHashMap as HashMap;
use std::sync::Arc;

use crate::literal::RelOp;
use crate::term::{Sym, Var};

use super::constraint::{Constraint, FdTerm, LinExpr, Operand};
use super::domain::{AtomSet, Domain, IntSet, Value};

/// Domain given to integer variables that reach the store undeclared.
pub const DEFAULT_RANGE: (i64, i64) = (-10_000_000, 10_000_000);

/// Above this size a binary equality falls back from arc to bounds consistency.
const AC_LIMIT: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("constraint store is unsatisfiable")]
    Unsat,
    #[error("variable {0} mixes integer and atomic values")]
    TypeMix(Var),
    #[error("stale snapshot mark")]
    StaleMark,
}

pub type StoreResult<T> = Result<T, StoreError>;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub(crate) fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    fn and(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }

    fn or(self, other: Truth) -> Truth {
        self.not().and(other.not()).not()
    }
}

/// Handle returned by [`Store::snapshot`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Mark {
    level: usize,
    trail_len: usize,
}

#[derive(Clone, Debug)]
enum Undo {
    Domain(Var, Option<Domain>),
    Pushed,
    Removed(usize, Arc<Constraint>),
    Watch(Var),
    Failed,
}

enum Prop {
    Active,
    Entailed,
    Replace(Constraint),
}

/// Finite-domain constraint store with propagation to fixpoint and
/// trail-based undo.
#[derive(Clone, Debug)]
pub struct Store {
    domains: HashMap<Var, Domain>,
    cons: Vec<Option<Arc<Constraint>>>,
    watch: HashMap<Var, Vec<usize>>,
    failed: bool,
    default_range: (i64, i64),
    trail: Vec<Undo>,
    marks: Vec<usize>,
    queue: VecDeque<usize>,
}

impl Default for Store {
    fn default() -> Self {
        Store::new()
    }
}

impl PartialEq for Store {
    fn eq(&self, other: &Self) -> bool {
        self.failed == other.failed
            && self.domains == other.domains
            && self.active().eq(other.active())
    }
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -floor_div(-a, b)
}

fn clamp64(v: i128) -> i64 {
    v.clamp(i64::MIN as i128 / 4, i64::MAX as i128 / 4) as i64
}

enum AtomSide<'a> {
    Const(&'a Sym),
    Var(Var),
}

impl Store {
    pub fn new() -> Self {
        Store::with_default_range(DEFAULT_RANGE.0, DEFAULT_RANGE.1)
    }

    pub fn with_default_range(lo: i64, hi: i64) -> Self {
        Store {
            domains: HashMap::default(),
            cons: Vec::new(),
            watch: HashMap::default(),
            failed: false,
            default_range: (lo, hi),
            trail: Vec::new(),
            marks: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.failed
    }

    pub fn domain(&self, v: Var) -> Option<&Domain> {
        self.domains.get(&v)
    }

    pub fn is_declared(&self, v: Var) -> bool {
        self.domains.contains_key(&v)
    }

    /// The value of `v` when its domain is a singleton.
    pub fn value(&self, v: Var) -> Option<Value> {
        self.domains.get(&v).and_then(Domain::single)
    }

    /// Declared variables in id order.
    pub fn vars(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self.domains.keys().copied().collect();
        vs.sort_unstable();
        vs
    }

    /// Active (not yet entailed) constraints in insertion order.
    pub fn active(&self) -> impl Iterator<Item = &Constraint> {
        self.cons.iter().filter_map(|c| c.as_deref())
    }

    fn record(&mut self, u: Undo) {
        if !self.marks.is_empty() {
            self.trail.push(u);
        }
    }

    fn fail(&mut self) -> StoreError {
        if !self.failed {
            self.failed = true;
            self.record(Undo::Failed);
        }
        self.queue.clear();
        StoreError::Unsat
    }

    fn set_domain(&mut self, v: Var, d: Domain) -> StoreResult<bool> {
        if d.is_empty() {
            return Err(self.fail());
        }
        let old = self.domains.get(&v);
        if old == Some(&d) {
            return Ok(false);
        }
        let old = self.domains.insert(v, d);
        self.record(Undo::Domain(v, old));
        if let Some(ws) = self.watch.get(&v) {
            for &i in ws {
                if self.cons[i].is_some() && !self.queue.contains(&i) {
                    self.queue.push_back(i);
                }
            }
        }
        Ok(true)
    }

    fn int_dom(&mut self, v: Var) -> StoreResult<IntSet> {
        match self.domains.get(&v) {
            Some(Domain::Int(s)) => Ok(s.clone()),
            Some(Domain::Atom(_)) => Err(StoreError::TypeMix(v)),
            None => {
                let d = IntSet::range(self.default_range.0, self.default_range.1);
                self.set_domain(v, Domain::Int(d.clone()))?;
                Ok(d)
            }
        }
    }

    fn ensure_declared(&mut self, c: &Constraint) -> StoreResult<()> {
        for v in c.vars() {
            if !self.domains.contains_key(&v) {
                self.int_dom(v)?;
            }
        }
        Ok(())
    }

    /// Restricts `v` to `d` (intersecting with any previous domain).
    pub fn declare(&mut self, v: Var, d: Domain) -> StoreResult<()> {
        if self.failed {
            return Err(StoreError::Unsat);
        }
        let new = match (self.domains.get(&v), &d) {
            (None, _) => d,
            (Some(Domain::Int(a)), Domain::Int(b)) => Domain::Int(a.intersect(b)),
            (Some(Domain::Atom(a)), Domain::Atom(b)) => Domain::Atom(a.intersect(b)),
            _ => return Err(StoreError::TypeMix(v)),
        };
        self.set_domain(v, new)?;
        self.propagate()
    }

    /// Adds a constraint and propagates to fixpoint.
    pub fn post(&mut self, c: Constraint) -> StoreResult<()> {
        if self.failed {
            return Err(StoreError::Unsat);
        }
        let r = self.add(c).and_then(|_| self.propagate());
        if r.is_err() {
            self.fail();
        }
        r
    }

    fn add(&mut self, c: Constraint) -> StoreResult<()> {
        match c {
            Constraint::And(a, b) => {
                self.add(*a)?;
                self.add(*b)
            }
            Constraint::TermEq(a, b) => match (a.shape(), b.shape()) {
                (Some((f, xs)), Some((g, ys))) => {
                    if f != g || xs.len() != ys.len() {
                        return Err(StoreError::Unsat);
                    }
                    for (x, y) in xs.iter().zip(ys) {
                        self.add(Constraint::Rel(RelOp::Eq, x.clone(), y.clone()))?;
                    }
                    Ok(())
                }
                (None, None) => match (a, b) {
                    (FdTerm::Op(x), FdTerm::Op(y)) => self.add(Constraint::Rel(RelOp::Eq, x, y)),
                    _ => unreachable!(),
                },
                // An integer-valued operand against a compound or atom.
                (None, Some((_, args))) | (Some((_, args)), None) => {
                    if args.is_empty() {
                        let (FdTerm::Op(x), FdTerm::Op(y)) = (a, b) else {
                            unreachable!()
                        };
                        self.add(Constraint::Rel(RelOp::Eq, x, y))
                    } else {
                        Err(StoreError::Unsat)
                    }
                }
            },
            Constraint::TermNeq(a, b) => match (a.shape(), b.shape()) {
                (Some((f, xs)), Some((g, ys))) => {
                    if f != g || xs.len() != ys.len() {
                        return Ok(());
                    }
                    let mut parts = xs
                        .iter()
                        .zip(ys)
                        .map(|(x, y)| Constraint::Rel(RelOp::Neq, x.clone(), y.clone()));
                    match parts.next() {
                        None => Err(StoreError::Unsat),
                        Some(first) => {
                            let disj = parts.fold(first, Constraint::or);
                            self.add(disj)
                        }
                    }
                }
                (Some((_, args)), None) | (None, Some((_, args))) if !args.is_empty() => Ok(()),
                _ => match (a, b) {
                    (FdTerm::Op(x), FdTerm::Op(y)) => self.add(Constraint::Rel(RelOp::Neq, x, y)),
                    _ => unreachable!(),
                },
            },
            c => {
                self.ensure_declared(&c)?;
                let idx = self.cons.len();
                let vars = c.vars();
                self.cons.push(Some(Arc::new(c)));
                self.record(Undo::Pushed);
                for v in vars {
                    self.watch.entry(v).or_default().push(idx);
                    self.record(Undo::Watch(v));
                }
                self.queue.push_back(idx);
                Ok(())
            }
        }
    }

    fn remove(&mut self, idx: usize) {
        if let Some(c) = self.cons[idx].take() {
            self.record(Undo::Removed(idx, c));
        }
    }

    fn propagate(&mut self) -> StoreResult<()> {
        while let Some(idx) = self.queue.pop_front() {
            let Some(c) = self.cons[idx].clone() else {
                continue;
            };
            match self.propagate_one(&c) {
                Ok(Prop::Active) => {}
                Ok(Prop::Entailed) => self.remove(idx),
                Ok(Prop::Replace(next)) => {
                    self.remove(idx);
                    if let Err(e) = self.add(next) {
                        self.fail();
                        return Err(e);
                    }
                }
                Err(e) => {
                    self.fail();
                    return Err(e);
                }
            }
        }
        Ok(())
    }

    fn is_atom_kind(&self, o: &Operand) -> bool {
        match o {
            Operand::Atom(_) => true,
            Operand::Lin(l) => l.as_var().map_or(false, |v| {
                matches!(self.domains.get(&v), Some(Domain::Atom(_)))
            }),
        }
    }

    fn propagate_one(&mut self, c: &Constraint) -> StoreResult<Prop> {
        match c {
            Constraint::Rel(op, a, b) => {
                let (aa, ba) = (self.is_atom_kind(a), self.is_atom_kind(b));
                if aa || ba {
                    if !matches!(op, RelOp::Eq | RelOp::Neq) {
                        let v = a.as_var().or_else(|| b.as_var()).unwrap_or(Var(u32::MAX));
                        return Err(StoreError::TypeMix(v));
                    }
                    if aa != ba {
                        // Integer against atom: never equal.
                        return if *op == RelOp::Eq {
                            Err(StoreError::Unsat)
                        } else {
                            Ok(Prop::Entailed)
                        };
                    }
                    self.atom_rel(*op, a, b)
                } else {
                    let (Operand::Lin(x), Operand::Lin(y)) = (a, b) else {
                        unreachable!()
                    };
                    self.lin_rel(*op, &x.sub(y))
                }
            }
            Constraint::Or(a, b) => Ok(match (self.eval(a), self.eval(b)) {
                (Truth::True, _) | (_, Truth::True) => Prop::Entailed,
                (Truth::False, Truth::False) => return Err(StoreError::Unsat),
                (Truth::False, _) => Prop::Replace((**b).clone()),
                (_, Truth::False) => Prop::Replace((**a).clone()),
                _ => Prop::Active,
            }),
            Constraint::In(x, d) | Constraint::NotIn(x, d) => {
                let positive = matches!(c, Constraint::In(..));
                if let Some(v) = x.as_var() {
                    let cur = self.domains.get(&v).cloned();
                    let new = match (cur, &d.0) {
                        (Some(Domain::Int(s)), Domain::Int(t)) => Domain::Int(if positive {
                            s.intersect(t)
                        } else {
                            s.subtract(t)
                        }),
                        (Some(Domain::Atom(s)), Domain::Atom(t)) => Domain::Atom(if positive {
                            s.intersect(t)
                        } else {
                            s.subtract(t)
                        }),
                        _ => return Err(StoreError::TypeMix(v)),
                    };
                    self.set_domain(v, new)?;
                    return Ok(Prop::Entailed);
                }
                match self.eval(c) {
                    Truth::True => Ok(Prop::Entailed),
                    Truth::False => Err(StoreError::Unsat),
                    Truth::Unknown => Ok(Prop::Active),
                }
            }
            // Decomposed by `add`; only reachable as Or replacements, which go through `add`.
            Constraint::And(..) | Constraint::TermEq(..) | Constraint::TermNeq(..) => {
                unreachable!("composite constraint stored undecomposed")
            }
        }
    }

    fn atom_side<'a>(&self, o: &'a Operand) -> AtomSide<'a> {
        match o {
            Operand::Atom(s) => AtomSide::Const(s),
            Operand::Lin(l) => AtomSide::Var(l.as_var().expect("atom-kind operand is a variable")),
        }
    }

    fn atoms_of(&self, v: Var) -> AtomSet {
        match self.domains.get(&v) {
            Some(Domain::Atom(s)) => s.clone(),
            _ => AtomSet::default(),
        }
    }

    fn atom_rel(&mut self, op: RelOp, a: &Operand, b: &Operand) -> StoreResult<Prop> {
        use AtomSide::*;
        let eq = op == RelOp::Eq;
        match (self.atom_side(a), self.atom_side(b)) {
            (Const(x), Const(y)) => {
                if (x == y) == eq {
                    Ok(Prop::Entailed)
                } else {
                    Err(StoreError::Unsat)
                }
            }
            (Var(v), Const(s)) | (Const(s), Var(v)) => {
                let d = self.atoms_of(v);
                let new = if eq {
                    d.intersect(&AtomSet::new([s.clone()]))
                } else {
                    d.remove(s)
                };
                self.set_domain(v, Domain::Atom(new))?;
                Ok(Prop::Entailed)
            }
            (Var(x), Var(y)) => {
                if x == y {
                    return if eq {
                        Ok(Prop::Entailed)
                    } else {
                        Err(StoreError::Unsat)
                    };
                }
                let (dx, dy) = (self.atoms_of(x), self.atoms_of(y));
                if eq {
                    let both = dx.intersect(&dy);
                    let single = both.len() == 1;
                    self.set_domain(x, Domain::Atom(both.clone()))?;
                    self.set_domain(y, Domain::Atom(dy.intersect(&both)))?;
                    Ok(if single { Prop::Entailed } else { Prop::Active })
                } else if dx.len() == 1 {
                    self.set_domain(y, Domain::Atom(dy.remove(&dx.items()[0])))?;
                    Ok(Prop::Entailed)
                } else if dy.len() == 1 {
                    self.set_domain(x, Domain::Atom(dx.remove(&dy.items()[0])))?;
                    Ok(Prop::Entailed)
                } else if dx.intersect(&dy).is_empty() {
                    Ok(Prop::Entailed)
                } else {
                    Ok(Prop::Active)
                }
            }
        }
    }

    fn term_bounds(&mut self, coeff: i64, v: Var) -> StoreResult<(i128, i128, IntSet)> {
        let d = self.int_dom(v)?;
        let (lo, hi) = (d.min().unwrap() as i128, d.max().unwrap() as i128);
        let c = coeff as i128;
        Ok(if c >= 0 {
            (c * lo, c * hi, d)
        } else {
            (c * hi, c * lo, d)
        })
    }

    /// Bounds reasoning for `lin <= 0`. Returns whether it is entailed.
    fn le_zero(&mut self, lin: &LinExpr) -> StoreResult<bool> {
        loop {
            let mut mins = Vec::with_capacity(lin.terms.len());
            let (mut total_min, mut total_max) = (lin.constant as i128, lin.constant as i128);
            for &(c, v) in &lin.terms {
                let (lo, hi, d) = self.term_bounds(c, v)?;
                total_min += lo;
                total_max += hi;
                mins.push((lo, d));
            }
            if total_min > 0 {
                return Err(StoreError::Unsat);
            }
            if total_max <= 0 {
                return Ok(true);
            }
            let mut changed = false;
            for (&(c, v), (lo, d)) in lin.terms.iter().zip(mins) {
                let slack = -(total_min - lo);
                let c = c as i128;
                let new = if c > 0 {
                    d.at_most(clamp64(floor_div(slack, c)))
                } else {
                    d.at_least(clamp64(ceil_div(slack, c)))
                };
                if new != d {
                    self.set_domain(v, Domain::Int(new))?;
                    changed = true;
                }
            }
            if !changed {
                return Ok(false);
            }
        }
    }

    fn lin_bounds(&mut self, lin: &LinExpr) -> StoreResult<(i128, i128)> {
        let (mut lo, mut hi) = (lin.constant as i128, lin.constant as i128);
        for &(c, v) in &lin.terms {
            let (a, b, _) = self.term_bounds(c, v)?;
            lo += a;
            hi += b;
        }
        Ok((lo, hi))
    }

    fn lin_rel(&mut self, op: RelOp, lin: &LinExpr) -> StoreResult<Prop> {
        let entailed = match op {
            RelOp::Le => self.le_zero(lin)?,
            RelOp::Lt => self.le_zero(&lin.add(&LinExpr::constant(1)))?,
            RelOp::Ge => self.le_zero(&lin.scale(-1))?,
            RelOp::Gt => self.le_zero(&lin.scale(-1).add(&LinExpr::constant(1)))?,
            RelOp::Eq => return self.lin_eq(lin),
            RelOp::Neq => return self.lin_neq(lin),
        };
        Ok(if entailed {
            Prop::Entailed
        } else {
            Prop::Active
        })
    }

    /// Splits `lin` into the unfixed terms and the constant contributed by
    /// the fixed ones.
    fn split_fixed(&mut self, lin: &LinExpr) -> StoreResult<(Vec<(i64, Var)>, i128)> {
        let mut open = Vec::new();
        let mut k = lin.constant as i128;
        for &(c, v) in &lin.terms {
            let d = self.int_dom(v)?;
            if d.size() == 1 {
                k += c as i128 * d.min().unwrap() as i128;
            } else {
                open.push((c, v));
            }
        }
        Ok((open, k))
    }

    fn lin_eq(&mut self, lin: &LinExpr) -> StoreResult<Prop> {
        loop {
            let a = self.le_zero(lin)?;
            let b = self.le_zero(&lin.scale(-1))?;
            if a && b {
                return Ok(Prop::Entailed);
            }
            let (open, k) = self.split_fixed(lin)?;
            match open.as_slice() {
                [] => {
                    return if k == 0 {
                        Ok(Prop::Entailed)
                    } else {
                        Err(StoreError::Unsat)
                    }
                }
                [(c, v)] => {
                    let c = *c as i128;
                    if k % c != 0 {
                        return Err(StoreError::Unsat);
                    }
                    let val = clamp64(-k / c);
                    let d = self.int_dom(*v)?;
                    if !d.contains(val) {
                        return Err(StoreError::Unsat);
                    }
                    self.set_domain(*v, Domain::Int(IntSet::singleton(val)))?;
                    return Ok(Prop::Entailed);
                }
                [(cx, x), (cy, y)] => {
                    let (dx, dy) = (self.int_dom(*x)?, self.int_dom(*y)?);
                    if dx.size() > AC_LIMIT || dy.size() > AC_LIMIT {
                        return Ok(Prop::Active);
                    }
                    let (cx, cy) = (*cx as i128, *cy as i128);
                    // cx*x + cy*y + k = 0
                    let support = |c1: i128, c2: i128, v: i64, other: &IntSet| {
                        let r = -(c1 * v as i128 + k);
                        r % c2 == 0 && other.contains(clamp64(r / c2))
                    };
                    let nx = IntSet::from_values(dx.iter().filter(|&v| support(cx, cy, v, &dy)));
                    let ny = IntSet::from_values(dy.iter().filter(|&v| support(cy, cx, v, &nx)));
                    let changed_x = self.set_domain(*x, Domain::Int(nx))?;
                    let changed_y = self.set_domain(*y, Domain::Int(ny))?;
                    if !changed_x && !changed_y {
                        return Ok(Prop::Active);
                    }
                }
                _ => return Ok(Prop::Active),
            }
        }
    }

    fn lin_neq(&mut self, lin: &LinExpr) -> StoreResult<Prop> {
        let (open, k) = self.split_fixed(lin)?;
        match open.as_slice() {
            [] => {
                if k != 0 {
                    Ok(Prop::Entailed)
                } else {
                    Err(StoreError::Unsat)
                }
            }
            [(c, v)] => {
                let c = *c as i128;
                if k % c == 0 {
                    let d = self.int_dom(*v)?;
                    self.set_domain(*v, Domain::Int(d.remove(clamp64(-k / c))))?;
                }
                Ok(Prop::Entailed)
            }
            _ => {
                let (lo, hi) = self.lin_bounds(lin)?;
                Ok(if lo > 0 || hi < 0 {
                    Prop::Entailed
                } else {
                    Prop::Active
                })
            }
        }
    }

    fn peek_int(&self, v: Var) -> Option<(i128, i128)> {
        match self.domains.get(&v) {
            Some(Domain::Int(s)) => Some((s.min()? as i128, s.max()? as i128)),
            Some(Domain::Atom(_)) => None,
            None => Some((self.default_range.0 as i128, self.default_range.1 as i128)),
        }
    }

    fn peek_lin(&self, lin: &LinExpr) -> Option<(i128, i128)> {
        let (mut lo, mut hi) = (lin.constant as i128, lin.constant as i128);
        for &(c, v) in &lin.terms {
            let (a, b) = self.peek_int(v)?;
            let c = c as i128;
            if c >= 0 {
                lo += c * a;
                hi += c * b;
            } else {
                lo += c * b;
                hi += c * a;
            }
        }
        Some((lo, hi))
    }

    fn peek_atoms(&self, o: &Operand) -> Option<AtomSet> {
        match o {
            Operand::Atom(s) => Some(AtomSet::new([s.clone()])),
            Operand::Lin(l) => match self.domains.get(&l.as_var()?) {
                Some(Domain::Atom(s)) => Some(s.clone()),
                _ => None,
            },
        }
    }

    /// Cheap three-valued evaluation from current domains, without posting.
    pub fn eval(&self, c: &Constraint) -> Truth {
        match c {
            Constraint::Rel(op, a, b) => {
                let (aa, ba) = (self.is_atom_kind(a), self.is_atom_kind(b));
                if aa || ba {
                    let eq_truth = if aa != ba {
                        Truth::False
                    } else {
                        let (Some(x), Some(y)) = (self.peek_atoms(a), self.peek_atoms(b)) else {
                            return Truth::Unknown;
                        };
                        if x.len() == 1 && y.len() == 1 {
                            if x.items()[0] == y.items()[0] {
                                Truth::True
                            } else {
                                Truth::False
                            }
                        } else if x.intersect(&y).is_empty() {
                            Truth::False
                        } else {
                            Truth::Unknown
                        }
                    };
                    return match op {
                        RelOp::Eq => eq_truth,
                        RelOp::Neq => eq_truth.not(),
                        _ => Truth::Unknown,
                    };
                }
                let (Operand::Lin(x), Operand::Lin(y)) = (a, b) else {
                    return Truth::Unknown;
                };
                let Some((lo, hi)) = self.peek_lin(&x.sub(y)) else {
                    return Truth::Unknown;
                };
                let (t, f) = match op {
                    RelOp::Le => (hi <= 0, lo > 0),
                    RelOp::Lt => (hi < 0, lo >= 0),
                    RelOp::Ge => (lo >= 0, hi < 0),
                    RelOp::Gt => (lo > 0, hi <= 0),
                    RelOp::Eq => (lo == 0 && hi == 0, lo > 0 || hi < 0),
                    RelOp::Neq => (lo > 0 || hi < 0, lo == 0 && hi == 0),
                };
                if t {
                    Truth::True
                } else if f {
                    Truth::False
                } else {
                    Truth::Unknown
                }
            }
            Constraint::TermEq(a, b) => self.eval_term_eq(a, b),
            Constraint::TermNeq(a, b) => self.eval_term_eq(a, b).not(),
            Constraint::And(a, b) => self.eval(a).and(self.eval(b)),
            Constraint::Or(a, b) => self.eval(a).or(self.eval(b)),
            Constraint::In(x, d) | Constraint::NotIn(x, d) => {
                let t = self.eval_in(x, &d.0);
                if matches!(c, Constraint::In(..)) {
                    t
                } else {
                    t.not()
                }
            }
        }
    }

    fn eval_term_eq(&self, a: &FdTerm, b: &FdTerm) -> Truth {
        match (a.shape(), b.shape()) {
            (Some((f, xs)), Some((g, ys))) => {
                if f != g || xs.len() != ys.len() {
                    return Truth::False;
                }
                xs.iter().zip(ys).fold(Truth::True, |acc, (x, y)| {
                    acc.and(self.eval(&Constraint::Rel(RelOp::Eq, x.clone(), y.clone())))
                })
            }
            (None, Some((_, args))) | (Some((_, args)), None) if !args.is_empty() => Truth::False,
            _ => match (a, b) {
                (FdTerm::Op(x), FdTerm::Op(y)) => {
                    self.eval(&Constraint::Rel(RelOp::Eq, x.clone(), y.clone()))
                }
                _ => Truth::Unknown,
            },
        }
    }

    fn eval_in(&self, x: &Operand, d: &Domain) -> Truth {
        match (x, d) {
            (Operand::Atom(s), Domain::Atom(t)) => {
                if t.contains(s) {
                    Truth::True
                } else {
                    Truth::False
                }
            }
            (Operand::Atom(_), Domain::Int(_)) => Truth::False,
            (Operand::Lin(l), _) => {
                if let Some(v) = l.as_var() {
                    match (self.domains.get(&v), d) {
                        (Some(Domain::Int(s)), Domain::Int(t)) => {
                            if s.subtract(t).is_empty() {
                                return Truth::True;
                            }
                            if s.intersect(t).is_empty() {
                                return Truth::False;
                            }
                            return Truth::Unknown;
                        }
                        (Some(Domain::Atom(s)), Domain::Atom(t)) => {
                            if s.subtract(t).is_empty() {
                                return Truth::True;
                            }
                            if s.intersect(t).is_empty() {
                                return Truth::False;
                            }
                            return Truth::Unknown;
                        }
                        (Some(Domain::Atom(_)), Domain::Int(_)) => return Truth::False,
                        _ => {}
                    }
                }
                let Domain::Int(t) = d else {
                    return Truth::False;
                };
                match self.peek_lin(l) {
                    Some((lo, hi)) if lo == hi => {
                        if t.contains(clamp64(lo)) {
                            Truth::True
                        } else {
                            Truth::False
                        }
                    }
                    Some((lo, hi))
                        if t.intersect(&IntSet::range(clamp64(lo), clamp64(hi)))
                            .is_empty() =>
                    {
                        Truth::False
                    }
                    _ => Truth::Unknown,
                }
            }
        }
    }

    /// Three-valued entailment by the complement test.
    pub fn entails(&mut self, c: &Constraint) -> Truth {
        if self.failed {
            return Truth::True;
        }
        let m = self.snapshot();
        let neg = self.post(c.negate());
        self.restore(m).expect("fresh mark");
        if neg.is_err() {
            return Truth::True;
        }
        let m = self.snapshot();
        let pos = self.post(c.clone());
        self.restore(m).expect("fresh mark");
        if pos.is_err() {
            Truth::False
        } else {
            Truth::Unknown
        }
    }

    pub fn snapshot(&mut self) -> Mark {
        let trail_len = self.trail.len();
        self.marks.push(trail_len);
        Mark {
            level: self.marks.len() - 1,
            trail_len,
        }
    }

    pub fn restore(&mut self, m: Mark) -> StoreResult<()> {
        if self.marks.get(m.level) != Some(&m.trail_len) || self.trail.len() < m.trail_len {
            return Err(StoreError::StaleMark);
        }
        while self.trail.len() > m.trail_len {
            match self.trail.pop().unwrap() {
                Undo::Domain(v, Some(d)) => {
                    self.domains.insert(v, d);
                }
                Undo::Domain(v, None) => {
                    self.domains.remove(&v);
                }
                Undo::Pushed => {
                    self.cons.pop();
                }
                Undo::Removed(i, c) => self.cons[i] = Some(c),
                Undo::Watch(v) => {
                    let ws = self.watch.get_mut(&v).unwrap();
                    ws.pop();
                    if ws.is_empty() {
                        self.watch.remove(&v);
                    }
                }
                Undo::Failed => self.failed = false,
            }
        }
        self.marks.truncate(m.level);
        if self.marks.is_empty() {
            self.trail.clear();
        }
        self.queue.clear();
        Ok(())
    }

    /// `Var ∈ Domain` lines by variable id, then residual constraints in
    /// structural order.
    pub fn render(&self, names: &dyn Fn(Var) -> String) -> Vec<String> {
        let mut out: Vec<String> = self
            .vars()
            .into_iter()
            .map(|v| format!("{} ∈ {}", names(v), self.domains[&v]))
            .collect();
        let mut cs: Vec<&Constraint> = self.active().collect();
        cs.sort();
        out.extend(cs.into_iter().map(|c| c.to_string_with(names)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::constraint::DomainBox;

    fn x() -> Var {
        Var(0)
    }
    fn y() -> Var {
        Var(1)
    }
    fn rel(op: RelOp, a: Operand, b: Operand) -> Constraint {
        Constraint::rel(op, a, b)
    }
    fn ints(s: &Store, v: Var) -> Vec<i64> {
        s.domain(v).unwrap().as_int().unwrap().iter().collect()
    }

    #[test]
    fn declare_intersects() {
        let mut s = Store::new();
        s.declare(x(), Domain::Int(IntSet::range(1, 5))).unwrap();
        s.declare(x(), Domain::Int(IntSet::range(3, 9))).unwrap();
        assert_eq!(ints(&s, x()), vec![3, 4, 5]);
        let mut s = Store::new();
        s.declare(x(), Domain::Int(IntSet::range(1, 2))).unwrap();
        assert_eq!(
            s.declare(x(), Domain::Int(IntSet::range(5, 9))),
            Err(StoreError::Unsat)
        );
        assert!(s.is_failed());
    }

    #[test]
    fn declare_type_mix() {
        let mut s = Store::new();
        s.declare(x(), Domain::Int(IntSet::range(1, 5))).unwrap();
        let atoms = Domain::Atom(AtomSet::new(["a".into()]));
        assert_eq!(s.declare(x(), atoms), Err(StoreError::TypeMix(x())));
    }

    #[test]
    fn less_than_prunes_to_supports() {
        // Supports over the 15 pairs of 1..5 x 1..3 with X < Y.
        let mut s = Store::new();
        s.declare(x(), Domain::Int(IntSet::range(1, 5))).unwrap();
        s.declare(y(), Domain::Int(IntSet::range(1, 3))).unwrap();
        s.post(rel(RelOp::Lt, Operand::var(x()), Operand::var(y())))
            .unwrap();
        assert_eq!(ints(&s, x()), vec![1, 2]);
        assert_eq!(ints(&s, y()), vec![2, 3]);
    }

    #[test]
    fn identity_constraints() {
        let mut s = Store::new();
        s.declare(x(), Domain::Int(IntSet::range(1, 3))).unwrap();
        let before = s.clone();
        s.post(rel(RelOp::Eq, Operand::var(x()), Operand::var(x())))
            .unwrap();
        assert_eq!(s, before);
        assert_eq!(
            s.post(rel(RelOp::Neq, Operand::var(x()), Operand::var(x()))),
            Err(StoreError::Unsat)
        );
    }

    #[test]
    fn term_equality_functor_clash() {
        let mut s = Store::new();
        let f = FdTerm::App("f".into(), vec![Operand::var(x())]);
        let g = FdTerm::App("g".into(), vec![Operand::var(x())]);
        assert_eq!(s.post(Constraint::TermEq(f, g)), Err(StoreError::Unsat));
    }

    #[test]
    fn term_equality_decomposes() {
        let mut s = Store::new();
        let ab = Domain::Atom(AtomSet::new(["a".into(), "b".into()]));
        s.declare(x(), ab.clone()).unwrap();
        s.declare(y(), ab).unwrap();
        let l = FdTerm::App("f".into(), vec![Operand::atom("a"), Operand::var(x())]);
        let r = FdTerm::App("f".into(), vec![Operand::var(y()), Operand::atom("b")]);
        s.post(Constraint::TermEq(l, r)).unwrap();
        assert_eq!(s.value(x()), Some(Value::Atom("b".into())));
        assert_eq!(s.value(y()), Some(Value::Atom("a".into())));
    }

    #[test]
    fn equality_with_atom_domain_and_int_never_holds() {
        let mut s = Store::new();
        s.declare(x(), Domain::Atom(AtomSet::new(["a".into()])))
            .unwrap();
        s.post(rel(RelOp::Neq, Operand::var(x()), Operand::int(3)))
            .unwrap();
        assert_eq!(
            s.post(rel(RelOp::Eq, Operand::var(x()), Operand::int(3))),
            Err(StoreError::Unsat)
        );
    }

    #[test]
    fn ordering_on_atoms_is_a_type_mix() {
        let mut s = Store::new();
        s.declare(x(), Domain::Atom(AtomSet::new(["a".into()])))
            .unwrap();
        assert_eq!(
            s.post(rel(RelOp::Lt, Operand::var(x()), Operand::int(3))),
            Err(StoreError::TypeMix(x()))
        );
    }

    #[test]
    fn disjunction_wakes_when_one_side_refuted() {
        let mut s = Store::new();
        s.declare(x(), Domain::Int(IntSet::range(1, 10))).unwrap();
        let c = Constraint::or(
            rel(RelOp::Gt, Operand::var(x()), Operand::int(20)),
            rel(RelOp::Lt, Operand::var(x()), Operand::int(4)),
        );
        s.post(c).unwrap();
        assert_eq!(ints(&s, x()), vec![1, 2, 3]);
        assert_eq!(s.active().count(), 0);
    }

    #[test]
    fn disjunction_stays_lazy() {
        let mut s = Store::new();
        s.declare(x(), Domain::Int(IntSet::range(1, 10))).unwrap();
        let c = Constraint::or(
            rel(RelOp::Gt, Operand::var(x()), Operand::int(8)),
            rel(RelOp::Lt, Operand::var(x()), Operand::int(4)),
        );
        s.post(c).unwrap();
        assert_eq!(ints(&s, x()).len(), 10);
        s.declare(x(), Domain::Int(IntSet::range(5, 10))).unwrap();
        assert_eq!(ints(&s, x()), vec![9, 10]);
    }

    #[test]
    fn entailment_trichotomy_examples() {
        let mut s = Store::new();
        s.declare(x(), Domain::Int(IntSet::singleton(3))).unwrap();
        assert_eq!(
            s.entails(&rel(RelOp::Ge, Operand::var(x()), Operand::int(1))),
            Truth::True
        );
        let mut s = Store::new();
        s.declare(x(), Domain::Int(IntSet::range(1, 5))).unwrap();
        assert_eq!(
            s.entails(&rel(RelOp::Gt, Operand::var(x()), Operand::int(7))),
            Truth::False
        );
        assert_eq!(
            s.entails(&rel(RelOp::Gt, Operand::var(x()), Operand::int(2))),
            Truth::Unknown
        );
        assert_eq!(ints(&s, x()), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn snapshot_restore() {
        let mut s = Store::new();
        let m0 = s.snapshot();
        s.declare(x(), Domain::Int(IntSet::range(1, 5))).unwrap();
        let before = s.clone();
        let m1 = s.snapshot();
        s.post(rel(RelOp::Lt, Operand::var(x()), Operand::int(3)))
            .unwrap();
        let m2 = s.snapshot();
        s.post(rel(RelOp::Neq, Operand::var(x()), Operand::int(1)))
            .unwrap();
        assert_eq!(ints(&s, x()), vec![2]);
        s.restore(m2).unwrap();
        assert_eq!(ints(&s, x()), vec![1, 2]);
        s.restore(m1).unwrap();
        assert_eq!(s, before);
        assert_eq!(s.restore(m2), Err(StoreError::StaleMark));
        s.restore(m0).unwrap();
        assert_eq!(s, Store::new());
    }

    #[test]
    fn restore_undoes_failure() {
        let mut s = Store::new();
        s.declare(x(), Domain::Int(IntSet::range(1, 3))).unwrap();
        let m = s.snapshot();
        assert!(s
            .post(rel(RelOp::Gt, Operand::var(x()), Operand::int(5)))
            .is_err());
        s.restore(m).unwrap();
        assert!(!s.is_failed());
        assert_eq!(ints(&s, x()), vec![1, 2, 3]);
    }

    #[test]
    fn linear_sum_bounds() {
        let mut s = Store::new();
        s.declare(x(), Domain::Int(IntSet::range(0, 10))).unwrap();
        s.declare(y(), Domain::Int(IntSet::range(0, 10))).unwrap();
        let lhs = Operand::Lin(LinExpr::new(vec![(1, x()), (1, y())], 0));
        s.post(rel(RelOp::Ge, lhs, Operand::int(18))).unwrap();
        assert_eq!(ints(&s, x()), vec![8, 9, 10]);
        let diff = Operand::Lin(LinExpr::new(vec![(1, x()), (-1, y())], 0));
        s.post(rel(RelOp::Eq, diff, Operand::int(1))).unwrap();
        assert_eq!(ints(&s, x()), vec![9, 10]);
        assert_eq!(ints(&s, y()), vec![8, 9]);
    }

    #[test]
    fn membership_constraints() {
        let mut s = Store::new();
        s.declare(x(), Domain::Int(IntSet::range(1, 9))).unwrap();
        s.post(Constraint::NotIn(
            Operand::var(x()),
            DomainBox(Domain::Int(IntSet::range(3, 7))),
        ))
        .unwrap();
        assert_eq!(ints(&s, x()), vec![1, 2, 8, 9]);
    }

    #[test]
    fn undeclared_vars_get_default_range() {
        let mut s = Store::new();
        s.post(rel(RelOp::Gt, Operand::var(x()), Operand::int(0)))
            .unwrap();
        let d = s.domain(x()).unwrap().as_int().unwrap();
        assert_eq!((d.min(), d.max()), (Some(1), Some(DEFAULT_RANGE.1)));
    }
}
