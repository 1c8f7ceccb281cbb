use std::fmt;

use crate::literal::RelOp;
use crate::term::{Sym, Term, Var};

use super::domain::Domain;

/// `sum(coeff * var) + constant`, kept sorted by variable with merged,
/// non-zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LinExpr {
    pub terms: Vec<(i64, Var)>,
    pub constant: i64,
}

impl LinExpr {
    pub fn constant(c: i64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: Var) -> Self {
        LinExpr {
            terms: vec![(1, v)],
            constant: 0,
        }
    }

    pub fn new(mut terms: Vec<(i64, Var)>, constant: i64) -> Self {
        terms.sort_by_key(|t| t.1);
        let mut out: Vec<(i64, Var)> = Vec::with_capacity(terms.len());
        for (c, v) in terms {
            match out.last_mut() {
                Some((c0, v0)) if *v0 == v => *c0 += c,
                _ => out.push((c, v)),
            }
        }
        out.retain(|t| t.0 != 0);
        LinExpr {
            terms: out,
            constant,
        }
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        LinExpr::new(terms, self.constant + other.constant)
    }

    pub fn scale(&self, k: i64) -> LinExpr {
        LinExpr::new(
            self.terms.iter().map(|&(c, v)| (c * k, v)).collect(),
            self.constant * k,
        )
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.scale(-1))
    }

    /// The single variable when the expression is exactly `1 * X + 0`.
    pub fn as_var(&self) -> Option<Var> {
        match self.terms.as_slice() {
            [(1, v)] if self.constant == 0 => Some(*v),
            _ => None,
        }
    }

    pub fn as_const(&self) -> Option<i64> {
        self.terms.is_empty().then_some(self.constant)
    }

    fn write(&self, names: &dyn Fn(Var) -> String, out: &mut String) {
        use std::fmt::Write;
        let mut first = true;
        for &(c, v) in &self.terms {
            let (sign, mag) = if c < 0 { ("-", -c) } else { ("+", c) };
            if first {
                if c < 0 {
                    out.push('-');
                }
            } else {
                let _ = write!(out, " {} ", sign);
            }
            if mag != 1 {
                let _ = write!(out, "{}*", mag);
            }
            out.push_str(&names(v));
            first = false;
        }
        if first {
            let _ = write!(out, "{}", self.constant);
        } else if self.constant != 0 {
            let sign = if self.constant < 0 { "-" } else { "+" };
            let _ = write!(out, " {} {}", sign, self.constant.abs());
        }
    }
}

/// One side of a relation: an integer linear expression (which also covers
/// bare variables of either domain kind) or an atom constant.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Operand {
    Lin(LinExpr),
    Atom(Sym),
}

impl Operand {
    pub fn var(v: Var) -> Self {
        Operand::Lin(LinExpr::var(v))
    }

    pub fn int(i: i64) -> Self {
        Operand::Lin(LinExpr::constant(i))
    }

    pub fn atom(s: &str) -> Self {
        Operand::Atom(Sym::from(s))
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Operand::Lin(l) => l.as_var(),
            Operand::Atom(_) => None,
        }
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        if let Operand::Lin(l) = self {
            out.extend(l.terms.iter().map(|t| t.1));
        }
    }

    fn write(&self, names: &dyn Fn(Var) -> String, out: &mut String) {
        match self {
            Operand::Lin(l) => l.write(names, out),
            Operand::Atom(a) => out.push_str(&Term::Atom(a.clone()).to_string()),
        }
    }
}

/// Side of a term (dis)equality: an operand, or a functor applied to
/// operands (variables one level deep).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum FdTerm {
    Op(Operand),
    App(Sym, Vec<Operand>),
}

impl FdTerm {
    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            FdTerm::Op(o) => o.collect_vars(out),
            FdTerm::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn write(&self, names: &dyn Fn(Var) -> String, out: &mut String) {
        match self {
            FdTerm::Op(o) => o.write(names, out),
            FdTerm::App(f, args) => {
                out.push_str(&Term::Atom(f.clone()).to_string());
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    a.write(names, out);
                }
                out.push(')');
            }
        }
    }

    /// Functor/arity view; a bare operand that is an atom counts as arity 0.
    pub(crate) fn shape(&self) -> Option<(&Sym, &[Operand])> {
        match self {
            FdTerm::App(f, args) => Some((f, args)),
            FdTerm::Op(Operand::Atom(a)) => Some((a, &[])),
            FdTerm::Op(_) => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Constraint {
    Rel(RelOp, Operand, Operand),
    TermEq(FdTerm, FdTerm),
    TermNeq(FdTerm, FdTerm),
    And(Box<Constraint>, Box<Constraint>),
    Or(Box<Constraint>, Box<Constraint>),
    In(Operand, DomainBox),
    NotIn(Operand, DomainBox),
}

/// Domains are not ordered, so constraint ordering compares their printed form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DomainBox(pub Domain);

impl PartialOrd for DomainBox {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DomainBox {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.to_string().cmp(&other.0.to_string())
    }
}

impl Constraint {
    pub fn rel(op: RelOp, a: Operand, b: Operand) -> Self {
        Constraint::Rel(op, a, b)
    }

    pub fn and(a: Constraint, b: Constraint) -> Self {
        Constraint::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Constraint, b: Constraint) -> Self {
        Constraint::Or(Box::new(a), Box::new(b))
    }

    /// The usual mathematical negation.
    pub fn negate(&self) -> Constraint {
        match self {
            Constraint::Rel(op, a, b) => Constraint::Rel(op.negate(), a.clone(), b.clone()),
            Constraint::TermEq(a, b) => Constraint::TermNeq(a.clone(), b.clone()),
            Constraint::TermNeq(a, b) => Constraint::TermEq(a.clone(), b.clone()),
            Constraint::And(a, b) => Constraint::or(a.negate(), b.negate()),
            Constraint::Or(a, b) => Constraint::and(a.negate(), b.negate()),
            Constraint::In(x, d) => Constraint::NotIn(x.clone(), d.clone()),
            Constraint::NotIn(x, d) => Constraint::In(x.clone(), d.clone()),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Constraint::Rel(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Constraint::TermEq(a, b) | Constraint::TermNeq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Constraint::And(a, b) | Constraint::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Constraint::In(x, _) | Constraint::NotIn(x, _) => x.collect_vars(out),
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn write(&self, names: &dyn Fn(Var) -> String, out: &mut String) {
        let bin = |a: &dyn Fn(&mut String), op: &str, b: &dyn Fn(&mut String), out: &mut String| {
            a(out);
            out.push(' ');
            out.push_str(op);
            out.push(' ');
            b(out);
        };
        match self {
            Constraint::Rel(op, a, b) => bin(
                &|o: &mut String| a.write(names, o),
                op.symbol(),
                &|o: &mut String| b.write(names, o),
                out,
            ),
            Constraint::TermEq(a, b) => bin(
                &|o: &mut String| a.write(names, o),
                "##=",
                &|o: &mut String| b.write(names, o),
                out,
            ),
            Constraint::TermNeq(a, b) => bin(
                &|o: &mut String| a.write(names, o),
                "##\\=",
                &|o: &mut String| b.write(names, o),
                out,
            ),
            Constraint::And(a, b) | Constraint::Or(a, b) => {
                let op = if matches!(self, Constraint::And(..)) {
                    "#/\\"
                } else {
                    "#\\/"
                };
                let sub = |c: &Constraint, o: &mut String| {
                    let compound = matches!(c, Constraint::And(..) | Constraint::Or(..));
                    if compound {
                        o.push('(');
                    }
                    c.write(names, o);
                    if compound {
                        o.push(')');
                    }
                };
                bin(
                    &|o: &mut String| sub(a, o),
                    op,
                    &|o: &mut String| sub(b, o),
                    out,
                )
            }
            Constraint::In(x, d) => {
                x.write(names, out);
                out.push_str(" :: ");
                out.push_str(&d.0.to_string());
            }
            Constraint::NotIn(x, d) => {
                out.push_str("notin(");
                x.write(names, out);
                out.push_str(", ");
                out.push_str(&d.0.to_string());
                out.push(')');
            }
        }
    }

    pub fn to_string_with(&self, names: &dyn Fn(Var) -> String) -> String {
        let mut s = String::new();
        self.write(names, &mut s);
        s
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with(&|v: Var| v.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linexpr_normalizes() {
        let x = Var(1);
        let y = Var(2);
        let e = LinExpr::new(vec![(2, y), (1, x), (-2, y)], 3);
        assert_eq!(e.terms, vec![(1, x)]);
        assert_eq!(LinExpr::var(x).sub(&LinExpr::var(x)).as_const(), Some(0));
    }

    #[test]
    fn negate_is_an_involution() {
        let c = Constraint::and(
            Constraint::rel(RelOp::Lt, Operand::var(Var(0)), Operand::int(3)),
            Constraint::or(
                Constraint::rel(RelOp::Eq, Operand::var(Var(1)), Operand::atom("a")),
                Constraint::TermEq(
                    FdTerm::App("f".into(), vec![Operand::var(Var(2))]),
                    FdTerm::Op(Operand::var(Var(3))),
                ),
            ),
        );
        assert_eq!(c.negate().negate(), c);
        assert!(matches!(c.negate(), Constraint::Or(..)));
        assert_eq!(
            Constraint::rel(RelOp::Lt, Operand::var(Var(0)), Operand::var(Var(1))).negate(),
            Constraint::rel(RelOp::Ge, Operand::var(Var(0)), Operand::var(Var(1)))
        );
    }

    #[test]
    fn prints_readably() {
        let c = Constraint::rel(
            RelOp::Le,
            Operand::Lin(LinExpr::new(vec![(1, Var(0))], 4)),
            Operand::Lin(LinExpr::new(vec![(2, Var(1))], -1)),
        );
        assert_eq!(c.to_string(), "_G0 + 4 #<= 2*_G1 - 1");
    }
}
