//! Literals, clauses and integrity constraints.

use std::fmt;

use crate::term::{list, list_items, PredKey, Sym, Term, TermWriter, Var};

/// Arithmetic and (dis)equality relations of the constraint catalogue.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum RelOp {
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub fn negate(self) -> RelOp {
        match self {
            RelOp::Eq => RelOp::Neq,
            RelOp::Neq => RelOp::Eq,
            RelOp::Lt => RelOp::Ge,
            RelOp::Ge => RelOp::Lt,
            RelOp::Le => RelOp::Gt,
            RelOp::Gt => RelOp::Le,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "#=",
            RelOp::Neq => "##",
            RelOp::Lt => "#<",
            RelOp::Le => "#<=",
            RelOp::Gt => "#>",
            RelOp::Ge => "#>=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<RelOp> {
        Some(match s {
            "#=" => RelOp::Eq,
            "##" | "#\\=" => RelOp::Neq,
            "#<" => RelOp::Lt,
            "#<=" | "#=<" => RelOp::Le,
            "#>" => RelOp::Gt,
            "#>=" => RelOp::Ge,
            _ => return None,
        })
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            RelOp::Eq => a == b,
            RelOp::Neq => a != b,
            RelOp::Lt => a < b,
            RelOp::Le => a <= b,
            RelOp::Gt => a > b,
            RelOp::Ge => a >= b,
        }
    }
}

/// Right-hand side of a `::` domain declaration.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum DomainSpec {
    Range(Term, Term),
    Set(Vec<Term>),
}

impl DomainSpec {
    fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> DomainSpec {
        match self {
            DomainSpec::Range(lo, hi) => DomainSpec::Range(lo.map_vars(f), hi.map_vars(f)),
            DomainSpec::Set(items) => {
                DomainSpec::Set(items.iter().map(|t| t.map_vars(f)).collect())
            }
        }
    }

    fn to_term(&self) -> Term {
        match self {
            DomainSpec::Range(lo, hi) => Term::compound("..", vec![lo.clone(), hi.clone()]),
            DomainSpec::Set(items) => list(items.clone()),
        }
    }

    fn from_term(t: &Term) -> Option<DomainSpec> {
        match t {
            Term::Compound(f, args) if &**f == ".." && args.len() == 2 => {
                Some(DomainSpec::Range(args[0].clone(), args[1].clone()))
            }
            _ => list_items(t).map(DomainSpec::Set),
        }
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            DomainSpec::Range(lo, hi) => {
                lo.collect_vars(out);
                hi.collect_vars(out);
            }
            DomainSpec::Set(items) => items.iter().for_each(|t| t.collect_vars(out)),
        }
    }
}

/// A constraint literal as written in program text. Variables are still
/// logic variables; the engine translates these into store constraints.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum CLit {
    Rel(RelOp, Term, Term),
    TermEq(Term, Term),
    TermNeq(Term, Term),
    And(Box<CLit>, Box<CLit>),
    Or(Box<CLit>, Box<CLit>),
    In(Term, DomainSpec),
    NotIn(Term, DomainSpec),
}

impl CLit {
    /// Mathematical negation: `#<` becomes `#>=`, conjunction becomes
    /// disjunction of the negated parts, and so on.
    pub fn negate(&self) -> CLit {
        match self {
            CLit::Rel(op, a, b) => CLit::Rel(op.negate(), a.clone(), b.clone()),
            CLit::TermEq(a, b) => CLit::TermNeq(a.clone(), b.clone()),
            CLit::TermNeq(a, b) => CLit::TermEq(a.clone(), b.clone()),
            CLit::And(a, b) => CLit::Or(Box::new(a.negate()), Box::new(b.negate())),
            CLit::Or(a, b) => CLit::And(Box::new(a.negate()), Box::new(b.negate())),
            CLit::In(x, d) => CLit::NotIn(x.clone(), d.clone()),
            CLit::NotIn(x, d) => CLit::In(x.clone(), d.clone()),
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> CLit {
        match self {
            CLit::Rel(op, a, b) => CLit::Rel(*op, a.map_vars(f), b.map_vars(f)),
            CLit::TermEq(a, b) => CLit::TermEq(a.map_vars(f), b.map_vars(f)),
            CLit::TermNeq(a, b) => CLit::TermNeq(a.map_vars(f), b.map_vars(f)),
            CLit::And(a, b) => CLit::And(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            CLit::Or(a, b) => CLit::Or(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            CLit::In(x, d) => CLit::In(x.map_vars(f), d.map_vars(f)),
            CLit::NotIn(x, d) => CLit::NotIn(x.map_vars(f), d.map_vars(f)),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            CLit::Rel(_, a, b) | CLit::TermEq(a, b) | CLit::TermNeq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            CLit::And(a, b) | CLit::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            CLit::In(x, d) | CLit::NotIn(x, d) => {
                x.collect_vars(out);
                d.collect_vars(out);
            }
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            CLit::Rel(op, a, b) => Term::compound(op.symbol(), vec![a.clone(), b.clone()]),
            CLit::TermEq(a, b) => Term::compound("##=", vec![a.clone(), b.clone()]),
            CLit::TermNeq(a, b) => Term::compound("##\\=", vec![a.clone(), b.clone()]),
            CLit::And(a, b) => Term::compound("#/\\", vec![a.to_term(), b.to_term()]),
            CLit::Or(a, b) => Term::compound("#\\/", vec![a.to_term(), b.to_term()]),
            CLit::In(x, d) => Term::compound("::", vec![x.clone(), d.to_term()]),
            CLit::NotIn(x, d) => Term::compound("notin", vec![x.clone(), d.to_term()]),
        }
    }

    /// Recognizes constraint syntax. `Ok(None)` means the term is not a
    /// constraint at all; `Err` means it is one but malformed.
    pub fn from_term(t: &Term) -> Result<Option<CLit>, String> {
        let Term::Compound(f, args) = t else {
            return Ok(None);
        };
        if args.len() != 2 {
            return Ok(None);
        }
        let (a, b) = (&args[0], &args[1]);
        if let Some(op) = RelOp::from_symbol(f) {
            return Ok(Some(CLit::Rel(op, a.clone(), b.clone())));
        }
        let sub = |t: &Term| -> Result<CLit, String> {
            CLit::from_term(t)?.ok_or_else(|| format!("`{}` is not a constraint", t))
        };
        Ok(Some(match &**f {
            "##=" | "##\\=" => {
                for side in [a, b] {
                    check_one_level(side)?;
                }
                if &**f == "##=" {
                    CLit::TermEq(a.clone(), b.clone())
                } else {
                    CLit::TermNeq(a.clone(), b.clone())
                }
            }
            "#/\\" => CLit::And(Box::new(sub(a)?), Box::new(sub(b)?)),
            "#\\/" => CLit::Or(Box::new(sub(a)?), Box::new(sub(b)?)),
            "::" | "notin" => {
                let d = DomainSpec::from_term(b)
                    .ok_or_else(|| format!("bad domain `{}`; expected Lo..Hi or a list", b))?;
                if &**f == "::" {
                    CLit::In(a.clone(), d)
                } else {
                    CLit::NotIn(a.clone(), d)
                }
            }
            _ => return Ok(None),
        }))
    }
}

/// Term equality only admits variables at most one level inside the outer
/// functor.
fn check_one_level(t: &Term) -> Result<(), String> {
    for a in t.args() {
        if let Term::Compound(..) = a {
            return Err(format!(
                "term equality argument `{}` nests deeper than one level",
                t
            ));
        }
    }
    Ok(())
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Literal {
    /// A call to a user-defined, abducible or built-in (`true`, `fail`) predicate.
    Atom(Term),
    Constraint(CLit),
    /// `not G` surface syntax; removed by NAF compilation.
    Naf(Term),
}

impl Literal {
    pub fn pred_key(&self) -> Option<PredKey> {
        match self {
            Literal::Atom(t) | Literal::Naf(t) => t.pred_key(),
            Literal::Constraint(_) => None,
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> Literal {
        match self {
            Literal::Atom(t) => Literal::Atom(t.map_vars(f)),
            Literal::Naf(t) => Literal::Naf(t.map_vars(f)),
            Literal::Constraint(c) => Literal::Constraint(c.map_vars(f)),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Literal::Atom(t) | Literal::Naf(t) => t.collect_vars(out),
            Literal::Constraint(c) => c.collect_vars(out),
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Literal::Atom(t) => t.clone(),
            Literal::Naf(t) => Term::compound("not", vec![t.clone()]),
            Literal::Constraint(c) => c.to_term(),
        }
    }

    pub fn from_term(t: &Term) -> Result<Literal, String> {
        match t {
            Term::Var(_) => Err("a variable cannot be used as a goal".into()),
            Term::Int(i) => Err(format!("`{}` cannot be used as a goal", i)),
            Term::Compound(f, args) if &**f == "not" && args.len() == 1 => match &args[0] {
                inner @ (Term::Atom(_) | Term::Compound(..))
                    if CLit::from_term(inner)?.is_none() =>
                {
                    Ok(Literal::Naf(inner.clone()))
                }
                other => Err(format!("`not` expects a predicate call, found `{}`", other)),
            },
            _ => Ok(match CLit::from_term(t)? {
                Some(c) => Literal::Constraint(c),
                None => Literal::Atom(t.clone()),
            }),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_term().fmt(f)
    }
}

/// Variable naming table shared by clauses and ICs. Local variable `i` of
/// the item is `Var(i)` and is printed as `names[i]`.
pub type VarNames = Vec<Sym>;

fn names_writer(names: &VarNames) -> impl Fn(Var) -> String + '_ {
    move |v: Var| match names.get(v.0 as usize) {
        Some(n) if &**n != "_" => n.to_string(),
        _ => format!("_G{}", v.0),
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Clause {
    pub head: Term,
    pub body: Vec<Literal>,
    pub var_names: VarNames,
}

impl Clause {
    pub fn fact(head: Term) -> Clause {
        let n = head.max_var().map_or(0, |m| m + 1);
        Clause {
            head,
            body: Vec::new(),
            var_names: (0..n).map(|i| Sym::from(format!("V{}", i))).collect(),
        }
    }

    pub fn pred_key(&self) -> PredKey {
        self.head.pred_key().expect("clause head is callable")
    }

    pub fn var_count(&self) -> u32 {
        self.var_names.len() as u32
    }

    pub fn to_source(&self) -> String {
        let name = names_writer(&self.var_names);
        let w = TermWriter { var_name: &name };
        let mut out = w.to_string(&self.head);
        write_body(&w, &self.body, &mut out);
        out.push('.');
        out
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntegrityConstraint {
    pub body: Vec<Literal>,
    pub var_names: VarNames,
}

impl IntegrityConstraint {
    pub fn var_count(&self) -> u32 {
        self.var_names.len() as u32
    }

    pub fn to_source(&self) -> String {
        let name = names_writer(&self.var_names);
        let w = TermWriter { var_name: &name };
        let mut out = String::from("ic");
        write_body(&w, &self.body, &mut out);
        out.push('.');
        out
    }
}

fn write_body(w: &TermWriter<'_>, body: &[Literal], out: &mut String) {
    if body.is_empty() {
        return;
    }
    out.push_str(" :-\n    ");
    for (i, lit) in body.iter().enumerate() {
        if i > 0 {
            out.push_str(",\n    ");
        }
        // Body literals sit below the `,` operator.
        w.write_prec(&lit.to_term(), 999, out);
    }
}
