//! First-order terms.

use std::fmt;
use std::sync::Arc;

/// Interned-by-value symbol. Cheap to clone and shareable across threads.
pub type Sym = Arc<str>;

pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

/// A logic variable. Ids are unique within one derivation once clauses have
/// been standardized apart.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var(pub u32);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_G{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Var(Var),
    Int(i64),
    Atom(Sym),
    /// Functor and arguments; the arity is `args.len()` and is never zero
    /// (zero-arity compounds are represented as atoms).
    Compound(Sym, Arc<[Term]>),
}

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(sym(name))
    }

    pub fn var(id: u32) -> Term {
        Term::Var(Var(id))
    }

    /// Builds a compound, collapsing the zero-argument case to an atom.
    pub fn compound(functor: &str, args: Vec<Term>) -> Term {
        Term::app(sym(functor), args)
    }

    pub fn app(functor: Sym, args: Vec<Term>) -> Term {
        assert!(!functor.is_empty(), "empty functor");
        if args.is_empty() {
            Term::Atom(functor)
        } else {
            Term::Compound(functor, args.into())
        }
    }

    /// Functor name and arity for atoms and compounds.
    pub fn functor(&self) -> Option<(&Sym, usize)> {
        match self {
            Term::Atom(a) => Some((a, 0)),
            Term::Compound(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn pred_key(&self) -> Option<PredKey> {
        self.functor()
            .map(|(name, arity)| PredKey::new(name.clone(), arity))
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    /// Pushes every variable occurrence (with repetitions) in left-to-right order.
    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => out.push(*v),
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn occurs(&self, v: Var) -> bool {
        match self {
            Term::Var(w) => *w == v,
            Term::Compound(_, args) => args.iter().any(|a| a.occurs(v)),
            _ => false,
        }
    }

    /// Rebuilds the term replacing every variable by `f(var)`.
    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(*v),
            Term::Compound(name, args) => {
                Term::Compound(name.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
            t => t.clone(),
        }
    }

    pub fn max_var(&self) -> Option<u32> {
        match self {
            Term::Var(v) => Some(v.0),
            Term::Compound(_, args) => args.iter().filter_map(Term::max_var).max(),
            _ => None,
        }
    }
}

/// Predicate indicator `name/arity`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PredKey {
    pub name: Sym,
    pub arity: usize,
}

impl PredKey {
    pub fn new(name: impl Into<Sym>, arity: usize) -> Self {
        PredKey {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// Binary operators printed infix, with their priority and associativity.
/// Mirrors the table used by the parser.
pub(crate) fn infix_op(name: &str) -> Option<(u32, Assoc)> {
    Some(match name {
        ":-" => (1200, Assoc::Xfx),
        "," => (1000, Assoc::Xfy),
        "#\\/" => (760, Assoc::Xfy),
        "#/\\" => (750, Assoc::Xfy),
        "#=" | "##" | "#\\=" | "#<" | "#<=" | "#=<" | "#>" | "#>=" | "##=" | "##\\=" | "::"
        | "=" => (700, Assoc::Xfx),
        ".." => (600, Assoc::Xfx),
        "+" | "-" => (500, Assoc::Yfx),
        "*" | "/" => (400, Assoc::Yfx),
        _ => return None,
    })
}

pub(crate) fn prefix_op(name: &str) -> Option<u32> {
    match name {
        "not" => Some(900),
        "-" => Some(200),
        _ => None,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Assoc {
    Xfx,
    Xfy,
    Yfx,
}

/// Whether an atom can be written without quotes.
pub(crate) fn is_plain_atom(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => s == "[]",
    }
}

/// Renders terms, naming variables through a caller-supplied function.
/// Characters that glue into one symbolic token.
pub(crate) const SYMBOL_CHARS: &str = "#$&*+-./:<=>?@^~\\";

pub struct TermWriter<'a> {
    pub var_name: &'a dyn Fn(Var) -> String,
}

impl TermWriter<'_> {
    pub fn write(&self, t: &Term, out: &mut String) {
        self.write_prec(t, 1200, out)
    }

    pub fn to_string(&self, t: &Term) -> String {
        let mut s = String::new();
        self.write(t, &mut s);
        s
    }

    pub(crate) fn write_prec(&self, t: &Term, max: u32, out: &mut String) {
        use std::fmt::Write;
        match t {
            Term::Var(v) => out.push_str(&(self.var_name)(*v)),
            Term::Int(i) => {
                if *i < 0 && max < 200 {
                    let _ = write!(out, "({})", i);
                } else {
                    let _ = write!(out, "{}", i);
                }
            }
            Term::Atom(a) => write_atom(a, out),
            Term::Compound(f, args) if args.len() == 2 && infix_op(f).is_some() => {
                let (p, assoc) = infix_op(f).unwrap();
                let (lp, rp) = match assoc {
                    Assoc::Xfx => (p - 1, p - 1),
                    Assoc::Xfy => (p - 1, p),
                    Assoc::Yfx => (p, p - 1),
                };
                let paren = p > max;
                if paren {
                    out.push('(');
                }
                self.write_prec(&args[0], lp, out);
                let mut right = String::new();
                self.write_prec(&args[1], rp, &mut right);
                if &**f == "," {
                    out.push_str(", ");
                } else if &**f == ".." && !right.starts_with(|c: char| SYMBOL_CHARS.contains(c)) {
                    out.push_str("..");
                } else {
                    out.push(' ');
                    out.push_str(f);
                    out.push(' ');
                }
                out.push_str(&right);
                if paren {
                    out.push(')');
                }
            }
            Term::Compound(f, args) if args.len() == 1 && prefix_op(f).is_some() => {
                let p = prefix_op(f).unwrap();
                let paren = p > max;
                if paren {
                    out.push('(');
                }
                out.push_str(f);
                out.push(' ');
                // A negative literal or another operator right after `-` must
                // stay distinguishable from a signed number.
                let inner = if &**f == "-" { 0 } else { p };
                self.write_prec(&args[0], inner, out);
                if paren {
                    out.push(')');
                }
            }
            Term::Compound(f, args) if &**f == "." && args.len() == 2 => self.write_list(t, out),
            Term::Compound(f, args) => {
                write_atom(f, out);
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    self.write_prec(a, 999, out);
                }
                out.push(')');
            }
        }
    }

    fn write_list(&self, mut t: &Term, out: &mut String) {
        out.push('[');
        let mut first = true;
        loop {
            match t {
                Term::Compound(f, args) if &**f == "." && args.len() == 2 => {
                    if !first {
                        out.push_str(", ");
                    }
                    first = false;
                    self.write_prec(&args[0], 999, out);
                    t = &args[1];
                }
                Term::Atom(a) if &**a == "[]" => break,
                other => {
                    out.push_str(" | ");
                    self.write_prec(other, 999, out);
                    break;
                }
            }
        }
        out.push(']');
    }
}

fn write_atom(a: &str, out: &mut String) {
    if is_plain_atom(a) {
        out.push_str(a);
    } else {
        out.push('\'');
        for c in a.chars() {
            if c == '\'' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('\'');
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = TermWriter {
            var_name: &|v: Var| v.to_string(),
        };
        f.write_str(&w.to_string(self))
    }
}

/// Builds a Prolog list term from its elements.
pub fn list(items: Vec<Term>) -> Term {
    items
        .into_iter()
        .rev()
        .fold(Term::atom("[]"), |tail, head| {
            Term::compound(".", vec![head, tail])
        })
}

/// Splits a proper list term into its elements.
pub fn list_items(mut t: &Term) -> Option<Vec<Term>> {
    let mut items = Vec::new();
    loop {
        match t {
            Term::Atom(a) if &**a == "[]" => return Some(items),
            Term::Compound(f, args) if &**f == "." && args.len() == 2 => {
                items.push(args[0].clone());
                t = &args[1];
            }
            _ => return None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_uses_operators() {
        let t = Term::compound(
            "#<",
            vec![
                Term::compound("+", vec![Term::var(1), Term::Int(3)]),
                Term::var(2),
            ],
        );
        assert_eq!(t.to_string(), "_G1 + 3 #< _G2");
    }

    #[test]
    fn nested_priorities_get_parentheses() {
        let sum = Term::compound("+", vec![Term::Int(1), Term::Int(2)]);
        let t = Term::compound("*", vec![sum.clone(), Term::Int(3)]);
        assert_eq!(t.to_string(), "(1 + 2) * 3");
        let t = Term::compound("-", vec![Term::Int(1), sum]);
        assert_eq!(t.to_string(), "1 - (1 + 2)");
    }

    #[test]
    fn quoted_atoms_and_lists() {
        assert_eq!(Term::atom("Hello").to_string(), "'Hello'");
        let l = list(vec![Term::atom("a"), Term::Int(2)]);
        assert_eq!(l.to_string(), "[a, 2]");
        assert_eq!(list_items(&l).unwrap().len(), 2);
    }

    #[test]
    fn zero_arity_compound_is_atom() {
        assert_eq!(Term::compound("a", vec![]), Term::atom("a"));
    }
}
