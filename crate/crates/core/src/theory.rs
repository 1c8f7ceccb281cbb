//! Abductive theories ⟨P, A, IC⟩ and their load-time checks.

use rustc_hash::FxHashMap as HashMap;
use std::fmt;

use crate::literal::{Clause, IntegrityConstraint, Literal};
use crate::term::{PredKey, Sym, Term};

pub const NAF_PREFIX: &str = "not_";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TheoryError {
    #[error("IC_WITHOUT_ABDUCIBLE: integrity constraint #{index} `{source_text}` has no abducible body literal")]
    IcWithoutAbducible { index: usize, source_text: String },
    #[error("ABDUCIBLE_HAS_CLAUSES: abducible {0} has defining clauses")]
    AbducibleHasClauses(PredKey),
    #[error("MISSING_NAF_DECLARATION: negation of {positive} requires abducible_predicate({0})", positive = naf_positive_name(.0))]
    MissingNafDeclaration(PredKey),
    #[error("MISSING_CANONICAL_IC: {0} requires the integrity constraint `ic :- {0}(...), {positive}(...)`", positive = naf_positive_name(.0))]
    MissingCanonicalIc(PredKey),
}

fn naf_positive_name(k: &PredKey) -> String {
    k.name
        .strip_prefix(NAF_PREFIX)
        .unwrap_or(&k.name)
        .to_string()
}

/// How `not p` literals are compiled.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum NafMode {
    /// The user must declare `not_p` abducible and write the canonical IC.
    #[default]
    Validate,
    /// Missing declarations and canonical ICs are synthesized.
    Autogenerate,
}

/// The triple ⟨P, A, IC⟩ with clauses indexed by predicate.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct AbductiveTheory {
    clauses: Vec<Clause>,
    index: HashMap<PredKey, Vec<usize>>,
    abducibles: Vec<PredKey>,
    ics: Vec<IntegrityConstraint>,
}

impl AbductiveTheory {
    pub fn new(
        clauses: Vec<Clause>,
        abducibles: Vec<PredKey>,
        ics: Vec<IntegrityConstraint>,
    ) -> Self {
        let mut t = AbductiveTheory::default();
        for a in abducibles {
            t.add_abducible(a);
        }
        for c in clauses {
            t.add_clause(c);
        }
        t.ics = ics;
        t
    }

    pub fn add_clause(&mut self, c: Clause) {
        self.index
            .entry(c.pred_key())
            .or_default()
            .push(self.clauses.len());
        self.clauses.push(c);
    }

    pub fn add_abducible(&mut self, k: PredKey) {
        if !self.abducibles.contains(&k) {
            self.abducibles.push(k);
        }
    }

    pub fn add_ic(&mut self, ic: IntegrityConstraint) {
        self.ics.push(ic);
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Clauses for `key` in source order.
    pub fn clauses_for<'a>(&'a self, key: &PredKey) -> impl Iterator<Item = &'a Clause> + 'a {
        self.index
            .get(key)
            .into_iter()
            .flatten()
            .map(move |&i| &self.clauses[i])
    }

    pub fn clause_indices(&self, key: &PredKey) -> &[usize] {
        self.index.get(key).map_or(&[], Vec::as_slice)
    }

    pub fn clause(&self, i: usize) -> &Clause {
        &self.clauses[i]
    }

    pub fn is_defined(&self, key: &PredKey) -> bool {
        self.index.contains_key(key)
    }

    pub fn abducibles(&self) -> &[PredKey] {
        &self.abducibles
    }

    pub fn is_abducible(&self, key: &PredKey) -> bool {
        self.abducibles.contains(key)
    }

    pub fn ics(&self) -> &[IntegrityConstraint] {
        &self.ics
    }

    /// For an abducible `not_p/n`, the predicate `p/n` it negates.
    pub fn naf_positive(&self, key: &PredKey) -> Option<PredKey> {
        let name = key.name.strip_prefix(NAF_PREFIX)?;
        if name.is_empty() || !self.is_abducible(key) {
            return None;
        }
        Some(PredKey::new(Sym::from(name), key.arity))
    }

    /// `::` domain declarations appearing in clause and IC bodies.
    pub fn domain_decls(&self) -> impl Iterator<Item = &Literal> {
        let in_clauses = self.clauses.iter().flat_map(|c| c.body.iter());
        let in_ics = self.ics.iter().flat_map(|ic| ic.body.iter());
        in_clauses
            .chain(in_ics)
            .filter(|l| matches!(l, Literal::Constraint(crate::literal::CLit::In(..))))
    }

    fn lit_is_abducible(&self, l: &Literal) -> bool {
        match l {
            Literal::Atom(t) => t.pred_key().map_or(false, |k| self.is_abducible(&k)),
            Literal::Naf(t) => t
                .pred_key()
                .map_or(false, |k| self.is_abducible(&naf_key(&k))),
            Literal::Constraint(_) => false,
        }
    }

    /// Structural checks: every IC mentions an abducible and no abducible
    /// has clauses.
    pub fn validate(&self) -> Vec<TheoryError> {
        let mut errs = Vec::new();
        for (index, ic) in self.ics.iter().enumerate() {
            if !ic.body.iter().any(|l| self.lit_is_abducible(l)) {
                errs.push(TheoryError::IcWithoutAbducible {
                    index,
                    source_text: ic.to_source(),
                });
            }
        }
        for a in &self.abducibles {
            if self.is_defined(a) {
                errs.push(TheoryError::AbducibleHasClauses(a.clone()));
            }
        }
        errs
    }

    /// Does some IC express `not_p(X̄) ∧ p(X̄)`, literally or in unfolded
    /// form when `p` has no clauses of its own?
    fn has_canonical_ic(&self, neg: &PredKey, pos: &PredKey) -> bool {
        let mentions = |ic: &IntegrityConstraint, k: &PredKey| -> Vec<Term> {
            ic.body
                .iter()
                .filter_map(|l| match l {
                    Literal::Atom(t) if t.pred_key().as_ref() == Some(k) => Some(t.clone()),
                    _ => None,
                })
                .collect()
        };
        self.ics.iter().any(|ic| {
            let negs = mentions(ic, neg);
            if negs.is_empty() {
                return false;
            }
            if !self.is_defined(pos) {
                return true;
            }
            mentions(ic, pos)
                .iter()
                .any(|p| negs.iter().any(|n| n.args() == p.args()))
        })
    }

    /// Rewrites `not p(args)` into the abducible `not_p(args)` everywhere.
    pub fn compile_naf(&self, mode: NafMode) -> Result<AbductiveTheory, TheoryError> {
        let mut negated: Vec<PredKey> = Vec::new();
        let mut rewrite = |body: &[Literal]| -> Vec<Literal> {
            body.iter()
                .map(|l| match l {
                    Literal::Naf(t) => {
                        let k = t.pred_key().expect("NAF literal is callable");
                        if !negated.contains(&k) {
                            negated.push(k);
                        }
                        Literal::Atom(naf_atom(t))
                    }
                    other => other.clone(),
                })
                .collect()
        };
        let clauses: Vec<Clause> = self
            .clauses
            .iter()
            .map(|c| Clause {
                body: rewrite(&c.body),
                ..c.clone()
            })
            .collect();
        let ics: Vec<IntegrityConstraint> = self
            .ics
            .iter()
            .map(|ic| IntegrityConstraint {
                body: rewrite(&ic.body),
                ..ic.clone()
            })
            .collect();
        let mut out = AbductiveTheory::new(clauses, self.abducibles.clone(), ics);
        for pos in negated {
            let neg = naf_key(&pos);
            if !out.is_abducible(&neg) {
                match mode {
                    NafMode::Validate => return Err(TheoryError::MissingNafDeclaration(neg)),
                    NafMode::Autogenerate => out.add_abducible(neg.clone()),
                }
            }
            if !out.has_canonical_ic(&neg, &pos) {
                match mode {
                    NafMode::Validate => return Err(TheoryError::MissingCanonicalIc(neg)),
                    NafMode::Autogenerate => out.add_ic(canonical_ic(&pos)),
                }
            }
        }
        Ok(out)
    }
}

pub fn naf_key(pos: &PredKey) -> PredKey {
    PredKey::new(Sym::from(format!("{}{}", NAF_PREFIX, pos.name)), pos.arity)
}

/// `p(args)` ↦ `not_p(args)`.
pub fn naf_atom(t: &Term) -> Term {
    let (name, _) = t.functor().expect("callable term");
    Term::app(
        Sym::from(format!("{}{}", NAF_PREFIX, name)),
        t.args().to_vec(),
    )
}

/// `ic :- not_p(X1..Xn), p(X1..Xn).`
pub fn canonical_ic(pos: &PredKey) -> IntegrityConstraint {
    let args: Vec<Term> = (0..pos.arity as u32).map(Term::var).collect();
    let p = Term::app(pos.name.clone(), args);
    IntegrityConstraint {
        body: vec![Literal::Atom(naf_atom(&p)), Literal::Atom(p)],
        var_names: (0..pos.arity)
            .map(|i| Sym::from(format!("X{}", i + 1)))
            .collect(),
    }
}

impl fmt::Display for AbductiveTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.abducibles {
            writeln!(f, "abducible_predicate({}).", a)?;
        }
        for c in &self.clauses {
            writeln!(f, "{}", c.to_source())?;
        }
        for ic in &self.ics {
            writeln!(f, "{}", ic.to_source())?;
        }
        Ok(())
    }
}
