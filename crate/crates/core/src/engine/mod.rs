//! The abductive proof procedure.
//!
//! A derivation alternates between positive goals (resolved against clauses,
//! or abduced) and denials (negative goals coming from integrity
//! constraints). Denials on abducibles are checked against every hypothesis
//! already made and stay watched for hypotheses made later, so an answer is
//! consistent with every constraint over its final hypothesis set.

mod denial;
mod lower;
mod state;
mod step;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use crate::fd::{Constraint, LabelStrategy, Store, Valuation, Value, DEFAULT_RANGE};
use crate::literal::{IntegrityConstraint, Literal, VarNames};
use crate::parser::Goal as Query;
use crate::subst::shift_lits;
use crate::term::{PredKey, Sym, Term, TermWriter, Var};
use crate::theory::{AbductiveTheory, NafMode, TheoryError};

pub use state::{Denial, Diseq, Goal, GoalList, State, Watch};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("INITIAL_HYPOTHESIS_INCONSISTENT: {0}")]
    InitialHypothesisInconsistent(String),
    #[error("DEPTH_LIMIT_EXCEEDED: derivation depth {0} reached")]
    DepthLimitExceeded(usize),
    #[error("STEP_LIMIT_EXCEEDED: {0} derivation steps taken")]
    StepLimitExceeded(usize),
    #[error("UNKNOWN_PREDICATE: {0} is neither defined nor abducible")]
    UnknownPredicate(PredKey),
    #[error("type error: {0}")]
    Type(String),
    #[error("floundering: {0}")]
    Floundering(String),
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// Order in which integrity constraints are checked.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum IcOrder {
    #[default]
    Source,
    /// Longer bodies first, then more non-variable arguments; ties keep
    /// source order.
    SpecificFirst,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub max_depth: usize,
    pub ic_order: IcOrder,
    pub naf: NafMode,
    /// Label every answer (hypothesis variables first).
    pub label: bool,
    pub strategy: LabelStrategy,
    pub default_range: (i64, i64),
    /// Before each abductive step, look for a full solution of the store
    /// with at most this many assignments and prune the branch if there is
    /// none. Zero leaves consistency to propagation alone.
    pub check_budget: usize,
    /// Stop the answer stream after this many derivation steps.
    pub max_steps: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_depth: 10_000,
            ic_order: IcOrder::Source,
            naf: NafMode::Validate,
            label: false,
            strategy: LabelStrategy::InputOrder,
            default_range: DEFAULT_RANGE,
            check_budget: 2_000,
            max_steps: None,
        }
    }
}

/// Result of one reduction step.
#[derive(Debug)]
pub enum Step {
    /// No goals left.
    Answer(State),
    /// Alternative successor states, in search order; empty on failure.
    Branches(Vec<State>),
}

pub struct Engine {
    theory: AbductiveTheory,
    config: EngineConfig,
    ics: Vec<IntegrityConstraint>,
    /// Predicates the program refers to. Those without clauses simply fail;
    /// anything else is an unknown predicate.
    mentioned: HashSet<PredKey>,
}

fn specificity(ic: &IntegrityConstraint) -> (usize, usize) {
    let nonvar = ic
        .body
        .iter()
        .map(|l| {
            l.to_term()
                .args()
                .iter()
                .filter(|a| a.as_var().is_none())
                .count()
        })
        .sum();
    (ic.body.len(), nonvar)
}

/// Integrity constraints in checking order.
pub fn ic_order(ics: &[IntegrityConstraint], order: IcOrder) -> Vec<IntegrityConstraint> {
    let mut out = ics.to_vec();
    if order == IcOrder::SpecificFirst {
        // Stable sort keeps source order among equals.
        out.sort_by(|a, b| specificity(b).cmp(&specificity(a)));
    }
    out
}

impl Engine {
    /// Compiles negation in `theory` and prepares the constraint order.
    pub fn new(theory: &AbductiveTheory, config: EngineConfig) -> Result<Engine, EngineError> {
        let theory = theory.compile_naf(config.naf)?;
        let ics = ic_order(theory.ics(), config.ic_order);
        let bodies = theory
            .clauses()
            .iter()
            .map(|c| &c.body)
            .chain(theory.ics().iter().map(|ic| &ic.body));
        let mut mentioned: HashSet<PredKey> = bodies
            .flatten()
            .filter_map(|l| match l {
                Literal::Atom(t) | Literal::Naf(t) => t.pred_key(),
                Literal::Constraint(_) => None,
            })
            .collect();
        mentioned.extend(
            theory
                .abducibles()
                .iter()
                .filter_map(|k| theory.naf_positive(k)),
        );
        Ok(Engine {
            theory,
            config,
            ics,
            mentioned,
        })
    }

    /// A predicate with no clauses that the program mentions: calls to it
    /// fail.
    pub(crate) fn is_empty_pred(&self, key: &PredKey) -> bool {
        !self.theory.is_defined(key) && self.mentioned.contains(key)
    }

    pub fn theory(&self) -> &AbductiveTheory {
        &self.theory
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Root state for a query: the initial hypotheses, every integrity
    /// constraint as a denial, then the query literals.
    pub fn initial_state(&self, query: &Query, initial: &[Term]) -> Result<State, EngineError> {
        let (lo, hi) = self.config.default_range;
        let lits = self.compile_query(&query.lits)?;
        let mut st = State {
            goals: GoalList::default(),
            bindings: Default::default(),
            store: Store::with_default_range(lo, hi),
            delta: im::Vector::new(),
            watches: im::HashMap::default(),
            diseqs: im::Vector::new(),
            excluded: im::Vector::new(),
            next_var: query.var_names.len() as u32,
            depth: 0,
        };
        for t in initial {
            if !t.is_ground() {
                return Err(EngineError::Type(format!(
                    "initial hypothesis `{}` is not ground",
                    t
                )));
            }
            let key = t
                .pred_key()
                .ok_or_else(|| EngineError::Type(format!("`{}` is not an atom", t)))?;
            if !self.theory.is_abducible(&key) {
                return Err(EngineError::Type(format!(
                    "initial hypothesis `{}` is not abducible",
                    t
                )));
            }
            if !st.delta.contains(t) {
                st.delta.push_back(t.clone());
            }
        }
        let mut denials = Vec::new();
        for ic in &self.ics {
            let base = st.next_var;
            st.next_var += ic.var_count();
            let lits = shift_lits(&ic.body, base);
            let univ = (base..st.next_var).map(Var).collect();
            denials.push(Goal::Deny(Rc::new(Denial::new(lits, univ))));
        }
        st.goals = st.goals.push_all(lits.into_iter().map(Goal::Lit));
        st.goals = st.goals.push_all(denials);
        Ok(st)
    }

    fn compile_query(&self, lits: &[Literal]) -> Result<Vec<Literal>, EngineError> {
        lits.iter()
            .map(|l| match l {
                Literal::Naf(t) => {
                    let k = t.pred_key().expect("callable");
                    let neg = crate::theory::naf_key(&k);
                    if self.theory.is_abducible(&neg) {
                        Ok(Literal::Atom(crate::theory::naf_atom(t)))
                    } else {
                        Err(TheoryError::MissingNafDeclaration(neg).into())
                    }
                }
                other => Ok(other.clone()),
            })
            .collect()
    }

    /// Lazily enumerates answers depth-first.
    pub fn solve(&self, query: &Query, initial: &[Term]) -> Result<Solutions<'_>, EngineError> {
        if !initial.is_empty() && !self.consistency_check(initial)? {
            // Name the first hypothesis whose installation fails.
            let mut culprit = initial.len() - 1;
            for k in 1..initial.len() {
                if !self.consistency_check(&initial[..k])? {
                    culprit = k - 1;
                    break;
                }
            }
            return Err(EngineError::InitialHypothesisInconsistent(
                initial[culprit].to_string(),
            ));
        }
        let root = self.initial_state(query, initial)?;
        Ok(Solutions {
            engine: self,
            stack: vec![root],
            names: query.var_names.clone(),
            cut: false,
            done: false,
            steps: 0,
        })
    }

    /// Whether a set of ground hypotheses can satisfy every integrity
    /// constraint (possibly by abducing more).
    pub fn consistency_check(&self, delta: &[Term]) -> Result<bool, EngineError> {
        let empty = Query {
            lits: Vec::new(),
            var_names: Vec::new(),
        };
        let root = self.initial_state(&empty, delta)?;
        let mut it = Solutions {
            engine: self,
            stack: vec![root],
            names: Vec::new(),
            cut: false,
            done: false,
            steps: 0,
        };
        match it.next() {
            Some(Ok(_)) => Ok(true),
            Some(Err(e)) => Err(e),
            None => Ok(false),
        }
    }

    fn finish(&self, st: State, names: &VarNames) -> Option<Answer> {
        let query_vars: Vec<Var> = (0..names.len() as u32).map(Var).collect();
        let delta: Vec<Term> = st
            .delta
            .iter()
            .map(|h| st.bindings.resolve_fixed(h, &st.store))
            .collect();
        let bindings: Vec<(Sym, Term)> = query_vars
            .iter()
            .filter(|v| !names[v.0 as usize].starts_with('_'))
            .map(|v| {
                (
                    names[v.0 as usize].clone(),
                    st.bindings.resolve_fixed(&Term::Var(*v), &st.store),
                )
            })
            .collect();
        let diseqs: Vec<(Term, Term)> = st
            .diseqs
            .iter()
            .map(|d| (st.bindings.resolve(&d.a), st.bindings.resolve(&d.b)))
            .collect();
        let mut answer = Answer {
            delta,
            bindings,
            store: Store::new(),
            diseqs,
            valuation: None,
            names: query_vars
                .iter()
                .map(|v| (*v, names[v.0 as usize].clone()))
                .collect(),
        };
        answer.store = st.store;
        // Emitted answers must have a satisfiable store, which bounds
        // consistency alone does not guarantee.
        let order = answer.label_order();
        let val = answer.store.first_solution(&order, self.config.strategy)?;
        if self.config.label {
            answer = answer.labelled(val);
        }
        Some(answer)
    }
}

pub(crate) fn value_term(v: &Value) -> Term {
    match v {
        Value::Int(i) => Term::Int(*i),
        Value::Atom(a) => Term::Atom(a.clone()),
    }
}

fn instantiate(t: &Term, map: &HashMap<Var, Value>) -> Term {
    t.map_vars(&mut |v| map.get(&v).map_or(Term::Var(v), value_term))
}

/// Depth-first answer stream. After the last answer, yields
/// `DepthLimitExceeded` once if some branch was cut by the depth bound.
/// Running out of `max_steps` ends the stream with `StepLimitExceeded`.
pub struct Solutions<'e> {
    engine: &'e Engine,
    stack: Vec<State>,
    names: VarNames,
    cut: bool,
    done: bool,
    steps: usize,
}

impl Iterator for Solutions<'_> {
    type Item = Result<Answer, EngineError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        while let Some(st) = self.stack.pop() {
            if st.depth > self.engine.config.max_depth {
                self.cut = true;
                continue;
            }
            self.steps += 1;
            if self.engine.config.max_steps.is_some_and(|m| self.steps > m) {
                self.done = true;
                return Some(Err(EngineError::StepLimitExceeded(self.steps - 1)));
            }
            match self.engine.reduce_step(st) {
                Ok(Step::Answer(st)) => {
                    if let Some(a) = self.engine.finish(st, &self.names) {
                        return Some(Ok(a));
                    }
                }
                Ok(Step::Branches(bs)) => self.stack.extend(bs.into_iter().rev()),
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
        self.done = true;
        if self.cut {
            Some(Err(EngineError::DepthLimitExceeded(
                self.engine.config.max_depth,
            )))
        } else {
            None
        }
    }
}

/// A set of hypotheses with the residual constraints on their variables.
#[derive(Clone, Debug)]
pub struct Answer {
    pub delta: Vec<Term>,
    /// Query variables (named ones only) and their values.
    pub bindings: Vec<(Sym, Term)>,
    pub store: Store,
    /// Residual syntactic disequalities.
    pub diseqs: Vec<(Term, Term)>,
    /// Set when the engine labelled the answer; `delta` and `bindings` are
    /// then ground.
    pub valuation: Option<Valuation>,
    names: HashMap<Var, Sym>,
}

impl Answer {
    pub fn var_name(&self, v: Var) -> String {
        match self.names.get(&v) {
            Some(n) if !n.starts_with('_') => n.to_string(),
            _ => format!("_G{}", v.0),
        }
    }

    pub fn write_term(&self, t: &Term) -> String {
        let name = |v: Var| self.var_name(v);
        TermWriter { var_name: &name }.to_string(t)
    }

    /// Variables of the hypotheses and query bindings.
    pub fn answer_vars(&self) -> Vec<Var> {
        let mut vs = Vec::new();
        for t in self.delta.iter().chain(self.bindings.iter().map(|b| &b.1)) {
            t.collect_vars(&mut vs);
        }
        let mut seen = BTreeSet::new();
        vs.retain(|v| seen.insert(*v));
        vs
    }

    /// Store variables of the hypotheses and bindings in order of
    /// appearance, then every other store variable.
    pub fn label_order(&self) -> Vec<Var> {
        let mut order: Vec<Var> = self
            .answer_vars()
            .into_iter()
            .filter(|v| self.store.is_declared(*v))
            .collect();
        let seen: BTreeSet<Var> = order.iter().copied().collect();
        order.extend(self.store.vars().into_iter().filter(|v| !seen.contains(v)));
        order
    }

    /// The answer instantiated by a valuation of its store.
    pub fn labelled(&self, val: Valuation) -> Answer {
        let map: HashMap<Var, Value> = val.iter().cloned().collect();
        let inst = |t: &Term| instantiate(t, &map);
        let mut out = self.clone();
        out.delta = self.delta.iter().map(inst).collect();
        out.bindings = self
            .bindings
            .iter()
            .map(|(n, t)| (n.clone(), inst(t)))
            .collect();
        out.diseqs = self
            .diseqs
            .iter()
            .map(|(a, b)| (inst(a), inst(b)))
            .collect();
        out.valuation = Some(val);
        out
    }

    /// Domains and constraints relevant to the answer variables: domains of
    /// store variables reachable through constraints, then the constraints.
    pub fn constraints(&self) -> Vec<String> {
        let mut relevant: BTreeSet<Var> = self.answer_vars().into_iter().collect();
        let mut cons: Vec<&Constraint> = Vec::new();
        let mut grew = true;
        while grew {
            grew = false;
            for c in self.store.active() {
                if cons.iter().any(|x| std::ptr::eq(*x, c)) {
                    continue;
                }
                let vs = c.vars();
                if vs.iter().any(|v| relevant.contains(v)) {
                    cons.push(c);
                    for v in vs {
                        grew |= relevant.insert(v);
                    }
                }
            }
        }
        let name = |v: Var| self.var_name(v);
        let mut out: Vec<String> = relevant
            .iter()
            .filter_map(|v| {
                let d = self.store.domain(*v)?;
                if d.single().is_some() {
                    return None;
                }
                Some(format!("{} :: {}", name(*v), domain_text(d)))
            })
            .collect();
        let mut cs: Vec<String> = cons.iter().map(|c| c.to_string_with(&name)).collect();
        cs.sort();
        out.extend(cs);
        for (a, b) in &self.diseqs {
            out.push(format!(
                "{} ##\\= {}",
                self.write_term(a),
                self.write_term(b)
            ));
        }
        out
    }
}

/// Domain in source syntax: `lo..hi` or a list of values.
pub fn domain_text(d: &crate::fd::Domain) -> String {
    use crate::fd::Domain;
    match d {
        Domain::Int(s) if s.ranges().len() == 1 => {
            let (lo, hi) = s.ranges()[0];
            format!("{}..{}", lo, hi)
        }
        Domain::Int(s) if s.size() > 64 => s.to_string(),
        _ => {
            let items: Vec<String> = d
                .values()
                .iter()
                .map(|v| value_term(v).to_string())
                .collect();
            format!("[{}]", items.join(", "))
        }
    }
}
