//! Ground evaluation of small theories: least models by brute-force
//! instantiation over a finite integer domain, then goal and integrity
//! checks on each labelled answer.

use std::collections::BTreeSet;

use aclp_core::engine::{Answer, Engine, EngineConfig, EngineError};
use aclp_core::literal::{CLit, DomainSpec, Literal};
use aclp_core::parser::{parse_goal, parse_theory};
use aclp_core::term::{Term, Var};
use aclp_core::theory::AbductiveTheory;
use rand::seq::SliceRandom;
use rand::Rng;

/// A generated program with its goal and the integer domain every
/// variable ranges over.
#[derive(Clone, Debug)]
pub struct Case {
    pub source: String,
    pub goal: String,
    pub domain: Vec<i64>,
}

fn constraint(rng: &mut impl Rng, a: &str, b: &str, top: i64) -> String {
    let c = rng.gen_range(0..=top);
    match rng.gen_range(0..6) {
        0 => format!("{} #< {}", a, b),
        1 => format!("{} ## {}", a, b),
        2 => format!("{} #= {} + 1", a, b),
        3 => format!("{} #>= {}", a, c),
        4 => format!("{} + {} #= {}", a, b, c),
        _ => format!("{} #<= {} #\\/ {} #= {}", a, c, b, c),
    }
}

/// At most six clauses over `p0..p2/1`, at most three abducibles
/// `a0..a2/1` and three integrity constraints; domains have at most five
/// values. `p_i` only calls `p_k` with `k > i`, so derivations are finite.
pub fn random_theory(rng: &mut impl Rng) -> Case {
    let top = rng.gen_range(1..=4);
    let nab = rng.gen_range(1..=3);
    let abd: Vec<String> = (0..nab).map(|i| format!("a{}", i)).collect();
    let mut src = String::new();
    for a in &abd {
        src.push_str(&format!("abducible_predicate({}/1).\n", a));
    }
    let nclauses = rng.gen_range(1..=6);
    for k in 0..nclauses {
        // Every predicate gets a clause before any gets a second one.
        let i = if k < 3 { k } else { rng.gen_range(0..3) };
        let vars = ["X", "Y"];
        let mut body = vec![format!("X :: 0..{}", top), format!("Y :: 0..{}", top)];
        for _ in 0..rng.gen_range(1..=3) {
            let v = vars.choose(rng).unwrap();
            let w = if *v == "X" { "Y" } else { "X" };
            match rng.gen_range(0..4) {
                0 | 1 => body.push(format!("{}({})", abd.choose(rng).unwrap(), v)),
                2 if i < 2 => body.push(format!("p{}({})", rng.gen_range(i + 1..3), v)),
                _ => body.push(constraint(rng, v, w, top)),
            }
        }
        src.push_str(&format!("p{}(X) :- {}.\n", i, body.join(", ")));
    }
    for _ in 0..rng.gen_range(0..=3) {
        let mut body = vec![format!("{}(X)", abd.choose(rng).unwrap())];
        if rng.gen_bool(0.6) {
            body.push(format!("{}(Y)", abd.choose(rng).unwrap()));
            body.push(constraint(rng, "X", "Y", top));
        } else if rng.gen_bool(0.5) {
            body.push(format!("p{}(X)", rng.gen_range(0..3)));
        } else {
            body.push(format!("X #>= {}", rng.gen_range(0..=top)));
        }
        src.push_str(&format!("ic :- {}.\n", body.join(", ")));
    }
    Case {
        source: src,
        goal: format!("X :: 0..{}, p0(X)", top),
        domain: (0..=top).collect(),
    }
}

/// Propositional programs with negation: `p0..p3` over abducibles `a0`,
/// `a1`, bodies mixing `a_j`, `p_k` and `not p_k` for `k > i`. Each
/// negated predicate gets its `not_` declaration and canonical constraint.
pub fn random_naf(rng: &mut impl Rng) -> Case {
    let mut src = String::from("abducible_predicate(a0/0).\nabducible_predicate(a1/0).\n");
    let mut negated = BTreeSet::new();
    for i in 0..4 {
        let lo = if i == 0 { 1 } else { 0 };
        for _ in 0..rng.gen_range(lo..=2) {
            let mut body = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                let k = if i < 3 { rng.gen_range(i + 1..4) } else { 4 };
                match rng.gen_range(0..3) {
                    0 => body.push(format!("a{}", rng.gen_range(0..2))),
                    1 if k < 4 => body.push(format!("p{}", k)),
                    _ if k < 4 => {
                        negated.insert(k);
                        body.push(format!("not p{}", k));
                    }
                    _ => body.push(format!("a{}", rng.gen_range(0..2))),
                }
            }
            src.push_str(&format!("p{} :- {}.\n", i, body.join(", ")));
        }
    }
    for k in negated {
        src.push_str(&format!(
            "abducible_predicate(not_p{k}/0).\nic :- not_p{k}, p{k}.\n"
        ));
    }
    if rng.gen_bool(0.3) {
        src.push_str("ic :- a0, a1.\n");
    }
    Case {
        source: src,
        goal: "p0".into(),
        domain: vec![0],
    }
}

fn arith(t: &Term) -> Option<i64> {
    match t {
        Term::Int(i) => Some(*i),
        Term::Compound(f, args) => match (&**f, &args[..]) {
            ("+", [a, b]) => Some(arith(a)? + arith(b)?),
            ("-", [a, b]) => Some(arith(a)? - arith(b)?),
            ("*", [a, b]) => Some(arith(a)? * arith(b)?),
            ("-", [a]) => Some(-arith(a)?),
            _ => None,
        },
        _ => None,
    }
}

fn in_spec(x: &Term, d: &DomainSpec) -> bool {
    match d {
        DomainSpec::Range(lo, hi) => match (arith(x), arith(lo), arith(hi)) {
            (Some(x), Some(lo), Some(hi)) => lo <= x && x <= hi,
            _ => false,
        },
        DomainSpec::Set(items) => items.contains(x),
    }
}

fn holds(c: &CLit) -> bool {
    match c {
        CLit::Rel(op, a, b) => match (arith(a), arith(b)) {
            (Some(x), Some(y)) => op.holds(x, y),
            _ => false,
        },
        CLit::TermEq(a, b) => a == b,
        CLit::TermNeq(a, b) => a != b,
        CLit::And(a, b) => holds(a) && holds(b),
        CLit::Or(a, b) => holds(a) || holds(b),
        CLit::In(x, d) => in_spec(x, d),
        CLit::NotIn(x, d) => !in_spec(x, d),
    }
}

fn ground_atom(t: &Term) -> String {
    t.to_string()
}

/// `not p` read as the atom `not_p`.
fn lit_atom(l: &Literal) -> Option<String> {
    match l {
        Literal::Atom(t) => Some(ground_atom(t)),
        Literal::Naf(t) => Some(format!("not_{}", ground_atom(t))),
        Literal::Constraint(_) => None,
    }
}

fn body_true(body: &[Literal], model: &BTreeSet<String>) -> bool {
    body.iter().all(|l| match l {
        Literal::Constraint(c) => holds(c),
        Literal::Atom(t) if &*t.to_string() == "true" => true,
        _ => model.contains(&lit_atom(l).unwrap()),
    })
}

fn assignments(n: u32, dom: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|a| {
                dom.iter().map(move |x| {
                    let mut b = a.clone();
                    b.push(*x);
                    b
                })
            })
            .collect();
    }
    out
}

fn subst_lits(lits: &[Literal], asg: &[i64]) -> Vec<Literal> {
    lits.iter()
        .map(|l| l.map_vars(&mut |v: Var| Term::Int(asg[v.0 as usize])))
        .collect()
}

/// Least model of the program plus `delta` (ground atoms, `not_p` ones
/// included) with every clause variable ranging over `dom`.
pub fn least_model(theory: &AbductiveTheory, delta: &[Term], dom: &[i64]) -> BTreeSet<String> {
    let mut model: BTreeSet<String> = delta.iter().map(ground_atom).collect();
    loop {
        let mut grew = false;
        for c in theory.clauses() {
            for asg in assignments(c.var_count(), dom) {
                let body = subst_lits(&c.body, &asg);
                if body_true(&body, &model) {
                    let head = c.head.map_vars(&mut |v: Var| Term::Int(asg[v.0 as usize]));
                    grew |= model.insert(ground_atom(&head));
                }
            }
        }
        if !grew {
            return model;
        }
    }
}

/// Integrity constraints whose body holds in `model`, printed.
pub fn violated(theory: &AbductiveTheory, model: &BTreeSet<String>, dom: &[i64]) -> Vec<String> {
    theory
        .ics()
        .iter()
        .filter(|ic| {
            assignments(ic.var_count(), dom)
                .iter()
                .any(|asg| body_true(&subst_lits(&ic.body, asg), model))
        })
        .map(|ic| ic.to_source())
        .collect()
}

/// Some theories have no answers but an exponential failed search; the
/// oracle checks what comes out within this many steps.
pub const STEP_BUDGET: usize = 50_000;

/// Counts from checking one case.
#[derive(Default, Debug, Clone, Copy)]
pub struct Checked {
    pub answers: usize,
    pub labellings: usize,
    /// The step budget ran out before `max_answers` answers.
    pub exhausted: bool,
}

/// Every labelling of each of the first `max_answers` answers: the goal
/// instance is in the least model of program plus hypotheses, no integrity
/// constraint is violated, and every `not_p` hypothesis has `p` false.
pub fn check_case(case: &Case, max_answers: usize) -> Result<Checked, String> {
    let theory = parse_theory(&case.source).map_err(|e| format!("{:?}", e))?;
    let config = EngineConfig {
        max_steps: Some(STEP_BUDGET),
        ..EngineConfig::default()
    };
    let engine = Engine::new(&theory, config).map_err(|e| e.to_string())?;
    let goal = parse_goal(&case.goal).map_err(|e| e.to_string())?;
    let mut done = Checked::default();
    // Labellings that differ only in variables outside the hypotheses and
    // the goal give the same instance; check each instance once.
    let mut seen = BTreeSet::new();
    let stream = engine.solve(&goal, &[]).map_err(|e| e.to_string())?;
    for item in stream.take(max_answers) {
        let answer = match item {
            Ok(a) => a,
            Err(EngineError::StepLimitExceeded(_)) => {
                done.exhausted = true;
                break;
            }
            Err(e) => return Err(e.to_string()),
        };
        done.answers += 1;
        let mut store = answer.store.clone();
        for val in store.label(&answer.label_order(), Default::default()) {
            done.labellings += 1;
            let a = answer.labelled(val);
            let key = format!("{:?} {:?} {:?}", a.delta, a.bindings, a.diseqs);
            if seen.insert(key) {
                check_instance(case, &theory, &goal.lits, &a)?;
            }
        }
    }
    Ok(done)
}

fn check_instance(
    case: &Case,
    theory: &AbductiveTheory,
    goal: &[Literal],
    a: &Answer,
) -> Result<(), String> {
    if a.diseqs.iter().any(|(x, y)| x == y) {
        // Excluded by a residual disequality, so not an instance.
        return Ok(());
    }
    if let Some(h) = a.delta.iter().find(|h| !h.is_ground()) {
        return Err(format!("labelled hypothesis {} is not ground", h));
    }
    let model = least_model(theory, &a.delta, &case.domain);
    let delta: Vec<String> = a.delta.iter().map(ground_atom).collect();
    let fail = |why: String| Err(format!("{}\ndelta {:?}\n{}", why, delta, case.source));
    let values: Vec<i64> = a
        .bindings
        .iter()
        .filter_map(|(_, t)| arith(t))
        .collect();
    if values.len() != a.bindings.len() {
        return fail(format!("non-integer bindings {:?}", a.bindings));
    }
    let inst: Vec<Literal> = goal
        .iter()
        .map(|l| l.map_vars(&mut |v: Var| Term::Int(values[v.0 as usize])))
        .collect();
    if !body_true(&inst, &model) {
        return fail(format!("goal not derived with {:?}", values));
    }
    let bad = violated(theory, &model, &case.domain);
    if !bad.is_empty() {
        return fail(format!("violated {:?}", bad));
    }
    for h in &delta {
        if let Some(p) = h.strip_prefix("not_") {
            if model.contains(p) {
                return fail(format!("{} hypothesized but {} derivable", h, p));
            }
        }
    }
    Ok(())
}
