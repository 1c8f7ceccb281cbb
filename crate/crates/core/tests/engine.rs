use aclp_core::engine::{ic_order, Answer, Engine, EngineConfig, EngineError, IcOrder};
use aclp_core::parser::{parse_facts, parse_goal, parse_theory};
use aclp_core::term::PredKey;

fn engine(src: &str) -> Engine {
    Engine::new(&parse_theory(src).unwrap(), EngineConfig::default()).unwrap()
}

fn solve(e: &Engine, goal: &str, n: usize) -> Vec<Answer> {
    e.solve(&parse_goal(goal).unwrap(), &[])
        .unwrap()
        .take(n)
        .map(Result::unwrap)
        .collect()
}

fn delta(a: &Answer) -> Vec<String> {
    a.delta.iter().map(|t| a.write_term(t)).collect()
}

#[test]
fn single_abduction() {
    let e = engine("abducible_predicate(a/0).\ng :- a.");
    let got = solve(&e, "g", 10);
    assert_eq!(got.len(), 1);
    assert_eq!(delta(&got[0]), ["a"]);
}

#[test]
fn ic_refutes_only_hypothesis() {
    let e = engine("abducible_predicate(a/0).\ng :- a.\nic :- a.");
    assert!(solve(&e, "g", 10).is_empty());
}

#[test]
fn unknown_predicate() {
    let e = engine("abducible_predicate(a/0).\ng :- a.");
    let err = e
        .solve(&parse_goal("r").unwrap(), &[])
        .unwrap()
        .next()
        .unwrap()
        .unwrap_err();
    assert!(matches!(err, EngineError::UnknownPredicate(ref k) if *k == PredKey::new("r", 0)));
}

#[test]
fn fail_has_no_answers() {
    let e = engine("abducible_predicate(a/0).\ng :- a.");
    assert!(solve(&e, "fail", 10).is_empty());
    assert_eq!(solve(&e, "true", 10).len(), 1);
}

#[test]
fn clauses_in_source_order() {
    let e = engine("abducible_predicate(a/1).\nq :- a(1).\nq :- a(2).");
    let got: Vec<Vec<String>> = solve(&e, "q", 10).iter().map(delta).collect();
    assert_eq!(got, [["a(1)"], ["a(2)"]]);
}

#[test]
fn constraint_before_call() {
    let e = engine("abducible_predicate(a/1).\np(X) :- X :: 0..9, a(X).");
    let a = &solve(&e, "X #< 3, p(X)", 1)[0];
    assert_eq!(a.constraints(), ["X :: 0..2"]);
}

#[test]
fn reuse_before_new() {
    let e = engine("abducible_predicate(act/2).\ng(T, A) :- act(3, move(a, b)), act(T, A).");
    let got = solve(&e, "g(T, A)", 2);
    assert_eq!(delta(&got[0]), ["act(3, move(a, b))"]);
    assert_eq!(delta(&got[1]).len(), 2);
}

#[test]
fn ic_posts_negated_constraint() {
    let e = engine("abducible_predicate(a/1).\ng(X) :- X :: 1..5, a(X).\nic :- a(X), X #< 3.");
    let got = solve(&e, "g(X)", 10);
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].constraints(), ["X :: 3..5"]);
}

#[test]
fn naf_abduces_negation() {
    let e = engine(
        "abducible_predicate(not_q/0).\n\
         p :- not q.\n\
         ic :- not_q, q.",
    );
    let got = solve(&e, "p", 10);
    assert_eq!(got.len(), 1);
    assert_eq!(delta(&got[0]), ["not_q"]);
}

#[test]
fn naf_blocked_by_proof() {
    let e = engine(
        "abducible_predicate(not_q/0).\n\
         p :- not q.\n\
         q.\n\
         ic :- not_q, q.",
    );
    assert!(solve(&e, "p", 10).is_empty());
}

#[test]
fn initial_hypotheses_are_checked() {
    let e = engine("abducible_predicate(a/1).\nic :- a(X), X #> 1.\ng :- a(1).");
    let init = parse_facts("a(2).").unwrap();
    let err = e
        .solve(&parse_goal("g").unwrap(), &init)
        .map(|_| ())
        .unwrap_err();
    assert!(matches!(err, EngineError::InitialHypothesisInconsistent(ref h) if h == "a(2)"));
    let init = parse_facts("a(1).").unwrap();
    let got: Vec<Answer> = e
        .solve(&parse_goal("g").unwrap(), &init)
        .unwrap()
        .map(Result::unwrap)
        .collect();
    assert_eq!(delta(&got[0]), ["a(1)"]);
}

#[test]
fn depth_limit_is_reported() {
    let t = parse_theory("abducible_predicate(a/0).\nloop :- loop.").unwrap();
    let cfg = EngineConfig {
        max_depth: 50,
        ..Default::default()
    };
    let e = Engine::new(&t, cfg).unwrap();
    let items: Vec<_> = e
        .solve(&parse_goal("loop").unwrap(), &[])
        .unwrap()
        .collect();
    assert!(matches!(
        items.as_slice(),
        [Err(EngineError::DepthLimitExceeded(50))]
    ));
}

#[test]
fn ic_order_specific_first() {
    let t = parse_theory(
        "abducible_predicate(a/1).\nabducible_predicate(b/1).\n\
         ic :- a(X), b(X).\n\
         ic :- a(X), b(Y), X #< Y, Y #< 3.\n\
         ic :- a(1), b(2).",
    )
    .unwrap();
    let lens = |o| {
        ic_order(t.ics(), o)
            .iter()
            .map(|ic| ic.body.len())
            .collect::<Vec<_>>()
    };
    assert_eq!(lens(IcOrder::Source), [2, 4, 2]);
    assert_eq!(lens(IcOrder::SpecificFirst), [4, 2, 2]);
    let specific = ic_order(t.ics(), IcOrder::SpecificFirst);
    assert_eq!(specific[1].body[0].to_string(), "a(1)");
}

