//! Blocks world planning instances on top of the Event Calculus program,
//! and an independent plan simulator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use aclp_core::engine::{Engine, EngineConfig};
use aclp_core::parser::{parse_goal, parse_theory};
use aclp_core::term::Term;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Event Calculus axioms shared by every blocks world file.
pub const EVENT_CALCULUS: &str = include_str!("../../../corpus/event_calculus.aclp");

const DOMAIN: &str = "\
abducible_predicate(not_preconditions/2).

ic :- not_preconditions(A,T), preconditions(A,T).
ic :- act(T,A1), act(T,A2), A1 ## A2.

initiates(on(B,To), move(B,From,To)).
initiates(clear(From), move(B,From,To)).
terminates(on(B,From), move(B,From,To)).
terminates(clear(To), move(B,From,To)).

preconditions(move(B,From,To),T) :-
    block(B), B ## To, From ## To,
    holds_at(clear(B),T),
    holds_at(on(B,From),T),
    holds_at(clear(To),T).
";

/// Towers listed bottom to top, one per table position.
pub type Towers = Vec<Vec<String>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub positions: Vec<String>,
    pub initial: Towers,
    pub goal: Towers,
    pub max_time: usize,
}

/// Number of table positions for `n` blocks. One position per three blocks,
/// but never fewer than two: with a single position nothing can move.
pub fn positions_for(n: usize) -> usize {
    n.div_ceil(3).max(2)
}

fn block_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("b{}", i)
    }
}

/// A random start and a goal reached from it by a random walk of legal
/// moves. The horizon is the length of a shortest plan, so the planner
/// has exactly enough time steps.
pub fn generate(n: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = positions_for(n);
    let positions: Vec<String> = (1..=k).map(|i| format!("p{}", i)).collect();
    let mut blocks: Vec<String> = (0..n).map(block_name).collect();
    blocks.shuffle(&mut rng);
    let mut initial: Towers = vec![Vec::new(); k];
    for b in blocks {
        let i = rng.gen_range(0..k);
        initial[i].push(b);
    }
    // Self-avoiding walk: never revisit a configuration, so the goal
    // drifts away from the start.
    let mut goal = initial.clone();
    let steps = n.div_ceil(2) + 1;
    let mut seen = BTreeSet::from([goal.clone()]);
    let mut taken = 0;
    while taken < steps {
        let mut moves: Vec<(usize, usize)> = (0..k)
            .flat_map(|f| (0..k).map(move |t| (f, t)))
            .filter(|&(f, t)| f != t && !goal[f].is_empty())
            .filter(|&(f, t)| {
                let mut next = goal.clone();
                let b = next[f].pop().unwrap();
                next[t].push(b);
                !seen.contains(&next)
            })
            .collect();
        if moves.is_empty() {
            break;
        }
        moves.shuffle(&mut rng);
        let (f, t) = moves[0];
        let b = goal[f].pop().unwrap();
        goal[t].push(b);
        seen.insert(goal.clone());
        taken += 1;
    }
    let mut inst = Instance { positions, initial, goal, max_time: 0 };
    inst.max_time = shortest_plan(&inst).expect("the goal was reached by legal moves");
    inst
}

/// Length of a shortest plan, by breadth-first search over
/// configurations. Only practical for small instances.
pub fn shortest_plan(inst: &Instance) -> Option<usize> {
    let mut seen = BTreeSet::from([inst.initial.clone()]);
    let mut frontier = vec![inst.initial.clone()];
    let mut depth = 0;
    while !frontier.is_empty() {
        if frontier.contains(&inst.goal) {
            return Some(depth);
        }
        let mut next = Vec::new();
        for cfg in &frontier {
            for f in 0..cfg.len() {
                for t in 0..cfg.len() {
                    if f == t || cfg[f].is_empty() {
                        continue;
                    }
                    let mut c = cfg.clone();
                    let b = c[f].pop().unwrap();
                    c[t].push(b);
                    if seen.insert(c.clone()) {
                        next.push(c);
                    }
                }
            }
        }
        frontier = next;
        depth += 1;
    }
    None
}

fn on_facts(positions: &[String], towers: &Towers) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (p, tower) in positions.iter().zip(towers) {
        let mut below = p.clone();
        for b in tower {
            out.push((b.clone(), below.clone()));
            below = b.clone();
        }
    }
    out
}

fn clear_facts(positions: &[String], towers: &Towers) -> Vec<String> {
    positions.iter().zip(towers).map(|(p, t)| t.last().unwrap_or(p).clone()).collect()
}

impl Instance {
    pub fn blocks(&self) -> usize {
        self.initial.iter().map(Vec::len).sum()
    }

    /// The complete program: Event Calculus axioms, the blocks world
    /// domain and the initial state.
    pub fn theory_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "% Blocks world, {} blocks on {} table positions.", self.blocks(), self.positions.len()).unwrap();
        writeln!(s, "% Initial towers (bottom first): {}", show(&self.positions, &self.initial)).unwrap();
        writeln!(s, "% Goal towers: {}", show(&self.positions, &self.goal)).unwrap();
        writeln!(s, "% Goal: {}\n", self.goal_text()).unwrap();
        s.push_str(EVENT_CALCULUS.trim_start_matches(|c| c != '\n').trim_start());
        s.push('\n');
        s.push_str(DOMAIN);
        let mut blocks: Vec<&String> = self.initial.iter().flatten().collect();
        blocks.sort();
        let names: Vec<&str> = blocks.iter().map(|b| b.as_str()).collect();
        writeln!(s, "\nblock(B) :- B :: [{}].", names.join(",")).unwrap();
        writeln!(s, "maximum_time({}).", self.max_time).unwrap();
        for (b, below) in on_facts(&self.positions, &self.initial) {
            writeln!(s, "initially(on({},{}),0).", b, below).unwrap();
        }
        for c in clear_facts(&self.positions, &self.initial) {
            writeln!(s, "initially(clear({}),0).", c).unwrap();
        }
        s
    }

    /// Goal conjunction at the time after the last action, built layer by
    /// layer from the table up across all towers.
    pub fn goal_text(&self) -> String {
        let end = self.max_time + 1;
        let height = self.goal.iter().map(Vec::len).max().unwrap_or(0);
        let mut lits = Vec::new();
        for level in 0..height {
            for (p, tower) in self.positions.iter().zip(&self.goal) {
                if let Some(b) = tower.get(level) {
                    let below = if level == 0 { p } else { &tower[level - 1] };
                    lits.push(format!("holds_at(on({},{}),{})", b, below, end));
                }
            }
        }
        if lits.is_empty() {
            "true".into()
        } else {
            lits.join(", ")
        }
    }
}

fn show(positions: &[String], towers: &Towers) -> String {
    positions
        .iter()
        .zip(towers)
        .map(|(p, t)| format!("{}[{}]", p, t.join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}

/// A ground action sequence, sorted by time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanTrace {
    pub steps: Vec<(i64, Move)>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Move {
    pub block: String,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(String),
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Valid => f.write_str("VALID"),
            Verdict::Invalid(r) => write!(f, "INVALID({})", r),
        }
    }
}

fn atom(t: &Term) -> Option<String> {
    match t {
        Term::Atom(a) => Some(a.to_string()),
        _ => None,
    }
}

impl PlanTrace {
    /// Extracts the `act(T, move(B, From, To))` facts of a ground answer.
    /// Anything else in the hypotheses is ignored; a non-ground action is
    /// an error.
    pub fn from_hypotheses(delta: &[Term]) -> Result<PlanTrace, String> {
        let mut steps = Vec::new();
        for h in delta {
            if h.functor().map(|(f, n)| (&**f, n)) != Some(("act", 2)) {
                continue;
            }
            let bad = || format!("not a ground move: {}", h);
            let (t, a) = (&h.args()[0], &h.args()[1]);
            let Term::Int(t) = t else { return Err(bad()) };
            if a.functor().map(|(f, n)| (&**f, n)) != Some(("move", 3)) {
                return Err(bad());
            }
            let parts: Option<Vec<String>> = a.args().iter().map(atom).collect();
            let [block, from, to]: [String; 3] = parts.ok_or_else(bad)?.try_into().map_err(|_| bad())?;
            steps.push((*t, Move { block, from, to }));
        }
        steps.sort();
        Ok(PlanTrace { steps })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Seed of the shipped `n`-block instance: the first whose shortest plan
/// has at least three moves.
pub fn corpus_seed(n: usize) -> u64 {
    (1..)
        .find(|&s| generate(n, s).max_time >= 3)
        .expect("some seed gives a three-move goal")
}

/// First labelled plan the engine finds for `inst`.
pub fn plan(inst: &Instance) -> Result<PlanTrace, String> {
    let theory = parse_theory(&inst.theory_text()).map_err(|e| format!("{:?}", e))?;
    let config = EngineConfig {
        label: true,
        ..EngineConfig::default()
    };
    let engine = Engine::new(&theory, config).map_err(|e| e.to_string())?;
    let goal = parse_goal(&inst.goal_text()).map_err(|e| e.to_string())?;
    let answer = engine
        .solve(&goal, &[])
        .map_err(|e| e.to_string())?
        .next()
        .ok_or("no plan")?
        .map_err(|e| e.to_string())?;
    PlanTrace::from_hypotheses(&answer.delta)
}

/// Simulates `trace` from the initial towers and checks every
/// precondition and the goal towers.
pub fn validate_plan(inst: &Instance, trace: &PlanTrace) -> Verdict {
    let mut on: BTreeMap<String, String> = on_facts(&inst.positions, &inst.initial).into_iter().collect();
    let mut clear: BTreeSet<String> = clear_facts(&inst.positions, &inst.initial).into_iter().collect();
    let mut prev = None;
    for (t, m) in &trace.steps {
        if prev == Some(*t) {
            return Verdict::Invalid(format!("two actions at time {}", t));
        }
        prev = Some(*t);
        if *t < 1 || *t > inst.max_time as i64 {
            return Verdict::Invalid(format!("time {} outside 1..{}", t, inst.max_time));
        }
        let fail = |what: String| Verdict::Invalid(format!("precondition {} at time {}", what, t));
        if m.block == m.to || m.from == m.to {
            return fail(format!("{} \\= {}", m.from, m.to));
        }
        if !clear.contains(&m.block) {
            return fail(format!("clear({})", m.block));
        }
        if on.get(&m.block) != Some(&m.from) {
            return fail(format!("on({},{})", m.block, m.from));
        }
        if !clear.contains(&m.to) {
            return fail(format!("clear({})", m.to));
        }
        clear.remove(&m.to);
        clear.insert(m.from.clone());
        on.insert(m.block.clone(), m.to.clone());
    }
    for (b, below) in on_facts(&inst.positions, &inst.goal) {
        if on.get(&b) != Some(&below) {
            return Verdict::Invalid(format!("goal on({},{})", b, below));
        }
    }
    Verdict::Valid
}
