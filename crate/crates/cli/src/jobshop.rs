//! Job-shop scheduling instances, an interval-overlap scanner for
//! schedules, and the rescheduling experiment.
//!
//! Each task has an abduced start time `start(Task, S)`. Tasks of one job
//! run in order, tasks on one machine never overlap, and no task may run
//! on a machine while it is unavailable.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use aclp_core::engine::{Engine, EngineConfig};
use aclp_core::optimize::{change_count, min_changes, DEFAULT_MAX_ANSWERS};
use aclp_core::parser::{parse_goal, parse_theory};
use aclp_core::term::Term;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::blocks::Verdict;

const RULES: &str = "\
abducible_predicate(start/2).

schedule :- tasks(Ts), place(Ts).

place([]).
place([T|Ts]) :-
    task(T,_,_,D), horizon(H),
    S :: 0..H, S + D #<= H, start(T,S),
    place(Ts).

% One machine runs one task at a time.
ic :- start(T1,S1), start(T2,S2), T1 ## T2,
      task(T1,_,M,D1), task(T2,_,M,D2),
      S1 #< S2 + D2, S2 #< S1 + D1.

% A job's tasks run in order.
ic :- start(T1,S1), precedes(T1,T2), start(T2,S2),
      task(T1,_,_,D1), S2 #< S1 + D1.

% Nothing runs on a machine inside its unavailability window [A,B).
ic :- start(T,S), task(T,_,M,D), unavailable(M,A,B),
      S #< B, A #< S + D.
";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub name: String,
    pub job: usize,
    pub machine: usize,
    pub duration: i64,
}

/// Machine `machine` is down during `[from, to)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub machine: usize,
    pub from: i64,
    pub to: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub tasks: Vec<Task>,
    pub machines: usize,
    pub horizon: i64,
    pub window: Option<Window>,
}

/// Task name to start time.
pub type Schedule = BTreeMap<String, i64>;

/// `n` tasks split into jobs of at most four, on `ceil(n/4)` machines
/// (at least two). Durations are 1..=5. The horizon is the sum of all
/// durations plus slack, so even a serial schedule fits with room to
/// spare after a window is added.
pub fn generate(n: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let machines = n.div_ceil(4).max(2);
    let mut tasks = Vec::with_capacity(n);
    let mut job = 0;
    while tasks.len() < n {
        let len = rng.gen_range(2..=4).min(n - tasks.len());
        let mut ms: Vec<usize> = (0..machines).collect();
        ms.shuffle(&mut rng);
        for k in 0..len {
            tasks.push(Task {
                name: format!("t{}", tasks.len() + 1),
                job: job + 1,
                machine: ms[k % machines] + 1,
                duration: rng.gen_range(1..=5),
            });
        }
        job += 1;
    }
    let total: i64 = tasks.iter().map(|t| t.duration).sum();
    Instance {
        tasks,
        machines,
        horizon: total + 10,
        window: None,
    }
}

impl Instance {
    pub fn task(&self, name: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.name == name)
    }

    fn precedences(&self) -> Vec<(&Task, &Task)> {
        self.tasks
            .windows(2)
            .filter(|w| w[0].job == w[1].job)
            .map(|w| (&w[0], &w[1]))
            .collect()
    }

    pub fn theory_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "% Job shop: {} tasks, {} machines, horizon {}.",
            self.tasks.len(),
            self.machines,
            self.horizon
        );
        s.push('\n');
        s.push_str(RULES);
        s.push('\n');
        let _ = writeln!(s, "horizon({}).", self.horizon);
        let names: Vec<&str> = self.tasks.iter().map(|t| t.name.as_str()).collect();
        let _ = writeln!(s, "tasks([{}]).", names.join(", "));
        s.push('\n');
        s.push_str("% task(Task, Job, Machine, Duration).\n");
        for t in &self.tasks {
            let _ = writeln!(
                s,
                "task({}, j{}, m{}, {}).",
                t.name, t.job, t.machine, t.duration
            );
        }
        s.push('\n');
        for (a, b) in self.precedences() {
            let _ = writeln!(s, "precedes({}, {}).", a.name, b.name);
        }
        if let Some(w) = self.window {
            s.push('\n');
            let _ = writeln!(s, "unavailable(m{}, {}, {}).", w.machine, w.from, w.to);
        }
        s
    }

    /// A window on the busiest machine of `old`: the machine is down from
    /// its first task until its middle task would start, and at least two
    /// time units past the end of the first task. A from-scratch
    /// recomputation pushes the machine's later work back.
    pub fn with_window(&self, old: &Schedule) -> Instance {
        let mut lanes: BTreeMap<usize, Vec<(i64, &Task)>> = BTreeMap::new();
        for (name, &s) in old {
            let t = self.task(name).expect("scheduled task exists");
            lanes.entry(t.machine).or_default().push((s, t));
        }
        // Ties go to the lowest machine number.
        let (&machine, lane) = lanes
            .iter_mut()
            .rev()
            .max_by_key(|(_, l)| l.len())
            .expect("nonempty schedule");
        lane.sort_by_key(|(s, t)| (*s, t.name.clone()));
        let (from, first) = lane[0];
        let to = (from + first.duration + 2).max(lane[lane.len() / 2].0);
        let mut out = self.clone();
        out.window = Some(Window { machine, from, to });
        out
    }
}

pub fn start_facts(schedule: &Schedule) -> Vec<Term> {
    schedule
        .iter()
        .map(|(t, s)| Term::compound("start", vec![Term::atom(t), Term::Int(*s)]))
        .collect()
}

/// Ground `start/2` hypotheses as a schedule.
pub fn schedule_from(delta: &[Term]) -> Result<Schedule, String> {
    let mut out = Schedule::new();
    for h in delta {
        let Some((f, 2)) = h.functor() else { continue };
        if &**f != "start" {
            continue;
        }
        match h.args() {
            [Term::Atom(t), Term::Int(s)] => {
                if out.insert(t.to_string(), *s).is_some() {
                    return Err(format!("task {} started twice", t));
                }
            }
            _ => return Err(format!("non-ground hypothesis {}", h)),
        }
    }
    Ok(out)
}

/// Latest finishing time.
pub fn makespan(inst: &Instance, schedule: &Schedule) -> i64 {
    schedule
        .iter()
        .filter_map(|(n, s)| inst.task(n).map(|t| s + t.duration))
        .max()
        .unwrap_or(0)
}

/// Checks a schedule by sorting each machine's intervals and scanning
/// neighbours, independently of the constraint encoding.
pub fn check_schedule(inst: &Instance, schedule: &Schedule) -> Verdict {
    for t in &inst.tasks {
        if !schedule.contains_key(&t.name) {
            return Verdict::Invalid(format!("task {} not scheduled", t.name));
        }
    }
    let mut lanes: BTreeMap<usize, Vec<(i64, i64, &str)>> = BTreeMap::new();
    for (name, &s) in schedule {
        let Some(t) = inst.task(name) else {
            return Verdict::Invalid(format!("unknown task {}", name));
        };
        if s < 0 || s + t.duration > inst.horizon {
            return Verdict::Invalid(format!("task {} outside the horizon", name));
        }
        lanes
            .entry(t.machine)
            .or_default()
            .push((s, s + t.duration, name));
    }
    if let Some(w) = inst.window {
        lanes
            .entry(w.machine)
            .or_default()
            .push((w.from, w.to, "unavailable"));
    }
    for (m, lane) in &mut lanes {
        lane.sort();
        for pair in lane.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b.0 < a.1 {
                return Verdict::Invalid(format!("{} and {} overlap on m{}", a.2, b.2, m));
            }
        }
    }
    for (a, b) in inst.precedences() {
        if schedule[&b.name] < schedule[&a.name] + a.duration {
            return Verdict::Invalid(format!("{} starts before {} ends", b.name, a.name));
        }
    }
    Verdict::Valid
}

/// Outcome of recomputing a schedule after a window is added.
#[derive(Clone, Debug)]
pub struct Reschedule {
    pub old: Schedule,
    pub window: Window,
    /// Closest schedule to the old one, by `min_changes`.
    pub rescheduled: Schedule,
    pub changes: usize,
    /// First answer of solving again from scratch.
    pub fresh: Schedule,
    pub fresh_changes: usize,
}

fn engine(inst: &Instance, label: bool) -> Result<Engine, String> {
    let theory = parse_theory(&inst.theory_text()).map_err(|e| format!("{:?}", e))?;
    let config = EngineConfig {
        label,
        ..EngineConfig::default()
    };
    Engine::new(&theory, config).map_err(|e| e.to_string())
}

/// First labelled schedule.
pub fn solve(inst: &Instance) -> Result<Schedule, String> {
    let eng = engine(inst, true)?;
    let goal = parse_goal("schedule").map_err(|e| e.to_string())?;
    let answer = eng
        .solve(&goal, &[])
        .map_err(|e| e.to_string())?
        .next()
        .ok_or("no schedule")?
        .map_err(|e| e.to_string())?;
    schedule_from(&answer.delta)
}

/// Schedules `inst`, puts a window over a task in the middle of that
/// schedule, and recomputes it both ways.
pub fn reschedule(inst: &Instance) -> Result<Reschedule, String> {
    let old = solve(inst)?;
    let changed = inst.with_window(&old);
    let window = changed.window.expect("window set");
    let reference = start_facts(&old);

    let fresh = solve(&changed)?;
    let fresh_changes = change_count(&start_facts(&fresh), &reference);

    let eng = engine(&changed, false)?;
    let goal = parse_goal("schedule").map_err(|e| e.to_string())?;
    let answers = eng.solve(&goal, &[]).map_err(|e| e.to_string())?;
    let (answer, changes) = min_changes(
        answers,
        &reference,
        DEFAULT_MAX_ANSWERS,
        eng.config().strategy,
    )
    .map_err(|e| e.to_string())?;
    Ok(Reschedule {
        old,
        window,
        rescheduled: schedule_from(&answer.delta)?,
        changes,
        fresh,
        fresh_changes,
    })
}
