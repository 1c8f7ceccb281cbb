//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! fails. Criteria run one after another so the timings are honest.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use aclp::{blocks, jobshop};
use aclp_core::engine::{Engine, EngineConfig};
use aclp_core::parser::{parse_goal, parse_theory};
use oracle::ground::{check_case, random_naf, random_theory};
use oracle::store::{brute, labelled, random_constraint, random_store};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn soundness() -> Outcome {
    let start = Instant::now();
    let (mut answers, mut labellings, mut exhausted) = (0, 0, 0);
    for seed in 0..500 {
        let case = random_theory(&mut rng(seed));
        match check_case(&case, 20) {
            Ok(c) => {
                answers += c.answers;
                labellings += c.labellings;
                exhausted += c.exhausted as usize;
            }
            Err(e) => return outcome(false, format!("seed {}: {}", seed, e)),
        }
    }
    let t = start.elapsed();
    outcome(
        t < Duration::from_secs(60),
        format!(
            "500 theories, {} answers, {} labellings, {} stopped at the step budget, {}",
            answers,
            labellings,
            exhausted,
            secs(t)
        ),
    )
}

fn store_oracle() -> Outcome {
    let start = Instant::now();
    let mut solutions = 0;
    for seed in 0..1000 {
        let s = random_store(&mut rng(seed));
        let (got, count) = labelled(&s, &[]);
        if count != got.len() {
            return outcome(false, format!("seed {}: duplicate valuations", seed));
        }
        if got != brute(&s, &[]) {
            return outcome(false, format!("seed {}: {:?}", seed, s));
        }
        solutions += count;
    }
    let t = start.elapsed();
    outcome(
        t < Duration::from_secs(30),
        format!("1000 stores, {} solutions, {}", solutions, secs(t)),
    )
}

fn negation() -> Outcome {
    for seed in 0..1000 {
        let mut r = rng(seed);
        let s = random_store(&mut r);
        let c = random_constraint(&mut r, &s.vars, 2);
        if c.negate().negate() != c {
            return outcome(false, format!("seed {}: not an involution: {:?}", seed, c));
        }
        let (all, _) = labelled(&s, &[]);
        let (yes, _) = labelled(&s, &[c.clone()]);
        let (no, _) = labelled(&s, &[c.negate()]);
        if !yes.is_disjoint(&no) || yes.union(&no).cloned().collect::<std::collections::BTreeSet<_>>() != all {
            return outcome(false, format!("seed {}: no partition for {:?}", seed, c));
        }
    }
    outcome(true, "1000 stores".into())
}

fn naf() -> Outcome {
    let mut answers = 0;
    for seed in 0..50 {
        match check_case(&random_naf(&mut rng(seed)), 20) {
            Ok(c) => answers += c.answers,
            Err(e) => return outcome(false, format!("seed {}: {}", seed, e)),
        }
    }
    outcome(true, format!("50 programs, {} answers", answers))
}

fn planning() -> Outcome {
    let mut report = Vec::new();
    let mut pass = true;
    for n in 3..=8 {
        let inst = blocks::generate(n, blocks::corpus_seed(n));
        let start = Instant::now();
        let result = blocks::plan(&inst);
        let t = start.elapsed();
        match result {
            Ok(trace) => {
                let verdict = blocks::validate_plan(&inst, &trace);
                let ok = verdict == blocks::Verdict::Valid && t < Duration::from_secs(120);
                pass &= ok;
                report.push(format!("{}: {} moves {:?} {}", n, trace.len(), verdict, secs(t)));
            }
            Err(e) => {
                pass = false;
                report.push(format!("{}: {} {}", n, e, secs(t)));
            }
        }
    }
    outcome(pass, report.join("; "))
}

fn rescheduling() -> Outcome {
    let mut report = Vec::new();
    let mut pass = true;
    for n in [10, 25] {
        let mut strict = 0;
        let mut pairs = Vec::new();
        for seed in 1..=10 {
            let inst = jobshop::generate(n, seed);
            match jobshop::reschedule(&inst) {
                Ok(r) => {
                    let changed = inst.with_window(&r.old);
                    for s in [&r.rescheduled, &r.fresh] {
                        if let blocks::Verdict::Invalid(why) = jobshop::check_schedule(&changed, s) {
                            return outcome(false, format!("{} tasks seed {}: {}", n, seed, why));
                        }
                    }
                    strict += (r.changes < r.fresh_changes) as usize;
                    pairs.push(format!("{}/{}", r.changes, r.fresh_changes));
                }
                Err(e) => return outcome(false, format!("{} tasks seed {}: {}", n, seed, e)),
            }
        }
        pass &= strict >= 9;
        report.push(format!("{} tasks {}/10 strict [{}]", n, strict, pairs.join(" ")));
    }
    outcome(pass, report.join("; "))
}

const REUSE_THEORY: &str = "\
abducible_predicate(has/1).
need(X) :- X :: 1..5, has(X).
ic :- has(X), X #= 4.
";

fn reuse_first() -> Outcome {
    let theory = parse_theory(REUSE_THEORY).unwrap();
    let engine = Engine::new(&theory, EngineConfig::default()).unwrap();
    let goal = parse_goal("need(A), need(B), need(C)").unwrap();
    let sizes: Vec<usize> = engine
        .solve(&goal, &[])
        .unwrap()
        .take(10)
        .map(|a| a.unwrap().delta.len())
        .collect();
    let pass = sizes.len() > 1
        && sizes.iter().min() == sizes.first()
        && sizes.iter().any(|&s| s > sizes[0]);
    outcome(pass, format!("|delta| of the first answers {:?}", sizes))
}

fn corpus_files(dir: &Path, out: &mut Vec<PathBuf>) {
    let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            corpus_files(&p, out);
        } else if matches!(p.extension().and_then(|e| e.to_str()), Some("aclp" | "facts")) {
            out.push(p);
        }
    }
}

fn round_trip() -> Outcome {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut files = Vec::new();
    corpus_files(&root, &mut files);
    for f in &files {
        let src = std::fs::read_to_string(f).unwrap();
        let name = f.strip_prefix(&root).unwrap().display();
        let t = match parse_theory(&src) {
            Ok(t) => t,
            Err(e) => return outcome(false, format!("{}: {:?}", name, e)),
        };
        match parse_theory(&t.to_string()) {
            Ok(again) if again == t => {}
            _ => return outcome(false, format!("{}: printed form differs", name)),
        }
    }
    let ec = files.iter().any(|f| f.ends_with("event_calculus.aclp"));
    outcome(ec && files.len() > 1, format!("{} files", files.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("soundness", soundness),
        ("store oracle", store_oracle),
        ("constraint negation", negation),
        ("negation as failure", naf),
        ("blocks world planning", planning),
        ("rescheduling", rescheduling),
        ("reuse first", reuse_first),
        ("corpus round trip", round_trip),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += !o.pass as usize;
        println!(
            "criterion {} {}: {} ({})",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
