//! Benchmark suites over generated instances. Each row is checked by the
//! suite's independent validator; wall times are informative only.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::blocks::{self, Verdict};
use crate::jobshop;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Blocksworld,
    Jobshop,
    Reschedule,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Suite, String> {
        match s {
            "blocksworld" => Ok(Suite::Blocksworld),
            "jobshop" => Ok(Suite::Jobshop),
            "reschedule" => Ok(Suite::Reschedule),
            _ => Err(format!(
                "unknown suite `{}` (expected blocksworld, jobshop or reschedule)",
                s
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub size: usize,
    pub time: Duration,
    /// Moves, makespan, or change count after rescheduling.
    pub metric: usize,
    /// Change count of recomputing from scratch (reschedule only).
    pub fresh: Option<usize>,
    pub verdict: Verdict,
}

fn row(size: usize, start: Instant, outcome: Result<(usize, Option<usize>, Verdict), String>) -> Row {
    let time = start.elapsed();
    match outcome {
        Ok((metric, fresh, verdict)) => Row {
            size,
            time,
            metric,
            fresh,
            verdict,
        },
        Err(e) => Row {
            size,
            time,
            metric: 0,
            fresh: None,
            verdict: Verdict::Invalid(e),
        },
    }
}

pub fn run_one(suite: Suite, size: usize, seed: u64) -> Row {
    let start = Instant::now();
    let outcome = match suite {
        Suite::Blocksworld => {
            let inst = blocks::generate(size, seed);
            blocks::plan(&inst).map(|p| (p.len(), None, blocks::validate_plan(&inst, &p)))
        }
        Suite::Jobshop => {
            let inst = jobshop::generate(size, seed);
            jobshop::solve(&inst).map(|s| {
                let span = jobshop::makespan(&inst, &s) as usize;
                (span, None, jobshop::check_schedule(&inst, &s))
            })
        }
        Suite::Reschedule => {
            let inst = jobshop::generate(size, seed);
            jobshop::reschedule(&inst).map(|r| {
                let changed = inst.with_window(&r.old);
                let verdict = match (
                    jobshop::check_schedule(&changed, &r.rescheduled),
                    jobshop::check_schedule(&changed, &r.fresh),
                ) {
                    (Verdict::Valid, Verdict::Valid) => Verdict::Valid,
                    (Verdict::Invalid(e), _) => Verdict::Invalid(format!("rescheduled: {}", e)),
                    (_, Verdict::Invalid(e)) => Verdict::Invalid(format!("fresh: {}", e)),
                };
                (r.changes, Some(r.fresh_changes), verdict)
            })
        }
    };
    row(size, start, outcome)
}

pub fn bench(suite: Suite, sizes: &[usize], seed: u64) -> Vec<Row> {
    sizes.iter().map(|&n| run_one(suite, n, seed)).collect()
}

pub fn table(suite: Suite, rows: &[Row]) -> String {
    let mut s = String::new();
    match suite {
        Suite::Blocksworld => s.push_str("blocks  time(s)  moves  verdict\n"),
        Suite::Jobshop => s.push_str("tasks  time(s)  makespan  verdict\n"),
        Suite::Reschedule => s.push_str("tasks  time(s)  rescheduling  re-execution  verdict\n"),
    }
    for r in rows {
        let t = r.time.as_secs_f64();
        let _ = match suite {
            Suite::Blocksworld => writeln!(s, "{:>6}  {:>7.3}  {:>5}  {}", r.size, t, r.metric, r.verdict),
            Suite::Jobshop => writeln!(s, "{:>5}  {:>7.3}  {:>8}  {}", r.size, t, r.metric, r.verdict),
            Suite::Reschedule => writeln!(
                s,
                "{:>5}  {:>7.3}  {:>12}  {:>12}  {}",
                r.size,
                t,
                r.metric,
                r.fresh.unwrap_or(0),
                r.verdict
            ),
        };
    }
    s
}
