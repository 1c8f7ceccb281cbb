//! One `solve` invocation: load, answer, render.

use std::path::PathBuf;

use aclp_core::engine::{Answer, Engine, EngineConfig, EngineError, IcOrder};
use aclp_core::fd::LabelStrategy;
use aclp_core::optimize::{minimize, min_changes, DEFAULT_MAX_ANSWERS};
use aclp_core::parser::{parse_facts, parse_goal, parse_source, ParseError};
use aclp_core::term::Term;

use crate::render::{self, Rendered};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    First,
    All(usize),
    Minimize(String),
    /// Closest answer to the hypotheses in this file.
    MinChanges(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub theory: PathBuf,
    pub goal: String,
    pub initial: Option<PathBuf>,
    pub mode: Mode,
    pub label: bool,
    pub strategy: LabelStrategy,
    pub ic_order: IcOrder,
    pub max_depth: usize,
    pub max_answers: usize,
    pub format: Format,
}

impl RunConfig {
    pub fn new(theory: impl Into<PathBuf>, goal: &str) -> RunConfig {
        RunConfig {
            theory: theory.into(),
            goal: goal.to_string(),
            initial: None,
            mode: Mode::First,
            label: false,
            strategy: LabelStrategy::InputOrder,
            ic_order: IcOrder::Source,
            max_depth: EngineConfig::default().max_depth,
            max_answers: DEFAULT_MAX_ANSWERS,
            format: Format::Text,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutput {
    /// 0 with answers, 1 without, 2 on error.
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn failure(msg: String) -> RunOutput {
    RunOutput {
        code: 2,
        stdout: String::new(),
        stderr: msg,
    }
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {}\n", path.display(), e))
}

fn spanned(path: &PathBuf, errs: &[ParseError]) -> String {
    errs.iter()
        .map(|e| format!("{}: {}\n", path.display(), e))
        .collect()
}

fn facts(path: &PathBuf) -> Result<Vec<Term>, String> {
    parse_facts(&read(path)?).map_err(|errs| spanned(path, &errs))
}

pub fn run(cfg: &RunConfig) -> RunOutput {
    match answers(cfg) {
        Ok((answers, incomplete)) => {
            let rendered: Vec<Rendered> = answers
                .iter()
                .map(|(a, c)| Rendered {
                    answer: a,
                    changes: *c,
                })
                .collect();
            let stdout = match cfg.format {
                Format::Text => render::text(&rendered),
                Format::Json => render::json(&render::document(&rendered, incomplete)),
            };
            let stderr = if incomplete {
                format!("{}\n", EngineError::DepthLimitExceeded(cfg.max_depth))
            } else {
                String::new()
            };
            let code = if answers.is_empty() { 1 } else { 0 };
            RunOutput {
                code,
                stdout,
                stderr,
            }
        }
        Err(msg) => failure(msg),
    }
}

type Found = (Vec<(Answer, Option<usize>)>, bool);

fn answers(cfg: &RunConfig) -> Result<Found, String> {
    let text = read(&cfg.theory)?;
    let theory = parse_source(&text)
        .and_then(|u| u.to_theory())
        .map_err(|errs| spanned(&cfg.theory, &errs))?;
    let goal = parse_goal(&cfg.goal).map_err(|e| format!("goal: {}\n", e))?;
    let initial = match &cfg.initial {
        Some(p) => facts(p)?,
        None => Vec::new(),
    };
    let reference = match &cfg.mode {
        Mode::MinChanges(p) => facts(p)?,
        _ => Vec::new(),
    };
    let config = EngineConfig {
        max_depth: cfg.max_depth,
        ic_order: cfg.ic_order,
        label: cfg.label,
        strategy: cfg.strategy,
        ..EngineConfig::default()
    };
    let engine = Engine::new(&theory, config).map_err(|e| format!("{}\n", e))?;
    let stream = engine
        .solve(&goal, &initial)
        .map_err(|e| format!("{}\n", e))?;
    let limit = match &cfg.mode {
        Mode::All(n) => *n,
        _ => 1,
    };
    if let Mode::MinChanges(_) = cfg.mode {
        return match min_changes(stream, &reference, cfg.max_answers, cfg.strategy) {
            Ok((a, c)) => Ok((vec![(a, Some(c))], false)),
            Err(aclp_core::optimize::OptError::EmptyStream) => Ok((Vec::new(), false)),
            Err(e) => Err(format!("{}\n", e)),
        };
    }
    let mut out = Vec::new();
    let mut incomplete = false;
    for item in stream {
        match item {
            Ok(a) => out.push((a, None)),
            Err(EngineError::DepthLimitExceeded(_)) => incomplete = true,
            Err(e) => return Err(format!("{}\n", e)),
        }
        if out.len() >= limit {
            break;
        }
    }
    if let Mode::Minimize(var) = &cfg.mode {
        if let Some((a, _)) = out.pop() {
            let best = minimize(&a, var, cfg.strategy).map_err(|e| format!("{}\n", e))?;
            out = best.into_iter().map(|b| (b, None)).collect();
        }
    }
    Ok((out, incomplete))
}
