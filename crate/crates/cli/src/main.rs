use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use aclp::bench::{self, Suite};
use aclp::run::{run, Format, Mode, RunConfig};
use aclp_core::engine::IcOrder;
use aclp_core::fd::LabelStrategy;
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aclp", version, about = "Abductive constraint logic programming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Input,
    Ff,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Source,
    Specific,
}

#[derive(Subcommand)]
enum Command {
    /// Answer a goal against a theory file.
    #[command(group(ArgGroup::new("mode").args(["all", "minimize", "min_changes"])))]
    Solve {
        file: PathBuf,
        #[arg(long)]
        goal: String,
        /// Ground hypotheses to start from, one fact per line.
        #[arg(long)]
        initial: Option<PathBuf>,
        /// Print up to N answers.
        #[arg(long, value_name = "N")]
        all: Option<usize>,
        /// Minimize this query variable over the first answer.
        #[arg(long, value_name = "VAR")]
        minimize: Option<String>,
        /// Return the answer closest to the hypotheses in this file.
        #[arg(long, value_name = "F")]
        min_changes: Option<PathBuf>,
        /// Answers examined by --min-changes.
        #[arg(long, value_name = "N", default_value_t = aclp_core::optimize::DEFAULT_MAX_ANSWERS)]
        max_answers: usize,
        /// Instantiate every answer with its first valuation.
        #[arg(long)]
        label: bool,
        #[arg(long, value_enum, default_value = "input")]
        strategy: Strategy,
        #[arg(long, value_enum, default_value = "source")]
        ic_order: Order,
        #[arg(long)]
        json: bool,
        #[arg(long, value_name = "N", default_value_t = 10_000)]
        max_depth: usize,
    },
    /// Run a benchmark suite: blocksworld, jobshop or reschedule.
    Bench {
        suite: Suite,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::Solve {
            file,
            goal,
            initial,
            all,
            minimize,
            min_changes,
            max_answers,
            label,
            strategy,
            ic_order,
            json,
            max_depth,
        } => {
            let mode = match (all, minimize, min_changes) {
                (Some(n), _, _) => Mode::All(n),
                (_, Some(v), _) => Mode::Minimize(v),
                (_, _, Some(f)) => Mode::MinChanges(f),
                _ => Mode::First,
            };
            let cfg = RunConfig {
                theory: file,
                goal,
                initial,
                mode,
                label,
                strategy: match strategy {
                    Strategy::Input => LabelStrategy::InputOrder,
                    Strategy::Ff => LabelStrategy::FirstFail,
                },
                ic_order: match ic_order {
                    Order::Source => IcOrder::Source,
                    Order::Specific => IcOrder::SpecificFirst,
                },
                max_depth,
                max_answers,
                format: if json { Format::Json } else { Format::Text },
            };
            let out = run(&cfg);
            print!("{}", out.stdout);
            eprint!("{}", out.stderr);
            let _ = std::io::stdout().flush();
            ExitCode::from(out.code as u8)
        }
        Command::Bench { suite, sizes, seed } => {
            let rows = bench::bench(suite, &sizes, seed);
            print!("{}", bench::table(suite, &rows));
            ExitCode::SUCCESS
        }
    }
}
