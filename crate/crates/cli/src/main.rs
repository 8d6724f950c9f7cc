//! Command-line front end: compile forests, explain decisions, verify
//! against brute force.

use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

const SCHEMAS: &str = "\
JSON formats:
  forest     {\"features\": [{\"name\": N, \"states\": [S, ...]}, ...],
              \"classes\": [C, ...],
              \"trees\": [{\"node\": {\"var\": i, \"edges\": [{\"states\": [s, ...], \"child\": T}, ...]}}
                        | {\"leaf\": class index}, ...]}
             The edges of every node partition the states of its variable.
  instance   {\"feature name\": \"state name\", ...} with every feature present.
  artifact   {\"class\", \"class_index\", \"mode\", \"meta\", \"circuit\" | \"graphs\"};
             compile without --class writes a JSON array of artifacts.
  literal    {\"var\": N, \"states\": [S, ...]}; terms and clauses are lists of literals,
             sorted by size, then variables, then states.
  explain    {\"class\", \"instance\", \"sufficient_reasons\", \"necessary_reasons\",
              \"complete_reason\", \"general_reason\", \"robustness\": {\"distance\", \"vars\"},
              \"shortest_gnrs\", \"flips\": [instance, ...]}, one key per requested kind.
  ce         {\"class\", \"target\", \"instance\", \"contrastive_explanations\": [clause, ...]}
  verify     {\"passed\", \"checks\", \"failed\", \"summary\", \"failures\", \"skipped\", \"seconds\"}
  stats      {\"classes\": [{\"class\", \"modes\": {mode: {\"nodes\", \"edges\", \"seconds\"}}}]}

Machine output goes to standard output; diagnostics and the stats table go to
standard error. The exit code is 0 exactly when no error occurred.";

#[derive(Debug, Parser)]
#[command(
    name = "foret",
    version,
    about = "Compile random forests into circuits and explain their decisions"
)]
#[command(after_long_help = SCHEMAS)]
pub struct Cli {
    #[command(flatten)]
    pub limits: Limits,

    #[command(subcommand)]
    pub command: Command,
}

/// Resource limits, settable by flag or by `FORET_*` environment variable.
#[derive(Debug, Clone, Args)]
pub struct Limits {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "FORET_WORKERS")]
    pub workers: Option<NonZeroUsize>,

    /// Cap on decision-graph nodes created by Apply.
    #[arg(long, global = true, env = "FORET_NODE_BUDGET")]
    pub node_budget: Option<NonZeroUsize>,

    /// Cap on decision-graph construction time, in seconds.
    #[arg(long, global = true, env = "FORET_TIME_BUDGET", value_parser = positive_seconds)]
    pub time_budget: Option<f64>,

    /// Cap on the size of intermediate term and clause sets.
    #[arg(long, global = true, env = "FORET_MAX_ITEMS", default_value = "200000")]
    pub max_items: NonZeroUsize,

    /// Cap on the number of enumerated flips.
    #[arg(long, global = true, env = "FORET_MAX_FLIPS", default_value = "1000000")]
    pub max_flips: NonZeroUsize,

    /// Cap on worlds enumerated by the brute-force oracle.
    #[arg(long, global = true, env = "FORET_WORLD_CAP", default_value = "2000000")]
    pub world_cap: NonZeroUsize,
}

fn positive_seconds(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(_) => Err("must be a positive number of seconds".into()),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile class formulas into an artifact.
    Compile(CompileArgs),
    /// Explain the decision on an instance.
    Explain(ExplainArgs),
    /// Contrastive explanations towards a target class.
    Ce(CeArgs),
    /// Robustness of a decision and the variables of its shortest flips.
    Robustness(DecisionArgs),
    /// All shortest ways to flip a decision.
    Flips(DecisionArgs),
    /// Cross-check compilation and explanations against brute force.
    Verify(VerifyArgs),
    /// Node counts and build times per class and mode.
    Stats(StatsArgs),
    /// Generate a random forest.
    Gen(GenArgs),
    /// Dump the comparator schedule of a sorting network.
    Schedule(ScheduleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Nnf,
    DgConj,
    DgFull,
}

impl From<ModeArg> for foret::compile::Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Nnf => foret::compile::Mode::Nnf,
            ModeArg::DgConj => foret::compile::Mode::DgConj,
            ModeArg::DgFull => foret::compile::Mode::DgFull,
        }
    }
}

/// How to pick a class for an instance that ties between several.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ties {
    /// Require `--class`.
    Explicit,
    /// Take the tied class listed first in the forest.
    HighestRanked,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[arg(long)]
    pub forest: PathBuf,
    /// Class to compile; every class when omitted.
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long, value_enum, default_value = "nnf")]
    pub mode: ModeArg,
    /// Feed the sorting networks plain inputs instead of presorted pairs.
    #[arg(long)]
    pub no_presort_opt: bool,
    /// Artifact file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write size and timing statistics here.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecisionArgs {
    #[arg(long)]
    pub forest: PathBuf,
    #[arg(long)]
    pub instance: PathBuf,
    /// A dg-conj or dg-full artifact; compiled on the fly when omitted.
    #[arg(long)]
    pub artifact: Option<PathBuf>,
    /// Class of the decision; the predicted class when omitted.
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long, value_enum, default_value = "explicit")]
    pub ties: Ties,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Sr,
    Nr,
    Cr,
    Gr,
    Robustness,
    Gnr,
    Flips,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub decision: DecisionArgs,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "sr,nr,robustness,gnr,flips"
    )]
    pub kinds: Vec<Kind>,
}

#[derive(Debug, Args)]
pub struct CeArgs {
    #[arg(long)]
    pub forest: PathBuf,
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub target: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub forest: PathBuf,
    #[arg(long, default_value = "0")]
    pub seed: u64,
    /// Random instances to explain.
    #[arg(long, default_value = "10")]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Forest to compile in every requested mode.
    #[arg(long, conflicts_with = "artifact", required_unless_present = "artifact")]
    pub forest: Option<PathBuf>,
    /// Existing artifact files (single artifacts or arrays).
    #[arg(long, num_args = 1..)]
    pub artifact: Vec<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "nnf,dg-conj")]
    pub modes: Vec<ModeArg>,
    #[arg(long)]
    pub no_presort_opt: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value = "0")]
    pub seed: u64,
    #[arg(long, default_value = "5")]
    pub features: usize,
    /// States of every feature; overrides the min/max range.
    #[arg(long)]
    pub states: Option<usize>,
    #[arg(long, default_value = "2")]
    pub min_states: usize,
    #[arg(long, default_value = "4")]
    pub max_states: usize,
    #[arg(long, default_value = "8")]
    pub trees: usize,
    #[arg(long, default_value = "4")]
    pub depth: usize,
    #[arg(long, default_value = "2")]
    pub classes: usize,
    /// Forest file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    /// Number of inputs, a power of two.
    #[arg(long)]
    pub inputs: usize,
    /// Omit the first layer, for inputs arriving as sorted pairs.
    #[arg(long)]
    pub presorted_pairs: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
