mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use alphaquota::sampling::{CandidateLayout, ModelKind};
use alphaquota::{Axiom, Committee, Format, Rational, Rule};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Proportionality quotas for approval-based committee elections.
#[derive(Parser, Debug)]
#[command(name = "alpha", version, about)]
pub struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,

    /// Print voter and candidate indices starting at 1 (text output only).
    #[arg(long, global = true)]
    pub one_indexed: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// α-value of a committee with a violation witness.
    Eval(EvalArgs),
    /// Smallest α-value over all committees.
    Opt(OptArgs),
    /// Run a voting rule.
    Rule(RuleArgs),
    /// Detect party-list and interval structure.
    Domain(InstanceArg),
    /// Sample a synthetic profile.
    Sample(SampleArgs),
    /// Run the rule-versus-optimum experiment grid.
    Experiment(ExperimentArgs),
    /// Write the α-JR feasibility model in LP format.
    ExportIlp(ExportArgs),
}

#[derive(Args, Debug)]
pub struct InstanceArg {
    /// Instance file (JSON or plain text).
    #[arg(long, short)]
    pub instance: PathBuf,

    /// Input format; guessed from the extension and content when omitted.
    #[arg(long, value_parser = parse_format)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InstanceArg,

    /// Comma-separated candidate indices, e.g. `0,2,5`.
    #[arg(long, short, value_parser = parse_committee)]
    pub committee: Committee,

    #[arg(long, short, default_value = "jr", value_parser = parse_axiom)]
    pub axiom: Axiom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Bnb,
    Brute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    None,
    Auto,
    Partylist,
    Vi,
    Ci,
}

#[derive(Args, Debug)]
pub struct OptArgs {
    #[command(flatten)]
    pub input: InstanceArg,

    #[arg(long, short, default_value = "jr", value_parser = parse_axiom)]
    pub axiom: Axiom,

    /// Generic search method; cannot be combined with --domain.
    #[arg(long, value_enum, conflicts_with = "domain")]
    pub method: Option<MethodArg>,

    /// Route to a structured-domain algorithm.
    #[arg(long, value_enum)]
    pub domain: Option<DomainArg>,

    /// Voter (vi) or candidate (ci) order to use instead of recognition.
    #[arg(long, value_delimiter = ',', requires = "domain")]
    pub order: Option<Vec<usize>>,

    /// Node budget (branch and bound) or committee budget (enumeration).
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Args, Debug)]
pub struct RuleArgs {
    #[command(flatten)]
    pub input: InstanceArg,

    #[arg(long, short, value_parser = parse_rule)]
    pub rule: Rule,

    /// Tied committees to report.
    #[arg(long, default_value_t = 5)]
    pub max_committees: usize,

    /// Report the committees with the largest α_JR among all tie branches.
    #[arg(long)]
    pub adversarial: bool,

    /// Print the steps leading to the first committee.
    #[arg(long)]
    pub trace: bool,

    /// Live tie branches kept per round.
    #[arg(long, default_value_t = 64)]
    pub frontier_cap: usize,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: ModelKind,

    #[arg(long)]
    pub n: usize,

    #[arg(long)]
    pub m: usize,

    #[arg(long)]
    pub k: usize,

    /// Approval probability (ic).
    #[arg(long, conflicts_with_all = ["t", "sigma", "layout"])]
    pub p: Option<f64>,

    /// Distance threshold (euclidean).
    #[arg(long)]
    pub t: Option<f64>,

    /// Voter spread per axis (euclidean).
    #[arg(long, default_value_t = alphaquota::sampling::DEFAULT_SIGMA)]
    pub sigma: f64,

    /// Candidate placement (euclidean).
    #[arg(long, value_parser = parse_layout, default_value = "uniform")]
    pub layout: CandidateLayout,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output format of the instance.
    #[arg(long, value_parser = parse_format, default_value = "json")]
    pub format: Format,

    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// TOML grid description; the default grid when omitted.
    #[arg(long, short)]
    pub config: Option<PathBuf>,

    /// CSV output file.
    #[arg(long, short)]
    pub out: PathBuf,

    /// Fraction of the configured instances per cell.
    #[arg(long, default_value_t = 0.1)]
    pub scale: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads; 0 uses every core.
    #[arg(long, short, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[command(flatten)]
    pub input: InstanceArg,

    /// Target α as `p/q`.
    #[arg(long, value_parser = parse_rational)]
    pub alpha: Rational,

    /// LP file; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn parse_committee(s: &str) -> Result<Committee, String> {
    s.parse().map_err(|e: alphaquota::Error| e.to_string())
}

fn parse_axiom(s: &str) -> Result<Axiom, String> {
    s.parse()
}

fn parse_rule(s: &str) -> Result<Rule, String> {
    s.parse()
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse()
}

fn parse_layout(s: &str) -> Result<CandidateLayout, String> {
    s.parse()
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
