//! `dg`: verify bounded models, apply output guards and run the diagonal
//! demonstrations from the command line.

mod commands;
mod load;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit statuses shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// aligned, halts, closed, contradicted, reduction matches
    Ok = 0,
    /// misaligned, diverges, closure violation
    Negative = 1,
    /// trivial judge, budget exceeded, verifier gave no answer
    Inconclusive = 2,
    Usage = 3,
}

#[derive(Parser, Debug)]
#[command(name = "dg", version, about = "Exact verification of bounded models against judges")]
pub struct Cli {
    /// Worker threads for the parallel verifiers; results do not depend on it.
    #[arg(long, global = true, env = "DG_WORKERS", default_value_t = 1)]
    pub workers: usize,
    /// Leave the wall-time field out of reports.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Report file (guards: the emitted program).
    #[arg(short = 'o', long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long = "max-L", global = true)]
    pub max_l: Option<usize>,
    #[arg(long, global = true)]
    pub max_neurons: Option<usize>,
    #[arg(long, global = true)]
    pub max_state_bits: Option<usize>,
    /// Step budget for micro-machine runs.
    #[arg(long, global = true)]
    pub fuel: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    #[command(subcommand)]
    Verify(Verify),
    #[command(subcommand)]
    Guard(Guard),
    #[command(subcommand)]
    Demo(Demo),
    /// Write the bundled candidate verifiers as .mp and .mpa files plus all.list.
    ExportZoo { dir: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum Verify {
    /// Check every one of the 2^L inputs.
    Exhaustive(ModelJudge),
    /// Check a relu network region by region over a box.
    Regions(RegionsArgs),
    /// Decide whether an agent loop reaches a final state.
    Halting(HaltingArgs),
    /// Check that no transition leaves the final-state set.
    Closure(AgentArg),
}

#[derive(Args, Debug)]
pub struct ModelJudge {
    #[arg(short = 'm', long)]
    pub model: PathBuf,
    #[arg(short = 'j', long)]
    pub judge: PathBuf,
    /// Input width; defaults to the model's.
    #[arg(short = 'L')]
    pub l: Option<usize>,
}

#[derive(Args, Debug)]
pub struct RegionsArgs {
    #[arg(short = 'm', long)]
    pub model: PathBuf,
    #[arg(short = 'j', long)]
    pub judge: PathBuf,
    /// Input box as "lo,hi;lo,hi;..."; rationals allowed.
    #[arg(long = "box", allow_hyphen_values = true)]
    pub domain: String,
    /// Also quantize to this many bits per input and verify exhaustively.
    #[arg(long)]
    pub grid_bits: Option<usize>,
}

#[derive(Args, Debug)]
pub struct HaltingArgs {
    #[arg(short = 'a', long)]
    pub agent: PathBuf,
    /// Fixed input bits fed at every iteration.
    #[arg(short = 'i', long, default_value = "")]
    pub input: String,
    /// Initial state bits; all zeros by default.
    #[arg(long)]
    pub init: Option<String>,
    /// State bits that may be tracked; defaults to the agent's state width.
    #[arg(long)]
    pub memory_bound: Option<usize>,
    /// Iterations before giving up; defaults to 2^memory_bound + 1.
    #[arg(long)]
    pub step_budget: Option<u64>,
}

#[derive(Args, Debug)]
pub struct AgentArg {
    #[arg(short = 'a', long)]
    pub agent: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Guard {
    /// Replace judge-rejected outputs with the witness output.
    Filter(ModelJudge),
    /// Force the negative example's output at its input.
    Misalign(ModelJudge),
    /// Clip every output coordinate to [lo, hi].
    Clip(ClipArgs),
}

#[derive(Args, Debug)]
pub struct ClipArgs {
    #[arg(short = 'm', long)]
    pub model: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: String,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: String,
}

#[derive(Subcommand, Debug)]
pub enum Demo {
    /// Build each candidate's adversary and check the candidate's claim.
    Adversary(AdversaryArgs),
    /// Reduce halting of a machine to a property of the reduced program.
    Reduction(ReductionArgs),
}

#[derive(Args, Debug)]
pub struct AdversaryArgs {
    /// A .mp or .mpa candidate, or a .list of them.
    #[arg(short = 'v', long)]
    pub verifier: PathBuf,
    #[arg(short = 'j', long)]
    pub judge: PathBuf,
    /// Comma-separated input bit strings; all 2^L inputs by default.
    #[arg(long)]
    pub samples: Option<String>,
}

#[derive(Args, Debug)]
pub struct ReductionArgs {
    #[arg(short = 'm', long)]
    pub machine: PathBuf,
    /// The machine's input, as text.
    #[arg(short = 'i', long, default_value = "")]
    pub input: String,
    #[arg(long = "p-pos")]
    pub p_pos: PathBuf,
    /// Inputs for the reduced program, as text; repeatable.
    #[arg(long = "sample")]
    pub samples: Vec<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Status::Usage as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let status = match commands::run(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            commands::classify(&e)
        }
    };
    ExitCode::from(status as u8)
}
