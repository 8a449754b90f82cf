use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Tree-like communication architectures: validation, reconfiguration,
/// diamond checking and distributed execution.
#[derive(Parser)]
#[command(name = "tca", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an architecture file; prints `ok` or one `COND<n>` line per
    /// violated condition.
    Validate { file: PathBuf },
    /// Apply actions in order and print the resulting architecture.
    Apply {
        file: PathBuf,
        /// Actions such as "c1 swap 1" or "c1 conn 1 c2".
        #[arg(required = true)]
        actions: Vec<String>,
    },
    /// Print a word turning one architecture into another.
    Plan { from: PathBuf, to: PathBuf },
    /// Apply every word of a word file in sequence and print the result.
    Replay { file: PathBuf, words: PathBuf },
    /// Check that independent actions commute at every reachable
    /// configuration.
    CheckDiamond { dfa: PathBuf },
    /// Distribute an automaton and run the distributed automaton on words.
    Run { dfa: PathBuf, words: PathBuf },
    /// Run the automaton and its distribution side by side, auditing every
    /// step.
    Compare {
        dfa: PathBuf,
        words: PathBuf,
        #[command(flatten)]
        audit: AuditFlags,
        /// Also write a report file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate instances.
    Gen {
        #[command(subcommand)]
        what: Gen,
    },
    /// Generate automata and words, and compare them all.
    Suite {
        #[command(flatten)]
        spec: SpecFlags,
        /// Number of automata, with seeds counting up from --seed.
        #[arg(long, default_value_t = 10)]
        count: u64,
        /// Words per automaton.
        #[arg(long, default_value_t = 100)]
        words: usize,
        #[command(flatten)]
        audit: AuditFlags,
    },
}

#[derive(Subcommand)]
enum Gen {
    /// A random architecture.
    Tca {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// A random automaton over a random architecture.
    Dfa {
        #[command(flatten)]
        spec: SpecFlags,
    },
    /// Words for an automaton: all defined words if there are few enough,
    /// random ones otherwise.
    Words {
        dfa: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
}

#[derive(Args, Clone)]
struct SpecFlags {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// tracker, parity, mod<m> or counter<m>.
    #[arg(long, default_value = "parity")]
    family: String,
    #[arg(long, default_value_t = 8)]
    max_len: usize,
}

#[derive(Args, Clone, Copy)]
struct AuditFlags {
    /// Also require first states to equal the view shared with the current
    /// parent at their last common step.
    #[arg(long)]
    literal_parent: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = commands::run(cli.command, &mut out);
    let _ = out.flush();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
