use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "statepat", version, about = "Statechart model patterns: check, transform, verify, simulate, serve")]
pub struct Cli {
    /// Config file with defaults for the flags below [default: ./statepat.toml if present]
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Print exploration statistics and other progress to stderr
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a model
    Check { model: PathBuf },
    /// Apply model patterns and write the resulting model
    Transform {
        model: PathBuf,
        #[command(flatten)]
        pattern: PatternArgs,
        /// Output file [default: stdout]
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Decide A[] / E<> queries by exhaustive exploration
    Verify {
        model: PathBuf,
        /// Inline formulas or `.q` files
        queries: Vec<String>,
        #[command(flatten)]
        pattern: PatternArgs,
        /// Environment events allowed per step
        #[arg(long, value_enum)]
        env: Option<EnvArg>,
        /// Maximum number of explored states
        #[arg(long, value_name = "N")]
        limit: Option<usize>,
        /// Directory for counterexample and witness traces [default: traces]
        #[arg(long, value_name = "PATH")]
        trace_dir: Option<PathBuf>,
    },
    /// Run a model step by step, interactively or from a script
    Simulate {
        model: PathBuf,
        #[command(flatten)]
        pattern: PatternArgs,
        /// Command file to run instead of reading stdin
        #[arg(long, value_name = "PATH")]
        script: Option<PathBuf>,
        /// Also write the step trace to this file
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Start the HTTP simulation service
    Serve {
        /// Model offered to requests that carry none
        model: Option<PathBuf>,
        #[arg(long, value_name = "N")]
        port: Option<u32>,
    },
}

#[derive(Debug, Args)]
pub struct PatternArgs {
    /// Pattern(s) to apply before running
    #[arg(long, value_enum)]
    pub pattern: Option<PatternArg>,
    /// Execution order as chart IDs (or names), first to last
    #[arg(long, value_delimiter = ',', value_name = "ID,ID,...")]
    pub order: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternArg {
    Twc,
    Ceo,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvArg {
    OneOrNone,
    Subset,
    Closed,
}
