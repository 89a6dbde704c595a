use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "adic-braid", version, about = "Braid actions by lifting loops through the critical-value map")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Number of strands (default 3).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// JSON run configuration; explicit flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base configuration as `re,im;re,im;...`.
    #[arg(long, global = true)]
    pub base: Option<String>,
    /// Angle of the two-strand base point.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub embedding: Option<EmbeddingArg>,
    /// Samples per generator letter.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub tau_sep: Option<f64>,
    #[arg(long, global = true)]
    pub tau_zero: Option<f64>,
    #[arg(long, global = true)]
    pub residual_tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub phi_max_depth: Option<usize>,
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum EmbeddingArg {
    Roots,
    CriticalPoints,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum KindArg {
    Psi,
    Phi,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ModeArg {
    Roots,
    CriticalPoints,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum FormatArg {
    Csv,
    Svg,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Labeled fiber over the base, or the fiber over one point of V_n.
    Fiber {
        /// Critical values `re,im;...`; omit for the labeled base fiber.
        #[arg(long)]
        v: Option<String>,
    },
    /// Lift the loop of a braid word from one fiber label.
    Lift {
        #[arg(long)]
        word: String,
        #[arg(long)]
        label: usize,
        /// Also write the sampled strands as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generator tables, level permutations and adic actions.
    #[command(subcommand)]
    Action(ActionCmd),
    /// Lift sequences and their invariant streams; compare with `--other`.
    Invariants {
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long)]
        other: Option<String>,
    },
    /// Preimage trees and forward orbits.
    #[command(subcommand)]
    Dynamics(DynamicsCmd),
    /// Block words, loop certificates and the linking obstruction.
    #[command(subcommand)]
    Realalg(RealalgCmd),
    /// Replay the published golden values.
    VerifyPaper,
}

#[derive(Subcommand, Debug)]
pub enum ActionCmd {
    /// Generator tables: level-1 permutations and lifted braids.
    Table,
    /// Permutation of a word on level `j`.
    Rho {
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Psi)]
        kind: KindArg,
    },
    /// Act on an adic prefix given as comma-separated digits.
    Act {
        #[arg(long)]
        word: String,
        #[arg(long)]
        prefix: String,
        #[arg(long, value_enum, default_value_t = KindArg::Psi)]
        kind: KindArg,
        /// Read the prefix as residues mod n^(n(j+1)) instead of digits.
        #[arg(long)]
        residues: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum DynamicsCmd {
    /// Iterated preimages of a point of V_n.
    Tree {
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Svg)]
        format: FormatArg,
    },
    /// Forward orbit of a tuple under the induced map.
    Orbit {
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Roots)]
        mode: ModeArg,
    },
}

#[derive(Subcommand, Debug)]
pub enum RealalgCmd {
    /// Expand a word in the five blocks and test the hypothesis.
    Check {
        /// +1 or -1.
        #[arg(long, allow_hyphen_values = true)]
        sign: i8,
        /// Block indices, e.g. `5,5,1,2`.
        #[arg(long)]
        indices: String,
    },
    /// Certify a loop lift: one block loop, or a whole block word.
    Certify {
        #[arg(long, conflicts_with = "indices")]
        beta: Option<u8>,
        #[arg(long)]
        power: Option<usize>,
        #[arg(long, default_value_t = 1)]
        start: usize,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
        sign: i8,
        #[arg(long)]
        indices: Option<String>,
        /// Samples per loop period.
        #[arg(long, default_value_t = 400)]
        loop_samples: usize,
    },
    /// Linking-number bound against the Conway degree.
    Obstruct {
        #[arg(long)]
        word: Option<String>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).target(env_logger::Target::Stderr).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(code) => code,
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Compute(e)) => {
            eprintln!("{}", commands::diagnostic(&e));
            ExitCode::from(1)
        }
    }
}
