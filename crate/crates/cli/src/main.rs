use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod verify;

#[derive(Parser)]
#[command(name = "subshift-lab", version, about = "Build and analyse binary S-adic subshifts")]
struct Cli {
    /// Largest word, in symbols, any command may materialize.
    #[arg(long, global = true, default_value_t = subshift_lab::substitution::DEFAULT_BUDGET)]
    budget: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Word complexity p(n) for n = 1..=N.
    Complexity {
        #[arg(long)]
        params: PathBuf,
        /// Read the language off the level-K block pairs.
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        nmax: usize,
        #[arg(long, value_enum, default_value = "csv")]
        out: Format,
    },
    /// Rauzy graph of the length-n words.
    Rauzy {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "dot")]
        out: Format,
    },
    /// Right-, left- and bi-special words of length n.
    Special {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
    },
    #[command(subcommand)]
    Sadic(SadicCommand),
    #[command(subcommand)]
    Spectrum(SpectrumCommand),
    #[command(subcommand)]
    Example(ExampleCommand),
    /// Recover π and (m_k, n_k) from a symbol file.
    Recover {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Parameter file to write.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SadicCommand {
    /// Run the invariant checks on a parameter file.
    Verify {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        kmax: usize,
    },
    /// Density of {t : x_t ≠ x_{t+d_k}} against its bound.
    Density {
        #[arg(long)]
        params: PathBuf,
        #[arg(long = "q-from-dk")]
        k: usize,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, value_enum, default_value = "csv")]
        out: Format,
    },
}

#[derive(Subcommand)]
enum SpectrumCommand {
    /// The eigenvalue α from its convergents, with a certified error.
    Alpha {
        #[arg(long)]
        params: PathBuf,
        #[arg(long = "K")]
        k: usize,
        #[arg(long, default_value_t = 256)]
        bits: u64,
    },
    /// Weyl sum modulus at one frequency over N = 10^3, 10^4, …, N.
    Probe {
        #[arg(long)]
        params: PathBuf,
        /// `alpha`, a fraction `c/d`, or a decimal.
        #[arg(long)]
        freq: String,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, value_enum, default_value = "csv")]
        out: Format,
    },
}

#[derive(Subcommand)]
enum ExampleCommand {
    /// Parameters with n_k = 2m_k and prime heights.
    Build {
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        #[arg(long = "seed-schedule", value_enum, default_value = "default")]
        schedule: Schedule,
        #[command(flatten)]
        search: SearchArgs,
        /// Parameter file to write.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form complexity at the landmark lengths.
    Landmarks {
        #[arg(long)]
        params: PathBuf,
        #[arg(long = "K")]
        k: usize,
        #[arg(long, value_enum, default_value = "csv")]
        out: Format,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Schedule {
    /// m_k ≥ max(4, m_{k-1}²).
    Default,
    /// m_k ≥ max(4, 2m_{k-1}).
    Geometric,
}

#[derive(Args)]
struct SearchArgs {
    /// Candidates tried per level.
    #[arg(long = "search-cap", default_value_t = 1 << 20)]
    cap: u64,
    /// Also enforce p(q) < q + f(q) at the low landmark.
    #[arg(long, value_enum)]
    slack: Option<SlackArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SlackArg {
    Sqrt,
    Log2,
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("SUBSHIFT_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("SUBSHIFT_LAB_THREADS={v:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Complexity { params, level, nmax, out } => commands::complexity(&params, level, nmax, out, cli.budget),
        Command::Rauzy { params, n, out } => commands::rauzy(&params, n, out, cli.budget),
        Command::Special { params, n, out } => commands::special(&params, n, out, cli.budget),
        Command::Sadic(SadicCommand::Verify { params, kmax }) => verify::run(&params, kmax, cli.budget),
        Command::Sadic(SadicCommand::Density { params, k, n, out }) => commands::density(&params, k, n, out, cli.budget),
        Command::Spectrum(SpectrumCommand::Alpha { params, k, bits }) => commands::alpha(&params, k, bits),
        Command::Spectrum(SpectrumCommand::Probe { params, freq, n, out }) => commands::probe(&params, &freq, n, out, cli.budget),
        Command::Example(ExampleCommand::Build { kmax, schedule, search, out }) => {
            commands::example_build(kmax, schedule, search.cap, search.slack, out.as_deref())
        }
        Command::Example(ExampleCommand::Landmarks { params, k, out }) => commands::landmarks(&params, k, out),
        Command::Recover { input, depth, out } => commands::recover(&input, depth, out.as_deref()),
    };
    match result {
        Ok(outcome) => {
            print!("{}", outcome.text);
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
