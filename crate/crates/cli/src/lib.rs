//! `auctions`: revenue estimation, inequality checks, τ frontiers and instance generation.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod suites;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::commands::{InstanceKind, InstanceOptions, VerifyOptions};
use crate::config::{ExperimentConfig, FileConfig, FlagValues};
use crate::error::CliResult;
use crate::suites::Suite;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "auctions", version, about = "Prior-independent auction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by the experiment commands.
#[derive(Debug, Args)]
struct Common {
    /// TOML file supplying defaults for the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Instance file (TOML).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Target ratio(s) τ, comma separated.
    #[arg(long, value_delimiter = ',')]
    tau: Vec<f64>,
    #[arg(long)]
    replicates: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multiplicative tolerance for checks, in [0, 0.2].
    #[arg(long)]
    slack: Option<f64>,
    /// Threads used for Monte-Carlo replicates.
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn resolve(self, mechanism: Option<String>) -> CliResult<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let flags = FlagValues {
            instance: self.instance,
            mechanism,
            tau: self.tau,
            replicates: self.replicates,
            seed: self.seed,
            out: self.out,
            slack: self.slack,
            workers: self.workers,
        };
        ExperimentConfig::resolve(flags, file)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a mechanism's expected revenue on an instance; writes one CSV row.
    Estimate {
        /// spa, myerson, vcg[:K], gtm[:ALPHA:C], gtm_t:ALPHA:C:T, mgtm[:TAU], threshold:T:L@W,..., step:G1,G2,...
        #[arg(long)]
        mechanism: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite and report each check.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Item counts, comma separated.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        /// Capacity / order-statistic rank.
        #[arg(long)]
        t: Option<usize>,
        /// Size of the default corpus.
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep τ and tabulate GTM against the optimal and second-price benchmarks.
    Frontier {
        #[command(flatten)]
        common: Common,
    },
    /// Write instance files.
    Instances {
        #[arg(value_enum)]
        kind: InstanceKind,
        /// Truncation point of the equal-revenue pair.
        #[arg(long, default_value_t = 3.0)]
        a: f64,
        /// Size of the geometric family.
        #[arg(long, default_value_t = 4)]
        m: usize,
        /// Components of the adversarial mixture.
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        min_buyers: usize,
        #[arg(long, default_value_t = 6)]
        max_buyers: usize,
        #[arg(long, default_value_t = 1)]
        items: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// File (or directory, for multi-file kinds); stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> CliResult<i32> {
    match command {
        Command::Estimate { mechanism, common } => {
            commands::estimate(&common.resolve(mechanism)?, stdout)?;
            Ok(EXIT_PASS)
        }
        Command::Verify { suite, k, t, count, common } => {
            let opts = VerifyOptions { ks: k, t, count };
            let all_hold = commands::verify(suite, &opts, &common.resolve(None)?, stdout)?;
            Ok(if all_hold { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Frontier { common } => {
            commands::frontier(&common.resolve(None)?, stdout)?;
            Ok(EXIT_PASS)
        }
        Command::Instances { kind, a, m, k, count, min_buyers, max_buyers, items, seed, out } => {
            let opts = InstanceOptions { a, m, k, count, min_buyers, max_buyers, items, seed };
            commands::instances(kind, &opts, out.as_deref(), stdout)?;
            Ok(EXIT_PASS)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
            let target: &mut dyn Write = if code == EXIT_PASS { stdout } else { stderr };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
