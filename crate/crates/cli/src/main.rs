//! `npcembed`: generate instances, embed them, and check the results.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "npcembed", version, about = "Cut-measure embeddings of pyramids, funnels and hyperbolic point sets")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Master seed; required by randomized commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo samples.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overwrite an existing output file.
    #[arg(long, global = true)]
    pub force: bool,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Statistical threshold in standard errors for Monte Carlo checks.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Embed an instance and report distortion with a per-pair table.
    Embed {
        instance: PathBuf,
        /// Peel samples for funnel and point inputs.
        #[arg(long, default_value_t = 100)]
        peel_samples: usize,
        #[arg(long, value_enum, default_value_t = Process::Repaired)]
        process: Process,
        /// Also write the per-pair table as CSV.
        #[arg(long)]
        pairs_csv: Option<PathBuf>,
    },
    /// Run the checks that apply to an instance; exit 1 on any failure.
    Verify {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
    },
    /// Optimal L1 distortion of a small metric by linear programming.
    Oracle { instance: PathBuf },
    /// Flow-cut gap of a flow instance.
    FlowGap { instance: PathBuf },
    /// Empirical separation modulus of ball-carving partitions.
    PartitionBeta {
        /// Graph-like instance; omit to use --grid.
        instance: Option<PathBuf>,
        /// Side of a square grid graph.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        scale: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

#[derive(Subcommand)]
pub enum GenKind {
    Pyramid {
        #[arg(long)]
        delta: usize,
        /// Two columns under the apex.
        #[arg(long)]
        grid: bool,
        #[arg(long)]
        single_ray: bool,
        /// Layer width cap for random pyramids.
        #[arg(long, default_value_t = 4)]
        width: usize,
    },
    Funnel {
        #[arg(long)]
        delta: usize,
        /// Every layer below the apex has exactly this many vertices.
        #[arg(long)]
        cylinder: Option<usize>,
        #[arg(long, default_value_t = 6)]
        width: usize,
    },
    HyperbolicPoints {
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 1.0)]
        min_distance: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Process {
    Repaired,
    Literal,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Level {
    Quick,
    Exact,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<io::Usage>().is_some() {
            return 2;
        }
        if let Some(npcembed_core::Error::Budget { .. }) = cause.downcast_ref::<npcembed_core::Error>() {
            return 3;
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(t) = cli.common.threads {
        if t == 0 {
            return Err(io::usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let c = &cli.common;
    match cli.cmd {
        Cmd::Gen { kind } => commands::gen(c, kind),
        Cmd::Embed { instance, peel_samples, process, pairs_csv } => {
            commands::embed(c, &instance, peel_samples, process, pairs_csv.as_ref())
        }
        Cmd::Verify { instance, level } => commands::verify(c, &instance, level),
        Cmd::Oracle { instance } => commands::oracle(c, &instance),
        Cmd::FlowGap { instance } => commands::flow_gap(c, &instance),
        Cmd::PartitionBeta { instance, grid, scale, trials } => {
            commands::partition_beta(c, instance.as_ref(), grid, scale, trials)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
