use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vqalab::experiments::{run, ExperimentConfig, ExperimentKind, Suite};
use vqalab::Error;

#[derive(Parser)]
#[command(name = "vqalab", version, about = "MPS-ansatz trainability experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; defaults to the config's `out` field.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    Variance(Common),
    GradVariance(Common),
    Learn(Common),
    Cknorm(Common),
    PauliDist(Common),
    Verify {
        #[command(flatten)]
        common: Common,
        /// analytic | design | norm (overrides the config).
        #[arg(long)]
        suite: Option<Suite>,
    },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common, suite) = match cli.command {
        Command::Variance(c) => (ExperimentKind::Variance, c, None),
        Command::GradVariance(c) => (ExperimentKind::GradVariance, c, None),
        Command::Learn(c) => (ExperimentKind::Learn, c, None),
        Command::Cknorm(c) => (ExperimentKind::Cknorm, c, None),
        Command::PauliDist(c) => (ExperimentKind::PauliDist, c, None),
        Command::Verify { common, suite } => (ExperimentKind::Verify, common, suite),
    };
    let mut cfg = match ExperimentConfig::load(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if cfg.experiment != kind {
        eprintln!(
            "config error: experiment is '{}' but the subcommand is '{}'",
            cfg.experiment.name(),
            kind.name()
        );
        return ExitCode::from(EXIT_CONFIG);
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let Some(out) = common.out.or_else(|| cfg.out.clone()) else {
        eprintln!("config error: no output path (--out or config field 'out')");
        return ExitCode::from(EXIT_CONFIG);
    };
    if let Some(t) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("config error: threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let result = run(&cfg, suite).and_then(|o| o.write(&out).map(|_| o));
    match result {
        Ok(o) if o.failures() > 0 => {
            eprintln!("{} verification rows failed; see {}", o.failures(), out.display());
            ExitCode::from(EXIT_VERIFY)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e @ Error::Config { .. }) => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
