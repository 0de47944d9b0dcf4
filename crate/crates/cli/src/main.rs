use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flagchart_cli::{exit_code, RunConfig};

#[derive(Parser)]
#[command(
    name = "flagchart",
    version,
    about = "Limit sets, thickenings and domains of discontinuity for Schottky deformations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized checks of the chart identities
    CheckLemmas(Common),
    /// Limit set, thickening, domain point and audit
    Pipeline(Common),
    /// Limit set sample only
    LimitSet(Common),
    /// Limit set and a point of the domain
    FindDomain(Common),
    /// Ball-return audit at a given center, or at the found domain point
    Audit {
        #[command(flatten)]
        common: Common,
        /// Comma-separated chart coordinates
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        center: Option<Vec<f64>>,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Write the default configuration
    InitConfig {
        #[arg(default_value = "flagchart.toml")]
        path: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(d) = self.depth {
            c.depth = d;
        }
        if let Some(t) = self.scale {
            c.scale = t;
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::CheckLemmas(c) => c.resolve().and_then(|c| flagchart_cli::check_lemmas(&c)),
        Command::Pipeline(c) => c.resolve().and_then(|c| flagchart_cli::pipeline(&c)),
        Command::LimitSet(c) => c.resolve().and_then(|c| flagchart_cli::limit_set(&c)),
        Command::FindDomain(c) => c.resolve().and_then(|c| flagchart_cli::find_domain(&c)),
        Command::Audit { common, center, radius } => common
            .resolve()
            .and_then(|c| flagchart_cli::audit(&c, center.as_deref(), *radius)),
        Command::InitConfig { path } => flagchart_cli::init_config(path),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
