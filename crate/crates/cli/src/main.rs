use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pingpong_cli::commands::{cmd_analyze, cmd_build_semigroup, cmd_certify, cmd_revalidate, Outcome};
use pingpong_cli::config::PipelineConfig;
use pingpong_cli::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "pingpong", version, about = "Free subsemigroups of SL(n, R): growth, contraction and ping-pong certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate a word ball and estimate growth, limit cone and growth indicator.
    Analyze(Common),
    /// Select a generating set from the orbit and certify it.
    BuildSemigroup(Common),
    /// Certify the given generators directly.
    Certify(Common),
    /// Re-check a stored certificate from its JSON.
    Revalidate {
        #[arg(long)]
        certificate: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Generators file, used when no config is given.
    #[arg(long)]
    generators: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "exact-check")]
    exact_check: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> CliResult<PipelineConfig> {
        let mut cfg = match (&self.config, &self.generators) {
            (Some(path), _) => PipelineConfig::load(path)?,
            (None, Some(g)) => PipelineConfig::minimal(g.clone(), 0.1),
            (None, None) => return Err(CliError::Config("pass --config or --generators".into())),
        };
        if let Some(g) = &self.generators {
            cfg.generators_path = g.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.radius {
            cfg.radius = r;
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(d) = self.delta {
            cfg.target_delta = d;
        }
        if self.exact_check.is_some() {
            cfg.exact_check = self.exact_check;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = Some(o.clone());
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::Analyze(c) => cmd_analyze(&c.resolve()?),
        Command::BuildSemigroup(c) => cmd_build_semigroup(&c.resolve()?),
        Command::Certify(c) => cmd_certify(&c.resolve()?),
        Command::Revalidate { certificate } => cmd_revalidate(&certificate),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            if outcome.exit_code == 0 {
                println!("{}", outcome.message);
            } else {
                eprintln!("error: {}", outcome.message);
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
