use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use irrlab::lab::{run, ExperimentConfig, ExperimentKind, FormatChoice};

#[derive(Parser)]
#[command(name = "irrlab", version, about = "Experiments on irregular paths")]
struct Cli {
    /// TOML experiment config (`schema = 1`); defaults are used without one.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads. Affects speed only.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    Simulate,
    Phi,
    Irregularity,
    Average,
    Ode,
    Geometry,
    Prevalence,
    Moments,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Simulate => ExperimentKind::Simulate,
            Command::Phi => ExperimentKind::Phi,
            Command::Irregularity => ExperimentKind::Irregularity,
            Command::Average => ExperimentKind::Average,
            Command::Ode => ExperimentKind::Ode,
            Command::Geometry => ExperimentKind::Geometry,
            Command::Prevalence => ExperimentKind::Prevalence,
            Command::Moments => ExperimentKind::Moments,
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, String> {
    let kind = cli.command.kind();
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            ExperimentConfig::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ExperimentConfig::new(kind),
    };
    if cfg.kind != kind {
        return Err(format!("config declares kind {:?}, subcommand is {:?}", cfg.kind.as_str(), kind.as_str()));
    }
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            FormatArg::Csv => FormatChoice::Csv,
            FormatArg::Json => FormatChoice::Json,
            FormatArg::Both => FormatChoice::Both,
        };
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("irrlab: {e}");
            return ExitCode::FAILURE;
        }
    }
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("irrlab: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(manifest) => {
            for s in &manifest.stages {
                match &s.error {
                    None => println!("ok      {}", s.name),
                    Some(e) => println!("FAILED  {}: {e}", s.name),
                }
            }
            println!("{} files in {}", manifest.files.len(), cfg.output.dir.display());
            if manifest.succeeded() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("irrlab: {e}");
            ExitCode::FAILURE
        }
    }
}
