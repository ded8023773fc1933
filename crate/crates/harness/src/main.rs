use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use featbounds::{verify, HarnessError, RunConfig, Session, Stage};

#[derive(Parser, Debug)]
#[command(
    name = "featbounds",
    version,
    about = "Detector repeatability bounds and paired comparisons"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (`output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (`output.jobs`).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for synthetic scenes (`database.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Build transformed image sequences from the reference images.
    Synthesize,
    /// Run the built-in detectors on every image.
    Detect,
    /// Validate and import keypoints from external detector trees.
    Ingest,
    /// Repeatability matrices and bounds curves.
    Evaluate,
    /// McNemar z-score grids and heatmaps for detector pairs.
    Compare,
    /// Summary tables of areas and comparisons.
    Report,
    /// Every stage in order.
    Run,
    /// Check the output directory against its manifest.
    Verify,
}

fn load_config(cli: &Cli) -> featbounds::Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::with_defaults(),
    };
    if let Some(out) = &cli.out {
        config.output.dir = out.clone();
    }
    if let Some(jobs) = cli.jobs {
        config.output.jobs = Some(jobs);
    }
    if let Some(seed) = cli.seed {
        config.database.seed = seed;
    }
    Ok(config)
}

fn execute(cli: &Cli) -> featbounds::Result<()> {
    let config = load_config(cli)?;
    if let Command::Verify = cli.command {
        let report = verify(&config.output.dir)?;
        for p in &report.missing {
            eprintln!("missing: {p}");
        }
        for p in &report.corrupted {
            eprintln!("checksum mismatch: {p}");
        }
        for p in &report.unlisted {
            eprintln!("not in manifest: {p}");
        }
        if !report.ok() {
            return Err(HarnessError::Invariant(format!(
                "{} missing, {} corrupted, {} unlisted",
                report.missing.len(),
                report.corrupted.len(),
                report.unlisted.len()
            )));
        }
        println!("verified {} files", report.checked);
        return Ok(());
    }

    let mut session = Session::open(config)?;
    let stages: Vec<Stage> = match cli.command {
        Command::Synthesize => vec![Stage::Synthesize],
        Command::Detect => vec![Stage::Detect],
        Command::Ingest => vec![Stage::Ingest],
        Command::Evaluate => vec![Stage::Evaluate],
        Command::Compare => vec![Stage::Compare],
        Command::Report => vec![Stage::Report],
        Command::Run => Stage::ALL.to_vec(),
        Command::Verify => unreachable!("handled above"),
    };
    for stage in stages {
        session.run_stage(stage)?;
    }
    if matches!(cli.command, Command::Report | Command::Run) {
        let path = session.out().join("results/report.csv");
        let text = std::fs::read_to_string(&path).map_err(HarnessError::io(&path))?;
        print!("{text}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
