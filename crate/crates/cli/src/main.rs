//! Command-line front end for the study pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use scitopics::pipeline::{synthetic, verify_run, Pipeline, RunConfig, Stage, StageStatus};

#[derive(Parser)]
#[command(
    name = "scitopics",
    version,
    about = "Screen, model, evaluate and map a bibliographic corpus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunOpts {
    /// Study configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Caps worker threads in every stage.
    #[arg(long)]
    jobs: Option<usize>,
    /// Re-runs stages even when their inputs are unchanged.
    #[arg(long)]
    force: bool,
    /// Overrides the configured run directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse exports, deduplicate and screen.
    Ingest(RunOpts),
    /// Tokenize, merge bigrams and lemmatize.
    Prep(RunOpts),
    /// Produce document and word vectors.
    Embed(RunOpts),
    /// Fit the topic model.
    Topics(RunOpts),
    /// Score the topic model and pick the most significant topics.
    Eval(RunOpts),
    /// Build collaboration networks.
    Network(RunOpts),
    /// Describe the selected topics and score human ratings.
    Summarize(RunOpts),
    /// Every stage in order.
    All(RunOpts),
    /// Re-hash every artifact in a run directory against its manifest.
    Verify {
        #[arg(long, short, conflicts_with = "out")]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded synthetic corpus as RIS.
    Synth {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn pipeline(opts: &RunOpts) -> anyhow::Result<Pipeline> {
    let mut config = RunConfig::load(&opts.config).with_context(|| format!("loading {}", opts.config.display()))?;
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    if let Some(jobs) = opts.jobs {
        config.jobs = jobs;
    }
    if let Some(out) = &opts.out {
        config.out_dir.clone_from(out);
    }
    Ok(Pipeline::new(config, opts.force)?)
}

fn report(stage: Stage, status: StageStatus) {
    let word = match status {
        StageStatus::Ran => "done",
        StageStatus::Skipped => "skipped (up to date)",
    };
    println!("{stage:<10} {word}");
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let single = |opts: &RunOpts, stage: Stage| -> anyhow::Result<()> {
        let p = pipeline(opts)?;
        report(stage, p.run_stage(stage)?);
        Ok(())
    };
    match cli.command {
        Command::Ingest(o) => single(&o, Stage::Ingest),
        Command::Prep(o) => single(&o, Stage::Prep),
        Command::Embed(o) => single(&o, Stage::Embed),
        Command::Topics(o) => single(&o, Stage::Topics),
        Command::Eval(o) => single(&o, Stage::Eval),
        Command::Network(o) => single(&o, Stage::Network),
        Command::Summarize(o) => single(&o, Stage::Summarize),
        Command::All(o) => {
            let p = pipeline(&o)?;
            for (stage, status) in p.run_all()? {
                report(stage, status);
            }
            println!("artifacts in {}", p.out_dir().display());
            Ok(())
        }
        Command::Verify { config, out } => {
            let dir = match (config, out) {
                (_, Some(out)) => out,
                (Some(c), None) => RunConfig::load(&c)?.out_dir,
                (None, None) => anyhow::bail!("give --config or --out"),
            };
            let n = verify_run(&dir)?;
            println!("{n} artifacts verified in {}", dir.display());
            Ok(())
        }
        Command::Synth { n, seed, out } => {
            let records = synthetic::generate_corpus(n, seed);
            std::fs::write(&out, synthetic::render_ris(&records))
                .with_context(|| format!("writing {}", out.display()))?;
            println!("{} records written to {}", records.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("error: {e:#}");
            if let Some(scitopics::pipeline::PipelineError::Verify(problems)) = e.downcast_ref() {
                for p in problems {
                    eprintln!("  {p}");
                }
            }
            ExitCode::FAILURE
        }
    }
}
