use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use cutlab::gnn::{TargetScore, TrainConfig};
use cutlab::instgen::GenConfig;
use cutlab::shattering::ScoreKind;
use cutlab::Rational;

use cutlab_cli::artifacts::read_file;
use cutlab_cli::checks::{paper_check, render_shatter_report, run_shattering};
use cutlab_cli::commands::{cmd_evaluate, cmd_generate, cmd_label, cmd_train};

#[derive(Parser)]
#[command(name = "cutlab", version, about = "Exact branch-and-cut laboratory pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Score the learned selector trains against.
#[derive(ValueEnum, Clone, Copy)]
enum TargetArg {
    /// Fraction of the integrality gap the cut closes.
    Gap,
    /// Relative tree-size reduction of the cut.
    Tree,
}

impl From<TargetArg> for TargetScore {
    fn from(arg: TargetArg) -> TargetScore {
        match arg {
            TargetArg::Gap => TargetScore::GapClosed,
            TargetArg::Tree => TargetScore::TreeReduction,
        }
    }
}

/// Which score's strong/weak separation the shattering verifier certifies.
#[derive(ValueEnum, Clone, Copy)]
enum ScoreArg {
    Gap,
    Tree,
    Both,
}

impl From<ScoreArg> for ScoreKind {
    fn from(arg: ScoreArg) -> ScoreKind {
        match arg {
            ScoreArg::Gap => ScoreKind::GapClosed,
            ScoreArg::Tree => ScoreKind::TreeSize,
            ScoreArg::Both => ScoreKind::Both,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a training-filtered instance dataset from a JSON config.
    Generate {
        /// Generation config file (JSON: seed, count, family parameters).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for instances.jsonl and manifest.json.
        #[arg(long)]
        out: PathBuf,
        /// Node budget for the filter's baseline tree search.
        #[arg(long, default_value_t = 100_000)]
        node_limit: usize,
    },
    /// Score every tableau cut of every instance in a dataset.
    Label {
        /// Instance JSONL file, e.g. from `generate`.
        dataset: PathBuf,
        /// Labeled JSONL output path (a manifest is written next to it).
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; the output bytes are identical for any value.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Node budget per tree search; over-budget instances are flagged.
        #[arg(long, default_value_t = 100_000)]
        node_limit: usize,
    },
    /// Train the learned selector on the first 75% of a labeled dataset.
    Train {
        /// Labeled JSONL file from `label`.
        labeled: PathBuf,
        /// Checkpoint output path.
        #[arg(long)]
        out: PathBuf,
        /// Training config file (JSON); built-in defaults apply otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's target score.
        #[arg(long, value_enum)]
        target: Option<TargetArg>,
    },
    /// Compare selection strategies on the last 25% of a labeled dataset.
    Evaluate {
        /// Labeled JSONL file from `label`.
        labeled: PathBuf,
        /// Trained checkpoint; repeat for one learned column each.
        #[arg(long = "checkpoint")]
        checkpoints: Vec<PathBuf>,
        /// Seed for the random baseline and learned tie-breaks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the full report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify the documented worked example and cut family.
    PaperCheck,
    /// Check strong/weak cut separation at one or more gamma values.
    VerifyShattering {
        /// Gamma in (0, 1/2) as a rational, e.g. 1/4; repeatable.
        /// Defaults to 1/8, 1/4, and 3/8.
        #[arg(long = "gamma")]
        gammas: Vec<String>,
        /// Which score's separation to certify.
        #[arg(long, value_enum, default_value_t = ScoreArg::Both)]
        score: ScoreArg,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { config, out, node_limit } => {
            let cfg: GenConfig = serde_json::from_str(&read_file(&config)?)
                .with_context(|| format!("parsing generation config {}", config.display()))?;
            let outcome = cmd_generate(&cfg, node_limit, &out)?;
            let m = &outcome.manifest;
            println!(
                "generated {} instances, kept {} ({} dropped) -> {}",
                m.raw_count,
                m.kept_count,
                m.raw_count - m.kept_count,
                outcome.instances_path.display()
            );
        }
        Command::Label { dataset, out, workers, node_limit } => {
            let outcome = cmd_label(&dataset, &out, node_limit, workers)?;
            let m = &outcome.manifest;
            println!(
                "labeled {} instances ({} scored, {} failed) -> {}",
                m.records,
                m.scored,
                m.failed,
                outcome.output_path.display()
            );
        }
        Command::Train { labeled, out, config, seed, target } => {
            let mut cfg: TrainConfig = match config {
                Some(path) => serde_json::from_str(&read_file(&path)?)
                    .with_context(|| format!("parsing training config {}", path.display()))?,
                None => TrainConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(target) = target {
                cfg.target = target.into();
            }
            let ckpt = cmd_train(&labeled, &cfg, &out)?;
            let report = &ckpt.manifest.report;
            println!(
                "trained on {} records; best epoch {} (validation loss {:.6}) -> {}",
                ckpt.manifest.trained_records,
                report.best_epoch,
                report.best_val_loss,
                out.display()
            );
        }
        Command::Evaluate { labeled, checkpoints, seed, out } => {
            let report = cmd_evaluate(&labeled, &checkpoints, seed, out.as_deref())?;
            print!("{}", report.render_table());
            if let Some(out) = out {
                println!("report -> {}", out.display());
            }
        }
        Command::PaperCheck => {
            let report = paper_check();
            print!("{}", report.render());
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::VerifyShattering { gammas, score } => {
            let gammas = parse_gammas(&gammas)?;
            let reports = run_shattering(&gammas, score.into())?;
            let mut all_ok = true;
            for report in &reports {
                print!("{}", render_shatter_report(report));
                all_ok &= report.verdict;
            }
            if !all_ok {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_gammas(raw: &[String]) -> Result<Vec<Rational>> {
    let defaults = ["1/8", "1/4", "3/8"];
    let strs: Vec<&str> = if raw.is_empty() {
        defaults.to_vec()
    } else {
        raw.iter().map(String::as_str).collect()
    };
    strs.iter()
        .map(|s| s.parse::<Rational>().map_err(|err| anyhow!("bad gamma {s:?}: {err}")))
        .collect()
}
