use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use uttlab::corpus::{parse_transcripts, Task, Taxonomy};
use uttlab::runner::experiment::{
    cells, evaluate_cells, load_models, prepare_all, save_models, train_cells, write_evaluation,
    write_prepared, ReportMeta, ReportTable,
};
use uttlab::runner::predictions::{read_labels, read_predictions, score_records};
use uttlab::runner::report::{parse_runs_csv, render_report, runs_csv};
use uttlab::runner::{generate_synthetic_corpus, write_atomic, ExperimentConfig, SynthSpec};

#[derive(Parser)]
#[command(name = "uttlab", version, about = "Utterance labeling experiments on conversation transcripts")]
struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed override: the split seed for `split`, the only run seed for
    /// `train`/`evaluate`, the generator seed for `gen-synth`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a transcript file and write a normalized copy plus label statistics.
    Ingest {
        transcripts: PathBuf,
        #[arg(long)]
        taxonomy: Option<PathBuf>,
        /// Context depth used for the per-task counts.
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Write train/test manifests for every configured task.
    Split,
    /// Fit every configured model and save it under `<out>/models`.
    Train,
    /// Score saved models on the test folds and write all report files.
    Evaluate,
    /// Rebuild aggregate.csv and report.txt from runs.csv and summary.json.
    Report,
    /// Score a predictions file against a gold file.
    ScoreExternal(ScoreArgs),
    /// Generate a synthetic transcript corpus.
    GenSynth(SynthArgs),
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    task: Task,
    /// Label universe, one label per line (defaults to the gold file's labels).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Model name recorded in the output row.
    #[arg(long, default_value = "external")]
    model: String,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 5000)]
    size: usize,
    #[arg(long)]
    two_label_rate: Option<f64>,
    #[arg(long)]
    three_label_rate: Option<f64>,
    #[arg(long)]
    emo_rate: Option<f64>,
    #[arg(long)]
    persistence: Option<f64>,
    #[arg(long)]
    session_len: Option<usize>,
    #[arg(long)]
    noise_rate: Option<f64>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Ingest {
            transcripts,
            taxonomy,
            depth,
        } => ingest(&cli, transcripts, taxonomy.as_deref(), *depth),
        Command::Split => split(&cli),
        Command::Train => train(&cli),
        Command::Evaluate => evaluate(&cli),
        Command::Report => report(&cli),
        Command::ScoreExternal(a) => score(&cli, a),
        Command::GenSynth(a) => gen_synth(&cli, a),
    }
}

fn out_dir(cli: &Cli) -> Result<&Path> {
    cli.out.as_deref().context("--out is required for this command")
}

fn config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_ref().context("--config is required for this command")?;
    let cfg = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    Ok(cfg)
}

/// Config with `--seed` replacing the run seeds.
fn run_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = config(cli)?;
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    Ok(cfg)
}

fn ingest(cli: &Cli, transcripts: &Path, taxonomy: Option<&Path>, depth: usize) -> Result<()> {
    let corpus = parse_transcripts(transcripts)?;
    let tax = match taxonomy {
        Some(p) => Taxonomy::load(p)?,
        None => Taxonomy::default_bundled(),
    };
    let summary = uttlab::runner::experiment::corpus_summary(&corpus, &tax, depth)?;
    print!("{summary}");
    if let Some(out) = &cli.out {
        corpus.save(out.join("corpus.jsonl"))?;
        write_atomic(&out.join("corpus_summary.tsv"), summary.as_bytes())?;
    }
    Ok(())
}

fn split(cli: &Cli) -> Result<()> {
    let mut cfg = config(cli)?;
    if let Some(s) = cli.seed {
        cfg.split_seed = s;
    }
    let out = out_dir(cli)?;
    let (_, prepared) = prepare_all(&cfg)?;
    write_prepared(out, &prepared)?;
    for p in &prepared {
        println!("{}\ttrain {}\ttest {}", p.task, p.split.train.len(), p.split.test.len());
    }
    Ok(())
}

fn train(cli: &Cli) -> Result<()> {
    let cfg = run_config(cli)?;
    let out = out_dir(cli)?;
    let (_, prepared) = prepare_all(&cfg)?;
    let cells = cells(&cfg)?;
    let models = train_cells(&cfg, &prepared, &cells)?;
    write_prepared(out, &prepared)?;
    write_atomic(&out.join("config.toml"), cfg.to_toml_string().as_bytes())?;
    save_models(out, &prepared, &cells, &models)?;
    println!("trained {} model(s) into {}", models.len(), out.join("models").display());
    Ok(())
}

fn evaluate(cli: &Cli) -> Result<()> {
    let cfg = run_config(cli)?;
    let out = out_dir(cli)?;
    let (_, prepared) = prepare_all(&cfg)?;
    let cells = cells(&cfg)?;
    let models = load_models(out, &prepared, &cells).context("run `uttlab train` with the same config first")?;
    let runs = evaluate_cells(&cfg, &prepared, &cells, &models)?;
    let table = write_evaluation(out, &cfg, &prepared, &runs)?;
    print!("{}", render_report(&table));
    Ok(())
}

fn report(cli: &Cli) -> Result<()> {
    let out = out_dir(cli)?;
    let runs_path = out.join("runs.csv");
    let runs = parse_runs_csv(
        &fs::read_to_string(&runs_path).with_context(|| format!("reading {}", runs_path.display()))?,
    )?;
    let meta_path = out.join("summary.json");
    let meta: ReportMeta = serde_json::from_str(
        &fs::read_to_string(&meta_path).with_context(|| format!("reading {}", meta_path.display()))?,
    )
    .with_context(|| format!("parsing {}", meta_path.display()))?;
    let table = ReportTable::build(meta, runs)?;
    table.write(out)?;
    print!("{}", render_report(&table));
    Ok(())
}

fn score(cli: &Cli, a: &ScoreArgs) -> Result<()> {
    let pred = read_predictions(&a.pred)?;
    let gold = read_predictions(&a.gold)?;
    let universe = a.labels.as_ref().map(read_labels).transpose()?;
    let row = score_records(&pred, &gold, a.task, &a.model, universe.as_deref())?;
    let csv = runs_csv(std::slice::from_ref(&row));
    print!("{csv}");
    if let Some(out) = &cli.out {
        write_atomic(&out.join(format!("external-{}-{}.csv", a.task, a.model)), csv.as_bytes())?;
    }
    Ok(())
}

fn gen_synth(cli: &Cli, a: &SynthArgs) -> Result<()> {
    let out = out_dir(cli)?;
    let d = SynthSpec::default();
    let spec = SynthSpec {
        size: a.size,
        two_label_rate: a.two_label_rate.unwrap_or(d.two_label_rate),
        three_label_rate: a.three_label_rate.unwrap_or(d.three_label_rate),
        emo_rate: a.emo_rate.unwrap_or(d.emo_rate),
        persistence: a.persistence.unwrap_or(d.persistence),
        session_len: a.session_len.unwrap_or(d.session_len),
        noise_rate: a.noise_rate.unwrap_or(d.noise_rate),
        seed: cli.seed.unwrap_or(d.seed),
        ..d
    };
    if cli.config.is_some() {
        bail!("gen-synth takes no --config");
    }
    let taxonomy = Taxonomy::default_bundled();
    let corpus = generate_synthetic_corpus(&spec, &taxonomy)?;
    corpus.save(out.join("corpus.jsonl"))?;
    write_atomic(&out.join("taxonomy.json"), taxonomy.to_json_string().as_bytes())?;
    println!("wrote {} utterances in {} sessions", corpus.len(), corpus.sessions().len());
    Ok(())
}
