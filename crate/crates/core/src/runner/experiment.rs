//! End-to-end experiments: tasks × models × seeds.
//!
//! Each task is split once (with `split_seed`), featurized with a TF-IDF
//! vocabulary fitted on its training fold only, then every model is trained
//! and scored on the test fold. Seed-sensitive learners run once per
//! configured seed, deterministic ones once. Multilabel tasks wrap the
//! learner in a classifier chain.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{fit_chain, frequency_order, predict_chain, Chain, LabelMatrix};
use crate::corpus::{derive_task, parse_transcripts, stratified_split, Corpus, SplitPair, Task, Taxonomy};
use crate::error::{Error, Result};
use crate::learners::model::{from_container_json, to_container_json};
use crate::learners::{predict, Learner, LearnerSpec, Model};
use crate::metrics::{
    aggregate_runs, majority_baseline, score_matrices, AggregateRow, MajorityBaseline, MetricsRow,
    WeightSource,
};
use crate::runner::analysis::{error_analysis, error_analysis_csv};
use crate::runner::config::{hex_sha256, ExperimentConfig, WeightMode};
use crate::runner::predictions::{records_from_matrix, to_jsonl};
use crate::runner::report::{aggregate_csv, render_report, runs_csv};
use crate::runner::write_atomic;
use crate::seed::derive_seed;
use crate::text::{Normalizer, SparseVector, TokenList, Vocabulary};

/// One task's split and features.
#[derive(Debug, Clone)]
pub struct PreparedTask {
    pub task: Task,
    pub split: SplitPair,
    pub vocab: Vocabulary<f64>,
    pub train_x: Vec<SparseVector<f64>>,
    pub test_x: Vec<SparseVector<f64>>,
    pub train_y: LabelMatrix,
    pub test_y: LabelMatrix,
}

impl PreparedTask {
    pub fn universe(&self) -> &[String] {
        self.train_y.labels()
    }

    pub fn test_ids(&self) -> Vec<String> {
        self.split.test.items.iter().map(|it| it.id.clone()).collect()
    }
}

pub fn normalizer(cfg: &ExperimentConfig) -> Normalizer {
    Normalizer::english().with_placeholders([cfg.pad.clone(), cfg.sep.clone()])
}

pub fn prepare_task(
    corpus: &Corpus,
    taxonomy: &Taxonomy,
    cfg: &ExperimentConfig,
    task: Task,
) -> Result<PreparedTask> {
    let dataset = derive_task(corpus, taxonomy, task, &cfg.context_window())?;
    let split = stratified_split(&dataset, cfg.ratio, cfg.split_seed)?;
    let norm = normalizer(cfg);
    let tokens = |ds: &crate::corpus::TaskDataset| -> Vec<TokenList> {
        ds.items.iter().map(|it| norm.normalize(&it.context_text)).collect()
    };
    let train_docs = tokens(&split.train);
    let vocab = Vocabulary::fit(&train_docs, cfg.max_vocab)?;
    Ok(PreparedTask {
        task,
        train_x: vocab.transform_all(&train_docs),
        test_x: vocab.transform_all(&tokens(&split.test)),
        train_y: split.train.label_matrix(),
        test_y: split.test.label_matrix(),
        vocab,
        split,
    })
}

pub fn prepare_all(cfg: &ExperimentConfig) -> Result<(Corpus, Vec<PreparedTask>)> {
    let corpus = parse_transcripts(cfg.corpus_path())?;
    let taxonomy = cfg.load_taxonomy()?;
    let prepared = cfg
        .tasks
        .iter()
        .map(|&t| prepare_task(&corpus, &taxonomy, cfg, t))
        .collect::<Result<Vec<_>>>()?;
    Ok((corpus, prepared))
}

/// A (task, model, seed) unit of work.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub task: usize,
    pub model: String,
    pub seed: Option<u64>,
}

impl Cell {
    /// File stem for this cell's artifacts.
    pub fn stem(&self) -> String {
        match self.seed {
            Some(s) => format!("{}-seed{s}", self.model),
            None => self.model.clone(),
        }
    }
}

pub fn cells(cfg: &ExperimentConfig) -> Result<Vec<Cell>> {
    let mut out = Vec::new();
    for t in 0..cfg.tasks.len() {
        for m in &cfg.models {
            for seed in cfg.run_seeds(m)? {
                out.push(Cell {
                    task: t,
                    model: m.clone(),
                    seed,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "model", rename_all = "snake_case")]
pub enum TrainedModel {
    Baseline(MajorityBaseline),
    Single {
        label_universe: Vec<String>,
        model: Model<f64>,
    },
    Chain(Chain<f64>),
}

impl TrainedModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), to_container_json(self)?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        from_container_json(&s)
    }

    pub fn predict(&self, xs: &[SparseVector<f64>]) -> Result<LabelMatrix> {
        match self {
            TrainedModel::Baseline(b) => Ok(b.predict(xs.len())),
            TrainedModel::Single {
                label_universe,
                model,
            } => LabelMatrix::one_hot(label_universe.clone(), &predict(model, xs)?.labels),
            TrainedModel::Chain(c) => predict_chain(c, xs),
        }
    }
}

fn learner_seed(cfg: &ExperimentConfig, p: &PreparedTask, cell: &Cell) -> u64 {
    let master = cell.seed.unwrap_or(cfg.seeds[0]);
    derive_seed(master, &format!("{}/{}", p.task, cell.model))
}

pub fn train_cell(cfg: &ExperimentConfig, p: &PreparedTask, cell: &Cell) -> Result<TrainedModel> {
    let Some(spec) = cfg.learner(&cell.model)? else {
        return Ok(TrainedModel::Baseline(majority_baseline(&p.train_y)?));
    };
    let seed = learner_seed(cfg, p, cell);
    if p.task.is_multilabel() {
        let order = frequency_order(&p.train_y);
        Ok(TrainedModel::Chain(fit_chain(&spec, &p.train_x, &p.train_y, &order, seed)?))
    } else {
        let y: Vec<usize> = p
            .train_y
            .argmax_rows()
            .into_iter()
            .map(|c| c.expect("single-label rows are one-hot"))
            .collect();
        let model: Model<f64> = <LearnerSpec as Learner<f64>>::fit(&spec, &p.train_x, &y, seed)?;
        Ok(TrainedModel::Single {
            label_universe: p.universe().to_vec(),
            model,
        })
    }
}

pub fn train_cells(
    cfg: &ExperimentConfig,
    prepared: &[PreparedTask],
    cells: &[Cell],
) -> Result<Vec<TrainedModel>> {
    cells
        .par_iter()
        .map(|c| train_cell(cfg, &prepared[c.task], c))
        .collect()
}

/// Scored predictions of one cell.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub cell: Cell,
    pub row: MetricsRow,
    pub predictions: LabelMatrix,
    /// Test items with no predicted label.
    pub empty_rows: usize,
}

pub fn evaluate_cell(
    cfg: &ExperimentConfig,
    p: &PreparedTask,
    cell: &Cell,
    model: &TrainedModel,
) -> Result<RunOutput> {
    let predictions = model.predict(&p.test_x)?;
    let supports = p.train_y.column_counts();
    let weights = match cfg.weight_source {
        WeightMode::Evaluation => WeightSource::Evaluation,
        WeightMode::Training => WeightSource::Training(&supports),
    };
    let row = score_matrices(
        p.task.id(),
        &cell.model,
        cell.seed,
        &p.test_y,
        &predictions,
        p.task.is_multilabel(),
        weights,
    )?;
    let empty_rows = (0..predictions.n_rows())
        .filter(|&i| predictions.row(i).iter().all(|b| !b))
        .count();
    Ok(RunOutput {
        cell: cell.clone(),
        row,
        predictions,
        empty_rows,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub config_sha256: String,
    pub corpus_sha256: String,
}

impl Provenance {
    pub fn of(cfg: &ExperimentConfig) -> Result<Self> {
        let path = cfg.corpus_path();
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Provenance {
            version: crate::VERSION.to_string(),
            config_sha256: cfg.digest(),
            corpus_sha256: hex_sha256(&bytes),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub task: Task,
    pub n_train: usize,
    pub n_test: usize,
    pub labels: Vec<String>,
    pub vocab_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunNote {
    pub task: String,
    pub model: String,
    pub seed: Option<u64>,
    pub empty_rows: usize,
}

/// Everything besides the metric rows that the text report needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub provenance: Provenance,
    pub tasks: Vec<TaskSummary>,
    pub notes: Vec<RunNote>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub meta: ReportMeta,
    pub runs: Vec<MetricsRow>,
    /// One row per requested (task, model), in config order.
    pub rows: Vec<AggregateRow>,
}

impl ReportTable {
    pub fn build(meta: ReportMeta, runs: Vec<MetricsRow>) -> Result<Self> {
        let mut groups: Vec<((String, String), Vec<MetricsRow>)> = Vec::new();
        for r in &runs {
            let key = (r.task.clone(), r.model.clone());
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(r.clone()),
                None => groups.push((key, vec![r.clone()])),
            }
        }
        let rows = groups
            .iter()
            .map(|(_, v)| aggregate_runs(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(ReportTable { meta, runs, rows })
    }

    pub fn row(&self, task: &str, model: &str) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.task == task && r.model == model)
    }

    /// Writes `runs.csv`, `aggregate.csv`, `report.txt` and `summary.json`.
    pub fn write(&self, out: &Path) -> Result<()> {
        write_atomic(&out.join("runs.csv"), runs_csv(&self.runs).as_bytes())?;
        write_atomic(&out.join("aggregate.csv"), aggregate_csv(&self.rows).as_bytes())?;
        write_atomic(&out.join("report.txt"), render_report(self).as_bytes())?;
        let meta = serde_json::to_string_pretty(&self.meta).map_err(|e| Error::Serde(e.to_string()))?;
        write_atomic(&out.join("summary.json"), (meta + "\n").as_bytes())
    }
}

pub fn model_path(out: &Path, task: Task, cell: &Cell) -> PathBuf {
    out.join("models").join(task.id()).join(format!("{}.json", cell.stem()))
}

/// Split manifests, vocabulary, label universe and gold file of each task.
pub fn write_prepared(out: &Path, prepared: &[PreparedTask]) -> Result<()> {
    for p in prepared {
        let id = p.task.id();
        p.split.write_manifest(out.join("splits").join(id))?;
        write_atomic(&out.join("vocab").join(format!("{id}.tsv")), p.vocab.to_tsv().as_bytes())?;
        let labels: String = p.universe().iter().map(|l| format!("{l}\n")).collect();
        write_atomic(&out.join("labels").join(format!("{id}.txt")), labels.as_bytes())?;
        let gold = records_from_matrix(&p.test_ids(), &p.test_y);
        write_atomic(&out.join("gold").join(format!("{id}.jsonl")), to_jsonl(&gold).as_bytes())?;
    }
    Ok(())
}

/// Writes per-run predictions and error analyses, then the report files.
pub fn write_evaluation(
    out: &Path,
    cfg: &ExperimentConfig,
    prepared: &[PreparedTask],
    runs: &[RunOutput],
) -> Result<ReportTable> {
    for r in runs {
        let p = &prepared[r.cell.task];
        let dir = p.task.id();
        let stem = r.cell.stem();
        let recs = records_from_matrix(&p.test_ids(), &r.predictions);
        write_atomic(
            &out.join("predictions").join(dir).join(format!("{stem}.jsonl")),
            to_jsonl(&recs).as_bytes(),
        )?;
        let errors = error_analysis(&p.test_y, &r.predictions)?;
        write_atomic(
            &out.join("errors").join(dir).join(format!("{stem}.csv")),
            error_analysis_csv(&errors).as_bytes(),
        )?;
    }
    let meta = ReportMeta {
        provenance: Provenance::of(cfg)?,
        tasks: prepared
            .iter()
            .map(|p| TaskSummary {
                task: p.task,
                n_train: p.split.train.len(),
                n_test: p.split.test.len(),
                labels: p.universe().to_vec(),
                vocab_size: p.vocab.len(),
            })
            .collect(),
        notes: runs
            .iter()
            .map(|r| RunNote {
                task: r.row.task.clone(),
                model: r.row.model.clone(),
                seed: r.row.seed,
                empty_rows: r.empty_rows,
            })
            .collect(),
    };
    let table = ReportTable::build(meta, runs.iter().map(|r| r.row.clone()).collect())?;
    table.write(out)?;
    Ok(table)
}

pub fn evaluate_cells(
    cfg: &ExperimentConfig,
    prepared: &[PreparedTask],
    cells: &[Cell],
    models: &[TrainedModel],
) -> Result<Vec<RunOutput>> {
    cells
        .par_iter()
        .zip(models)
        .map(|(c, m)| evaluate_cell(cfg, &prepared[c.task], c, m))
        .collect()
}

/// Runs every cell of `cfg` and writes all outputs under `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<ReportTable> {
    cfg.validate()?;
    let (_, prepared) = prepare_all(cfg)?;
    let cells = cells(cfg)?;
    let models = train_cells(cfg, &prepared, &cells)?;
    let runs = evaluate_cells(cfg, &prepared, &cells, &models)?;
    write_prepared(out, &prepared)?;
    write_atomic(&out.join("config.toml"), cfg.to_toml_string().as_bytes())?;
    write_evaluation(out, cfg, &prepared, &runs)
}

/// Loads the models a previous `train` step saved for every cell.
pub fn load_models(out: &Path, prepared: &[PreparedTask], cells: &[Cell]) -> Result<Vec<TrainedModel>> {
    cells
        .iter()
        .map(|c| TrainedModel::load(model_path(out, prepared[c.task].task, c)))
        .collect()
}

pub fn save_models(
    out: &Path,
    prepared: &[PreparedTask],
    cells: &[Cell],
    models: &[TrainedModel],
) -> Result<()> {
    for (c, m) in cells.iter().zip(models) {
        m.save(model_path(out, prepared[c.task].task, c))?;
    }
    Ok(())
}

/// Per-task label counts of a corpus, for `ingest`.
pub fn corpus_summary(corpus: &Corpus, taxonomy: &Taxonomy, window_depth: usize) -> Result<String> {
    let mut s = format!(
        "sessions\t{}\nutterances\t{}\nfine labels\t{}\n",
        corpus.sessions().len(),
        corpus.len(),
        corpus.label_inventory().len()
    );
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for u in corpus.utterances() {
        *sizes.entry(u.fine_labels.len()).or_default() += 1;
    }
    for (k, n) in sizes {
        s.push_str(&format!(
            "with {k} label(s)\t{n}\t{:.4}\n",
            n as f64 / corpus.len() as f64
        ));
    }
    for task in Task::ALL {
        let ds = derive_task(corpus, taxonomy, task, &crate::corpus::ContextWindow::with_depth(window_depth))?;
        s.push_str(&format!("{task} items\t{}\n", ds.len()));
        let m = ds.label_matrix();
        for (l, c) in ds.label_universe.iter().zip(m.column_counts()) {
            s.push_str(&format!("  {l}\t{c}\n"));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::synth::{generate_synthetic_corpus, SynthSpec};

    fn setup(models: &[&str], tasks: &[Task], seeds: &[u64]) -> (tempfile::TempDir, ExperimentConfig) {
        let dir = tempfile::tempdir().unwrap();
        let corpus = generate_synthetic_corpus(
            &SynthSpec { size: 400, seed: 3, ..Default::default() },
            &Taxonomy::default_bundled(),
        )
        .unwrap();
        corpus.save(dir.path().join("corpus.jsonl")).unwrap();
        let mut cfg = ExperimentConfig::new(dir.path().join("corpus.jsonl"));
        cfg.models = models.iter().map(|s| s.to_string()).collect();
        cfg.tasks = tasks.to_vec();
        cfg.seeds = seeds.to_vec();
        (dir, cfg)
    }

    #[test]
    fn baseline_row_matches_closed_form() {
        let (dir, cfg) = setup(&["baseline"], &[Task::EmoCog], &[7]);
        let t = run_experiment(&cfg, &dir.path().join("out")).unwrap();
        assert_eq!(t.rows.len(), 1);
        let (_, prepared) = prepare_all(&cfg).unwrap();
        let counts = prepared[0].test_y.column_counts();
        let p = *counts.iter().max().unwrap() as f64 / prepared[0].test_y.n_rows() as f64;
        let r = &t.rows[0];
        assert!((r.acc.unwrap().mean - 100.0 * p).abs() < 1e-9);
        assert!((r.m_f1.mean - 100.0 * p / (1.0 + p)).abs() < 1e-9);
        assert!((r.w_f1.mean - 200.0 * p * p / (1.0 + p)).abs() < 1e-9);
    }

    #[test]
    fn tfidf_never_sees_test_documents() {
        let (_dir, cfg) = setup(&["baseline"], &[Task::Emo8], &[1]);
        let (_, prepared) = prepare_all(&cfg).unwrap();
        let p = &prepared[0];
        let norm = normalizer(&cfg);
        let docs: Vec<TokenList> = p.split.train.items.iter().map(|it| norm.normalize(&it.context_text)).collect();
        let refit: Vocabulary<f64> = Vocabulary::fit(&docs, cfg.max_vocab).unwrap();
        assert_eq!(refit, p.vocab);
    }

    #[test]
    fn seeded_models_run_per_seed_and_persist() {
        let (dir, mut cfg) = setup(&["nb", "gd_svm"], &[Task::EmoCog, Task::Cog8], &[1, 2, 3]);
        cfg.overrides.insert("gd_svm".into(), toml::toml! { epochs = 5 });
        let cs = cells(&cfg).unwrap();
        assert_eq!(cs.len(), 2 * (1 + 3));
        let out = dir.path().join("out");
        let t = run_experiment(&cfg, &out).unwrap();
        assert_eq!(t.row("COG-8", "gd_svm").unwrap().n_runs, 3);
        assert_eq!(t.row("COG-8", "nb").unwrap().n_runs, 1);
        assert!(out.join("errors/COG-8/gd_svm-seed2.csv").exists());

        let (_, prepared) = prepare_all(&cfg).unwrap();
        let models = train_cells(&cfg, &prepared, &cs).unwrap();
        save_models(&out, &prepared, &cs, &models).unwrap();
        let loaded = load_models(&out, &prepared, &cs).unwrap();
        assert_eq!(loaded, models);
        let runs = evaluate_cells(&cfg, &prepared, &cs, &loaded).unwrap();
        let rows: Vec<MetricsRow> = runs.into_iter().map(|r| r.row).collect();
        assert_eq!(rows, t.runs);
    }
}
