use proptest::prelude::*;

use uttlab::chain::{fit_chain, frequency_order, predict_chain};
use uttlab::corpus::{derive_task, parse_transcripts_str, stratified_split, ContextWindow, Corpus, Task, Taxonomy, Utterance};
use uttlab::learners::{AdaBoostParams, LearnerSpec};
use uttlab::runner::experiment::{cells, evaluate_cells, prepare_all, train_cells};
use uttlab::runner::predictions::{read_labels, score_external};
use uttlab::runner::{generate_synthetic_corpus, run_experiment, ExperimentConfig, SynthSpec, TrainedModel};
use uttlab::text::{Normalizer, TokenList, Vocabulary};
use uttlab::{Chain32, Chain64, Vocabulary32, Vocabulary64};

fn corpus_strategy() -> impl Strategy<Value = Corpus> {
    let labels = prop::sample::subsequence(vec!["express joy", "agree", "advise", "clarify"], 1..=3);
    let utt = ("[ -~]{0,30}", "[a-z]{1,8}", labels);
    prop::collection::vec((0usize..3, prop::collection::vec(utt, 1..6)), 1..4).prop_map(|sessions| {
        let mut out = Vec::new();
        for (s, (_, turns)) in sessions.into_iter().enumerate() {
            for (t, (text, speaker, labels)) in turns.into_iter().enumerate() {
                out.push(Utterance {
                    session_id: format!("session {s} \"q\""),
                    turn_index: t,
                    speaker,
                    text,
                    fine_labels: labels.into_iter().map(String::from).collect(),
                });
            }
        }
        Corpus::from_utterances(out).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corpus_jsonl_round_trips(c in corpus_strategy()) {
        let text = c.to_jsonl_string();
        let back = parse_transcripts_str(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_jsonl_string(), text);
    }

    #[test]
    fn every_task_item_is_in_exactly_one_fold(c in corpus_strategy(), seed in any::<u64>()) {
        let tax = Taxonomy::default_bundled();
        for task in Task::ALL {
            let ds = derive_task(&c, &tax, task, &ContextWindow::default()).unwrap();
            if ds.len() < 2 {
                continue;
            }
            let split = stratified_split(&ds, 0.5, seed).unwrap();
            let mut ids: Vec<_> = split.train.items.iter().chain(&split.test.items).map(|i| i.id.clone()).collect();
            ids.sort();
            let mut want: Vec<_> = ds.items.iter().map(|i| i.id.clone()).collect();
            want.sort();
            prop_assert_eq!(ids, want);
        }
    }
}

fn synthetic_config(dir: &std::path::Path, size: usize) -> ExperimentConfig {
    let corpus = generate_synthetic_corpus(
        &SynthSpec { size, seed: 21, ..Default::default() },
        &Taxonomy::default_bundled(),
    )
    .unwrap();
    corpus.save(dir.join("corpus.jsonl")).unwrap();
    let mut cfg = ExperimentConfig::new(dir.join("corpus.jsonl"));
    cfg.models = vec!["baseline".into(), "nb".into(), "logreg".into()];
    cfg
}

#[test]
fn external_scoring_matches_internal_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic_config(dir.path(), 800);
    let out = dir.path().join("out");
    let table = run_experiment(&cfg, &out).unwrap();
    assert_eq!(table.rows.len(), 5 * 3);
    for run in &table.runs {
        let task: Task = run.task.parse().unwrap();
        let universe = read_labels(out.join("labels").join(format!("{task}.txt"))).unwrap();
        let ext = score_external(
            out.join("predictions").join(task.id()).join(format!("{}.jsonl", run.model)),
            out.join("gold").join(format!("{task}.jsonl")),
            task,
            Some(&universe),
        )
        .unwrap();
        assert_eq!((ext.w_f1, ext.m_f1, ext.acc, ext.hl), (run.w_f1, run.m_f1, run.acc, run.hl), "{task} {}", run.model);
    }
}

#[test]
fn trained_models_survive_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = synthetic_config(dir.path(), 400);
    cfg.tasks = vec![Task::EmoCog, Task::CogFull];
    let (_, prepared) = prepare_all(&cfg).unwrap();
    let cs = cells(&cfg).unwrap();
    let models = train_cells(&cfg, &prepared, &cs).unwrap();
    for (i, m) in models.iter().enumerate() {
        let path = dir.path().join(format!("m{i}.json"));
        m.save(&path).unwrap();
        let back = TrainedModel::load(&path).unwrap();
        assert_eq!(&back, m);
    }
    let a = evaluate_cells(&cfg, &prepared, &cs, &models).unwrap();
    assert!(a.iter().any(|r| r.predictions.n_labels() > 2));
}

#[test]
fn single_precision_pipeline() {
    let corpus = generate_synthetic_corpus(
        &SynthSpec { size: 4000, seed: 2, ..Default::default() },
        &Taxonomy::default_bundled(),
    )
    .unwrap();
    let ds = derive_task(&corpus, &Taxonomy::default_bundled(), Task::Emo8, &ContextWindow::default()).unwrap();
    let split = stratified_split(&ds, 0.8, 1).unwrap();
    let norm = Normalizer::english().with_placeholders(["[PAD]", "[SEP]"]);
    let docs = |items: &[uttlab::corpus::TaskItem]| -> Vec<TokenList> {
        items.iter().map(|i| norm.normalize(&i.context_text)).collect()
    };
    let y = split.train.label_matrix();
    // plain NB on normalized TF-IDF rarely overcomes a binary link's prior
    let spec = LearnerSpec::AdaboostNb(AdaBoostParams::default());
    let order = frequency_order(&y);

    let vocab: Vocabulary32 = Vocabulary::fit(&docs(&split.train.items), 1000).unwrap();
    let chain: Chain32 = fit_chain(&spec, &vocab.transform_all(&docs(&split.train.items)), &y, &order, 0).unwrap();
    let single = predict_chain(&chain, &vocab.transform_all(&docs(&split.test.items))).unwrap();

    let vocab: Vocabulary64 = Vocabulary::fit(&docs(&split.train.items), 1000).unwrap();
    let chain: Chain64 = fit_chain(&spec, &vocab.transform_all(&docs(&split.train.items)), &y, &order, 0).unwrap();
    let double = predict_chain(&chain, &vocab.transform_all(&docs(&split.test.items))).unwrap();

    let disagreement: f64 = uttlab::hamming_loss(&single, &double).unwrap();
    assert!(disagreement < 0.01, "f32 and f64 disagree on {disagreement} of cells");
    let truth = split.test.label_matrix();
    let all_zero = uttlab::LabelMatrix::zeros(truth.labels().to_vec(), truth.n_rows());
    let hl: f32 = uttlab::hamming_loss(&truth, &single).unwrap();
    let floor: f32 = uttlab::hamming_loss(&truth, &all_zero).unwrap();
    assert!(hl < floor, "hamming loss {hl} vs {floor} for empty predictions");
}
