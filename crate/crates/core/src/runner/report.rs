//! CSV and plain-text renderings of experiment results.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metrics::{fmt2, AggregateRow, MeanStd, MetricsRow};
use crate::runner::experiment::ReportTable;

const RUN_HEADER: [&str; 7] = ["task", "model", "seed", "w_f1", "m_f1", "acc", "hl"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-run CSV at full precision, so reports can be rebuilt from it exactly.
pub fn runs_csv(rows: &[MetricsRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RUN_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.task.clone(),
            r.model.clone(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            r.w_f1.to_string(),
            r.m_f1.to_string(),
            opt(r.acc),
            opt(r.hl),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

pub fn parse_runs_csv(s: &str) -> Result<Vec<MetricsRow>> {
    let mut rd = csv::Reader::from_reader(s.as_bytes());
    let header = rd.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
    if header.iter().ne(RUN_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {}", RUN_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let bad = |what: &str| Error::Parse {
            line,
            message: format!("bad {what}"),
        };
        let num = |j: usize, what: &str| -> Result<Option<f64>> {
            match &rec[j] {
                "" => Ok(None),
                v => v.parse().map(Some).map_err(|_| bad(what)),
            }
        };
        out.push(MetricsRow {
            task: rec[0].to_string(),
            model: rec[1].to_string(),
            seed: match &rec[2] {
                "" => None,
                v => Some(v.parse().map_err(|_| bad("seed"))?),
            },
            w_f1: num(3, "w_f1")?.ok_or_else(|| bad("w_f1"))?,
            m_f1: num(4, "m_f1")?.ok_or_else(|| bad("m_f1"))?,
            acc: num(5, "acc")?,
            hl: num(6, "hl")?,
        });
        if out.last().map(|r| r.acc.is_some() == r.hl.is_some()) == Some(true) {
            return Err(bad("acc/hl: exactly one must be set"));
        }
    }
    Ok(out)
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "task", "model", "n_runs", "w_f1_mean", "w_f1_std", "m_f1_mean", "m_f1_std", "acc_mean",
        "acc_std", "hl_mean", "hl_std",
    ])
    .expect("in-memory write");
    let pair = |m: Option<MeanStd>| match m {
        Some(m) => [fmt2(m.mean), fmt2(m.std)],
        None => [String::new(), String::new()],
    };
    for r in rows {
        let mut rec = vec![r.task.clone(), r.model.clone(), r.n_runs.to_string()];
        for m in [Some(r.w_f1), Some(r.m_f1), r.acc, r.hl] {
            rec.extend(pair(m));
        }
        w.write_record(rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

/// Table per task in the layout `model | W-F1 | M-F1 | ACC or HL`, with the
/// best value of each column marked `*` (lowest for HL).
pub fn render_report(t: &ReportTable) -> String {
    let p = &t.meta.provenance;
    let mut s = String::new();
    writeln!(s, "uttlab {}", p.version).unwrap();
    writeln!(s, "config sha256 {}", p.config_sha256).unwrap();
    writeln!(s, "corpus sha256 {}", p.corpus_sha256).unwrap();
    for summary in &t.meta.tasks {
        let task = summary.task.id();
        let rows: Vec<&AggregateRow> = t.rows.iter().filter(|r| r.task == task).collect();
        let multilabel = summary.task.is_multilabel();
        writeln!(s).unwrap();
        writeln!(
            s,
            "{task} ({}; {} labels; train {} / test {}; vocabulary {})",
            if multilabel { "multilabel" } else { "single-label" },
            summary.labels.len(),
            summary.n_train,
            summary.n_test,
            summary.vocab_size
        )
        .unwrap();
        let third = if multilabel { "HL" } else { "ACC" };
        let cols: [(&str, Box<dyn Fn(&AggregateRow) -> Option<MeanStd>>, bool); 3] = [
            ("W-F1", Box::new(|r| Some(r.w_f1)), true),
            ("M-F1", Box::new(|r| Some(r.m_f1)), true),
            (third, Box::new(|r| r.acc.or(r.hl)), !multilabel),
        ];
        let best: Vec<Option<f64>> = cols
            .iter()
            .map(|(_, get, higher)| {
                let vals = rows.iter().filter_map(|r| get(r)).map(|m| round2(m.mean));
                if *higher {
                    vals.reduce(f64::max)
                } else {
                    vals.reduce(f64::min)
                }
            })
            .collect();
        let width = rows.iter().map(|r| r.model.len()).max().unwrap_or(5).max(5) + 2;
        write!(s, "{:<width$}", "model").unwrap();
        for (name, _, _) in &cols {
            write!(s, "{name:<16}").unwrap();
        }
        writeln!(s).unwrap();
        for r in &rows {
            write!(s, "{:<width$}", r.model).unwrap();
            for ((_, get, _), b) in cols.iter().zip(&best) {
                let cell = match get(r) {
                    Some(m) => {
                        let mark = if Some(round2(m.mean)) == *b && rows.len() > 1 { "*" } else { "" };
                        format!("{}{mark}", m.render(r.n_runs))
                    }
                    None => String::new(),
                };
                write!(s, "{cell:<16}").unwrap();
            }
            writeln!(s).unwrap();
        }
        if multilabel {
            let notes: Vec<String> = t
                .meta
                .notes
                .iter()
                .filter(|n| n.task == task && n.empty_rows > 0)
                .map(|n| match n.seed {
                    Some(seed) => format!("{} (seed {seed}) {}", n.model, n.empty_rows),
                    None => format!("{} {}", n.model, n.empty_rows),
                })
                .collect();
            if !notes.is_empty() {
                writeln!(s, "test items with no predicted label: {}", notes.join(", ")).unwrap();
            }
        }
    }
    writeln!(s).unwrap();
    writeln!(s, "Values are percentages, mean ± sample std over seeds where more than one run; * marks the best value per column.").unwrap();
    s
}

fn round2(x: f64) -> f64 {
    crate::metrics::round_half_up(x, 2)
}
