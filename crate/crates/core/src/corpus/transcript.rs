use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fsio::write_atomic;
use crate::error::{Error, Result};

/// One speaker turn with its gold fine labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub session_id: String,
    pub turn_index: usize,
    pub speaker: String,
    pub text: String,
    /// Non-empty and duplicate-free; order is kept as read.
    pub fine_labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub id: String,
    pub utterances: Vec<Utterance>,
}

impl Session {
    pub fn texts(&self) -> Vec<&str> {
        self.utterances.iter().map(|u| u.text.as_str()).collect()
    }
}

/// Sessions in input order, each holding its utterances in turn order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    sessions: Vec<Session>,
    label_inventory: BTreeSet<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    session: String,
    turn: u64,
    speaker: String,
    text: String,
    labels: Vec<String>,
}

impl Corpus {
    /// Groups utterances by session (first-appearance order), sorts each
    /// session by turn and checks the turn and label invariants.
    pub fn from_utterances(utterances: Vec<Utterance>) -> Result<Self> {
        if utterances.is_empty() {
            return Err(Error::Empty("corpus has no utterances".into()));
        }
        let mut order: Vec<String> = Vec::new();
        let mut grouped: HashMap<String, Vec<Utterance>> = HashMap::new();
        let mut label_inventory = BTreeSet::new();
        for u in utterances {
            if u.fine_labels.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "empty label set for {}:{}",
                    u.session_id, u.turn_index
                )));
            }
            let mut seen = BTreeSet::new();
            for l in &u.fine_labels {
                if !seen.insert(l.as_str()) {
                    return Err(Error::InvalidArgument(format!(
                        "duplicate label {l:?} for {}:{}",
                        u.session_id, u.turn_index
                    )));
                }
                label_inventory.insert(l.clone());
            }
            let bucket = grouped.entry(u.session_id.clone()).or_insert_with(|| {
                order.push(u.session_id.clone());
                Vec::new()
            });
            bucket.push(u);
        }
        let mut sessions = Vec::with_capacity(order.len());
        for id in order {
            let mut utterances = grouped.remove(&id).unwrap_or_default();
            utterances.sort_by_key(|u| u.turn_index);
            for (expected, u) in utterances.iter().enumerate() {
                if u.turn_index < expected {
                    return Err(Error::DuplicateTurn {
                        session: id,
                        turn: u.turn_index as u64,
                    });
                }
                if u.turn_index > expected {
                    return Err(Error::TurnGap {
                        session: id,
                        missing: expected as u64,
                    });
                }
            }
            sessions.push(Session { id, utterances });
        }
        Ok(Corpus {
            sessions,
            label_inventory,
        })
    }

    pub fn sessions(&self) -> &[Session] {
        &self.sessions
    }

    pub fn label_inventory(&self) -> &BTreeSet<String> {
        &self.label_inventory
    }

    pub fn len(&self) -> usize {
        self.sessions.iter().map(|s| s.utterances.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn utterances(&self) -> impl Iterator<Item = &Utterance> {
        self.sessions.iter().flat_map(|s| s.utterances.iter())
    }

    /// Writes the corpus as JSON Lines in session and turn order.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for u in self.utterances() {
            let rec = Record {
                session: u.session_id.clone(),
                turn: u.turn_index as u64,
                speaker: u.speaker.clone(),
                text: u.text.clone(),
                labels: u.fine_labels.clone(),
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_jsonl_string().as_bytes())
    }
}

/// Reads a JSON Lines transcript file.
pub fn parse_transcripts(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_transcripts_str(&content)
}

/// Parses transcript records; blank lines are skipped, line numbers are 1-based.
pub fn parse_transcripts_str(content: &str) -> Result<Corpus> {
    let mut utterances = Vec::new();
    let mut keys: HashMap<(String, u64), usize> = HashMap::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(raw).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if rec.labels.is_empty() {
            return Err(Error::EmptyLabelSet { line });
        }
        if let Some(dup) = rec.labels.iter().enumerate().find_map(|(i, l)| {
            rec.labels[..i].contains(l).then_some(l)
        }) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate label {dup:?}"),
            });
        }
        if keys.insert((rec.session.clone(), rec.turn), line).is_some() {
            return Err(Error::DuplicateTurn {
                session: rec.session,
                turn: rec.turn,
            });
        }
        let turn_index = usize::try_from(rec.turn).map_err(|_| Error::Parse {
            line,
            message: "turn index out of range".into(),
        })?;
        utterances.push(Utterance {
            session_id: rec.session,
            turn_index,
            speaker: rec.speaker,
            text: rec.text,
            fine_labels: rec.labels,
        });
    }
    if utterances.is_empty() {
        return Err(Error::Empty("transcript file has no records".into()));
    }
    Corpus::from_utterances(utterances)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_record() {
        let c = parse_transcripts_str(
            r#"{"session":"s1","turn":0,"speaker":"A","text":"hi","labels":["greet"]}"#,
        )
        .unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(
            c.label_inventory().iter().collect::<Vec<_>>(),
            vec!["greet"]
        );
    }

    #[test]
    fn two_labels_are_kept() {
        let c = parse_transcripts_str(
            r#"{"session":"s1","turn":0,"speaker":"A","text":"it was sad","labels":["express sadness","describe event"]}"#,
        )
        .unwrap();
        let u = c.utterances().next().unwrap();
        assert_eq!(u.fine_labels.len(), 2);
    }

    #[test]
    fn empty_label_set_is_rejected() {
        let err = parse_transcripts_str(
            r#"{"session":"s1","turn":0,"speaker":"A","text":"hi","labels":[]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyLabelSet { line: 1 }));
        assert!(err.to_string().contains("empty label set"));
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let input = concat!(
            r#"{"session":"s1","turn":0,"speaker":"A","text":"hi","labels":["a"]}"#,
            "\n{not json}\n"
        );
        match parse_transcripts_str(input).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn missing_field_is_a_parse_error() {
        let err = parse_transcripts_str(r#"{"session":"s1","turn":0,"text":"hi","labels":["a"]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("speaker"), "{err}");
    }

    #[test]
    fn duplicate_turn_is_rejected() {
        let input = concat!(
            r#"{"session":"s1","turn":0,"speaker":"A","text":"hi","labels":["a"]}"#,
            "\n",
            r#"{"session":"s1","turn":0,"speaker":"B","text":"yo","labels":["a"]}"#,
        );
        assert!(matches!(
            parse_transcripts_str(input).unwrap_err(),
            Error::DuplicateTurn { .. }
        ));
    }

    #[test]
    fn turn_gap_is_rejected() {
        let input = concat!(
            r#"{"session":"s1","turn":0,"speaker":"A","text":"hi","labels":["a"]}"#,
            "\n",
            r#"{"session":"s1","turn":2,"speaker":"B","text":"yo","labels":["a"]}"#,
        );
        assert!(matches!(
            parse_transcripts_str(input).unwrap_err(),
            Error::TurnGap { missing: 1, .. }
        ));
    }

    #[test]
    fn empty_file_is_rejected() {
        assert!(matches!(
            parse_transcripts_str("\n\n").unwrap_err(),
            Error::Empty(_)
        ));
    }

    #[test]
    fn out_of_order_turns_are_sorted_per_session() {
        let input = [
            r#"{"session":"b","turn":1,"speaker":"A","text":"b1","labels":["x"]}"#,
            r#"{"session":"a","turn":0,"speaker":"A","text":"a0","labels":["x"]}"#,
            r#"{"session":"b","turn":0,"speaker":"B","text":"b0","labels":["y"]}"#,
        ]
        .join("\n");
        let c = parse_transcripts_str(&input).unwrap();
        let ids: Vec<_> = c.sessions().iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["b", "a"]);
        assert_eq!(c.sessions()[0].texts(), ["b0", "b1"]);
    }
}
