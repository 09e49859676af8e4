use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::normalize::{normalize_text, NormalizationOptions};
use super::{Corpus, Dialogue, Genre, SpeakerRole, TagSchema, Turn, Utterance};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DialogueLine {
    id: String,
    genre: Genre,
    turns: Vec<TurnLine>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TurnLine {
    speaker: SpeakerRole,
    utterances: Vec<UtteranceLine>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UtteranceLine {
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    act: Option<String>,
}

/// Reads a JSON Lines corpus, validating every label against `schema`.
///
/// Blank lines are ignored. The first violation aborts parsing and is
/// reported with its 1-based line number and field path.
pub fn parse_corpus<R: BufRead>(reader: R, schema: &TagSchema) -> Result<Corpus> {
    let mut corpus = Corpus::new(schema.clone());
    let mut seen = HashSet::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: DialogueLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: format!("malformed dialogue: {e}"),
        })?;
        let dialogue = convert(raw, schema).map_err(|message| Error::Parse {
            line: line_no,
            message,
        })?;
        if !seen.insert(dialogue.id.clone()) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate dialogue id {:?}", dialogue.id),
            });
        }
        corpus.dialogues.push(dialogue);
    }
    Ok(corpus)
}

pub fn parse_corpus_str(text: &str, schema: &TagSchema) -> Result<Corpus> {
    parse_corpus(text.as_bytes(), schema)
}

fn convert(raw: DialogueLine, schema: &TagSchema) -> Result<Dialogue, String> {
    if raw.turns.is_empty() {
        return Err("turns: dialogue has no turns".into());
    }
    let check = NormalizationOptions::all();
    let mut turns = Vec::with_capacity(raw.turns.len());
    for (t, turn) in raw.turns.into_iter().enumerate() {
        if turn.utterances.is_empty() {
            return Err(format!("turns[{t}].utterances: turn has no utterances"));
        }
        let mut utterances = Vec::with_capacity(turn.utterances.len());
        for (u, utt) in turn.utterances.into_iter().enumerate() {
            let path = format!("turns[{t}].utterances[{u}]");
            if normalize_text(&utt.text, &check).is_empty() {
                return Err(format!("{path}.text: empty utterance text"));
            }
            if let Some(cat) = &utt.category {
                if schema.category_index(cat).is_none() {
                    return Err(format!("{path}.category: unknown category {cat:?}"));
                }
            }
            if let Some(act) = &utt.act {
                let Some(owner) = schema.category_of_label(act) else {
                    return Err(format!("{path}.act: unknown act {act:?}"));
                };
                if let Some(cat) = &utt.category {
                    if owner != cat {
                        return Err(format!(
                            "{path}: act/category mismatch: act {act:?} belongs to {owner:?}, not {cat:?}"
                        ));
                    }
                }
            }
            utterances.push(Utterance {
                text: utt.text,
                speaker: turn.speaker,
                category: utt.category,
                act: utt.act,
                index_in_turn: u,
            });
        }
        turns.push(Turn {
            speaker: turn.speaker,
            utterances,
        });
    }
    Ok(Dialogue {
        id: raw.id,
        genre: raw.genre,
        turns,
    })
}

fn to_line(d: &Dialogue) -> DialogueLine {
    DialogueLine {
        id: d.id.clone(),
        genre: d.genre,
        turns: d
            .turns
            .iter()
            .map(|t| TurnLine {
                speaker: t.speaker,
                utterances: t
                    .utterances
                    .iter()
                    .map(|u| UtteranceLine {
                        text: u.text.clone(),
                        category: u.category.clone(),
                        act: u.act.clone(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

pub fn write_dialogue_line<W: Write>(dialogue: &Dialogue, mut out: W) -> Result<()> {
    serde_json::to_writer(&mut out, &to_line(dialogue))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes one dialogue per line; the inverse of [`parse_corpus`].
pub fn write_corpus<W: Write>(corpus: &Corpus, mut out: W) -> Result<()> {
    for d in &corpus.dialogues {
        write_dialogue_line(d, &mut out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> TagSchema {
        TagSchema::default_schema()
    }

    const ONE: &str = r#"{"id":"d1","genre":"bank","turns":[{"speaker":"customer","utterances":[{"text":"عايز اعرف رصيد الحساب","category":"Question","act":"Service-Question"}]}]}"#;

    #[test]
    fn minimal_dialogue() {
        let c = parse_corpus_str(ONE, &schema()).unwrap();
        assert_eq!(c.dialogues.len(), 1);
        assert_eq!(c.num_utterances(), 1);
        let u = &c.dialogues[0].turns[0].utterances[0];
        assert_eq!(u.speaker, SpeakerRole::Customer);
        assert_eq!(u.act.as_deref(), Some("Service-Question"));
    }

    #[test]
    fn act_category_mismatch() {
        let text = ONE.replace(r#""category":"Question""#, r#""category":"Answer""#);
        let err = parse_corpus_str(&text, &schema()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("act/category mismatch"), "{msg}");
        assert!(msg.starts_with("line 1:"), "{msg}");
    }

    #[test]
    fn reports_line_numbers() {
        let text = format!("{ONE}\n\n{}", ONE.replace("Service-Question", "Nope"));
        match parse_corpus_str(&text, &schema()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("unknown act"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_id() {
        let text = format!("{ONE}\n{ONE}\n");
        let err = parse_corpus_str(&text, &schema()).unwrap_err();
        assert!(err.to_string().contains("duplicate dialogue id"));
    }

    #[test]
    fn empty_text() {
        let text = ONE.replace("عايز اعرف رصيد الحساب", " \u{064E} ");
        let err = parse_corpus_str(&text, &schema()).unwrap_err();
        assert!(err.to_string().contains("empty utterance text"));
    }

    #[test]
    fn malformed_line() {
        let err = parse_corpus_str("{\"id\": 3}", &schema()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn unlabeled_is_accepted_and_written_without_labels() {
        let text = r#"{"id":"x","genre":"im","turns":[{"speaker":"operator","utterances":[{"text":"اهلا"}]}]}"#;
        let c = parse_corpus_str(text, &schema()).unwrap();
        let mut out = Vec::new();
        write_corpus(&c, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().trim_end(), text);
    }
}
