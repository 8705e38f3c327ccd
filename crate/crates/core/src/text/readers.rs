use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use super::{split_sentence_spans, Sentence};

/// How a corpus file maps to sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One document per file; the reader splits it into sentences.
    Text,
    /// One pre-split sentence per line.
    Lines,
    /// One JSON record per line with a `body` string field; each body is
    /// split into sentences.
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Self::Text),
            "lines" => Ok(Self::Lines),
            "jsonl" => Ok(Self::Jsonl),
            other => Err(format!(
                "unknown corpus format '{other}' (expected text, lines, jsonl)"
            )),
        }
    }
}

/// Counters reported back after a read pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadStats {
    /// Sentences handed to the sink (empty-token sentences included; the
    /// index decides what to admit).
    pub sentences: u64,
    /// Records that could not be decoded and were skipped.
    pub skipped: u64,
}

/// Streams the sentences of `path` into `sink` without materializing the
/// corpus. Sentence ids are locators built from the path as given:
/// `path:<ordinal>` for whole files and line formats, with `#<k>` appended
/// when one record splits into several sentences.
///
/// Undecodable JSONL records (bad JSON, missing or non-string `body`) are
/// skipped and counted, not fatal: web-scale dumps always contain a few.
pub fn for_each_sentence(
    path: &Path,
    format: CorpusFormat,
    mut sink: impl FnMut(Sentence),
) -> std::io::Result<ReadStats> {
    let mut stats = ReadStats::default();
    let name = path.display().to_string();

    match format {
        CorpusFormat::Text => {
            let text = std::fs::read_to_string(path)?;
            for (k, span) in split_sentence_spans(&text).into_iter().enumerate() {
                sink(Sentence::new(
                    format!("{name}:{k}"),
                    &text[span.start..span.end],
                ));
                stats.sentences += 1;
            }
        }
        CorpusFormat::Lines => {
            let file = std::fs::File::open(path)?;
            for (lineno, line) in BufReader::new(file).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                sink(Sentence::new(format!("{name}:{}", lineno + 1), line.trim()));
                stats.sentences += 1;
            }
        }
        CorpusFormat::Jsonl => {
            let file = std::fs::File::open(path)?;
            for (lineno, line) in BufReader::new(file).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let body = serde_json::from_str::<serde_json::Value>(&line)
                    .ok()
                    .and_then(|v| v.get("body").and_then(|b| b.as_str()).map(String::from));
                let Some(body) = body else {
                    stats.skipped += 1;
                    continue;
                };
                for (k, span) in split_sentence_spans(&body).into_iter().enumerate() {
                    sink(Sentence::new(
                        format!("{name}:{}#{k}", lineno + 1),
                        &body[span.start..span.end],
                    ));
                    stats.sentences += 1;
                }
            }
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn collect(path: &Path, format: CorpusFormat) -> (Vec<Sentence>, ReadStats) {
        let mut out = Vec::new();
        let stats = for_each_sentence(path, format, |s| out.push(s)).unwrap();
        (out, stats)
    }

    #[test]
    fn text_format_splits_the_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("doc.txt");
        std::fs::write(&path, "First one. Second one here.").unwrap();
        let (sents, stats) = collect(&path, CorpusFormat::Text);
        assert_eq!(
            stats,
            ReadStats {
                sentences: 2,
                skipped: 0
            }
        );
        assert_eq!(sents[0].raw, "First one.");
        assert!(sents[0].id.ends_with(":0"));
        assert!(sents[1].id.ends_with(":1"));
    }

    #[test]
    fn lines_format_never_splits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.lines");
        std::fs::write(&path, "one sentence. Even with stops.\n\nsecond line\n").unwrap();
        let (sents, stats) = collect(&path, CorpusFormat::Lines);
        assert_eq!(stats.sentences, 2);
        assert_eq!(sents[0].raw, "one sentence. Even with stops.");
        assert!(
            sents[1].id.ends_with(":3"),
            "blank lines keep numbering: {}",
            sents[1].id
        );
    }

    #[test]
    fn jsonl_format_reads_body_and_counts_bad_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dump.jsonl");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "{}", r#"{"body": "A post. It had two sentences."}"#).unwrap();
        writeln!(f, "not json at all").unwrap();
        writeln!(f, "{}", r#"{"title": "no body field"}"#).unwrap();
        writeln!(f, "{}", r#"{"body": 42}"#).unwrap();
        drop(f);
        let (sents, stats) = collect(&path, CorpusFormat::Jsonl);
        assert_eq!(
            stats,
            ReadStats {
                sentences: 2,
                skipped: 3
            }
        );
        assert!(sents[0].id.ends_with(":1#0"));
        assert!(sents[1].id.ends_with(":1#1"));
    }
}
