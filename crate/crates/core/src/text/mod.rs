//! Sentence segmentation, tokenization, and coarse part-of-speech tagging.
//!
//! Everything downstream (indexing, query construction, the corpus pipeline)
//! goes through these primitives, so the same text always produces the same
//! tokens no matter which entry point touched it first.

mod readers;
mod split;
mod tagger;
mod tokenize;

pub use readers::{for_each_sentence, CorpusFormat, ReadStats};
pub use split::{split_sentence_spans, split_sentences};
pub use tagger::HeuristicTagger;
pub use tokenize::tokenize;

use serde::{Deserialize, Serialize};

/// Half-open byte range into the raw string it was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ByteSpan {
    pub start: usize,
    pub end: usize,
}

impl ByteSpan {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &ByteSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Inclusive range of token indices: covers `start..=end`, so a single
/// token is `start == end` and the span is never empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end, "token span {start}..={end} is inverted");
        Self { start, end }
    }

    pub fn single(index: usize) -> Self {
        Self {
            start: index,
            end: index,
        }
    }

    /// Number of tokens covered (at least 1).
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn overlaps(&self, other: &TokenSpan) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// Coarse part-of-speech tags. `Conn` marks discourse connectives; `Other`
/// absorbs particles, adverbs, prepositions, and anything else that neither
/// heads a noun phrase nor a verb chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tag {
    Noun,
    Propn,
    Verb,
    Pron,
    Det,
    Adj,
    Conn,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Exact text of the token: `raw[span.start..span.end]`.
    pub surface: String,
    /// Lowercased surface with curly apostrophes straightened; this is the
    /// form stored in indexes and compared by queries.
    pub norm: String,
    /// Byte offsets of `surface` in the sentence it came from.
    pub span: ByteSpan,
    pub tag: Option<Tag>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    /// Opaque locator, e.g. `dump.jsonl:41#2`. Carried into the index as the
    /// document's source reference.
    pub id: String,
    pub raw: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    /// Builds a sentence and tokenizes it. Tags are left unset.
    pub fn new(id: impl Into<String>, raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let tokens = tokenize(&raw);
        Self {
            id: id.into(),
            raw,
            tokens,
        }
    }

    /// Normalized token forms, in order.
    pub fn norms(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.norm.as_str()).collect()
    }
}

/// A tagger assigns exactly one tag per input token. Implementations must be
/// pure functions of the token sequence so repeated runs agree.
pub trait Tagger: Send + Sync {
    fn tag_tokens(&self, tokens: &[Token]) -> Vec<Tag>;
}

/// Runs `tagger` over `tokens` and stores the result in place.
///
/// Panics if the tagger violates its length contract; that is a bug in the
/// tagger, not a data error.
pub fn tag(tokens: &mut [Token], tagger: &dyn Tagger) {
    let tags = tagger.tag_tokens(tokens);
    assert_eq!(
        tags.len(),
        tokens.len(),
        "tagger returned {} tags for {} tokens",
        tags.len(),
        tokens.len()
    );
    for (token, tag) in tokens.iter_mut().zip(tags) {
        token.tag = Some(tag);
    }
}
