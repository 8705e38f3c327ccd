//! Positional inverted index over sentences.
//!
//! Each sentence is its own document: the unit of retrieval everywhere in
//! this toolkit is the sentence, never the page or post it came from.
//! Duplicate sentences stay distinct documents on purpose — duplication in
//! the source corpus is signal, not noise, when measuring overlap.
//!
//! Per-corpus statistics (document count, average length, document
//! frequencies) are computed at build time and never merged across indexes;
//! scoring against several corpora scores against each index's own
//! statistics.

mod store;
mod varint;

pub use store::FormatError;

use std::collections::HashMap;

use thiserror::Error;

use crate::text::Sentence;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("cannot build an index from an empty corpus")]
    EmptyCorpus,
}

/// Lookup of a document id that is not in the index.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("document {doc_id} out of range: corpus '{corpus}' has {doc_count} documents")]
pub struct LookupError {
    pub corpus: String,
    pub doc_id: u32,
    pub doc_count: u32,
}

/// One indexed sentence. Ids are dense and assigned in insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocRecord {
    pub doc_id: u32,
    /// Locator of the sentence in its source, e.g. `dump.jsonl:41#2`.
    pub source_ref: String,
    /// Length in tokens; the `|D|` used by scoring.
    pub length: u32,
    /// Raw sentence text, stored for reporting and re-tokenization.
    pub text: String,
}

/// Postings for one term, flattened: `docs` holds the (sorted, unique)
/// document ids, `offsets[i]` the start of document i's positions in
/// `positions`. Token positions are 0-based within the sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct TermPostings {
    docs: Vec<u32>,
    offsets: Vec<u32>,
    positions: Vec<u32>,
}

impl TermPostings {
    fn push(&mut self, doc_id: u32, position: u32) {
        if self.docs.last() != Some(&doc_id) {
            self.docs.push(doc_id);
            self.offsets.push(self.positions.len() as u32);
        }
        self.positions.push(position);
    }

    pub(crate) fn doc_freq(&self) -> u32 {
        self.docs.len() as u32
    }

    pub(crate) fn doc_ids(&self) -> &[u32] {
        &self.docs
    }

    /// Positions for the i-th document in `docs`.
    pub(crate) fn positions_at(&self, i: usize) -> &[u32] {
        let start = self.offsets[i] as usize;
        let end = self
            .offsets
            .get(i + 1)
            .map(|&o| o as usize)
            .unwrap_or(self.positions.len());
        &self.positions[start..end]
    }

    /// Positions for a document id, if the term occurs in it.
    pub(crate) fn positions_for(&self, doc_id: u32) -> Option<&[u32]> {
        let i = self.docs.binary_search(&doc_id).ok()?;
        Some(self.positions_at(i))
    }
}

/// Materialized postings for external consumers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostingList {
    pub term: String,
    pub postings: Vec<Posting>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Posting {
    pub doc_id: u32,
    pub positions: Vec<u32>,
}

/// Per-corpus scoring statistics, borrowed from an index.
#[derive(Clone, Copy)]
pub struct CorpusStats<'a> {
    index: &'a PositionalIndex,
}

impl CorpusStats<'_> {
    /// Number of documents (sentences) in the corpus.
    pub fn doc_count(&self) -> u64 {
        self.index.doc_count() as u64
    }

    /// Mean document length in tokens.
    pub fn avgdl(&self) -> f64 {
        self.index.avgdl()
    }

    /// Number of documents containing `term`; 0 for unseen terms.
    pub fn doc_freq(&self, term: &str) -> u64 {
        self.index.doc_freq(term) as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionalIndex {
    corpus_name: String,
    docs: Vec<DocRecord>,
    terms: HashMap<String, TermPostings>,
    total_tokens: u64,
}

impl PositionalIndex {
    pub fn corpus_name(&self) -> &str {
        &self.corpus_name
    }

    pub fn doc_count(&self) -> u32 {
        self.docs.len() as u32
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn avgdl(&self) -> f64 {
        self.total_tokens as f64 / self.docs.len() as f64
    }

    pub fn stats(&self) -> CorpusStats<'_> {
        CorpusStats { index: self }
    }

    pub fn doc_freq(&self, term: &str) -> u32 {
        self.terms.get(term).map_or(0, TermPostings::doc_freq)
    }

    pub fn doc(&self, doc_id: u32) -> Result<&DocRecord, LookupError> {
        self.docs.get(doc_id as usize).ok_or_else(|| LookupError {
            corpus: self.corpus_name.clone(),
            doc_id,
            doc_count: self.doc_count(),
        })
    }

    pub fn docs(&self) -> &[DocRecord] {
        &self.docs
    }

    /// Postings for `term`; empty for terms the corpus never saw.
    pub fn postings(&self, term: &str) -> PostingList {
        let postings = match self.terms.get(term) {
            Some(tp) => tp
                .docs
                .iter()
                .enumerate()
                .map(|(i, &doc_id)| Posting {
                    doc_id,
                    positions: tp.positions_at(i).to_vec(),
                })
                .collect(),
            None => Vec::new(),
        };
        PostingList {
            term: term.to_string(),
            postings,
        }
    }

    pub(crate) fn term_postings(&self, term: &str) -> Option<&TermPostings> {
        self.terms.get(term)
    }

    /// Terms in bytewise order; the order used by the on-disk dictionary.
    pub fn sorted_terms(&self) -> Vec<&str> {
        let mut terms: Vec<&str> = self.terms.keys().map(String::as_str).collect();
        terms.sort_unstable();
        terms
    }
}

/// Incremental builder so corpora can stream in without being materialized.
#[derive(Debug)]
pub struct IndexBuilder {
    corpus_name: String,
    docs: Vec<DocRecord>,
    terms: HashMap<String, TermPostings>,
    total_tokens: u64,
    skipped_empty: u64,
}

impl IndexBuilder {
    pub fn new(corpus_name: &str) -> Self {
        Self {
            corpus_name: corpus_name.to_string(),
            docs: Vec::new(),
            terms: HashMap::new(),
            total_tokens: 0,
            skipped_empty: 0,
        }
    }

    /// Admits one sentence as the next document. Sentences without tokens
    /// are skipped and counted; there is nothing to match in them.
    pub fn add(&mut self, sentence: &Sentence) {
        if sentence.tokens.is_empty() {
            self.skipped_empty += 1;
            return;
        }
        assert!(
            self.docs.len() < u32::MAX as usize,
            "document id space exhausted"
        );
        let doc_id = self.docs.len() as u32;
        for (pos, token) in sentence.tokens.iter().enumerate() {
            self.terms
                .entry(token.norm.clone())
                .or_default()
                .push(doc_id, pos as u32);
        }
        self.total_tokens += sentence.tokens.len() as u64;
        self.docs.push(DocRecord {
            doc_id,
            source_ref: sentence.id.clone(),
            length: sentence.tokens.len() as u32,
            text: sentence.raw.clone(),
        });
    }

    /// Sentences skipped so far because they had no tokens.
    pub fn skipped_empty(&self) -> u64 {
        self.skipped_empty
    }

    pub fn doc_count(&self) -> u32 {
        self.docs.len() as u32
    }

    pub fn finish(self) -> Result<PositionalIndex, BuildError> {
        if self.docs.is_empty() {
            return Err(BuildError::EmptyCorpus);
        }
        Ok(PositionalIndex {
            corpus_name: self.corpus_name,
            docs: self.docs,
            terms: self.terms,
            total_tokens: self.total_tokens,
        })
    }
}

/// Builds an index over `sentences` in one call.
pub fn build_index(
    sentences: impl IntoIterator<Item = Sentence>,
    corpus_name: &str,
) -> Result<PositionalIndex, BuildError> {
    let mut builder = IndexBuilder::new(corpus_name);
    for sentence in sentences {
        builder.add(&sentence);
    }
    builder.finish()
}
