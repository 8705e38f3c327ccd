//! Phrase-proximity filtering and BM25 scoring over positional indexes.
//!
//! A query carries two mandatory phrases and a bag of optional terms. A
//! document is a candidate only if it contains every token of both phrases;
//! it passes the filter only if some occurrence of the first phrase ends
//! before some occurrence of the second begins, with at most `window` tokens
//! strictly between them. Passing documents are scored with BM25 using their
//! own corpus statistics; results merge across corpora into one ranking.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::index::{CorpusStats, PositionalIndex};
use crate::schema::OverlapQuery;
use crate::text::TokenSpan;

/// BM25 tuning knobs. `idf_floor` clamps negative IDF values so a positive
/// score always means at least one informative shared term; set it to
/// `f64::NEG_INFINITY` to recover the raw log formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringParams {
    pub k1: f64,
    pub b: f64,
    pub idf_floor: f64,
}

impl Default for ScoringParams {
    fn default() -> Self {
        ScoringParams {
            k1: 1.2,
            b: 0.75,
            idf_floor: 0.0,
        }
    }
}

/// One document that passed the proximity filter, with its score and the
/// matched phrase positions (re-checkable against `stored_text`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredMatch {
    pub corpus_name: String,
    pub doc_id: u32,
    pub score: f64,
    pub pred_c_span: TokenSpan,
    pub pred_q_span: TokenSpan,
    pub stored_text: String,
}

/// Per-instance aggregate: the maximum score over every passing document in
/// every searched corpus. `best_match` is present iff any document passed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceOverlap {
    pub instance_id: String,
    pub max_score: f64,
    pub match_count: usize,
    pub best_match: Option<ScoredMatch>,
}

/// Wire form of [`InstanceOverlap`] for line-delimited JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapRecord {
    pub instance_id: String,
    pub max_score: f64,
    pub match_count: usize,
    pub best_match: Option<BestMatchRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestMatchRecord {
    pub corpus: String,
    pub doc_id: u32,
    pub score: f64,
    pub text: String,
}

impl InstanceOverlap {
    pub fn to_record(&self) -> OverlapRecord {
        OverlapRecord {
            instance_id: self.instance_id.clone(),
            max_score: self.max_score,
            match_count: self.match_count,
            best_match: self.best_match.as_ref().map(|m| BestMatchRecord {
                corpus: m.corpus_name.clone(),
                doc_id: m.doc_id,
                score: m.score,
                text: m.stored_text.clone(),
            }),
        }
    }
}

/// Every contiguous exact occurrence of `phrase` in `doc_tokens`, as
/// inclusive token spans of length `phrase.len()`.
pub fn phrase_positions(doc_tokens: &[String], phrase: &[String]) -> Vec<TokenSpan> {
    assert!(!phrase.is_empty(), "phrase must be nonempty");
    if doc_tokens.len() < phrase.len() {
        return Vec::new();
    }
    (0..=doc_tokens.len() - phrase.len())
        .filter(|&start| (0..phrase.len()).all(|i| doc_tokens[start + i] == phrase[i]))
        .map(|start| TokenSpan::new(start, start + phrase.len() - 1))
        .collect()
}

/// Ordered-proximity check: passes iff some occurrence of `phrase_a` ends
/// strictly before some occurrence of `phrase_b` starts with at most
/// `window` tokens strictly between them. Returns the pair with the
/// smallest gap (ties broken by earliest spans).
pub fn proximity_filter(
    doc_tokens: &[String],
    phrase_a: &[String],
    phrase_b: &[String],
    window: usize,
) -> Option<(TokenSpan, TokenSpan)> {
    let a_spans = phrase_positions(doc_tokens, phrase_a);
    if a_spans.is_empty() {
        return None;
    }
    let b_spans = phrase_positions(doc_tokens, phrase_b);
    best_pair(&a_spans, &b_spans, window)
}

fn best_pair(
    a_spans: &[TokenSpan],
    b_spans: &[TokenSpan],
    window: usize,
) -> Option<(TokenSpan, TokenSpan)> {
    let mut best: Option<(usize, TokenSpan, TokenSpan)> = None;
    for a in a_spans {
        for b in b_spans {
            if b.start <= a.end {
                continue;
            }
            let gap = b.start - a.end - 1;
            if gap > window {
                continue;
            }
            let candidate = (gap, *a, *b);
            let better = match &best {
                None => true,
                Some((g, ba, bb)) => (gap, a.start, b.start) < (*g, ba.start, bb.start),
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    best.map(|(_, a, b)| (a, b))
}

/// Inverse document frequency: `ln((N - n + 0.5) / (n + 0.5))` with
/// `n = doc_freq(term)`, clamped at `params.idf_floor`.
pub fn idf(stats: &CorpusStats, term: &str, params: &ScoringParams) -> f64 {
    let n = stats.doc_freq(term) as f64;
    let big_n = stats.doc_count() as f64;
    ((big_n - n + 0.5) / (n + 0.5)).ln().max(params.idf_floor)
}

fn term_score(idf: f64, f: f64, dl: f64, avgdl: f64, params: &ScoringParams) -> f64 {
    idf * (f * (params.k1 + 1.0)) / (f + params.k1 * (1.0 - params.b + params.b * dl / avgdl))
}

/// Distinct query terms in first-appearance order: phrase A, phrase B, then
/// optional terms. Each distinct term is counted once in the score.
fn distinct_terms(query: &OverlapQuery) -> Vec<&str> {
    let mut terms: Vec<&str> = Vec::new();
    let all = query
        .phrase_a
        .iter()
        .chain(query.phrase_b.iter())
        .chain(query.optional_terms.iter());
    for term in all {
        if !terms.contains(&term.as_str()) {
            terms.push(term);
        }
    }
    terms
}

/// BM25 score of a tokenized document against the query's deduplicated term
/// set, using the supplied corpus statistics.
pub fn bm25_score(
    query: &OverlapQuery,
    doc_tokens: &[String],
    stats: &CorpusStats,
    params: &ScoringParams,
) -> f64 {
    let dl = doc_tokens.len() as f64;
    let avgdl = stats.avgdl();
    let mut score = 0.0;
    for term in distinct_terms(query) {
        let f = doc_tokens.iter().filter(|t| t.as_str() == term).count() as f64;
        if f == 0.0 {
            continue;
        }
        score += term_score(idf(stats, term, params), f, dl, avgdl, params);
    }
    score
}

/// All occurrences of `phrase` in one indexed document, reconstructed from
/// the positional postings (no re-tokenization).
fn phrase_spans_in_doc(index: &PositionalIndex, doc_id: u32, phrase: &[String]) -> Vec<TokenSpan> {
    let mut lists: Vec<&[u32]> = Vec::with_capacity(phrase.len());
    for term in phrase {
        match index
            .term_postings(term)
            .and_then(|p| p.positions_for(doc_id))
        {
            Some(positions) => lists.push(positions),
            None => return Vec::new(),
        }
    }
    lists[0]
        .iter()
        .filter(|&&start| {
            (1..phrase.len()).all(|i| lists[i].binary_search(&(start + i as u32)).is_ok())
        })
        .map(|&start| TokenSpan::new(start as usize, start as usize + phrase.len() - 1))
        .collect()
}

/// All passing documents of one index, scored. Candidates are generated by
/// intersecting the posting lists of every distinct phrase token (rarest
/// first), so documents missing any mandatory token are never touched.
fn index_matches(
    query: &OverlapQuery,
    index: &PositionalIndex,
    params: &ScoringParams,
) -> Vec<ScoredMatch> {
    let mut phrase_tokens: Vec<&str> = query
        .phrase_a
        .iter()
        .chain(query.phrase_b.iter())
        .map(String::as_str)
        .collect();
    phrase_tokens.sort_unstable();
    phrase_tokens.dedup();

    let mut postings = Vec::with_capacity(phrase_tokens.len());
    for token in &phrase_tokens {
        match index.term_postings(token) {
            Some(p) => postings.push(p),
            None => return Vec::new(),
        }
    }
    postings.sort_by_key(|p| p.doc_freq());

    let mut candidates: Vec<u32> = postings[0].doc_ids().to_vec();
    for p in &postings[1..] {
        candidates.retain(|&doc_id| p.positions_for(doc_id).is_some());
        if candidates.is_empty() {
            return Vec::new();
        }
    }

    let stats = index.stats();
    let terms = distinct_terms(query);
    let mut matches = Vec::new();
    for doc_id in candidates {
        let a_spans = phrase_spans_in_doc(index, doc_id, &query.phrase_a);
        if a_spans.is_empty() {
            continue;
        }
        let b_spans = phrase_spans_in_doc(index, doc_id, &query.phrase_b);
        let Some((a_span, b_span)) = best_pair(&a_spans, &b_spans, query.window) else {
            continue;
        };
        let record = index
            .doc(doc_id)
            .expect("candidate doc_id comes from postings");
        let dl = record.length as f64;
        let mut score = 0.0;
        for term in &terms {
            let f = index
                .term_postings(term)
                .and_then(|p| p.positions_for(doc_id))
                .map_or(0, <[u32]>::len) as f64;
            if f == 0.0 {
                continue;
            }
            score += term_score(idf(&stats, term, params), f, dl, stats.avgdl(), params);
        }
        matches.push(ScoredMatch {
            corpus_name: index.corpus_name().to_string(),
            doc_id,
            score,
            pred_c_span: a_span,
            pred_q_span: b_span,
            stored_text: record.text.clone(),
        });
    }
    matches
}

fn rank(matches: &mut [ScoredMatch]) {
    matches.sort_by(|x, y| {
        y.score
            .total_cmp(&x.score)
            .then_with(|| x.corpus_name.cmp(&y.corpus_name))
            .then_with(|| x.doc_id.cmp(&y.doc_id))
    });
}

/// Evaluate the query against every index and return the merged ranking:
/// score descending, then corpus name, then doc id; truncated to `top_k`.
pub fn search(
    query: &OverlapQuery,
    indexes: &[PositionalIndex],
    params: &ScoringParams,
    top_k: usize,
) -> Vec<ScoredMatch> {
    assert!(!indexes.is_empty(), "search requires at least one index");
    let mut matches: Vec<ScoredMatch> = indexes
        .iter()
        .flat_map(|index| index_matches(query, index, params))
        .collect();
    rank(&mut matches);
    matches.truncate(top_k);
    matches
}

/// Aggregate a query into one per-instance result: maximum score over all
/// passing documents and the count of documents that passed the filter.
pub fn instance_overlap(
    query: &OverlapQuery,
    indexes: &[PositionalIndex],
    params: &ScoringParams,
) -> InstanceOverlap {
    assert!(
        !indexes.is_empty(),
        "instance_overlap requires at least one index"
    );
    let mut matches: Vec<ScoredMatch> = indexes
        .iter()
        .flat_map(|index| index_matches(query, index, params))
        .collect();
    let match_count = matches.len();
    rank(&mut matches);
    let best_match = matches.into_iter().next();
    InstanceOverlap {
        instance_id: query.instance_id.clone(),
        max_score: best_match.as_ref().map_or(0.0, |m| m.score),
        match_count,
        best_match,
    }
}

/// Score a batch of queries in parallel. Output is sorted by instance id,
/// independent of scheduling.
pub fn score_instances(
    queries: &[OverlapQuery],
    indexes: &[PositionalIndex],
    params: &ScoringParams,
) -> Vec<InstanceOverlap> {
    let mut results: Vec<InstanceOverlap> = queries
        .par_iter()
        .map(|query| instance_overlap(query, indexes, params))
        .collect();
    results.sort_by(|x, y| x.instance_id.cmp(&y.instance_id));
    results
}
