//! Skeletal parsing of pronoun-resolution instances and query compilation.
//!
//! An instance is split into six components: two candidate antecedents (E1,
//! E2), a context predicate relating them, a discourse connective, the
//! target pronoun, and a query predicate adjacent to the pronoun. Candidate
//! and pronoun spans arrive with the data; the predicates and connective are
//! found heuristically from the tagged token sequence. The compiled query
//! demands the two predicates in order within a token window and treats
//! everything else as optional, score-only terms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::PRONOUN_SET;
use crate::text::{tag, tokenize, ByteSpan, Tag, Tagger, Token, TokenSpan};

/// Tokens a query's two phrases may be apart and still count as one match.
pub const DEFAULT_WINDOW: usize = 10;

/// One labeled test instance as it appears on the wire: character spans are
/// half-open byte offsets into `sentence`, `answer` names the correct
/// candidate (1 or 2).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawInstance {
    pub id: String,
    pub sentence: String,
    pub span1: [usize; 2],
    pub span2: [usize; 2],
    pub pronoun: [usize; 2],
    pub answer: u8,
}

impl RawInstance {
    /// Checks the structural invariants: spans in bounds on character
    /// boundaries, pairwise non-overlapping, and a 1/2 answer. Span *order*
    /// is deliberately not checked here; unusual orders are flagged by the
    /// parse, not rejected.
    pub fn validate(&self) -> Result<(), ParseError> {
        let bad = |detail: String| ParseError::BadSpans {
            id: self.id.clone(),
            detail,
        };
        if self.answer != 1 && self.answer != 2 {
            return Err(bad(format!("answer must be 1 or 2, got {}", self.answer)));
        }
        let spans = [
            ("span1", self.span1),
            ("span2", self.span2),
            ("pronoun", self.pronoun),
        ];
        for (name, [start, end]) in spans {
            if start >= end || end > self.sentence.len() {
                return Err(bad(format!(
                    "{name} [{start},{end}) is empty or out of bounds"
                )));
            }
            if !self.sentence.is_char_boundary(start) || !self.sentence.is_char_boundary(end) {
                return Err(bad(format!("{name} [{start},{end}) splits a character")));
            }
        }
        for (i, (a_name, a)) in spans.iter().enumerate() {
            for (b_name, b) in &spans[i + 1..] {
                if a[0] < b[1] && b[0] < a[1] {
                    return Err(bad(format!("{a_name} and {b_name} overlap")));
                }
            }
        }
        Ok(())
    }

    fn byte_span(range: [usize; 2]) -> ByteSpan {
        ByteSpan::new(range[0], range[1])
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("instance {id}: {detail}")]
    BadSpans { id: String, detail: String },
    #[error("instance {id}: pronoun span must cover exactly one known pronoun ({detail})")]
    BadPronoun { id: String, detail: String },
    #[error("instance {id}: no verbal chunk found for the {which} predicate")]
    MissingPredicate { id: String, which: &'static str },
}

/// The parsed skeleton. All spans are inclusive token-index ranges into
/// `tokens`, which carries the tagged tokens of the original sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletalInstance {
    pub instance_id: String,
    pub tokens: Vec<Token>,
    pub e1: TokenSpan,
    pub e2: TokenSpan,
    pub pred_c: TokenSpan,
    pub pred_q: TokenSpan,
    pub pronoun: TokenSpan,
    pub connective: Option<TokenSpan>,
    /// Normalized forms of E1 ∪ E2 ∪ pronoun ∪ connective, first occurrence
    /// kept, predicate token positions excluded.
    pub content_words: Vec<String>,
    /// True when the instance departs from the usual order (E1 before E2,
    /// pronoun after both). Such instances still parse.
    pub noncanonical_order: bool,
}

impl SkeletalInstance {
    /// Normalized token forms covered by `span`.
    pub fn span_norms(&self, span: TokenSpan) -> Vec<String> {
        self.tokens[span.start..=span.end]
            .iter()
            .map(|t| t.norm.clone())
            .collect()
    }

    /// Surface text covered by `span`, tokens joined by single spaces.
    pub fn span_text(&self, span: TokenSpan) -> String {
        self.tokens[span.start..=span.end]
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Audit form for line-delimited JSON export.
    pub fn to_record(&self) -> SkeletonRecord {
        let component = |span: TokenSpan| Component {
            tokens: [span.start, span.end],
            text: self.span_text(span),
        };
        SkeletonRecord {
            id: self.instance_id.clone(),
            e1: component(self.e1),
            e2: component(self.e2),
            pred_c: component(self.pred_c),
            pred_q: component(self.pred_q),
            pronoun: component(self.pronoun),
            connective: self.connective.map(component),
            content_words: self.content_words.clone(),
            noncanonical_order: self.noncanonical_order,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonRecord {
    pub id: String,
    pub e1: Component,
    pub e2: Component,
    pub pred_c: Component,
    pub pred_q: Component,
    pub pronoun: Component,
    pub connective: Option<Component>,
    pub content_words: Vec<String>,
    pub noncanonical_order: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    /// Inclusive token index range.
    pub tokens: [usize; 2],
    pub text: String,
}

/// A compiled retrieval query: both phrases mandatory and ordered within
/// `window`, the rest optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapQuery {
    pub instance_id: String,
    /// Context-predicate norms; must match contiguously.
    pub phrase_a: Vec<String>,
    /// Query-predicate norms; must match contiguously, after `phrase_a`.
    pub phrase_b: Vec<String>,
    /// Maximum tokens allowed between the two phrase matches.
    pub window: usize,
    /// Score-only terms; matching none of them is fine.
    pub optional_terms: Vec<String>,
}

/// Parses `raw` into its skeleton using `tagger` for chunk evidence.
///
/// The context predicate is the best verb chunk between the antecedents,
/// falling back to the rest of the context clause; the query predicate is
/// the chunk immediately after the pronoun, falling back to the one
/// immediately before it. With several connectives in range, the one
/// closest to (and before) the pronoun wins.
pub fn parse_instance(
    raw: &RawInstance,
    tagger: &dyn Tagger,
) -> Result<SkeletalInstance, ParseError> {
    raw.validate()?;

    let mut tokens = tokenize(&raw.sentence);
    tag(&mut tokens, tagger);

    let e1 = cover(&tokens, RawInstance::byte_span(raw.span1))
        .ok_or_else(|| bad_spans(raw, "span1 covers no token"))?;
    let e2 = cover(&tokens, RawInstance::byte_span(raw.span2))
        .ok_or_else(|| bad_spans(raw, "span2 covers no token"))?;

    let pronoun = cover(&tokens, RawInstance::byte_span(raw.pronoun)).ok_or_else(|| {
        ParseError::BadPronoun {
            id: raw.id.clone(),
            detail: "span covers no token".into(),
        }
    })?;
    if pronoun.start != pronoun.end {
        return Err(ParseError::BadPronoun {
            id: raw.id.clone(),
            detail: format!("span covers {} tokens", pronoun.len()),
        });
    }
    let p = pronoun.start;
    if !PRONOUN_SET.contains(tokens[p].norm.as_str()) {
        return Err(ParseError::BadPronoun {
            id: raw.id.clone(),
            detail: format!("'{}' is not in the pronoun lexicon", tokens[p].norm),
        });
    }
    // The dataset says this token is the target pronoun; overrule the
    // heuristic tag (possessives often come back DET).
    tokens[p].tag = Some(Tag::Pron);

    if e1.overlaps(&e2) || e1.overlaps(&pronoun) || e2.overlaps(&pronoun) {
        return Err(bad_spans(raw, "candidate/pronoun token spans overlap"));
    }

    let noncanonical_order = !(e1.end < e2.start && e2.end < p);
    // Work with the antecedents in surface order so region math holds even
    // for flagged instances.
    let (first_ant, second_ant) = if e1.start <= e2.start {
        (e1, e2)
    } else {
        (e2, e1)
    };
    let clear_of_antecedents = |c: &TokenSpan| !c.overlaps(&e1) && !c.overlaps(&e2);

    // Connective: last CONN-tagged token strictly between the second
    // antecedent and the pronoun.
    let conn_lo = second_ant.end + 1;
    let connective = (conn_lo..p.min(tokens.len()))
        .rev()
        .find(|&i| tokens[i].tag == Some(Tag::Conn))
        .map(TokenSpan::single);

    // Query predicate first: strictly after the pronoun and flush against
    // it, else flush against it on the left, inside the query clause.
    let following = verb_chunks(&tokens, p + 1, tokens.len())
        .into_iter()
        .find(|c| c.start == p + 1 && clear_of_antecedents(c));
    let q_lo = connective.map(|c| c.end + 1).unwrap_or(second_ant.end + 1);
    let pred_q = following
        .or_else(|| {
            verb_chunks(&tokens, q_lo, p)
                .into_iter()
                .find(|c| c.end + 1 == p && clear_of_antecedents(c))
        })
        .ok_or_else(|| ParseError::MissingPredicate {
            id: raw.id.clone(),
            which: "query",
        })?;

    // The context clause ends where the connective begins or, without one,
    // at the pronoun. When the pronoun precedes the antecedents the clause
    // structure is inverted and the whole sentence is fair game.
    let ctx_end = connective
        .map(|c| c.start)
        .unwrap_or(if p > second_ant.end { p } else { tokens.len() });
    let usable =
        |c: &TokenSpan| !c.overlaps(&pronoun) && !c.overlaps(&pred_q) && clear_of_antecedents(c);

    let between: Vec<TokenSpan> =
        verb_chunks(&tokens, first_ant.end + 1, second_ant.start.min(ctx_end))
            .into_iter()
            .filter(usable)
            .collect();
    let pred_c = best_chunk(&between)
        .or_else(|| {
            let mut outside = verb_chunks(&tokens, 0, first_ant.start);
            outside.extend(verb_chunks(&tokens, second_ant.end + 1, ctx_end));
            outside.retain(usable);
            best_chunk(&outside)
        })
        .ok_or_else(|| ParseError::MissingPredicate {
            id: raw.id.clone(),
            which: "context",
        })?;

    debug_assert!(
        !pred_c.overlaps(&pred_q)
            && !pred_c.overlaps(&e1)
            && !pred_c.overlaps(&e2)
            && !pred_c.overlaps(&pronoun)
            && !pred_q.overlaps(&e1)
            && !pred_q.overlaps(&e2)
            && !pred_q.overlaps(&pronoun),
        "predicate chunks strayed into other components: {raw:?}"
    );

    let content_words = collect_content_words(&tokens, &[e1, e2, pronoun], connective);

    Ok(SkeletalInstance {
        instance_id: raw.id.clone(),
        tokens,
        e1,
        e2,
        pred_c,
        pred_q,
        pronoun,
        connective,
        content_words,
        noncanonical_order,
    })
}

/// Compiles a skeleton into its retrieval query: predicates become the two
/// mandatory phrases, content words the optional terms, window 10.
pub fn build_query(sk: &SkeletalInstance) -> OverlapQuery {
    OverlapQuery {
        instance_id: sk.instance_id.clone(),
        phrase_a: sk.span_norms(sk.pred_c),
        phrase_b: sk.span_norms(sk.pred_q),
        window: DEFAULT_WINDOW,
        optional_terms: sk.content_words.clone(),
    }
}

fn bad_spans(raw: &RawInstance, detail: &str) -> ParseError {
    ParseError::BadSpans {
        id: raw.id.clone(),
        detail: detail.to_string(),
    }
}

/// Token-index span of the tokens overlapping a byte span.
fn cover(tokens: &[Token], span: ByteSpan) -> Option<TokenSpan> {
    let mut first = None;
    let mut last = None;
    for (i, token) in tokens.iter().enumerate() {
        if token.span.overlaps(&span) {
            first.get_or_insert(i);
            last = Some(i);
        }
    }
    Some(TokenSpan::new(first?, last?))
}

fn collect_content_words(
    tokens: &[Token],
    spans: &[TokenSpan],
    connective: Option<TokenSpan>,
) -> Vec<String> {
    let mut words = Vec::new();
    let mut push = |span: TokenSpan| {
        for token in &tokens[span.start..=span.end] {
            if !words.contains(&token.norm) {
                words.push(token.norm.clone());
            }
        }
    };
    for &span in spans {
        push(span);
    }
    if let Some(conn) = connective {
        push(conn);
    }
    words
}

/// True for tags allowed inside a verb chunk.
fn chunk_interior(tag: Option<Tag>) -> bool {
    matches!(tag, Some(Tag::Verb | Tag::Adj | Tag::Other))
}

/// Maximal verb-headed chunks in the half-open token range `[lo, hi)`.
///
/// A chunk is a contiguous run of verb/adjective/particle tokens containing
/// at least one verb, trimmed to at most 2 leading particles before the
/// first verb and at most 3 trailing tokens after the last ("ended up
/// looking more like" keeps its tail; "was so heavy" keeps the degree word).
pub(crate) fn verb_chunks(tokens: &[Token], lo: usize, hi: usize) -> Vec<TokenSpan> {
    let hi = hi.min(tokens.len());
    let mut chunks = Vec::new();
    let mut i = lo;
    while i < hi {
        if !chunk_interior(tokens[i].tag) {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < hi && chunk_interior(tokens[i].tag) {
            i += 1;
        }
        let run_end = i; // exclusive
        let verbs: Vec<usize> = (run_start..run_end)
            .filter(|&k| tokens[k].tag == Some(Tag::Verb))
            .collect();
        let (Some(&first_verb), Some(&last_verb)) = (verbs.first(), verbs.last()) else {
            continue;
        };
        let mut start = first_verb;
        while start > run_start
            && first_verb - start < 2
            && tokens[start - 1].tag == Some(Tag::Other)
        {
            start -= 1;
        }
        let end = (last_verb + 3).min(run_end - 1);
        chunks.push(TokenSpan::new(start, end));
    }
    chunks
}

/// Longest chunk, leftmost on ties.
fn best_chunk(chunks: &[TokenSpan]) -> Option<TokenSpan> {
    chunks
        .iter()
        .copied()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b.start.cmp(&a.start)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::HeuristicTagger;

    /// Builds a RawInstance by locating the given snippets in the sentence,
    /// so tests never hand-count byte offsets.
    fn instance(sentence: &str, c1: &str, c2: &str, pronoun: &str, answer: u8) -> RawInstance {
        let find = |needle: &str| {
            let start = sentence.find(needle).unwrap_or_else(|| {
                panic!("{needle:?} not found in {sentence:?}");
            });
            [start, start + needle.len()]
        };
        // The pronoun is searched as a standalone word to dodge substrings
        // like the "he" in "The" or "heavy".
        let pronoun_span = {
            let bytes = sentence.as_bytes();
            let mut at = None;
            let mut from = 0;
            while let Some(i) = sentence[from..].find(pronoun) {
                let s = from + i;
                let e = s + pronoun.len();
                let before_ok = s == 0 || !bytes[s - 1].is_ascii_alphanumeric();
                let after_ok = e == sentence.len() || !bytes[e].is_ascii_alphanumeric();
                if before_ok && after_ok {
                    at = Some(s);
                    break;
                }
                from = s + 1;
            }
            let s = at.expect("pronoun not found as a standalone word");
            [s, s + pronoun.len()]
        };
        RawInstance {
            id: "t1".into(),
            sentence: sentence.into(),
            span1: find(c1),
            span2: find(c2),
            pronoun: pronoun_span,
            answer,
        }
    }

    fn parse(raw: &RawInstance) -> SkeletalInstance {
        parse_instance(raw, &HeuristicTagger::default()).unwrap()
    }

    #[test]
    fn parses_the_lift_sentence() {
        let raw = instance(
            "The man couldn't lift his son because he was so heavy.",
            "The man",
            "his son",
            "he",
            1,
        );
        let sk = parse(&raw);
        assert_eq!(sk.span_norms(sk.pred_c), ["couldn't", "lift"]);
        assert_eq!(sk.span_norms(sk.pred_q), ["was", "so", "heavy"]);
        assert_eq!(sk.span_text(sk.connective.unwrap()), "because");
        assert!(!sk.noncanonical_order);
        assert_eq!(
            sk.content_words,
            ["the", "man", "his", "son", "he", "because"]
        );
    }

    #[test]
    fn falls_back_to_the_preceding_chunk() {
        let raw = instance(
            "The older students were bullying the younger ones, so we punished them.",
            "The older students",
            "the younger ones",
            "them",
            2,
        );
        let sk = parse(&raw);
        assert_eq!(sk.span_norms(sk.pred_c), ["were", "bullying"]);
        assert_eq!(sk.span_norms(sk.pred_q), ["punished"]);
        assert_eq!(sk.span_text(sk.connective.unwrap()), "so");
        assert!(
            sk.pred_q.end + 1 == sk.pronoun.start,
            "fallback chunk hugs the pronoun"
        );
    }

    #[test]
    fn finds_the_context_predicate_outside_the_antecedent_gap() {
        let raw = instance(
            "Sam tried to paint a picture of shepherds with sheep, but they ended up looking more like dogs.",
            "shepherds",
            "sheep",
            "they",
            1,
        );
        let sk = parse(&raw);
        assert_eq!(sk.span_norms(sk.pred_c), ["tried", "to", "paint"]);
        assert_eq!(
            sk.span_norms(sk.pred_q),
            ["ended", "up", "looking", "more", "like"]
        );
        assert_eq!(sk.span_text(sk.connective.unwrap()), "but");
    }

    #[test]
    fn multi_connective_prefers_the_one_nearest_the_pronoun() {
        let raw = instance(
            "The man and the boy pushed the cart although it was stuck because he was stubborn.",
            "The man",
            "the cart",
            "he",
            1,
        );
        let sk = parse(&raw);
        assert_eq!(sk.span_text(sk.connective.unwrap()), "because");
    }

    #[test]
    fn connective_is_optional() {
        let raw = instance(
            "The trophy never fit in the suitcase; it was too large.",
            "The trophy",
            "the suitcase",
            "it",
            1,
        );
        let sk = parse(&raw);
        assert_eq!(sk.connective, None);
        assert_eq!(sk.span_norms(sk.pred_q), ["was", "too", "large"]);
        assert!(!sk.content_words.contains(&"never".to_string()));
    }

    #[test]
    fn query_carries_predicates_content_words_and_window() {
        let raw = instance(
            "The man couldn't lift his son because he was so heavy.",
            "The man",
            "his son",
            "he",
            1,
        );
        let q = build_query(&parse(&raw));
        assert_eq!(q.phrase_a, ["couldn't", "lift"]);
        assert_eq!(q.phrase_b, ["was", "so", "heavy"]);
        assert_eq!(q.window, 10);
        assert_eq!(
            q.optional_terms,
            ["the", "man", "his", "son", "he", "because"]
        );
        assert_eq!(q.instance_id, "t1");
    }

    #[test]
    fn content_words_dedupe_but_keep_repeats_out_of_predicates() {
        let raw = instance(
            "The man thanked the boy because he helped him.",
            "The man",
            "the boy",
            "he",
            2,
        );
        let sk = parse(&raw);
        // "the" occurs in both antecedents: once in the set.
        let the_count = sk.content_words.iter().filter(|w| *w == "the").count();
        assert_eq!(the_count, 1);
    }

    #[test]
    fn queries_are_deterministic() {
        let raw = instance(
            "The man couldn't lift his son because he was so heavy.",
            "The man",
            "his son",
            "he",
            1,
        );
        let a = serde_json::to_string(&build_query(&parse(&raw))).unwrap();
        let b = serde_json::to_string(&build_query(&parse(&raw))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn component_spans_are_pairwise_disjoint() {
        for (sentence, c1, c2, p) in [
            (
                "The man couldn't lift his son because he was so heavy.",
                "The man",
                "his son",
                "he",
            ),
            (
                "The older students were bullying the younger ones, so we punished them.",
                "The older students",
                "the younger ones",
                "them",
            ),
        ] {
            let sk = parse(&instance(sentence, c1, c2, p, 1));
            let spans = [sk.e1, sk.e2, sk.pred_c, sk.pred_q, sk.pronoun];
            for i in 0..spans.len() {
                for j in i + 1..spans.len() {
                    assert!(
                        !spans[i].overlaps(&spans[j]),
                        "{:?} vs {:?}",
                        spans[i],
                        spans[j]
                    );
                }
            }
        }
    }

    #[test]
    fn bad_pronoun_span_is_rejected() {
        let mut raw = instance(
            "The man couldn't lift his son because he was so heavy.",
            "The man",
            "his son",
            "he",
            1,
        );
        // Point the pronoun span at "son".
        raw.pronoun = raw.span2;
        raw.span2 = [raw.span1[1] + 1, raw.span1[1] + 2];
        let err = parse_instance(&raw, &HeuristicTagger::default()).unwrap_err();
        assert!(matches!(err, ParseError::BadPronoun { .. }), "{err}");
    }

    #[test]
    fn possessive_target_pronoun_is_forced_to_pron() {
        // The heuristic tags "his" before a nominal as DET; the dataset says
        // it is the target pronoun, and the dataset wins.
        let raw = instance(
            "The tailor measured the groom because the suit was his size.",
            "The tailor",
            "the groom",
            "his",
            2,
        );
        let sk = parse(&raw);
        assert_eq!(sk.tokens[sk.pronoun.start].tag, Some(Tag::Pron));
        assert_eq!(sk.span_norms(sk.pred_q), ["was"]);
    }

    #[test]
    fn missing_query_predicate_is_reported() {
        // Nothing verbal follows or precedes the pronoun inside the query
        // clause.
        let raw = instance(
            "The cat chased the dog because he.",
            "The cat",
            "the dog",
            "he",
            1,
        );
        let err = parse_instance(&raw, &HeuristicTagger::default()).unwrap_err();
        assert_eq!(
            err,
            ParseError::MissingPredicate {
                id: "t1".into(),
                which: "query"
            }
        );
    }

    #[test]
    fn out_of_bounds_and_overlapping_spans_are_rejected() {
        let good = instance(
            "The man couldn't lift his son because he was so heavy.",
            "The man",
            "his son",
            "he",
            1,
        );
        let mut oob = good.clone();
        oob.span2 = [10, 2000];
        assert!(matches!(
            parse_instance(&oob, &HeuristicTagger::default()),
            Err(ParseError::BadSpans { .. })
        ));
        let mut overlapping = good.clone();
        overlapping.span2 = [good.span1[0] + 2, good.span1[1] + 2];
        assert!(matches!(
            parse_instance(&overlapping, &HeuristicTagger::default()),
            Err(ParseError::BadSpans { .. })
        ));
        let mut bad_answer = good;
        bad_answer.answer = 3;
        assert!(matches!(
            parse_instance(&bad_answer, &HeuristicTagger::default()),
            Err(ParseError::BadSpans { .. })
        ));
    }

    #[test]
    fn unusual_order_is_flagged_not_rejected() {
        // Pronoun before the candidates: not WSC convention, still parsed.
        let raw = instance(
            "Because he was stubborn, the man ignored the doctor.",
            "the man",
            "the doctor",
            "he",
            1,
        );
        let sk = parse(&raw);
        assert!(sk.noncanonical_order);
    }

    #[test]
    fn raw_instances_round_trip_through_json() {
        let raw = instance(
            "The man couldn't lift his son because he was so heavy.",
            "The man",
            "his son",
            "he",
            1,
        );
        let line = serde_json::to_string(&raw).unwrap();
        assert_eq!(serde_json::from_str::<RawInstance>(&line).unwrap(), raw);
        // Wire field names are part of the contract.
        for key in [
            "\"id\"",
            "\"sentence\"",
            "\"span1\"",
            "\"span2\"",
            "\"pronoun\"",
            "\"answer\"",
        ] {
            assert!(line.contains(key), "{key} missing from {line}");
        }
    }
}
