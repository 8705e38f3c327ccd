//! Corpus-construction funnel: clean raw comment dumps, keep sentences with
//! exactly one connective and exactly two noun phrases before it, perturb
//! the noun phrases into gendered given names, emit annotation tasks, and
//! merge majority labels into final instances.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{
    ConnectiveLexicon, NamePool, FEMALE_PRONOUN_SET, MALE_PRONOUN_SET, THIRD_PERSON_SET,
};
use crate::schema::RawInstance;
use crate::text::{split_sentence_spans, tag, Sentence, Tag, Tagger, TokenSpan};

pub const MIN_SENTENCE_TOKENS: usize = 6;
pub const MAX_SENTENCE_TOKENS: usize = 60;
pub const ANNOTATORS_PER_INSTANCE: usize = 5;
pub const MAJORITY_THRESHOLD: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SkipError {
    #[error("pronoun {0:?} is not gendered")]
    Ungendered(String),
    #[error("no third-person pronoun after the connective")]
    NoPronoun,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("label line {line}: {detail}")]
    BadLabelLine { line: usize, detail: String },
    #[error("instance {id}: {detail}")]
    BadRecord { id: String, detail: String },
    #[error("labels reference unknown instance {id}")]
    UnknownInstance { id: String },
}

/// A sentence that survived both filters: one connective, exactly two noun
/// phrases before it, and a third-person pronoun after it.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSentence {
    /// The tagged sentence (every token carries a tag).
    pub sentence: Sentence,
    pub connective: TokenSpan,
    pub np1: TokenSpan,
    pub np2: TokenSpan,
    pub source_ref: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

/// A candidate whose noun phrases were replaced with two distinct given
/// names agreeing with the pronoun's gender.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedInstance {
    pub original: CandidateSentence,
    pub perturbed_sentence: String,
    pub name1: String,
    pub name2: String,
    pub pronoun_gender: Gender,
    pub instance_id: String,
}

/// Five annotator choices (1 or 2) for one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub instance_id: String,
    pub labels: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    NoStrongMajority,
    Unannotated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutcome {
    /// (instance_id, majority label), in input record order.
    pub kept: Vec<(String, u8)>,
    pub dropped: Vec<(String, DropReason)>,
}

/// Stage counts of one pipeline run. Each stage consumes the previous one,
/// so the counts are non-increasing from `sentences` onward.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FunnelStats {
    pub documents: usize,
    pub undecodable: usize,
    pub sentences: usize,
    pub connective_pass: usize,
    pub antecedent_pass: usize,
    pub ungendered_skipped: usize,
    pub perturbed: usize,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub lexicon: ConnectiveLexicon,
    pub male_names: NamePool,
    pub female_names: NamePool,
    pub seed: u64,
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            lexicon: ConnectiveLexicon::default(),
            male_names: NamePool::bundled_male(),
            female_names: NamePool::bundled_female(),
            seed: 0,
            min_tokens: MIN_SENTENCE_TOKENS,
            max_tokens: MAX_SENTENCE_TOKENS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub instances: Vec<PerturbedInstance>,
    pub stats: FunnelStats,
}

static URL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:https?://|www\.)\S+").expect("static regex"));
// Markdown links keep their anchor text; bare markup characters are noise.
static MD_LINK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\[([^\]]*)\]\([^)]*\)").expect("static regex"));

/// Strip quoting, markup, and URLs from one raw comment body. The rules are
/// deliberately blunt: anything that would confuse sentence splitting or
/// tokenization is removed, the prose is kept.
fn clean_document(raw: &str) -> String {
    let mut kept_lines: Vec<&str> = Vec::new();
    for line in raw.lines() {
        let trimmed = line.trim_start();
        // Quoted replies restate someone else's text; drop the whole line.
        if trimmed.starts_with('>') || trimmed.starts_with("&gt;") {
            continue;
        }
        kept_lines.push(line);
    }
    let joined = kept_lines.join("\n");
    let no_links = MD_LINK.replace_all(&joined, "$1");
    let no_urls = URL.replace_all(&no_links, " ");
    let decoded = no_urls
        .replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'");
    let no_markup: String = decoded
        .chars()
        .map(|c| match c {
            '*' | '`' | '~' | '^' | '#' | '_' | '|' => ' ',
            _ => c,
        })
        .collect();
    // Collapse runs of whitespace so stripped markup leaves no trace.
    no_markup.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Clean one raw document and split it into sentences, dropping sentences
/// outside the `min_tokens..=max_tokens` length gate. Sentence ids are
/// `{source_ref}#{k}` by position.
pub fn clean_and_split(source_ref: &str, raw: &str, config: &PipelineConfig) -> Vec<Sentence> {
    let cleaned = clean_document(raw);
    split_sentence_spans(&cleaned)
        .into_iter()
        .enumerate()
        .map(|(k, span)| Sentence::new(format!("{source_ref}#{k}"), &cleaned[span.start..span.end]))
        .filter(|s| (config.min_tokens..=config.max_tokens).contains(&s.tokens.len()))
        .collect()
}

/// Index of the connective token, present iff the sentence contains exactly
/// one token from the connective lexicon.
pub fn connective_position(sentence: &Sentence, lexicon: &ConnectiveLexicon) -> Option<usize> {
    let mut found = None;
    for (i, token) in sentence.tokens.iter().enumerate() {
        if lexicon.contains(&token.norm) {
            if found.is_some() {
                return None;
            }
            found = Some(i);
        }
    }
    found
}

pub fn connective_filter(sentence: &Sentence, lexicon: &ConnectiveLexicon) -> bool {
    connective_position(sentence, lexicon).is_some()
}

/// Noun-phrase chunks in `tokens[..end]`: optional determiner, any number of
/// adjectives, then a maximal run of common nouns or of proper nouns.
fn np_chunks(tokens: &[crate::text::Token], end: usize) -> Vec<TokenSpan> {
    let mut chunks = Vec::new();
    let mut i = 0;
    while i < end {
        let start = i;
        let mut j = i;
        if tokens[j].tag == Some(Tag::Det) {
            j += 1;
        }
        while j < end && tokens[j].tag == Some(Tag::Adj) {
            j += 1;
        }
        let head = if j < end { tokens[j].tag } else { None };
        match head {
            Some(Tag::Noun) => {
                while j < end && tokens[j].tag == Some(Tag::Noun) {
                    j += 1;
                }
            }
            Some(Tag::Propn) => {
                while j < end && tokens[j].tag == Some(Tag::Propn) {
                    j += 1;
                }
            }
            _ => {
                i += 1;
                continue;
            }
        }
        chunks.push(TokenSpan::new(start, j - 1));
        i = j;
    }
    chunks
}

/// Tag the sentence and keep it iff exactly two noun phrases precede the
/// connective and a third-person pronoun follows it.
pub fn antecedent_filter(
    sentence: &Sentence,
    tagger: &dyn Tagger,
    lexicon: &ConnectiveLexicon,
) -> Option<CandidateSentence> {
    let conn = connective_position(sentence, lexicon)?;
    let mut tagged = sentence.clone();
    tag(&mut tagged.tokens, tagger);
    let chunks = np_chunks(&tagged.tokens, conn);
    let [np1, np2] = chunks.as_slice() else {
        return None;
    };
    let has_pronoun = tagged.tokens[conn + 1..]
        .iter()
        .any(|t| THIRD_PERSON_SET.contains(t.norm.as_str()));
    if !has_pronoun {
        return None;
    }
    let source_ref = tagged.id.clone();
    Some(CandidateSentence {
        np1: *np1,
        np2: *np2,
        connective: TokenSpan::single(conn),
        sentence: tagged,
        source_ref,
    })
}

fn fnv1a(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

impl CandidateSentence {
    fn byte_range(&self, span: TokenSpan) -> (usize, usize) {
        let tokens = &self.sentence.tokens;
        (tokens[span.start].span.start, tokens[span.end].span.end)
    }

    /// First third-person pronoun after the connective.
    fn pronoun_index(&self) -> Option<usize> {
        self.sentence.tokens[self.connective.end + 1..]
            .iter()
            .position(|t| THIRD_PERSON_SET.contains(t.norm.as_str()))
            .map(|offset| self.connective.end + 1 + offset)
    }
}

/// Replace the two noun phrases with distinct given names drawn from the
/// pool matching the pronoun's gender. Drawing is seeded per instance from
/// the source reference, so results do not depend on processing order.
pub fn perturb(
    cand: &CandidateSentence,
    male: &NamePool,
    female: &NamePool,
    seed: u64,
) -> Result<PerturbedInstance, SkipError> {
    let pronoun_index = cand.pronoun_index().ok_or(SkipError::NoPronoun)?;
    let pronoun = &cand.sentence.tokens[pronoun_index].norm;
    let (gender, pool) = if MALE_PRONOUN_SET.contains(pronoun.as_str()) {
        (Gender::Male, male)
    } else if FEMALE_PRONOUN_SET.contains(pronoun.as_str()) {
        (Gender::Female, female)
    } else {
        return Err(SkipError::Ungendered(pronoun.clone()));
    };
    assert!(
        pool.len() >= 2,
        "name pool must offer at least two distinct names"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(&cand.source_ref) ^ seed);
    let first = rng.random_range(0..pool.len());
    let second = loop {
        let i = rng.random_range(0..pool.len());
        if i != first {
            break i;
        }
    };
    let name1 = pool.names()[first].clone();
    let name2 = pool.names()[second].clone();

    let raw = &cand.sentence.raw;
    let (np1_start, np1_end) = cand.byte_range(cand.np1);
    let (np2_start, np2_end) = cand.byte_range(cand.np2);
    let perturbed_sentence = format!(
        "{}{}{}{}{}",
        &raw[..np1_start],
        name1,
        &raw[np1_end..np2_start],
        name2,
        &raw[np2_end..]
    );

    Ok(PerturbedInstance {
        instance_id: cand.source_ref.clone(),
        original: cand.clone(),
        perturbed_sentence,
        name1,
        name2,
        pronoun_gender: gender,
    })
}

impl PerturbedInstance {
    /// Byte spans of the two names and the pronoun inside
    /// `perturbed_sentence`.
    pub fn perturbed_spans(&self) -> ([usize; 2], [usize; 2], [usize; 2]) {
        let cand = &self.original;
        let (np1_start, np1_end) = cand.byte_range(cand.np1);
        let (np2_start, np2_end) = cand.byte_range(cand.np2);
        let shift1 = self.name1.len() as isize - (np1_end - np1_start) as isize;
        let shift2 = self.name2.len() as isize - (np2_end - np2_start) as isize;
        let span1 = [np1_start, np1_start + self.name1.len()];
        let span2_start = (np2_start as isize + shift1) as usize;
        let span2 = [span2_start, span2_start + self.name2.len()];
        let pronoun_index = cand
            .pronoun_index()
            .expect("perturbed instance has a pronoun");
        let p = cand.sentence.tokens[pronoun_index].span;
        let pronoun = [
            (p.start as isize + shift1 + shift2) as usize,
            (p.end as isize + shift1 + shift2) as usize,
        ];
        (span1, span2, pronoun)
    }

    /// Final dataset form, once a gold answer is known.
    pub fn to_raw_instance(&self, answer: u8) -> RawInstance {
        let (span1, span2, pronoun) = self.perturbed_spans();
        RawInstance {
            id: self.instance_id.clone(),
            sentence: self.perturbed_sentence.clone(),
            span1,
            span2,
            pronoun,
            answer,
        }
    }
}

/// Human-readable presentation: candidates in braces, pronoun in brackets.
pub fn decorate(
    sentence: &str,
    span1: [usize; 2],
    span2: [usize; 2],
    pronoun: [usize; 2],
) -> String {
    let mut inserts = [
        (span1[0], '{'),
        (span1[1], '}'),
        (span2[0], '{'),
        (span2[1], '}'),
        (pronoun[0], '['),
        (pronoun[1], ']'),
    ];
    inserts.sort_by_key(|&(offset, _)| offset);
    let mut out = String::with_capacity(sentence.len() + inserts.len());
    let mut from = 0;
    for (offset, mark) in inserts {
        out.push_str(&sentence[from..offset]);
        out.push(mark);
        from = offset;
    }
    out.push_str(&sentence[from..]);
    out
}

/// One tab-separated annotation task line: `instance_id<TAB>decorated text`.
pub fn annotation_task_line(instance: &PerturbedInstance) -> String {
    let (span1, span2, pronoun) = instance.perturbed_spans();
    format!(
        "{}\t{}",
        instance.instance_id,
        decorate(&instance.perturbed_sentence, span1, span2, pronoun)
    )
}

/// Parse completed labels: `instance_id<TAB>annotator_id<TAB>label` lines.
/// Labels are grouped per instance and ordered by annotator id; an annotator
/// may label an instance only once.
pub fn parse_annotation_labels(text: &str) -> Result<Vec<AnnotationRecord>, PipelineError> {
    let mut grouped: BTreeMap<String, Vec<(String, u8)>> = BTreeMap::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        let [id, annotator, label] = fields.as_slice() else {
            return Err(PipelineError::BadLabelLine {
                line,
                detail: "expected instance_id<TAB>annotator_id<TAB>label".to_string(),
            });
        };
        let label: u8 = label
            .trim()
            .parse()
            .map_err(|_| PipelineError::BadLabelLine {
                line,
                detail: format!("label {:?} is not a number", label.trim()),
            })?;
        if label != 1 && label != 2 {
            return Err(PipelineError::BadLabelLine {
                line,
                detail: format!("label must be 1 or 2, got {label}"),
            });
        }
        let votes = grouped.entry(id.trim().to_string()).or_default();
        if votes.iter().any(|(a, _)| a == annotator.trim()) {
            return Err(PipelineError::BadLabelLine {
                line,
                detail: format!(
                    "annotator {} already labeled {}",
                    annotator.trim(),
                    id.trim()
                ),
            });
        }
        votes.push((annotator.trim().to_string(), label));
    }
    Ok(grouped
        .into_iter()
        .map(|(instance_id, mut votes)| {
            votes.sort();
            AnnotationRecord {
                instance_id,
                labels: votes.into_iter().map(|(_, l)| l).collect(),
            }
        })
        .collect())
}

/// Keep instances where at least 4 of the 5 annotators agree; the agreed
/// label becomes gold. Everything else is dropped with a reason.
pub fn merge_annotations(records: &[AnnotationRecord]) -> Result<MergeOutcome, PipelineError> {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut seen: BTreeMap<&str, ()> = BTreeMap::new();
    for record in records {
        if seen.insert(&record.instance_id, ()).is_some() {
            return Err(PipelineError::BadRecord {
                id: record.instance_id.clone(),
                detail: "duplicate annotation record".to_string(),
            });
        }
        if record.labels.len() != ANNOTATORS_PER_INSTANCE {
            return Err(PipelineError::BadRecord {
                id: record.instance_id.clone(),
                detail: format!(
                    "expected {} labels, got {}",
                    ANNOTATORS_PER_INSTANCE,
                    record.labels.len()
                ),
            });
        }
        if let Some(&bad) = record.labels.iter().find(|&&l| l != 1 && l != 2) {
            return Err(PipelineError::BadRecord {
                id: record.instance_id.clone(),
                detail: format!("label must be 1 or 2, got {bad}"),
            });
        }
        let ones = record.labels.iter().filter(|&&l| l == 1).count();
        let twos = record.labels.len() - ones;
        if ones >= MAJORITY_THRESHOLD {
            kept.push((record.instance_id.clone(), 1));
        } else if twos >= MAJORITY_THRESHOLD {
            kept.push((record.instance_id.clone(), 2));
        } else {
            dropped.push((record.instance_id.clone(), DropReason::NoStrongMajority));
        }
    }
    Ok(MergeOutcome { kept, dropped })
}

/// Join merged labels back onto the perturbed instances, producing the final
/// dataset plus the per-instance drop reasons. Labels referencing unknown
/// instances are an input error.
pub fn finalize_dataset(
    instances: &[PerturbedInstance],
    merge: &MergeOutcome,
) -> Result<(Vec<RawInstance>, Vec<(String, DropReason)>), PipelineError> {
    let by_id: BTreeMap<&str, &PerturbedInstance> = instances
        .iter()
        .map(|p| (p.instance_id.as_str(), p))
        .collect();
    let referenced = merge
        .kept
        .iter()
        .map(|(id, _)| id)
        .chain(merge.dropped.iter().map(|(id, _)| id));
    for id in referenced {
        if !by_id.contains_key(id.as_str()) {
            return Err(PipelineError::UnknownInstance { id: id.clone() });
        }
    }
    let labeled: BTreeMap<&str, u8> = merge
        .kept
        .iter()
        .map(|(id, label)| (id.as_str(), *label))
        .collect();
    let majority_dropped: BTreeMap<&str, DropReason> = merge
        .dropped
        .iter()
        .map(|(id, reason)| (id.as_str(), *reason))
        .collect();

    let mut dataset = Vec::new();
    let mut dropped = Vec::new();
    for instance in instances {
        let id = instance.instance_id.as_str();
        if let Some(&answer) = labeled.get(id) {
            dataset.push(instance.to_raw_instance(answer));
        } else if let Some(&reason) = majority_dropped.get(id) {
            dropped.push((id.to_string(), reason));
        } else {
            dropped.push((id.to_string(), DropReason::Unannotated));
        }
    }
    Ok((dataset, dropped))
}

/// Reads a line-delimited JSON comment dump into `(source_ref, body)` pairs.
/// Each record needs a string `body`; a string `id` field becomes the source
/// reference, with the 1-based line number (`line<N>`) as the fallback.
/// Undecodable records (bad JSON, missing or non-string `body`) are counted
/// and skipped, not fatal: web-scale dumps always contain a few.
pub fn read_comment_documents(
    reader: impl std::io::BufRead,
) -> std::io::Result<(Vec<(String, String)>, usize)> {
    let mut documents = Vec::new();
    let mut undecodable = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Option<serde_json::Value> = serde_json::from_str(&line).ok();
        let body = value
            .as_ref()
            .and_then(|v| v.get("body"))
            .and_then(|b| b.as_str());
        let Some(body) = body else {
            undecodable += 1;
            continue;
        };
        let id = value
            .as_ref()
            .and_then(|v| v.get("id"))
            .and_then(|i| i.as_str())
            .map(String::from)
            .unwrap_or_else(|| format!("line{}", lineno + 1));
        documents.push((id, body.to_string()));
    }
    Ok((documents, undecodable))
}

/// Run the construction stages over in-memory documents. Documents are
/// `(source_ref, body)` pairs; outputs follow input order, and perturbation
/// randomness is keyed per instance, never by position.
pub fn run_pipeline(
    documents: impl IntoIterator<Item = (String, String)>,
    tagger: &dyn Tagger,
    config: &PipelineConfig,
) -> PipelineOutput {
    let mut stats = FunnelStats::default();
    let mut instances = Vec::new();
    for (source_ref, body) in documents {
        stats.documents += 1;
        for sentence in clean_and_split(&source_ref, &body, config) {
            stats.sentences += 1;
            if !connective_filter(&sentence, &config.lexicon) {
                continue;
            }
            stats.connective_pass += 1;
            let Some(candidate) = antecedent_filter(&sentence, tagger, &config.lexicon) else {
                continue;
            };
            stats.antecedent_pass += 1;
            match perturb(
                &candidate,
                &config.male_names,
                &config.female_names,
                config.seed,
            ) {
                Ok(instance) => {
                    stats.perturbed += 1;
                    instances.push(instance);
                }
                Err(SkipError::Ungendered(_)) | Err(SkipError::NoPronoun) => {
                    stats.ungendered_skipped += 1;
                }
            }
        }
    }
    PipelineOutput { instances, stats }
}

/// Audit form of a candidate sentence for stage output files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub source_ref: String,
    pub text: String,
    pub connective: String,
    pub np1: String,
    pub np2: String,
}

impl CandidateSentence {
    pub fn to_record(&self) -> CandidateRecord {
        let text_of = |span: TokenSpan| {
            let (start, end) = self.byte_range(span);
            self.sentence.raw[start..end].to_string()
        };
        CandidateRecord {
            source_ref: self.source_ref.clone(),
            text: self.sentence.raw.clone(),
            connective: text_of(self.connective),
            np1: text_of(self.np1),
            np2: text_of(self.np2),
        }
    }
}

/// Audit form of a perturbed instance for stage output files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbedRecord {
    pub instance_id: String,
    pub text: String,
    pub name1: String,
    pub name2: String,
    pub gender: Gender,
}

impl PerturbedInstance {
    pub fn to_record(&self) -> PerturbedRecord {
        PerturbedRecord {
            instance_id: self.instance_id.clone(),
            text: self.perturbed_sentence.clone(),
            name1: self.name1.clone(),
            name2: self.name2.clone(),
            gender: self.pronoun_gender,
        }
    }
}
