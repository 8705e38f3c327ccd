//! Seeded synthetic corpora and queries. Generation runs on a fixed-stream
//! RNG (ChaCha8), so a given seed produces the same corpus on every
//! platform; oracle suites and benchmarks rely on that.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::schema::OverlapQuery;
use crate::text::Sentence;

/// The i-th vocabulary word.
pub fn vocab_word(i: usize) -> String {
    format!("w{i}")
}

/// `count` sentences of uniformly random length in `min_len..=max_len`,
/// drawing tokens uniformly from a `vocab`-word vocabulary.
pub fn random_sentences(
    seed: u64,
    count: usize,
    vocab: usize,
    min_len: usize,
    max_len: usize,
) -> Vec<Sentence> {
    assert!(vocab > 0, "vocabulary must be nonempty");
    assert!(
        0 < min_len && min_len <= max_len,
        "bad length range {min_len}..={max_len}"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    (0..count)
        .map(|i| {
            let len = rng.random_range(min_len..=max_len);
            text.clear();
            for k in 0..len {
                if k > 0 {
                    text.push(' ');
                }
                text.push_str(&vocab_word(rng.random_range(0..vocab)));
            }
            Sentence::new(format!("syn{i}"), &text)
        })
        .collect()
}

/// Queries whose phrases are lifted from random positions of random corpus
/// sentences, so a healthy share of them actually retrieve something. Phrase
/// lengths are 1–3 tokens; optional terms are sampled from the same
/// sentence.
pub fn queries_from(sentences: &[Sentence], seed: u64, count: usize) -> Vec<OverlapQuery> {
    assert!(
        sentences.iter().any(|s| s.tokens.len() >= 4),
        "need at least one sentence of 4+ tokens to lift phrases from"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..count)
        .map(|i| {
            let (phrase_a, phrase_b, optional_terms) = loop {
                let sentence = &sentences[rng.random_range(0..sentences.len())];
                let norms: Vec<String> = sentence.norms().into_iter().map(String::from).collect();
                if norms.len() < 4 {
                    continue;
                }
                let a_len = rng.random_range(1..=3usize.min(norms.len() / 2));
                let a_start = rng.random_range(0..norms.len() - a_len);
                let rest = a_start + a_len;
                let b_len = rng.random_range(1..=3usize.min(norms.len() - rest));
                let b_start = rng.random_range(rest..=norms.len() - b_len);
                let optional_terms: Vec<String> = (0..rng.random_range(0..4usize))
                    .map(|_| norms[rng.random_range(0..norms.len())].clone())
                    .collect();
                break (
                    norms[a_start..a_start + a_len].to_vec(),
                    norms[b_start..b_start + b_len].to_vec(),
                    optional_terms,
                );
            };
            OverlapQuery {
                instance_id: format!("synq{i:04}"),
                phrase_a,
                phrase_b,
                window: 10,
                optional_terms,
            }
        })
        .collect()
}
