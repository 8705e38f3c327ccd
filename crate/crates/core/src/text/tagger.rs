use super::{Tag, Tagger, Token};
use crate::lexicon::{
    ConnectiveLexicon, AUXILIARY_SET, COMMON_VERB_SET, COPULA_SET, DETERMINER_SET, MODAL_SET,
    PARTICLE_SET, POSSESSIVE_SET, PRONOUN_SET,
};

/// Rule-based coarse tagger: closed-class lookups first, then suffix and
/// context heuristics, with NOUN as the fallback. It is intentionally
/// shallow — good enough to find noun phrases and verb chunks in ordinary
/// prose, and deterministic, which matters more here than squeezing out the
/// last few points of accuracy.
#[derive(Debug, Clone)]
pub struct HeuristicTagger {
    connectives: ConnectiveLexicon,
}

impl Default for HeuristicTagger {
    fn default() -> Self {
        Self {
            connectives: ConnectiveLexicon::default(),
        }
    }
}

impl HeuristicTagger {
    pub fn new(connectives: ConnectiveLexicon) -> Self {
        Self { connectives }
    }

    fn tag_at(&self, tokens: &[Token], tags: &[Tag], i: usize) -> Tag {
        let norm = tokens[i].norm.as_str();
        let prev_tag = i.checked_sub(1).map(|j| tags[j]);
        let prev_norm = i.checked_sub(1).map(|j| tokens[j].norm.as_str());

        // Connectives, with one carve-out: "so"/"as" right after a copula
        // are degree adverbs ("was so heavy"), not clause connectives. After
        // other verbs they still join clauses ("it broke so he left").
        if self.connectives.contains(norm) {
            let after_copula =
                prev_tag == Some(Tag::Verb) && prev_norm.is_some_and(|p| COPULA_SET.contains(p));
            if (norm == "so" || norm == "as") && after_copula {
                return Tag::Other;
            }
            return Tag::Conn;
        }

        // Possessives modify a following nominal; otherwise they stand alone
        // as pronouns ("his son" vs. "the fault was his").
        if POSSESSIVE_SET.contains(norm) {
            let next = tokens.get(i + 1).map(|t| t.norm.as_str());
            return match next {
                Some(n) if !AUXILIARY_SET.contains(n) && !self.connectives.contains(n) => Tag::Det,
                _ => Tag::Pron,
            };
        }

        if DETERMINER_SET.contains(norm) {
            return Tag::Det;
        }
        if PRONOUN_SET.contains(norm) {
            return Tag::Pron;
        }
        if AUXILIARY_SET.contains(norm) {
            return Tag::Verb;
        }
        if PARTICLE_SET.contains(norm) {
            return Tag::Other;
        }
        if COMMON_VERB_SET.contains(norm) {
            return Tag::Verb;
        }

        // An open-class token after a modal is its verb ("couldn't lift").
        if prev_norm.is_some_and(|p| MODAL_SET.contains(p)) {
            return Tag::Verb;
        }

        // Infinitive after a verb: "tried to paint".
        if prev_norm == Some("to") && i >= 2 && tags[i - 2] == Tag::Verb {
            return Tag::Verb;
        }

        if norm.len() >= 4 && norm.ends_with("ed") {
            return Tag::Verb;
        }

        // Present participles are verbal after an auxiliary or particle
        // ("were bullying", "ended up looking") and nominal otherwise
        // ("the meeting").
        if norm.len() >= 5 && norm.ends_with("ing") {
            let verbal =
                prev_tag == Some(Tag::Verb) || prev_norm.is_some_and(|p| PARTICLE_SET.contains(p));
            return if verbal { Tag::Verb } else { Tag::Noun };
        }

        if tokens[i]
            .surface
            .chars()
            .next()
            .is_some_and(char::is_uppercase)
        {
            return Tag::Propn;
        }

        if norm.len() >= 4 && norm.ends_with("ly") {
            return Tag::Other;
        }

        // Predicative complement of a copula, looking through degree words:
        // "was so heavy", "seemed really upset".
        let mut j = i;
        while j > 0 && tags[j - 1] == Tag::Other {
            j -= 1;
        }
        if j > 0 && tags[j - 1] == Tag::Verb && COPULA_SET.contains(tokens[j - 1].norm.as_str()) {
            return Tag::Adj;
        }

        Tag::Noun
    }
}

impl Tagger for HeuristicTagger {
    fn tag_tokens(&self, tokens: &[Token]) -> Vec<Tag> {
        let mut tags = Vec::with_capacity(tokens.len());
        for i in 0..tokens.len() {
            let tag = self.tag_at(tokens, &tags, i);
            tags.push(tag);
        }
        tags
    }
}
