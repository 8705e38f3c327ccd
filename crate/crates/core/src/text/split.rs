use super::{ByteSpan, Sentence};
use crate::lexicon::ABBREVIATION_SET;

const OPENING_QUOTES: &[char] = &['"', '\'', '\u{201C}', '\u{2018}'];

/// Byte spans of the sentences in `text`, trimmed of surrounding whitespace.
///
/// A sentence boundary is a run of `.`, `?`, or `!` followed by whitespace
/// and then an uppercase letter or an opening quote. A period does not end a
/// sentence when the word carrying it is a known abbreviation ("Dr.",
/// "e.g."). Everything else — newlines included — stays inside the current
/// sentence, so unpunctuated text comes back as a single span.
pub fn split_sentence_spans(text: &str) -> Vec<ByteSpan> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;

    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, ch) = chars[i];
        if start.is_none() {
            if !ch.is_whitespace() {
                start = Some(pos);
            }
            i += 1;
            continue;
        }

        if is_terminal(ch) {
            // Swallow the whole punctuation run ("?!", "...").
            let first_punct = i;
            let mut j = i;
            while j + 1 < chars.len() && is_terminal(chars[j + 1].1) {
                j += 1;
            }
            let run_end = chars[j].0 + chars[j].1.len_utf8();

            if boundary_follows(&chars, j) && !guarded_abbreviation(text, &chars, first_punct) {
                spans.push(ByteSpan::new(start.take().unwrap(), run_end));
            }
            i = j + 1;
            continue;
        }
        i += 1;
    }

    if let Some(s) = start {
        let end = text.len() - trailing_whitespace_bytes(text);
        if end > s {
            spans.push(ByteSpan::new(s, end));
        }
    }
    spans
}

/// Splits `text` into tokenized sentences with ordinal ids (`s0`, `s1`, ...).
/// Callers that need locator-style ids build sentences from
/// [`split_sentence_spans`] instead.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    split_sentence_spans(text)
        .into_iter()
        .enumerate()
        .map(|(k, span)| Sentence::new(format!("s{k}"), &text[span.start..span.end]))
        .collect()
}

fn is_terminal(ch: char) -> bool {
    matches!(ch, '.' | '?' | '!')
}

/// True when the punctuation run ending at `chars[run_last]` is followed by
/// whitespace and then an uppercase letter or opening quote.
fn boundary_follows(chars: &[(usize, char)], run_last: usize) -> bool {
    let mut k = run_last + 1;
    if k >= chars.len() || !chars[k].1.is_whitespace() {
        return false;
    }
    while k < chars.len() && chars[k].1.is_whitespace() {
        k += 1;
    }
    match chars.get(k) {
        Some(&(_, next)) => next.is_uppercase() || OPENING_QUOTES.contains(&next),
        None => false,
    }
}

/// True when the word ending at the punctuation char `chars[punct]` is a
/// known abbreviation. The word is the maximal non-whitespace run up to and
/// including that char, lowercased ("Dr." -> "dr.", "U.S." -> "u.s.").
fn guarded_abbreviation(text: &str, chars: &[(usize, char)], punct: usize) -> bool {
    if chars[punct].1 != '.' {
        return false;
    }
    let mut w = punct;
    while w > 0 && !chars[w - 1].1.is_whitespace() {
        w -= 1;
    }
    let word_start = chars[w].0;
    let word_end = chars[punct].0 + chars[punct].1.len_utf8();
    let word = text[word_start..word_end].to_lowercase();
    ABBREVIATION_SET.contains(word.as_str())
}

fn trailing_whitespace_bytes(text: &str) -> usize {
    text.len() - text.trim_end().len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raws(text: &str) -> Vec<String> {
        split_sentences(text).into_iter().map(|s| s.raw).collect()
    }

    #[test]
    fn splits_on_terminal_punctuation_before_uppercase() {
        assert_eq!(
            raws("The box was heavy. He gave up. Nobody helped!"),
            ["The box was heavy.", "He gave up.", "Nobody helped!"]
        );
    }

    #[test]
    fn keeps_abbreviations_inside_one_sentence() {
        assert_eq!(
            raws("Dr. Smith arrived late. The talk had started."),
            ["Dr. Smith arrived late.", "The talk had started."]
        );
        assert_eq!(
            raws("Use flour, sugar, etc. Mix well."),
            ["Use flour, sugar, etc. Mix well."]
        );
    }

    #[test]
    fn requires_whitespace_and_capital_after_the_stop() {
        // No whitespace after the period: stays glued.
        assert_eq!(raws("version 2.5 shipped"), ["version 2.5 shipped"]);
        // Lowercase continuation: not a boundary.
        assert_eq!(
            raws("it broke. again and again"),
            ["it broke. again and again"]
        );
    }

    #[test]
    fn punctuation_runs_and_quotes() {
        assert_eq!(raws("What?! Nobody knew."), ["What?!", "Nobody knew."]);
        assert_eq!(
            raws("He stopped. \"Leave now,\" she said."),
            ["He stopped.", "\"Leave now,\" she said."]
        );
    }

    #[test]
    fn empty_and_whitespace_input_yield_nothing() {
        assert!(raws("").is_empty());
        assert!(raws(" \n\t ").is_empty());
    }

    #[test]
    fn unpunctuated_text_is_one_sentence() {
        assert_eq!(
            raws("a comment with no stop\nand a second line"),
            ["a comment with no stop\nand a second line"]
        );
    }

    #[test]
    fn spans_reassemble_to_the_input_modulo_whitespace() {
        let text = "  One here. Two there!  Three? Yes.  ";
        let mut reassembled = String::new();
        for span in split_sentence_spans(text) {
            reassembled.push_str(&text[span.start..span.end]);
            reassembled.push(' ');
        }
        let squash = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
        assert_eq!(squash(&reassembled), squash(text));
    }
}
