use super::{ByteSpan, Token};

/// Splits on whitespace, then strips punctuation from both ends of each
/// piece. Internal apostrophes and hyphens survive, so contractions and
/// hyphenated compounds stay single tokens. Pieces that are all punctuation
/// vanish.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chunk_start: Option<usize> = None;

    let flush = |start: usize, end: usize, tokens: &mut Vec<Token>| {
        if let Some(token) = trim_to_token(text, start, end) {
            tokens.push(token);
        }
    };

    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if let Some(start) = chunk_start.take() {
                flush(start, i, &mut tokens);
            }
        } else if chunk_start.is_none() {
            chunk_start = Some(i);
        }
    }
    if let Some(start) = chunk_start {
        flush(start, text.len(), &mut tokens);
    }
    tokens
}

/// Strips leading and trailing non-alphanumeric characters from
/// `text[start..end]` and builds a token, or `None` if nothing is left.
fn trim_to_token(text: &str, start: usize, end: usize) -> Option<Token> {
    let piece = &text[start..end];

    let from = piece
        .char_indices()
        .find(|(_, c)| c.is_alphanumeric())
        .map(|(i, _)| i)?;
    let to = piece
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_alphanumeric())
        .map(|(i, c)| i + c.len_utf8())
        .expect("a leading alphanumeric char implies a trailing one");

    let surface = &piece[from..to];
    Some(Token {
        surface: surface.to_string(),
        norm: normalize(surface),
        span: ByteSpan::new(start + from, start + to),
        tag: None,
    })
}

/// Lowercases and straightens curly single quotes so that `couldn’t` in one
/// corpus matches `couldn't` in another.
pub(crate) fn normalize(surface: &str) -> String {
    surface
        .to_lowercase()
        .chars()
        .map(|c| {
            if c == '\u{2018}' || c == '\u{2019}' {
                '\''
            } else {
                c
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norms(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.norm).collect()
    }

    #[test]
    fn strips_surrounding_punctuation() {
        assert_eq!(norms("Hello, world!"), ["hello", "world"]);
        assert_eq!(norms("(really?)"), ["really"]);
        assert_eq!(norms("\"quoted.\""), ["quoted"]);
    }

    #[test]
    fn keeps_contractions_and_hyphens_intact() {
        assert_eq!(norms("couldn't lift"), ["couldn't", "lift"]);
        assert_eq!(
            norms("a state-of-the-art method"),
            ["a", "state-of-the-art", "method"]
        );
        // Trailing possessive apostrophe is punctuation at the edge.
        assert_eq!(norms("the dogs' bowl"), ["the", "dogs", "bowl"]);
    }

    #[test]
    fn curly_apostrophes_normalize_to_straight() {
        assert_eq!(norms("couldn\u{2019}t"), ["couldn't"]);
        assert_eq!(tokenize("couldn\u{2019}t")[0].surface, "couldn\u{2019}t");
    }

    #[test]
    fn spans_slice_back_to_surfaces() {
        let text = "  He said: \"no, thanks.\"  ";
        for token in tokenize(text) {
            assert_eq!(&text[token.span.start..token.span.end], token.surface);
        }
    }

    #[test]
    fn all_punctuation_pieces_vanish() {
        assert_eq!(norms("-- ... !?!"), Vec::<String>::new());
        assert_eq!(norms(""), Vec::<String>::new());
        assert_eq!(norms("   "), Vec::<String>::new());
    }

    #[test]
    fn numbers_are_tokens() {
        assert_eq!(norms("1 man stopped"), ["1", "man", "stopped"]);
        assert_eq!(norms("a $5 bill"), ["a", "5", "bill"]);
    }
}
