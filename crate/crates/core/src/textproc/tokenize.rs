use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Number,
    Punct,
}

/// A token borrowed from its source text; `start..end` are byte offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenSpan<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
}

impl TokenSpan<'_> {
    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }

    /// Word and number tokens carry content; punctuation does not get embedded.
    pub fn is_content(&self) -> bool {
        self.kind != TokenKind::Punct
    }
}

pub(crate) fn is_word_char(c: char) -> bool {
    (c.is_alphabetic() && !c.is_numeric()) || c == '\'' || c == '\u{2019}'
}

fn is_number_separator(c: char) -> bool {
    c == '.' || c == ','
}

/// Splits `text` into word, number and punctuation tokens.
///
/// Words are maximal runs of letters and apostrophes. Numbers are maximal digit runs,
/// where `.` or `,` may sit between two digits. Any other non-space character is a
/// one-character punctuation token.
pub fn tokenize(text: &str) -> Vec<TokenSpan<'_>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let kind;
        let mut j = i + 1;
        if is_word_char(c) {
            kind = TokenKind::Word;
            while j < chars.len() && is_word_char(chars[j].1) {
                j += 1;
            }
        } else if c.is_numeric() {
            kind = TokenKind::Number;
            loop {
                if j < chars.len() && chars[j].1.is_numeric() {
                    j += 1;
                } else if j + 1 < chars.len()
                    && is_number_separator(chars[j].1)
                    && chars[j + 1].1.is_numeric()
                {
                    j += 2;
                } else {
                    break;
                }
            }
        } else {
            kind = TokenKind::Punct;
        }
        let end = end_of(j);
        out.push(TokenSpan {
            text: &text[start..end],
            start,
            end,
            kind,
        });
        i = j;
    }
    out
}

/// Lowercased word and number tokens, the unit fed to embeddings.
pub fn content_tokens(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(TokenSpan::is_content)
        .map(|t| t.text.to_lowercase())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(text: &str) -> Vec<(&str, TokenKind)> {
        tokenize(text).into_iter().map(|t| (t.text, t.kind)).collect()
    }

    #[test]
    fn greeting() {
        assert_eq!(
            kinds("Hello there!"),
            vec![("Hello", Word), ("there", Word), ("!", Punct)]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").is_empty());
        assert!(tokenize(" \t\n").is_empty());
    }

    #[test]
    fn contraction_number_and_degree_sign() {
        assert_eq!(
            kinds("It's 75°F."),
            vec![
                ("It's", Word),
                ("75", Number),
                ("°", Punct),
                ("F", Word),
                (".", Punct)
            ]
        );
    }

    #[test]
    fn separators_only_inside_numbers() {
        assert_eq!(
            kinds("3.14 1,000 7. ,5"),
            vec![
                ("3.14", Number),
                ("1,000", Number),
                ("7", Number),
                (".", Punct),
                (",", Punct),
                ("5", Number)
            ]
        );
    }

    #[test]
    fn byte_offsets_index_source() {
        let text = "naïve café, ok";
        for t in tokenize(text) {
            assert_eq!(&text[t.start..t.end], t.text);
        }
    }
}
