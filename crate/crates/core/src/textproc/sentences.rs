const TERMINATORS: [char; 3] = ['.', '!', '?'];
const CLOSERS: [char; 6] = ['"', '\'', ')', ']', '\u{201D}', '\u{2019}'];

/// Lowercased, period-terminated forms that never end a sentence.
pub const ABBREVIATIONS: [&str; 16] = [
    "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "jr.", "sr.", "vs.", "etc.", "e.g.", "i.e.",
    "a.m.", "p.m.", "approx.", "no.",
];

fn ends_with_abbreviation(before: &str) -> bool {
    let word = before
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(|c: char| !c.is_alphanumeric());
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

/// Splits text into sentences after `.`, `!` or `?` when the next thing is the end of
/// the text or whitespace followed by an uppercase letter. Sentences are trimmed and
/// never empty.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut out = Vec::new();
    fn push<'a>(out: &mut Vec<&'a str>, s: &'a str) {
        let s = s.trim();
        if !s.is_empty() {
            out.push(s);
        }
    }

    let mut seg_start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i].1;
        if !TERMINATORS.contains(&c) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && TERMINATORS.contains(&chars[j].1) {
            j += 1;
        }
        while j < chars.len() && CLOSERS.contains(&chars[j].1) {
            j += 1;
        }

        let single_period = c == '.' && j == i + 1;
        if single_period && ends_with_abbreviation(&text[seg_start..byte_at(i + 1)]) {
            i = j;
            continue;
        }

        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let boundary = k == chars.len() || (k > j && chars[k].1.is_uppercase());
        if boundary {
            push(&mut out, &text[seg_start..byte_at(j)]);
            seg_start = byte_at(j);
        }
        i = j;
    }
    push(&mut out, &text[seg_start..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_terminator_before_capital() {
        assert_eq!(split_sentences("Nice day. Very warm!"), vec!["Nice day.", "Very warm!"]);
    }

    #[test]
    fn no_terminator_is_one_sentence() {
        assert_eq!(split_sentences("Hello"), vec!["Hello"]);
    }

    #[test]
    fn abbreviations_do_not_split() {
        assert_eq!(
            split_sentences("I met Dr. Smith. He waved."),
            vec!["I met Dr. Smith.", "He waved."]
        );
        assert_eq!(
            split_sentences("Bring fruit, e.g. Apples. Thanks."),
            vec!["Bring fruit, e.g. Apples.", "Thanks."]
        );
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        assert_eq!(split_sentences("good. awful."), vec!["good. awful."]);
    }

    #[test]
    fn runs_of_terminators_and_quotes() {
        assert_eq!(
            split_sentences("Really?! Yes. She said \"Hi.\" Then left"),
            vec!["Really?!", "Yes.", "She said \"Hi.\"", "Then left"]
        );
    }

    #[test]
    fn never_empty() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   ").is_empty());
        assert_eq!(split_sentences("... Ok."), vec!["...", "Ok."]);
        assert!(split_sentences("?! . !").iter().all(|s| !s.is_empty()));
    }
}
