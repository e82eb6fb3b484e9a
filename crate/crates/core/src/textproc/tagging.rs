//! Lexicon and capitalization heuristics standing in for entity chunking and
//! part-of-speech tagging.

use super::resources::TextResources;
use super::sentences::split_sentences;
use super::tokenize::{tokenize, TokenKind, TokenSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TagCounts {
    pub entities: usize,
    pub descriptors: usize,
}

fn is_capitalized(t: &TokenSpan<'_>) -> bool {
    t.is_word() && t.text.chars().next().is_some_and(char::is_uppercase)
}

fn is_first_person(word: &str) -> bool {
    matches!(
        word.replace('\u{2019}', "'").as_str(),
        "I" | "I'm" | "I've" | "I'll" | "I'd"
    )
}

fn count_entities(sentence: &str, res: &TextResources) -> usize {
    let tokens = tokenize(sentence);
    let is_unit = |t: &TokenSpan<'_>| res.units.contains(&t.text.to_lowercase());
    let mut consumed = vec![false; tokens.len()];
    let mut entities = 0;

    for i in 0..tokens.len() {
        if tokens[i].kind != TokenKind::Number {
            continue;
        }
        let before = i.checked_sub(1).map(|p| &tokens[p]);
        if let Some(next) = tokens.get(i + 1).filter(|t| is_unit(t)) {
            entities += 1;
            consumed[i + 1] = true;
            // "75°F": a symbol unit may be followed by a letter unit.
            if next.kind == TokenKind::Punct {
                if let Some(after) = tokens.get(i + 2).filter(|t| t.is_word() && is_unit(t)) {
                    if after.start == next.end {
                        consumed[i + 2] = true;
                    }
                }
            }
        } else if before.is_some_and(|b| b.kind == TokenKind::Punct && is_unit(b)) {
            entities += 1;
        }
    }

    let first_word = tokens.iter().position(TokenSpan::is_word);
    let mut in_run = false;
    for (i, t) in tokens.iter().enumerate() {
        let candidate = is_capitalized(t)
            && !consumed[i]
            && Some(i) != first_word
            && !is_first_person(t.text);
        if candidate && !in_run {
            entities += 1;
        }
        in_run = candidate;
    }
    entities
}

fn is_descriptor(word: &str, res: &TextResources) -> bool {
    let w = word.to_lowercase();
    res.descriptors.contains(&w)
        || (w.ends_with("ly") && w.chars().count() >= 4 && !res.descriptor_stoplist.contains(&w))
}

/// Counts named-entity-like spans and descriptive words.
///
/// Entities are maximal runs of capitalized words that do not begin the sentence
/// (the pronoun "I" excluded), plus numbers carrying a unit such as `°`, `%` or `km`.
/// Descriptors are words in the descriptor list, or `-ly` words of four or more
/// letters outside the stop list.
pub fn tag_descriptors_entities(text: &str, res: &TextResources) -> TagCounts {
    let entities = split_sentences(text)
        .into_iter()
        .map(|s| count_entities(s, res))
        .sum();
    let descriptors = tokenize(text)
        .iter()
        .filter(|t| t.is_word() && is_descriptor(t.text, res))
        .count();
    TagCounts {
        entities,
        descriptors,
    }
}
