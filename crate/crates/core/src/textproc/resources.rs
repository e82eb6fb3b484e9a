//! Shipped word lists and their `term<TAB>value` file format.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use thiserror::Error;

use super::sentiment::SentimentLexicon;

pub const SENTIMENT_LEXICON: &str = include_str!("../../data/sentiment_lexicon.tsv");
pub const BOOSTERS: &str = include_str!("../../data/boosters.tsv");
pub const NEGATORS: &str = include_str!("../../data/negators.tsv");
pub const DESCRIPTORS: &str = include_str!("../../data/descriptors.tsv");
pub const DESCRIPTOR_STOPLIST: &str = include_str!("../../data/descriptor_stoplist.tsv");
pub const UNITS: &str = include_str!("../../data/units.tsv");
pub const ASSISTANCE_KEYWORDS: &str = include_str!("../../data/assistance_keywords.tsv");

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{file}:{line}: {reason}")]
    Malformed {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("cannot read {file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
}

/// Parses `term<TAB>value` lines. Blank lines and lines starting with `#` are skipped;
/// the value column is optional.
pub fn parse_term_file<'a>(
    file: &str,
    text: &'a str,
) -> Result<Vec<(usize, &'a str, Option<&'a str>)>, DataError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let term = cols.next().unwrap_or("").trim();
        if term.is_empty() {
            return Err(DataError::Malformed {
                file: file.into(),
                line: idx + 1,
                reason: "empty term".into(),
            });
        }
        let value = cols.next().map(str::trim);
        if cols.next().is_some() {
            return Err(DataError::Malformed {
                file: file.into(),
                line: idx + 1,
                reason: "more than two columns".into(),
            });
        }
        out.push((idx + 1, term, value));
    }
    Ok(out)
}

pub fn parse_term_values(file: &str, text: &str) -> Result<HashMap<String, f64>, DataError> {
    let mut map = HashMap::new();
    for (line_no, term, value) in parse_term_file(file, text)? {
        let value = value.ok_or_else(|| DataError::Malformed {
            file: file.into(),
            line: line_no,
            reason: format!("missing value for `{term}`"),
        })?;
        let v: f64 = value.parse().map_err(|_| DataError::Malformed {
            file: file.into(),
            line: line_no,
            reason: format!("`{value}` is not a number"),
        })?;
        map.insert(term.to_lowercase(), v);
    }
    Ok(map)
}

pub fn parse_term_set(file: &str, text: &str) -> Result<HashSet<String>, DataError> {
    Ok(parse_term_file(file, text)?
        .into_iter()
        .map(|(_, t, _)| t.to_lowercase())
        .collect())
}

pub fn builtin_assistance_keywords() -> Vec<String> {
    parse_term_file("assistance_keywords.tsv", ASSISTANCE_KEYWORDS)
        .expect("shipped keyword list parses")
        .into_iter()
        .map(|(_, t, _)| t.to_string())
        .collect()
}

/// Everything the text analyzers look words up in.
#[derive(Debug, Clone)]
pub struct TextResources {
    pub lexicon: SentimentLexicon,
    pub descriptors: HashSet<String>,
    pub descriptor_stoplist: HashSet<String>,
    pub units: HashSet<String>,
}

impl TextResources {
    pub fn builtin() -> Self {
        Self::from_sources(&Sources::builtin()).expect("shipped data files parse")
    }

    /// Loads the word lists from a directory holding files with the shipped names.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, DataError> {
        let dir = dir.as_ref();
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| DataError::Io {
                file: path.display().to_string(),
                source,
            })
        };
        let owned = [
            read("sentiment_lexicon.tsv")?,
            read("boosters.tsv")?,
            read("negators.tsv")?,
            read("descriptors.tsv")?,
            read("descriptor_stoplist.tsv")?,
            read("units.tsv")?,
        ];
        Self::from_sources(&Sources {
            lexicon: &owned[0],
            boosters: &owned[1],
            negators: &owned[2],
            descriptors: &owned[3],
            stoplist: &owned[4],
            units: &owned[5],
        })
    }

    fn from_sources(src: &Sources<'_>) -> Result<Self, DataError> {
        let entries = parse_term_values("sentiment_lexicon.tsv", src.lexicon)?;
        let lexicon = SentimentLexicon::new(entries)
            .map_err(|reason| DataError::Malformed {
                file: "sentiment_lexicon.tsv".into(),
                line: 0,
                reason,
            })?
            .with_boosters(parse_term_values("boosters.tsv", src.boosters)?)
            .with_negators(parse_term_set("negators.tsv", src.negators)?);
        Ok(Self {
            lexicon,
            descriptors: parse_term_set("descriptors.tsv", src.descriptors)?,
            descriptor_stoplist: parse_term_set("descriptor_stoplist.tsv", src.stoplist)?,
            units: parse_term_set("units.tsv", src.units)?,
        })
    }
}

impl Default for TextResources {
    fn default() -> Self {
        Self::builtin()
    }
}

struct Sources<'a> {
    lexicon: &'a str,
    boosters: &'a str,
    negators: &'a str,
    descriptors: &'a str,
    stoplist: &'a str,
    units: &'a str,
}

impl Sources<'static> {
    fn builtin() -> Self {
        Sources {
            lexicon: SENTIMENT_LEXICON,
            boosters: BOOSTERS,
            negators: NEGATORS,
            descriptors: DESCRIPTORS,
            stoplist: DESCRIPTOR_STOPLIST,
            units: UNITS,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_files_parse() {
        let res = TextResources::builtin();
        assert!(res.lexicon.valence("GOOD").unwrap() > 0.0);
        assert!(res.descriptors.contains("nice"));
        assert!(res.units.contains("°"));
        assert_eq!(builtin_assistance_keywords().len(), 8);
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let rows = parse_term_file("t", "# header\n\nhello\t1\nbare\n").unwrap();
        assert_eq!(rows, vec![(3, "hello", Some("1")), (4, "bare", None)]);
    }

    #[test]
    fn malformed_lines_report_position() {
        let err = parse_term_values("lex.tsv", "good\t2\nbad\tx\n").unwrap_err();
        assert!(err.to_string().starts_with("lex.tsv:2:"), "{err}");
        assert!(parse_term_file("t", "a\tb\tc").is_err());
    }

    #[test]
    fn out_of_range_valence_rejected() {
        let entries = parse_term_values("lex.tsv", "huge\t9\n").unwrap();
        assert!(SentimentLexicon::new(entries).is_err());
    }

    #[test]
    fn loads_from_directory() {
        let dir = tempfile::tempdir().unwrap();
        for (name, body) in [
            ("sentiment_lexicon.tsv", "good\t2\n"),
            ("boosters.tsv", "very\t0.3\n"),
            ("negators.tsv", "not\n"),
            ("descriptors.tsv", "nice\tadj\n"),
            ("descriptor_stoplist.tsv", "only\n"),
            ("units.tsv", "km\n"),
        ] {
            std::fs::write(dir.path().join(name), body).unwrap();
        }
        let res = TextResources::from_dir(dir.path()).unwrap();
        assert_eq!(res.lexicon.valence("good"), Some(2.0));
        assert!(res.lexicon.is_negator("not"));
        assert!(TextResources::from_dir(dir.path().join("nope")).is_err());
    }
}
