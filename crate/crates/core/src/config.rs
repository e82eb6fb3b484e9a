//! Observer thresholds, weights and limits.
//!
//! Defaults other than the regeneration cap and the hard sentiment floor are
//! starting points to be tuned per deployment. Any of them can be overridden from
//! a TOML file or a JSON override object.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::textproc::resources::builtin_assistance_keywords;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObserverConfig {
    pub max_regenerations: u32,
    pub force_probability: f64,
    pub token_target: u32,
    pub token_implicit_limit: u32,
    pub token_hard_limit: u32,
    pub sentiment_holistic_weight: f64,
    pub sentiment_hard_floor: f64,
    pub sentiment_implicit_floor: f64,
    pub entity_cap: u32,
    pub descriptor_cap: u32,
    pub specificity_entity_weight: f64,
    pub specificity_implicit_ceiling: f64,
    pub specificity_hard_ceiling: f64,
    pub coherence_min_centroid_similarity: f64,
    pub coherence_max_info_gain: f64,
    pub assistance_keywords: Vec<String>,
    pub assistance_cosine_threshold: f64,
    pub rng_seed: u64,
}

impl Default for ObserverConfig {
    fn default() -> Self {
        Self {
            max_regenerations: 3,
            force_probability: 0.35,
            token_target: 60,
            token_implicit_limit: 80,
            token_hard_limit: 120,
            sentiment_holistic_weight: 0.6,
            sentiment_hard_floor: -0.75,
            sentiment_implicit_floor: -0.5,
            entity_cap: 5,
            descriptor_cap: 8,
            specificity_entity_weight: 0.5,
            specificity_implicit_ceiling: 0.6,
            specificity_hard_ceiling: 0.85,
            coherence_min_centroid_similarity: 0.2,
            coherence_max_info_gain: 1.0,
            assistance_keywords: builtin_assistance_keywords(),
            assistance_cosine_threshold: 0.75,
            rng_seed: 0,
        }
    }
}

/// One failed invariant. `fields` lists every config key involved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub fields: Vec<&'static str>,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.fields.join(", "), self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<FieldError>),
}

impl ConfigError {
    pub fn field_errors(&self) -> &[FieldError] {
        match self {
            ConfigError::Invalid(errs) => errs,
            _ => &[],
        }
    }
}

impl ObserverConfig {
    /// Parses a TOML document; omitted keys take their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: ObserverConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to toml")
    }

    /// Returns a copy with the keys of `overrides` replaced, validated as a whole.
    pub fn with_overrides(&self, overrides: &Map<String, Value>) -> Result<Self, ConfigError> {
        let mut base = match serde_json::to_value(self).expect("config serializes to json") {
            Value::Object(map) => map,
            _ => unreachable!("config is a struct"),
        };
        for (key, value) in overrides {
            if !base.contains_key(key) {
                return Err(ConfigError::Parse(format!("unknown field `{key}`")));
            }
            base.insert(key.clone(), value.clone());
        }
        let cfg: ObserverConfig = serde_json::from_value(Value::Object(base))
            .map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        let mut fail = |fields: &[&'static str], message: String| {
            errs.push(FieldError {
                fields: fields.to_vec(),
                message,
            })
        };

        let reals: [(&'static str, f64); 10] = [
            ("force_probability", self.force_probability),
            ("sentiment_holistic_weight", self.sentiment_holistic_weight),
            ("sentiment_hard_floor", self.sentiment_hard_floor),
            ("sentiment_implicit_floor", self.sentiment_implicit_floor),
            ("specificity_entity_weight", self.specificity_entity_weight),
            ("specificity_implicit_ceiling", self.specificity_implicit_ceiling),
            ("specificity_hard_ceiling", self.specificity_hard_ceiling),
            (
                "coherence_min_centroid_similarity",
                self.coherence_min_centroid_similarity,
            ),
            ("coherence_max_info_gain", self.coherence_max_info_gain),
            ("assistance_cosine_threshold", self.assistance_cosine_threshold),
        ];
        for (name, value) in reals {
            if !value.is_finite() {
                fail(&[name], format!("must be finite, got {value}"));
            }
        }

        for (name, value) in [
            ("force_probability", self.force_probability),
            ("sentiment_holistic_weight", self.sentiment_holistic_weight),
            ("specificity_entity_weight", self.specificity_entity_weight),
        ] {
            if !(0.0..=1.0).contains(&value) {
                fail(&[name], format!("must lie in [0, 1], got {value}"));
            }
        }

        if !(self.sentiment_hard_floor < self.sentiment_implicit_floor) {
            fail(
                &["sentiment_hard_floor", "sentiment_implicit_floor"],
                format!(
                    "hard floor ({}) must be below implicit floor ({})",
                    self.sentiment_hard_floor, self.sentiment_implicit_floor
                ),
            );
        }
        if self.sentiment_implicit_floor > 0.0 {
            fail(
                &["sentiment_implicit_floor"],
                format!("must be <= 0, got {}", self.sentiment_implicit_floor),
            );
        }

        if self.token_target > self.token_implicit_limit {
            fail(
                &["token_target", "token_implicit_limit"],
                format!(
                    "token_target ({}) exceeds token_implicit_limit ({})",
                    self.token_target, self.token_implicit_limit
                ),
            );
        }
        if self.token_implicit_limit > self.token_hard_limit {
            fail(
                &["token_implicit_limit", "token_hard_limit"],
                format!(
                    "token_implicit_limit ({}) exceeds token_hard_limit ({})",
                    self.token_implicit_limit, self.token_hard_limit
                ),
            );
        }

        if self.entity_cap == 0 {
            fail(&["entity_cap"], "must be at least 1".into());
        }
        if self.descriptor_cap == 0 {
            fail(&["descriptor_cap"], "must be at least 1".into());
        }
        if self.specificity_implicit_ceiling > self.specificity_hard_ceiling {
            fail(
                &["specificity_implicit_ceiling", "specificity_hard_ceiling"],
                "implicit ceiling must not exceed hard ceiling".into(),
            );
        }
        if !(-1.0..=1.0).contains(&self.coherence_min_centroid_similarity) {
            fail(
                &["coherence_min_centroid_similarity"],
                "must lie in [-1, 1]".into(),
            );
        }
        if !(-1.0..=1.0).contains(&self.assistance_cosine_threshold) {
            fail(&["assistance_cosine_threshold"], "must lie in [-1, 1]".into());
        }
        if self.assistance_keywords.iter().all(|k| k.trim().is_empty()) {
            fail(&["assistance_keywords"], "must contain at least one keyword".into());
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ObserverConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ObserverConfig::from_toml_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_yields_defaults() {
        let cfg = ObserverConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ObserverConfig::default());
        assert_eq!(cfg.max_regenerations, 3);
        assert_eq!(cfg.sentiment_hard_floor, -0.75);
    }

    #[test]
    fn defaults_are_valid() {
        ObserverConfig::default().validate().unwrap();
    }

    #[test]
    fn single_override_keeps_other_defaults() {
        let cfg = ObserverConfig::from_toml_str("token_target = 40\n").unwrap();
        assert_eq!(cfg.token_target, 40);
        assert_eq!(
            cfg,
            ObserverConfig {
                token_target: 40,
                ..ObserverConfig::default()
            }
        );
    }

    #[test]
    fn inverted_sentiment_floors_name_both_fields() {
        let err = ObserverConfig::from_toml_str(
            "sentiment_hard_floor = -0.3\nsentiment_implicit_floor = -0.5\n",
        )
        .unwrap_err();
        let fields: Vec<_> = err
            .field_errors()
            .iter()
            .flat_map(|e| e.fields.clone())
            .collect();
        assert!(fields.contains(&"sentiment_hard_floor"));
        assert!(fields.contains(&"sentiment_implicit_floor"));
        let msg = err.to_string();
        assert!(msg.contains("sentiment_hard_floor") && msg.contains("sentiment_implicit_floor"));
    }

    #[test]
    fn malformed_and_unknown_keys_are_parse_errors() {
        assert!(matches!(
            ObserverConfig::from_toml_str("token_target = = 3"),
            Err(ConfigError::Parse(_))
        ));
        assert!(matches!(
            ObserverConfig::from_toml_str("no_such_key = 1"),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn token_limits_must_be_ordered() {
        let err = ObserverConfig::from_toml_str("token_implicit_limit = 200").unwrap_err();
        assert!(err.to_string().contains("token_hard_limit"));
    }

    #[test]
    fn probabilities_are_range_checked() {
        let err = ObserverConfig::from_toml_str("force_probability = 1.5").unwrap_err();
        assert_eq!(err.field_errors()[0].fields, vec!["force_probability"]);
    }

    #[test]
    fn json_overrides_merge_and_validate() {
        let base = ObserverConfig::default();
        let mut o = Map::new();
        o.insert("max_regenerations".into(), Value::from(5));
        assert_eq!(base.with_overrides(&o).unwrap().max_regenerations, 5);

        let mut bad = Map::new();
        bad.insert("sentiment_hard_floor".into(), Value::from(-0.3));
        assert!(matches!(
            base.with_overrides(&bad),
            Err(ConfigError::Invalid(_))
        ));

        let mut unknown = Map::new();
        unknown.insert("bogus".into(), Value::from(1));
        assert!(matches!(
            base.with_overrides(&unknown),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ObserverConfig {
            token_target: 33,
            rng_seed: 99,
            ..Default::default()
        };
        assert_eq!(ObserverConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn load_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("observer.toml");
        std::fs::write(&path, "").unwrap();
        assert_eq!(load_config(&path).unwrap(), ObserverConfig::default());
        assert!(matches!(
            load_config(dir.path().join("missing.toml")),
            Err(ConfigError::Io { .. })
        ));
    }
}
