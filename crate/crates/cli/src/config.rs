//! Campaign configuration: a JSON file with a study tag, a seed, an optional
//! drop count and output directory, and a study-specific `params` block.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;
use crate::studies::{budget, cc, cellfree, iab, irs, pqam, thz};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Study {
    Irs,
    Cellfree,
    Iab,
    Pqam,
    Thz,
    Cc,
    Budget,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::Irs => "irs",
            Study::Cellfree => "cellfree",
            Study::Iab => "iab",
            Study::Pqam => "pqam",
            Study::Thz => "thz",
            Study::Cc => "cc",
            Study::Budget => "budget",
        }
    }

    /// Drops per campaign when the file does not say. For `pqam` a drop is
    /// one symbol per grid point, for `thz` one transmit vector per SNR
    /// point; the closed-form studies ignore it.
    pub fn default_drops(self) -> u64 {
        match self {
            Study::Cellfree => 100,
            Study::Iab => 500,
            Study::Pqam | Study::Thz => 100_000,
            Study::Irs | Study::Cc | Study::Budget => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum StudyParams {
    Irs(irs::Params),
    Cellfree(cellfree::Params),
    Iab(iab::Params),
    Pqam(pqam::Params),
    Thz(thz::Params),
    Cc(cc::Params),
    Budget(budget::Params),
}

/// Fully resolved campaign. Serializing it gives a file that loads back to
/// the same value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignConfig {
    pub study: Study,
    pub seed: u64,
    pub n_drops: u64,
    pub output_dir: PathBuf,
    pub params: StudyParams,
    /// Keys filled from defaults rather than read from the file.
    #[serde(skip)]
    pub defaulted: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    study: Study,
    seed: u64,
    #[serde(default)]
    n_drops: Option<u64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    params: Option<Value>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_drops: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

pub const DEFAULT_OUTPUT_DIR: &str = "tbench-out";

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn typed<T: serde::de::DeserializeOwned>(v: Value) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Config(format!("params: {e}")))
}

impl CampaignConfig {
    pub fn from_json(text: &str, overrides: &Overrides) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(config_err)?;
        let given = raw.params.unwrap_or_else(|| Value::Object(Map::new()));
        let given_keys: Vec<String> = match &given {
            Value::Object(m) => m.keys().cloned().collect(),
            _ => return Err(CliError::Config("params: expected an object".into())),
        };
        let params = match raw.study {
            Study::Irs => StudyParams::Irs(typed(given)?),
            Study::Cellfree => StudyParams::Cellfree(typed(given)?),
            Study::Iab => StudyParams::Iab(typed(given)?),
            Study::Pqam => StudyParams::Pqam(typed(given)?),
            Study::Thz => StudyParams::Thz(typed(given)?),
            Study::Cc => StudyParams::Cc(typed(given)?),
            Study::Budget => StudyParams::Budget(typed(given)?),
        };

        let mut defaulted = Vec::new();
        if let Value::Object(full) = serde_json::to_value(&params).map_err(config_err)? {
            defaulted.extend(full.keys().filter(|k| !given_keys.contains(k)).map(|k| format!("params.{k}")));
        }
        if raw.n_drops.is_none() && overrides.n_drops.is_none() {
            defaulted.push("n_drops".into());
        }
        if raw.output_dir.is_none() && overrides.output_dir.is_none() {
            defaulted.push("output_dir".into());
        }

        let cfg = Self {
            study: raw.study,
            seed: overrides.seed.unwrap_or(raw.seed),
            n_drops: overrides.n_drops.or(raw.n_drops).unwrap_or(raw.study.default_drops()),
            output_dir: overrides
                .output_dir
                .clone()
                .or(raw.output_dir)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            params,
            defaulted,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, overrides)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_drops == 0 {
            return Err(CliError::Config("n_drops must be at least 1".into()));
        }
        match &self.params {
            StudyParams::Irs(p) => p.validate(),
            StudyParams::Cellfree(p) => p.validate(),
            StudyParams::Iab(p) => p.validate(),
            StudyParams::Pqam(p) => p.validate(),
            StudyParams::Thz(p) => p.validate(),
            StudyParams::Cc(p) => p.validate(),
            StudyParams::Budget(p) => p.validate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_keys() {
        let cfg = CampaignConfig::from_json(r#"{"study":"pqam","seed":3}"#, &Overrides::default()).unwrap();
        assert_eq!(cfg.n_drops, Study::Pqam.default_drops());
        assert_eq!(cfg.output_dir, PathBuf::from(DEFAULT_OUTPUT_DIR));
        assert!(matches!(cfg.params, StudyParams::Pqam(ref p) if *p == pqam::Params::default()));
        for key in ["n_drops", "output_dir", "params.schemes", "params.snr_db"] {
            assert!(cfg.defaulted.iter().any(|d| d == key), "{key}");
        }
    }

    #[test]
    fn overrides_beat_the_file() {
        let text = r#"{"study":"cc","seed":3,"n_drops":4,"output_dir":"a"}"#;
        let o = Overrides {
            seed: Some(9),
            n_drops: Some(5),
            output_dir: Some("b".into()),
        };
        let cfg = CampaignConfig::from_json(text, &o).unwrap();
        assert_eq!((cfg.seed, cfg.n_drops, cfg.output_dir), (9, 5, PathBuf::from("b")));
        let cfg = CampaignConfig::from_json(text, &Overrides::default()).unwrap();
        assert_eq!((cfg.seed, cfg.n_drops, cfg.output_dir), (3, 4, PathBuf::from("a")));
        assert!(cfg.defaulted.iter().all(|d| d.starts_with("params.")));
    }

    #[test]
    fn zero_drops_rejected_even_from_the_command_line() {
        let o = Overrides {
            n_drops: Some(0),
            ..Overrides::default()
        };
        let e = CampaignConfig::from_json(r#"{"study":"cc","seed":3}"#, &o).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn params_must_be_an_object() {
        let e = CampaignConfig::from_json(r#"{"study":"cc","seed":3,"params":[1]}"#, &Overrides::default());
        assert!(matches!(e, Err(CliError::Config(_))));
    }

    #[test]
    fn echo_round_trips_for_every_default_study() {
        for s in ["irs", "cellfree", "iab", "pqam", "thz", "cc", "budget"] {
            let cfg = CampaignConfig::from_json(&format!(r#"{{"study":"{s}","seed":1}}"#), &Overrides::default()).unwrap();
            let echo = cfg.to_value().to_string();
            let back = CampaignConfig::from_json(&echo, &Overrides::default()).unwrap();
            assert_eq!(back.params, cfg.params, "{s}");
            assert!(back.defaulted.is_empty(), "{s}: {:?}", back.defaulted);
        }
    }
}
