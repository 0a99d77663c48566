//! Coded-caching arithmetic table with exact rational cache sizes.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tbench_core::codedcache::{cc_gain, multiantenna_dof, rate_reduction_factor, subpacketization_mn};
use tbench_core::CacheConfig;

use super::StudyOutput;
use crate::error::CliError;
use crate::output::Table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub users: u64,
    /// Files-worth of cache per user, as an integer or a fraction "p/q".
    pub cache_size: String,
    pub n_files: u64,
    pub antennas: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub cases: Vec<Case>,
}

impl Default for Params {
    fn default() -> Self {
        let case = |users, cache_size: &str, n_files, antennas| Case {
            users,
            cache_size: cache_size.into(),
            n_files,
            antennas,
        };
        Self {
            cases: vec![
                case(6, "0", 6, 1),
                case(6, "2", 6, 3),
                case(6, "6", 6, 1),
                case(20, "10", 20, 1),
                case(20, "10", 20, 4),
            ],
        }
    }
}

impl Case {
    pub fn config(&self) -> Result<CacheConfig, CliError> {
        let m: Ratio<u64> = self
            .cache_size
            .trim()
            .parse()
            .map_err(|e| CliError::Config(format!("cc: cache_size `{}`: {e}", self.cache_size)))?;
        Ok(CacheConfig::new(self.users, m, self.n_files, self.antennas)?)
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.cases.is_empty() {
            return Err(CliError::Config("cc: cases must be nonempty".into()));
        }
        self.cases.iter().try_for_each(|c| c.config().map(|_| ()))
    }

    pub fn run(&self) -> Result<StudyOutput, CliError> {
        let mut data = Table::new("data.csv", &["k", "m_over_n", "l", "t", "factor", "dof", "subpacketization"]);
        let mut rows = Vec::new();
        for c in &self.cases {
            let cfg = c.config()?;
            let t = cc_gain(&cfg);
            // only integer t has a placement scheme to count
            let sub = subpacketization_mn(&cfg).ok();
            let m_over_n = cfg.cache_size / Ratio::from_integer(cfg.n_files);
            data.push(vec![
                cfg.users.to_string(),
                m_over_n.to_string(),
                cfg.antennas.to_string(),
                t.to_string(),
                rate_reduction_factor(&cfg).to_string(),
                multiantenna_dof(&cfg).to_string(),
                sub.map(|s| s.to_string()).unwrap_or_default(),
            ]);
            rows.push(json!({
                "k": cfg.users,
                "m_over_n": m_over_n.to_string(),
                "l": cfg.antennas,
                "t": t.to_string(),
                "subpacketization": sub.map(|s| s.to_string()),
            }));
        }
        Ok(StudyOutput {
            tables: vec![data],
            results: json!({ "cases": rows }),
            assumptions: json!({
                "subpacketization": "binomial(K, t) of the single-antenna placement; blank when t is not an integer",
                "dof": "t + L",
            }),
        })
    }
}
