//! Study runners. Each turns its parameter block into CSV tables plus a
//! JSON results object and the list of modelling assumptions in force.

pub mod budget;
pub mod cc;
pub mod cellfree;
pub mod iab;
pub mod irs;
pub mod pqam;
pub mod thz;

use serde_json::Value;

use crate::config::{CampaignConfig, StudyParams};
use crate::error::CliError;
use crate::output::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutput {
    /// The first table is written as `data.csv`.
    pub tables: Vec<Table>,
    pub results: Value,
    pub assumptions: Value,
}

pub fn run(cfg: &CampaignConfig) -> Result<StudyOutput, CliError> {
    match &cfg.params {
        StudyParams::Irs(p) => p.run(),
        StudyParams::Cellfree(p) => p.run(cfg.seed, cfg.n_drops),
        StudyParams::Iab(p) => p.run(cfg.seed, cfg.n_drops),
        StudyParams::Pqam(p) => p.run(cfg.seed, cfg.n_drops),
        StudyParams::Thz(p) => p.run(cfg.seed, cfg.n_drops),
        StudyParams::Cc(p) => p.run(),
        StudyParams::Budget(p) => p.run(),
    }
}

pub(crate) fn db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub(crate) fn from_db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

pub(crate) fn usize_of(n: u64, what: &str) -> Result<usize, CliError> {
    usize::try_from(n).map_err(|_| CliError::Config(format!("{what} too large")))
}
