//! Cell-free versus cellular massive MIMO: per-UE downlink and uplink rates
//! for a list of systems run on matched drops.

use serde::{Deserialize, Serialize};
use serde_json::json;
use tbench_core::cellfree::{run_campaign, Association, CellFreeConfig, DlPowerRule, UlPowerRule};
use tbench_core::stats::RATE_LEVELS;

use super::{usize_of, StudyOutput};
use crate::error::CliError;
use crate::output::{num, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Shared settings; each system overrides association and power rules.
    pub base: CellFreeConfig,
    pub systems: Vec<SystemSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub label: String,
    pub association: Association,
    #[serde(default)]
    pub dl_power: Option<DlPowerRule>,
    #[serde(default)]
    pub ul_power: Option<UlPowerRule>,
    /// Per-node downlink budget. Defaults to the base value, or for the
    /// cellular system to the base total spread over its sites.
    #[serde(default)]
    pub p_max_dl_w: Option<f64>,
}

impl SystemSpec {
    fn new(label: &str, association: Association) -> Self {
        Self {
            label: label.into(),
            association,
            dl_power: None,
            ul_power: None,
            p_max_dl_w: None,
        }
    }

    pub fn resolve(&self, base: &CellFreeConfig) -> CellFreeConfig {
        let mut cfg = CellFreeConfig {
            association: self.association,
            ..base.clone()
        };
        if let Some(r) = self.dl_power {
            cfg.dl_power = r;
        }
        if let Some(r) = self.ul_power {
            cfg.ul_power = r;
        }
        cfg.p_max_ap_dl_w = match (self.p_max_dl_w, self.association) {
            (Some(p), _) => p,
            (None, Association::Mmimo { n_sites, .. }) => base.n_aps as f64 * base.p_max_ap_dl_w / n_sites as f64,
            (None, _) => base.p_max_ap_dl_w,
        };
        cfg
    }
}

impl Default for Params {
    fn default() -> Self {
        Self {
            base: CellFreeConfig::default(),
            systems: vec![
                SystemSpec::new(
                    "mmimo",
                    Association::Mmimo {
                        n_sites: 4,
                        antennas_per_site: 100,
                    },
                ),
                SystemSpec::new("fcf", Association::Fcf),
                SystemSpec::new("uc10", Association::Uc { n_uc: 10 }),
            ],
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.systems.is_empty() {
            return Err(CliError::Config("cellfree: systems must be nonempty".into()));
        }
        let mut labels: Vec<&str> = self.systems.iter().map(|s| s.label.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != self.systems.len() {
            return Err(CliError::Config("cellfree: system labels must be unique".into()));
        }
        for s in &self.systems {
            if s.p_max_dl_w.is_some_and(|p| !(p >= 0.0)) {
                return Err(CliError::Config(format!("cellfree: {}: p_max_dl_w must be non-negative", s.label)));
            }
            s.resolve(&self.base).validate()?;
        }
        Ok(())
    }

    pub fn run(&self, seed: u64, n_drops: u64) -> Result<StudyOutput, CliError> {
        let n_drops = usize_of(n_drops, "n_drops")?;
        let mut data = Table::new("data.csv", &["system", "drop", "ue", "direction", "rate_bps"]);
        let mut systems = Vec::new();
        for spec in &self.systems {
            let cfg = spec.resolve(&self.base);
            let res = run_campaign(&cfg, n_drops, seed)?;
            for (direction, pick) in [("dl", 0usize), ("ul", 1)] {
                for (d, drop) in res.rates.iter().enumerate() {
                    for (k, r) in drop.iter().enumerate() {
                        let rate = if pick == 0 { r.0 } else { r.1 };
                        data.push(vec![spec.label.clone(), d.to_string(), k.to_string(), direction.into(), num(rate)]);
                    }
                }
            }
            let pct = |stats: &tbench_core::stats::RateStats| -> serde_json::Value {
                stats
                    .percentiles
                    .iter()
                    .map(|(l, v)| (format!("p{l}"), json!(v)))
                    .collect::<serde_json::Map<_, _>>()
                    .into()
            };
            systems.push(json!({
                "label": spec.label,
                "config": cfg,
                "dl_percentiles_bps": pct(&res.dl),
                "ul_percentiles_bps": pct(&res.ul),
                "dl_mean_bps": mean(&res.dl.samples),
                "ul_mean_bps": mean(&res.ul.samples),
            }));
        }
        Ok(StudyOutput {
            tables: vec![data],
            results: json!({
                "percentile_levels": RATE_LEVELS,
                "systems": systems,
            }),
            assumptions: json!({
                "beta_model": self.base.beta_model.identifier(),
                "dl_power": "eta_{k,m} is the transmitted power; per-AP budget sum_k eta_{k,m} <= P",
                "gamma_noise": self.base.gamma_noise,
                "percentiles": "linear interpolation between order statistics",
                "drops": "drop d draws from stream (seed, d) in every system",
            }),
        })
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}
