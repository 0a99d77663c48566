//! Capacity budget planner: multiplexing × bandwidth × spectral efficiency.

use serde::{Deserialize, Serialize};
use serde_json::json;
use tbench_core::budget::{terabit_budget, TERABIT};

use super::StudyOutput;
use crate::error::CliError;
use crate::output::{num, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    #[serde(default)]
    pub multiplexing: Option<f64>,
    #[serde(default)]
    pub bandwidth_hz: Option<f64>,
    #[serde(default)]
    pub spectral_efficiency: Option<f64>,
    /// Throughput the missing factor is solved for.
    #[serde(default = "terabit")]
    pub target_bps: f64,
}

fn terabit() -> f64 {
    TERABIT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub cases: Vec<Case>,
}

impl Default for Params {
    fn default() -> Self {
        let case = |m, b, s| Case {
            multiplexing: m,
            bandwidth_hz: b,
            spectral_efficiency: s,
            target_bps: TERABIT,
        };
        Self {
            cases: vec![
                case(Some(1.0), Some(100e9), Some(60.0)),
                case(Some(1.0), Some(100e9), None),
                case(None, Some(1e9), Some(10.0)),
            ],
        }
    }
}

impl Case {
    fn solved(&self) -> &'static str {
        match (self.multiplexing, self.bandwidth_hz, self.spectral_efficiency) {
            (None, _, _) => "multiplexing",
            (_, None, _) => "bandwidth_hz",
            (_, _, None) => "spectral_efficiency",
            _ => "total_bps",
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.cases.is_empty() {
            return Err(CliError::Config("budget: cases must be nonempty".into()));
        }
        for c in &self.cases {
            terabit_budget(c.multiplexing, c.bandwidth_hz, c.spectral_efficiency, c.target_bps)?;
        }
        Ok(())
    }

    pub fn run(&self) -> Result<StudyOutput, CliError> {
        let mut data = Table::new(
            "data.csv",
            &["multiplexing", "bandwidth_hz", "spectral_efficiency", "total_bps", "solved"],
        );
        let mut budgets = Vec::new();
        for c in &self.cases {
            let b = terabit_budget(c.multiplexing, c.bandwidth_hz, c.spectral_efficiency, c.target_bps)?;
            data.push(vec![
                num(b.multiplexing),
                num(b.bandwidth_hz),
                num(b.spectral_efficiency),
                num(b.total_bps),
                c.solved().into(),
            ]);
            budgets.push(json!({ "budget": b, "solved": c.solved() }));
        }
        Ok(StudyOutput {
            tables: vec![data],
            results: json!({ "budgets": budgets }),
            assumptions: json!({ "default_target_bps": TERABIT }),
        })
    }
}
