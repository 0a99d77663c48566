//! IAB hetnet coverage: coverage against fiber fraction and rate threshold,
//! the macro-only reference, and the SBS density an IAB network needs to
//! match a fiber-backhauled deployment.

use serde::{Deserialize, Serialize};
use serde_json::json;
use tbench_core::iab::{coverage_probability, coverage_sweep, equivalent_density, CoverageEstimate, HetNetConfig};

use super::{usize_of, StudyOutput};
use crate::error::CliError;
use crate::output::{num, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub network: HetNetConfig,
    pub fiber_fractions: Vec<f64>,
    pub thresholds_bps: Vec<f64>,
    pub mbs_only: bool,
    pub equivalent_density: Option<DensityParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityParams {
    /// Coverage the IAB network (at the network's fiber fraction) must reach.
    pub target_coverage: f64,
    /// SBS density of the all-fiber reference network.
    pub fiber_density: f64,
    pub bracket: [f64; 2],
    pub tol_density: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            network: HetNetConfig::default(),
            fiber_fractions: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            thresholds_bps: vec![50e6, 100e6, 200e6],
            mbs_only: true,
            equivalent_density: Some(DensityParams::default()),
        }
    }
}

impl Default for DensityParams {
    fn default() -> Self {
        Self {
            target_coverage: 0.81,
            fiber_density: 60.0,
            bracket: [60.0, 200.0],
            tol_density: 1.0,
        }
    }
}

const HEADER: [&str; 10] = [
    "network",
    "fiber_fraction",
    "sbs_density",
    "threshold_bps",
    "coverage",
    "ci_low",
    "ci_high",
    "covered",
    "trials",
    "backhaul_weight",
];

fn row(network: &str, e: &CoverageEstimate) -> Vec<String> {
    vec![
        network.into(),
        num(e.fiber_fraction),
        num(e.sbs_density),
        num(e.threshold_bps),
        num(e.coverage),
        num(e.ci_low),
        num(e.ci_high),
        e.covered.to_string(),
        e.trials.to_string(),
        num(e.backhaul_weight),
    ]
}

impl Params {
    pub fn validate(&self) -> Result<(), CliError> {
        self.network.validate()?;
        if self.fiber_fractions.is_empty() || self.fiber_fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(CliError::Config("iab: fiber_fractions must be a nonempty list in [0, 1]".into()));
        }
        if self.thresholds_bps.is_empty() || self.thresholds_bps.iter().any(|t| !(*t >= 0.0)) {
            return Err(CliError::Config("iab: thresholds_bps must be a nonempty non-negative list".into()));
        }
        if let Some(d) = &self.equivalent_density {
            let [lo, hi] = d.bracket;
            if !(0.0..=1.0).contains(&d.target_coverage)
                || !(lo >= 0.0 && hi > lo && hi <= self.network.sbs_density_ceiling)
                || !(d.tol_density > 0.0)
                || !(d.fiber_density >= 0.0 && d.fiber_density <= self.network.sbs_density_ceiling)
            {
                return Err(CliError::Config(
                    "iab: equivalent_density needs target in [0, 1], 0 <= low < high <= sbs_density_ceiling, tol > 0"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    pub fn run(&self, seed: u64, n_drops: u64) -> Result<StudyOutput, CliError> {
        let n = usize_of(n_drops, "n_drops")?;
        let net = &self.network;
        let mut data = Table::new("data.csv", &HEADER);

        let sweep = coverage_sweep(net, &self.fiber_fractions, &self.thresholds_bps, n, seed)?;
        for e in &sweep {
            data.push(row("iab", e));
        }
        let mut results = json!({ "coverage": sweep });

        if self.mbs_only {
            let mbs = coverage_sweep(&net.mbs_only(), &[0.0], &self.thresholds_bps, n, seed)?;
            for e in &mbs {
                data.push(row("mbs_only", e));
            }
            results["mbs_only"] = json!(mbs);
        }

        if let Some(d) = &self.equivalent_density {
            let fiber = HetNetConfig {
                sbs_density: d.fiber_density,
                ..net.fiber_network()
            };
            let reference = coverage_probability(&fiber, n, seed)?;
            data.push(row("fiber_reference", &reference));
            let search = equivalent_density(net, d.target_coverage, (d.bracket[0], d.bracket[1]), d.tol_density, n, seed)?;
            data.push(row("iab_equivalent", &search.estimate));
            results["equivalent_density"] = json!({
                "target_coverage": d.target_coverage,
                "fiber_reference": reference,
                "density_per_km2": search.density,
                "estimate": search.estimate,
                "evaluations": search.evaluations,
            });
        }

        Ok(StudyOutput {
            tables: vec![data],
            results,
            assumptions: json!({
                "region": "non-wrapped square, FHPPP nodes, germ-grain walls",
                "antenna": net.antenna,
                "association": "max average received power with main-lobe gain at both ends, ties to the nearer node",
                "interference": "all other base stations, random boresights, Rayleigh power fading",
                "backhaul": "each IAB SBS hangs off the strongest MBS; access share W/(1+w), backhaul share W*w/(1+w) split over the donor's IAB children",
                "backhaul_weight": "coverage maximized over the backhaul_weights grid per fiber fraction and threshold",
                "pathloss_floor_m": 1.0,
                "drops": "drop d draws from stream (seed, d); densities thin a common ceiling process",
            }),
        })
    }
}
