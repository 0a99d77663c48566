//! Polar QAM under Gaussian phase noise: SER (and optionally mutual
//! information) over an SNR × phase-noise grid, plus a constellation dump.

use serde::{Deserialize, Serialize};
use serde_json::json;
use tbench_core::pqam::{
    mi_estimate, papr, ser_sweep, Detector, Modulation, PnChannelSpec, PqamConstellation, QamConstellation,
};
use tbench_core::RngStream;

use super::StudyOutput;
use crate::error::CliError;
use crate::output::{num, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Pqam,
    Qam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scheme {
    pub family: Family,
    pub order: usize,
    /// Ring count Γ; PQAM only.
    #[serde(default)]
    pub rings: Option<usize>,
    /// Phase offset between adjacent rings; PQAM only.
    #[serde(default)]
    pub ring_offset_rad: f64,
    pub detector: Detector,
}

impl Scheme {
    fn pqam(order: usize, rings: usize, detector: Detector) -> Self {
        Self {
            family: Family::Pqam,
            order,
            rings: Some(rings),
            ring_offset_rad: 0.0,
            detector,
        }
    }

    fn qam(order: usize) -> Self {
        Self {
            family: Family::Qam,
            order,
            rings: None,
            ring_offset_rad: 0.0,
            detector: Detector::Euclidean,
        }
    }

    pub fn modulation(&self) -> Result<Modulation, CliError> {
        match self.family {
            Family::Pqam => {
                let rings = self
                    .rings
                    .ok_or_else(|| CliError::Config("pqam: PQAM schemes need `rings`".into()))?;
                Ok(Modulation::Pqam(PqamConstellation::generate_with_offset(
                    self.order,
                    rings,
                    self.ring_offset_rad,
                )?))
            }
            Family::Qam => {
                if self.rings.is_some() || self.ring_offset_rad != 0.0 {
                    return Err(CliError::Config("pqam: QAM schemes take no rings or ring offset".into()));
                }
                Ok(Modulation::Qam(QamConstellation::generate(self.order)?))
            }
        }
    }

    pub fn label(&self) -> String {
        match (self.family, self.rings) {
            (Family::Pqam, Some(g)) => format!("{}-PQAM({g})", self.order),
            _ => format!("{}-QAM", self.order),
        }
    }

    fn detector_name(&self) -> &'static str {
        match self.detector {
            Detector::Euclidean => "euclidean",
            Detector::Polar => "polar",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub schemes: Vec<Scheme>,
    pub snr_db: Vec<f64>,
    pub sigma_phi_sq: Vec<f64>,
    /// Monte Carlo samples for mutual information; skipped when absent.
    pub mi_samples: Option<u64>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            schemes: vec![
                Scheme::pqam(16, 2, Detector::Polar),
                Scheme::pqam(16, 2, Detector::Euclidean),
                Scheme::qam(16),
            ],
            snr_db: vec![10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
            sigma_phi_sq: vec![0.0, 1e-2, 1e-1],
            mi_samples: None,
        }
    }
}

impl Params {
    fn grid(&self) -> Result<Vec<PnChannelSpec<f64>>, CliError> {
        let mut grid = Vec::with_capacity(self.snr_db.len() * self.sigma_phi_sq.len());
        for s in &self.sigma_phi_sq {
            for snr in &self.snr_db {
                grid.push(PnChannelSpec::new(*s, *snr)?);
            }
        }
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schemes.is_empty() || self.snr_db.is_empty() || self.sigma_phi_sq.is_empty() {
            return Err(CliError::Config("pqam: schemes, snr_db and sigma_phi_sq must be nonempty".into()));
        }
        if self.snr_db.iter().any(|s| s.is_nan()) {
            return Err(CliError::Config("pqam: snr_db must not be NaN".into()));
        }
        if self.mi_samples.is_some_and(|n| n < 10_000) {
            return Err(CliError::Config("pqam: mi_samples must be at least 10000".into()));
        }
        self.grid()?;
        for s in &self.schemes {
            let m = s.modulation()?;
            if s.detector == Detector::Polar && matches!(m, Modulation::Qam(_)) {
                return Err(CliError::Config("pqam: polar detection needs a PQAM scheme".into()));
            }
        }
        Ok(())
    }

    pub fn run(&self, seed: u64, n_symbols: u64) -> Result<StudyOutput, CliError> {
        let grid = self.grid()?;
        let mut data = Table::new(
            "data.csv",
            &[
                "scheme",
                "detector",
                "order",
                "gamma",
                "sigma_phi_sq",
                "snr_db",
                "symbols",
                "errors",
                "ser",
                "ci_low",
                "ci_high",
                "mi_bits",
            ],
        );
        let mut dump = Table::new("constellation.csv", &["scheme", "index", "re", "im", "bits"]);
        let mut schemes = Vec::new();
        for (i, s) in self.schemes.iter().enumerate() {
            let m = s.modulation()?;
            let label = s.label();
            let gamma = match s.rings {
                Some(g) if s.family == Family::Pqam => g.to_string(),
                _ => String::new(),
            };
            // all schemes replay one stream so their sweeps see matched noise
            let ser = ser_sweep(&m, s.detector, &grid, n_symbols, RngStream::new(seed, 0))?;
            for (j, (pt, spec)) in ser.iter().zip(&grid).enumerate() {
                let mi = match self.mi_samples {
                    Some(ns) => {
                        let stream = RngStream::new(seed, 1).child(j as u64);
                        num(match &m {
                            Modulation::Pqam(c) => mi_estimate(c, spec, ns, stream)?,
                            Modulation::Qam(c) => mi_estimate(c, spec, ns, stream)?,
                        })
                    }
                    None => String::new(),
                };
                data.push(vec![
                    label.clone(),
                    s.detector_name().into(),
                    s.order.to_string(),
                    gamma.clone(),
                    num(pt.sigma_phi_sq),
                    num(pt.snr_db),
                    pt.symbols.to_string(),
                    pt.errors.to_string(),
                    num(pt.ser),
                    num(pt.ci_low),
                    num(pt.ci_high),
                    mi,
                ]);
            }
            let width = s.order.trailing_zeros() as usize;
            let dumped = self.schemes[..i].iter().any(|o| o.label() == label);
            if !dumped {
                for (k, (p, b)) in m.points().iter().zip(m.bit_labels()).enumerate() {
                    dump.push(vec![label.clone(), k.to_string(), num(p.re), num(p.im), format!("{b:0width$b}")]);
                }
            }
            let peak = match &m {
                Modulation::Pqam(c) => papr(c),
                Modulation::Qam(c) => papr(c),
            };
            schemes.push(json!({
                "scheme": label,
                "detector": s.detector,
                "papr": peak,
            }));
        }
        Ok(StudyOutput {
            tables: vec![data, dump],
            results: json!({ "schemes": schemes, "symbols_per_point": n_symbols }),
            assumptions: json!({
                "radii": "ring radii proportional to 1, 3, ..., 2*Gamma-1, unit mean energy",
                "labels": "Gray code on ring index and on phase index separately",
                "polar_detector": "amplitude residual over the AWGN amplitude variance, phase residual over sigma_phi^2 + sigma^2/(2 r^2)",
                "snr": "unit symbol energy over complex noise power",
                "mi": "Monte Carlo over the memoryless phase-noise channel, phase likelihood by Gauss-Hermite quadrature",
                "drops": "n_drops is the number of symbols per grid point",
            }),
        })
    }
}
