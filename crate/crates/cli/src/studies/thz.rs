//! THz LoS MIMO spatial tuning: Rayleigh distance against antenna spacing
//! and array size, and the uncoded 16-QAM BER of eigenchannel multiplexing
//! at the optimal and at scaled antenna spacings.

use serde::{Deserialize, Serialize};
use serde_json::json;
use tbench_core::thz::{
    condition_number, los_channel, multiplex_ber, normalized, optimal_separation, rayleigh_distance, wavelength,
    ArrayConfig,
};
use tbench_core::RngStream;

use super::StudyOutput;
use crate::error::CliError;
use crate::output::{num, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub rayleigh: RayleighParams,
    pub ber: BerParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RayleighParams {
    pub carrier_hz: f64,
    /// Array shapes (rows, cols), identical on both sides.
    pub shapes: Vec<[usize; 2]>,
    pub deltas_m: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BerParams {
    pub carrier_hz: f64,
    pub range_m: f64,
    /// Port layout of each side; every port is a subarray.
    pub array_shape: [usize; 2],
    pub subarray_shape: [usize; 2],
    /// Spacings to simulate, as multiples of the optimal one.
    pub delta_factors: Vec<f64>,
    pub snr_db: Vec<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            rayleigh: RayleighParams::default(),
            ber: BerParams::default(),
        }
    }
}

impl Default for RayleighParams {
    fn default() -> Self {
        Self {
            carrier_hz: 1e12,
            shapes: vec![[2, 2], [8, 8], [32, 32], [128, 128]],
            deltas_m: (0..=20).map(|i| 1e-4 * 10f64.powf(f64::from(i) / 10.0)).collect(),
        }
    }
}

impl Default for BerParams {
    fn default() -> Self {
        Self {
            carrier_hz: 1e12,
            range_m: 1.0,
            array_shape: [1, 16],
            subarray_shape: [16, 16],
            delta_factors: vec![1.0, 0.1],
            snr_db: (0..=12).map(|i| -45.0 + 2.5 * f64::from(i)).collect(),
        }
    }
}

impl BerParams {
    pub fn n_ports(&self) -> usize {
        self.array_shape[0] * self.array_shape[1]
    }

    /// Coherent gain of the subarrays on both sides.
    pub fn array_gain(&self) -> f64 {
        let per_side = (self.subarray_shape[0] * self.subarray_shape[1]) as f64;
        per_side * per_side
    }

    pub fn optimal_delta(&self) -> Result<f64, CliError> {
        Ok(optimal_separation(self.range_m, self.n_ports(), wavelength(self.carrier_hz))?)
    }

    pub fn array(&self, factor: f64) -> Result<ArrayConfig<f64>, CliError> {
        let shape = (self.array_shape[0], self.array_shape[1]);
        Ok(ArrayConfig::symmetric(shape, factor * self.optimal_delta()?, self.carrier_hz, self.range_m)?)
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), CliError> {
        let r = &self.rayleigh;
        if r.shapes.iter().any(|s| s[0] == 0 || s[1] == 0) || r.deltas_m.iter().any(|d| !(*d > 0.0)) {
            return Err(CliError::Config("thz: rayleigh shapes must be nonzero and deltas positive".into()));
        }
        if !(r.carrier_hz > 0.0) {
            return Err(CliError::Config("thz: rayleigh carrier_hz must be positive".into()));
        }
        let b = &self.ber;
        if b.subarray_shape.contains(&0) || b.delta_factors.iter().any(|f| !(*f > 0.0)) {
            return Err(CliError::Config("thz: subarray_shape must be nonzero and delta_factors positive".into()));
        }
        if b.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(CliError::Config("thz: snr_db must be finite".into()));
        }
        for f in &b.delta_factors {
            b.array(*f)?;
        }
        Ok(())
    }

    pub fn run(&self, seed: u64, n_vectors: u64) -> Result<StudyOutput, CliError> {
        let r = &self.rayleigh;
        let mut ray = Table::new("rayleigh.csv", &["rows", "cols", "delta_m", "d_ray_m"]);
        for s in &r.shapes {
            for d in &r.deltas_m {
                let a = ArrayConfig::symmetric((s[0], s[1]), *d, r.carrier_hz, 1.0)?;
                ray.push(vec![s[0].to_string(), s[1].to_string(), num(*d), num(rayleigh_distance(&a))]);
            }
        }

        let b = &self.ber;
        let mut data = Table::new(
            "data.csv",
            &["delta_factor", "delta_m", "snr_db", "bits", "errors", "ber", "ci_low", "ci_high"],
        );
        let mut arrays = Vec::new();
        for f in &b.delta_factors {
            let a = b.array(*f)?;
            let pts = multiplex_ber(&a, b.array_gain(), &b.snr_db, n_vectors, RngStream::new(seed, 0))?;
            for p in &pts {
                data.push(vec![
                    num(*f),
                    num(a.delta_t),
                    num(p.snr_db),
                    p.bits.to_string(),
                    p.errors.to_string(),
                    num(p.ber),
                    num(p.ci_low),
                    num(p.ci_high),
                ]);
            }
            arrays.push(json!({
                "delta_factor": f,
                "delta_m": a.delta_t,
                "rayleigh_distance_m": rayleigh_distance(&a),
                "condition_number": condition_number(&normalized(&los_channel(&a))),
            }));
        }

        Ok(StudyOutput {
            tables: vec![data, ray],
            results: json!({
                "optimal_delta_m": b.optimal_delta()?,
                "array_gain": b.array_gain(),
                "arrays": arrays,
                "vectors_per_point": n_vectors,
            }),
            assumptions: json!({
                "channel": "spherical-wave LoS between broadside planar arrays, exact element distances",
                "speed_of_light_m_s": tbench_core::thz::SPEED_OF_LIGHT,
                "streams": "SVD precoding and combining, equal power per eigenchannel, uncoded Gray 16-QAM",
                "snr": "per-element SNR before the coherent subarray gain on both sides",
                "drops": "n_drops is the number of transmit vectors per SNR point",
            }),
        })
    }
}
