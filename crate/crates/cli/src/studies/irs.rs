//! IRS link: spectral efficiency against element count for a weak and a
//! strong direct path, and the end-to-end gain along a deployment track.

use serde::{Deserialize, Serialize};
use serde_json::json;
use tbench_core::geometry::Point2D;
use tbench_core::irs::{aligned_gain, deployment_sweep, parallel_track, se_from_gain};
use tbench_core::thz::wavelength;

use super::{db, from_db, StudyOutput};
use crate::error::CliError;
use crate::output::{num, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub beta_irs_db: f64,
    /// Direct-path gains of the element-count curves.
    pub beta_d_db: Vec<f64>,
    pub n_elements: Vec<usize>,
    pub sweep: SweepParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    pub tx: [f64; 2],
    pub rx: [f64; 2],
    /// Distance between the IRS track and the Tx-Rx line.
    pub offset_m: f64,
    pub points: usize,
    pub n_elements: usize,
    pub carrier_hz: f64,
    pub beta_d_db: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            tx_power_dbm: 10.0,
            noise_dbm: -101.0,
            beta_irs_db: -150.0,
            beta_d_db: vec![-100.0, -75.0],
            n_elements: vec![0, 64, 128, 256, 384, 512, 640, 768, 896, 1024],
            sweep: SweepParams::default(),
        }
    }
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            tx: [0.0, 0.0],
            rx: [45.0, 0.0],
            offset_m: 5.0,
            points: 91,
            n_elements: 1024,
            carrier_hz: 3e9,
            beta_d_db: -75.0,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(format!("irs: {m}")));
        if !self.tx_power_dbm.is_finite() || !self.noise_dbm.is_finite() || !self.beta_irs_db.is_finite() {
            return bad("powers and gains must be finite");
        }
        if self.beta_d_db.is_empty() || self.beta_d_db.iter().any(|b| !b.is_finite()) {
            return bad("beta_d_db must be a nonempty list of finite values");
        }
        if self.n_elements.is_empty() {
            return bad("n_elements must be nonempty");
        }
        let s = &self.sweep;
        if s.points == 0 || !(s.carrier_hz > 0.0) || !s.beta_d_db.is_finite() {
            return bad("sweep needs points >= 1, carrier_hz > 0 and a finite beta_d_db");
        }
        if s.tx == s.rx {
            return bad("sweep tx and rx must differ");
        }
        Ok(())
    }

    pub fn run(&self) -> Result<StudyOutput, CliError> {
        let p = from_db(self.tx_power_dbm) * 1e-3;
        let noise = from_db(self.noise_dbm) * 1e-3;
        let beta_irs = from_db(self.beta_irs_db);

        let mut curves = Table::new("se_vs_n.csv", &["beta_d_db", "n_elements", "gain_db", "se_bps_hz"]);
        let mut cases = Vec::new();
        for bd_db in &self.beta_d_db {
            let bd = from_db(*bd_db);
            let mut se = Vec::new();
            for n in &self.n_elements {
                let g = aligned_gain(bd, beta_irs, *n);
                let s = se_from_gain(g, p, noise);
                curves.push(vec![num(*bd_db), n.to_string(), num(db(g)), num(s)]);
                se.push(s);
            }
            let baseline = se_from_gain(bd, p, noise);
            cases.push(json!({
                "beta_d_db": bd_db,
                "baseline_se_bps_hz": baseline,
                "se_bps_hz": se,
                "se_gain_at_max_n_bps_hz": se.last().copied().unwrap_or(baseline) - baseline,
            }));
        }

        let s = &self.sweep;
        let tx = Point2D::new(s.tx[0], s.tx[1]);
        let rx = Point2D::new(s.rx[0], s.rx[1]);
        let track = parallel_track(&tx, &rx, s.offset_m, s.points);
        let beta_d = from_db(s.beta_d_db);
        let sweep = deployment_sweep(&tx, &rx, &track, s.n_elements, wavelength(s.carrier_hz), beta_d)?;
        let mut data = Table::new("data.csv", &["position_m", "beta_irs_db", "gain_db", "se_bps_hz"]);
        let along = |q: &Point2D<f64>| {
            let (ux, uy) = (rx.x - tx.x, rx.y - tx.y);
            ((q.x - tx.x) * ux + (q.y - tx.y) * uy) / (ux * ux + uy * uy).sqrt()
        };
        for pt in &sweep {
            data.push(vec![
                num(along(&pt.position)),
                num(db(pt.beta_irs)),
                num(db(pt.gain)),
                num(se_from_gain(pt.gain, p, noise)),
            ]);
        }
        let gains: Vec<f64> = sweep.iter().map(|x| x.gain).collect();
        let min_gain = gains.iter().copied().fold(f64::INFINITY, f64::min);

        Ok(StudyOutput {
            tables: vec![data, curves],
            results: json!({
                "se_vs_n": cases,
                "sweep": {
                    "baseline_gain_db": s.beta_d_db,
                    "min_gain_db": db(min_gain),
                    "first_gain_db": db(gains[0]),
                    "mid_gain_db": db(gains[gains.len() / 2]),
                    "last_gain_db": db(gains[gains.len() - 1]),
                },
            }),
            assumptions: json!({
                "noise": "thermal noise -174 dBm/Hz over 20 MHz, 0 dB noise figure (-101 dBm) unless noise_dbm is set",
                "phases": "optimal alignment with the direct path",
                "element_gain": "far-field per-element gain A^2/((4 pi)^2 d1^2 d2^2), A = (lambda/4)^2, boresight incidence",
                "position_m": "projection of the IRS position on the Tx-Rx axis, measured from Tx",
            }),
        })
    }
}
