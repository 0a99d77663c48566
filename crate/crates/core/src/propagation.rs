//! Path loss, fading and thermal noise.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{dbm_to_watts, Real};

/// Thermal noise: PSD in dBm/Hz over a bandwidth, plus receiver noise figure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec<T> {
    pub psd_dbm_hz: T,
    pub bandwidth_hz: T,
    pub noise_figure_db: T,
}

impl<T: Real> NoiseSpec<T> {
    pub fn new(psd_dbm_hz: T, bandwidth_hz: T, noise_figure_db: T) -> Result<Self> {
        if !(bandwidth_hz > T::zero()) {
            return Err(Error::arg("bandwidth_hz", "must be positive"));
        }
        Ok(Self {
            psd_dbm_hz,
            bandwidth_hz,
            noise_figure_db,
        })
    }

    /// Thermal PSD of -174 dBm/Hz.
    pub fn thermal(bandwidth_hz: T, noise_figure_db: T) -> Result<Self> {
        Self::new(T::lit(-174.0), bandwidth_hz, noise_figure_db)
    }

    pub fn power_dbm(&self) -> T {
        self.psd_dbm_hz + T::lit(10.0) * self.bandwidth_hz.log10() + self.noise_figure_db
    }
}

/// Noise power in watts.
pub fn noise_power<T: Real>(spec: &NoiseSpec<T>) -> T {
    dbm_to_watts(spec.power_dbm())
}

/// Close-in free-space reference model with separate LoS/NLoS exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloseInParams<T> {
    pub alpha_los: T,
    pub alpha_nlos: T,
    pub carrier_ghz: T,
}

impl<T: Real> CloseInParams<T> {
    pub fn new(alpha_los: T, alpha_nlos: T, carrier_ghz: T) -> Result<Self> {
        if !(carrier_ghz > T::zero()) {
            return Err(Error::arg("carrier_ghz", "must be positive"));
        }
        if !(alpha_los > T::zero() && alpha_nlos > T::zero()) {
            return Err(Error::arg("alpha", "path-loss exponents must be positive"));
        }
        Ok(Self {
            alpha_los,
            alpha_nlos,
            carrier_ghz,
        })
    }
}

/// `PL = 32.4 + 10 α log10(r / 1 m) + 20 log10(fc / 1 GHz)` in dB.
pub fn closein_pathloss<T: Real>(r: T, params: &CloseInParams<T>, los: bool) -> Result<T> {
    if !(r >= T::one()) {
        return Err(Error::arg("r", "close-in model is defined for r >= 1 m"));
    }
    let alpha = if los { params.alpha_los } else { params.alpha_nlos };
    Ok(T::lit(32.4) + T::lit(10.0) * alpha * r.log10() + T::lit(20.0) * params.carrier_ghz.log10())
}

/// One small-scale fading coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingDraw<T> {
    pub h: Complex<T>,
}

impl<T: Real> FadingDraw<T> {
    pub fn power(&self) -> T {
        self.h.norm_sqr()
    }
}

/// Standard circularly symmetric complex Gaussian sample, `CN(0, 1)`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex<f64> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `n` i.i.d. Rayleigh coefficients with unit mean power.
pub fn rayleigh_draw<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<FadingDraw<T>> {
    (0..n)
        .map(|_| {
            let h = complex_normal(rng);
            FadingDraw {
                h: Complex::new(T::lit(h.re), T::lit(h.im)),
            }
        })
        .collect()
}

/// Power of one Rayleigh coefficient, i.e. an `Exp(1)` draw.
pub fn rayleigh_power<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    complex_normal(rng).norm_sqr()
}

/// Three-slope path loss with log-normal shadowing on the far slope.
///
/// Stand-in for the large-scale fading of the cell-free study. The loss
/// constant follows the COST-231 Hata form at the configured carrier and
/// antenna heights; exponents are 0/2/3.5 below `d0`, between `d0` and `d1`,
/// and beyond `d1` respectively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThreeSlopeModel {
    pub carrier_mhz: f64,
    pub ap_height_m: f64,
    pub ue_height_m: f64,
    pub d0_m: f64,
    pub d1_m: f64,
    pub far_exponent: f64,
    pub shadowing_db: f64,
    pub shadowing: bool,
}

impl Default for ThreeSlopeModel {
    fn default() -> Self {
        Self {
            carrier_mhz: 1900.0,
            ap_height_m: 10.0,
            ue_height_m: 1.65,
            d0_m: 10.0,
            d1_m: 50.0,
            far_exponent: 3.5,
            shadowing_db: 8.0,
            shadowing: true,
        }
    }
}

impl ThreeSlopeModel {
    /// Hata-style loss constant `L` in dB.
    pub fn loss_constant_db(&self) -> f64 {
        let f = self.carrier_mhz.log10();
        46.3 + 33.9 * f - 13.82 * self.ap_height_m.log10() - (1.1 * f - 0.7) * self.ue_height_m + (1.56 * f - 0.8)
    }

    /// Identifier echoed into output metadata.
    pub fn identifier(&self) -> String {
        format!(
            "three-slope(L={:.2}dB,d0={}m,d1={}m,far_exp={},shadow={}dB{})",
            self.loss_constant_db(),
            self.d0_m,
            self.d1_m,
            self.far_exponent,
            self.shadowing_db,
            if self.shadowing { "" } else { ",off" }
        )
    }

    /// Deterministic part of the gain in dB (negative), `d` being the 3D
    /// distance in meters.
    pub fn path_gain_db(&self, d: f64) -> f64 {
        let l = self.loss_constant_db();
        let km = |m: f64| m / 1000.0;
        let (d0, d1) = (km(self.d0_m), km(self.d1_m));
        let d = km(d);
        if d > d1 {
            -l - 10.0 * self.far_exponent * d.log10()
        } else if d > d0 {
            -l - 15.0 * d1.log10() - 20.0 * d.log10()
        } else {
            -l - 15.0 * d1.log10() - 20.0 * d0.log10()
        }
    }

    /// 3D distance between an AP and a UE at the given horizontal separation.
    pub fn distance_3d(&self, horizontal_m: f64) -> f64 {
        horizontal_m.hypot(self.ap_height_m - self.ue_height_m)
    }
}

/// Large-scale fading coefficient β for a 3D distance `d`.
pub fn cellfree_beta<R: Rng + ?Sized>(d: f64, model: &ThreeSlopeModel, rng: &mut R) -> f64 {
    let mut db = model.path_gain_db(d);
    if model.shadowing && d > model.d1_m {
        let z: f64 = StandardNormal.sample(rng);
        db += model.shadowing_db * z;
    }
    10f64.powf(db / 10.0)
}
