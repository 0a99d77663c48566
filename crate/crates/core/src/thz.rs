//! Line-of-sight MIMO at THz carriers: spreading and absorption loss, the
//! Rayleigh distance, antenna-separation tuning, the exact spherical-wave
//! channel and uncoded spatial-multiplexing BER.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scalar::Real;
use crate::stats::{wilson_interval, Z95};

/// Propagation speed in m/s.
pub const SPEED_OF_LIGHT: f64 = 3e8;

/// `20·log10(4π d f / c)`.
pub fn spreading_loss<T: Real>(f_hz: T, d_m: T) -> Result<T> {
    if !(f_hz > T::zero() && d_m > T::zero()) {
        return Err(Error::arg("spreading_loss", "frequency and distance must be positive"));
    }
    let four_pi = T::lit(4.0) * T::PI();
    Ok(T::lit(20.0) * (four_pi * d_m * f_hz / T::lit(SPEED_OF_LIGHT)).log10())
}

/// `10·log10(e)·k_abs·d`.
pub fn absorption_loss<T: Real>(k_abs: T, d_m: T) -> Result<T> {
    if !(k_abs >= T::zero()) {
        return Err(Error::arg("k_abs", "must be non-negative"));
    }
    Ok(T::lit(10.0) * T::E().log10() * k_abs * d_m)
}

pub fn wavelength<T: Real>(f_hz: T) -> T {
    T::lit(SPEED_OF_LIGHT) / f_hz
}

/// Two facing planar arrays at boresight range `range_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig<T> {
    /// Transmit array (rows, cols).
    pub tx_shape: (usize, usize),
    /// Receive array (rows, cols).
    pub rx_shape: (usize, usize),
    /// Transmit element spacing Δ_t in meters.
    pub delta_t: T,
    /// Receive element spacing Δ_r in meters.
    pub delta_r: T,
    pub carrier_hz: T,
    pub range_m: T,
}

impl<T: Real> ArrayConfig<T> {
    pub fn new(
        tx_shape: (usize, usize),
        rx_shape: (usize, usize),
        delta_t: T,
        delta_r: T,
        carrier_hz: T,
        range_m: T,
    ) -> Result<Self> {
        if tx_shape.0 * tx_shape.1 == 0 || rx_shape.0 * rx_shape.1 == 0 {
            return Err(Error::arg("shape", "arrays need at least one element"));
        }
        if !(delta_t > T::zero() && delta_r > T::zero()) {
            return Err(Error::arg("delta", "separations must be positive"));
        }
        if !(carrier_hz > T::zero()) {
            return Err(Error::arg("carrier_hz", "must be positive"));
        }
        if !(range_m > T::zero()) {
            return Err(Error::arg("range_m", "must be positive"));
        }
        Ok(Self {
            tx_shape,
            rx_shape,
            delta_t,
            delta_r,
            carrier_hz,
            range_m,
        })
    }

    /// Same shape and spacing on both sides.
    pub fn symmetric(shape: (usize, usize), delta: T, carrier_hz: T, range_m: T) -> Result<Self> {
        Self::new(shape, shape, delta, delta, carrier_hz, range_m)
    }

    pub fn n_tx(&self) -> usize {
        self.tx_shape.0 * self.tx_shape.1
    }

    pub fn n_rx(&self) -> usize {
        self.rx_shape.0 * self.rx_shape.1
    }

    pub fn wavelength(&self) -> T {
        wavelength(self.carrier_hz)
    }

    /// Receive and transmit sides exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            tx_shape: self.rx_shape,
            rx_shape: self.tx_shape,
            delta_t: self.delta_r,
            delta_r: self.delta_t,
            ..*self
        }
    }
}

/// `max{M_r, N_t} Δ_r Δ_t / λ`.
pub fn rayleigh_distance<T: Real>(cfg: &ArrayConfig<T>) -> T {
    T::count(cfg.n_rx().max(cfg.n_tx())) * cfg.delta_r * cfg.delta_t / cfg.wavelength()
}

/// Spacing `√(Dλ/n_max)` at which the Rayleigh distance equals `range_m`.
pub fn optimal_separation<T: Real>(range_m: T, n_max: usize, wavelength: T) -> Result<T> {
    if !(range_m > T::zero() && wavelength > T::zero()) || n_max == 0 {
        return Err(Error::arg("optimal_separation", "arguments must be positive"));
    }
    Ok((range_m * wavelength / T::count(n_max)).sqrt())
}

fn element_positions(shape: (usize, usize), delta: f64) -> Vec<(f64, f64)> {
    let (rows, cols) = shape;
    let (rc, cc) = ((rows as f64 - 1.0) / 2.0, (cols as f64 - 1.0) / 2.0);
    (0..rows)
        .flat_map(|r| (0..cols).map(move |c| ((c as f64 - cc) * delta, (r as f64 - rc) * delta)))
        .collect()
}

/// `H[m][n] = λ/(4π d_mn) · exp(−j2π d_mn/λ)` with exact element distances.
pub fn los_channel(cfg: &ArrayConfig<f64>) -> DMatrix<Complex<f64>> {
    let lambda = cfg.wavelength();
    let tx = element_positions(cfg.tx_shape, cfg.delta_t);
    let rx = element_positions(cfg.rx_shape, cfg.delta_r);
    DMatrix::from_fn(rx.len(), tx.len(), |m, n| {
        let (dx, dy) = (rx[m].0 - tx[n].0, rx[m].1 - tx[n].1);
        let d = (dx * dx + dy * dy + cfg.range_m * cfg.range_m).sqrt();
        Complex::from_polar(lambda / (4.0 * std::f64::consts::PI * d), -std::f64::consts::TAU * d / lambda)
    })
}

/// Singular values in decreasing order.
pub fn singular_values(h: &DMatrix<Complex<f64>>) -> Vec<f64> {
    let mut s: Vec<f64> = h.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `σ_max / σ_min`; infinite for a rank-deficient channel.
pub fn condition_number(h: &DMatrix<Complex<f64>>) -> f64 {
    let s = singular_values(h);
    let min = s[s.len() - 1];
    if min == 0.0 {
        f64::INFINITY
    } else {
        s[0] / min
    }
}

/// Channel scaled to unit mean element magnitude.
pub fn normalized(h: &DMatrix<Complex<f64>>) -> DMatrix<Complex<f64>> {
    let mean = h.iter().map(|z| z.norm()).sum::<f64>() / h.len() as f64;
    h.map(|z| z / mean)
}

/// `Σ_i log2(1 + ρ σ_i² / n_s)` for the normalized channel with equal power.
pub fn eigen_capacity(h: &DMatrix<Complex<f64>>, snr_linear: f64) -> f64 {
    let s = singular_values(&normalized(h));
    let ns = s.len() as f64;
    s.iter().map(|v| (1.0 + snr_linear * v * v / ns).log2()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

const QAM16_LEVELS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];
const GRAY2: [u32; 4] = [0b00, 0b01, 0b11, 0b10];

fn slice16(v: f64) -> usize {
    let scaled = v * 10f64.sqrt();
    if scaled < -2.0 {
        0
    } else if scaled < 0.0 {
        1
    } else if scaled < 2.0 {
        2
    } else {
        3
    }
}

/// Uncoded 16-QAM BER over the eigenchannels of `cfg`'s normalized channel.
///
/// SVD precoding and combining turn the channel into parallel streams
/// `y_i = √(ρ G σ_i² / n_s) x_i + n_i` with unit-power noise; the streams are
/// simulated in that diagonal form. `array_gain` G is the coherent gain of
/// the subarrays behind each array port (product of element counts per side).
/// Every SNR point replays the same random stream.
pub fn multiplex_ber(
    cfg: &ArrayConfig<f64>,
    array_gain: f64,
    snr_grid_db: &[f64],
    n_vectors: u64,
    stream: RngStream,
) -> Result<Vec<BerPoint>> {
    if !(array_gain > 0.0) {
        return Err(Error::arg("array_gain", "must be positive"));
    }
    if n_vectors == 0 {
        return Err(Error::arg("n_vectors", "must be positive"));
    }
    let sv = singular_values(&normalized(&los_channel(cfg)));
    if sv.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numerical("channel SVD produced non-finite values".into()));
    }
    let ns = sv.len() as f64;
    let norm = 10f64.sqrt();
    snr_grid_db
        .par_iter()
        .map(|snr_db| {
            let rho = 10f64.powf(snr_db / 10.0) * array_gain;
            let amps: Vec<f64> = sv.iter().map(|s| (rho * s * s / ns).sqrt()).collect();
            let sigma = 0.5f64.sqrt();
            let mut rng = stream.rng();
            let mut errors = 0u64;
            for _ in 0..n_vectors {
                for a in &amps {
                    let i = rng.random_range(0..4usize);
                    let q = rng.random_range(0..4usize);
                    let nr: f64 = rng.sample(StandardNormal);
                    let ni: f64 = rng.sample(StandardNormal);
                    let re = QAM16_LEVELS[i] / norm + nr * sigma / a;
                    let im = QAM16_LEVELS[q] / norm + ni * sigma / a;
                    let (di, dq) = (slice16(re), slice16(im));
                    errors += u64::from((GRAY2[i] ^ GRAY2[di]).count_ones() + (GRAY2[q] ^ GRAY2[dq]).count_ones());
                }
            }
            let bits = n_vectors * sv.len() as u64 * 4;
            let (ci_low, ci_high) = wilson_interval(errors, bits, Z95)?;
            Ok(BerPoint {
                snr_db: *snr_db,
                bits,
                errors,
                ber: errors as f64 / bits as f64,
                ci_low,
                ci_high,
            })
        })
        .collect()
}
