//! Single-antenna link assisted by an intelligent reflecting surface.
//!
//! The received signal is the direct path plus one scattered path per IRS
//! element. Each element applies a controllable phase delay; aligning every
//! scattered path with the direct path maximises the composite channel gain,
//! which then equals `(√β_d + N √β_IRS)²`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::scalar::{wrap_two_pi, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrsLinkConfig<T> {
    /// Direct-path gain β_d (linear).
    pub beta_d: T,
    /// Direct-path phase delay ψ_d.
    pub psi_d: T,
    /// End-to-end gain through one element β_IRS (linear).
    pub beta_irs: T,
    /// Transmitter-to-element phase delays ψ^TX_n.
    pub psi_tx: Vec<T>,
    /// Element-to-receiver phase delays ψ^RX_n.
    pub psi_rx: Vec<T>,
    /// Transmit power P in watts.
    pub tx_power: T,
    /// Receiver noise power σ² in watts.
    pub noise_power: T,
}

impl<T: Real> IrsLinkConfig<T> {
    pub fn new(
        beta_d: T,
        psi_d: T,
        beta_irs: T,
        psi_tx: Vec<T>,
        psi_rx: Vec<T>,
        tx_power: T,
        noise_power: T,
    ) -> Result<Self> {
        if !(beta_d > T::zero()) {
            return Err(Error::arg("beta_d", "must be positive"));
        }
        if !(beta_irs > T::zero()) {
            return Err(Error::arg("beta_irs", "must be positive"));
        }
        if psi_tx.len() != psi_rx.len() {
            return Err(Error::LengthMismatch {
                expected: psi_tx.len(),
                got: psi_rx.len(),
            });
        }
        if !(tx_power >= T::zero()) {
            return Err(Error::arg("tx_power", "must be non-negative"));
        }
        Ok(Self {
            beta_d,
            psi_d: wrap_two_pi(psi_d),
            beta_irs,
            psi_tx: psi_tx.into_iter().map(wrap_two_pi).collect(),
            psi_rx: psi_rx.into_iter().map(wrap_two_pi).collect(),
            tx_power,
            noise_power,
        })
    }

    /// Number of IRS elements N.
    pub fn n_elements(&self) -> usize {
        self.psi_tx.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrsPhaseConfig<T> {
    /// Element phase delays φ_n in `[0, 2π)`.
    pub phi: Vec<T>,
}

impl<T: Real> IrsPhaseConfig<T> {
    pub fn new(phi: Vec<T>) -> Self {
        Self {
            phi: phi.into_iter().map(wrap_two_pi).collect(),
        }
    }
}

/// `|√β_d e^{jψ_d} + Σ_n √β_IRS e^{j(ψ^TX_n + ψ^RX_n − φ_n)}|²`.
pub fn composite_gain<T: Real>(cfg: &IrsLinkConfig<T>, phases: &IrsPhaseConfig<T>) -> Result<T> {
    let n = cfg.n_elements();
    if phases.phi.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: phases.phi.len(),
        });
    }
    let amp = cfg.beta_irs.sqrt();
    let mut total = Complex::from_polar(cfg.beta_d.sqrt(), cfg.psi_d);
    for ((tx, rx), phi) in cfg.psi_tx.iter().zip(&cfg.psi_rx).zip(&phases.phi) {
        total = total + Complex::from_polar(amp, *tx + *rx - *phi);
    }
    Ok(total.norm_sqr())
}

/// Phase delays that co-phase every scattered path with the direct path.
pub fn optimal_phases<T: Real>(cfg: &IrsLinkConfig<T>) -> IrsPhaseConfig<T> {
    IrsPhaseConfig::new(
        cfg.psi_tx
            .iter()
            .zip(&cfg.psi_rx)
            .map(|(tx, rx)| *tx + *rx - cfg.psi_d)
            .collect(),
    )
}

/// Upper bound `(√β_d + N √β_IRS)²`, attained by [`optimal_phases`].
pub fn aligned_gain<T: Real>(beta_d: T, beta_irs: T, n_elements: usize) -> T {
    let a = beta_d.sqrt() + T::count(n_elements) * beta_irs.sqrt();
    a * a
}

/// `log2(1 + P · gain / σ²)`.
pub fn spectral_efficiency<T: Real>(cfg: &IrsLinkConfig<T>, phases: &IrsPhaseConfig<T>) -> Result<T> {
    if !(cfg.noise_power > T::zero()) {
        return Err(Error::arg("noise_power", "must be positive"));
    }
    let gain = composite_gain(cfg, phases)?;
    Ok(se_from_gain(gain, cfg.tx_power, cfg.noise_power))
}

pub fn se_from_gain<T: Real>(gain: T, tx_power: T, noise_power: T) -> T {
    (T::one() + tx_power * gain / noise_power).log2()
}

/// Far-field gain through one element of area `(λ/4)²` at boresight:
/// `A² / ((4π)² d₁² d₂²)`.
pub fn element_gain<T: Real>(d_tx: T, d_rx: T, wavelength: T) -> T {
    let area = wavelength / T::lit(4.0);
    let area = area * area;
    let four_pi = T::lit(4.0) * T::PI();
    area * area / (four_pi * four_pi * d_tx * d_tx * d_rx * d_rx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint<T> {
    pub position: Point2D<T>,
    pub beta_irs: T,
    pub gain: T,
}

/// End-to-end gain with an `n_elements` IRS placed at each point of `track`.
pub fn deployment_sweep<T: Real>(
    tx: &Point2D<T>,
    rx: &Point2D<T>,
    track: &[Point2D<T>],
    n_elements: usize,
    wavelength: T,
    beta_d: T,
) -> Result<Vec<SweepPoint<T>>> {
    if !(wavelength > T::zero()) {
        return Err(Error::arg("wavelength", "must be positive"));
    }
    track
        .iter()
        .map(|p| {
            let d1 = tx.distance(p);
            let d2 = p.distance(rx);
            if !(d1 > T::zero() && d2 > T::zero()) {
                return Err(Error::arg("track", "IRS position coincides with an endpoint"));
            }
            let beta_irs = element_gain(d1, d2, wavelength);
            Ok(SweepPoint {
                position: *p,
                beta_irs,
                gain: aligned_gain(beta_d, beta_irs, n_elements),
            })
        })
        .collect()
}

/// Evenly spaced track parallel to the Tx-Rx axis, `offset` meters away.
pub fn parallel_track<T: Real>(tx: &Point2D<T>, rx: &Point2D<T>, offset: T, points: usize) -> Vec<Point2D<T>> {
    let len = tx.distance(rx);
    let (ux, uy) = ((rx.x - tx.x) / len, (rx.y - tx.y) / len);
    let (nx, ny) = (-uy, ux);
    (0..points)
        .map(|i| {
            let s = if points > 1 {
                len * T::count(i) / T::count(points - 1)
            } else {
                len * T::lit(0.5)
            };
            Point2D::new(tx.x + ux * s + nx * offset, tx.y + uy * s + ny * offset)
        })
        .collect()
}
