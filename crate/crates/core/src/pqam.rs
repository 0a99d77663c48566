//! Polar-QAM constellations, the Gaussian phase-noise channel, detection and
//! Monte Carlo error-rate and mutual-information estimates.
//!
//! An M-PQAM(Γ) places `M/Γ` equally spaced phases on each of Γ concentric
//! rings. The ring radii are proportional to the odd integers `1, 3, …, 2Γ−1`.
//! With that choice the mean squared radius is
//! `(1/Γ) Σ_{i=1..Γ} (2i−1)² = (4Γ²−1)/3`, and the peak-to-average power ratio
//! is `(2Γ−1)² · 3/(4Γ²−1) = 3(2Γ−1)/(2Γ+1)`, independent of M. Equal spacing
//! of the rings in amplitude is the only arithmetic progression through zero
//! offset that yields this ratio for every Γ.

use std::sync::OnceLock;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scalar::{wrap_pi, wrap_two_pi, Real};
use crate::stats::{wilson_interval, Z95};

fn gray(i: usize) -> u32 {
    (i ^ (i >> 1)) as u32
}

fn log2_exact(n: usize) -> Option<u32> {
    (n.is_power_of_two()).then(|| n.trailing_zeros())
}

/// A finite complex point set with bit labels.
pub trait PointSet<T> {
    fn points(&self) -> &[Complex<T>];
    fn bit_labels(&self) -> &[u32];
    fn bits_per_symbol(&self) -> u32 {
        log2_exact(self.points().len()).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PqamConstellation<T> {
    pub order: usize,
    pub rings: usize,
    /// Normalized ring radii, innermost first.
    pub radii: Vec<T>,
    /// Angle of phase index 0 on each ring.
    pub ring_offsets: Vec<T>,
    pub points: Vec<Complex<T>>,
    pub ring_of: Vec<usize>,
    pub phase_index_of: Vec<usize>,
    pub bit_labels: Vec<u32>,
}

impl<T> PointSet<T> for PqamConstellation<T> {
    fn points(&self) -> &[Complex<T>] {
        &self.points
    }
    fn bit_labels(&self) -> &[u32] {
        &self.bit_labels
    }
}

impl<T: Real> PqamConstellation<T> {
    /// M-PQAM(Γ) with aligned phases on every ring.
    pub fn generate(order: usize, rings: usize) -> Result<Self> {
        Self::generate_with_offset(order, rings, T::zero())
    }

    /// M-PQAM(Γ) with ring `i` rotated by `i · ring_offset`.
    pub fn generate_with_offset(order: usize, rings: usize, ring_offset: T) -> Result<Self> {
        if order < 2 || log2_exact(order).is_none() {
            return Err(Error::arg("order", format!("{order} is not a power of two ≥ 2")));
        }
        if rings == 0 || log2_exact(rings).is_none() || rings > order {
            return Err(Error::arg(
                "rings",
                format!("{rings} is not a power of two in [1, {order}]"),
            ));
        }
        let g = T::count(rings);
        let norm = ((T::lit(4.0) * g * g - T::one()) / T::lit(3.0)).sqrt();
        let radii: Vec<T> = (0..rings)
            .map(|i| T::count(2 * i + 1) / norm)
            .collect();
        let offsets = (0..rings)
            .map(|i| wrap_two_pi(T::count(i) * ring_offset))
            .collect();
        Ok(Self::assemble(order, rings, radii, offsets))
    }

    fn assemble(order: usize, rings: usize, radii: Vec<T>, ring_offsets: Vec<T>) -> Self {
        let per_ring = order / rings;
        let phase_bits = log2_exact(per_ring).unwrap_or(0);
        let step = T::TAU() / T::count(per_ring);
        let mut points = Vec::with_capacity(order);
        let mut ring_of = Vec::with_capacity(order);
        let mut phase_index_of = Vec::with_capacity(order);
        let mut bit_labels = Vec::with_capacity(order);
        for (ring, (r, off)) in radii.iter().zip(&ring_offsets).enumerate() {
            for p in 0..per_ring {
                points.push(Complex::from_polar(*r, *off + step * T::count(p)));
                ring_of.push(ring);
                phase_index_of.push(p);
                bit_labels.push((gray(ring) << phase_bits) | gray(p));
            }
        }
        Self {
            order,
            rings,
            radii,
            ring_offsets,
            points,
            ring_of,
            phase_index_of,
            bit_labels,
        }
    }

    pub fn phases_per_ring(&self) -> usize {
        self.order / self.rings
    }

    /// The same constellation rotated by `alpha`.
    pub fn rotated(&self, alpha: T) -> Self {
        let offsets = self
            .ring_offsets
            .iter()
            .map(|o| wrap_two_pi(*o + alpha))
            .collect();
        Self::assemble(self.order, self.rings, self.radii.clone(), offsets)
    }
}

/// Square M-QAM with Gray labels per axis and unit average energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QamConstellation<T> {
    pub order: usize,
    pub points: Vec<Complex<T>>,
    pub bit_labels: Vec<u32>,
}

impl<T> PointSet<T> for QamConstellation<T> {
    fn points(&self) -> &[Complex<T>] {
        &self.points
    }
    fn bit_labels(&self) -> &[u32] {
        &self.bit_labels
    }
}

impl<T: Real> QamConstellation<T> {
    pub fn generate(order: usize) -> Result<Self> {
        let bits = log2_exact(order)
            .filter(|b| *b >= 2 && b % 2 == 0)
            .ok_or_else(|| Error::arg("order", format!("{order} is not an even power of two ≥ 4")))?;
        let side = 1usize << (bits / 2);
        // Mean energy of the unnormalized grid {±1, ±3, …}² is 2(M−1)/3.
        let norm = (T::lit(2.0) * T::count(order - 1) / T::lit(3.0)).sqrt();
        let level = |i: usize| (T::count(2 * i + 1) - T::count(side)) / norm;
        let mut points = Vec::with_capacity(order);
        let mut bit_labels = Vec::with_capacity(order);
        for row in 0..side {
            for col in 0..side {
                points.push(Complex::new(level(col), level(row)));
                bit_labels.push((gray(col) << (bits / 2)) | gray(row));
            }
        }
        Ok(Self {
            order,
            points,
            bit_labels,
        })
    }
}

/// Mean symbol energy of a point set.
pub fn mean_energy<T: Real>(points: &[Complex<T>]) -> T {
    points.iter().fold(T::zero(), |acc, p| acc + p.norm_sqr()) / T::count(points.len())
}

/// `max |x|² / mean |x|²`.
pub fn papr<T: Real, C: PointSet<T>>(c: &C) -> T {
    let peak = c
        .points()
        .iter()
        .fold(T::zero(), |acc, p| acc.max(p.norm_sqr()));
    peak / mean_energy(c.points())
}

/// Closed form `3(2Γ−1)/(2Γ+1)`.
pub fn papr_closed_form<T: Real>(rings: usize) -> T {
    let g = T::count(rings);
    T::lit(3.0) * (T::lit(2.0) * g - T::one()) / (T::lit(2.0) * g + T::one())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PnChannelSpec<T> {
    /// Phase-noise variance σ²_φ in rad².
    pub sigma_phi_sq: T,
    /// Symbol SNR in dB relative to unit symbol energy.
    pub snr_db: T,
}

impl<T: Real> PnChannelSpec<T> {
    pub fn new(sigma_phi_sq: T, snr_db: T) -> Result<Self> {
        if !(sigma_phi_sq >= T::zero()) {
            return Err(Error::arg("sigma_phi_sq", "must be non-negative"));
        }
        Ok(Self {
            sigma_phi_sq,
            snr_db,
        })
    }

    /// Complex noise variance `10^(−SNR/10)`.
    pub fn noise_power(&self) -> T {
        T::lit(10.0).powf(-self.snr_db / T::lit(10.0))
    }
}

/// `y = x·e^{jφ} + n` with `φ ~ N(0, σ²_φ)` and `n ~ CN(0, 10^(−SNR/10))`.
pub fn pn_channel<R: Rng + ?Sized>(x: Complex<f64>, spec: &PnChannelSpec<f64>, rng: &mut R) -> Complex<f64> {
    let phi: f64 = rng.sample::<f64, _>(StandardNormal) * spec.sigma_phi_sq.sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = (spec.noise_power() / 2.0).sqrt();
    x * Complex::from_polar(1.0, phi) + Complex::new(re * s, im * s)
}

/// Index of the nearest point, lowest index on ties.
pub fn detect_euclidean<T: Real, C: PointSet<T>>(y: Complex<T>, c: &C) -> usize {
    let mut best = 0;
    let mut best_d = T::infinity();
    for (i, p) in c.points().iter().enumerate() {
        let d = (y - *p).norm_sqr();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

const VARIANCE_FLOOR: f64 = 1e-30;

/// Polar-metric decision. For each ring the nearest phase is found, then
/// rings are compared on
/// `(|y|−r)²/(σ²/2) + wrap(∠y−θ)²/(σ²_φ + σ²/(2r²))`.
pub fn detect_polar<T: Real>(y: Complex<T>, c: &PqamConstellation<T>, spec: &PnChannelSpec<T>) -> usize {
    let floor = T::lit(VARIANCE_FLOOR);
    let n0 = spec.noise_power();
    let amp_var = (n0 / T::lit(2.0)).max(floor);
    let amp = y.norm();
    let angle = y.arg();
    let per_ring = c.phases_per_ring();
    let step = T::TAU() / T::count(per_ring);
    let mut best = 0;
    let mut best_metric = T::infinity();
    for (ring, (r, off)) in c.radii.iter().zip(&c.ring_offsets).enumerate() {
        let rel = wrap_two_pi(angle - *off);
        let p = (rel / step).round().to_usize().unwrap_or(0) % per_ring;
        let resid = wrap_pi(rel - step * T::count(p));
        let phase_var = (spec.sigma_phi_sq + n0 / (T::lit(2.0) * *r * *r)).max(floor);
        let da = amp - *r;
        let metric = da * da / amp_var + resid * resid / phase_var;
        if metric < best_metric {
            best_metric = metric;
            best = ring * per_ring + p;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    Euclidean,
    Polar,
}

/// Modulation under test in a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Modulation {
    Pqam(PqamConstellation<f64>),
    Qam(QamConstellation<f64>),
}

impl Modulation {
    pub fn points(&self) -> &[Complex<f64>] {
        match self {
            Modulation::Pqam(c) => &c.points,
            Modulation::Qam(c) => &c.points,
        }
    }

    pub fn bit_labels(&self) -> &[u32] {
        match self {
            Modulation::Pqam(c) => &c.bit_labels,
            Modulation::Qam(c) => &c.bit_labels,
        }
    }

    pub fn order(&self) -> usize {
        self.points().len()
    }

    /// Ring count Γ, or 0 for square QAM.
    pub fn rings(&self) -> usize {
        match self {
            Modulation::Pqam(c) => c.rings,
            Modulation::Qam(_) => 0,
        }
    }

    pub fn detect(&self, y: Complex<f64>, detector: Detector, spec: &PnChannelSpec<f64>) -> Result<usize> {
        match (self, detector) {
            (Modulation::Pqam(c), Detector::Euclidean) => Ok(detect_euclidean(y, c)),
            (Modulation::Qam(c), Detector::Euclidean) => Ok(detect_euclidean(y, c)),
            (Modulation::Pqam(c), Detector::Polar) => Ok(detect_polar(y, c, spec)),
            (Modulation::Qam(_), Detector::Polar) => {
                Err(Error::arg("detector", "polar detection needs a ring constellation"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerPoint {
    pub snr_db: f64,
    pub sigma_phi_sq: f64,
    pub symbols: u64,
    pub errors: u64,
    pub ser: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Symbol error rate at each grid point. Every grid point replays the same
/// random stream, so neighbouring points see matched symbols and noise.
pub fn ser_sweep(
    modulation: &Modulation,
    detector: Detector,
    grid: &[PnChannelSpec<f64>],
    n_symbols: u64,
    stream: RngStream,
) -> Result<Vec<SerPoint>> {
    if n_symbols == 0 {
        return Err(Error::arg("n_symbols", "must be positive"));
    }
    modulation.detect(Complex::new(0.0, 0.0), detector, &PnChannelSpec::new(0.0, 0.0)?)?;
    let m = modulation.order();
    grid.par_iter()
        .map(|spec| {
            let mut rng = stream.rng();
            let mut errors = 0u64;
            for _ in 0..n_symbols {
                let idx = rng.random_range(0..m);
                let y = pn_channel(modulation.points()[idx], spec, &mut rng);
                if modulation.detect(y, detector, spec)? != idx {
                    errors += 1;
                }
            }
            let (ci_low, ci_high) = wilson_interval(errors, n_symbols, Z95)?;
            Ok(SerPoint {
                snr_db: spec.snr_db,
                sigma_phi_sq: spec.sigma_phi_sq,
                symbols: n_symbols,
                errors,
                ser: errors as f64 / n_symbols as f64,
                ci_low,
                ci_high,
            })
        })
        .collect()
}

const GH_NODES: usize = 32;

/// Physicists' Gauss–Hermite nodes and weights (`∫ e^{−u²} f(u) du`).
fn gauss_hermite() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GH_NODES;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let nf = n as f64;
        let mut z = 0.0_f64;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        (x, w)
    })
}

/// `ln E_φ[exp(κ(cos(Δ−φ)−1))]` for `φ ~ N(0, s)`, by Gauss–Hermite
/// quadrature centred on the mode of the integrand.
pub fn log_phase_average(kappa: f64, delta: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return kappa * (delta.cos() - 1.0);
    }
    let h = |phi: f64| -phi * phi / (2.0 * s) + kappa * ((delta - phi).cos() - 1.0);
    let dh = |phi: f64| -phi / s + kappa * (delta - phi).sin();
    let d2h = |phi: f64| -1.0 / s - kappa * (delta - phi).cos();
    let newton = |start: f64| {
        let mut phi = start;
        for _ in 0..60 {
            let curv = d2h(phi);
            let step = if curv < 0.0 {
                -dh(phi) / curv
            } else {
                dh(phi).signum() * 0.1
            };
            let step = step.clamp(-0.5, 0.5);
            phi += step;
            if step.abs() < 1e-13 {
                break;
            }
        }
        phi
    };
    let a = newton(0.0);
    let b = newton(delta);
    let mode = if h(a) >= h(b) { a } else { b };
    let curv = d2h(mode);
    let tau = if curv < 0.0 { (-1.0 / curv).sqrt() } else { s.sqrt() };
    let (nodes, weights) = gauss_hermite();
    let scale = std::f64::consts::SQRT_2 * tau;
    let terms: Vec<f64> = nodes
        .iter()
        .zip(weights)
        .map(|(u, w)| w.ln() + h(mode + scale * u) + u * u)
        .collect();
    let peak = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = peak + terms.iter().map(|t| (t - peak).exp()).sum::<f64>().ln();
    lse + scale.ln() - (std::f64::consts::TAU * s).ln() * 0.5
}

/// `ln p(y | x)` up to the additive constant `−ln(πσ²)`.
fn log_likelihood(y: Complex<f64>, x: Complex<f64>, n0: f64, s: f64) -> f64 {
    let (ay, ax) = (y.norm(), x.norm());
    let da = ay - ax;
    let kappa = 2.0 * ay * ax / n0;
    -da * da / n0 + log_phase_average(kappa, wrap_pi(y.arg() - x.arg()), s)
}

/// Mutual information in bits per symbol for equiprobable inputs.
pub fn mi_estimate<C: PointSet<f64> + Sync>(
    c: &C,
    spec: &PnChannelSpec<f64>,
    n_samples: u64,
    stream: RngStream,
) -> Result<f64> {
    if n_samples < 10_000 {
        return Err(Error::arg("n_samples", "at least 10^4 samples are required"));
    }
    let points = c.points();
    let m = points.len();
    let n0 = spec.noise_power();
    if !n0.is_finite() {
        return Ok(0.0);
    }
    let n0 = n0.max(1e-15);
    const CHUNK: u64 = 4096;
    let chunks = n_samples.div_ceil(CHUNK);
    let total: f64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream.child(chunk).rng();
            let count = CHUNK.min(n_samples - chunk * CHUNK);
            let mut acc = 0.0;
            let mut ll = vec![0.0; m];
            for _ in 0..count {
                let idx = rng.random_range(0..m);
                let y = pn_channel(points[idx], spec, &mut rng);
                for (l, x) in ll.iter_mut().zip(points) {
                    *l = log_likelihood(y, *x, n0, spec.sigma_phi_sq);
                }
                let peak = ll.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lse = peak + ll.iter().map(|l| (l - peak).exp()).sum::<f64>().ln();
                acc += (lse - ll[idx]) / std::f64::consts::LN_2;
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let mi = (m as f64).log2() - total / n_samples as f64;
    if !mi.is_finite() {
        return Err(Error::Numerical("mutual information is not finite".into()));
    }
    Ok(mi.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn valid_pairs() -> Vec<(usize, usize)> {
        let mut v = vec![];
        for mb in 2..=8 {
            let m = 1usize << mb;
            for gb in 0..=mb {
                v.push((m, 1usize << gb));
            }
        }
        v
    }

    #[test]
    fn papr_matches_closed_form() {
        for (m, g) in valid_pairs() {
            let c = PqamConstellation::<f64>::generate(m, g).unwrap();
            let got = papr(&c);
            let want: f64 = papr_closed_form(g);
            assert!((got / want - 1.0).abs() < 1e-12, "M={m} Γ={g}");
            assert!((mean_energy(&c.points) - 1.0).abs() < 1e-12);
            for r in 0..g {
                assert_eq!(c.ring_of.iter().filter(|x| **x == r).count(), m / g);
            }
        }
    }

    #[test]
    fn papr_examples() {
        assert!((papr(&PqamConstellation::<f64>::generate(16, 1).unwrap()) - 1.0).abs() < 1e-12);
        assert!((papr(&PqamConstellation::<f64>::generate(16, 2).unwrap()) - 1.8).abs() < 1e-12);
        for m in [16, 64] {
            let p = papr(&PqamConstellation::<f64>::generate(m, 8).unwrap());
            assert!((p - 45.0 / 17.0).abs() < 1e-12);
        }
        let single = papr(&PqamConstellation::<f32>::generate(64, 4).unwrap());
        assert!((single - papr_closed_form::<f32>(4)).abs() < 1e-5);
    }

    #[test]
    fn special_cases() {
        let psk = PqamConstellation::<f64>::generate(8, 1).unwrap();
        assert!(psk.points.iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
        let ask = PqamConstellation::<f64>::generate(16, 8).unwrap();
        assert_eq!(ask.phases_per_ring(), 2);
        let c = PqamConstellation::<f64>::generate(16, 4).unwrap();
        for (i, r) in c.radii.iter().enumerate() {
            assert!((r / c.radii[0] - (2 * i + 1) as f64).abs() < 1e-12);
        }
        assert!(PqamConstellation::<f64>::generate(12, 2).is_err());
        assert!(PqamConstellation::<f64>::generate(16, 3).is_err());
        assert!(PqamConstellation::<f64>::generate(16, 32).is_err());
        assert!(QamConstellation::<f64>::generate(8).is_err());
    }

    #[test]
    fn labels_are_gray_and_unique() {
        for (m, g) in valid_pairs() {
            let c = PqamConstellation::<f64>::generate(m, g).unwrap();
            let mut l = c.bit_labels.clone();
            l.sort();
            l.dedup();
            assert_eq!(l.len(), m);
            let p = c.phases_per_ring();
            if p > 2 {
                for i in 0..p {
                    let a = c.bit_labels[i];
                    let b = c.bit_labels[(i + 1) % p];
                    assert_eq!((a ^ b).count_ones(), 1);
                }
            }
        }
        let q = QamConstellation::<f64>::generate(64).unwrap();
        assert!((mean_energy(&q.points) - 1.0).abs() < 1e-12);
        for i in 0..7 {
            assert_eq!((q.bit_labels[i] ^ q.bit_labels[i + 1]).count_ones(), 1);
        }
    }

    #[test]
    fn noiseless_channel_is_identity() {
        let spec = PnChannelSpec::new(0.0, f64::INFINITY).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        let x = Complex::new(0.3, -0.7);
        assert_eq!(pn_channel(x, &spec, &mut rng), x);
    }

    #[test]
    fn received_energy() {
        let c = PqamConstellation::<f64>::generate(16, 2).unwrap();
        let spec = PnChannelSpec::new(0.1, 3.0).unwrap();
        let mut rng = RngStream::new(2, 0).rng();
        let n = 400_000;
        let e: f64 = (0..n)
            .map(|_| {
                let i = rng.random_range(0..16);
                pn_channel(c.points[i], &spec, &mut rng).norm_sqr()
            })
            .sum::<f64>()
            / n as f64;
        let want = 1.0 + spec.noise_power();
        assert!((e / want - 1.0).abs() < 0.01, "{e} vs {want}");
    }

    #[test]
    fn euclidean_matches_scan() {
        let c = QamConstellation::<f64>::generate(16).unwrap();
        let p = PqamConstellation::<f64>::generate(32, 4).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        for _ in 0..100_000 {
            let y = Complex::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            for pts in [&c.points, &p.points] {
                let dists: Vec<f64> = pts.iter().map(|q| (y - q).norm()).collect();
                let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
                let oracle = dists.iter().position(|d| *d == min).unwrap();
                let got = if pts.len() == 16 {
                    detect_euclidean(y, &c)
                } else {
                    detect_euclidean(y, &p)
                };
                assert_eq!(got, oracle);
            }
        }
        for (i, x) in c.points.iter().enumerate() {
            assert_eq!(detect_euclidean(*x, &c), i);
        }
    }

    #[test]
    fn polar_single_ring_is_phase_detection() {
        let c = PqamConstellation::<f64>::generate(8, 1).unwrap();
        let spec = PnChannelSpec::new(0.01, 20.0).unwrap();
        let mut rng = RngStream::new(4, 0).rng();
        for _ in 0..10_000 {
            let y = Complex::from_polar(rng.random_range(0.1..2.0), rng.random_range(-PI..PI));
            let nearest = c
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| (i, wrap_pi(y.arg() - p.arg()).abs()))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
                .0;
            assert_eq!(detect_polar(y, &c, &spec), nearest);
        }
    }

    #[test]
    fn polar_agrees_with_euclidean_without_phase_noise() {
        let c = PqamConstellation::<f64>::generate(16, 2).unwrap();
        let spec = PnChannelSpec::new(0.0, 15.0).unwrap();
        let mut rng = RngStream::new(5, 0).rng();
        let n = 100_000;
        let mut agree = 0;
        for _ in 0..n {
            let i = rng.random_range(0..16);
            let y = pn_channel(c.points[i], &spec, &mut rng);
            if detect_polar(y, &c, &spec) == detect_euclidean(y, &c) {
                agree += 1;
            }
        }
        assert!(agree as f64 / n as f64 > 0.999, "{agree}");
    }

    #[test]
    fn rotation_leaves_decisions_unchanged() {
        let c = PqamConstellation::<f64>::generate(16, 4).unwrap();
        let spec = PnChannelSpec::new(0.05, 12.0).unwrap();
        let mut rng = RngStream::new(6, 0).rng();
        for _ in 0..10_000 {
            let alpha = rng.random_range(0.0..TAU);
            let rot = c.rotated(alpha);
            let y = Complex::from_polar(rng.random_range(0.0..1.6), rng.random_range(-PI..PI));
            let yr = y * Complex::from_polar(1.0, alpha);
            assert_eq!(detect_polar(y, &c, &spec), detect_polar(yr, &rot, &spec));
            assert_eq!(detect_euclidean(y, &c), detect_euclidean(yr, &rot));
        }
    }

    #[test]
    fn high_snr_ser_is_small() {
        let m = Modulation::Pqam(PqamConstellation::generate(16, 2).unwrap());
        let grid = [PnChannelSpec::new(0.0, 25.0).unwrap()];
        let r = ser_sweep(&m, Detector::Euclidean, &grid, 200_000, RngStream::new(7, 0)).unwrap();
        assert!(r[0].ser < 1e-4, "{:?}", r[0]);
        let silent = [PnChannelSpec::new(0.0, f64::INFINITY).unwrap()];
        let r = ser_sweep(&m, Detector::Polar, &silent, 10_000, RngStream::new(7, 0)).unwrap();
        assert_eq!(r[0].errors, 0);
        let q = Modulation::Qam(QamConstellation::generate(16).unwrap());
        assert!(ser_sweep(&q, Detector::Polar, &grid, 10, RngStream::new(7, 0)).is_err());
    }

    #[test]
    fn ser_monotone_in_snr() {
        let m = Modulation::Pqam(PqamConstellation::generate(16, 2).unwrap());
        let grid: Vec<_> = (0..8)
            .map(|i| PnChannelSpec::new(0.01, 4.0 * i as f64).unwrap())
            .collect();
        for det in [Detector::Euclidean, Detector::Polar] {
            let r = ser_sweep(&m, det, &grid, 50_000, RngStream::new(8, 0)).unwrap();
            for w in r.windows(2) {
                assert!(w[1].ser <= w[0].ser, "{det:?} {w:?}");
            }
        }
    }

    #[test]
    fn gauss_hermite_integrates_polynomials() {
        let (x, w) = gauss_hermite();
        let total: f64 = w.iter().sum();
        assert!((total - PI.sqrt()).abs() < 1e-12);
        let second: f64 = x.iter().zip(w).map(|(x, w)| w * x * x).sum();
        assert!((second - PI.sqrt() / 2.0).abs() < 1e-12);
        let fourth: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((fourth - 3.0 * PI.sqrt() / 4.0).abs() < 1e-11);
    }

    fn trapezoid(kappa: f64, delta: f64, s: f64) -> f64 {
        let sd = s.sqrt();
        let n = 200_000;
        let reach = 12.0 * sd + delta.abs() + 1.0;
        let (a, b) = (-reach, reach);
        let h = (b - a) / n as f64;
        let f = |phi: f64| {
            (-phi * phi / (2.0 * s) + kappa * ((delta - phi).cos() - 1.0)).exp() / (TAU * s).sqrt()
        };
        let sum: f64 = (1..n).map(|i| f(a + h * i as f64)).sum::<f64>() + 0.5 * (f(a) + f(b));
        (sum * h).ln()
    }

    #[test]
    fn phase_average_matches_dense_quadrature() {
        let mut rng = RngStream::new(9, 0).rng();
        for _ in 0..200 {
            let s = 10f64.powf(rng.random_range(-3.0..-0.5));
            let kappa = 10f64.powf(rng.random_range(-2.0..3.5));
            let delta = rng.random_range(-1.0..1.0);
            let got = log_phase_average(kappa, delta, s);
            let want = trapezoid(kappa, delta, s);
            assert!((got - want).abs() < 1e-6 * want.abs().max(1.0), "κ={kappa} Δ={delta} s={s}: {got} vs {want}");
        }
    }

    #[test]
    fn mi_limits() {
        let c = PqamConstellation::<f64>::generate(16, 2).unwrap();
        let low = mi_estimate(&c, &PnChannelSpec::new(0.0, -40.0).unwrap(), 10_000, RngStream::new(10, 0)).unwrap();
        assert!(low < 0.01, "{low}");
        let high = mi_estimate(&c, &PnChannelSpec::new(0.0, 40.0).unwrap(), 10_000, RngStream::new(10, 0)).unwrap();
        assert!((high - 4.0).abs() < 1e-3, "{high}");
        assert!(mi_estimate(&c, &PnChannelSpec::new(0.0, 0.0).unwrap(), 10, RngStream::new(10, 0)).is_err());
    }

    #[test]
    fn mi_gaussian_channel_reference() {
        // Antipodal input at Es/N0 = 0 dB; the binary-input AWGN integral gives 0.7215 bits.
        let c = PqamConstellation::<f64>::generate(2, 1).unwrap();
        let mi = mi_estimate(&c, &PnChannelSpec::new(0.0, 0.0).unwrap(), 200_000, RngStream::new(11, 0)).unwrap();
        assert!((mi - 0.7215).abs() < 0.01, "{mi}");
    }
}
