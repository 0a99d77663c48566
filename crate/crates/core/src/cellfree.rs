//! Cell-free massive MIMO and cellular massive MIMO with maximum-ratio
//! processing: pilot assignment, channel-estimate quality, user-centric
//! association, power allocation and the use-and-then-forget rate bounds.
//!
//! All downlink power variables `η_{k,m}` are transmitted powers, so each
//! AP's budget reads `Σ_{k∈K_m} η_{k,m} ≤ P`.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2D, Region};
use crate::propagation::{cellfree_beta, noise_power, NoiseSpec, ThreeSlopeModel};
use crate::rng::{RngStream, SimRng};
use crate::scalar::dbm_to_watts;
use crate::stats::RateStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Association {
    /// Every AP serves every UE.
    Fcf,
    /// Each UE is served by its `n_uc` strongest APs.
    Uc { n_uc: usize },
    /// Cellular baseline: `n_sites` sites on a square grid with
    /// `antennas_per_site` antennas, one serving site per UE.
    Mmimo { n_sites: usize, antennas_per_site: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum DlPowerRule {
    /// `η_{k,m} = γ_{k,m} P / Σ_{j∈K_m} γ_{j,m}`.
    Ppa,
    /// `η_{k,m} = γ_{k,m}^{−α} P / Σ_{j∈K_m} γ_{j,m}^{−α}`.
    Fpa { alpha: f64 },
    /// `η_{k,m} = P / |K_m|`.
    Upa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum UlPowerRule {
    /// `η_k = P_max`.
    Upa,
    /// `η_k = min(P_max, P₀ γ̄_k^{−α})` with `γ̄_k = √(Σ_{m∈M_k} γ_{k,m})`.
    Fpa { p0_w: f64, alpha: f64 },
}

/// Which receiver noise enters the channel-estimate quality denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaNoise {
    /// `σ²_{z,k}`, the UE noise.
    Ue,
    /// `σ²_{w,m}`, the AP noise.
    Ap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellFreeConfig {
    pub n_aps: usize,
    pub antennas_per_ap: usize,
    pub n_ues: usize,
    pub side_m: f64,
    pub wrap_around: bool,
    pub tau_c: usize,
    pub tau_p: usize,
    pub tau_u: usize,
    pub tau_d: usize,
    pub bandwidth_hz: f64,
    /// Per-sample pilot power p_k; the pilot energy is `η_k = τ_p p_k`.
    pub pilot_power_w: f64,
    pub p_max_ap_dl_w: f64,
    pub p_max_ul_w: f64,
    pub association: Association,
    pub dl_power: DlPowerRule,
    pub ul_power: UlPowerRule,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_ue_db: f64,
    pub noise_figure_ap_db: f64,
    pub gamma_noise: GammaNoise,
    pub beta_model: ThreeSlopeModel,
}

impl Default for CellFreeConfig {
    fn default() -> Self {
        Self {
            n_aps: 100,
            antennas_per_ap: 4,
            n_ues: 30,
            side_m: 1000.0,
            wrap_around: true,
            tau_c: 200,
            tau_p: 16,
            tau_u: 92,
            tau_d: 92,
            bandwidth_hz: 20e6,
            pilot_power_w: 0.1,
            p_max_ap_dl_w: 0.2,
            p_max_ul_w: 0.1,
            association: Association::Fcf,
            dl_power: DlPowerRule::Ppa,
            ul_power: UlPowerRule::Upa,
            noise_psd_dbm_hz: -174.0,
            noise_figure_ue_db: 9.0,
            noise_figure_ap_db: 9.0,
            gamma_noise: GammaNoise::Ue,
            beta_model: ThreeSlopeModel::default(),
        }
    }
}

/// Default fractional exponents and open-loop target.
pub const FPA_DL_ALPHA: f64 = -0.5;
pub const FPA_UL_ALPHA: f64 = 0.5;
pub const FPA_UL_P0_DBM: f64 = -10.0;

impl CellFreeConfig {
    /// The three systems of the equal-power uplink / proportional downlink
    /// comparison: FCF, UC(10) and a 4-site cellular baseline with 100
    /// antennas and 5 W per site.
    pub fn with_system(association: Association) -> Self {
        let mut cfg = Self {
            association,
            ..Self::default()
        };
        if let Association::Mmimo { n_sites, .. } = association {
            cfg.p_max_ap_dl_w = cfg.n_aps as f64 * cfg.p_max_ap_dl_w / n_sites as f64;
        }
        cfg
    }

    /// Fractional power control in both directions with the default exponents.
    pub fn fractional(mut self) -> Self {
        self.dl_power = DlPowerRule::Fpa { alpha: FPA_DL_ALPHA };
        self.ul_power = UlPowerRule::Fpa {
            p0_w: dbm_to_watts(FPA_UL_P0_DBM),
            alpha: FPA_UL_ALPHA,
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ues == 0 {
            return Err(Error::arg("n_ues", "must be at least 1"));
        }
        if self.tau_p == 0 {
            return Err(Error::arg("tau_p", "must be at least 1"));
        }
        if self.tau_p + self.tau_u + self.tau_d > self.tau_c {
            return Err(Error::arg("tau_c", "τ_p + τ_u + τ_d exceeds the coherence block"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::arg("bandwidth_hz", "must be positive"));
        }
        if !(self.pilot_power_w >= 0.0 && self.p_max_ap_dl_w >= 0.0 && self.p_max_ul_w >= 0.0) {
            return Err(Error::arg("power", "powers must be non-negative"));
        }
        Region::new(self.side_m, self.wrap_around)?;
        match self.association {
            Association::Fcf => self.require_aps()?,
            Association::Uc { n_uc } => {
                self.require_aps()?;
                if n_uc == 0 || n_uc > self.n_aps {
                    return Err(Error::arg("n_uc", format!("must lie in [1, {}]", self.n_aps)));
                }
            }
            Association::Mmimo {
                n_sites,
                antennas_per_site,
            } => {
                let side = (n_sites as f64).sqrt().round() as usize;
                if n_sites == 0 || side * side != n_sites {
                    return Err(Error::arg("n_sites", "must be a perfect square"));
                }
                if antennas_per_site == 0 {
                    return Err(Error::arg("antennas_per_site", "must be at least 1"));
                }
            }
        }
        Ok(())
    }

    fn require_aps(&self) -> Result<()> {
        if self.n_aps == 0 || self.antennas_per_ap == 0 {
            return Err(Error::arg("n_aps", "need at least one AP with one antenna"));
        }
        Ok(())
    }

    /// Number of transmitting nodes and antennas per node.
    pub fn layout(&self) -> (usize, usize) {
        match self.association {
            Association::Mmimo {
                n_sites,
                antennas_per_site,
            } => (n_sites, antennas_per_site),
            _ => (self.n_aps, self.antennas_per_ap),
        }
    }

    pub fn pilot_energy(&self) -> f64 {
        self.tau_p as f64 * self.pilot_power_w
    }

    pub fn noise_ue_w(&self) -> Result<f64> {
        Ok(noise_power(&NoiseSpec::new(self.noise_psd_dbm_hz, self.bandwidth_hz, self.noise_figure_ue_db)?))
    }

    pub fn noise_ap_w(&self) -> Result<f64> {
        Ok(noise_power(&NoiseSpec::new(self.noise_psd_dbm_hz, self.bandwidth_hz, self.noise_figure_ap_db)?))
    }
}

/// Everything needed to evaluate the rate bounds for one network realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropState {
    pub n_antennas: usize,
    /// `beta[k][m]`.
    pub beta: Vec<Vec<f64>>,
    /// `gamma[k][m]`.
    pub gamma: Vec<Vec<f64>>,
    pub pilot_of: Vec<usize>,
    /// `P_k`, sorted.
    pub pilot_sets: Vec<Vec<usize>>,
    /// `M_k`, in association order.
    pub serving: Vec<Vec<usize>>,
    /// `K_m`, sorted.
    pub served: Vec<Vec<usize>>,
    /// Pilot energies `η_k`.
    pub eta_pilot: Vec<f64>,
    /// `eta_dl[k][m]`, zero when `m ∉ M_k`.
    pub eta_dl: Vec<Vec<f64>>,
    pub eta_ul: Vec<f64>,
    /// `σ²_{z,k}`.
    pub noise_ue: Vec<f64>,
    /// `σ²_{w,m}`.
    pub noise_ap: Vec<f64>,
}

impl DropState {
    pub fn n_ues(&self) -> usize {
        self.beta.len()
    }

    pub fn n_aps(&self) -> usize {
        self.beta.first().map_or(0, Vec::len)
    }
}

/// Balanced pilot assignment: a random UE order, then pilot `i mod τ_p` for
/// the `i`-th UE in that order.
pub fn assign_pilots(n_ues: usize, tau_p: usize, rng: &mut SimRng) -> Result<(Vec<usize>, Vec<Vec<usize>>)> {
    if tau_p == 0 {
        return Err(Error::arg("tau_p", "must be at least 1"));
    }
    let mut order: Vec<usize> = (0..n_ues).collect();
    order.shuffle(rng);
    let mut pilot_of = vec![0; n_ues];
    for (i, k) in order.iter().enumerate() {
        pilot_of[*k] = i % tau_p;
    }
    let sets = pilot_sets(&pilot_of);
    Ok((pilot_of, sets))
}

/// `P_k = {j : pilot_of[j] = pilot_of[k]}`.
pub fn pilot_sets(pilot_of: &[usize]) -> Vec<Vec<usize>> {
    pilot_of
        .iter()
        .map(|p| (0..pilot_of.len()).filter(|j| pilot_of[*j] == *p).collect())
        .collect()
}

/// `γ_{k,m} = η_k β²_{k,m} / (Σ_{i∈P_k} η_i β_{i,m} + σ²)` where `σ²` is
/// `noise[k]` or `noise[m]` depending on `which`.
pub fn estimate_quality(
    beta: &[Vec<f64>],
    pilot_sets: &[Vec<usize>],
    eta_pilot: &[f64],
    noise_ue: &[f64],
    noise_ap: &[f64],
    which: GammaNoise,
) -> Result<Vec<Vec<f64>>> {
    let k_count = beta.len();
    if pilot_sets.len() != k_count || eta_pilot.len() != k_count || noise_ue.len() != k_count {
        return Err(Error::LengthMismatch {
            expected: k_count,
            got: pilot_sets.len().min(eta_pilot.len()).min(noise_ue.len()),
        });
    }
    let m_count = beta.first().map_or(0, Vec::len);
    if noise_ap.len() != m_count {
        return Err(Error::LengthMismatch {
            expected: m_count,
            got: noise_ap.len(),
        });
    }
    Ok((0..k_count)
        .map(|k| {
            (0..m_count)
                .map(|m| {
                    let contamination: f64 = pilot_sets[k].iter().map(|i| eta_pilot[*i] * beta[*i][m]).sum();
                    let noise = match which {
                        GammaNoise::Ue => noise_ue[k],
                        GammaNoise::Ap => noise_ap[m],
                    };
                    let denom = contamination + noise;
                    if denom > 0.0 {
                        eta_pilot[k] * beta[k][m] * beta[k][m] / denom
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect())
}

/// APs of one UE sorted by decreasing β, ties by index.
fn sorted_aps(row: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|a, b| row[*b].total_cmp(&row[*a]).then(a.cmp(b)));
    idx
}

/// Serving sets `M_k` and served sets `K_m`.
pub fn associate(beta: &[Vec<f64>], mode: Association) -> Result<(Vec<Vec<usize>>, Vec<Vec<usize>>)> {
    let m_count = beta.first().map_or(0, Vec::len);
    if m_count == 0 {
        return Err(Error::NoCandidates);
    }
    let take = match mode {
        Association::Fcf => m_count,
        Association::Uc { n_uc } => {
            if n_uc == 0 || n_uc > m_count {
                return Err(Error::arg("n_uc", format!("must lie in [1, {m_count}]")));
            }
            n_uc
        }
        Association::Mmimo { .. } => 1,
    };
    let serving: Vec<Vec<usize>> = beta
        .iter()
        .map(|row| match mode {
            Association::Fcf => (0..m_count).collect(),
            _ => sorted_aps(row).into_iter().take(take).collect(),
        })
        .collect();
    Ok((serving.clone(), served_sets(&serving, m_count)))
}

/// `K_m = {k : m ∈ M_k}`.
pub fn served_sets(serving: &[Vec<usize>], n_aps: usize) -> Vec<Vec<usize>> {
    let mut served = vec![Vec::new(); n_aps];
    for (k, aps) in serving.iter().enumerate() {
        for m in aps {
            served[*m].push(k);
        }
    }
    served
}

/// Downlink powers `eta_dl[k][m]`.
pub fn allocate_dl(gamma: &[Vec<f64>], served: &[Vec<usize>], rule: DlPowerRule, p_max: f64) -> Vec<Vec<f64>> {
    let k_count = gamma.len();
    let mut eta = vec![vec![0.0; served.len()]; k_count];
    for (m, users) in served.iter().enumerate() {
        if users.is_empty() {
            continue;
        }
        let weight = |k: usize| match rule {
            DlPowerRule::Ppa => gamma[k][m],
            DlPowerRule::Fpa { alpha } => gamma[k][m].powf(-alpha),
            DlPowerRule::Upa => 1.0,
        };
        let total: f64 = users.iter().map(|k| weight(*k)).sum();
        for k in users {
            eta[*k][m] = if total > 0.0 && total.is_finite() {
                p_max * weight(*k) / total
            } else {
                p_max / users.len() as f64
            };
        }
    }
    eta
}

/// `γ̄_k = √(Σ_{m∈M_k} γ_{k,m})`.
pub fn gamma_bar(gamma: &[Vec<f64>], serving: &[Vec<usize>]) -> Vec<f64> {
    gamma
        .iter()
        .zip(serving)
        .map(|(row, aps)| aps.iter().map(|m| row[*m]).sum::<f64>().sqrt())
        .collect()
}

/// Uplink data powers `eta_ul[k]`.
pub fn allocate_ul(gamma_bar: &[f64], rule: UlPowerRule, p_max: f64) -> Vec<f64> {
    gamma_bar
        .iter()
        .map(|g| match rule {
            UlPowerRule::Upa => p_max,
            UlPowerRule::Fpa { p0_w, alpha } => {
                let target = p0_w * g.powf(-alpha);
                if target.is_nan() {
                    p_max
                } else {
                    p_max.min(target)
                }
            }
        })
        .collect()
}

fn rate(prelog: f64, sinr: f64) -> f64 {
    prelog * (1.0 + sinr).log2()
}

/// Downlink bound for UE `k`, in bits/s.
pub fn dl_rate(k: usize, drop: &DropState, bandwidth_hz: f64, tau_d: usize, tau_c: usize) -> f64 {
    let n = drop.n_antennas as f64;
    let gamma = &drop.gamma[k];
    let coherent: f64 = drop.serving[k]
        .iter()
        .map(|m| (drop.eta_dl[k][*m] * gamma[*m]).sqrt())
        .sum();
    let signal = n * coherent * coherent;
    if signal <= 0.0 {
        return 0.0;
    }
    let interference: f64 = (0..drop.n_ues())
        .flat_map(|j| drop.serving[j].iter().map(move |m| (j, *m)))
        .map(|(j, m)| drop.eta_dl[j][m] * drop.beta[k][m])
        .sum();
    let contamination: f64 = drop.pilot_sets[k]
        .iter()
        .filter(|j| **j != k)
        .map(|j| {
            let s: f64 = drop.serving[*j]
                .iter()
                .map(|m| (drop.eta_dl[*j][*m] * gamma[*m]).sqrt())
                .sum();
            n * s * s
        })
        .sum();
    let sinr = signal / (interference + contamination + drop.noise_ue[k]);
    rate(bandwidth_hz * tau_d as f64 / tau_c as f64, sinr)
}

/// Uplink bound for UE `k`, in bits/s.
pub fn ul_rate(k: usize, drop: &DropState, bandwidth_hz: f64, tau_u: usize, tau_c: usize) -> f64 {
    let n = drop.n_antennas as f64;
    let aps = &drop.serving[k];
    let gamma = &drop.gamma[k];
    let coherent: f64 = aps.iter().map(|m| gamma[*m]).sum();
    let signal = drop.eta_ul[k] * n * coherent * coherent;
    if signal <= 0.0 {
        return 0.0;
    }
    let interference: f64 = (0..drop.n_ues())
        .map(|j| drop.eta_ul[j] * aps.iter().map(|m| drop.beta[j][*m] * gamma[*m]).sum::<f64>())
        .sum();
    let contamination: f64 = drop.pilot_sets[k]
        .iter()
        .filter(|j| **j != k)
        .map(|j| {
            let ratio = (drop.eta_pilot[*j] / drop.eta_pilot[k]).sqrt();
            let s: f64 = aps
                .iter()
                .map(|m| gamma[*m] * ratio * drop.beta[*j][*m] / drop.beta[k][*m])
                .sum();
            n * drop.eta_ul[*j] * s * s
        })
        .sum();
    let noise: f64 = aps.iter().map(|m| drop.noise_ap[*m] * gamma[*m]).sum();
    let sinr = signal / (interference + contamination + noise);
    rate(bandwidth_hz * tau_u as f64 / tau_c as f64, sinr)
}

/// Node positions: uniform for distributed APs, a centred square grid for the
/// cellular baseline.
pub fn place_aps(cfg: &CellFreeConfig, rng: &mut SimRng) -> Result<Vec<Point2D<f64>>> {
    let region = Region::new(cfg.side_m, cfg.wrap_around)?;
    Ok(match cfg.association {
        Association::Mmimo { n_sites, .. } => {
            let per_side = (n_sites as f64).sqrt().round() as usize;
            let step = cfg.side_m / per_side as f64;
            (0..per_side)
                .flat_map(|i| {
                    (0..per_side).map(move |j| Point2D::new((i as f64 + 0.5) * step, (j as f64 + 0.5) * step))
                })
                .collect()
        }
        _ => (0..cfg.n_aps).map(|_| region.uniform_point(rng)).collect(),
    })
}

/// Builds one network realization from the drop's random stream.
pub fn generate_drop(cfg: &CellFreeConfig, stream: RngStream) -> Result<DropState> {
    cfg.validate()?;
    let mut rng = stream.rng();
    let region = Region::new(cfg.side_m, cfg.wrap_around)?;
    let aps = place_aps(cfg, &mut rng)?;
    let ues: Vec<Point2D<f64>> = (0..cfg.n_ues).map(|_| region.uniform_point(&mut rng)).collect();
    let beta: Vec<Vec<f64>> = ues
        .iter()
        .map(|u| {
            aps.iter()
                .map(|a| {
                    let d = cfg.beta_model.distance_3d(region.distance(u, a));
                    cellfree_beta(d, &cfg.beta_model, &mut rng)
                })
                .collect()
        })
        .collect();
    let (pilot_of, sets) = assign_pilots(cfg.n_ues, cfg.tau_p, &mut rng)?;
    build_drop(cfg, beta, pilot_of, sets)
}

/// Completes a drop from given large-scale gains and pilots.
pub fn build_drop(
    cfg: &CellFreeConfig,
    beta: Vec<Vec<f64>>,
    pilot_of: Vec<usize>,
    pilot_sets: Vec<Vec<usize>>,
) -> Result<DropState> {
    let (m_count, n_antennas) = (beta.first().map_or(0, Vec::len), cfg.layout().1);
    let k_count = beta.len();
    let eta_pilot = vec![cfg.pilot_energy(); k_count];
    let noise_ue = vec![cfg.noise_ue_w()?; k_count];
    let noise_ap = vec![cfg.noise_ap_w()?; m_count];
    let gamma = estimate_quality(&beta, &pilot_sets, &eta_pilot, &noise_ue, &noise_ap, cfg.gamma_noise)?;
    let (serving, served) = associate(&beta, cfg.association)?;
    let eta_dl = allocate_dl(&gamma, &served, cfg.dl_power, cfg.p_max_ap_dl_w);
    let eta_ul = allocate_ul(&gamma_bar(&gamma, &serving), cfg.ul_power, cfg.p_max_ul_w);
    Ok(DropState {
        n_antennas,
        beta,
        gamma,
        pilot_of,
        pilot_sets,
        serving,
        served,
        eta_pilot,
        eta_dl,
        eta_ul,
        noise_ue,
        noise_ap,
    })
}

/// Per-UE (downlink, uplink) rates of one drop.
pub fn drop_rates(cfg: &CellFreeConfig, drop: &DropState) -> Vec<(f64, f64)> {
    (0..drop.n_ues())
        .map(|k| {
            (
                dl_rate(k, drop, cfg.bandwidth_hz, cfg.tau_d, cfg.tau_c),
                ul_rate(k, drop, cfg.bandwidth_hz, cfg.tau_u, cfg.tau_c),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    /// `rates[drop][ue] = (dl, ul)` in bits/s.
    pub rates: Vec<Vec<(f64, f64)>>,
    pub dl: RateStats,
    pub ul: RateStats,
}

/// Independent drops, drop `d` drawing from `RngStream::new(seed, d)`.
pub fn run_campaign(cfg: &CellFreeConfig, n_drops: usize, seed: u64) -> Result<CampaignResult> {
    cfg.validate()?;
    if n_drops == 0 {
        return Err(Error::arg("n_drops", "must be at least 1"));
    }
    let rates: Vec<Vec<(f64, f64)>> = (0..n_drops)
        .into_par_iter()
        .map(|d| {
            let drop = generate_drop(cfg, RngStream::new(seed, d as u64))?;
            let r = drop_rates(cfg, &drop);
            if r.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
                return Err(Error::Numerical(format!("non-finite rate in drop {d}")));
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let dl = RateStats::from_samples(rates.iter().flatten().map(|r| r.0).collect())?;
    let ul = RateStats::from_samples(rates.iter().flatten().map(|r| r.1).collect())?;
    Ok(CampaignResult { rates, dl, ul })
}
