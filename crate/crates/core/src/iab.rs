//! Two-tier mmWave HetNet with integrated access and backhaul.
//!
//! Macro (MBS) and small (SBS) base stations and UEs are finite Poisson
//! processes over a square region with germ-grain wall blockage. UEs attach to
//! the node with the largest average received power. SBSs are either
//! fiber-connected or wirelessly backhauled (IAB) from the strongest MBS over a
//! noise-limited link. A backhauled SBS splits its band between access and
//! backhaul in proportion to its access load and its backhaul demand, and a
//! UE's end-to-end rate is the smaller of its access and backhaul shares.
//!
//! SBS positions are drawn once from a ceiling-density process and thinned by a
//! uniform mark, and fiber connectivity is a second mark. Sweeps over SBS
//! density or fiber fraction therefore reuse the same drop realisations.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{is_los, sample_blockages, sample_fhppp, BlockageField, BlockageIndex, Point2D, Region};
use crate::propagation::{closein_pathloss, noise_power, CloseInParams, NoiseSpec};
use crate::rng::RngStream;
use crate::scalar::{db_to_linear, dbm_to_watts, wrap_pi, Real};
use crate::stats::{wilson_interval, Z95};

/// Sectored (flat-top) antenna pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaPattern<T> {
    /// Main-lobe gain in dBi.
    pub g0_dbi: T,
    /// Side-lobe gain in dBi.
    pub g_side_dbi: T,
    /// Half-power beamwidth in radians.
    pub hpbw_rad: T,
}

impl<T: Real> AntennaPattern<T> {
    pub fn new(g0_dbi: T, g_side_dbi: T, hpbw_rad: T) -> Result<Self> {
        if !(g0_dbi >= g_side_dbi) {
            return Err(Error::arg("g0_dbi", "main lobe must not be below the side lobe"));
        }
        if !(hpbw_rad > T::zero() && hpbw_rad <= T::TAU()) {
            return Err(Error::arg("hpbw_rad", "must lie in (0, 2π]"));
        }
        Ok(Self {
            g0_dbi,
            g_side_dbi,
            hpbw_rad,
        })
    }

    /// Main-lobe gain, linear.
    pub fn peak(&self) -> T {
        db_to_linear(self.g0_dbi)
    }
}

impl Default for AntennaPattern<f64> {
    /// 18 dBi main lobe, -2 dBi side lobe, 30° beamwidth.
    fn default() -> Self {
        Self {
            g0_dbi: 18.0,
            g_side_dbi: -2.0,
            hpbw_rad: 30f64.to_radians(),
        }
    }
}

/// Linear gain at angle `phi` off boresight. The main lobe is the closed
/// interval `[-θ/2, θ/2]`.
pub fn antenna_gain<T: Real>(phi: T, pattern: &AntennaPattern<T>) -> T {
    if wrap_pi(phi).abs() <= pattern.hpbw_rad * T::lit(0.5) {
        db_to_linear(pattern.g0_dbi)
    } else {
        db_to_linear(pattern.g_side_dbi)
    }
}

/// A transmitting or receiving node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Radio {
    pub position: Point2D<f64>,
    pub power_dbm: f64,
    /// `None` for an omnidirectional 0 dBi antenna.
    pub pattern: Option<AntennaPattern<f64>>,
    /// Boresight direction in radians.
    pub boresight: f64,
}

impl Radio {
    pub fn omni(position: Point2D<f64>, power_dbm: f64) -> Self {
        Self {
            position,
            power_dbm,
            pattern: None,
            boresight: 0.0,
        }
    }

    pub fn sectored(position: Point2D<f64>, power_dbm: f64, pattern: AntennaPattern<f64>, boresight: f64) -> Self {
        Self {
            position,
            power_dbm,
            pattern: Some(pattern),
            boresight,
        }
    }

    /// Same radio with its boresight steered at `target`.
    pub fn steered_at(mut self, target: &Point2D<f64>) -> Self {
        self.boresight = self.position.bearing_to(target);
        self
    }

    fn gain_towards(&self, target: &Point2D<f64>) -> f64 {
        match &self.pattern {
            None => 1.0,
            Some(p) => antenna_gain(self.position.bearing_to(target) - self.boresight, p),
        }
    }
}

/// Close-in path loss with the 1 m reference distance as a floor.
fn pathloss_linear(r: f64, closein: &CloseInParams<f64>, los: bool) -> f64 {
    let pl = closein_pathloss(r.max(1.0), closein, los).expect("distance floored at 1 m");
    db_to_linear(-pl)
}

fn link_power(tx: &Radio, rx: &Radio, closein: &CloseInParams<f64>, los: bool) -> f64 {
    let r = tx.position.distance(&rx.position);
    dbm_to_watts(tx.power_dbm) * tx.gain_towards(&rx.position) * rx.gain_towards(&tx.position) * pathloss_linear(r, closein, los)
}

/// Fading-free received power in watts: `P_t G_t G_r 10^{-PL/10}`, with the
/// LoS or NLoS exponent chosen by the wall field.
pub fn average_power(tx: &Radio, rx: &Radio, field: &BlockageField<f64>, closein: &CloseInParams<f64>) -> f64 {
    link_power(tx, rx, closein, is_los(&tx.position, &rx.position, field))
}

/// Received power with a unit-mean Rayleigh power draw applied.
pub fn received_power<R: Rng + ?Sized>(
    tx: &Radio,
    rx: &Radio,
    field: &BlockageField<f64>,
    closein: &CloseInParams<f64>,
    rng: &mut R,
) -> f64 {
    let h: f64 = Exp1.sample(rng);
    average_power(tx, rx, field, closein) * h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Macro,
    Small,
}

/// Serving node of a UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Serving {
    pub tier: Tier,
    pub index: usize,
}

/// Two-tier network parameters. Densities are per km².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HetNetConfig {
    pub mbs_density: f64,
    pub sbs_density: f64,
    pub ue_density: f64,
    pub fiber_fraction: f64,
    pub blockage_density: f64,
    pub wall_length_m: f64,
    pub side_m: f64,
    pub bandwidth_hz: f64,
    pub p_mbs_dbm: f64,
    pub p_sbs_dbm: f64,
    pub p_ue_dbm: f64,
    pub antenna: AntennaPattern<f64>,
    pub closein: CloseInParams<f64>,
    pub noise: NoiseSpec<f64>,
    pub rate_threshold_bps: f64,
    /// Density of the SBS candidate process that `sbs_density` thins.
    pub sbs_density_ceiling: f64,
    /// Backhaul demand per backhauled UE, in own-UE equivalents; coverage is
    /// reported for the best value on this grid.
    pub backhaul_weights: Vec<f64>,
}

impl Default for HetNetConfig {
    fn default() -> Self {
        Self {
            mbs_density: 5.0,
            sbs_density: 60.0,
            ue_density: 105.0,
            fiber_fraction: 0.0,
            blockage_density: 200.0,
            wall_length_m: 5.0,
            side_m: 1000.0,
            bandwidth_hz: 1e9,
            p_mbs_dbm: 40.0,
            p_sbs_dbm: 24.0,
            p_ue_dbm: 0.0,
            antenna: AntennaPattern::default(),
            closein: CloseInParams {
                alpha_los: 2.0,
                alpha_nlos: 3.0,
                carrier_ghz: 28.0,
            },
            noise: NoiseSpec {
                psd_dbm_hz: -174.0,
                bandwidth_hz: 1e9,
                noise_figure_db: 9.0,
            },
            rate_threshold_bps: 100e6,
            sbs_density_ceiling: 250.0,
            backhaul_weights: vec![0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 2.0, 5.0],
        }
    }
}

impl HetNetConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mbs_density", self.mbs_density),
            ("sbs_density", self.sbs_density),
            ("ue_density", self.ue_density),
            ("blockage_density", self.blockage_density),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::arg(name, "must be non-negative and finite"));
            }
        }
        if !(0.0..=1.0).contains(&self.fiber_fraction) {
            return Err(Error::arg("fiber_fraction", "must lie in [0, 1]"));
        }
        if !(self.sbs_density <= self.sbs_density_ceiling) {
            return Err(Error::arg("sbs_density", "exceeds sbs_density_ceiling"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::arg("bandwidth_hz", "must be positive"));
        }
        if !(self.wall_length_m > 0.0) {
            return Err(Error::arg("wall_length_m", "must be positive"));
        }
        if !(self.rate_threshold_bps >= 0.0) {
            return Err(Error::arg("rate_threshold_bps", "must be non-negative"));
        }
        if self.backhaul_weights.is_empty() || self.backhaul_weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::arg("backhaul_weights", "need at least one positive weight"));
        }
        AntennaPattern::new(self.antenna.g0_dbi, self.antenna.g_side_dbi, self.antenna.hpbw_rad)?;
        CloseInParams::new(self.closein.alpha_los, self.closein.alpha_nlos, self.closein.carrier_ghz)?;
        NoiseSpec::new(self.noise.psd_dbm_hz, self.noise.bandwidth_hz, self.noise.noise_figure_db)?;
        Region::new(self.side_m, false)?;
        Ok(())
    }

    /// Copy with every SBS fiber-connected.
    pub fn fiber_network(&self) -> Self {
        Self {
            fiber_fraction: 1.0,
            ..self.clone()
        }
    }

    /// Copy without SBSs.
    pub fn mbs_only(&self) -> Self {
        Self {
            sbs_density: 0.0,
            ..self.clone()
        }
    }

    fn mbs_radio(&self, position: Point2D<f64>, boresight: f64) -> Radio {
        Radio::sectored(position, self.p_mbs_dbm, self.antenna, boresight)
    }

    fn sbs_radio(&self, position: Point2D<f64>, boresight: f64) -> Radio {
        Radio::sectored(position, self.p_sbs_dbm, self.antenna, boresight)
    }
}

fn argmax_power(candidates: impl Iterator<Item = (f64, f64)>) -> Option<usize> {
    // (power, distance): larger power wins, then the nearer node
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, (p, d)) in candidates.enumerate() {
        match best {
            Some((_, bp, bd)) if p < bp || (p == bp && d >= bd) => {}
            _ => best = Some((i, p, d)),
        }
    }
    best.map(|b| b.0)
}

/// Max average received power association; BS beams are steered at the UE.
/// Ties go to the nearer node, then to the macro tier.
pub fn associate(
    ue: &Point2D<f64>,
    mbs: &[Point2D<f64>],
    sbs: &[Point2D<f64>],
    field: &BlockageField<f64>,
    cfg: &HetNetConfig,
) -> Result<Serving> {
    if mbs.is_empty() && sbs.is_empty() {
        return Err(Error::NoCandidates);
    }
    let rx = Radio::omni(*ue, cfg.p_ue_dbm);
    let nodes = mbs
        .iter()
        .map(|p| cfg.mbs_radio(*p, 0.0))
        .chain(sbs.iter().map(|p| cfg.sbs_radio(*p, 0.0)));
    let best = argmax_power(nodes.map(|tx| {
        let tx = tx.steered_at(ue);
        (average_power(&tx, &rx, field, &cfg.closein), tx.position.distance(ue))
    }))
    .expect("non-empty");
    Ok(if best < mbs.len() {
        Serving {
            tier: Tier::Macro,
            index: best,
        }
    } else {
        Serving {
            tier: Tier::Small,
            index: best - mbs.len(),
        }
    })
}

/// Splits `bandwidth_hz` between access and backhaul in proportion to the
/// access load (UE count) and the backhaul demand (UE equivalents). A
/// fiber-connected node keeps the whole band for access.
pub fn split_bandwidth(load: usize, backhaul_demand: f64, fiber: bool, bandwidth_hz: f64) -> Result<(f64, f64)> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::arg("bandwidth_hz", "must be positive"));
    }
    if !(backhaul_demand >= 0.0) {
        return Err(Error::arg("backhaul_demand", "must be non-negative"));
    }
    let load = load as f64;
    if fiber || load + backhaul_demand == 0.0 {
        return Ok((bandwidth_hz, 0.0));
    }
    let access = bandwidth_hz * load / (load + backhaul_demand);
    Ok((access, bandwidth_hz * backhaul_demand / (load + backhaul_demand)))
}

/// Node and wall realisation of one drop, at the ceiling SBS density.
#[derive(Debug, Clone)]
pub struct DropLayout {
    pub mbs: Vec<Point2D<f64>>,
    pub mbs_boresight: Vec<f64>,
    pub candidates: Vec<Point2D<f64>>,
    pub candidate_boresight: Vec<f64>,
    /// Thinning mark: candidate `i` is deployed iff `keep[i] < φ_S / φ_ceil`.
    pub keep: Vec<f64>,
    /// Fiber mark: a deployed SBS is fiber-connected iff `fiber[i] < fiber_fraction`.
    pub fiber: Vec<f64>,
    /// Rayleigh power of each candidate's backhaul link.
    pub backhaul_fading: Vec<f64>,
    pub ues: Vec<Point2D<f64>>,
    pub field: BlockageField<f64>,
    fading: RngStream,
}

pub fn sample_layout(cfg: &HetNetConfig, stream: RngStream) -> Result<DropLayout> {
    let region = Region::new(cfg.side_m, false)?;
    let angles = |n: usize, rng: &mut crate::rng::SimRng| (0..n).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect::<Vec<_>>();

    let mut rng = stream.child(0).rng();
    let mbs = sample_fhppp(cfg.mbs_density, &region, &mut rng)?;
    let mbs_boresight = angles(mbs.len(), &mut rng);

    let mut rng = stream.child(1).rng();
    let candidates = sample_fhppp(cfg.sbs_density_ceiling, &region, &mut rng)?;
    let n = candidates.len();
    let candidate_boresight = angles(n, &mut rng);
    let keep = (0..n).map(|_| rng.random::<f64>()).collect();
    let fiber = (0..n).map(|_| rng.random::<f64>()).collect();
    let backhaul_fading = (0..n).map(|_| Exp1.sample(&mut rng)).collect();

    let mut rng = stream.child(2).rng();
    let ues = sample_fhppp(cfg.ue_density, &region, &mut rng)?;

    let mut rng = stream.child(3).rng();
    let field = sample_blockages(cfg.blockage_density, cfg.wall_length_m, &region, &mut rng)?;

    Ok(DropLayout {
        mbs,
        mbs_boresight,
        candidates,
        candidate_boresight,
        keep,
        fiber,
        backhaul_fading,
        ues,
        field,
        fading: stream.child(4),
    })
}

/// Association and link quality of one drop at one SBS density.
#[derive(Debug, Clone, PartialEq)]
pub struct DropLinks {
    /// Deployed nodes: all MBSs, then the deployed SBSs.
    pub tier: Vec<Tier>,
    /// Fiber mark per node (unused for MBSs).
    pub fiber_mark: Vec<f64>,
    /// Backhaul parent (node index of an MBS) per SBS.
    pub parent: Vec<Option<usize>>,
    pub backhaul_snr: Vec<f64>,
    /// Serving node per UE.
    pub serving: Vec<Option<usize>>,
    pub sinr: Vec<f64>,
}

pub fn drop_links(cfg: &HetNetConfig, layout: &DropLayout) -> Result<DropLinks> {
    let region = Region::new(cfg.side_m, false)?;
    let index = BlockageIndex::new(&layout.field, &region, 50.0)?;
    let keep_below = if cfg.sbs_density_ceiling > 0.0 {
        cfg.sbs_density / cfg.sbs_density_ceiling
    } else {
        0.0
    };
    let n_mbs = layout.mbs.len();

    // deployed nodes with their index into the fading vector
    let mut radios = Vec::new();
    let mut fade_idx = Vec::new();
    let mut tier = Vec::new();
    let mut fiber_mark = Vec::new();
    let mut cand_of = Vec::new();
    for (i, p) in layout.mbs.iter().enumerate() {
        radios.push(cfg.mbs_radio(*p, layout.mbs_boresight[i]));
        fade_idx.push(i);
        tier.push(Tier::Macro);
        fiber_mark.push(0.0);
        cand_of.push(usize::MAX);
    }
    for (i, p) in layout.candidates.iter().enumerate() {
        if layout.keep[i] < keep_below {
            radios.push(cfg.sbs_radio(*p, layout.candidate_boresight[i]));
            fade_idx.push(n_mbs + i);
            tier.push(Tier::Small);
            fiber_mark.push(layout.fiber[i]);
            cand_of.push(i);
        }
    }

    let noise = noise_power(&cfg.noise);
    let g0 = cfg.antenna.peak();

    // noise-limited backhaul from the strongest MBS, both ends steered
    let mut parent = vec![None; radios.len()];
    let mut backhaul_snr = vec![0.0; radios.len()];
    for b in n_mbs..radios.len() {
        let sbs = &radios[b];
        let best = argmax_power(radios[..n_mbs].iter().map(|m| {
            let los = index.is_los(&m.position, &sbs.position);
            let r = m.position.distance(&sbs.position);
            (dbm_to_watts(m.power_dbm) * g0 * g0 * pathloss_linear(r, &cfg.closein, los), r)
        }));
        if let Some(m) = best {
            let los = index.is_los(&radios[m].position, &sbs.position);
            let r = radios[m].position.distance(&sbs.position);
            let p = dbm_to_watts(radios[m].power_dbm) * g0 * g0 * pathloss_linear(r, &cfg.closein, los);
            parent[b] = Some(m);
            backhaul_snr[b] = p * layout.backhaul_fading[cand_of[b]] / noise;
        }
    }

    let n_fade = n_mbs + layout.candidates.len();
    let mut serving = vec![None; layout.ues.len()];
    let mut sinr = vec![0.0; layout.ues.len()];
    let mut avg = vec![0.0; radios.len()];
    let mut intf = vec![0.0; radios.len()];
    let mut dist = vec![0.0; radios.len()];
    let mut fades = vec![0.0; n_fade];
    for (u, ue) in layout.ues.iter().enumerate() {
        let mut rng = layout.fading.child(u as u64).rng();
        for f in fades.iter_mut() {
            *f = Exp1.sample(&mut rng);
        }
        for (b, tx) in radios.iter().enumerate() {
            let r = tx.position.distance(ue);
            let pl = pathloss_linear(r, &cfg.closein, index.is_los(&tx.position, ue));
            let p = dbm_to_watts(tx.power_dbm) * pl;
            avg[b] = p * g0;
            intf[b] = p * tx.gain_towards(ue) * fades[fade_idx[b]];
            dist[b] = r;
        }
        if let Some(s) = argmax_power(avg.iter().copied().zip(dist.iter().copied())) {
            let interference: f64 = intf.iter().enumerate().filter(|(b, _)| *b != s).map(|(_, p)| p).sum();
            serving[u] = Some(s);
            sinr[u] = avg[s] * fades[fade_idx[s]] / (interference + noise);
        }
    }

    Ok(DropLinks {
        tier,
        fiber_mark,
        parent,
        backhaul_snr,
        serving,
        sinr,
    })
}

/// End-to-end rate of every UE for a fiber fraction and backhaul weight `ω`.
///
/// A wirelessly backhauled SBS with `n` UEs splits the band between access
/// and a backhaul demand of `ω n` UE equivalents, i.e. `W/(1+ω)` and
/// `Wω/(1+ω)`. Its parent MBS reaches each child on its own beam over the same
/// backhaul portion, and keeps the access portion for its own UEs. Fiber SBSs
/// and MBSs without backhauled children use the whole band for access. Rates
/// are shared equally among the UEs of a node; UEs without a serving node, or
/// behind an SBS without a parent, get rate 0.
pub fn ue_rates(links: &DropLinks, fiber_fraction: f64, omega: f64, bandwidth_hz: f64) -> Result<Vec<f64>> {
    let n = links.tier.len();
    let mut load = vec![0usize; n];
    for s in links.serving.iter().flatten() {
        load[*s] += 1;
    }
    let is_iab = |b: usize| links.tier[b] == Tier::Small && links.fiber_mark[b] >= fiber_fraction;
    let mut donor = vec![false; n];
    for b in 0..n {
        if is_iab(b) && load[b] > 0 {
            if let Some(m) = links.parent[b] {
                donor[m] = true;
            }
        }
    }
    let mut access_rate = vec![0.0; n];
    let mut backhaul_rate = vec![f64::INFINITY; n];
    for b in 0..n {
        if load[b] == 0 {
            continue;
        }
        let per_ue = 1.0 / load[b] as f64;
        let demand = omega * load[b] as f64;
        match links.tier[b] {
            Tier::Macro => {
                let (access, _) = split_bandwidth(load[b], if donor[b] { demand } else { 0.0 }, false, bandwidth_hz)?;
                access_rate[b] = access * per_ue;
            }
            Tier::Small => {
                let (access, backhaul) = split_bandwidth(load[b], demand, !is_iab(b), bandwidth_hz)?;
                access_rate[b] = access * per_ue;
                if is_iab(b) {
                    backhaul_rate[b] = match links.parent[b] {
                        None => 0.0,
                        Some(_) => backhaul * per_ue * (1.0 + links.backhaul_snr[b]).log2(),
                    };
                }
            }
        }
    }
    Ok(links
        .serving
        .iter()
        .zip(&links.sinr)
        .map(|(s, g)| match s {
            None => 0.0,
            Some(b) => (access_rate[*b] * (1.0 + g).log2()).min(backhaul_rate[*b]),
        })
        .collect())
}

/// Pooled coverage over UEs and drops, with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageEstimate {
    pub fiber_fraction: f64,
    pub sbs_density: f64,
    pub threshold_bps: f64,
    pub coverage: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub covered: u64,
    pub trials: u64,
    /// Backhaul weight that maximised coverage.
    pub backhaul_weight: f64,
}

impl CoverageEstimate {
    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

/// Coverage at every (fiber fraction, threshold) pair, from one set of drops.
/// Drop `d` uses stream `RngStream::new(seed, d)`, so calls with the same seed
/// see the same node, wall and fading realisations.
pub fn coverage_sweep(
    cfg: &HetNetConfig,
    fiber_fractions: &[f64],
    thresholds_bps: &[f64],
    n_drops: usize,
    seed: u64,
) -> Result<Vec<CoverageEstimate>> {
    cfg.validate()?;
    if n_drops == 0 {
        return Err(Error::arg("n_drops", "must be at least 1"));
    }
    if fiber_fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::arg("fiber_fractions", "must lie in [0, 1]"));
    }
    if thresholds_bps.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::arg("thresholds_bps", "must be non-negative"));
    }
    let weights = &cfg.backhaul_weights;
    let (nf, nw, nt) = (fiber_fractions.len(), weights.len(), thresholds_bps.len());

    // counts[f][w][t] of covered UEs, plus the UE total
    let per_drop = (0..n_drops)
        .into_par_iter()
        .map(|d| {
            let layout = sample_layout(cfg, RngStream::new(seed, d as u64))?;
            let links = drop_links(cfg, &layout)?;
            let mut counts = vec![0u64; nf * nw * nt];
            for (fi, ff) in fiber_fractions.iter().enumerate() {
                for (wi, w) in weights.iter().enumerate() {
                    let rates = ue_rates(&links, *ff, *w, cfg.bandwidth_hz)?;
                    for (ti, t) in thresholds_bps.iter().enumerate() {
                        counts[(fi * nw + wi) * nt + ti] = rates.iter().filter(|r| **r >= *t).count() as u64;
                    }
                }
            }
            Ok((counts, layout.ues.len() as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut counts = vec![0u64; nf * nw * nt];
    let mut trials = 0u64;
    for (c, n) in &per_drop {
        for (acc, x) in counts.iter_mut().zip(c) {
            *acc += x;
        }
        trials += n;
    }

    let mut out = Vec::with_capacity(nf * nt);
    for (fi, ff) in fiber_fractions.iter().enumerate() {
        for (ti, t) in thresholds_bps.iter().enumerate() {
            let mut best = 0;
            for wi in 1..nw {
                if counts[(fi * nw + wi) * nt + ti] > counts[(fi * nw + best) * nt + ti] {
                    best = wi;
                }
            }
            let covered = counts[(fi * nw + best) * nt + ti];
            let (ci_low, ci_high) = wilson_interval(covered, trials, Z95)?;
            out.push(CoverageEstimate {
                fiber_fraction: *ff,
                sbs_density: cfg.sbs_density,
                threshold_bps: *t,
                coverage: covered as f64 / trials as f64,
                ci_low,
                ci_high,
                covered,
                trials,
                backhaul_weight: weights[best],
            });
        }
    }
    Ok(out)
}

/// Coverage at the configured fiber fraction and rate threshold.
pub fn coverage_probability(cfg: &HetNetConfig, n_drops: usize, seed: u64) -> Result<CoverageEstimate> {
    Ok(coverage_sweep(cfg, &[cfg.fiber_fraction], &[cfg.rate_threshold_bps], n_drops, seed)?[0])
}

/// Outcome of an equivalent-density search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensitySearch {
    pub density: f64,
    pub estimate: CoverageEstimate,
    pub evaluations: usize,
}

/// SBS density at which the coverage of `cfg` reaches `target`, by bisection
/// over `bracket` on matched drops. Stops once the coverage is within one CI
/// width of the target or the bracket is narrower than `tol_density`.
pub fn equivalent_density(
    cfg: &HetNetConfig,
    target: f64,
    bracket: (f64, f64),
    tol_density: f64,
    n_drops: usize,
    seed: u64,
) -> Result<DensitySearch> {
    let (mut lo, mut hi) = bracket;
    if !(lo >= 0.0 && hi > lo && hi <= cfg.sbs_density_ceiling) {
        return Err(Error::arg("bracket", "need 0 <= low < high <= sbs_density_ceiling"));
    }
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::arg("target", "must lie in [0, 1]"));
    }
    if !(tol_density > 0.0) {
        return Err(Error::arg("tol_density", "must be positive"));
    }
    let eval = |density: f64| {
        let c = HetNetConfig {
            sbs_density: density,
            ..cfg.clone()
        };
        coverage_probability(&c, n_drops, seed)
    };
    let at_lo = eval(lo)?;
    let at_hi = eval(hi)?;
    let mut evaluations = 2;
    if target < at_lo.coverage || target > at_hi.coverage {
        return Err(Error::BracketExhausted {
            target,
            low: lo,
            high: hi,
            cov_low: at_lo.coverage,
            cov_high: at_hi.coverage,
        });
    }
    loop {
        let mid = 0.5 * (lo + hi);
        let est = eval(mid)?;
        evaluations += 1;
        if (est.coverage - target).abs() < est.ci_width() || hi - lo < tol_density {
            return Ok(DensitySearch {
                density: mid,
                estimate: est,
                evaluations,
            });
        }
        if est.coverage < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}
