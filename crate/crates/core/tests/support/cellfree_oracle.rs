//! Direct transcription of the cell-free rate bounds over dense indicator
//! matrices, kept independent of the library's set-based evaluation.

#![allow(dead_code)]

use rand::Rng;
use tbench_core::cellfree::DropState;
use tbench_core::rng::SimRng;

pub struct Instance {
    pub n: usize,
    pub beta: Vec<Vec<f64>>,
    pub pilot_of: Vec<usize>,
    pub eta_pilot: Vec<f64>,
    pub noise_ue: Vec<f64>,
    pub noise_ap: Vec<f64>,
    /// `serve[k][m]` is 1.0 iff AP `m` serves UE `k`.
    pub serve: Vec<Vec<f64>>,
    pub eta_dl: Vec<Vec<f64>>,
    pub eta_ul: Vec<f64>,
}

fn log_uniform(rng: &mut SimRng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..hi.log10()))
}

/// Random instance with `m` APs, `k` UEs, `n` antennas per AP and `tau_p`
/// pilots; every UE is served by a random non-empty AP subset.
pub fn random_instance(rng: &mut SimRng, m: usize, k: usize, n: usize, tau_p: usize) -> Instance {
    let beta = (0..k).map(|_| (0..m).map(|_| log_uniform(rng, 1e-12, 1e-7)).collect()).collect();
    let pilot_of = (0..k).map(|_| rng.random_range(0..tau_p)).collect();
    let eta_pilot = (0..k).map(|_| log_uniform(rng, 0.1, 2.0)).collect();
    let noise_ue = (0..k).map(|_| log_uniform(rng, 1e-14, 1e-12)).collect();
    let noise_ap = (0..m).map(|_| log_uniform(rng, 1e-14, 1e-12)).collect();
    let serve: Vec<Vec<f64>> = (0..k)
        .map(|_| loop {
            let row: Vec<f64> = (0..m).map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 }).collect();
            if row.iter().sum::<f64>() > 0.0 {
                break row;
            }
        })
        .collect();
    let eta_dl = serve
        .iter()
        .map(|row| row.iter().map(|s| s * log_uniform(rng, 1e-3, 1.0)).collect())
        .collect();
    let eta_ul = (0..k).map(|_| log_uniform(rng, 1e-3, 0.1)).collect();
    Instance {
        n,
        beta,
        pilot_of,
        eta_pilot,
        noise_ue,
        noise_ap,
        serve,
        eta_dl,
        eta_ul,
    }
}

fn same_pilot(inst: &Instance, i: usize, k: usize) -> f64 {
    if inst.pilot_of[i] == inst.pilot_of[k] {
        1.0
    } else {
        0.0
    }
}

/// Channel-estimate quality with the UE noise (or the AP noise) in the
/// denominator.
pub fn gamma(inst: &Instance, ap_noise: bool) -> Vec<Vec<f64>> {
    let (k_count, m_count) = (inst.beta.len(), inst.beta[0].len());
    let mut g = vec![vec![0.0; m_count]; k_count];
    for k in 0..k_count {
        for m in 0..m_count {
            let mut denom = if ap_noise { inst.noise_ap[m] } else { inst.noise_ue[k] };
            for i in 0..k_count {
                denom += same_pilot(inst, i, k) * inst.eta_pilot[i] * inst.beta[i][m];
            }
            g[k][m] = inst.eta_pilot[k] * inst.beta[k][m].powi(2) / denom;
        }
    }
    g
}

pub fn dl_sinr(inst: &Instance, g: &[Vec<f64>], k: usize) -> f64 {
    let (k_count, m_count) = (inst.beta.len(), inst.beta[0].len());
    let n = inst.n as f64;
    let coherent = |j: usize| -> f64 {
        let mut s = 0.0;
        for m in 0..m_count {
            s += inst.serve[j][m] * (inst.eta_dl[j][m] * g[k][m]).sqrt();
        }
        s
    };
    let mut interference = 0.0;
    for j in 0..k_count {
        for m in 0..m_count {
            interference += inst.serve[j][m] * inst.eta_dl[j][m] * inst.beta[k][m];
        }
    }
    let mut contamination = 0.0;
    for j in 0..k_count {
        if j != k {
            contamination += same_pilot(inst, j, k) * n * coherent(j).powi(2);
        }
    }
    n * coherent(k).powi(2) / (interference + contamination + inst.noise_ue[k])
}

pub fn ul_sinr(inst: &Instance, g: &[Vec<f64>], k: usize) -> f64 {
    let (k_count, m_count) = (inst.beta.len(), inst.beta[0].len());
    let n = inst.n as f64;
    let mut coherent = 0.0;
    let mut noise = 0.0;
    for m in 0..m_count {
        coherent += inst.serve[k][m] * g[k][m];
        noise += inst.serve[k][m] * inst.noise_ap[m] * g[k][m];
    }
    let mut interference = 0.0;
    for j in 0..k_count {
        for m in 0..m_count {
            interference += inst.eta_ul[j] * inst.serve[k][m] * inst.beta[j][m] * g[k][m];
        }
    }
    let mut contamination = 0.0;
    for j in 0..k_count {
        if j == k {
            continue;
        }
        let mut s = 0.0;
        for m in 0..m_count {
            s += inst.serve[k][m] * g[k][m] * (inst.eta_pilot[j] / inst.eta_pilot[k]).sqrt() * inst.beta[j][m] / inst.beta[k][m];
        }
        contamination += same_pilot(inst, j, k) * n * inst.eta_ul[j] * s * s;
    }
    inst.eta_ul[k] * n * coherent * coherent / (interference + contamination + noise)
}

pub fn rate(bandwidth_hz: f64, tau: usize, tau_c: usize, sinr: f64) -> f64 {
    bandwidth_hz * tau as f64 / tau_c as f64 * (1.0 + sinr).log2()
}

/// Library drop state for an instance, with `gamma` filled in by the caller.
pub fn to_drop(inst: &Instance, gamma: Vec<Vec<f64>>) -> DropState {
    let (k_count, m_count) = (inst.beta.len(), inst.beta[0].len());
    let serving: Vec<Vec<usize>> = inst
        .serve
        .iter()
        .map(|row| (0..m_count).filter(|m| row[*m] > 0.0).collect())
        .collect();
    let served = (0..m_count)
        .map(|m| (0..k_count).filter(|k| inst.serve[*k][m] > 0.0).collect())
        .collect();
    DropState {
        n_antennas: inst.n,
        beta: inst.beta.clone(),
        gamma,
        pilot_of: inst.pilot_of.clone(),
        pilot_sets: tbench_core::cellfree::pilot_sets(&inst.pilot_of),
        serving,
        served,
        eta_pilot: inst.eta_pilot.clone(),
        eta_dl: inst.eta_dl.clone(),
        eta_ul: inst.eta_ul.clone(),
        noise_ue: inst.noise_ue.clone(),
        noise_ap: inst.noise_ap.clone(),
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Worst relative error between the library and the oracle over `count`
/// random instances with `M, K <= 3` and `N_AP <= 2`.
pub fn worst_error(seed: u64, count: usize) -> f64 {
    use tbench_core::cellfree::{dl_rate, estimate_quality, ul_rate, GammaNoise};
    let mut rng = tbench_core::RngStream::new(seed, 0).rng();
    let (b, tau_c, tau_d, tau_u) = (20e6, 200, 92, 92);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let m = rng.random_range(1..=3);
        let k = rng.random_range(1..=3);
        let n = rng.random_range(1..=2);
        let tau_p = rng.random_range(1..=3);
        let inst = random_instance(&mut rng, m, k, n, tau_p);
        for (ap_noise, which) in [(false, GammaNoise::Ue), (true, GammaNoise::Ap)] {
            let g = gamma(&inst, ap_noise);
            let sets = tbench_core::cellfree::pilot_sets(&inst.pilot_of);
            let lib_g = estimate_quality(&inst.beta, &sets, &inst.eta_pilot, &inst.noise_ue, &inst.noise_ap, which).unwrap();
            for (ra, rb) in g.iter().zip(&lib_g) {
                for (x, y) in ra.iter().zip(rb) {
                    worst = worst.max(rel_err(*x, *y));
                }
            }
            let drop = to_drop(&inst, lib_g);
            for kk in 0..k {
                worst = worst.max(rel_err(dl_rate(kk, &drop, b, tau_d, tau_c), rate(b, tau_d, tau_c, dl_sinr(&inst, &g, kk))));
                worst = worst.max(rel_err(ul_rate(kk, &drop, b, tau_u, tau_c), rate(b, tau_u, tau_c, ul_sinr(&inst, &g, kk))));
            }
        }
    }
    worst
}
