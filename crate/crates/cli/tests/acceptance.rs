//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

#[path = "../../core/tests/support/cellfree_oracle.rs"]
mod oracle;

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use serde_json::Value;
use tbench::{execute, CampaignConfig, Overrides};
use tbench_core::budget::{terabit_budget, TERABIT};
use tbench_core::cellfree::CellFreeConfig;
use tbench_core::irs::{aligned_gain, composite_gain, optimal_phases, IrsLinkConfig};
use tbench_core::pqam::{
    mi_estimate, papr, papr_closed_form, ser_sweep, Detector, Modulation, PnChannelSpec, PqamConstellation,
    QamConstellation,
};
use tbench_core::thz::{
    condition_number, los_channel, normalized, optimal_separation, rayleigh_distance, wavelength, ArrayConfig,
};
use tbench_core::RngStream;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn campaign(body: &str, out: &Path) -> Value {
    let overrides = Overrides {
        output_dir: Some(out.to_path_buf()),
        ..Overrides::default()
    };
    let cfg = CampaignConfig::from_json(body, &overrides).expect("valid config");
    execute(&cfg).expect("campaign runs").summary
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rd = csv::Reader::from_path(path).expect("csv exists");
    let header = rd.headers().unwrap().iter().map(String::from).collect();
    let rows = rd.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn f(s: &str) -> f64 {
    s.parse().expect("numeric cell")
}

fn system<'a>(summary: &'a Value, label: &str) -> &'a Value {
    summary["results"]["systems"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["label"] == label)
        .unwrap_or_else(|| panic!("system {label}"))
}

fn pct(sys: &Value, dir: &str, level: &str) -> f64 {
    sys[format!("{dir}_percentiles_bps")][level].as_f64().unwrap()
}

fn c1_papr() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut m = 4;
    while m <= 256 {
        let mut g = 1;
        while g <= m {
            let c = PqamConstellation::<f64>::generate(m, g).unwrap();
            worst = worst.max(rel(papr(&c), papr_closed_form::<f64>(g)));
            count += 1;
            g *= 2;
        }
        m *= 2;
    }
    outcome(worst < 1e-12, format!("{count} (M, Γ) pairs, worst relative error {worst:.1e}"))
}

fn c2_rayleigh(tmp: &Path) -> Outcome {
    let small = rayleigh_distance(&ArrayConfig::symmetric((2, 2), 5e-3, 1e12, 1.0).unwrap());
    let large = rayleigh_distance(&ArrayConfig::symmetric((128, 128), 1e-3, 0.3e12, 1.0).unwrap());
    let e_small = rel(small, 1.0 / 3.0);
    let e_large = rel(large, 16.384);

    let mut e_inv: f64 = 0.0;
    for d in [0.1, 1.0, 3.7, 25.0] {
        for shape in [(1, 2), (2, 2), (4, 4), (1, 16), (16, 16)] {
            for fc in [0.14e12, 0.3e12, 1e12] {
                let n = shape.0 * shape.1;
                let delta = optimal_separation(d, n, wavelength(fc)).unwrap();
                let cfg = ArrayConfig::symmetric(shape, delta, fc, d).unwrap();
                e_inv = e_inv.max(rel(rayleigh_distance(&cfg), d));
            }
        }
    }

    let out = tmp.join("c2");
    campaign(r#"{"study":"thz","seed":1,"n_drops":1,"params":{"ber":{"snr_db":[0]}}}"#, &out);
    let (_, rows) = read_csv(&out.join("rayleigh.csv"));
    let mut by_shape: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for r in &rows {
        let n: usize = r[0].parse::<usize>().unwrap() * r[1].parse::<usize>().unwrap();
        match by_shape.iter_mut().find(|(m, _)| *m == n) {
            Some((_, v)) => v.push((f(&r[2]), f(&r[3]))),
            None => by_shape.push((n, vec![(f(&r[2]), f(&r[3]))])),
        }
    }
    let mono_delta = by_shape
        .iter()
        .all(|(_, v)| v.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1));
    by_shape.sort_by_key(|(n, _)| *n);
    let mono_size = by_shape
        .windows(2)
        .all(|w| w[0].1.iter().zip(&w[1].1).all(|(a, b)| a.0 == b.0 && b.1 > a.1));
    let pass = e_small < 1e-12 && e_large < 1e-12 && e_inv < 1e-12 && mono_delta && mono_size;
    outcome(
        pass,
        format!(
            "D_Ray {small:.6} m ({e_small:.1e}), {large:.6} m ({e_large:.1e}); inverse pair {e_inv:.1e}; \
             sweep monotone in delta {mono_delta}, in size {mono_size} ({} rows)",
            rows.len()
        ),
    )
}

fn c3_irs(tmp: &Path) -> Outcome {
    let mut rng = RngStream::new(33, 0).rng();
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let n = rng.random_range(0..=1024);
        let beta_d = 10f64.powf(rng.random_range(-12.0..-6.0));
        let beta_irs = 10f64.powf(rng.random_range(-17.0..-12.0));
        let cfg = IrsLinkConfig::new(
            beta_d,
            rng.random_range(0.0..TAU),
            beta_irs,
            (0..n).map(|_| rng.random_range(0.0..TAU)).collect(),
            (0..n).map(|_| rng.random_range(0.0..TAU)).collect(),
            0.01,
            1e-13,
        )
        .unwrap();
        let g = composite_gain(&cfg, &optimal_phases(&cfg)).unwrap();
        worst = worst.max(rel(g, aligned_gain(beta_d, beta_irs, n)));
    }

    let out = tmp.join("c3");
    let s = campaign(r#"{"study":"irs","seed":1}"#, &out);
    let cases = s["results"]["se_vs_n"].as_array().unwrap();
    let gain_of = |bd: f64| {
        cases
            .iter()
            .find(|c| c["beta_d_db"].as_f64() == Some(bd))
            .unwrap()["se_gain_at_max_n_bps_hz"]
            .as_f64()
            .unwrap()
    };
    let (g1, g2) = (gain_of(-100.0), gain_of(-75.0));

    let (_, rows) = read_csv(&out.join("data.csv"));
    let gains: Vec<f64> = rows.iter().map(|r| f(&r[2])).collect();
    let baseline = s["results"]["sweep"]["baseline_gain_db"].as_f64().unwrap();
    let mid = gains[gains.len() / 2];
    let (first, last) = (gains[0], gains[gains.len() - 1]);
    let above = gains.iter().all(|g| *g >= baseline);
    let pass = worst < 1e-12 && g1 - g2 >= 2.0 && first > mid && last > mid && above;
    outcome(
        pass,
        format!(
            "optimal-phase worst error {worst:.1e} on 10^4 configs; SE gain at N=1024 case 1 {g1:.2} vs case 2 {g2:.2} b/s/Hz; \
             sweep ends {first:.2}/{last:.2} dB > mid {mid:.2} dB, all >= {baseline} dB: {above}"
        ),
    )
}

fn c4_cellfree(tmp: &Path) -> Outcome {
    let worst = oracle::worst_error(2024, 1000);
    let s = campaign(r#"{"study":"cellfree","seed":2020,"n_drops":100}"#, &tmp.join("c4"));
    let (mm, fcf) = (system(&s, "mmimo"), system(&s, "fcf"));
    let (mm5, fcf5) = (pct(mm, "dl", "p5"), pct(fcf, "dl", "p5"));
    let (mm90, fcf90) = (pct(mm, "dl", "p90"), pct(fcf, "dl", "p90"));
    let fcf50 = pct(fcf, "dl", "p50");
    let model = s["assumptions"]["beta_model"].as_str().unwrap_or("").to_string();
    let a = mm5 < 1e6 && fcf5 > 8e6;
    let b = mm90 > fcf90;
    let c = rel(fcf50, 27.4e6) <= 0.30;
    let pass = worst < 1e-12 && a && b && c && model.starts_with("three-slope");
    outcome(
        pass,
        format!(
            "oracle worst {worst:.1e}; DL 5%: mMIMO {:.2} / FCF {:.2} Mbps; DL 90%: mMIMO {:.1} / FCF {:.1} Mbps; \
             FCF DL 50% {:.2} Mbps; model {model}",
            mm5 / 1e6,
            fcf5 / 1e6,
            mm90 / 1e6,
            fcf90 / 1e6,
            fcf50 / 1e6
        ),
    )
}

fn c5_uc_sweep(tmp: &Path) -> Outcome {
    let fpa = CellFreeConfig::default().fractional();
    let power = format!(
        r#""dl_power":{},"ul_power":{}"#,
        serde_json::to_string(&fpa.dl_power).unwrap(),
        serde_json::to_string(&fpa.ul_power).unwrap()
    );
    let mut systems = vec![format!(r#"{{"label":"fcf","association":{{"mode":"fcf"}},{power}}}"#)];
    for n in [1, 5, 10, 20] {
        systems.push(format!(
            r#"{{"label":"uc{n}","association":{{"mode":"uc","n_uc":{n}}},{power}}}"#
        ));
    }
    let body = format!(
        r#"{{"study":"cellfree","seed":2021,"n_drops":100,"params":{{"systems":[{}]}}}}"#,
        systems.join(",")
    );
    let s = campaign(&body, &tmp.join("c5"));
    let med: Vec<f64> = [1, 5, 10, 20]
        .iter()
        .map(|n| pct(system(&s, &format!("uc{n}")), "dl", "p50"))
        .collect();
    let fcf = pct(system(&s, "fcf"), "dl", "p50");
    let mono = med.windows(2).all(|w| w[1] >= w[0]);
    let close = rel(med[2], fcf) <= 0.15;
    outcome(
        mono && close,
        format!(
            "DL medians UC(1,5,10,20) = {} Mbps, FCF {:.2} Mbps; UC(10) off by {:.1}%",
            med.iter().map(|m| format!("{:.2}", m / 1e6)).collect::<Vec<_>>().join(", "),
            fcf / 1e6,
            100.0 * rel(med[2], fcf)
        ),
    )
}

fn c6_iab(tmp: &Path) -> Outcome {
    let s = campaign(r#"{"study":"iab","seed":7,"n_drops":500}"#, &tmp.join("c6"));
    let cov = s["results"]["coverage"].as_array().unwrap();
    let at = |ff: f64, t: f64| {
        cov.iter()
            .find(|e| e["fiber_fraction"].as_f64() == Some(ff) && e["threshold_bps"].as_f64() == Some(t))
            .unwrap()["coverage"]
            .as_f64()
            .unwrap()
    };
    let ffs: Vec<f64> = s["config"]["params"]["fiber_fractions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let mut mono = true;
    for t in [50e6, 100e6, 200e6] {
        mono &= ffs.windows(2).all(|w| at(w[1], t) >= at(w[0], t));
    }
    let mbs = s["results"]["mbs_only"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["threshold_bps"].as_f64() == Some(100e6))
        .unwrap()["coverage"]
        .as_f64()
        .unwrap();
    let iab = at(0.0, 100e6);
    let eq = &s["results"]["equivalent_density"];
    let density = eq["density_per_km2"].as_f64().unwrap();
    let reference = eq["fiber_reference"]["coverage"].as_f64().unwrap();
    let pass = mono && iab > mbs && (60.0..=110.0).contains(&density);
    outcome(
        pass,
        format!(
            "monotone in fiber fraction at 50/100/200 Mbps: {mono}; coverage at 100 Mbps IAB {iab:.3} vs MBS-only {mbs:.3}; \
             equivalent density {density:.1}/km² for target 0.81 ({} evaluations, fiber-60 reference {reference:.3})",
            eq["evaluations"]
        ),
    )
}

fn c7_pqam() -> Outcome {
    let n = 1_000_000;
    let qam = Modulation::Qam(QamConstellation::generate(16).unwrap());
    let pqam = Modulation::Pqam(PqamConstellation::generate(16, 2).unwrap());
    let grid: Vec<_> = [25.0, 30.0, 40.0]
        .iter()
        .map(|snr| PnChannelSpec::new(0.1, *snr).unwrap())
        .collect();
    let q = ser_sweep(&qam, Detector::Euclidean, &grid, n, RngStream::new(7, 0)).unwrap();
    let p = ser_sweep(&pqam, Detector::Polar, &grid[..1], n, RngStream::new(7, 0)).unwrap();
    let floor = rel(q[2].ser, q[1].ser) <= 0.10;
    let beats = p[0].ci_high < q[0].ci_low;

    let spec = PnChannelSpec::new(0.1, 40.0).unwrap();
    let mi_p = mi_estimate(&PqamConstellation::<f64>::generate(64, 8).unwrap(), &spec, 100_000, RngStream::new(7, 1)).unwrap();
    let mi_q = mi_estimate(&QamConstellation::<f64>::generate(64).unwrap(), &spec, 100_000, RngStream::new(7, 1)).unwrap();
    outcome(
        floor && beats && mi_p > mi_q,
        format!(
            "16-QAM SER at 30/40 dB {:.4}/{:.4} (floor {floor}); at 25 dB 16-PQAM(2) polar {:.4} [{:.4}, {:.4}] vs 16-QAM {:.4} [{:.4}, {:.4}]; \
             MI at 40 dB 64-PQAM(8) {mi_p:.3} vs 64-QAM {mi_q:.3} bit",
            q[1].ser, q[2].ser, p[0].ser, p[0].ci_low, p[0].ci_high, q[0].ser, q[0].ci_low, q[0].ci_high
        ),
    )
}

fn c8_thz(tmp: &Path) -> Outcome {
    let out = tmp.join("c8");
    let s = campaign(r#"{"study":"thz","seed":19,"n_drops":100000}"#, &out);
    let (_, rows) = read_csv(&out.join("data.csv"));
    let curve = |factor: f64| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| f(&r[0]) == factor)
            .map(|r| (f(&r[2]), f(&r[5])))
            .collect()
    };
    let opt = curve(1.0);
    let bad = curve(0.1);
    let decreasing = opt.windows(2).all(|w| w[0].1 == 0.0 || w[1].1 < w[0].1);
    let reaches = opt.iter().any(|p| p.1 <= 1e-5);
    let best = opt.iter().map(|p| p.1).filter(|b| *b > 0.0).fold(1.0, f64::min);
    let top = bad[bad.len() - 1];
    let lower = bad.iter().find(|p| p.0 == top.0 - 10.0).unwrap();
    let floors = rel(top.1, lower.1) <= 0.20;

    // 2x2 MIMO: two antennas per side; the planar 2x2 figure is informational
    let lambda = wavelength(1e12);
    let cond = |shape: (usize, usize), delta: f64| {
        condition_number(&normalized(&los_channel(&ArrayConfig::symmetric(shape, delta, 1e12, 1.0).unwrap())))
    };
    let d2 = optimal_separation(1.0, 2, lambda).unwrap();
    let (k_opt, k_bad) = (cond((1, 2), d2), cond((1, 2), d2 / 10.0));
    let k_upa = cond((2, 2), optimal_separation(1.0, 4, lambda).unwrap());
    let arrays = s["results"]["arrays"].as_array().unwrap();
    let pass = decreasing && reaches && floors && k_opt <= 1.05 && k_bad > 100.0;
    outcome(
        pass,
        format!(
            "optimal spacing: decreasing {decreasing}, lowest nonzero BER {best:.1e}, reaches 1e-5 {reaches}; \
             spacing/10: BER {:.3} at {} dB vs {:.3} at {} dB; 2x2 MIMO cond {k_opt:.4} / {k_bad:.3e}; \
             1x16 cond {:.3} / {:.3e}; planar 2x2 at sqrt(D lambda/4) cond {k_upa:.2}",
            top.1,
            top.0,
            lower.1,
            lower.0,
            arrays[0]["condition_number"].as_f64().unwrap(),
            arrays[1]["condition_number"].as_f64().unwrap()
        ),
    )
}

fn c9_budget() -> Outcome {
    let a = terabit_budget(Some(1.0), Some(100e9), Some(60.0), TERABIT).unwrap();
    let b = terabit_budget(Some(1.0), Some(100e9), None, TERABIT).unwrap();
    let c = terabit_budget(None, Some(1e9), Some(10.0), TERABIT).unwrap();
    let pass = a.total_bps == 6e12 && b.spectral_efficiency == 10.0 && c.multiplexing == 100.0;
    outcome(
        pass,
        format!(
            "1 x 100 GHz x 60 = {:e} b/s; 1 Tb/s at 1 x 100 GHz needs {} b/s/Hz; 1 Tb/s at 1 GHz x 10 needs {} streams",
            a.total_bps, b.spectral_efficiency, c.multiplexing
        ),
    )
}

fn c10_determinism(tmp: &Path) -> Outcome {
    let configs = [
        r#"{"study":"irs","seed":1}"#,
        r#"{"study":"cellfree","seed":2,"n_drops":4}"#,
        r#"{"study":"iab","seed":3,"n_drops":20,"params":{"equivalent_density":null}}"#,
        r#"{"study":"pqam","seed":4,"n_drops":20000,"params":{"mi_samples":10000}}"#,
        r#"{"study":"thz","seed":5,"n_drops":5000}"#,
        r#"{"study":"cc","seed":6}"#,
        r#"{"study":"budget","seed":7}"#,
    ];
    let mut differing = Vec::new();
    let mut files = 0;
    for (i, body) in configs.iter().enumerate() {
        let (a, b) = (tmp.join(format!("c10_{i}a")), tmp.join(format!("c10_{i}b")));
        let sa = campaign(body, &a);
        campaign(body, &b);
        for name in sa["files"].as_array().unwrap() {
            let name = name.as_str().unwrap();
            files += 1;
            if fs::read(a.join(name)).unwrap() != fs::read(b.join(name)).unwrap() {
                differing.push(format!("{}/{name}", sa["study"]));
            }
        }
    }
    outcome(
        differing.is_empty(),
        format!("{files} CSV files over 7 studies, differing: {differing:?}"),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let t = tmp.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("PQAM closed-form PAPR", Box::new(c1_papr)),
        ("Rayleigh distance", Box::new(|| c2_rayleigh(t))),
        ("IRS optimal phases and deployment", Box::new(|| c3_irs(t))),
        ("cell-free oracle and system comparison", Box::new(|| c4_cellfree(t))),
        ("user-centric sweep", Box::new(|| c5_uc_sweep(t))),
        ("IAB coverage and equivalent density", Box::new(|| c6_iab(t))),
        ("PQAM under phase noise", Box::new(c7_pqam)),
        ("THz multiplexing", Box::new(|| c8_thz(t))),
        ("budget planner", Box::new(c9_budget)),
        ("determinism", Box::new(|| c10_determinism(t))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {verdict} {name} ({:.1} s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
