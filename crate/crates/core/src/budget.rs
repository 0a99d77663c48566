//! Capacity budget: multiplexing gain × bandwidth × spectral efficiency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default throughput target in bits per second.
pub const TERABIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget<T> {
    pub multiplexing: T,
    pub bandwidth_hz: T,
    pub spectral_efficiency: T,
    pub total_bps: T,
}

/// Completes the triple. With all three factors given the total is their
/// product; with one absent it is solved so that the product hits `target`.
pub fn terabit_budget<T: Real>(
    multiplexing: Option<T>,
    bandwidth_hz: Option<T>,
    spectral_efficiency: Option<T>,
    target: T,
) -> Result<Budget<T>> {
    let check = |name: &'static str, v: Option<T>| -> Result<Option<T>> {
        match v {
            Some(x) if !(x > T::zero()) || !x.is_finite() => {
                Err(Error::arg(name, "must be positive and finite"))
            }
            other => Ok(other),
        }
    };
    let m = check("multiplexing", multiplexing)?;
    let b = check("bandwidth", bandwidth_hz)?;
    let s = check("spectral_efficiency", spectral_efficiency)?;
    let missing = [m, b, s].iter().filter(|v| v.is_none()).count();
    if missing > 1 {
        return Err(Error::arg("budget", "at least two factors are required"));
    }
    if missing == 1 && !(target > T::zero()) {
        return Err(Error::arg("target", "must be positive"));
    }
    let budget = match (m, b, s) {
        (Some(m), Some(b), Some(s)) => Budget {
            multiplexing: m,
            bandwidth_hz: b,
            spectral_efficiency: s,
            total_bps: m * b * s,
        },
        (None, Some(b), Some(s)) => Budget {
            multiplexing: target / (b * s),
            bandwidth_hz: b,
            spectral_efficiency: s,
            total_bps: target,
        },
        (Some(m), None, Some(s)) => Budget {
            multiplexing: m,
            bandwidth_hz: target / (m * s),
            spectral_efficiency: s,
            total_bps: target,
        },
        (Some(m), Some(b), None) => Budget {
            multiplexing: m,
            bandwidth_hz: b,
            spectral_efficiency: target / (m * b),
            total_bps: target,
        },
        _ => unreachable!(),
    };
    Ok(budget)
}
