//! Coded-caching arithmetic: caching gain, delivery-rate reduction, degrees
//! of freedom with multiple antennas, and subpacketization.

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar used for the per-user cache size. Exact rationals keep `t` exact.
pub trait CacheScalar: Num + Copy + PartialOrd + FromPrimitive + std::fmt::Debug {
    /// `Some(n)` when the value is a non-negative integer.
    fn exact_integer(&self) -> Option<u64>;
}

impl CacheScalar for f64 {
    fn exact_integer(&self) -> Option<u64> {
        (*self >= 0.0 && self.fract() == 0.0 && *self <= u64::MAX as f64).then_some(*self as u64)
    }
}

impl CacheScalar for f32 {
    fn exact_integer(&self) -> Option<u64> {
        (*self >= 0.0 && self.fract() == 0.0 && *self <= u64::MAX as f32).then_some(*self as u64)
    }
}

impl CacheScalar for Ratio<u64> {
    fn exact_integer(&self) -> Option<u64> {
        self.is_integer().then(|| self.to_integer())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CacheConfig<T> {
    /// Number of users K.
    pub users: u64,
    /// Cache size per user M, in files.
    pub cache_size: T,
    /// Library size N, in files.
    pub n_files: u64,
    /// Transmit antennas L.
    pub antennas: u64,
}

impl<T: CacheScalar> CacheConfig<T> {
    pub fn new(users: u64, cache_size: T, n_files: u64, antennas: u64) -> Result<Self> {
        if users == 0 {
            return Err(Error::arg("users", "must be at least 1"));
        }
        if n_files == 0 {
            return Err(Error::arg("n_files", "must be at least 1"));
        }
        if antennas == 0 {
            return Err(Error::arg("antennas", "must be at least 1"));
        }
        let n = T::from_u64(n_files).ok_or_else(|| Error::arg("n_files", "not representable"))?;
        if !(cache_size >= T::zero() && cache_size <= n) {
            return Err(Error::arg("cache_size", "must lie in [0, n_files]"));
        }
        Ok(Self {
            users,
            cache_size,
            n_files,
            antennas,
        })
    }

    fn lift(v: u64) -> T {
        T::from_u64(v).expect("u64 representable in cache scalar")
    }
}

/// Global caching gain `t = K·M/N`.
pub fn cc_gain<T: CacheScalar>(cfg: &CacheConfig<T>) -> T {
    CacheConfig::<T>::lift(cfg.users) * cfg.cache_size / CacheConfig::<T>::lift(cfg.n_files)
}

/// Delivery-rate reduction factor `1 + t`.
pub fn rate_reduction_factor<T: CacheScalar>(cfg: &CacheConfig<T>) -> T {
    T::one() + cc_gain(cfg)
}

/// Degrees of freedom `t + L`.
pub fn multiantenna_dof<T: CacheScalar>(cfg: &CacheConfig<T>) -> T {
    cc_gain(cfg) + CacheConfig::<T>::lift(cfg.antennas)
}

/// Subpacketization `C(K, t)` of the single-antenna scheme.
pub fn subpacketization_mn<T: CacheScalar>(cfg: &CacheConfig<T>) -> Result<u128> {
    let t = cc_gain(cfg)
        .exact_integer()
        .ok_or_else(|| Error::arg("cache_size", format!("t = {:?} is not an integer", cc_gain(cfg))))?;
    binomial(cfg.users, t)
}

/// `C(n, k)` with overflow detection.
pub fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc · (n − i) is divisible by (i + 1) after the multiplication.
        acc = acc
            .checked_mul(u128::from(n - i))
            .ok_or_else(|| Error::Numerical(format!("C({n}, {k}) overflows")))?
            / u128::from(i + 1);
    }
    Ok(acc)
}
