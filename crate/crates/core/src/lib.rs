//! Simulation models for terabit-era wireless access studies.
//!
//! The closed-form pieces (geometry, link budgets, constellations, array
//! geometry, coded-caching arithmetic) are generic over a [`Real`] scalar so
//! they can be evaluated in `f32` or `f64`; the Monte Carlo campaigns run in
//! `f64`. The type aliases at the crate root fix the scalar to `f64`, which is
//! what the campaign code and the CLI use.

pub mod budget;
pub mod cellfree;
pub mod codedcache;
pub mod error;
pub mod geometry;
pub mod iab;
pub mod irs;
pub mod pqam;
pub mod propagation;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod thz;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use scalar::Real;

/// Planar point in meters.
pub type Point = geometry::Point2D<f64>;
/// Square simulation region.
pub type Region = geometry::Region<f64>;
/// Germ-grain wall field.
pub type BlockageField = geometry::BlockageField<f64>;
/// IRS link description.
pub type IrsLinkConfig = irs::IrsLinkConfig<f64>;
/// IRS phase profile.
pub type IrsPhaseConfig = irs::IrsPhaseConfig<f64>;
/// M-PQAM(Γ) point set.
pub type PqamConstellation = pqam::PqamConstellation<f64>;
/// LoS array geometry.
pub type ArrayConfig = thz::ArrayConfig<f64>;
/// Capacity budget triple.
pub type Budget = budget::Budget<f64>;
/// Coded-caching parameters with an exact rational cache size.
pub type CacheConfig = codedcache::CacheConfig<num_rational::Ratio<u64>>;
