//! Rate maps, spatial autocorrelograms and G60/G90 gridness scores.

mod autocorr;
mod rate_map;
mod score;

pub use autocorr::{spatial_autocorrelogram, spatial_autocorrelogram_with, Autocorrelogram, DEFAULT_MIN_OVERLAP};
pub use rate_map::{build_rate_map, smooth_rate_map, Arena, RateMap, TrajectorySample};
pub use score::{
    best_gridness, best_gridness_with, gridness_60, gridness_90, ring_correlation, AnnulusSearch, AnnulusSpec,
    GridnessReport, MIN_RING_PIXELS, SCORE_ANGLES,
};

use crate::error::Result;
use crate::geometry::Vec2;
use crate::spatial_codes::{hex_activity, GridCode};

/// Samples `A(r)` at the center of every bin of a `side × side` grid, unit dwell per bin.
pub fn synthetic_rate_map(code: &GridCode, side: usize, bin_size: f64) -> Result<RateMap> {
    let rates = (0..side)
        .flat_map(|r| {
            (0..side).map(move |c| {
                let p = Vec2::new((c as f64 + 0.5) * bin_size, (r as f64 + 0.5) * bin_size);
                Some(hex_activity(code, &p))
            })
        })
        .collect();
    RateMap::from_rates(side, side, rates, bin_size)
}

/// Wave number whose hexagonal lattice has nearest-peak spacing `spacing`.
pub fn hex_magnitude_for_spacing(spacing: f64) -> f64 {
    4.0 * std::f64::consts::PI / (3f64.sqrt() * spacing)
}
